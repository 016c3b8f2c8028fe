// Copyright 2026 The jointmeas Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "jointmeas/optimizer.hpp"
#include "support/test_support.hpp"

using namespace jointmeas;
using jointmeas::testing::TestRng;

namespace {

constexpr double kAlpha = 0.13032427957930848;
constexpr double kTwoAxisTotal = 0.6037943096662364;     // 2 (3 - 2 sqrt(2) + alpha)
constexpr double kEightPerOutcome = 0.2309281393845762;  // (1 - 1/sqrt(3))^2 + 2 beta / 3
constexpr double kFourPerOutcome = 0.2832234838150707;   // (1 - 1/sqrt(3))^2 + 2 gamma / 3
constexpr double kTwoSqrtTwo = 2.8284271247461903;

OptimizationProblem two_axis_problem(Metric metric = Metric::average) {
  return {AxisConfig::standard_two(), Variant::g, metric};
}

OptimizationProblem three_axis_problem(Variant variant, Metric metric = Metric::average) {
  return {AxisConfig::standard_three(), variant, metric};
}

std::vector<Vec3> random_feasible(TestRng& rng, std::size_t blocks) {
  std::vector<Vec3> q;
  for (std::size_t k = 0; k < blocks; ++k) q.push_back(rng.ball_point() * 0.999);
  return q;
}

std::vector<Vec3> luders_vectors(const OptimizationProblem& problem) {
  const auto joint = joint_for_variant(problem.config, problem.variant);
  const auto inst = luders_of_joint(joint);
  std::vector<Vec3> q;
  for (unsigned t = 0; t < inst.size(); ++t)
    if (inst.outcome_active(t)) q.push_back(inst.output(t));
  return q;
}

double objective_value(const OptimizationProblem& problem, const std::vector<Vec3>& q) {
  std::vector<Vec3> grad;
  return objective_and_gradient(problem, q, grad);
}

}  // namespace

TEST_CASE("objective matches the per-branch closed forms") {
  const auto g = two_axis_problem();
  const auto e = three_axis_problem(Variant::e);
  const auto f = three_axis_problem(Variant::f);

  CHECK(problem_block_count(g) == 4);
  CHECK(problem_block_count(e) == 8);
  CHECK(problem_block_count(f) == 4);

  // At the ball centers every branch contributes exactly |target|^2 = 1.
  CHECK(objective_value(g, std::vector<Vec3>(4)) == 4.0);
  CHECK(objective_value(e, std::vector<Vec3>(8)) == 6.0);
  CHECK(objective_value(f, std::vector<Vec3>(4)) == 6.0);

  TestRng rng(0x40);
  for (int rep = 0; rep < 8; ++rep) {
    for (const auto& problem : {g, e, f}) {
      const auto q = random_feasible(rng, problem_block_count(problem));
      double sum = 0.0;
      for (int factor = 0; factor < problem.config.arity(); ++factor)
        for (int sign : {1, -1})
          sum += average_distance_closed(q, problem.config, factor, sign);
      CHECK(objective_value(problem, q) == doctest::Approx(sum).epsilon(1e-13));
    }
  }

  // The worst-case objective sums the endpoint maxima of the four branches.
  const auto gw = two_axis_problem(Metric::worst_case);
  for (int rep = 0; rep < 8; ++rep) {
    const auto q = random_feasible(rng, 4);
    const auto report = distance_report(q, gw.config, Metric::worst_case);
    CHECK(objective_value(gw, q) == doctest::Approx(report.total).epsilon(1e-14));
  }
}

TEST_CASE("gradient matches central finite differences") {
  TestRng rng(0x41);
  const std::vector<OptimizationProblem> problems = {
      two_axis_problem(), three_axis_problem(Variant::e), three_axis_problem(Variant::f)};
  const double h = 1e-6;
  int points = 0;
  for (const auto& problem : problems) {
    for (int rep = 0; rep < 7; ++rep) {
      auto q = random_feasible(rng, problem_block_count(problem));
      std::vector<Vec3> grad;
      objective_and_gradient(problem, q, grad);
      for (std::size_t k = 0; k < q.size(); ++k) {
        for (int c = 0; c < 3; ++c) {
          double* slot = c == 0 ? &q[k].x : c == 1 ? &q[k].y : &q[k].z;
          const double kept = *slot;
          *slot = kept + h;
          const double up = objective_value(problem, q);
          *slot = kept - h;
          const double down = objective_value(problem, q);
          *slot = kept;
          const double fd = (up - down) / (2.0 * h);
          const double an = c == 0 ? grad[k].x : c == 1 ? grad[k].y : grad[k].z;
          CHECK(std::abs(fd - an) < 1e-6);
        }
      }
      ++points;
    }
  }
  CHECK(points >= 20);
}

TEST_CASE("objective is convex along segments") {
  TestRng rng(0x42);
  for (Metric metric : {Metric::average, Metric::worst_case}) {
    for (Variant variant : {Variant::g, Variant::e, Variant::f}) {
      if (metric == Metric::worst_case && variant == Variant::e) continue;
      const OptimizationProblem problem = {
          variant == Variant::g ? AxisConfig::standard_two() : AxisConfig::standard_three(),
          variant, metric};
      const std::size_t blocks = problem_block_count(problem);
      for (int rep = 0; rep < 6; ++rep) {
        const auto q1 = random_feasible(rng, blocks);
        const auto q2 = random_feasible(rng, blocks);
        const double v1 = objective_value(problem, q1);
        const double v2 = objective_value(problem, q2);
        for (double lam : {0.2, 0.5, 0.8}) {
          std::vector<Vec3> mid;
          for (std::size_t k = 0; k < blocks; ++k)
            mid.push_back(q1[k] * lam + q2[k] * (1.0 - lam));
          CHECK(objective_value(problem, mid) <= lam * v1 + (1.0 - lam) * v2 + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("minimize finds the known average optima") {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const double inv_sqrt3 = 1.0 / std::sqrt(3.0);

  // Two axes: the optimum puts every vector at (+-x+-y)/sqrt(2), which is the
  // Lueders choice for the four-outcome joint.
  const auto g = two_axis_problem();
  const auto g_run = minimize(g);
  CHECK(g_run.value == doctest::Approx(kTwoAxisTotal).epsilon(1e-12));
  CHECK(g_run.certificate.satisfied);
  CHECK(g_run.certificate.kkt_residual < 1e-9);
  const auto g_luders = luders_vectors(g);
  REQUIRE(g_run.q.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK((g_run.q[k] - g_luders[k]).norm() < 1e-6);
    CHECK(g_run.q[k].norm() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(std::abs(g_run.q[k].x) - inv_sqrt2) < 1e-6);
    CHECK(std::abs(std::abs(g_run.q[k].y) - inv_sqrt2) < 1e-6);
  }

  // Eight outcomes: (+-x+-y+-z)/sqrt(3).
  const auto e = three_axis_problem(Variant::e);
  const auto e_run = minimize(e);
  CHECK(e_run.value == doctest::Approx(6.0 * kEightPerOutcome).epsilon(1e-12));
  CHECK(e_run.certificate.satisfied);
  const auto e_luders = luders_vectors(e);
  for (std::size_t k = 0; k < 8; ++k) {
    CHECK((e_run.q[k] - e_luders[k]).norm() < 1e-6);
    CHECK(std::abs(std::abs(e_run.q[k].z) - inv_sqrt3) < 1e-6);
  }

  // Four even-parity outcomes: the same vectors restricted to even parity.
  const auto f = three_axis_problem(Variant::f);
  const auto f_run = minimize(f);
  CHECK(f_run.value == doctest::Approx(6.0 * kFourPerOutcome).epsilon(1e-12));
  CHECK(f_run.certificate.satisfied);
  const auto f_luders = luders_vectors(f);
  for (std::size_t k = 0; k < 4; ++k) CHECK((f_run.q[k] - f_luders[k]).norm() < 1e-6);

  // The distance report of the optimum has equal branches.
  const auto report = distance_report(g_run.q, g.config, Metric::average);
  CHECK(equal_distance_check(report, 1e-9));
}

TEST_CASE("random starts converge to one value") {
  TestRng rng(0x43);
  const std::vector<OptimizationProblem> problems = {
      two_axis_problem(), three_axis_problem(Variant::e), three_axis_problem(Variant::f)};
  const std::vector<double> expected = {kTwoAxisTotal, 6.0 * kEightPerOutcome,
                                        6.0 * kFourPerOutcome};
  for (std::size_t p = 0; p < problems.size(); ++p) {
    const int starts = p == 0 ? 50 : 12;
    for (int s = 0; s < starts; ++s) {
      const auto run =
          minimize(problems[p], random_feasible(rng, problem_block_count(problems[p])));
      CHECK(std::abs(run.value - expected[p]) < 1e-8);
      CHECK(run.certificate.satisfied);
    }
  }
}

TEST_CASE("certify evaluates the optimality criterion") {
  const auto g = two_axis_problem();
  const Vec3 x{1, 0, 0};

  // The known optimum satisfies the criterion with a tight residual.
  const auto opt = certify(g, luders_vectors(g));
  CHECK(opt.satisfied);
  CHECK(opt.kkt_residual < 1e-9);
  CHECK(opt.gradient.size() == 4);
  // Each block gradient is antiparallel to its unit-norm vector.
  const auto q_opt = luders_vectors(g);
  for (std::size_t k = 0; k < 4; ++k) {
    const double n = opt.gradient[k].norm();
    CHECK(n > 0.1);
    CHECK((opt.gradient[k] * (1.0 / n) + q_opt[k]).norm() < 1e-12);
  }

  // The preferred-direction choice reproduces one factor exactly but is not
  // optimal: total 2 (1 + alpha) and a large residual.
  const std::vector<Vec3> preferred = {x, x, -x, -x};
  CHECK(objective_value(g, preferred) == doctest::Approx(2.0 * (1.0 + kAlpha)).epsilon(1e-14));
  const auto pref = certify(g, preferred);
  CHECK(!pref.satisfied);
  CHECK(pref.kkt_residual > 0.1);
  const auto pref_report = distance_report(preferred, g.config, Metric::average);
  CHECK(!equal_distance_check(pref_report, 1e-9));

  // Infeasible points are rejected.
  std::vector<Vec3> outside = preferred;
  outside[2] = Vec3{0.0, 1.5, 0.0};
  CHECK_THROWS_AS(certify(g, outside), Error);
}

TEST_CASE("worst-case minimize reaches the symmetric optimum") {
  const auto problem = two_axis_problem(Metric::worst_case);
  const auto run = minimize(problem);
  CHECK(run.value == doctest::Approx(kTwoSqrtTwo).epsilon(1e-9));
  CHECK(run.certificate.satisfied);

  // The optimum is the Lueders observable mixed with white noise at weight
  // 1/sqrt(2): outputs (+-x +- y)/2.
  const auto joint = joint_for_variant(problem.config, Variant::g);
  const auto mixture = worst_case_mixture(joint, 1.0 / std::sqrt(2.0));
  REQUIRE(run.q.size() == 4);
  for (unsigned t = 0; t < 4; ++t) {
    CHECK((run.q[t] - mixture.output(t)).norm() < 1e-6);
    CHECK(run.q[t].norm() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
  }

  // All four branch distances equal 1/sqrt(2).
  const auto report = distance_report(run.q, problem.config, Metric::worst_case);
  CHECK(equal_distance_check(report, 1e-6));
  for (const auto& [key, value] : report.per_outcome)
    CHECK(value == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));

  // The degenerate preferred-direction choice attains the same total without
  // equal branches; the two totals agree to full precision.
  const Vec3 x{1, 0, 0};
  const std::vector<Vec3> preferred = {x, x, -x, -x};
  const auto pref_report = distance_report(preferred, problem.config, Metric::worst_case);
  CHECK(pref_report.total == doctest::Approx(kTwoSqrtTwo).epsilon(1e-9));
  CHECK(std::abs(pref_report.total - report.total) < 1e-9);
  CHECK(!equal_distance_check(pref_report, 1e-9));
}

TEST_CASE("worst-case minimize handles the four-outcome form") {
  // Three axes, four outcomes: six two-part branches, each outcome sitting
  // in three of them.  The optimum mixes the Lueders directions down to
  // length 1/sqrt(3), every branch distance is sqrt(2/3), and the total is
  // 2*sqrt(6).
  const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
  const auto problem = three_axis_problem(Variant::f, Metric::worst_case);
  const auto run = minimize(problem);
  CHECK(run.value == doctest::Approx(2.0 * std::sqrt(6.0)).epsilon(1e-9));
  CHECK(run.certificate.satisfied);

  const auto joint = joint_for_variant(problem.config, Variant::f);
  const auto mixture = worst_case_mixture(joint, inv_sqrt3);
  REQUIRE(run.q.size() == 4);
  std::size_t pos = 0;
  for (unsigned t = 0; t < joint.size(); ++t) {
    if (joint.effect(t).trace() <= 0.0) continue;
    CHECK((run.q[pos] - mixture.output(t)).norm() < 1e-6);
    CHECK(run.q[pos].norm() == doctest::Approx(inv_sqrt3).epsilon(1e-6));
    ++pos;
  }
  CHECK(pos == 4);

  const auto report = distance_report(run.q, problem.config, Metric::worst_case);
  CHECK(equal_distance_check(report, 1e-6));
  for (const auto& [key, value] : report.per_outcome)
    CHECK(value == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-6));
}

TEST_CASE("optimizer input validation") {
  const auto g = two_axis_problem();

  // Wrong block count.
  std::vector<Vec3> grad;
  CHECK_THROWS_AS(objective_and_gradient(g, std::vector<Vec3>(3), grad), Error);
  CHECK_THROWS_AS(minimize(g, std::vector<Vec3>(5)), Error);

  // Variant and axis count must match.
  CHECK_THROWS_AS(problem_block_count({AxisConfig::standard_two(), Variant::e,
                                       Metric::average}),
                  Error);

  // The eight-outcome joint has no two-part marginals to take a worst case
  // over.
  CHECK_THROWS_AS(minimize(three_axis_problem(Variant::e, Metric::worst_case)), Error);

  // A tiny iteration budget fails loudly (the first residual is sqrt(2)).
  MinimizeParams strict;
  strict.max_iterations = 1;
  CHECK_THROWS_AS(minimize(g, {}, strict), Error);
}
