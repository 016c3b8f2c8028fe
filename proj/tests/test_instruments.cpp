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

#include "jointmeas/instruments.hpp"
#include "jointmeas/observables.hpp"
#include "support/matrix_oracle.hpp"
#include "support/test_support.hpp"

using namespace jointmeas;
using jointmeas::testing::from_matrix;
using jointmeas::testing::Mat2;
using jointmeas::testing::psd_sqrt;
using jointmeas::testing::rotate;
using jointmeas::testing::TestRng;
using jointmeas::testing::to_matrix;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
const double kInvSqrt3 = 1.0 / std::sqrt(3.0);

bool ops_close(const HermitianOp& a, const HermitianOp& b, double tol = 1e-12) {
  const HermitianOp d = a - b;
  return std::abs(d.scalar) <= tol && d.vec.norm() <= tol;
}

}  // namespace

TEST_CASE("von Neumann instrument") {
  const BinaryInstrument vx = von_neumann(sharp_observable(axis_x()));

  TestRng rng(0xa11u);
  for (int i = 0; i < 50; ++i) {
    const QubitState rho = rng.random_state();
    const HermitianOp out = vx.apply(+1, rho);
    const double p = vx.observable().probability(rho, +1);
    CHECK(out.trace() == doctest::Approx(p).epsilon(1e-12));
    if (p > 1e-6) {
      // Normalised output is the + eigenstate regardless of the input.
      CHECK((out.vec / out.scalar - Vec3{1, 0, 0}).norm() < 1e-12);
    }
  }

  // Eigenstate input: deterministic outcome.
  CHECK(vx.apply(+1, QubitState({1, 0, 0})).trace() == doctest::Approx(1.0));
  CHECK(vx.apply(-1, QubitState({1, 0, 0})).trace() == doctest::Approx(0.0));

  // Maximally mixed input: fair coin, pure outputs.
  const HermitianOp plus = vx.apply(+1, maximally_mixed_state());
  const HermitianOp minus = vx.apply(-1, maximally_mixed_state());
  CHECK(plus.trace() == doctest::Approx(0.5));
  CHECK(minus.trace() == doctest::Approx(0.5));
  CHECK((plus.vec / plus.scalar - Vec3{1, 0, 0}).norm() < 1e-12);
  CHECK((minus.vec / minus.scalar - Vec3{-1, 0, 0}).norm() < 1e-12);

  CHECK_THROWS_AS(von_neumann(smeared_observable(axis_x(), 0.5)), Error);
  try {
    von_neumann(smeared_observable(axis_x(), 0.5));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotSharp);
  }
}

TEST_CASE("Lueders conjugation matches the matrix oracle") {
  TestRng rng(0xb22u);
  for (int i = 0; i < 150; ++i) {
    const HermitianOp e = rng.random_effect();
    const QubitState rho = rng.random_state();
    const Mat2 root = psd_sqrt(to_matrix(e));
    const Mat2 expected = root * to_matrix(rho.op()) * root;
    const HermitianOp mine = luders_operation(e, rho);
    const HermitianOp oracle = from_matrix(expected);
    CHECK(ops_close(mine, oracle, 1e-12));
  }
}

TEST_CASE("Lueders instrument of a binary observable") {
  TestRng rng(0xc33u);

  // eta = 1: coincides with the von Neumann instrument.
  const BinaryInstrument lx = luders(smeared_observable(axis_x(), 1.0));
  const BinaryInstrument vx = von_neumann(sharp_observable(axis_x()));
  for (int i = 0; i < 50; ++i) {
    const QubitState rho = rng.random_state();
    CHECK(ops_close(lx.apply(+1, rho), vx.apply(+1, rho)));
    CHECK(ops_close(lx.apply(-1, rho), vx.apply(-1, rho)));
  }

  // Coefficient extraction: on the + eigenstate of sigma_x the + operation
  // acts as (1+eta)/2 times the von Neumann + operation.
  const double eta = kInvSqrt2;
  const BinaryInstrument la = luders(smeared_observable(axis_x(), eta));
  const QubitState xplus(Vec3{1, 0, 0});
  const HermitianOp out = la.apply(+1, xplus);
  const HermitianOp vn_out = vx.apply(+1, xplus);  // = X(1) as a state op
  CHECK(ops_close(out, vn_out * (0.5 * (1.0 + eta)), 1e-12));

  // eta = 0: each outcome halves the input state.
  const BinaryInstrument l0 = luders(smeared_observable(axis_x(), 0.0));
  for (int i = 0; i < 20; ++i) {
    const QubitState rho = rng.random_state();
    CHECK(ops_close(l0.apply(+1, rho), rho.op() * 0.5));
    CHECK(ops_close(l0.apply(-1, rho), rho.op() * 0.5));
  }

  // Outcome traces always sum to one.
  for (int i = 0; i < 50; ++i) {
    const QubitState rho = rng.random_state();
    CHECK(la.apply(+1, rho).trace() + la.apply(-1, rho).trace() ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("Lueders pair compatibility criterion") {
  // The canonical configuration: critically smeared orthogonal pair.
  const BinaryObservable a = smeared_observable(axis_x(), kInvSqrt2);
  const BinaryObservable b = smeared_observable(axis_y(), kInvSqrt2);
  CHECK_FALSE(luders_pair_jointly_measurable(a, b));

  // Proportional quarter-identity effects.
  const BinaryObservable q1 = BinaryObservable::from_plus({0.25, {0, 0, 0}});
  CHECK(luders_pair_jointly_measurable(q1, q1));

  // Boundary of the operator inequality: A(1) + B(1) = I.
  const BinaryObservable sx = smeared_observable(axis_x(), 1.0);
  const BinaryObservable sx_flip = BinaryObservable::from_plus(sx.minus());
  CHECK(luders_pair_jointly_measurable(sx, sx_flip));

  // Proportionality detected in either order.
  const BinaryObservable half = BinaryObservable::from_plus({0.4, {0.1, 0, 0}});
  const BinaryObservable scaled = BinaryObservable::from_plus({0.2, {0.05, 0, 0}});
  CHECK(luders_pair_jointly_measurable(half, scaled));
  CHECK(luders_pair_jointly_measurable(scaled, half));
}

TEST_CASE("rank-1 instruments from joint observables") {
  const JointObservable g = joint_observable_g(axis_x(), axis_y());

  // Lueders choice: xi_t = 2 G_t, i.e. Bloch vectors (+-x +-y)/sqrt(2).
  const Rank1Instrument lg = luders_of_joint(g);
  for (unsigned t = 0; t < 4; ++t) {
    const double i = outcome_sign(2, t, 0);
    const double j = outcome_sign(2, t, 1);
    const Vec3 expected = Vec3{i, j, 0} * kInvSqrt2;
    CHECK((lg.output(t) - expected).norm() < 1e-12);
    CHECK(lg.outcome_active(t));
  }

  const JointObservable e = joint_observable_e(axis_x(), axis_y(), axis_z());
  const Rank1Instrument le = luders_of_joint(e);
  for (unsigned t = 0; t < 8; ++t) {
    const double i = outcome_sign(3, t, 0);
    const double j = outcome_sign(3, t, 1);
    const double k = outcome_sign(3, t, 2);
    CHECK((le.output(t) - Vec3{i, j, k} * kInvSqrt3).norm() < 1e-12);
  }

  const JointObservable f = joint_observable_f(axis_x(), axis_y(), axis_z());
  const Rank1Instrument lf = luders_of_joint(f);
  CHECK((lf.output(outcome_index({+1, -1, -1})) - Vec3{1, -1, -1} * kInvSqrt3).norm() < 1e-12);
  for (unsigned t = 0; t < 8; ++t) {
    CHECK(lf.outcome_active(t) == (outcome_parity(3, t) > 0));
    if (!lf.outcome_active(t)) CHECK(lf.output(t).norm() == 0.0);
  }

  // Supplying explicit output states.
  TestRng rng(0xd44u);
  std::vector<Vec3> custom(8);
  for (auto& v : custom) v = rng.ball_point();
  const Rank1Instrument ce = rank1_from_joint(e, custom);
  for (unsigned t = 0; t < 8; ++t) CHECK((ce.output(t) - custom[t]).norm() == 0.0);

  // Full-rank effects are rejected.
  const std::vector<HermitianOp> trivial(4, HermitianOp{0.25, {0, 0, 0}});
  const JointObservable coins(2, trivial);
  CHECK_THROWS_AS(luders_of_joint(coins), Error);
  try {
    luders_of_joint(coins);
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::NotRankOne);
  }

  // Output vectors must stay inside the Bloch ball.
  std::vector<Vec3> outside(4, Vec3{0, 0, 0});
  outside[0] = {1.2, 0, 0};
  CHECK_THROWS_AS(rank1_from_joint(g, outside), Error);
}

TEST_CASE("worst-case mixture instrument") {
  const JointObservable g = joint_observable_g(axis_x(), axis_y());

  const Rank1Instrument mixed = worst_case_mixture(g, kInvSqrt2);
  for (unsigned t = 0; t < 4; ++t) {
    const double i = outcome_sign(2, t, 0);
    const double j = outcome_sign(2, t, 1);
    CHECK((mixed.output(t) - Vec3{i, j, 0} * 0.5).norm() < 1e-12);
  }

  const Rank1Instrument full = worst_case_mixture(g, 1.0);
  const Rank1Instrument lg = luders_of_joint(g);
  for (unsigned t = 0; t < 4; ++t) CHECK((full.output(t) - lg.output(t)).norm() < 1e-15);

  const Rank1Instrument none = worst_case_mixture(g, 0.0);
  for (unsigned t = 0; t < 4; ++t) CHECK(none.output(t).norm() == 0.0);

  CHECK_THROWS_AS(worst_case_mixture(g, 1.5), Error);
  try {
    worst_case_mixture(g, -0.1);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MixOutOfRange);
  }
}

TEST_CASE("trace preservation of rank-1 instruments") {
  TestRng rng(0xe55u);
  const JointObservable g = joint_observable_g(axis_x(), axis_y());
  const JointObservable f = joint_observable_f(axis_x(), axis_y(), axis_z());
  for (const Rank1Instrument& inst :
       {luders_of_joint(g), worst_case_mixture(g, 0.3), luders_of_joint(f)}) {
    for (int i = 0; i < 50; ++i) {
      const QubitState rho = rng.random_state();
      double total = 0.0;
      for (unsigned t = 0; t < inst.size(); ++t) total += inst.operation(t, rho).trace();
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("marginal operations") {
  const JointObservable g = joint_observable_g(axis_x(), axis_y());
  const Rank1Instrument lg = luders_of_joint(g);

  const MarginalOperation a_plus = marginal_operation(lg, 0, +1);
  REQUIRE(a_plus.parts().size() == 2);
  CHECK(a_plus.parts()[0].index == outcome_index({+1, +1}));
  CHECK(a_plus.parts()[1].index == outcome_index({+1, -1}));

  const JointObservable e = joint_observable_e(axis_x(), axis_y(), axis_z());
  const Rank1Instrument le = luders_of_joint(e);
  const MarginalOperation c_minus = marginal_operation(le, 2, -1);
  REQUIRE(c_minus.parts().size() == 4);
  for (const auto& part : c_minus.parts()) CHECK(outcome_sign(3, part.index, 2) == -1);

  // Marginal consistency: operation trace equals marginal-observable
  // probability, for every factor and sign.
  TestRng rng(0xf66u);
  for (int k = 0; k < 3; ++k) {
    const BinaryObservable mk = marginals(e, k);
    for (int sign : {+1, -1}) {
      const MarginalOperation m = marginal_operation(le, k, sign);
      for (int i = 0; i < 30; ++i) {
        const QubitState rho = rng.random_state();
        CHECK(m.probability(rho) == doctest::Approx(mk.probability(rho, sign)).epsilon(1e-12));
        CHECK(m.apply(rho).trace() == doctest::Approx(mk.probability(rho, sign)).epsilon(1e-12));
      }
    }
  }

  // The F instrument has two-part marginals (zero effects drop out).
  const Rank1Instrument lf = luders_of_joint(joint_observable_f(axis_x(), axis_y(), axis_z()));
  CHECK(marginal_operation(lf, 0, +1).parts().size() == 2);

  CHECK_THROWS_AS(marginal_operation(lg, 2, +1), Error);
  CHECK_THROWS_AS(marginal_operation(lg, 0, 2), Error);
}

TEST_CASE("normalized marginal outputs") {
  const JointObservable g = joint_observable_g(axis_x(), axis_y());
  const Rank1Instrument lg = luders_of_joint(g);
  const MarginalOperation a_plus = marginal_operation(lg, 0, +1);

  // Maximally mixed input: the two branches average to x/sqrt(2).
  const QubitState mixed_out = normalized_output(a_plus, maximally_mixed_state());
  CHECK((mixed_out.bloch() - Vec3{kInvSqrt2, 0, 0}).norm() < 1e-12);

  // Input along y: mixing ratio f = 1/sqrt(2).
  const QubitState y_out = normalized_output(a_plus, QubitState({0, 1, 0}));
  const Vec3 q_pp = Vec3{1, 1, 0} * kInvSqrt2;
  const Vec3 q_pm = Vec3{1, -1, 0} * kInvSqrt2;
  const double f = 1.0 / std::sqrt(2.0);
  const Vec3 expected = q_pp * (0.5 * (1 + f)) + q_pm * (0.5 * (1 - f));
  CHECK((y_out.bloch() - expected).norm() < 1e-12);

  // Identical branch states: input independence.
  TestRng rng(0x177u);
  std::vector<Vec3> same(4, Vec3{0.2, 0.1, 0.0});
  const Rank1Instrument constant = rank1_from_joint(g, same);
  const MarginalOperation m = marginal_operation(constant, 0, +1);
  for (int i = 0; i < 20; ++i) {
    CHECK((normalized_output(m, rng.random_state()).bloch() - Vec3{0.2, 0.1, 0.0}).norm() <
          1e-12);
  }

  // A sharp-in-x joint observable gives zero probability on the -x state.
  const std::vector<HermitianOp> sharp_effects = {{0.25, {0.25, 0, 0}},
                                                  {0.25, {0.25, 0, 0}},
                                                  {0.25, {-0.25, 0, 0}},
                                                  {0.25, {-0.25, 0, 0}}};
  const JointObservable sharp_joint(2, sharp_effects);
  const Rank1Instrument si = luders_of_joint(sharp_joint);
  const MarginalOperation sm = marginal_operation(si, 0, +1);
  CHECK_THROWS_AS(normalized_output(sm, QubitState({-1, 0, 0})), Error);
  try {
    normalized_output(sm, QubitState({-1, 0, 0}));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroProbability);
  }
}

TEST_CASE("structure theorem check") {
  const JointObservable g = joint_observable_g(axis_x(), axis_y());
  const HermitianOp g11 = g.effect({+1, +1});

  // Plain Lueders rule: passes with constant output 2 G(1,1).
  const OperationRule luders_rule = [g11](const QubitState& rho) {
    return luders_operation(g11, rho);
  };
  CHECK(structure_check({luders_rule}, g11));

  // Unitarily rotated rule: still passes (with a rotated fixed state).
  const OperationRule rotated_rule = [g11](const QubitState& rho) {
    HermitianOp out = luders_operation(g11, rho);
    out.vec = rotate(out.vec, {0, 0, 1}, 1.1);
    return out;
  };
  CHECK(structure_check({rotated_rule}, g11));

  // Convex mixture of rotated Lueders rules: the sum is still an operation
  // with the same effect, so the theorem applies to it as a whole.
  const OperationRule half_a = [g11](const QubitState& rho) {
    HermitianOp out = luders_operation(g11, rho) * 0.5;
    out.vec = rotate(out.vec, {0, 1, 0}, 0.4);
    return out;
  };
  const OperationRule half_b = [g11](const QubitState& rho) {
    HermitianOp out = luders_operation(g11, rho) * 0.5;
    out.vec = rotate(out.vec, {1, 0, 0}, -0.9);
    return out;
  };
  CHECK(structure_check({half_a, half_b}, g11));

  // Trace-condition violation is rejected.
  const OperationRule wrong_trace = [g11](const QubitState& rho) {
    return luders_operation(g11, rho) * 0.9;
  };
  CHECK_THROWS_AS(structure_check({wrong_trace}, g11), Error);
  try {
    structure_check({wrong_trace}, g11);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TraceMismatch);
  }
}
