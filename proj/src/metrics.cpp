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

#include "jointmeas/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "jointmeas/kernels.hpp"

namespace jointmeas {
namespace {

constexpr double kOrthoTol = 1e-9;
constexpr double kNormTol = 1e-9;

void require_sign(int sign) {
  if (sign != 1 && sign != -1)
    throw Error(ErrorCode::IndexOutOfRange, "sign must be +1 or -1");
}

int arity_of(Variant variant) { return variant == Variant::g ? 2 : 3; }

// Variant addressed by an outcome-vector count under the given config; the
// four-outcome three-axis form lists only the even-parity outcomes.
Variant variant_for_count(const AxisConfig& config, std::size_t count) {
  if (config.arity() == 2 && count == 4) return Variant::g;
  if (config.arity() == 3 && count == 8) return Variant::e;
  if (config.arity() == 3 && count == 4) return Variant::f;
  throw Error(ErrorCode::IndexOutOfRange,
              "outcome vector count does not match the axis configuration");
}

void require_unit_ball(const std::vector<Vec3>& q) {
  for (const auto& v : q)
    if (v.norm() > 1.0 + kNormTol)
      throw Error(ErrorCode::VectorTooLong, "outcome vector lies outside the unit ball");
}

// Position of a joint outcome among the variant's nonzero outcomes.
int outcome_position(Variant variant, unsigned outcome) {
  if (variant != Variant::f) return outcome;
  switch (outcome) {
    case 0:
      return 0;
    case 3:
      return 1;
    case 5:
      return 2;
    case 6:
      return 3;
    default:
      throw Error(ErrorCode::IndexOutOfRange, "outcome has a zero effect");
  }
}

kernels::MarginalDistanceParams marginal_params(const Rank1Instrument& inst,
                                                const AxisConfig& config, int factor,
                                                int sign) {
  const auto op = marginal_operation(inst, factor, sign);
  kernels::MarginalDistanceParams p;
  p.part_count = static_cast<int>(op.parts().size());
  for (int t = 0; t < p.part_count; ++t) {
    p.e0[t] = op.parts()[t].effect.scalar;
    p.e[t] = op.parts()[t].effect.vec;
    p.q[t] = op.parts()[t].output;
  }
  p.target = config.axis(factor).unit() * static_cast<double>(sign);
  return p;
}

class MarginalDistanceIntegrand final : public BatchIntegrand {
 public:
  explicit MarginalDistanceIntegrand(const kernels::MarginalDistanceParams& p) : p_(p) {}
  void evaluate(const double* x, const double* y, const double* z, double* out,
                std::size_t count) const override {
    kernels::marginal_distance_sq(p_, x, y, z, out, count);
  }

 private:
  kernels::MarginalDistanceParams p_;
};

}  // namespace

const char* metric_name(Metric metric) {
  return metric == Metric::average ? "average" : "worst-case";
}

const char* variant_name(Variant variant) {
  switch (variant) {
    case Variant::g:
      return "g";
    case Variant::e:
      return "e";
    case Variant::f:
      return "f";
  }
  return "unknown";
}

AxisConfig::AxisConfig(std::vector<Axis> axes, double eta)
    : axes_(std::move(axes)), eta_(eta) {
  if (axes_.size() != 2 && axes_.size() != 3)
    throw Error(ErrorCode::IndexOutOfRange, "axis configuration needs 2 or 3 axes");
  for (std::size_t i = 0; i < axes_.size(); ++i)
    for (std::size_t j = i + 1; j < axes_.size(); ++j)
      if (std::abs(axes_[i].dot(axes_[j])) > kOrthoTol)
        throw Error(ErrorCode::AxesNotOrthogonal, "axes must be pairwise orthogonal");
  if (axes_.size() == 3 &&
      axes_[0].unit().cross(axes_[1].unit()).dot(axes_[2].unit()) < 0.0)
    throw Error(ErrorCode::AxesNotOrthogonal, "three-axis frame must be right-handed");
  if (!(eta_ > 0.0) || eta_ > 1.0)
    throw Error(ErrorCode::EtaOutOfRange, "eta must lie in (0, 1]");
}

AxisConfig AxisConfig::standard_two() {
  return AxisConfig({axis_x(), axis_y()}, 1.0 / std::numbers::sqrt2);
}

AxisConfig AxisConfig::standard_three() {
  return AxisConfig({axis_x(), axis_y(), axis_z()}, 1.0 / std::numbers::sqrt3);
}

const Axis& AxisConfig::axis(int factor) const {
  if (factor < 0 || factor >= arity())
    throw Error(ErrorCode::IndexOutOfRange, "factor index out of range");
  return axes_[static_cast<std::size_t>(factor)];
}

JointObservable joint_for_variant(const AxisConfig& config, Variant variant) {
  if (config.arity() != arity_of(variant))
    throw Error(ErrorCode::UnsupportedCombination,
                "variant arity does not match the axis configuration");
  switch (variant) {
    case Variant::g:
      return joint_observable_g(config.axis(0), config.axis(1));
    case Variant::e:
      return joint_observable_e(config.axis(0), config.axis(1), config.axis(2));
    case Variant::f:
      return joint_observable_f(config.axis(0), config.axis(1), config.axis(2));
  }
  throw Error(ErrorCode::UnsupportedCombination, "unknown variant");
}

Variant default_variant(const AxisConfig& config) {
  return config.arity() == 2 ? Variant::g : Variant::e;
}

namespace detail {

std::vector<unsigned> branch_outcomes(Variant variant, int factor, int sign) {
  require_sign(sign);
  const int arity = arity_of(variant);
  if (factor < 0 || factor >= arity)
    throw Error(ErrorCode::IndexOutOfRange, "factor index out of range");
  std::vector<unsigned> outcomes;
  for (unsigned t = 0; t < outcome_count(arity); ++t) {
    if (outcome_sign(arity, t, factor) != sign) continue;
    if (variant == Variant::f && outcome_parity(arity, t) < 0) continue;
    outcomes.push_back(t);
  }
  return outcomes;
}

double transverse_factor(const Vec3& r, const AxisConfig& config, int factor, int sign,
                         int transverse) {
  require_sign(sign);
  const double den =
      std::numbers::sqrt3 + static_cast<double>(sign) * r.dot(config.axis(factor).unit());
  return r.dot(config.axis(transverse).unit()) / den;
}

}  // namespace detail

double f_factor(const Vec3& r, const AxisConfig& config, int factor, int sign) {
  require_sign(sign);
  const Vec3 a = config.axis(factor).unit();
  if (config.arity() == 2) {
    const Vec3 t = config.axis(1 - factor).unit();
    return r.dot(t) / (std::numbers::sqrt2 + static_cast<double>(sign) * r.dot(a));
  }
  // Three-axis four-outcome form: the transverse direction combines the two
  // remaining axes with the signs of the branch's lowest nonzero outcome.
  const auto outcomes = detail::branch_outcomes(Variant::f, factor, sign);
  Vec3 u{0, 0, 0};
  for (int m = 0; m < 3; ++m) {
    if (m == factor) continue;
    u = u + config.axis(m).unit() *
                static_cast<double>(outcome_sign(3, outcomes.front(), m));
  }
  return r.dot(u) / (std::numbers::sqrt3 + static_cast<double>(sign) * r.dot(a));
}

double pointwise_distance(const Rank1Instrument& inst, const AxisConfig& config, int factor,
                          int sign, const QubitState& s) {
  require_sign(sign);
  const auto op = marginal_operation(inst, factor, sign);
  const auto out = normalized_output(op, s);
  const Vec3 target = config.axis(factor).unit() * static_cast<double>(sign);
  return (out.bloch() - target).norm();
}

double alpha() {
  return 2.0 - 1.5 * std::numbers::sqrt2 * std::log(1.0 + std::numbers::sqrt2);
}

double beta() {
  return 0.5 * (7.0 - 3.0 * std::numbers::sqrt3 * std::log(2.0 + std::numbers::sqrt3));
}

double gamma_const() { return 2.0 * beta(); }

double average_distance_closed(const std::vector<Vec3>& q, const AxisConfig& config,
                               int factor, int sign) {
  require_sign(sign);
  require_unit_ball(q);
  const Variant variant = variant_for_count(config, q.size());
  const Vec3 target = config.axis(factor).unit() * static_cast<double>(sign);
  const auto outcomes = detail::branch_outcomes(variant, factor, sign);

  if (variant == Variant::e) {
    Vec3 mean{0, 0, 0};
    for (unsigned t : outcomes) mean = mean + q[t];
    mean = mean * 0.25;
    double value = (mean - target).norm2();
    for (int m = 0; m < 3; ++m) {
      if (m == factor) continue;
      Vec3 u{0, 0, 0};
      for (unsigned t : outcomes)
        u = u + q[t] * static_cast<double>(outcome_sign(3, t, m));
      u = u * 0.25;
      value += beta() * u.norm2();
    }
    return value;
  }

  const Vec3& qa = q[static_cast<std::size_t>(outcome_position(variant, outcomes[0]))];
  const Vec3& qb = q[static_cast<std::size_t>(outcome_position(variant, outcomes[1]))];
  const Vec3 mean = (qa + qb) * 0.5;
  const Vec3 half_diff = (qa - qb) * 0.5;
  const double transverse = variant == Variant::g ? alpha() : gamma_const();
  return (mean - target).norm2() + transverse * half_diff.norm2();
}

BallAverage average_distance_numeric_detailed(const Rank1Instrument& inst,
                                              const AxisConfig& config, int factor, int sign,
                                              const IntegrationScheme& scheme) {
  const MarginalDistanceIntegrand integrand(marginal_params(inst, config, factor, sign));
  return ball_average_detailed(integrand, scheme);
}

double average_distance_numeric(const Rank1Instrument& inst, const AxisConfig& config,
                                int factor, int sign, const IntegrationScheme& scheme) {
  return average_distance_numeric_detailed(inst, config, factor, sign, scheme).value;
}

double worst_case_distance(const Vec3& q_a, const Vec3& q_b, const Axis& target_axis,
                           int target_sign) {
  require_sign(target_sign);
  require_unit_ball({q_a, q_b});
  const Vec3 target = target_axis.unit() * static_cast<double>(target_sign);
  return std::max((q_a - target).norm(), (q_b - target).norm());
}

double worst_case_distance_sampled(const Rank1Instrument& inst, const AxisConfig& config,
                                   int factor, int sign, std::size_t points) {
  const auto params = marginal_params(inst, config, factor, sign);
  // The pointwise distance is a norm of an affine map of r divided by a
  // positive affine probability, hence quasiconvex on the ball; its supremum
  // sits on the sphere of pure inputs, so sample there.
  auto sample = sobol_ball_points(points);
  for (Vec3& r : sample) {
    const double n = r.norm();
    if (n > 0.0) r = r / n;
  }

  constexpr std::size_t kChunk = 4096;
  double xs[kChunk], ys[kChunk], zs[kChunk], vals[kChunk];
  double sup_sq = 0.0;
  std::size_t i = 0;
  while (i < sample.size()) {
    const std::size_t n = std::min(kChunk, sample.size() - i);
    for (std::size_t j = 0; j < n; ++j) {
      xs[j] = sample[i + j].x;
      ys[j] = sample[i + j].y;
      zs[j] = sample[i + j].z;
    }
    kernels::marginal_distance_sq(params, xs, ys, zs, vals, n);
    for (std::size_t j = 0; j < n; ++j) sup_sq = std::max(sup_sq, vals[j]);
    i += n;
  }
  return std::sqrt(sup_sq);
}

DistanceReport distance_report(const std::vector<Vec3>& q, const AxisConfig& config,
                               Metric metric) {
  require_unit_ball(q);
  const Variant variant = variant_for_count(config, q.size());
  if (metric == Metric::worst_case && variant == Variant::e)
    throw Error(ErrorCode::UnsupportedCombination,
                "the worst-case metric needs two-part marginals");

  DistanceReport report;
  report.metric = metric;
  for (int factor = 0; factor < config.arity(); ++factor) {
    for (int sign : {1, -1}) {
      double value = 0.0;
      if (metric == Metric::average) {
        value = average_distance_closed(q, config, factor, sign);
      } else {
        const auto outcomes = detail::branch_outcomes(variant, factor, sign);
        const Vec3& qa = q[static_cast<std::size_t>(outcome_position(variant, outcomes[0]))];
        const Vec3& qb = q[static_cast<std::size_t>(outcome_position(variant, outcomes[1]))];
        value = worst_case_distance(qa, qb, config.axis(factor), sign);
      }
      report.per_outcome[{factor, sign}] = value;
      report.total += value;
    }
  }
  return report;
}

DistanceReport distance_report_numeric(const Rank1Instrument& inst, const AxisConfig& config,
                                       Metric metric, const IntegrationScheme& scheme) {
  DistanceReport report;
  report.metric = metric;
  for (int factor = 0; factor < config.arity(); ++factor) {
    for (int sign : {1, -1}) {
      double value = 0.0;
      if (metric == Metric::average) {
        value = average_distance_numeric(inst, config, factor, sign, scheme);
      } else {
        if (marginal_operation(inst, factor, sign).parts().size() > 2)
          throw Error(ErrorCode::UnsupportedCombination,
                      "the worst-case metric needs two-part marginals");
        value = worst_case_distance_sampled(inst, config, factor, sign);
      }
      report.per_outcome[{factor, sign}] = value;
      report.total += value;
    }
  }
  return report;
}

}  // namespace jointmeas
