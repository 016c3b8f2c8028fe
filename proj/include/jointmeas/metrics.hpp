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

/**
 * @file metrics.hpp
 * @brief Distances between approximating marginal operations and the ideal
 *        von Neumann operations, point-wise, ball-averaged and worst-case.
 *
 * The approximating instrument measures a joint observable; for each target
 * (factor, sign) its marginal operation produces a normalized output state
 * that depends on the input only through a small number of transverse mixing
 * factors.  Averaging the squared Bloch distance to the ideal output over a
 * uniformly distributed input gives closed forms whose only non-elementary
 * ingredients are the ball averages alpha, beta and gamma of the squared
 * mixing factors; the worst case over inputs is an endpoint maximum.  Both
 * closed forms are cross-checked here against direct numerical integration.
 */

#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "jointmeas/bloch.hpp"
#include "jointmeas/instruments.hpp"
#include "jointmeas/integration.hpp"
#include "jointmeas/observables.hpp"

namespace jointmeas {

enum class Metric { average, worst_case };
enum class Variant { g, e, f };

const char* metric_name(Metric metric);
const char* variant_name(Variant variant);

/**
 * @brief Target frame for the approximation problem: the sharp axes and the
 *        common smearing parameter.
 *
 * Holds two or three pairwise orthogonal unit axes (a right-handed frame in
 * the three-axis case) and eta in (0, 1].
 */
class AxisConfig {
 public:
  AxisConfig(std::vector<Axis> axes, double eta);

  /// x and y with the critical eta = 1/sqrt(2).
  static AxisConfig standard_two();
  /// x, y and z with eta = 1/sqrt(3).
  static AxisConfig standard_three();

  int arity() const { return static_cast<int>(axes_.size()); }
  const Axis& axis(int factor) const;
  const std::vector<Axis>& axes() const { return axes_; }
  double eta() const { return eta_; }

 private:
  std::vector<Axis> axes_;
  double eta_;
};

/// The joint observable the variant prescribes for the configured axes.
JointObservable joint_for_variant(const AxisConfig& config, Variant variant);

/// Default variant for the configuration's arity (two axes -> four-outcome
/// joint, three axes -> eight-outcome joint).
Variant default_variant(const AxisConfig& config);

/**
 * @brief Transverse mixing factor of the (factor, sign) marginal operation.
 *
 * Two-axis case: (r . t)/(sqrt(2) + sign (r . a)) with a the addressed axis
 * and t the other one.  Three-axis case: the four-outcome form
 * (r . (t1 +/- t2))/(sqrt(3) + sign (r . a)), whose square averages to
 * gamma.  The denominator is bounded away from zero on the ball.
 */
double f_factor(const Vec3& r, const AxisConfig& config, int factor, int sign);

/// Bloch distance between the instrument's normalized (factor, sign) output
/// on the given state and the ideal projection's Bloch vector sign * axis.
double pointwise_distance(const Rank1Instrument& inst, const AxisConfig& config, int factor,
                          int sign, const QubitState& s);

/// Ball average of the squared two-axis mixing factor,
/// 2 - (3 sqrt(2) / 2) ln(1 + sqrt(2)).
double alpha();
/// Ball average of one squared three-axis transverse factor,
/// (7 - 3 sqrt(3) ln(2 + sqrt(3))) / 2.
double beta();
/// Ball average of the squared four-outcome mixing factor; equals 2 beta.
double gamma_const();

/**
 * @brief Closed-form ball average of the squared (factor, sign) distance.
 *
 * The outcome vectors q are the instrument's output Bloch vectors in
 * ascending outcome order; their count selects the form: four vectors with a
 * two-axis config use the alpha form, eight vectors the beta form, and four
 * vectors with a three-axis config the gamma (even-parity) form.
 */
double average_distance_closed(const std::vector<Vec3>& q, const AxisConfig& config,
                               int factor, int sign);

/// Ball average of the squared point-wise distance by direct integration; an
/// independent oracle for average_distance_closed.
double average_distance_numeric(const Rank1Instrument& inst, const AxisConfig& config,
                                int factor, int sign, const IntegrationScheme& scheme);
/// Same, returning the scheme's error estimate alongside the value.
BallAverage average_distance_numeric_detailed(const Rank1Instrument& inst,
                                              const AxisConfig& config, int factor, int sign,
                                              const IntegrationScheme& scheme);

/**
 * @brief Worst-case distance of a two-part marginal: the endpoint maximum
 *        max(|q_a - t|, |q_b - t|) with t = target_sign * target_axis.
 *
 * Exact because the normalized output runs over the full segment [q_b, q_a]
 * as the input varies (the mixing factor attains both ends of [-1, 1]).
 */
double worst_case_distance(const Vec3& q_a, const Vec3& q_b, const Axis& target_axis,
                           int target_sign);

/// Supremum of the point-wise distance over a low-discrepancy sample of the
/// ball; verification mode for the endpoint formula.
double worst_case_distance_sampled(const Rank1Instrument& inst, const AxisConfig& config,
                                   int factor, int sign, std::size_t points = 100000);

/**
 * @brief Optimality data for a candidate set of outcome vectors under the
 *        per-outcome unit-ball constraint (produced by the optimizer).
 *
 * satisfied holds iff for every outcome block the minimum of grad_k . p over
 * the unit ball equals grad_k . q_k within tolerance, i.e. each q_k is
 * antiparallel to a nonzero block gradient with unit norm, or the block
 * gradient vanishes.
 */
struct OptimalityCertificate {
  std::vector<Vec3> gradient;
  double kkt_residual = 0.0;
  bool satisfied = false;
};

/// Distances of one instrument against every (factor, sign) target.
struct DistanceReport {
  Metric metric = Metric::average;
  /// (factor, sign) -> distance; squared-average or endpoint-max value.
  std::map<std::pair<int, int>, double> per_outcome;
  double total = 0.0;
  std::optional<OptimalityCertificate> certificate;
};

/// Closed-form report for outcome vectors q (see average_distance_closed for
/// the count convention; the worst-case metric requires two-part marginals).
DistanceReport distance_report(const std::vector<Vec3>& q, const AxisConfig& config,
                               Metric metric);

/// Numerically integrated report for an instrument (average metric), or the
/// sampled-sup report (worst-case metric).
DistanceReport distance_report_numeric(const Rank1Instrument& inst, const AxisConfig& config,
                                       Metric metric, const IntegrationScheme& scheme);

namespace detail {
/// Joint-outcome indices (ascending) forming the (factor, sign) marginal for
/// the variant, in the full 2^arity outcome indexing.
std::vector<unsigned> branch_outcomes(Variant variant, int factor, int sign);
/// Single three-axis transverse factor (r . a_m)/(sqrt(3) + sign (r . a_k)).
double transverse_factor(const Vec3& r, const AxisConfig& config, int factor, int sign,
                         int transverse);
}  // namespace detail

}  // namespace jointmeas
