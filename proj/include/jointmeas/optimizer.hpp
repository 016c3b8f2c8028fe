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
 * @file optimizer.hpp
 * @brief Minimization of the total approximation distance over the free
 *        output vectors, one unit ball per outcome.
 *
 * The average metric gives a small convex quadratic whose exact gradient is
 * assembled branch by branch from the closed forms in metrics.hpp; projected
 * gradient descent with an analytic step converges linearly.  The worst-case
 * metric is a sum of per-branch endpoint maxima, handled by projected
 * subgradient descent with equal tie splitting plus a quadratic penalty that
 * drives the branch distances toward a common value.  Optimality of the
 * returned point is certified through the variational inequality
 * grad . p >= grad . q for all feasible p, checked block by block.
 */

#pragma once

#include <cstddef>
#include <vector>

#include "jointmeas/metrics.hpp"

namespace jointmeas {

/// One distance-minimization instance.  The free variables are the output
/// Bloch vectors of the active outcomes in ascending outcome order (four
/// blocks for the two-axis and even-parity joints, eight for the
/// eight-outcome joint), each constrained to the unit ball.
struct OptimizationProblem {
  AxisConfig config;
  Variant variant = Variant::g;
  Metric metric = Metric::average;
};

/// Number of 3-vector blocks the problem optimizes over.
std::size_t problem_block_count(const OptimizationProblem& problem);

/**
 * @brief Objective value and its (sub)gradient at q, feasible or not.
 *
 * For the average metric this is the exact gradient of the convex quadratic;
 * for the worst case it is the subgradient obtained by weighting the tied
 * endpoint norms of each branch equally (the plain objective, without the
 * equal-distance penalty used inside minimize).
 */
double objective_and_gradient(const OptimizationProblem& problem, const std::vector<Vec3>& q,
                              std::vector<Vec3>& grad);

struct MinimizeParams {
  std::size_t max_iterations = 100000;
  /// Stopping residual of the blockwise variational inequality (average).
  double kkt_tolerance = 1e-9;
  /// Stopping residual for the worst-case subgradient run.
  double subgradient_tolerance = 1e-6;
  /// Weight of the quadratic penalty on pairwise branch-distance differences
  /// (worst-case metric only).
  double penalty_weight = 1000.0;
  /// Step size; 0 selects 1/L from the analytic curvature bound for the
  /// average metric and a fixed conservative step for the worst case.
  double step = 0.0;
};

struct MinimizeResult {
  std::vector<Vec3> q;
  double value = 0.0;
  OptimalityCertificate certificate;
  std::size_t iterations = 0;
};

/**
 * @brief Minimize the total distance from a feasible start.
 *
 * An empty init starts from the ball centers; any other init is projected
 * onto the feasible product of balls first.  Throws MaxIterations when the
 * tolerance is not reached within the iteration budget, and
 * UnsupportedCombination for the worst-case metric on the eight-outcome
 * joint, whose marginals are not two-part.
 */
MinimizeResult minimize(const OptimizationProblem& problem, std::vector<Vec3> init = {},
                        const MinimizeParams& params = {});

/// Evaluate the blockwise optimality criterion at a feasible point: the
/// residual is the largest gap grad_k . q_k + |grad_k| over the blocks, zero
/// exactly when each q_k minimizes the linearized objective over its ball.
/// Throws InfeasiblePoint when some block leaves the unit ball.
OptimalityCertificate certify(const OptimizationProblem& problem, const std::vector<Vec3>& q,
                              double tolerance = 1e-9);

/// True when all per-branch distances in the report agree within tol.
bool equal_distance_check(const DistanceReport& report, double tol);

}  // namespace jointmeas
