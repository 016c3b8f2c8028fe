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
 * @file integration.hpp
 * @brief Averages of scalar fields over the unit Bloch ball.
 *
 * Two interchangeable schemes are provided.  Monte Carlo draws ball-uniform
 * points by seeded rejection sampling in the bounding cube and reports the
 * sample standard error; the reduction runs in fixed chunk order, so a fixed
 * seed reproduces results bit for bit.  Quadrature uses a tensor-product
 * Gauss-Legendre rule in spherical coordinates (radial x polar x azimuthal)
 * and estimates its error from a half-order companion rule.
 *
 * Integrands can be supplied either point-wise or as batch evaluators over
 * structure-of-arrays coordinate chunks; the batch form is what the SIMD
 * kernels plug into.
 */

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "jointmeas/bloch.hpp"

namespace jointmeas {

enum class SchemeKind { monte_carlo, quadrature };

/// Selects and parameterises a ball-averaging scheme.
struct IntegrationScheme {
  SchemeKind kind = SchemeKind::monte_carlo;
  /// Number of accepted ball samples (Monte Carlo).
  std::uint64_t samples = 1000000;
  /// Nodes per spherical dimension (quadrature).
  int nodes = 64;
  std::uint64_t seed = 42;

  static IntegrationScheme monte_carlo(std::uint64_t samples = 1000000,
                                       std::uint64_t seed = 42);
  static IntegrationScheme quadrature(int nodes = 64);
};

/// Ball average together with the scheme's error estimate.  Monte Carlo
/// reports the standard error of the mean; quadrature reports the deviation
/// from a rule with half as many nodes per dimension.
struct BallAverage {
  double value = 0.0;
  double std_error = 0.0;
};

/// Batch integrand over structure-of-arrays ball coordinates.
class BatchIntegrand {
 public:
  virtual ~BatchIntegrand() = default;
  /// Writes the integrand value at (x[i], y[i], z[i]) into out[i].
  virtual void evaluate(const double* x, const double* y, const double* z, double* out,
                        std::size_t count) const = 0;
};

using BallIntegrand = std::function<double(const Vec3&)>;

/// Mean of the integrand over the unit ball, with error estimate.
BallAverage ball_average_detailed(const BallIntegrand& integrand,
                                  const IntegrationScheme& scheme);
BallAverage ball_average_detailed(const BatchIntegrand& integrand,
                                  const IntegrationScheme& scheme);

/// Mean of the integrand over the unit ball.
double ball_average(const BallIntegrand& integrand, const IntegrationScheme& scheme);
double ball_average(const BatchIntegrand& integrand, const IntegrationScheme& scheme);

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1], nodes in
/// ascending order.  Computed by Newton iteration on the three-term
/// recurrence; accurate to machine precision for any practical n.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Low-discrepancy (Sobol) point set in the unit ball, used to bracket
/// suprema of continuous fields.  Deterministic.
std::vector<Vec3> sobol_ball_points(std::size_t count);

namespace detail {
/// Raw 3-d Sobol sequence in the unit cube (indices 1..count), exposed for
/// verification against the standard construction.
std::vector<std::array<double, 3>> sobol_unit_points(std::size_t count);
}  // namespace detail

}  // namespace jointmeas
