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
 * @file kernels.hpp
 * @brief Batch evaluation kernels for the Bloch-ball integrands.
 *
 * The integration hot loops evaluate the same small expression over millions
 * of sample coordinates, handed over in structure-of-arrays form.  Each
 * kernel has a scalar reference implementation and, on x86-64, an AVX2
 * variant selected at runtime.  The two paths are required to produce
 * bit-identical results: the kernel translation units are compiled without
 * floating-point contraction and the vector code uses no fused operations,
 * so every lane performs the scalar op sequence exactly.
 */

#pragma once

#include <cstddef>

#include "jointmeas/bloch.hpp"

namespace jointmeas::kernels {

enum class Backend { scalar, avx2 };

/// Backend the dispatched entry points will use on this machine.
Backend active_backend();

/// True when the AVX2 variants are compiled in and the CPU supports them.
bool avx2_available();

const char* backend_name(Backend backend);

/**
 * @brief Transverse-ratio kernel: out[i] = ((r_i . n) / (d + r_i . m))^2.
 *
 * This is the square of the marginal mixing factor as a function of the
 * input Bloch vector r_i = (x[i], y[i], z[i]); the constants alpha, beta and
 * gamma are ball averages of it for suitable (n, m, d).
 */
struct RatioSquaredParams {
  Vec3 n;
  Vec3 m;
  double d = 0.0;
};

void ratio_squared_scalar(const RatioSquaredParams& p, const double* x, const double* y,
                          const double* z, double* out, std::size_t count);
void ratio_squared_avx2(const RatioSquaredParams& p, const double* x, const double* y,
                        const double* z, double* out, std::size_t count);
/// Runtime-dispatched variant.
void ratio_squared(const RatioSquaredParams& p, const double* x, const double* y,
                   const double* z, double* out, std::size_t count);

/**
 * @brief Squared distance between a normalised marginal output and a target.
 *
 * Branch probabilities are affine in the Bloch vector, mu_t = e0[t] + r.e[t];
 * the kernel computes out[i] = | sum_t mu_t q[t] / sum_t mu_t  -  target |^2.
 * The caller guarantees sum_t mu_t > 0 on the ball (true for every marginal
 * in this library).
 */
struct MarginalDistanceParams {
  int part_count = 0;  // at most 4 branches
  double e0[4] = {0, 0, 0, 0};
  Vec3 e[4];
  Vec3 q[4];
  Vec3 target;
};

void marginal_distance_sq_scalar(const MarginalDistanceParams& p, const double* x,
                                 const double* y, const double* z, double* out,
                                 std::size_t count);
void marginal_distance_sq_avx2(const MarginalDistanceParams& p, const double* x,
                               const double* y, const double* z, double* out,
                               std::size_t count);
/// Runtime-dispatched variant.
void marginal_distance_sq(const MarginalDistanceParams& p, const double* x, const double* y,
                          const double* z, double* out, std::size_t count);

}  // namespace jointmeas::kernels
