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

// Scalar reference kernels and the runtime backend dispatch.  This
// translation unit is compiled with -ffp-contract=off so the evaluation
// order written here is the binding contract for the vector variants.

#include "jointmeas/kernels.hpp"

namespace jointmeas::kernels {

void ratio_squared_scalar(const RatioSquaredParams& p, const double* x, const double* y,
                          const double* z, double* out, std::size_t count) {
  const double nx = p.n.x, ny = p.n.y, nz = p.n.z;
  const double mx = p.m.x, my = p.m.y, mz = p.m.z;
  const double d = p.d;
  for (std::size_t i = 0; i < count; ++i) {
    const double num = (x[i] * nx + y[i] * ny) + z[i] * nz;
    const double den = d + ((x[i] * mx + y[i] * my) + z[i] * mz);
    const double f = num / den;
    out[i] = f * f;
  }
}

void marginal_distance_sq_scalar(const MarginalDistanceParams& p, const double* x,
                                 const double* y, const double* z, double* out,
                                 std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) {
    double weight = 0.0;
    double vx = 0.0, vy = 0.0, vz = 0.0;
    for (int t = 0; t < p.part_count; ++t) {
      const double mu = p.e0[t] + ((x[i] * p.e[t].x + y[i] * p.e[t].y) + z[i] * p.e[t].z);
      weight += mu;
      vx += mu * p.q[t].x;
      vy += mu * p.q[t].y;
      vz += mu * p.q[t].z;
    }
    const double dx = vx / weight - p.target.x;
    const double dy = vy / weight - p.target.y;
    const double dz = vz / weight - p.target.z;
    out[i] = (dx * dx + dy * dy) + dz * dz;
  }
}

bool avx2_available() {
#if defined(JOINTMEAS_HAVE_AVX2_TU) && defined(__x86_64__)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

Backend active_backend() { return avx2_available() ? Backend::avx2 : Backend::scalar; }

const char* backend_name(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
  }
  return "unknown";
}

void ratio_squared(const RatioSquaredParams& p, const double* x, const double* y,
                   const double* z, double* out, std::size_t count) {
#if defined(JOINTMEAS_HAVE_AVX2_TU) && defined(__x86_64__)
  if (avx2_available()) {
    ratio_squared_avx2(p, x, y, z, out, count);
    return;
  }
#endif
  ratio_squared_scalar(p, x, y, z, out, count);
}

void marginal_distance_sq(const MarginalDistanceParams& p, const double* x, const double* y,
                          const double* z, double* out, std::size_t count) {
#if defined(JOINTMEAS_HAVE_AVX2_TU) && defined(__x86_64__)
  if (avx2_available()) {
    marginal_distance_sq_avx2(p, x, y, z, out, count);
    return;
  }
#endif
  marginal_distance_sq_scalar(p, x, y, z, out, count);
}

#if !defined(JOINTMEAS_HAVE_AVX2_TU)
// Stubs keep the symbols defined on builds without the vector translation
// unit; the dispatcher never reaches them there.
void ratio_squared_avx2(const RatioSquaredParams& p, const double* x, const double* y,
                        const double* z, double* out, std::size_t count) {
  ratio_squared_scalar(p, x, y, z, out, count);
}
void marginal_distance_sq_avx2(const MarginalDistanceParams& p, const double* x,
                               const double* y, const double* z, double* out,
                               std::size_t count) {
  marginal_distance_sq_scalar(p, x, y, z, out, count);
}
#endif

}  // namespace jointmeas::kernels
