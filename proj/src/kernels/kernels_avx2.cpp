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

// AVX2 variants of the batch kernels.  Each lane replays the scalar op
// sequence exactly: plain mul/add/div only (no FMA, which would change
// rounding), so results are bit-identical with the scalar reference.

#include <immintrin.h>

#include "jointmeas/kernels.hpp"

namespace jointmeas::kernels {

void ratio_squared_avx2(const RatioSquaredParams& p, const double* x, const double* y,
                        const double* z, double* out, std::size_t count) {
  const __m256d nx = _mm256_set1_pd(p.n.x);
  const __m256d ny = _mm256_set1_pd(p.n.y);
  const __m256d nz = _mm256_set1_pd(p.n.z);
  const __m256d mx = _mm256_set1_pd(p.m.x);
  const __m256d my = _mm256_set1_pd(p.m.y);
  const __m256d mz = _mm256_set1_pd(p.m.z);
  const __m256d d = _mm256_set1_pd(p.d);

  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256d rx = _mm256_loadu_pd(x + i);
    const __m256d ry = _mm256_loadu_pd(y + i);
    const __m256d rz = _mm256_loadu_pd(z + i);
    const __m256d num = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(rx, nx), _mm256_mul_pd(ry, ny)), _mm256_mul_pd(rz, nz));
    const __m256d den = _mm256_add_pd(
        d, _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(rx, mx), _mm256_mul_pd(ry, my)),
                         _mm256_mul_pd(rz, mz)));
    const __m256d f = _mm256_div_pd(num, den);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(f, f));
  }
  if (i < count) ratio_squared_scalar(p, x + i, y + i, z + i, out + i, count - i);
}

void marginal_distance_sq_avx2(const MarginalDistanceParams& p, const double* x,
                               const double* y, const double* z, double* out,
                               std::size_t count) {
  __m256d e0[4], ex[4], ey[4], ez[4], qx[4], qy[4], qz[4];
  for (int t = 0; t < p.part_count; ++t) {
    e0[t] = _mm256_set1_pd(p.e0[t]);
    ex[t] = _mm256_set1_pd(p.e[t].x);
    ey[t] = _mm256_set1_pd(p.e[t].y);
    ez[t] = _mm256_set1_pd(p.e[t].z);
    qx[t] = _mm256_set1_pd(p.q[t].x);
    qy[t] = _mm256_set1_pd(p.q[t].y);
    qz[t] = _mm256_set1_pd(p.q[t].z);
  }
  const __m256d tx = _mm256_set1_pd(p.target.x);
  const __m256d ty = _mm256_set1_pd(p.target.y);
  const __m256d tz = _mm256_set1_pd(p.target.z);
  const __m256d zero = _mm256_setzero_pd();

  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256d rx = _mm256_loadu_pd(x + i);
    const __m256d ry = _mm256_loadu_pd(y + i);
    const __m256d rz = _mm256_loadu_pd(z + i);
    __m256d weight = zero;
    __m256d vx = zero, vy = zero, vz = zero;
    for (int t = 0; t < p.part_count; ++t) {
      const __m256d mu = _mm256_add_pd(
          e0[t],
          _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(rx, ex[t]), _mm256_mul_pd(ry, ey[t])),
                        _mm256_mul_pd(rz, ez[t])));
      weight = _mm256_add_pd(weight, mu);
      vx = _mm256_add_pd(vx, _mm256_mul_pd(mu, qx[t]));
      vy = _mm256_add_pd(vy, _mm256_mul_pd(mu, qy[t]));
      vz = _mm256_add_pd(vz, _mm256_mul_pd(mu, qz[t]));
    }
    const __m256d dx = _mm256_sub_pd(_mm256_div_pd(vx, weight), tx);
    const __m256d dy = _mm256_sub_pd(_mm256_div_pd(vy, weight), ty);
    const __m256d dz = _mm256_sub_pd(_mm256_div_pd(vz, weight), tz);
    const __m256d dist =
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)),
                      _mm256_mul_pd(dz, dz));
    _mm256_storeu_pd(out + i, dist);
  }
  if (i < count) marginal_distance_sq_scalar(p, x + i, y + i, z + i, out + i, count - i);
}

}  // namespace jointmeas::kernels
