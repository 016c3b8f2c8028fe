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

// Explicit 2x2 complex-matrix arithmetic, used only by the tests to
// cross-check the Bloch-form algebra against an independent representation.
// Deliberately naive: every identity the library computes in (scalar, vec)
// form is recomputed here the long way.

#pragma once

#include <array>
#include <cmath>
#include <complex>

#include "jointmeas/bloch.hpp"

namespace jointmeas::testing {

using cd = std::complex<double>;

struct Mat2 {
  // Row-major [[a, b], [c, d]].
  cd a, b, c, d;

  Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
  Mat2 operator-(const Mat2& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }
  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  Mat2 operator*(double s) const { return {s * a, s * b, s * c, s * d}; }
  Mat2 adjoint() const {
    return {std::conj(a), std::conj(c), std::conj(b), std::conj(d)};
  }
  cd trace() const { return a + d; }
};

inline Mat2 mat_identity() { return {1.0, 0.0, 0.0, 1.0}; }

inline Mat2 to_matrix(const jointmeas::HermitianOp& op) {
  const double s = op.scalar;
  const jointmeas::Vec3& v = op.vec;
  return {cd(s + v.z, 0.0), cd(v.x, -v.y), cd(v.x, v.y), cd(s - v.z, 0.0)};
}

inline jointmeas::HermitianOp from_matrix(const Mat2& m) {
  // Inverse of to_matrix for Hermitian input.
  return {0.5 * std::real(m.a + m.d),
          {0.5 * std::real(m.b + m.c), 0.5 * std::imag(m.c - m.b),
           0.5 * std::real(m.a - m.d)}};
}

// Eigenvalues of a Hermitian 2x2 matrix, ascending.
inline std::array<double, 2> hermitian_eigenvalues(const Mat2& m) {
  const double p = std::real(m.a);
  const double r = std::real(m.d);
  const double mid = 0.5 * (p + r);
  const double rad = std::sqrt(0.25 * (p - r) * (p - r) + std::norm(m.b));
  return {mid - rad, mid + rad};
}

// Trace norm ||M||_1 = sum of |eigenvalues| for Hermitian M.
inline double trace_norm(const Mat2& m) {
  const auto ev = hermitian_eigenvalues(m);
  return std::abs(ev[0]) + std::abs(ev[1]);
}

// Principal square root of a positive-semidefinite Hermitian 2x2 matrix,
// via sqrt(M) = (M + sqrt(det) I) / sqrt(tr + 2 sqrt(det)).
inline Mat2 psd_sqrt(const Mat2& m) {
  const double det = std::real(m.a * m.d - m.b * m.c);
  const double s = std::sqrt(std::max(det, 0.0));
  const double t = std::real(m.trace()) + 2.0 * s;
  if (t <= 0.0) return {0.0, 0.0, 0.0, 0.0};
  const double inv = 1.0 / std::sqrt(t);
  Mat2 out = m;
  out.a += s;
  out.d += s;
  return out * inv;
}

}  // namespace jointmeas::testing
