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
 * @file bloch.hpp
 * @brief Bloch-vector representation of qubit states and Hermitian operators.
 *
 * Every Hermitian 2x2 operator is written as s*I + v.sigma and stored as the
 * pair (s, v).  All algebra in the library runs on these pairs; no complex
 * matrices appear outside the test suite, where an explicit 2x2 oracle
 * cross-checks the identities used here.
 */

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace jointmeas {

/// Reasons a jointmeas::Error can be raised.
enum class ErrorCode {
  NonUnitAxis,
  EtaOutOfRange,
  AxesNotOrthogonal,
  BiasedObservable,
  InvalidWitness,
  IndexOutOfRange,
  NotSharp,
  NotRankOne,
  MixOutOfRange,
  ZeroTrace,
  NotPositive,
  ZeroProbability,
  TraceMismatch,
  VectorTooLong,
  MaxIterations,
  InfeasiblePoint,
  UnsupportedCombination,
};

const char* error_code_name(ErrorCode code);

/// Single exception type for all domain errors; carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

/// Plain real 3-vector.  Named fields keep the Pauli components readable.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  constexpr Vec3 operator+(const Vec3& o) const {
    return {x + o.x, y + o.y, z + o.z};
  }
  constexpr Vec3 operator-(const Vec3& o) const {
    return {x - o.x, y - o.y, z - o.z};
  }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double c) const { return {c * x, c * y, c * z}; }
  constexpr Vec3 operator/(double c) const { return {x / c, y / c, z / c}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  Vec3& operator*=(double c) {
    x *= c;
    y *= c;
    z *= c;
    return *this;
  }

  constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  constexpr Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  constexpr double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }
};

constexpr Vec3 operator*(double c, const Vec3& v) { return v * c; }

/**
 * @brief Hermitian 2x2 operator in Bloch form: scalar*I + vec.sigma.
 *
 * Eigenvalues are scalar +- |vec|.  The operator is positive iff
 * scalar >= |vec| and an effect (0 <= E <= I) iff additionally
 * scalar + |vec| <= 1.
 */
struct HermitianOp {
  double scalar = 0.0;
  Vec3 vec;

  constexpr HermitianOp() = default;
  constexpr HermitianOp(double s, const Vec3& v) : scalar(s), vec(v) {}

  constexpr HermitianOp operator+(const HermitianOp& o) const {
    return {scalar + o.scalar, vec + o.vec};
  }
  constexpr HermitianOp operator-(const HermitianOp& o) const {
    return {scalar - o.scalar, vec - o.vec};
  }
  constexpr HermitianOp operator*(double c) const { return {c * scalar, vec * c}; }
  HermitianOp& operator+=(const HermitianOp& o) {
    scalar += o.scalar;
    vec += o.vec;
    return *this;
  }

  double trace() const { return 2.0 * scalar; }
  double eigenvalue_min() const { return scalar - vec.norm(); }
  double eigenvalue_max() const { return scalar + vec.norm(); }

  bool is_positive(double tol = 1e-12) const { return eigenvalue_min() >= -tol; }
  bool is_effect(double tol = 1e-12) const {
    return is_positive(tol) && eigenvalue_max() <= 1.0 + tol;
  }
  /// Rank one <=> the smaller eigenvalue vanishes (and the operator is not 0).
  bool is_rank_one(double tol = 1e-12) const {
    return std::abs(eigenvalue_min()) <= tol && vec.norm() > tol;
  }
  bool is_projection(double tol = 1e-12) const {
    return is_rank_one(tol) && std::abs(eigenvalue_max() - 1.0) <= tol;
  }
};

constexpr HermitianOp operator*(double c, const HermitianOp& op) { return op * c; }

inline constexpr HermitianOp identity_op() { return {1.0, {0.0, 0.0, 0.0}}; }
inline constexpr HermitianOp zero_op() { return {0.0, {0.0, 0.0, 0.0}}; }

/**
 * @brief tr[A B] for two Hermitian operators in Bloch form.
 *
 * With A = a I + u.sigma and B = b I + w.sigma the product trace is
 * 2(ab + u.w); the identity is exercised against the matrix oracle in the
 * test suite.
 */
inline constexpr double trace_pair(const HermitianOp& a, const HermitianOp& b) {
  return 2.0 * (a.scalar * b.scalar + a.vec.dot(b.vec));
}

/// Qubit density operator, stored as its Bloch vector r with |r| <= 1.
class QubitState {
 public:
  explicit QubitState(const Vec3& bloch, double tol = 1e-9);

  const Vec3& bloch() const { return bloch_; }
  /// The state as an operator: (I + r.sigma)/2.
  HermitianOp op() const { return {0.5, bloch_ * 0.5}; }
  double purity() const { return 0.5 * (1.0 + bloch_.norm2()); }

 private:
  Vec3 bloch_;
};

inline QubitState maximally_mixed_state() { return QubitState({0.0, 0.0, 0.0}); }

/// tr[rho E] for a state and an operator.
inline double expectation(const QubitState& rho, const HermitianOp& e) {
  return trace_pair(rho.op(), e);
}

/**
 * @brief Trace distance between qubit states: half the Euclidean Bloch gap.
 *
 * D(rho1, rho2) = |r1 - r2| / 2.  The factor-of-two normalisation cancels
 * against the operator-norm convention used for measurement distances, so
 * the library works with the plain Euclidean norm |r1 - r2| throughout and
 * this helper is the only place the 1/2 appears.
 */
inline double trace_distance(const QubitState& a, const QubitState& b) {
  return 0.5 * (a.bloch() - b.bloch()).norm();
}

/// Euclidean gap between Bloch vectors; the distance unit used everywhere else.
inline double bloch_distance(const QubitState& a, const QubitState& b) {
  return (a.bloch() - b.bloch()).norm();
}

/// Measurement direction: a unit 3-vector, normalised on construction.
class Axis {
 public:
  explicit Axis(const Vec3& direction, double tol = 1e-12);

  const Vec3& unit() const { return unit_; }
  double dot(const Axis& o) const { return unit_.dot(o.unit_); }

 private:
  Vec3 unit_;
};

inline Axis axis_x() { return Axis({1.0, 0.0, 0.0}); }
inline Axis axis_y() { return Axis({0.0, 1.0, 0.0}); }
inline Axis axis_z() { return Axis({0.0, 0.0, 1.0}); }

/**
 * @brief Normalise a positive operator into (probability, state).
 *
 * For an instrument output T this returns p = tr[T] and the state T/p.
 * @throws Error{ZeroTrace} if tr[T] <= tol, Error{NotPositive} if T has a
 *         negative eigenvalue beyond tolerance.
 */
struct NormalizedOutput {
  double probability;
  QubitState state;
};
NormalizedOutput normalize_state(const HermitianOp& op, double tol = 1e-12);

}  // namespace jointmeas
