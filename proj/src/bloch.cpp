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

#include "jointmeas/bloch.hpp"

#include <sstream>

namespace jointmeas {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonUnitAxis:
      return "NonUnitAxis";
    case ErrorCode::EtaOutOfRange:
      return "EtaOutOfRange";
    case ErrorCode::AxesNotOrthogonal:
      return "AxesNotOrthogonal";
    case ErrorCode::BiasedObservable:
      return "BiasedObservable";
    case ErrorCode::InvalidWitness:
      return "InvalidWitness";
    case ErrorCode::IndexOutOfRange:
      return "IndexOutOfRange";
    case ErrorCode::NotSharp:
      return "NotSharp";
    case ErrorCode::NotRankOne:
      return "NotRankOne";
    case ErrorCode::MixOutOfRange:
      return "MixOutOfRange";
    case ErrorCode::ZeroTrace:
      return "ZeroTrace";
    case ErrorCode::NotPositive:
      return "NotPositive";
    case ErrorCode::ZeroProbability:
      return "ZeroProbability";
    case ErrorCode::TraceMismatch:
      return "TraceMismatch";
    case ErrorCode::VectorTooLong:
      return "VectorTooLong";
    case ErrorCode::MaxIterations:
      return "MaxIterations";
    case ErrorCode::InfeasiblePoint:
      return "InfeasiblePoint";
    case ErrorCode::UnsupportedCombination:
      return "UnsupportedCombination";
  }
  return "UnknownError";
}

QubitState::QubitState(const Vec3& bloch, double tol) : bloch_(bloch) {
  const double n = bloch.norm();
  if (!(n <= 1.0 + tol)) {
    std::ostringstream msg;
    msg << "Bloch vector has norm " << n << " > 1";
    throw Error(ErrorCode::VectorTooLong, msg.str());
  }
}

Axis::Axis(const Vec3& direction, double tol) {
  const double n = direction.norm();
  if (!(n > tol) || !std::isfinite(n)) {
    throw Error(ErrorCode::NonUnitAxis, "axis direction must be a nonzero finite vector");
  }
  unit_ = direction / n;
}

NormalizedOutput normalize_state(const HermitianOp& op, double tol) {
  if (op.eigenvalue_min() < -tol) {
    std::ostringstream msg;
    msg << "operator has negative eigenvalue " << op.eigenvalue_min();
    throw Error(ErrorCode::NotPositive, msg.str());
  }
  if (op.scalar <= tol) {
    throw Error(ErrorCode::ZeroTrace, "cannot normalize an operator with vanishing trace");
  }
  return {2.0 * op.scalar, QubitState(op.vec / op.scalar)};
}

}  // namespace jointmeas
