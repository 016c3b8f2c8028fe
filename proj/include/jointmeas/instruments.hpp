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
 * @file instruments.hpp
 * @brief Measurement instruments: outcome-wise state-change rules.
 *
 * Instruments here are represented by their action, not by Kraus lists: a
 * von Neumann instrument projects, a Lueders instrument conjugates by the
 * operator square root of the effect, and an instrument of a rank-1 joint
 * observable is fully described by one fixed output state per outcome.
 */

#pragma once

#include <functional>
#include <vector>

#include "jointmeas/bloch.hpp"
#include "jointmeas/observables.hpp"

namespace jointmeas {

/**
 * @brief The Lueders state change for one effect: sqrt(E) rho sqrt(E).
 *
 * Uses the closed form sqrt(aI + v.sigma) = pI + q (v/|v|).sigma with
 * p = (sqrt(a+|v|) + sqrt(a-|v|))/2 and q = (sqrt(a+|v|) - sqrt(a-|v|))/2,
 * so the output operator is exact up to round-off.  The result is
 * subnormalised: its trace is the outcome probability tr[rho E].
 * @throws Error{NotPositive} if the effect has a negative eigenvalue.
 */
HermitianOp luders_operation(const HermitianOp& effect, const QubitState& rho);

/// Two-outcome instrument; the state-change rule is fixed by its kind.
class BinaryInstrument {
 public:
  enum class Kind { von_neumann, luders };

  const BinaryObservable& observable() const { return obs_; }
  Kind kind() const { return kind_; }

  /// Subnormalised output operator for the given outcome; trace = probability.
  HermitianOp apply(int sign, const QubitState& rho) const;

 private:
  friend BinaryInstrument von_neumann(const BinaryObservable&);
  friend BinaryInstrument luders(const BinaryObservable&);
  BinaryInstrument(BinaryObservable obs, Kind kind) : obs_(std::move(obs)), kind_(kind) {}

  BinaryObservable obs_;
  Kind kind_;
};

/**
 * @brief Von Neumann instrument of a sharp observable: rho -> tr[rho P] P.
 * @throws Error{NotSharp} unless both effects are rank-1 projections.
 */
BinaryInstrument von_neumann(const BinaryObservable& obs);

/// Lueders instrument of any binary observable: rho -> sqrt(E) rho sqrt(E).
BinaryInstrument luders(const BinaryObservable& obs);

/**
 * @brief Compatibility of the two Lueders measurement channels.
 *
 * True iff A(1) + B(1) <= I (eigenvalue check) or the plus effects are
 * proportional with a factor in [0, 1] (either way around).
 */
bool luders_pair_jointly_measurable(const BinaryObservable& a, const BinaryObservable& b,
                                    double tol = 1e-12);

/**
 * @brief Instrument of a joint observable whose effects are all rank-1 (or
 *        zero): each operation is mu_t(rho) * xi_t for a fixed state xi_t.
 */
class Rank1Instrument {
 public:
  const JointObservable& joint() const { return joint_; }
  unsigned size() const { return joint_.size(); }

  /// False for outcomes whose effect is the zero operator.
  bool outcome_active(unsigned index) const;

  /// Bloch vector of the fixed output state xi_t (zero for inactive outcomes).
  const Vec3& output(unsigned index) const;

  /// Outcome probability mu_t(rho) = tr[rho G_t].
  double probability(unsigned index, const QubitState& rho) const;

  /// Subnormalised output operator mu_t(rho) * xi_t.
  HermitianOp operation(unsigned index, const QubitState& rho) const;

 private:
  friend Rank1Instrument rank1_from_joint(const JointObservable&, const std::vector<Vec3>&);
  Rank1Instrument(JointObservable joint, std::vector<Vec3> outputs,
                  std::vector<bool> active)
      : joint_(std::move(joint)), outputs_(std::move(outputs)), active_(std::move(active)) {}

  JointObservable joint_;
  std::vector<Vec3> outputs_;
  std::vector<bool> active_;
};

/**
 * @brief Builds a rank-1 instrument from a joint observable and one output
 *        Bloch vector per outcome (entries for zero effects are ignored).
 * @throws Error{NotRankOne} if a nonzero effect is not rank-1;
 *         Error{VectorTooLong} if an output vector leaves the Bloch ball.
 */
Rank1Instrument rank1_from_joint(const JointObservable& j, const std::vector<Vec3>& outputs);

/// The Lueders choice xi_t = G_t / tr[G_t]; for rank-1 effects this is exact.
Rank1Instrument luders_of_joint(const JointObservable& j);

/**
 * @brief Mixture of the Lueders instrument with the maximally mixed output:
 *        xi_t = mix * (Lueders xi_t) + (1 - mix) * (I/2).
 * @throws Error{MixOutOfRange} unless 0 <= mix <= 1.
 */
Rank1Instrument worst_case_mixture(const JointObservable& j, double mix);

/**
 * @brief One outcome of a marginal instrument: the sum of the joint-outcome
 *        operations whose sign tuple matches at one factor.
 */
class MarginalOperation {
 public:
  struct Part {
    unsigned index;      // outcome index in the joint observable
    HermitianOp effect;  // joint effect G_t
    Vec3 output;         // fixed output state xi_t
  };

  explicit MarginalOperation(std::vector<Part> parts) : parts_(std::move(parts)) {}

  /// Active parts in ascending outcome order.
  const std::vector<Part>& parts() const { return parts_; }

  /// Subnormalised output: sum_t mu_t(rho) xi_t.
  HermitianOp apply(const QubitState& rho) const;

  /// Total outcome probability sum_t mu_t(rho).
  double probability(const QubitState& rho) const;

 private:
  std::vector<Part> parts_;
};

/// Collects the instrument outcomes with the given sign at the given factor.
/// @throws Error{IndexOutOfRange}.
MarginalOperation marginal_operation(const Rank1Instrument& inst, int factor_index, int sign);

/// Normalised output state of a marginal operation.
/// @throws Error{ZeroProbability} if the outcome probability is <= 1e-12.
QubitState normalized_output(const MarginalOperation& m, const QubitState& rho);

/// A candidate state-change rule: maps a state to a subnormalised output.
using OperationRule = std::function<HermitianOp(const QubitState&)>;

/**
 * @brief Numerical check of the rank-1 structure theorem.
 *
 * The operation under test is the sum of the supplied rules.  It must
 * reproduce the trace condition tr[op(rho)] = tr[rho effect] on a spanning
 * set of states; the check then returns true iff the normalised output state
 * is constant (variation < 1e-9) across at least 20 random inputs, which is
 * what the rank-1 structure of the effect forces.
 * @throws Error{TraceMismatch} if the trace condition fails.
 */
bool structure_check(const std::vector<OperationRule>& rules, const HermitianOp& effect);

}  // namespace jointmeas
