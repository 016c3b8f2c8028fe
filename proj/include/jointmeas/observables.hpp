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
 * @file observables.hpp
 * @brief Binary and joint qubit observables and joint-measurability tests.
 *
 * Covers sharp and smeared binary observables, the two- and three-factor
 * joint families G, E, F built from orthogonal axes, marginalisation, and
 * the ball-intersection feasibility search that decides whether two unbiased
 * binary observables admit a joint observable.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jointmeas/bloch.hpp"

namespace jointmeas {

/// Two-outcome POVM with outcomes +1 / -1.
class BinaryObservable {
 public:
  /// @throws Error{TraceMismatch} unless plus + minus = I; Error{NotPositive}
  ///         unless both operators are effects.
  BinaryObservable(const HermitianOp& plus, const HermitianOp& minus);

  /// Builds the observable whose minus effect is the complement I - plus.
  static BinaryObservable from_plus(const HermitianOp& plus);

  const HermitianOp& plus() const { return plus_; }
  const HermitianOp& minus() const { return minus_; }
  const HermitianOp& effect(int sign) const { return sign >= 0 ? plus_ : minus_; }

  /// Both effects are rank-1 projections.
  bool is_sharp(double tol = 1e-12) const;
  /// Identity coefficient of each effect is 1/2.
  bool is_unbiased(double tol = 1e-12) const;

  double probability(const QubitState& rho, int sign) const {
    return trace_pair(rho.op(), effect(sign));
  }

 private:
  HermitianOp plus_;
  HermitianOp minus_;
};

/// Projective spin observable along an axis: effects (I +- n.sigma)/2.
BinaryObservable sharp_observable(const Axis& axis);

/**
 * @brief Unsharp spin observable (I +- eta n.sigma)/2.
 * @throws Error{EtaOutOfRange} unless 0 <= eta <= 1.
 */
BinaryObservable smeared_observable(const Axis& axis, double eta);

// ---------------------------------------------------------------------------
// Sign-tuple outcomes.
//
// Outcomes of an n-factor joint observable are sign tuples (s_0, ..., s_{n-1})
// with s_m = +-1.  They are indexed 0 .. 2^n - 1 with factor 0 as the most
// significant bit and + before -, so for n = 2 the order is
// (+,+), (+,-), (-,+), (-,-).
// ---------------------------------------------------------------------------

inline unsigned outcome_count(int arity) { return 1u << arity; }

/// Sign (+1 or -1) of outcome `index` at position `factor`.
int outcome_sign(int arity, unsigned index, int factor);

/// Index of the outcome with the given signs, e.g. {+1,-1} -> 1.
unsigned outcome_index(const std::vector<int>& signs);

/// Product of all signs: +1 for even tuples, -1 for odd ones.
int outcome_parity(int arity, unsigned index);

/// Printable tag, e.g. "+-" or "-++".
std::string outcome_tag(int arity, unsigned index);

/// Inverse of outcome_tag; returns (arity, index).
/// @throws Error{IndexOutOfRange} on malformed tags.
std::pair<int, unsigned> parse_outcome_tag(const std::string& tag);

/// POVM with 2^arity sign-tuple outcomes (arity 2 or 3).
class JointObservable {
 public:
  /// @throws Error{IndexOutOfRange} for unsupported arity or wrong effect
  ///         count; Error{NotPositive} for non-effect entries;
  ///         Error{TraceMismatch} unless the effects sum to I.
  JointObservable(int arity, std::vector<HermitianOp> effects);

  int arity() const { return arity_; }
  unsigned size() const { return outcome_count(arity_); }

  const HermitianOp& effect(unsigned index) const;
  const HermitianOp& effect(const std::vector<int>& signs) const {
    return effect(outcome_index(signs));
  }

 private:
  int arity_;
  std::vector<HermitianOp> effects_;
};

/**
 * @brief The four-outcome joint observable of two orthogonal spin directions:
 *        G(i,j) = (1/4)[I + (i x + j y)/sqrt(2) . sigma].
 *
 * Its marginals are the eta = 1/sqrt(2) smearings along x and y.
 * @throws Error{AxesNotOrthogonal} if |x.y| > 1e-9.
 */
JointObservable joint_observable_g(const Axis& x, const Axis& y);

/**
 * @brief Eight-outcome joint observable of three orthogonal directions:
 *        E(i,j,k) = (1/8)[I + (i x + j y + k z)/sqrt(3) . sigma].
 *
 * Marginals are the eta = 1/sqrt(3) smearings.
 * @throws Error{AxesNotOrthogonal} unless the axes are pairwise orthogonal
 *         (tol 1e-9) and form a right-handed frame.
 */
JointObservable joint_observable_e(const Axis& x, const Axis& y, const Axis& z);

/**
 * @brief The four-outcome variant: F doubles the even-parity effects of E and
 *        zeroes the odd-parity ones, keeping the same three marginals.
 */
JointObservable joint_observable_f(const Axis& x, const Axis& y, const Axis& z);

/**
 * @brief Binary marginal of a joint observable at the given factor.
 *
 * The plus effect is the sum of all effects whose tuple has + at that factor.
 * @throws Error{IndexOutOfRange}.
 */
BinaryObservable marginals(const JointObservable& j, int factor_index);

/// Outcome probabilities of a joint observable in a given state.
struct OutcomeDistribution {
  int arity = 0;
  std::vector<double> probs;

  double prob(unsigned index) const;
  double prob(const std::vector<int>& signs) const { return prob(outcome_index(signs)); }
};

OutcomeDistribution outcome_distribution(const JointObservable& j, const QubitState& s);

// ---------------------------------------------------------------------------
// Joint measurability of unbiased binary pairs.
//
// For unbiased observables with Bloch vectors a, b (twice the plus-effect
// vector part), a joint observable exists iff some gamma in [0,1] and some
// 3-vector g satisfy
//     |g| <= gamma,            |a + b - g| <= gamma,
//     |a - g| <= 1 - gamma,    |b - g| <= 1 - gamma,
// i.e. g lies in the intersection of four balls.  The pair (gamma, g) fixes
// the candidate effect G'(1,1) = (gamma I + g.sigma)/2.
// ---------------------------------------------------------------------------

/// Candidate joint-observable witness: G'(1,1) = (gamma I + g.sigma)/2.
struct JointWitness {
  double gamma = 0.0;
  Vec3 g;
};

/**
 * @brief Searches for a joint-observable witness for two unbiased binary
 *        observables.
 *
 * Scans gamma on a 1e-3 grid, refines the best bracket to width ~1e-9, and
 * solves the inner four-ball feasibility (a 3-variable convex min-max
 * problem) for each gamma.  Returns the best witness found, or nullopt when
 * the minimal constraint violation stays positive.
 * @throws Error{BiasedObservable} unless both observables are unbiased.
 */
std::optional<JointWitness> joint_measurable_pair(const BinaryObservable& a,
                                                  const BinaryObservable& b);

/**
 * @brief Probes whether the witness is the only feasible (gamma, g).
 *
 * The feasible set is convex, so uniqueness is confirmed by failing to
 * displace g in 26 spanning directions (exact ray-ball intersections) and
 * failing to re-solve feasibility at perturbed gamma.  Returns false as soon
 * as a second feasible point at distance > 1e-6 is found.
 * @throws Error{InvalidWitness} if the supplied witness is not feasible.
 */
bool witness_unique(const BinaryObservable& a, const BinaryObservable& b,
                    const JointWitness& witness);

/**
 * @brief Checks that the four-outcome zero pattern pins down F uniquely.
 *
 * Reconstructs the only candidate F' with the F zero pattern from the three
 * binary marginals (the (+,+,+) effect is forced to
 * [A(1)+B(1)+C(1)-I]/2) and returns true when the reconstruction is a valid
 * observable equal to F within 1e-12.
 */
bool f_unique_four_outcome(const Axis& x, const Axis& y, const Axis& z);

namespace detail {

/// Result of the inner four-ball search at optimal gamma.
struct FourBallSearch {
  double gamma = 0.0;
  Vec3 g;
  double violation = 0.0;  // min over g of max constraint violation
};

/// Max ball-constraint violation of (gamma, g) for Bloch vectors a, b.
double four_ball_violation(const Vec3& a, const Vec3& b, double gamma, const Vec3& g);

/// Full grid + refinement search over gamma; exposed for tests.
FourBallSearch four_ball_search(const Vec3& a, const Vec3& b);

}  // namespace detail

}  // namespace jointmeas
