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

#include "jointmeas/instruments.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace jointmeas {

namespace {

constexpr double kZeroEffectTol = 1e-12;

}  // namespace

HermitianOp luders_operation(const HermitianOp& effect, const QubitState& rho) {
  if (!effect.is_positive()) {
    throw Error(ErrorCode::NotPositive, "Lueders conjugation requires a positive operator");
  }
  const double vn = effect.vec.norm();
  // An exactly rank-1 effect computes scalar - |vec| only to a few ulps of
  // zero, and the square root would amplify that round-off to ~1e-8; snap
  // eigenvalues within round-off of zero before taking the root.
  double gap = effect.scalar - vn;
  if (gap < 1e-13 * (effect.scalar + vn)) gap = 0.0;
  const double hi = std::sqrt(std::max(effect.scalar + vn, 0.0));
  const double lo = std::sqrt(gap);
  const double p = 0.5 * (hi + lo);
  const double q = 0.5 * (hi - lo);
  const Vec3 u = vn > 1e-300 ? effect.vec / vn : Vec3{0, 0, 0};
  const Vec3& r = rho.bloch();
  const double ur = u.dot(r);

  // (pI + q u.sigma) rho (pI + q u.sigma) expanded in the Pauli basis.
  HermitianOp out;
  out.scalar = 0.5 * (p * p + q * q) + p * q * ur;
  out.vec = u * (p * q) + r * (0.5 * (p * p - q * q)) + u * (q * q * ur);
  return out;
}

HermitianOp BinaryInstrument::apply(int sign, const QubitState& rho) const {
  const HermitianOp& e = obs_.effect(sign);
  if (kind_ == Kind::luders) return luders_operation(e, rho);
  // Von Neumann: rho -> tr[rho P] P, with P itself the (pure) output state.
  const double prob = trace_pair(rho.op(), e);
  return e * prob;
}

BinaryInstrument von_neumann(const BinaryObservable& obs) {
  if (!obs.is_sharp()) {
    throw Error(ErrorCode::NotSharp, "von Neumann instruments require a sharp observable");
  }
  return BinaryInstrument(obs, BinaryInstrument::Kind::von_neumann);
}

BinaryInstrument luders(const BinaryObservable& obs) {
  return BinaryInstrument(obs, BinaryInstrument::Kind::luders);
}

namespace {

// B = c A componentwise for some c in [0, 1]?
bool proportional_effect(const HermitianOp& bigger, const HermitianOp& smaller, double tol) {
  if (bigger.trace() <= tol) return smaller.trace() <= tol;
  const double c = smaller.scalar / bigger.scalar;
  if (c < -tol || c > 1.0 + tol) return false;
  const HermitianOp diff = smaller - bigger * c;
  return std::abs(diff.scalar) <= tol && diff.vec.norm() <= tol;
}

}  // namespace

bool luders_pair_jointly_measurable(const BinaryObservable& a, const BinaryObservable& b,
                                    double tol) {
  const HermitianOp sum = a.plus() + b.plus();
  if (sum.eigenvalue_max() <= 1.0 + tol) return true;
  return proportional_effect(a.plus(), b.plus(), tol) ||
         proportional_effect(b.plus(), a.plus(), tol);
}

bool Rank1Instrument::outcome_active(unsigned index) const {
  joint_.effect(index);  // range check
  return active_[index];
}

const Vec3& Rank1Instrument::output(unsigned index) const {
  joint_.effect(index);
  return outputs_[index];
}

double Rank1Instrument::probability(unsigned index, const QubitState& rho) const {
  return trace_pair(rho.op(), joint_.effect(index));
}

HermitianOp Rank1Instrument::operation(unsigned index, const QubitState& rho) const {
  const double mu = probability(index, rho);
  const Vec3& xi = outputs_[index];
  return {0.5 * mu, xi * (0.5 * mu)};
}

Rank1Instrument rank1_from_joint(const JointObservable& j, const std::vector<Vec3>& outputs) {
  if (outputs.size() != j.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "one output state per outcome is required");
  }
  std::vector<Vec3> xi(j.size());
  std::vector<bool> active(j.size());
  for (unsigned t = 0; t < j.size(); ++t) {
    const HermitianOp& e = j.effect(t);
    if (e.trace() <= kZeroEffectTol) {
      active[t] = false;
      xi[t] = {0, 0, 0};
      continue;
    }
    if (!e.is_rank_one()) {
      std::ostringstream msg;
      msg << "effect for outcome " << outcome_tag(j.arity(), t) << " is not rank-1";
      throw Error(ErrorCode::NotRankOne, msg.str());
    }
    if (outputs[t].norm() > 1.0 + 1e-9) {
      std::ostringstream msg;
      msg << "output state for outcome " << outcome_tag(j.arity(), t)
          << " has Bloch norm " << outputs[t].norm();
      throw Error(ErrorCode::VectorTooLong, msg.str());
    }
    active[t] = true;
    xi[t] = outputs[t];
  }
  return Rank1Instrument(j, std::move(xi), std::move(active));
}

Rank1Instrument luders_of_joint(const JointObservable& j) {
  std::vector<Vec3> outputs(j.size(), Vec3{0, 0, 0});
  for (unsigned t = 0; t < j.size(); ++t) {
    const HermitianOp& e = j.effect(t);
    if (e.trace() > kZeroEffectTol) outputs[t] = e.vec / e.scalar;
  }
  return rank1_from_joint(j, outputs);
}

Rank1Instrument worst_case_mixture(const JointObservable& j, double mix) {
  if (!(mix >= 0.0 && mix <= 1.0)) {
    std::ostringstream msg;
    msg << "mixture weight " << mix << " outside [0, 1]";
    throw Error(ErrorCode::MixOutOfRange, msg.str());
  }
  std::vector<Vec3> outputs(j.size(), Vec3{0, 0, 0});
  for (unsigned t = 0; t < j.size(); ++t) {
    const HermitianOp& e = j.effect(t);
    // The maximally mixed component contributes no Bloch vector.
    if (e.trace() > kZeroEffectTol) outputs[t] = e.vec * (mix / e.scalar);
  }
  return rank1_from_joint(j, outputs);
}

HermitianOp MarginalOperation::apply(const QubitState& rho) const {
  HermitianOp out = zero_op();
  const HermitianOp rho_op = rho.op();
  for (const Part& part : parts_) {
    const double mu = trace_pair(rho_op, part.effect);
    out += HermitianOp{0.5 * mu, part.output * (0.5 * mu)};
  }
  return out;
}

double MarginalOperation::probability(const QubitState& rho) const {
  double p = 0.0;
  const HermitianOp rho_op = rho.op();
  for (const Part& part : parts_) p += trace_pair(rho_op, part.effect);
  return p;
}

MarginalOperation marginal_operation(const Rank1Instrument& inst, int factor_index, int sign) {
  const int arity = inst.joint().arity();
  if (factor_index < 0 || factor_index >= arity || (sign != 1 && sign != -1)) {
    throw Error(ErrorCode::IndexOutOfRange, "marginal factor index or sign out of range");
  }
  std::vector<MarginalOperation::Part> parts;
  for (unsigned t = 0; t < inst.size(); ++t) {
    if (!inst.outcome_active(t)) continue;
    if (outcome_sign(arity, t, factor_index) != sign) continue;
    parts.push_back({t, inst.joint().effect(t), inst.output(t)});
  }
  return MarginalOperation(std::move(parts));
}

QubitState normalized_output(const MarginalOperation& m, const QubitState& rho) {
  const HermitianOp out = m.apply(rho);
  if (out.scalar <= 0.5 * 1e-12) {
    throw Error(ErrorCode::ZeroProbability, "marginal outcome probability vanishes");
  }
  return QubitState(out.vec / out.scalar);
}

bool structure_check(const std::vector<OperationRule>& rules, const HermitianOp& effect) {
  const auto op = [&rules](const QubitState& rho) {
    HermitianOp sum = zero_op();
    for (const OperationRule& rule : rules) sum += rule(rho);
    return sum;
  };

  // Trace condition on a spanning set: the six axis eigenstates and the
  // maximally mixed state determine a linear functional completely.
  const Vec3 spanning[] = {{0, 0, 0}, {1, 0, 0},  {-1, 0, 0}, {0, 1, 0},
                           {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  for (const Vec3& r : spanning) {
    const QubitState rho(r);
    const double lhs = op(rho).trace();
    const double rhs = trace_pair(rho.op(), effect);
    if (std::abs(lhs - rhs) > 1e-9) {
      std::ostringstream msg;
      msg << "rule trace " << lhs << " != outcome probability " << rhs;
      throw Error(ErrorCode::TraceMismatch, msg.str());
    }
  }

  // Structure test: the normalised output may not depend on the input.
  std::mt19937_64 rng(0x5eedu);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec3 reference;
  bool have_reference = false;
  int checked = 0;
  while (checked < 24) {
    const Vec3 r{u(rng), u(rng), u(rng)};
    if (r.norm2() > 1.0) continue;
    const QubitState rho(r);
    const HermitianOp out = op(rho);
    if (out.scalar <= 0.5 * 1e-9) continue;  // measure-zero kernel states
    const Vec3 xi = out.vec / out.scalar;
    if (have_reference && (xi - reference).norm() >= 1e-9) return false;
    reference = xi;
    have_reference = true;
    ++checked;
  }
  return true;
}

}  // namespace jointmeas
