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

#include "jointmeas/observables.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace jointmeas {

namespace {

constexpr double kOrthoTol = 1e-9;
constexpr double kFeasibleTol = 1e-9;

void require_orthogonal(const Axis& a, const Axis& b) {
  if (std::abs(a.dot(b)) > kOrthoTol) {
    std::ostringstream msg;
    msg << "axes are not orthogonal (dot = " << a.dot(b) << ")";
    throw Error(ErrorCode::AxesNotOrthogonal, msg.str());
  }
}

void require_right_handed_frame(const Axis& x, const Axis& y, const Axis& z) {
  require_orthogonal(x, y);
  require_orthogonal(y, z);
  require_orthogonal(x, z);
  if (x.unit().cross(y.unit()).dot(z.unit()) <= 0.0) {
    throw Error(ErrorCode::AxesNotOrthogonal, "axes do not form a right-handed frame");
  }
}

}  // namespace

BinaryObservable::BinaryObservable(const HermitianOp& plus, const HermitianOp& minus)
    : plus_(plus), minus_(minus) {
  const HermitianOp sum = plus + minus;
  if (std::abs(sum.scalar - 1.0) > 1e-12 || sum.vec.norm() > 1e-12) {
    throw Error(ErrorCode::TraceMismatch, "binary effects must sum to the identity");
  }
  if (!plus.is_effect() || !minus.is_effect()) {
    throw Error(ErrorCode::NotPositive, "binary outcome operators must be effects");
  }
}

BinaryObservable BinaryObservable::from_plus(const HermitianOp& plus) {
  return BinaryObservable(plus, identity_op() - plus);
}

bool BinaryObservable::is_sharp(double tol) const {
  return plus_.is_projection(tol) && minus_.is_projection(tol);
}

bool BinaryObservable::is_unbiased(double tol) const {
  return std::abs(plus_.scalar - 0.5) <= tol;
}

BinaryObservable sharp_observable(const Axis& axis) {
  return BinaryObservable::from_plus({0.5, axis.unit() * 0.5});
}

BinaryObservable smeared_observable(const Axis& axis, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    std::ostringstream msg;
    msg << "smearing parameter " << eta << " outside [0, 1]";
    throw Error(ErrorCode::EtaOutOfRange, msg.str());
  }
  return BinaryObservable::from_plus({0.5, axis.unit() * (0.5 * eta)});
}

int outcome_sign(int arity, unsigned index, int factor) {
  if (factor < 0 || factor >= arity || index >= outcome_count(arity)) {
    throw Error(ErrorCode::IndexOutOfRange, "outcome factor/index out of range");
  }
  return ((index >> (arity - 1 - factor)) & 1u) ? -1 : +1;
}

unsigned outcome_index(const std::vector<int>& signs) {
  unsigned idx = 0;
  for (int s : signs) idx = (idx << 1) | (s < 0 ? 1u : 0u);
  return idx;
}

int outcome_parity(int arity, unsigned index) {
  int parity = 1;
  for (int m = 0; m < arity; ++m) parity *= outcome_sign(arity, index, m);
  return parity;
}

std::string outcome_tag(int arity, unsigned index) {
  std::string tag;
  for (int m = 0; m < arity; ++m) tag += outcome_sign(arity, index, m) > 0 ? '+' : '-';
  return tag;
}

std::pair<int, unsigned> parse_outcome_tag(const std::string& tag) {
  if (tag.size() < 2 || tag.size() > 3) {
    throw Error(ErrorCode::IndexOutOfRange, "outcome tag '" + tag + "' must have 2 or 3 signs");
  }
  std::vector<int> signs;
  for (char c : tag) {
    if (c != '+' && c != '-') {
      throw Error(ErrorCode::IndexOutOfRange, "outcome tag '" + tag + "' may only contain + or -");
    }
    signs.push_back(c == '+' ? +1 : -1);
  }
  return {static_cast<int>(tag.size()), outcome_index(signs)};
}

JointObservable::JointObservable(int arity, std::vector<HermitianOp> effects)
    : arity_(arity), effects_(std::move(effects)) {
  if (arity_ != 2 && arity_ != 3) {
    throw Error(ErrorCode::IndexOutOfRange, "joint observables support 2 or 3 factors");
  }
  if (effects_.size() != outcome_count(arity_)) {
    throw Error(ErrorCode::IndexOutOfRange, "wrong number of effects for the declared arity");
  }
  HermitianOp sum = zero_op();
  for (const HermitianOp& e : effects_) {
    if (!e.is_effect()) {
      throw Error(ErrorCode::NotPositive, "joint-observable entries must be effects");
    }
    sum += e;
  }
  if (std::abs(sum.scalar - 1.0) > 1e-12 || sum.vec.norm() > 1e-12) {
    throw Error(ErrorCode::TraceMismatch, "joint-observable effects must sum to the identity");
  }
}

const HermitianOp& JointObservable::effect(unsigned index) const {
  if (index >= effects_.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "outcome index out of range");
  }
  return effects_[index];
}

JointObservable joint_observable_g(const Axis& x, const Axis& y) {
  require_orthogonal(x, y);
  const double inv = 1.0 / std::sqrt(2.0);
  std::vector<HermitianOp> effects;
  effects.reserve(4);
  for (unsigned t = 0; t < 4; ++t) {
    const double i = outcome_sign(2, t, 0);
    const double j = outcome_sign(2, t, 1);
    const Vec3 w = (x.unit() * i + y.unit() * j) * inv;
    effects.push_back({0.25, w * 0.25});
  }
  return JointObservable(2, std::move(effects));
}

JointObservable joint_observable_e(const Axis& x, const Axis& y, const Axis& z) {
  require_right_handed_frame(x, y, z);
  const double inv = 1.0 / std::sqrt(3.0);
  std::vector<HermitianOp> effects;
  effects.reserve(8);
  for (unsigned t = 0; t < 8; ++t) {
    const double i = outcome_sign(3, t, 0);
    const double j = outcome_sign(3, t, 1);
    const double k = outcome_sign(3, t, 2);
    const Vec3 w = (x.unit() * i + y.unit() * j + z.unit() * k) * inv;
    effects.push_back({0.125, w * 0.125});
  }
  return JointObservable(3, std::move(effects));
}

JointObservable joint_observable_f(const Axis& x, const Axis& y, const Axis& z) {
  require_right_handed_frame(x, y, z);
  const double inv = 1.0 / std::sqrt(3.0);
  std::vector<HermitianOp> effects;
  effects.reserve(8);
  for (unsigned t = 0; t < 8; ++t) {
    if (outcome_parity(3, t) < 0) {
      effects.push_back(zero_op());
      continue;
    }
    const double i = outcome_sign(3, t, 0);
    const double j = outcome_sign(3, t, 1);
    const double k = outcome_sign(3, t, 2);
    const Vec3 w = (x.unit() * i + y.unit() * j + z.unit() * k) * inv;
    effects.push_back({0.25, w * 0.25});
  }
  return JointObservable(3, std::move(effects));
}

BinaryObservable marginals(const JointObservable& j, int factor_index) {
  if (factor_index < 0 || factor_index >= j.arity()) {
    throw Error(ErrorCode::IndexOutOfRange, "marginal factor index out of range");
  }
  HermitianOp plus = zero_op();
  for (unsigned t = 0; t < j.size(); ++t) {
    if (outcome_sign(j.arity(), t, factor_index) > 0) plus += j.effect(t);
  }
  return BinaryObservable::from_plus(plus);
}

double OutcomeDistribution::prob(unsigned index) const {
  if (index >= probs.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "outcome index out of range");
  }
  return probs[index];
}

OutcomeDistribution outcome_distribution(const JointObservable& j, const QubitState& s) {
  OutcomeDistribution dist;
  dist.arity = j.arity();
  dist.probs.reserve(j.size());
  const HermitianOp rho = s.op();
  for (unsigned t = 0; t < j.size(); ++t) {
    dist.probs.push_back(trace_pair(rho, j.effect(t)));
  }
  return dist;
}

// ---------------------------------------------------------------------------
// Four-ball feasibility search.
// ---------------------------------------------------------------------------

namespace {

struct Balls {
  std::array<Vec3, 4> c;
  std::array<double, 4> r;
};

Balls make_balls(const Vec3& a, const Vec3& b, double gamma) {
  return {{Vec3{0, 0, 0}, a + b, a, b}, {gamma, gamma, 1.0 - gamma, 1.0 - gamma}};
}

double max_violation(const Balls& balls, const Vec3& g) {
  double v = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    v = std::max(v, (g - balls.c[i]).norm() - balls.r[i]);
  }
  return v;
}

// Log-sum-exp smoothing of the max violation; smooth and convex in g.
double lse_value(const Balls& balls, const Vec3& g, double mu, Vec3* grad) {
  std::array<double, 4> h;
  std::array<Vec3, 4> u;
  double hmax = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    const Vec3 w = g - balls.c[i];
    const double n = w.norm();
    h[i] = n - balls.r[i];
    u[i] = n > 1e-14 ? w / n : Vec3{0, 0, 0};
    hmax = std::max(hmax, h[i]);
  }
  double sum = 0.0;
  Vec3 gsum{0, 0, 0};
  for (int i = 0; i < 4; ++i) {
    const double w = std::exp((h[i] - hmax) / mu);
    sum += w;
    gsum += u[i] * w;
  }
  if (grad) *grad = gsum / sum;
  return hmax + mu * std::log(sum);
}

// Annealed gradient descent on the smoothed violation.
Vec3 lse_minimize(const Balls& balls, Vec3 g, const std::vector<double>& mus,
                  int iters_per_stage) {
  for (double mu : mus) {
    double step = 0.25;
    for (int it = 0; it < iters_per_stage; ++it) {
      Vec3 grad;
      const double f0 = lse_value(balls, g, mu, &grad);
      const double gn2 = grad.norm2();
      if (gn2 < 1e-24) break;
      double t = std::min(step * 2.0, 0.5);
      Vec3 trial = g - grad * t;
      while (t > 1e-15 && lse_value(balls, trial, mu, nullptr) > f0 - 0.25 * t * gn2) {
        t *= 0.5;
        trial = g - grad * t;
      }
      if (t <= 1e-15) break;
      g = trial;
      step = t;
    }
  }
  return g;
}

// Solves a small dense symmetric system by Gaussian elimination with
// partial pivoting; used by the equal-value Newton polish below.
bool solve_dense(std::array<std::array<double, 4>, 4>& m, std::array<double, 4>& rhs, int n) {
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int row = col + 1; row < n; ++row) {
      if (std::abs(m[row][col]) > std::abs(m[pivot][col])) pivot = row;
    }
    if (std::abs(m[pivot][col]) < 1e-300) return false;
    std::swap(m[col], m[pivot]);
    std::swap(rhs[col], rhs[pivot]);
    for (int row = col + 1; row < n; ++row) {
      const double f = m[row][col] / m[col][col];
      for (int k = col; k < n; ++k) m[row][k] -= f * m[col][k];
      rhs[row] -= f * rhs[col];
    }
  }
  for (int col = n - 1; col >= 0; --col) {
    for (int row = 0; row < col; ++row) {
      rhs[row] -= m[row][col] / m[col][col] * rhs[col];
      m[row][col] = 0.0;
    }
    rhs[col] /= m[col][col];
  }
  return true;
}

// Gauss-Newton polish: drives the numerically active constraints to a common
// value.  Near-critical configurations have all four constraints active, so
// the system is square and converges quadratically; the result is accepted
// only if it does not increase the true max violation.
Vec3 equal_value_polish(const Balls& balls, Vec3 g) {
  const Vec3 g_in = g;
  const double v_in = max_violation(balls, g_in);
  double v_est = v_in;
  for (int round = 0; round < 40; ++round) {
    std::array<double, 4> h;
    std::array<Vec3, 4> u;
    double vmax = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 4; ++i) {
      const Vec3 w = g - balls.c[i];
      const double n = w.norm();
      h[i] = n - balls.r[i];
      u[i] = n > 1e-14 ? w / n : Vec3{0, 0, 0};
      vmax = std::max(vmax, h[i]);
    }
    std::vector<int> active;
    for (int i = 0; i < 4; ++i) {
      if (h[i] >= vmax - 1e-5) active.push_back(i);
    }
    if (active.size() < 2) break;

    // Normal equations for residuals h_i - V over unknowns (g, V).
    std::array<std::array<double, 4>, 4> ata{};
    std::array<double, 4> atb{};
    for (int i : active) {
      const std::array<double, 4> row = {u[i].x, u[i].y, u[i].z, -1.0};
      const double res = h[i] - v_est;
      for (int r = 0; r < 4; ++r) {
        atb[r] -= row[r] * res;
        for (int c = 0; c < 4; ++c) ata[r][c] += row[r] * row[c];
      }
    }
    for (int r = 0; r < 4; ++r) ata[r][r] += 1e-13;
    if (!solve_dense(ata, atb, 4)) break;
    g += Vec3{atb[0], atb[1], atb[2]};
    v_est += atb[3];
    const double sn = Vec3{atb[0], atb[1], atb[2]}.norm() + std::abs(atb[3]);
    if (sn < 1e-15) break;
  }
  return max_violation(balls, g) <= v_in + 1e-15 ? g : g_in;
}

struct InnerSolve {
  Vec3 g;
  double violation;
};

InnerSolve solve_at_gamma(const Vec3& a, const Vec3& b, double gamma, const Vec3& warm,
                          bool fine) {
  const Balls balls = make_balls(a, b, gamma);
  static const std::vector<double> coarse_mus = {3e-2, 3e-3};
  static const std::vector<double> fine_mus = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7};
  Vec3 g = lse_minimize(balls, warm, fine ? fine_mus : coarse_mus, fine ? 200 : 50);
  if (fine) g = equal_value_polish(balls, g);
  return {g, max_violation(balls, g)};
}

}  // namespace

namespace detail {

double four_ball_violation(const Vec3& a, const Vec3& b, double gamma, const Vec3& g) {
  return max_violation(make_balls(a, b, gamma), g);
}

FourBallSearch four_ball_search(const Vec3& a, const Vec3& b) {
  // Stage 1: gamma grid at 1e-3 resolution, warm-starting g along the way.
  FourBallSearch best;
  best.violation = std::numeric_limits<double>::infinity();
  Vec3 warm = (a + b) * 0.5;
  for (int k = 0; k <= 1000; ++k) {
    const double gamma = static_cast<double>(k) / 1000.0;
    const InnerSolve s = solve_at_gamma(a, b, gamma, warm, /*fine=*/false);
    warm = s.g;
    if (s.violation < best.violation) best = {gamma, s.g, s.violation};
  }

  // Stage 2: the minimal violation is convex in gamma; shrink the bracket
  // around the grid minimum by ternary section down to ~1e-11 and keep the
  // best fine-solved point seen.
  double lo = std::max(0.0, best.gamma - 5e-3);
  double hi = std::min(1.0, best.gamma + 5e-3);
  const InnerSolve refined = solve_at_gamma(a, b, best.gamma, best.g, /*fine=*/true);
  best = {best.gamma, refined.g, refined.violation};
  Vec3 warm_fine = refined.g;
  for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    const InnerSolve s1 = solve_at_gamma(a, b, m1, warm_fine, /*fine=*/true);
    const InnerSolve s2 = solve_at_gamma(a, b, m2, warm_fine, /*fine=*/true);
    warm_fine = s1.g;
    if (s1.violation < best.violation) best = {m1, s1.g, s1.violation};
    if (s2.violation < best.violation) best = {m2, s2.g, s2.violation};
    if (s1.violation <= s2.violation) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  return best;
}

}  // namespace detail

namespace {

Vec3 observable_bloch_vector(const BinaryObservable& o) {
  if (!o.is_unbiased()) {
    throw Error(ErrorCode::BiasedObservable,
                "joint-measurability search supports only unbiased observables");
  }
  return o.plus().vec * 2.0;
}

}  // namespace

std::optional<JointWitness> joint_measurable_pair(const BinaryObservable& a,
                                                  const BinaryObservable& b) {
  const Vec3 av = observable_bloch_vector(a);
  const Vec3 bv = observable_bloch_vector(b);
  const detail::FourBallSearch best = detail::four_ball_search(av, bv);
  if (best.violation > kFeasibleTol) return std::nullopt;
  return JointWitness{best.gamma, best.g};
}

bool witness_unique(const BinaryObservable& a, const BinaryObservable& b,
                    const JointWitness& witness) {
  const Vec3 av = observable_bloch_vector(a);
  const Vec3 bv = observable_bloch_vector(b);
  const Balls balls = make_balls(av, bv, witness.gamma);
  if (max_violation(balls, witness.g) > 1e-6) {
    throw Error(ErrorCode::InvalidWitness, "supplied witness violates the ball constraints");
  }

  // Displacement probe: for each of the 26 sign/zero directions, the largest
  // step keeping g inside every ball is an exact ray-sphere intersection.
  // Balls that already hold g on their boundary would only admit a chord of
  // quadratic length, so their slack is treated as exactly zero; this keeps
  // round-off in the witness from inflating tangent directions.
  for (int ix = -1; ix <= 1; ++ix) {
    for (int iy = -1; iy <= 1; ++iy) {
      for (int iz = -1; iz <= 1; ++iz) {
        if (ix == 0 && iy == 0 && iz == 0) continue;
        const Vec3 d = Vec3(ix, iy, iz) / Vec3(ix, iy, iz).norm();
        double step = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 4; ++i) {
          const Vec3 w = witness.g - balls.c[i];
          const double wn = w.norm();
          const double slack = balls.r[i] - wn;
          const double proj = w.dot(d);
          double t;
          if (slack <= 1e-9) {
            t = 2.0 * std::max(0.0, -proj);
          } else {
            t = -proj + std::sqrt(proj * proj + slack * (balls.r[i] + wn));
          }
          step = std::min(step, t);
        }
        if (step > 1e-5) return false;
      }
    }
  }

  // Gamma probe: re-solve feasibility at perturbed gamma.  Any feasible point
  // there differs from the witness in the gamma coordinate alone.
  for (double delta : {1e-3, 1e-4, 1e-5}) {
    for (double sign : {1.0, -1.0}) {
      const double gamma = witness.gamma + sign * delta;
      if (gamma < 0.0 || gamma > 1.0) continue;
      const InnerSolve s = solve_at_gamma(av, bv, gamma, witness.g, /*fine=*/true);
      if (s.violation <= kFeasibleTol) return false;
    }
  }
  return true;
}

bool f_unique_four_outcome(const Axis& x, const Axis& y, const Axis& z) {
  const JointObservable f = joint_observable_f(x, y, z);
  const HermitianOp a_plus = marginals(f, 0).plus();
  const HermitianOp b_plus = marginals(f, 1).plus();
  const HermitianOp c_plus = marginals(f, 2).plus();

  // With the odd-parity effects pinned to zero, each marginal condition has a
  // single unknown left and the (+,+,+) effect is forced:
  //   A(1) + B(1) + C(1) = 2 F'(1,1,1) + I.
  const HermitianOp fppp = (a_plus + b_plus + c_plus - identity_op()) * 0.5;
  std::vector<HermitianOp> effects(8, zero_op());
  effects[outcome_index({+1, +1, +1})] = fppp;
  effects[outcome_index({+1, -1, -1})] = a_plus - fppp;
  effects[outcome_index({-1, +1, -1})] = b_plus - fppp;
  effects[outcome_index({-1, -1, +1})] = c_plus - fppp;

  for (unsigned t = 0; t < 8; ++t) {
    if (!effects[t].is_effect(1e-12)) return false;
    const HermitianOp diff = effects[t] - f.effect(t);
    if (std::abs(diff.scalar) > 1e-12 || diff.vec.norm() > 1e-12) return false;
  }
  return true;
}

}  // namespace jointmeas
