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

#include "jointmeas/integration.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <random>

namespace jointmeas {
namespace {

// Coordinates are generated and evaluated in blocks of this many points; the
// per-block partial sums are folded into the total in block order, which
// pins the floating-point reduction independently of how a backend batches.
constexpr std::size_t kChunk = 4096;

struct Accumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::uint64_t count = 0;

  void add_chunk(const double* values, std::size_t n) {
    double s = 0.0;
    double s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s += values[i];
      s2 += values[i] * values[i];
    }
    sum += s;
    sum_sq += s2;
    count += n;
  }
};

class FunctionBatch final : public BatchIntegrand {
 public:
  explicit FunctionBatch(const BallIntegrand& f) : f_(f) {}
  void evaluate(const double* x, const double* y, const double* z, double* out,
                std::size_t count) const override {
    for (std::size_t i = 0; i < count; ++i) out[i] = f_(Vec3{x[i], y[i], z[i]});
  }

 private:
  const BallIntegrand& f_;
};

BallAverage monte_carlo_average(const BatchIntegrand& integrand,
                                const IntegrationScheme& scheme) {
  if (scheme.samples == 0)
    throw Error(ErrorCode::IndexOutOfRange, "monte carlo sample count must be positive");
  std::mt19937_64 rng(scheme.seed);
  std::uniform_real_distribution<double> cube(-1.0, 1.0);

  double xs[kChunk], ys[kChunk], zs[kChunk], vals[kChunk];
  Accumulator acc;
  std::uint64_t remaining = scheme.samples;
  while (remaining > 0) {
    const std::size_t n =
        remaining < kChunk ? static_cast<std::size_t>(remaining) : kChunk;
    for (std::size_t i = 0; i < n;) {
      const double x = cube(rng);
      const double y = cube(rng);
      const double z = cube(rng);
      if (x * x + y * y + z * z > 1.0) continue;
      xs[i] = x;
      ys[i] = y;
      zs[i] = z;
      ++i;
    }
    integrand.evaluate(xs, ys, zs, vals, n);
    acc.add_chunk(vals, n);
    remaining -= n;
  }

  BallAverage result;
  const double n = static_cast<double>(acc.count);
  result.value = acc.sum / n;
  if (acc.count > 1) {
    const double var = std::max(0.0, (acc.sum_sq - n * result.value * result.value) / (n - 1.0));
    result.std_error = std::sqrt(var / n);
  }
  return result;
}

// One pass of the tensor-product spherical rule with n nodes per dimension.
// The radial factor r^2 is folded into the weight; the weights then sum to
// 4*pi/3 exactly (the rule integrates r^2 without error), so dividing by the
// ball volume is exact as well.
double quadrature_pass(const BatchIntegrand& integrand, int n) {
  std::vector<double> t, w;
  gauss_legendre(n, t, w);

  std::vector<double> radius(n), wr(n), phi_x(n), phi_y(n), wphi(n);
  for (int i = 0; i < n; ++i) {
    radius[i] = 0.5 * (t[i] + 1.0);
    wr[i] = 0.5 * w[i] * radius[i] * radius[i];
    const double phi = std::numbers::pi * (t[i] + 1.0);
    phi_x[i] = std::cos(phi);
    phi_y[i] = std::sin(phi);
    wphi[i] = std::numbers::pi * w[i];
  }

  double xs[kChunk], ys[kChunk], zs[kChunk], ws[kChunk], vals[kChunk];
  std::size_t fill = 0;
  double total = 0.0;
  auto flush = [&] {
    integrand.evaluate(xs, ys, zs, vals, fill);
    double s = 0.0;
    for (std::size_t i = 0; i < fill; ++i) s += ws[i] * vals[i];
    total += s;
    fill = 0;
  };

  for (int ir = 0; ir < n; ++ir) {
    for (int ic = 0; ic < n; ++ic) {
      const double c = t[ic];
      const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
      const double rho = radius[ir] * s;
      for (int ip = 0; ip < n; ++ip) {
        xs[fill] = rho * phi_x[ip];
        ys[fill] = rho * phi_y[ip];
        zs[fill] = radius[ir] * c;
        ws[fill] = wr[ir] * w[ic] * wphi[ip];
        if (++fill == kChunk) flush();
      }
    }
  }
  if (fill > 0) flush();
  return total * (3.0 / (4.0 * std::numbers::pi));
}

BallAverage quadrature_average(const BatchIntegrand& integrand,
                               const IntegrationScheme& scheme) {
  if (scheme.nodes < 4)
    throw Error(ErrorCode::IndexOutOfRange, "quadrature needs at least 4 nodes per dimension");
  BallAverage result;
  result.value = quadrature_pass(integrand, scheme.nodes);
  const double coarse = quadrature_pass(integrand, scheme.nodes / 2);
  result.std_error =
      std::abs(result.value - coarse) + 1e-14 * (1.0 + std::abs(result.value));
  return result;
}

}  // namespace

IntegrationScheme IntegrationScheme::monte_carlo(std::uint64_t samples, std::uint64_t seed) {
  IntegrationScheme s;
  s.kind = SchemeKind::monte_carlo;
  s.samples = samples;
  s.seed = seed;
  return s;
}

IntegrationScheme IntegrationScheme::quadrature(int nodes) {
  IntegrationScheme s;
  s.kind = SchemeKind::quadrature;
  s.nodes = nodes;
  return s;
}

BallAverage ball_average_detailed(const BatchIntegrand& integrand,
                                  const IntegrationScheme& scheme) {
  return scheme.kind == SchemeKind::monte_carlo ? monte_carlo_average(integrand, scheme)
                                                : quadrature_average(integrand, scheme);
}

BallAverage ball_average_detailed(const BallIntegrand& integrand,
                                  const IntegrationScheme& scheme) {
  FunctionBatch batch(integrand);
  return ball_average_detailed(batch, scheme);
}

double ball_average(const BallIntegrand& integrand, const IntegrationScheme& scheme) {
  return ball_average_detailed(integrand, scheme).value;
}

double ball_average(const BatchIntegrand& integrand, const IntegrationScheme& scheme) {
  return ball_average_detailed(integrand, scheme).value;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw Error(ErrorCode::IndexOutOfRange, "gauss_legendre needs n >= 1");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // i-th root counted from +1, standard asymptotic initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 64; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

namespace detail {

std::vector<std::array<double, 3>> sobol_unit_points(std::size_t count) {
  constexpr int kBits = 32;
  // Direction numbers for the first three dimensions of the standard Sobol
  // sequence: van der Corput, then the primitive polynomials x+1 and
  // x^2+x+1 with initial values m = (1) and m = (1, 3).
  std::uint32_t v[3][kBits];
  for (int j = 0; j < kBits; ++j) v[0][j] = 1u << (31 - j);
  v[1][0] = 1u << 31;
  for (int j = 1; j < kBits; ++j) v[1][j] = v[1][j - 1] ^ (v[1][j - 1] >> 1);
  v[2][0] = 1u << 31;
  v[2][1] = 3u << 30;
  for (int j = 2; j < kBits; ++j) v[2][j] = v[2][j - 1] ^ v[2][j - 2] ^ (v[2][j - 2] >> 2);

  std::vector<std::array<double, 3>> points;
  points.reserve(count);
  std::uint32_t state[3] = {0, 0, 0};
  constexpr double scale = 1.0 / 4294967296.0;  // 2^-32
  for (std::size_t i = 1; i <= count; ++i) {
    const int bit = std::countr_zero(static_cast<std::uint32_t>(i));
    for (int d = 0; d < 3; ++d) state[d] ^= v[d][bit];
    points.push_back({state[0] * scale, state[1] * scale, state[2] * scale});
  }
  return points;
}

}  // namespace detail

std::vector<Vec3> sobol_ball_points(std::size_t count) {
  const auto unit = detail::sobol_unit_points(count);
  std::vector<Vec3> points;
  points.reserve(count);
  for (const auto& u : unit) {
    const double radius = std::cbrt(u[0]);
    const double c = 2.0 * u[1] - 1.0;
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    const double phi = 2.0 * std::numbers::pi * u[2];
    points.push_back(Vec3{radius * s * std::cos(phi), radius * s * std::sin(phi), radius * c});
  }
  return points;
}

}  // namespace jointmeas
