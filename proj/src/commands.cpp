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

#include "jointmeas/commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <utility>

#include "jointmeas/instruments.hpp"
#include "jointmeas/observables.hpp"

namespace jointmeas {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865476;
constexpr double kInvSqrt3 = 0.5773502691896258;

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

double resolved_eta(const RunConfig& config, int arity) {
  if (config.eta) return *config.eta;
  return arity == 2 ? kInvSqrt2 : kInvSqrt3;
}

/// Per-outcome key "<factor><sign>" (e.g. "0+"), matching DistanceReport.
std::string branch_key(int factor, int sign) {
  return std::to_string(factor) + (sign > 0 ? "+" : "-");
}

nlohmann::ordered_json per_outcome_json(const DistanceReport& rep) {
  nlohmann::ordered_json node;
  for (const auto& [key, value] : rep.per_outcome) {
    node[branch_key(key.first, key.second)] = value;
  }
  return node;
}

nlohmann::ordered_json distance_json(const DistanceReport& rep) {
  nlohmann::ordered_json node;
  node["per_outcome"] = per_outcome_json(rep);
  node["total"] = rep.total;
  return node;
}

double max_per_outcome(const DistanceReport& rep) {
  double best = 0.0;
  for (const auto& [key, value] : rep.per_outcome) best = std::max(best, value);
  return best;
}

nlohmann::ordered_json axes_json(const AxisConfig& config) {
  auto arr = nlohmann::ordered_json::array();
  for (const Axis& axis : config.axes()) arr.push_back(vec_json(axis.unit()));
  return arr;
}

nlohmann::ordered_json scheme_json(const RunConfig& config) {
  nlohmann::ordered_json node;
  if (config.scheme == SchemeKind::quadrature) {
    node["kind"] = "quad";
    node["nodes"] = IntegrationScheme::quadrature().nodes;
  } else {
    node["kind"] = "mc";
    node["samples"] = config.samples;
    node["seed"] = config.seed;
  }
  return node;
}

nlohmann::ordered_json optimizer_json(const MinimizeParams& params) {
  nlohmann::ordered_json node;
  node["max_iterations"] = params.max_iterations;
  node["kkt_tolerance"] = params.kkt_tolerance;
  node["subgradient_tolerance"] = params.subgradient_tolerance;
  node["penalty_weight"] = params.penalty_weight;
  node["step"] = params.step;
  return node;
}

/// Tags of the outcomes with nonvanishing effects, ascending index.
std::vector<std::string> active_tags(const JointObservable& joint) {
  std::vector<std::string> tags;
  for (unsigned t = 0; t < joint.size(); ++t) {
    if (joint.effect(t).trace() > 0.0) tags.push_back(outcome_tag(joint.arity(), t));
  }
  return tags;
}

nlohmann::ordered_json q_json(const std::vector<std::string>& tags,
                              const std::vector<Vec3>& q) {
  nlohmann::ordered_json node;
  for (std::size_t i = 0; i < tags.size() && i < q.size(); ++i) {
    node[tags[i]] = vec_json(q[i]);
  }
  return node;
}

/// Expands active-outcome vectors to the joint's full outcome range.
Rank1Instrument instrument_from_outputs(const JointObservable& joint,
                                        const std::vector<Vec3>& dense) {
  std::vector<Vec3> full(joint.size(), Vec3{});
  std::size_t next = 0;
  for (unsigned t = 0; t < joint.size(); ++t) {
    if (joint.effect(t).trace() > 0.0) full[t] = dense.at(next++);
  }
  return rank1_from_joint(joint, full);
}

/// Outputs of the instrument at the active outcomes, ascending index.
std::vector<Vec3> active_outputs(const JointObservable& joint,
                                 const Rank1Instrument& inst) {
  std::vector<Vec3> outputs;
  for (unsigned t = 0; t < joint.size(); ++t) {
    if (joint.effect(t).trace() > 0.0) outputs.push_back(inst.output(t));
  }
  return outputs;
}

double max_output_gap(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double gap = 0.0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    gap = std::max(gap, (a[i] - b[i]).norm());
  }
  return gap;
}

}  // namespace

AxisConfig axis_config_for(const RunConfig& config) {
  const int arity = config.variant == Variant::g ? 2 : 3;
  if (static_cast<int>(config.axes.size()) < arity) {
    throw Error(ErrorCode::IndexOutOfRange,
                std::string("variant ") + variant_name(config.variant) + " needs " +
                    std::to_string(arity) + " axes, got " +
                    std::to_string(config.axes.size()));
  }
  std::vector<Axis> axes(config.axes.begin(), config.axes.begin() + arity);
  return AxisConfig(std::move(axes), resolved_eta(config, arity));
}

IntegrationScheme scheme_for(const RunConfig& config) {
  return config.scheme == SchemeKind::quadrature
             ? IntegrationScheme::quadrature()
             : IntegrationScheme::monte_carlo(config.samples, config.seed);
}

Report cmd_check_joint(const RunConfig& config) {
  const Timer timer;
  if (config.axes.size() < 2) {
    throw Error(ErrorCode::IndexOutOfRange, "the joint check needs two axes");
  }
  const Axis& first = config.axes[0];
  const Axis& second = config.axes[1];
  const double eta = config.eta.value_or(kInvSqrt2);

  Report report("check-joint");
  {
    auto arr = nlohmann::ordered_json::array();
    arr.push_back(vec_json(first.unit()));
    arr.push_back(vec_json(second.unit()));
    report.inputs()["axes"] = std::move(arr);
  }
  report.inputs()["eta"] = eta;

  // Feasibility sweep across the critical smearing.  Equal smearing on both
  // axes makes feasibility monotone, so the boundary is a single crossing.
  const double lo = 0.6;
  const double hi = 0.8;
  const double step = 1e-3;
  const int steps = static_cast<int>(std::lround((hi - lo) / step));
  std::optional<double> last_feasible;
  std::optional<double> first_infeasible;
  for (int k = 0; k <= steps; ++k) {
    const double value = lo + step * k;
    const bool feasible = joint_measurable_pair(smeared_observable(first, value),
                                                smeared_observable(second, value))
                              .has_value();
    if (feasible) {
      last_feasible = value;
    } else if (!first_infeasible) {
      first_infeasible = value;
    }
  }
  nlohmann::ordered_json sweep;
  sweep["lo"] = lo;
  sweep["hi"] = hi;
  sweep["step"] = step;
  sweep["bracketed"] = last_feasible.has_value() && first_infeasible.has_value();
  if (last_feasible) sweep["last_feasible"] = *last_feasible;
  if (first_infeasible) sweep["first_infeasible"] = *first_infeasible;
  if (last_feasible && first_infeasible) {
    sweep["threshold"] = 0.5 * (*last_feasible + *first_infeasible);
  } else {
    // The boundary sits outside the sweep window.
    sweep["threshold"] = last_feasible ? hi : lo;
  }
  report.results()["sweep"] = std::move(sweep);

  // Witness at the configured smearing.
  const BinaryObservable a = smeared_observable(first, eta);
  const BinaryObservable b = smeared_observable(second, eta);
  const auto witness = joint_measurable_pair(a, b);
  nlohmann::ordered_json w;
  w["eta"] = eta;
  w["feasible"] = witness.has_value();
  if (witness) {
    w["gamma"] = witness->gamma;
    w["g"] = vec_json(witness->g);
    w["unique"] = witness_unique(a, b, *witness);
  }
  report.results()["witness"] = std::move(w);

  report.finalize(timer.seconds());
  return report;
}

Report cmd_optimal_instrument(const RunConfig& config) {
  const Timer timer;
  const AxisConfig axis = axis_config_for(config);

  Report report("optimal-instrument");
  report.inputs()["axes"] = axes_json(axis);
  report.inputs()["eta"] = axis.eta();
  report.inputs()["variant"] = variant_name(config.variant);
  report.inputs()["metric"] = metric_name(config.metric);
  report.inputs()["scheme"] = scheme_json(config);
  report.inputs()["optimizer"] = optimizer_json(config.optimizer);

  const OptimizationProblem problem{axis, config.variant, config.metric};
  const MinimizeResult run = minimize(problem, {}, config.optimizer);

  const JointObservable joint = joint_for_variant(axis, config.variant);
  const std::vector<std::string> tags = active_tags(joint);

  const DistanceReport closed = distance_report(run.q, axis, config.metric);
  const Rank1Instrument inst = instrument_from_outputs(joint, run.q);
  const DistanceReport numeric =
      distance_report_numeric(inst, axis, config.metric, scheme_for(config));

  auto& results = report.results();
  results["value"] = run.value;
  results["iterations"] = run.iterations;
  results["q"] = q_json(tags, run.q);
  {
    nlohmann::ordered_json cert;
    cert["kkt_residual"] = run.certificate.kkt_residual;
    cert["satisfied"] = run.certificate.satisfied;
    results["certificate"] = std::move(cert);
  }
  results["equal_distances"] = equal_distance_check(closed, 1e-6);
  results["closed"] = distance_json(closed);
  results["numeric"] = distance_json(numeric);

  // Compare the optimum against the structural candidate for this metric:
  // the Lüders instrument (average) or a shrunken mixture of it (worst case).
  const std::vector<Vec3> luders = active_outputs(joint, luders_of_joint(joint));
  if (config.metric == Metric::average) {
    const double gap = max_output_gap(run.q, luders);
    nlohmann::ordered_json node;
    node["max_gap"] = gap;
    node["matches"] = gap < 1e-6;
    results["luders"] = std::move(node);
  } else {
    // Least-squares fit of the mixing weight onto the Lüders directions.
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < luders.size(); ++i) {
      num += run.q[i].dot(luders[i]);
      den += luders[i].dot(luders[i]);
    }
    const double weight = den > 0.0 ? std::clamp(num / den, 0.0, 1.0) : 0.0;
    const std::vector<Vec3> mixed =
        active_outputs(joint, worst_case_mixture(joint, weight));
    const double gap = max_output_gap(run.q, mixed);
    nlohmann::ordered_json node;
    node["weight"] = weight;
    node["max_gap"] = gap;
    node["matches"] = gap < 1e-6;
    results["mixture"] = std::move(node);
  }

  report.finalize(timer.seconds());
  return report;
}

Report cmd_constants(const RunConfig& config) {
  const Timer timer;
  Report report("constants");
  report.inputs()["frame"] = "standard";
  report.inputs()["quadrature_nodes"] = IntegrationScheme::quadrature().nodes;
  report.inputs()["mc_samples"] = config.samples;
  report.inputs()["mc_seed"] = config.seed;

  const AxisConfig two = AxisConfig::standard_two();
  const AxisConfig three = AxisConfig::standard_three();
  const IntegrationScheme quad = IntegrationScheme::quadrature();
  const IntegrationScheme mc = IntegrationScheme::monte_carlo(config.samples, config.seed);

  const auto entry = [&](double closed, const BallIntegrand& integrand) {
    nlohmann::ordered_json node;
    node["closed"] = closed;
    const BallAverage q = ball_average_detailed(integrand, quad);
    node["quadrature"] = {{"value", q.value}, {"std_error", q.std_error}};
    const BallAverage m = ball_average_detailed(integrand, mc);
    node["monte_carlo"] = {{"value", m.value}, {"std_error", m.std_error}};
    return node;
  };

  report.constants()["alpha"] = entry(alpha(), [&two](const Vec3& r) {
    const double f = f_factor(r, two, 0, 1);
    return f * f;
  });
  report.constants()["beta"] = entry(beta(), [&three](const Vec3& r) {
    const double t = detail::transverse_factor(r, three, 0, 1, 1);
    return t * t;
  });
  auto gamma_node = entry(gamma_const(), [&three](const Vec3& r) {
    const double f = f_factor(r, three, 0, 1);
    return f * f;
  });
  gamma_node["two_beta_gap"] = std::abs(gamma_const() - 2.0 * beta());
  report.constants()["gamma"] = std::move(gamma_node);

  report.finalize(timer.seconds());
  return report;
}

Report cmd_reproduce_paper(const RunConfig& config) {
  const Timer timer;
  if (config.axes.size() < 3) {
    throw Error(ErrorCode::IndexOutOfRange, "the reproduction run needs three axes");
  }
  // The reference values assume the critical smearing for each arity, so the
  // run pins eta rather than taking it from the config.
  const AxisConfig two({config.axes[0], config.axes[1]}, kInvSqrt2);
  const AxisConfig three({config.axes[0], config.axes[1], config.axes[2]}, kInvSqrt3);

  Report report("reproduce-paper");
  report.inputs()["axes"] = axes_json(three);
  report.inputs()["eta_two_axis"] = kInvSqrt2;
  report.inputs()["eta_three_axis"] = kInvSqrt3;
  report.inputs()["optimizer"] = optimizer_json(config.optimizer);

  bool all_rows = true;
  bool all_certified = true;
  auto rows = nlohmann::ordered_json::array();
  const auto add_row = [&](const std::string& name, double computed,
                           std::optional<double> published, double published_tol,
                           std::optional<double> closed, double closed_tol) {
    nlohmann::ordered_json row;
    row["name"] = name;
    row["computed"] = computed;
    bool pass = true;
    if (published) {
      const double delta = std::abs(computed - *published);
      row["published"] = {{"value", *published}, {"delta", delta}, {"tolerance", published_tol}};
      pass = pass && delta <= published_tol;
    }
    if (closed) {
      const double delta = std::abs(computed - *closed);
      row["closed"] = {{"value", *closed}, {"delta", delta}, {"tolerance", closed_tol}};
      pass = pass && delta <= closed_tol;
    }
    row["pass"] = pass;
    rows.push_back(std::move(row));
    all_rows = all_rows && pass;
  };

  const auto run_case = [&](const AxisConfig& axis, Variant variant, Metric metric) {
    const OptimizationProblem problem{axis, variant, metric};
    const MinimizeResult run = minimize(problem, {}, config.optimizer);
    all_certified = all_certified && run.certificate.satisfied;
    return distance_report(run.q, axis, metric);
  };

  const double sqrt2 = std::sqrt(2.0);
  const double three_gap = (1.0 - kInvSqrt3) * (1.0 - kInvSqrt3);

  // Two-axis average.
  const DistanceReport rep_g = run_case(two, Variant::g, Metric::average);
  const double per_g = max_per_outcome(rep_g);
  add_row("two-axis average per outcome", per_g, 0.15, 5e-3,
          0.5 * (3.0 - 2.0 * sqrt2 + alpha()), 1e-6);
  add_row("two-axis average total", rep_g.total, std::nullopt, 0.0,
          2.0 * (3.0 - 2.0 * sqrt2 + alpha()), 1e-6);

  // Eight-outcome three-axis average.
  const DistanceReport rep_e = run_case(three, Variant::e, Metric::average);
  const double per_e = max_per_outcome(rep_e);
  add_row("eight-outcome average per outcome", per_e, 0.23, 5e-3,
          (2.0 / 3.0) * beta() + three_gap, 1e-6);

  // Four-outcome three-axis average.
  const DistanceReport rep_f = run_case(three, Variant::f, Metric::average);
  const double per_f = max_per_outcome(rep_f);
  add_row("four-outcome average per outcome", per_f, 0.28, 5e-3,
          (2.0 / 3.0) * gamma_const() + three_gap, 1e-6);

  // Two-axis worst case.
  const DistanceReport rep_w = run_case(two, Variant::g, Metric::worst_case);
  add_row("two-axis worst case per outcome", max_per_outcome(rep_w), std::nullopt,
          0.0, kInvSqrt2, 1e-6);
  add_row("two-axis worst case total", rep_w.total, std::nullopt, 0.0,
          2.0 * sqrt2, 1e-6);

  // The three average levels must come out strictly ordered.
  {
    nlohmann::ordered_json row;
    row["name"] = "per-outcome ordering";
    row["values"] = {per_g, per_e, per_f};
    const bool pass = per_g < per_e && per_e < per_f;
    row["pass"] = pass;
    rows.push_back(std::move(row));
    all_rows = all_rows && pass;
  }

  auto& results = report.results();
  results["rows"] = std::move(rows);
  results["certified"] = all_certified;
  results["all_match"] = all_rows && all_certified;

  report.finalize(timer.seconds());
  return report;
}

InstrumentFile read_instrument_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IndexOutOfRange,
                "cannot open instrument file '" + path + "'");
  }

  struct Entry {
    unsigned index = 0;
    Vec3 q;
    std::string tag;
  };
  std::vector<Entry> entries;
  int arity = 0;
  int lineno = 0;
  std::string line;
  const auto fail = [&](const std::string& message) {
    return Error(ErrorCode::IndexOutOfRange,
                 "instrument file line " + std::to_string(lineno) + ": " + message);
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream fields(line);
    std::string tag;
    if (!(fields >> tag)) continue;

    std::pair<int, unsigned> parsed;
    try {
      parsed = parse_outcome_tag(tag);
    } catch (const Error&) {
      throw fail("malformed outcome tag '" + tag + "'");
    }
    if (arity == 0) {
      arity = parsed.first;
    } else if (parsed.first != arity) {
      throw fail("outcome tag '" + tag + "' mixes arities");
    }

    Vec3 q;
    double* const components[3] = {&q.x, &q.y, &q.z};
    for (int c = 0; c < 3; ++c) {
      std::string token;
      if (!(fields >> token)) {
        throw fail("expected 4 fields (tag x y z), missing field " +
                   std::to_string(c + 2));
      }
      const char* begin = token.data();
      const char* end = begin + token.size();
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(begin, end, value);
      if (ec != std::errc() || ptr != end) {
        throw fail("field " + std::to_string(c + 2) + " is not a number: '" +
                   token + "'");
      }
      *components[c] = value;
    }
    if (std::string extra; fields >> extra) {
      throw fail("unexpected trailing field '" + extra + "'");
    }
    if (q.norm() > 1.0 + 1e-12) {
      throw Error(ErrorCode::VectorTooLong,
                  "instrument file line " + std::to_string(lineno) +
                      ": output leaves the Bloch ball (|q| = " +
                      format_double(q.norm()) + ")");
    }
    entries.push_back({parsed.second, q, tag});
  }
  if (entries.empty()) {
    throw Error(ErrorCode::IndexOutOfRange,
                "instrument file '" + path + "' has no entries");
  }

  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.index < b.index; });
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].index == entries[i - 1].index) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "instrument file '" + path + "': duplicate outcome tag '" +
                      entries[i].tag + "'");
    }
  }

  InstrumentFile result;
  result.arity = arity;
  const std::size_t count = entries.size();
  if (arity == 2 && count == 4) {
    result.variant = Variant::g;
  } else if (arity == 3 && count == 8) {
    result.variant = Variant::e;
  } else if (arity == 3 && count == 4) {
    result.variant = Variant::f;
    for (const Entry& entry : entries) {
      if (outcome_parity(arity, entry.index) < 0) {
        throw Error(ErrorCode::IndexOutOfRange,
                    "instrument file '" + path + "': tag '" + entry.tag +
                        "' has odd parity; the four-outcome form supports only "
                        "the even-parity outcomes");
      }
    }
  } else {
    throw Error(ErrorCode::IndexOutOfRange,
                "instrument file '" + path + "' holds " + std::to_string(count) +
                    " entries of arity " + std::to_string(arity) +
                    "; expected 4 two-digit tags, 8 three-digit tags, or the 4 "
                    "even-parity three-digit tags");
  }
  result.outputs.reserve(count);
  for (const Entry& entry : entries) result.outputs.push_back(entry.q);
  return result;
}

Report cmd_evaluate(const RunConfig& config, const std::string& instrument_path) {
  const Timer timer;
  const InstrumentFile file = read_instrument_file(instrument_path);
  if (static_cast<int>(config.axes.size()) < file.arity) {
    throw Error(ErrorCode::IndexOutOfRange,
                "the instrument file needs " + std::to_string(file.arity) +
                    " axes, got " + std::to_string(config.axes.size()));
  }
  std::vector<Axis> axes(config.axes.begin(), config.axes.begin() + file.arity);
  const AxisConfig axis(std::move(axes), resolved_eta(config, file.arity));
  const JointObservable joint = joint_for_variant(axis, file.variant);

  Report report("evaluate");
  report.inputs()["file"] = instrument_path;
  report.inputs()["axes"] = axes_json(axis);
  report.inputs()["eta"] = axis.eta();
  report.inputs()["variant"] = variant_name(file.variant);
  report.inputs()["q"] = q_json(active_tags(joint), file.outputs);

  auto& results = report.results();
  results["average"] = distance_json(distance_report(file.outputs, axis, Metric::average));
  if (file.variant == Variant::e) {
    // The endpoint form needs two-part marginals; the eight-outcome joint
    // splits each target into four parts.
    nlohmann::ordered_json node;
    node["supported"] = false;
    results["worst_case"] = std::move(node);
  } else {
    auto node = distance_json(distance_report(file.outputs, axis, Metric::worst_case));
    node["supported"] = true;
    results["worst_case"] = std::move(node);
  }

  report.finalize(timer.seconds());
  return report;
}

}  // namespace jointmeas
