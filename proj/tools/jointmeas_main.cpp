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
 * @file jointmeas_main.cpp
 * @brief CLI front end for the command layer.
 *
 * Exit codes: 0 success, 2 configuration or validation failure, 3 solver
 * failure, 4 reproduction mismatch.  All flags can also be given through a
 * config file (--config, same keys without the leading dashes); explicit
 * flags override the file.
 */

#include <CLI11.hpp>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "jointmeas/commands.hpp"

namespace {

using jointmeas::Axis;
using jointmeas::Error;
using jointmeas::ErrorCode;
using jointmeas::Report;
using jointmeas::RunConfig;

std::vector<Axis> parse_axes(const std::string& text) {
  if (text == "standard") {
    return {jointmeas::axis_x(), jointmeas::axis_y(), jointmeas::axis_z()};
  }
  std::vector<double> values;
  std::istringstream stream(text);
  std::string token;
  while (std::getline(stream, token, ',')) {
    const auto first = token.find_first_not_of(" \t");
    const auto last = token.find_last_not_of(" \t");
    if (first == std::string::npos) {
      throw Error(ErrorCode::IndexOutOfRange, "--axes has an empty component");
    }
    const std::string trimmed = token.substr(first, last - first + 1);
    double value = 0.0;
    const char* begin = trimmed.data();
    const char* end = begin + trimmed.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "--axes component '" + trimmed + "' is not a number");
    }
    values.push_back(value);
  }
  if (values.size() != 6 && values.size() != 9) {
    throw Error(ErrorCode::IndexOutOfRange,
                "--axes needs 'standard' or 6/9 comma-separated components, got " +
                    std::to_string(values.size()));
  }
  std::vector<Axis> axes;
  for (std::size_t i = 0; i + 2 < values.size(); i += 3) {
    axes.emplace_back(jointmeas::Vec3{values[i], values[i + 1], values[i + 2]});
  }
  return axes;
}

jointmeas::Variant parse_variant(const std::string& name) {
  if (name == "g") return jointmeas::Variant::g;
  if (name == "e") return jointmeas::Variant::e;
  if (name == "f") return jointmeas::Variant::f;
  throw Error(ErrorCode::IndexOutOfRange,
              "unknown variant '" + name + "' (expected g, e, or f)");
}

jointmeas::Metric parse_metric(const std::string& name) {
  if (name == "average") return jointmeas::Metric::average;
  if (name == "worst-case") return jointmeas::Metric::worst_case;
  throw Error(ErrorCode::IndexOutOfRange,
              "unknown metric '" + name + "' (expected average or worst-case)");
}

jointmeas::SchemeKind parse_scheme(const std::string& name) {
  if (name == "quad") return jointmeas::SchemeKind::quadrature;
  if (name == "mc") return jointmeas::SchemeKind::monte_carlo;
  throw Error(ErrorCode::IndexOutOfRange,
              "unknown scheme '" + name + "' (expected quad or mc)");
}

int write_report(const Report& report, const RunConfig& config) {
  if (config.out.empty()) {
    report.write_to(std::cout, config.format);
    return 0;
  }
  std::ofstream out(config.out);
  if (!out) {
    std::cerr << "error: cannot write report to '" << config.out << "'\n";
    return 2;
  }
  report.write_to(out, config.format);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Joint measurability and optimal approximate instruments for binary "
      "qubit observables"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "Read option defaults from an INI file; flags override");

  std::string axes_text = "standard";
  double eta = 0.0;
  std::string variant_text = "g";
  std::string metric_text = "average";
  std::string scheme_text = "quad";
  std::string format_text = "text";
  std::string out_path;
  std::string instrument_path;
  std::size_t samples = 1000000;
  std::uint64_t seed = 42;
  jointmeas::MinimizeParams optimizer;

  app.add_option("--axes", axes_text,
                 "Measurement axes: 'standard' or 6/9 comma-separated components")
      ->capture_default_str();
  auto* eta_option =
      app.add_option("--eta", eta,
                     "Smearing parameter (default: the variant's critical value)");
  app.add_option("--variant", variant_text, "Joint observable form: g, e, or f")
      ->capture_default_str();
  app.add_option("--metric", metric_text, "Distance metric: average or worst-case")
      ->capture_default_str();
  app.add_option("--scheme", scheme_text, "Integration scheme: quad or mc")
      ->capture_default_str();
  app.add_option("--samples", samples, "Monte Carlo sample count")
      ->capture_default_str();
  app.add_option("--seed", seed, "Monte Carlo seed")->capture_default_str();
  app.add_option("--out", out_path, "Write the report to this path instead of stdout");
  app.add_option("--format", format_text, "Report format: text or json")
      ->capture_default_str();
  app.add_option("--max-iterations", optimizer.max_iterations,
                 "Optimizer iteration budget")
      ->capture_default_str();
  app.add_option("--kkt-tolerance", optimizer.kkt_tolerance,
                 "Optimality residual target")
      ->capture_default_str();
  app.add_option("--penalty-weight", optimizer.penalty_weight,
                 "Equal-distance penalty weight (worst case)")
      ->capture_default_str();

  auto* check = app.add_subcommand(
      "check-joint",
      "Sweep the smearing parameter and report the joint-measurability "
      "threshold and witness");
  auto* optimal = app.add_subcommand(
      "optimal-instrument",
      "Minimize the chosen distance over instruments and certify the optimum");
  auto* constants = app.add_subcommand(
      "constants",
      "Tabulate the moment constants: closed form, quadrature, Monte Carlo");
  auto* reproduce = app.add_subcommand(
      "reproduce-paper",
      "Run the headline cases end-to-end and compare against the reference "
      "values");
  auto* evaluate = app.add_subcommand(
      "evaluate", "Score an instrument file under both distance metrics");
  evaluate
      ->add_option("file", instrument_path,
                   "Instrument file: one 'tag x y z' line per outcome")
      ->required();
  for (CLI::App* sub : {check, optimal, constants, reproduce, evaluate}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    const int rc = app.exit(error);
    return rc == 0 ? 0 : 2;
  }

  try {
    RunConfig config;
    config.axes = parse_axes(axes_text);
    if (eta_option->count() > 0) config.eta = eta;
    config.variant = parse_variant(variant_text);
    config.metric = parse_metric(metric_text);
    config.scheme = parse_scheme(scheme_text);
    config.samples = samples;
    config.seed = seed;
    config.out = out_path;
    config.format = jointmeas::parse_report_format(format_text);
    config.optimizer = optimizer;

    Report report = [&] {
      if (app.got_subcommand(check)) return jointmeas::cmd_check_joint(config);
      if (app.got_subcommand(optimal)) return jointmeas::cmd_optimal_instrument(config);
      if (app.got_subcommand(constants)) return jointmeas::cmd_constants(config);
      if (app.got_subcommand(reproduce)) return jointmeas::cmd_reproduce_paper(config);
      return jointmeas::cmd_evaluate(config, instrument_path);
    }();

    if (const int rc = write_report(report, config); rc != 0) return rc;
    if (app.got_subcommand(reproduce) &&
        !report.root()["results"]["all_match"].get<bool>()) {
      return 4;
    }
    return 0;
  } catch (const Error& error) {
    std::cerr << "error: " << error.what() << "\n";
    return error.code() == ErrorCode::MaxIterations ? 3 : 2;
  }
}
