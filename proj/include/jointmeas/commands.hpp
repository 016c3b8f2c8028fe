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
 * @file commands.hpp
 * @brief The command layer behind the jointmeas CLI.
 *
 * Each command takes a fully resolved RunConfig, performs one study, and
 * returns a Report.  Commands throw Error on invalid configuration or
 * solver failure; mapping errors and report flags to process exit codes is
 * the caller's job (see tools/jointmeas_main.cpp).  Given the same config
 * and seed, every command produces a byte-identical result payload; only
 * the timing section varies between runs.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jointmeas/integration.hpp"
#include "jointmeas/metrics.hpp"
#include "jointmeas/optimizer.hpp"
#include "jointmeas/report.hpp"

namespace jointmeas {

/// Fully resolved invocation parameters shared by all commands.
struct RunConfig {
  /// Measurement axes; the variant decides how many are used (g: first two,
  /// e/f: all three).
  std::vector<Axis> axes = {axis_x(), axis_y(), axis_z()};
  /// Smearing parameter; defaults to the variant's critical value
  /// (1/sqrt(2) for two axes, 1/sqrt(3) for three).
  std::optional<double> eta;
  Variant variant = Variant::g;
  Metric metric = Metric::average;
  SchemeKind scheme = SchemeKind::quadrature;
  std::size_t samples = 1000000;
  std::uint64_t seed = 42;
  /// Report destination; empty writes to stdout.
  std::string out;
  ReportFormat format = ReportFormat::text;
  MinimizeParams optimizer;
};

/// Axis configuration the run describes.
/// @throws Error{IndexOutOfRange} when the variant needs more axes than the
///         config supplies; Error{EtaOutOfRange} via AxisConfig validation.
AxisConfig axis_config_for(const RunConfig& config);

/// Integration scheme the run describes.
IntegrationScheme scheme_for(const RunConfig& config);

/// Instrument description read from a flat text file.
struct InstrumentFile {
  Variant variant = Variant::g;
  int arity = 2;
  /// One output vector per active outcome, ascending outcome order.
  std::vector<Vec3> outputs;
};

/**
 * @brief Reads an instrument file: one `tag x y z` line per outcome.
 *
 * Tags are +/- strings as produced by outcome_tag; '#' starts a comment and
 * blank lines are skipped.  The tag set decides the variant: four two-digit
 * tags give the two-axis form, eight three-digit tags the eight-outcome
 * form, and the four even-parity three-digit tags the four-outcome form.
 *
 * @throws Error{IndexOutOfRange} with a line/field diagnostic on malformed
 *         input; Error{VectorTooLong} when an output leaves the Bloch ball.
 */
InstrumentFile read_instrument_file(const std::string& path);

/// Sweeps the smearing parameter across the joint-measurability threshold
/// and reports the witness at the configured eta.
Report cmd_check_joint(const RunConfig& config);

/// Minimizes the configured metric, certifies the optimum, and compares it
/// against the closed-form instrument candidates.
Report cmd_optimal_instrument(const RunConfig& config);

/// Tabulates the moment constants with closed-form, quadrature, and
/// Monte Carlo values.
Report cmd_constants(const RunConfig& config);

/// Runs the headline optimization cases end-to-end and compares every
/// computed number against its published and closed-form value.
Report cmd_reproduce_paper(const RunConfig& config);

/// Scores a user-supplied instrument file under both metrics.
Report cmd_evaluate(const RunConfig& config, const std::string& instrument_path);

}  // namespace jointmeas
