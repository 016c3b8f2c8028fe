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
 * @file report.hpp
 * @brief Structured result reports with deterministic rendering.
 *
 * A report holds one command's echoed inputs and computed results in an
 * insertion-ordered tree and renders either as a structured object or as
 * flat key = value lines.  Numbers print in shortest round-trip form, so two
 * runs with the same inputs produce byte-identical payloads; the timing
 * section is the only part expected to differ between runs.
 */

#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "jointmeas/bloch.hpp"

namespace jointmeas {

inline constexpr const char* kVersion = "0.1.0";

enum class ReportFormat { text, json };

/// Parses "text" or "json".
/// @throws Error{IndexOutOfRange} for anything else.
ReportFormat parse_report_format(const std::string& name);

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double value);

/// [x, y, z] array node for a Bloch vector.
nlohmann::ordered_json vec_json(const Vec3& v);

class Report {
 public:
  explicit Report(const std::string& command);

  nlohmann::ordered_json& inputs() { return root_["inputs"]; }
  nlohmann::ordered_json& results() { return root_["results"]; }
  /// Created on first use; only the constants command fills it.
  nlohmann::ordered_json& constants() { return root_["constants"]; }
  const nlohmann::ordered_json& root() const { return root_; }

  /// Appends the version and timing sections; call once, last.
  void finalize(double seconds);

  /// Flat `key = value` lines (text) or the indented object form (json).
  std::string render(ReportFormat format) const;
  void write_to(std::ostream& os, ReportFormat format) const;

 private:
  nlohmann::ordered_json root_;
};

}  // namespace jointmeas
