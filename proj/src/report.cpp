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

#include "jointmeas/report.hpp"

#include <array>
#include <charconv>
#include <ostream>
#include <string>

namespace jointmeas {

namespace {

std::string scalar_text(const nlohmann::ordered_json& node) {
  if (node.is_number_float()) return format_double(node.get<double>());
  if (node.is_string()) return node.get<std::string>();
  return node.dump();  // bool, integer, null
}

bool all_scalars(const nlohmann::ordered_json& array) {
  for (const auto& item : array)
    if (item.is_structured()) return false;
  return true;
}

void flatten(const nlohmann::ordered_json& node, const std::string& key, std::string& out) {
  if (node.is_object()) {
    for (const auto& [name, child] : node.items())
      flatten(child, key.empty() ? name : key + "." + name, out);
    return;
  }
  if (node.is_array() && !all_scalars(node)) {
    std::size_t i = 0;
    for (const auto& child : node) flatten(child, key + "." + std::to_string(i++), out);
    return;
  }
  out += key;
  out += " = ";
  if (node.is_array()) {
    out += '[';
    bool first = true;
    for (const auto& item : node) {
      if (!first) out += ", ";
      first = false;
      out += scalar_text(item);
    }
    out += ']';
  } else {
    out += scalar_text(node);
  }
  out += '\n';
}

}  // namespace

ReportFormat parse_report_format(const std::string& name) {
  if (name == "text") return ReportFormat::text;
  if (name == "json") return ReportFormat::json;
  throw Error(ErrorCode::IndexOutOfRange, "unknown report format '" + name + "'");
}

std::string format_double(double value) {
  std::array<char, 32> buf;
  const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), result.ptr);
}

nlohmann::ordered_json vec_json(const Vec3& v) {
  return nlohmann::ordered_json::array({v.x, v.y, v.z});
}

Report::Report(const std::string& command) {
  root_["command"] = command;
  root_["inputs"] = nlohmann::ordered_json::object();
  root_["results"] = nlohmann::ordered_json::object();
}

void Report::finalize(double seconds) {
  root_["versions"]["jointmeas"] = kVersion;
  root_["timing"]["seconds"] = seconds;
}

std::string Report::render(ReportFormat format) const {
  if (format == ReportFormat::json) return root_.dump(2) + "\n";
  std::string out;
  flatten(root_, "", out);
  return out;
}

void Report::write_to(std::ostream& os, ReportFormat format) const { os << render(format); }

}  // namespace jointmeas
