#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "thermolux/cli.hpp"

namespace thermolux::cli {
namespace {

using nlohmann::json;

std::string format_number(const json& v) {
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  const double d = v.get<double>();
  if (!std::isfinite(d)) return "";  // JSON writes these as null
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void flatten(const std::string& name, const json& value, const std::string& unit,
             std::vector<std::pair<std::string, std::string>>& cells) {
  if (value.is_array()) {
    for (std::size_t i = 0; i < value.size(); ++i) flatten(name + "_" + std::to_string(i), value[i], unit, cells);
  } else if (value.is_object()) {
    for (const auto& [k, v] : value.items()) flatten(name + "_" + k, v, unit, cells);
  } else if (value.is_number()) {
    cells.emplace_back(name + "[" + unit + "]", format_number(value));
  } else if (value.is_boolean()) {
    cells.emplace_back(name + "[" + unit + "]", value.get<bool>() ? "true" : "false");
  } else if (value.is_string()) {
    cells.emplace_back(name + "[" + unit + "]", value.get<std::string>());
  } else {
    cells.emplace_back(name + "[" + unit + "]", "");
  }
}

}  // namespace

Envelope::Envelope(std::string command) {
  doc_["command"] = std::move(command);
  doc_["inputs"] = json::object();
  doc_["results"] = json::object();
  doc_["warnings"] = json::array();
  doc_["provenance"] = {
      {"formulas", json::array()},
      {"library_version", THERMOLUX_VERSION},
      {"notes", json::object()},
      {"tolerances", json::object()},
  };
}

void Envelope::input(const std::string& key, nlohmann::json value) { doc_["inputs"][key] = std::move(value); }

void Envelope::result(const std::string& key, nlohmann::json value, const std::string& unit) {
  doc_["results"][key] = {{"unit", unit}, {"value", std::move(value)}};
}

void Envelope::warn(std::string message) { doc_["warnings"].push_back(std::move(message)); }

void Envelope::formula(std::string label) { doc_["provenance"]["formulas"].push_back(std::move(label)); }

void Envelope::tolerance(const std::string& key, double value) { doc_["provenance"]["tolerances"][key] = value; }

void Envelope::note(const std::string& key, std::string text) { doc_["provenance"]["notes"][key] = std::move(text); }

std::string Envelope::to_json() const { return doc_.dump(2) + "\n"; }

std::string Envelope::to_csv() const {
  std::vector<std::pair<std::string, std::string>> cells;
  for (const auto& [key, entry] : doc_["results"].items()) {
    flatten(key, entry["value"], entry["unit"].get<std::string>(), cells);
  }
  std::string header;
  std::string row;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) {
      header += ',';
      row += ',';
    }
    header += csv_escape(cells[i].first);
    row += csv_escape(cells[i].second);
  }
  return header + "\r\n" + row + "\r\n";
}

}  // namespace thermolux::cli
