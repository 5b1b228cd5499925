#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace thermolux::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitDomain = 2,
  kExitUsage = 64,
  kExitNumerical = 70,
};

/// Machine-readable result of one command. Every result carries a unit;
/// JSON output has sorted keys, two-space indentation and LF line endings.
class Envelope {
 public:
  explicit Envelope(std::string command);

  void input(const std::string& key, nlohmann::json value);
  void result(const std::string& key, nlohmann::json value, const std::string& unit);
  void warn(std::string message);
  void formula(std::string label);
  void tolerance(const std::string& key, double value);
  void note(const std::string& key, std::string text);

  const nlohmann::json& json() const noexcept { return doc_; }

  std::string to_json() const;
  /// RFC 4180: one header row of `name[unit]` cells and one data row.
  /// Arrays and objects are flattened into `name_index` / `name_field`
  /// columns; numbers use 17 significant digits.
  std::string to_csv() const;

 private:
  nlohmann::json doc_;
};

/// Runs the command line `args` (without the program name). Output goes to
/// `out`, diagnostics to `err`; the return value is the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace thermolux::cli
