#pragma once

#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace evcoord::scenario {

/// The slice of TOML the config files use: [section] / [a.b] headers,
/// key = value with strings, numbers, booleans, and flat arrays, and #
/// comments. Nothing else.
class TomlTable {
 public:
  using Value = std::variant<double, bool, std::string, std::vector<double>,
                             std::vector<std::string>>;

  static TomlTable parse_file(const std::string& path);
  static TomlTable parse(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& dotted_key) const;
  double num(const std::string& dotted_key) const;
  double num_or(const std::string& dotted_key, double fallback) const;
  bool boolean_or(const std::string& dotted_key, bool fallback) const;
  std::string str(const std::string& dotted_key) const;
  std::string str_or(const std::string& dotted_key, const std::string& fallback) const;
  std::vector<double> num_array(const std::string& dotted_key) const;
  std::vector<std::string> str_array(const std::string& dotted_key) const;

  /// Immediate child table names under a dotted prefix ("" for root).
  std::vector<std::string> subtables(const std::string& dotted_prefix) const;

 private:
  const Value* find(const std::string& dotted_key) const;
  std::map<std::string, Value> values_;  // keyed by full dotted path
};

}  // namespace evcoord::scenario
