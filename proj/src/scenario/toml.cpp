#include "evcoord/scenario/toml.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace evcoord::scenario {

namespace {

std::string trimmed(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& why) {
  throw std::runtime_error(origin + ":" + std::to_string(line) + ": " + why);
}

bool parse_number(const std::string& s, double& out) {
  try {
    size_t used = 0;
    out = std::stod(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

TomlTable TomlTable::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

TomlTable TomlTable::parse(const std::string& text, const std::string& origin) {
  TomlTable table;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trimmed(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(origin, lineno, "unterminated section header");
      section = trimmed(line.substr(1, line.size() - 2));
      if (section.empty()) fail(origin, lineno, "empty section name");
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) fail(origin, lineno, "expected key = value");
    const std::string key = trimmed(line.substr(0, eq));
    const std::string val = trimmed(line.substr(eq + 1));
    if (key.empty() || val.empty()) fail(origin, lineno, "empty key or value");
    const std::string full = section.empty() ? key : section + "." + key;

    if (val.front() == '"') {
      if (val.size() < 2 || val.back() != '"') fail(origin, lineno, "unterminated string");
      table.values_[full] = val.substr(1, val.size() - 2);
    } else if (val == "true" || val == "false") {
      table.values_[full] = (val == "true");
    } else if (val.front() == '[') {
      if (val.back() != ']') fail(origin, lineno, "unterminated array");
      std::vector<std::string> items;
      std::string cell;
      std::stringstream arr(val.substr(1, val.size() - 2));
      while (std::getline(arr, cell, ',')) {
        cell = trimmed(cell);
        if (!cell.empty()) items.push_back(cell);
      }
      if (!items.empty() && items.front().front() == '"') {
        std::vector<std::string> out;
        for (auto& it : items) {
          if (it.size() < 2 || it.front() != '"' || it.back() != '"')
            fail(origin, lineno, "bad string array element");
          out.push_back(it.substr(1, it.size() - 2));
        }
        table.values_[full] = std::move(out);
      } else {
        std::vector<double> out;
        for (const auto& it : items) {
          double v = 0.0;
          if (!parse_number(it, v)) fail(origin, lineno, "bad number '" + it + "' in array");
          out.push_back(v);
        }
        table.values_[full] = std::move(out);
      }
    } else {
      double v = 0.0;
      if (!parse_number(val, v)) fail(origin, lineno, "unrecognized value '" + val + "'");
      table.values_[full] = v;
    }
  }
  return table;
}

const TomlTable::Value* TomlTable::find(const std::string& key) const {
  const auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

bool TomlTable::has(const std::string& key) const { return find(key) != nullptr; }

double TomlTable::num(const std::string& key) const {
  const Value* v = find(key);
  if (!v || !std::holds_alternative<double>(*v))
    throw std::runtime_error("config: missing number '" + key + "'");
  return std::get<double>(*v);
}

double TomlTable::num_or(const std::string& key, double fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (!std::holds_alternative<double>(*v))
    throw std::runtime_error("config: '" + key + "' is not a number");
  return std::get<double>(*v);
}

bool TomlTable::boolean_or(const std::string& key, bool fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (!std::holds_alternative<bool>(*v))
    throw std::runtime_error("config: '" + key + "' is not a boolean");
  return std::get<bool>(*v);
}

std::string TomlTable::str(const std::string& key) const {
  const Value* v = find(key);
  if (!v || !std::holds_alternative<std::string>(*v))
    throw std::runtime_error("config: missing string '" + key + "'");
  return std::get<std::string>(*v);
}

std::string TomlTable::str_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? str(key) : fallback;
}

std::vector<double> TomlTable::num_array(const std::string& key) const {
  const Value* v = find(key);
  if (!v) throw std::runtime_error("config: missing array '" + key + "'");
  if (std::holds_alternative<std::vector<double>>(*v)) return std::get<std::vector<double>>(*v);
  if (std::holds_alternative<double>(*v)) return {std::get<double>(*v)};
  throw std::runtime_error("config: '" + key + "' is not a numeric array");
}

std::vector<std::string> TomlTable::str_array(const std::string& key) const {
  const Value* v = find(key);
  if (!v) throw std::runtime_error("config: missing array '" + key + "'");
  if (std::holds_alternative<std::vector<std::string>>(*v))
    return std::get<std::vector<std::string>>(*v);
  if (std::holds_alternative<std::string>(*v)) return {std::get<std::string>(*v)};
  throw std::runtime_error("config: '" + key + "' is not a string array");
}

std::vector<std::string> TomlTable::subtables(const std::string& prefix) const {
  const std::string pre = prefix.empty() ? "" : prefix + ".";
  std::set<std::string> names;
  for (const auto& [key, value] : values_) {
    (void)value;
    if (key.rfind(pre, 0) != 0) continue;
    const std::string rest = key.substr(pre.size());
    const size_t dot = rest.find('.');
    if (dot != std::string::npos) names.insert(rest.substr(0, dot));
  }
  return {names.begin(), names.end()};
}

}  // namespace evcoord::scenario
