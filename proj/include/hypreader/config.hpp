#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "hypreader/common.hpp"

namespace hypreader {

// TOML-style key/value configuration: `key = value` lines, `#` comments,
// optional [section] headers (flattened as "section.key"), quoted or bare
// values.
class Config {
 public:
  static Config parse(const std::string& text) {
    Config cfg;
    std::string section;
    std::size_t line_no = 0;
    for (const auto& raw : split_lines(text)) {
      ++line_no;
      std::string line = raw;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[' && line.back() == ']') {
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw Error("BadConfig",
                    "line " + std::to_string(line_no) + ": expected key = value");
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (value.size() >= 2 &&
          ((value.front() == '"' && value.back() == '"') ||
           (value.front() == '\'' && value.back() == '\'')))
        value = value.substr(1, value.size() - 2);
      if (key.empty())
        throw Error("BadConfig", "line " + std::to_string(line_no) + ": empty key");
      if (!section.empty()) key = section + "." + key;
      cfg.values_[key] = value;
    }
    return cfg;
  }

  static Config load(const std::string& path) { return parse(read_file(path)); }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& dflt) const {
    const auto it = values_.find(key);
    return it == values_.end() ? dflt : it->second;
  }

  double get_double(const std::string& key, double dflt) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    try {
      return std::stod(it->second);
    } catch (const std::exception&) {
      throw Error("BadConfig", key + ": not a number: " + it->second);
    }
  }

  int get_int(const std::string& key, int dflt) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    try {
      return std::stoi(it->second);
    } catch (const std::exception&) {
      throw Error("BadConfig", key + ": not an integer: " + it->second);
    }
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    try {
      return std::stoull(it->second);
    } catch (const std::exception&) {
      throw Error("BadConfig", key + ": not an integer: " + it->second);
    }
  }

  bool get_bool(const std::string& key, bool dflt) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    const auto v = to_lower_ascii(it->second);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw Error("BadConfig", key + ": not a boolean: " + it->second);
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace hypreader
