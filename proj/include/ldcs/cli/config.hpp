#pragma once

// Flat `key = value` configuration with '#' comments.  A run manifest
// (.json) is accepted too: its "parameters" object is read back verbatim.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace ldcs::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string trim(std::string s) {
  const auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

class ConfigMap {
 public:
  void set(const std::string& key, const std::string& value) { values_[trim(key)] = trim(value); }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  const std::map<std::string, std::string>& values() const { return values_; }

  void parse_text(std::istream& in, const std::string& origin = "config") {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos || trim(line.substr(0, eq)).empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
      set(line.substr(0, eq), line.substr(eq + 1));
    }
  }

  void parse_manifest(std::istream& in, const std::string& origin) {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      throw ConfigError(origin + ": " + e.what());
    }
    if (!j.contains("parameters") || !j["parameters"].is_object()) throw ConfigError(origin + ": no parameters object");
    for (const auto& [k, v] : j["parameters"].items()) set(k, v.is_string() ? v.get<std::string>() : v.dump());
  }

  void load_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config " + path);
    if (path.size() > 5 && path.substr(path.size() - 5) == ".json")
      parse_manifest(f, path);
    else
      parse_text(f, path);
  }

  std::string get_string(const std::string& key, const std::string& def) const {
    used_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? def : it->second;
  }

  double get_double(const std::string& key, double def) const {
    used_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? def : to_double(key, it->second);
  }

  int get_int(const std::string& key, int def) const {
    used_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return def;
    int v = 0;
    const auto& s = it->second;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw ConfigError(key + ": not an integer: " + s);
    return v;
  }

  bool get_bool(const std::string& key, bool def) const {
    used_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return def;
    const auto& s = it->second;
    if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
    if (s == "0" || s == "false" || s == "no" || s == "off") return false;
    throw ConfigError(key + ": not a boolean: " + s);
  }

  std::vector<double> get_list(const std::string& key, const std::vector<double>& def) const {
    used_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return def;
    std::string s = it->second;
    std::replace(s.begin(), s.end(), '[', ' ');
    std::replace(s.begin(), s.end(), ']', ' ');
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(to_double(key, item));
    }
    return out;
  }

  /// Keys present but never read: typos, or options of another subcommand.
  std::vector<std::string> unused() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
      if (!used_.count(k)) out.push_back(k);
    return out;
  }

 private:
  static double to_double(const std::string& key, const std::string& s) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (trim(s.substr(pos)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": not a number: " + s);
  }

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

}  // namespace ldcs::cli
