#pragma once

// CSV rows with 17 significant digits and LF endings, plus the
// <basename>.manifest.json sidecar.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"

namespace ldcs::cli {

inline constexpr const char* kEngineVersion = "1.0.0";
inline constexpr const char* kMissing = "nan";  // undefined value sentinel

inline std::string format_double(double v) {
  if (std::isnan(v)) return kMissing;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

class CsvWriter {
 public:
  /// "-" writes to stdout.
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : columns_(header.size()) {
    if (path == "-") {
      out_ = &std::cout;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw ConfigError("cannot write " + path);
      out_ = file_.get();
    }
    write_fields(header);
  }

  void row(const std::vector<double>& values) {
    std::vector<std::string> f;
    f.reserve(values.size());
    for (double v : values) f.push_back(format_double(v));
    write_fields(f);
  }

  void write_fields(const std::vector<std::string>& fields) {
    if (fields.size() != columns_) throw std::logic_error("csv: column count mismatch");
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) *out_ << ',';
      *out_ << fields[i];
    }
    *out_ << '\n';
    ++rows_;
  }

  void flush() { out_->flush(); }
  std::size_t data_rows() const { return rows_ - 1; }

 private:
  std::size_t columns_;
  std::size_t rows_ = 0;
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_ = nullptr;
};

inline std::string manifest_path(const std::string& csv_path) {
  const auto slash = csv_path.find_last_of('/');
  const auto dot = csv_path.find_last_of('.');
  const std::string stem = (dot != std::string::npos && (slash == std::string::npos || dot > slash))
                               ? csv_path.substr(0, dot)
                               : csv_path;
  return stem + ".manifest.json";
}

inline std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Sidecar manifest; parameters are stored as strings so the file can be fed
/// back through --config unchanged.
inline void write_manifest(const std::string& csv_path, const std::string& subcommand, const ConfigMap& params,
                           const nlohmann::json& diagnostics, bool deterministic) {
  if (csv_path == "-") return;
  nlohmann::json j;
  j["subcommand"] = subcommand;
  j["engine_version"] = kEngineVersion;
  j["timestamp"] = deterministic ? "" : utc_timestamp();
  j["csv"] = csv_path;
  j["missing_value"] = kMissing;
  nlohmann::json p = nlohmann::json::object();
  for (const auto& [k, v] : params.values()) p[k] = v;
  j["parameters"] = p;
  j["diagnostics"] = diagnostics;
  std::ofstream f(manifest_path(csv_path), std::ios::binary);
  if (!f) throw ConfigError("cannot write manifest for " + csv_path);
  f << j.dump(2) << '\n';
}

}  // namespace ldcs::cli
