/*
 * Copyright 2026 The wmlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Experiment report store: one JSON header line followed by one JSON line
// per cell, appended as cells complete.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "wmlab/common.hpp"
#include "wmlab/stats.hpp"

namespace wmlab {

inline constexpr std::string_view kReportFormat = "wmlab-report-1";
inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kWildcard = "*";
inline constexpr std::string_view kNone = "none";

// Cell kinds beyond the three attribution scenarios.
inline constexpr std::string_view kAttackCell = "attack";
inline constexpr std::string_view kStealCleanCell = "steal-clean";
inline constexpr std::string_view kStealWatermarkedCell = "steal-wm";

// `param` is the per-class training size for scenario cells, the number of
// attacked texts for attack cells, and the query count for stealing cells.
struct CellKey {
  std::string scenario;
  std::string model = std::string(kWildcard);
  std::string scheme = std::string(kNone);
  std::string attack = std::string(kNone);
  std::uint64_t seed = 0;
  std::uint64_t param = 0;

  std::string str() const {
    return scenario + "/" + model + "/" + scheme + "/" + attack + "/" + std::to_string(seed) +
           "/" + std::to_string(param);
  }

  nlohmann::json to_json() const {
    return {{"scenario", scenario}, {"model", model}, {"scheme", scheme},
            {"attack", attack},     {"seed", seed},   {"param", param}};
  }

  static CellKey from_json(const nlohmann::json& j) {
    CellKey k;
    k.scenario = j.at("scenario").get<std::string>();
    k.model = j.at("model").get<std::string>();
    k.scheme = j.at("scheme").get<std::string>();
    k.attack = j.at("attack").get<std::string>();
    k.seed = j.at("seed").get<std::uint64_t>();
    k.param = j.at("param").get<std::uint64_t>();
    return k;
  }

  auto tie() const { return std::tie(scenario, model, scheme, attack, seed, param); }
  bool operator==(const CellKey& o) const { return tie() == o.tie(); }
  bool operator<(const CellKey& o) const { return tie() < o.tie(); }
};

struct CellRecord {
  CellKey key;
  bool ok = true;
  std::string error;
  nlohmann::json metrics = nlohmann::json::object();
  std::int64_t wall_ms = 0;

  nlohmann::json to_json() const {
    nlohmann::json j{{"cell", key.to_json()}, {"status", ok ? "ok" : "failed"},
                     {"metrics", metrics}, {"wall_ms", wall_ms}};
    if (!ok) j["error"] = error;
    return j;
  }

  static CellRecord from_json(const nlohmann::json& j) {
    CellRecord r;
    r.key = CellKey::from_json(j.at("cell"));
    r.ok = j.at("status").get<std::string>() == "ok";
    if (j.contains("error")) r.error = j.at("error").get<std::string>();
    r.metrics = j.at("metrics");
    r.wall_ms = j.value("wall_ms", std::int64_t{0});
    return r;
  }
};

struct ExperimentReport {
  nlohmann::json header = nlohmann::json::object();
  std::vector<CellRecord> cells;

  std::string fingerprint() const { return header.value("fingerprint", std::string()); }

  const CellRecord* find(const CellKey& key) const {
    for (const auto& c : cells) {
      if (c.key == key) return &c;
    }
    return nullptr;
  }

  const CellRecord* find_ok(const CellKey& key) const {
    const CellRecord* c = find(key);
    return c && c->ok ? c : nullptr;
  }
};

inline std::string report_path(const std::string& out_dir) {
  return (std::filesystem::path(out_dir) / "report.jsonl").string();
}

// Reads a report. A torn trailing line (interrupted append) is ignored.
inline ExperimentReport read_report(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::kMissingFile, "cannot open report '" + path + "'");
  ExperimentReport report;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  for (const auto& l : lines) {
    ++lineno;
    if (l.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(l);
    } catch (const nlohmann::json::parse_error&) {
      require(lineno == lines.size(), ErrorCode::kParse,
              path + ":" + std::to_string(lineno) + ": malformed report line");
      continue;
    }
    if (lineno == 1) {
      require(j.value("report", std::string()) == kReportFormat, ErrorCode::kParse,
              path + ": not a wmlab report");
      report.header = std::move(j);
      continue;
    }
    try {
      report.cells.push_back(CellRecord::from_json(j));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kParse, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  require(!report.header.empty(), ErrorCode::kParse, path + ": missing report header");
  return report;
}

inline void write_report(const ExperimentReport& report, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::kIo, "cannot write '" + tmp + "'");
    out << report.header.dump() << '\n';
    for (const auto& c : report.cells) out << c.to_json().dump() << '\n';
    require(static_cast<bool>(out.flush()), ErrorCode::kIo, "write failed for '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

// Appends one record as a single write, flushed before returning.
inline void append_record(const CellRecord& record, const std::string& path) {
  std::ofstream out(path, std::ios::app);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot append to '" + path + "'");
  const std::string line = record.to_json().dump() + "\n";
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  require(static_cast<bool>(out.flush()), ErrorCode::kIo, "append failed for '" + path + "'");
}

// Percent with one decimal, halves rounded away from zero, explicit sign.
inline std::string format_percent(double fraction) {
  const double pct = fraction * 100.0;
  // The epsilon keeps values such as 0.25 printed as binary 0.2499... from
  // rounding down.
  const double rounded = std::copysign(std::floor(std::fabs(pct) * 10.0 + 0.5 + 1e-9) / 10.0, pct);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.1f%%", rounded == 0.0 ? 0.0 : rounded);
  return buf;
}

inline double relative_change(double baseline, double value) {
  require(baseline > 0.0, ErrorCode::kUndefinedBaseline,
          "relative change needs a positive baseline");
  return (value - baseline) / baseline;
}

// Mean perplexity per (scheme, model) next to the unwatermarked baseline.
struct PerplexityTable {
  std::vector<std::string> models;
  std::vector<std::string> schemes;
  std::vector<double> baseline;                 // [model]
  std::vector<std::vector<double>> watermarked;  // [scheme][model]

  double baseline_average() const { return mean_of(baseline); }
  double average(std::size_t scheme) const { return mean_of(watermarked.at(scheme)); }
  double change(std::size_t scheme, std::size_t model) const {
    return relative_change(baseline.at(model), watermarked.at(scheme).at(model));
  }
  double average_change(std::size_t scheme) const {
    return relative_change(baseline_average(), average(scheme));
  }

  // "4.03 (+20.3%)"
  static std::string cell(double value, double change) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", value);
    return std::string(buf) + " (" + format_percent(change) + ")";
  }

  std::string render() const {
    std::ostringstream out;
    out << "setting";
    for (const auto& m : models) out << '\t' << m;
    out << "\taverage\n";
    char buf[32];
    out << "NW";
    for (double b : baseline) {
      std::snprintf(buf, sizeof buf, "%.2f", b);
      out << '\t' << buf;
    }
    std::snprintf(buf, sizeof buf, "%.2f", baseline_average());
    out << '\t' << buf << '\n';
    for (std::size_t s = 0; s < schemes.size(); ++s) {
      out << schemes[s];
      for (std::size_t m = 0; m < models.size(); ++m) {
        out << '\t' << cell(watermarked[s][m], change(s, m));
      }
      out << '\t' << cell(average(s), average_change(s)) << '\n';
    }
    return out.str();
  }
};

}  // namespace wmlab
