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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "test_util.hpp"
#include "wmlab/report.hpp"

namespace wmlab {
namespace {

using testing::TempDir;

CellRecord record(const std::string& scenario, std::uint64_t seed, double f1) {
  CellRecord r;
  r.key.scenario = scenario;
  r.key.seed = seed;
  r.key.param = 500;
  r.metrics = {{"macro_f1", f1}};
  r.wall_ms = 12;
  return r;
}

ExperimentReport sample_report() {
  ExperimentReport rep;
  rep.header = {{"report", std::string(kReportFormat)}, {"fingerprint", "00112233aabbccdd"}};
  rep.cells.push_back(record("A", 1, 0.75));
  CellRecord failed = record("B", 1, 0.0);
  failed.key.model = "m0";
  failed.key.scheme = "kgw";
  failed.ok = false;
  failed.error = "invalid-parameter: boom";
  failed.metrics = nlohmann::json::object();
  rep.cells.push_back(failed);
  return rep;
}

TEST(FormatPercent, OneDecimalWithSign) {
  EXPECT_EQ(format_percent(relative_change(3.35, 4.03)), "+20.3%");
  EXPECT_EQ(format_percent(relative_change(3.54, 4.43)), "+25.1%");
  EXPECT_EQ(format_percent(relative_change(3.55, 3.87)), "+9.0%");
  EXPECT_EQ(format_percent(relative_change(2.68, 3.37)), "+25.7%");
  EXPECT_EQ(format_percent(relative_change(4.0, 3.0)), "-25.0%");
  EXPECT_EQ(format_percent(relative_change(3.0, 3.0)), "+0.0%");
}

TEST(FormatPercent, HalvesRoundAwayFromZero) {
  EXPECT_EQ(format_percent(0.0025), "+0.3%");
  EXPECT_EQ(format_percent(-0.0025), "-0.3%");
  EXPECT_EQ(format_percent(0.00249), "+0.2%");
  EXPECT_EQ(format_percent(-0.0004), "+0.0%");
}

TEST(RelativeChange, NeedsPositiveBaseline) {
  EXPECT_DOUBLE_EQ(relative_change(2.0, 3.0), 0.5);
  EXPECT_WMLAB_ERROR(relative_change(0.0, 1.0), ErrorCode::kUndefinedBaseline);
  EXPECT_WMLAB_ERROR(relative_change(-1.0, 1.0), ErrorCode::kUndefinedBaseline);
}

TEST(CellKey, StringAndJsonRoundTrip) {
  CellKey k{"attack", "*", "kgw", "paraphrase", 3, 100};
  EXPECT_EQ(k.str(), "attack/*/kgw/paraphrase/3/100");
  EXPECT_EQ(CellKey::from_json(k.to_json()), k);
  CellKey defaults;
  defaults.scenario = "A";
  EXPECT_EQ(defaults.str(), "A/*/none/none/0/0");
}

TEST(Report, WriteReadRoundTrip) {
  TempDir dir;
  const auto rep = sample_report();
  const std::string path = report_path(dir.str());
  write_report(rep, path);
  EXPECT_FALSE(std::filesystem::exists(path + ".tmp"));
  const auto back = read_report(path);
  EXPECT_EQ(back.header, rep.header);
  EXPECT_EQ(back.fingerprint(), "00112233aabbccdd");
  ASSERT_EQ(back.cells.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back.cells[i].to_json(), rep.cells[i].to_json());
  }
  EXPECT_TRUE(back.cells[0].ok);
  EXPECT_FALSE(back.cells[1].ok);
  EXPECT_EQ(back.cells[1].error, "invalid-parameter: boom");
}

TEST(Report, FindOkSkipsFailedCells) {
  const auto rep = sample_report();
  EXPECT_NE(rep.find_ok(rep.cells[0].key), nullptr);
  EXPECT_NE(rep.find(rep.cells[1].key), nullptr);
  EXPECT_EQ(rep.find_ok(rep.cells[1].key), nullptr);
  EXPECT_EQ(rep.find(CellKey{"C"}), nullptr);
}

TEST(Report, AppendAddsOneLinePerRecord) {
  TempDir dir;
  const std::string path = report_path(dir.str());
  ExperimentReport rep;
  rep.header = {{"report", std::string(kReportFormat)}};
  write_report(rep, path);
  append_record(record("A", 1, 0.5), path);
  append_record(record("A", 2, 0.6), path);
  const auto back = read_report(path);
  ASSERT_EQ(back.cells.size(), 2u);
  EXPECT_EQ(back.cells[1].key.seed, 2u);
  EXPECT_DOUBLE_EQ(back.cells[1].metrics["macro_f1"].get<double>(), 0.6);
}

TEST(Report, TornTrailingLineIsIgnored) {
  TempDir dir;
  const std::string path = report_path(dir.str());
  write_report(sample_report(), path);
  const std::string full = record("A", 9, 0.1).to_json().dump();
  std::ofstream(path, std::ios::app) << full.substr(0, full.size() / 2);
  const auto back = read_report(path);
  EXPECT_EQ(back.cells.size(), 2u);
}

TEST(Report, MalformedMiddleLineIsAnError) {
  TempDir dir;
  const std::string path = report_path(dir.str());
  write_report(sample_report(), path);
  {
    std::ofstream out(path, std::ios::app);
    out << "{not json\n" << record("A", 3, 0.2).to_json().dump() << '\n';
  }
  EXPECT_WMLAB_ERROR(read_report(path), ErrorCode::kParse);
}

TEST(Report, HeaderAndFileChecks) {
  TempDir dir;
  EXPECT_WMLAB_ERROR(read_report(dir / "missing.jsonl"), ErrorCode::kMissingFile);
  std::ofstream(dir / "other.jsonl") << R"({"report": "something-else"})" << '\n';
  EXPECT_WMLAB_ERROR(read_report(dir / "other.jsonl"), ErrorCode::kParse);
  std::ofstream(dir / "empty.jsonl") << "";
  EXPECT_WMLAB_ERROR(read_report(dir / "empty.jsonl"), ErrorCode::kParse);
}

TEST(PerplexityTable, CellAndRender) {
  EXPECT_EQ(PerplexityTable::cell(4.03, relative_change(3.35, 4.03)), "4.03 (+20.3%)");
  PerplexityTable t;
  t.models = {"m0", "m1"};
  t.schemes = {"KGW"};
  t.baseline = {2.0, 4.0};
  t.watermarked = {{2.5, 4.0}};
  EXPECT_DOUBLE_EQ(t.baseline_average(), 3.0);
  EXPECT_DOUBLE_EQ(t.average(0), 3.25);
  EXPECT_DOUBLE_EQ(t.change(0, 0), 0.25);
  EXPECT_NEAR(t.average_change(0), 0.25 / 3.0, 1e-12);
  EXPECT_EQ(t.render(),
            "setting\tm0\tm1\taverage\n"
            "NW\t2.00\t4.00\t3.00\n"
            "KGW\t2.50 (+25.0%)\t4.00 (+0.0%)\t3.25 (+8.3%)\n");
}

}  // namespace
}  // namespace wmlab
