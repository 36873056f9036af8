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

#include <sstream>
#include <string>

#include "test_util.hpp"
#include "wmlab/records.hpp"

namespace wmlab {
namespace {

TEST(Records, JsonRoundTrip) {
  const TokenRecord r{"m0-3", "m0", {2, 3, 4}, {5, 6, 7, 8}};
  const auto back = record_from_json(record_to_json(r));
  EXPECT_EQ(back.id, r.id);
  EXPECT_EQ(back.model, r.model);
  EXPECT_EQ(back.prompt, r.prompt);
  EXPECT_EQ(back.tokens, r.tokens);
}

TEST(Records, TextFieldIsWrittenButIgnoredOnInput) {
  const auto vocab = testing::vocab_of({"call", "me", "ishmael"});
  const TokenRecord r{"x", "m1", {}, testing::ids_of(*vocab, "call me ishmael")};
  auto j = record_to_json(r, vocab.get());
  EXPECT_EQ(j["text"].get<std::string>(), decode(*vocab, r.tokens));
  j["text"] = "something unrelated";
  EXPECT_EQ(record_from_json(j).tokens, r.tokens);
}

TEST(Records, StreamRoundTripSkipsBlankLines) {
  const std::vector<TokenRecord> recs = {{"a", "m0", {2}, {3, 4}}, {"b", "m1", {}, {5}}};
  std::stringstream buf;
  write_records(buf, recs);
  std::stringstream padded("\n" + buf.str() + "   \n");
  const auto back = read_records(padded, "mem");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].tokens, recs[0].tokens);
  EXPECT_EQ(back[1].id, "b");
  EXPECT_TRUE(back[1].prompt.empty());
}

TEST(Records, BadLinesReportTheirPosition) {
  std::stringstream in("{\"tokens\": [2]}\n{\"id\": \"no tokens\"}\n");
  try {
    (void)read_records(in, "input.jsonl");
    ADD_FAILURE() << "expected a parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
    EXPECT_NE(std::string(e.what()).find("input.jsonl:2"), std::string::npos) << e.what();
  }
  std::stringstream garbage("not json\n");
  EXPECT_WMLAB_ERROR(read_records(garbage, "g"), ErrorCode::kParse);
  EXPECT_WMLAB_ERROR(read_records_file("/nonexistent/records.jsonl"), ErrorCode::kMissingFile);
}

TEST(Records, DetectionFieldsAreStable) {
  DetectionResult d;
  d.statistic = 5.5;
  d.p_value = 1e-8;
  d.threshold = 4.0;
  d.is_watermarked = true;
  d.tokens_scored = 199;
  d.scheme = "KGW";
  const auto j = detection_to_json("t1", d);
  EXPECT_EQ(j["id"], "t1");
  EXPECT_EQ(j["scheme"], "KGW");
  EXPECT_DOUBLE_EQ(j["statistic"].get<double>(), 5.5);
  EXPECT_DOUBLE_EQ(j["p_value"].get<double>(), 1e-8);
  EXPECT_EQ(j["verdict"], "watermarked");
  EXPECT_EQ(j["tokens_scored"], 199);
  d.is_watermarked = false;
  EXPECT_EQ(detection_to_json("t1", d)["verdict"], "clean");
}

TEST(Records, VerdictFields) {
  const ModelVerdict v{40, 12, 0.3, true, 0.25};
  const auto j = verdict_to_json(v);
  EXPECT_EQ(j["outputs_tested"], 40);
  EXPECT_EQ(j["outputs_flagged"], 12);
  EXPECT_DOUBLE_EQ(j["flag_rate"].get<double>(), 0.3);
  EXPECT_EQ(j["model_flagged"], true);
  EXPECT_DOUBLE_EQ(j["flag_rate_threshold"].get<double>(), 0.25);
}

}  // namespace
}  // namespace wmlab
