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

// Line-delimited token records exchanged by the generate, detect and attack
// commands, one JSON object per line:
//   {"id":"m0-3","model":"m0","prompt":[...],"tokens":[...]}
// "text" (decoded tokens) is written for humans and ignored on input.

#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wmlab/common.hpp"
#include "wmlab/detector.hpp"
#include "wmlab/text.hpp"

namespace wmlab {

struct TokenRecord {
  std::string id;
  std::string model;
  std::vector<TokenId> prompt;
  std::vector<TokenId> tokens;
};

inline nlohmann::json record_to_json(const TokenRecord& r, const Vocabulary* vocab = nullptr) {
  nlohmann::json j{{"id", r.id}, {"model", r.model}, {"prompt", r.prompt}, {"tokens", r.tokens}};
  if (vocab) j["text"] = decode(*vocab, r.tokens);
  return j;
}

inline TokenRecord record_from_json(const nlohmann::json& j) {
  TokenRecord r;
  r.id = j.value("id", std::string());
  r.model = j.value("model", std::string());
  if (j.contains("prompt")) r.prompt = j.at("prompt").get<std::vector<TokenId>>();
  r.tokens = j.at("tokens").get<std::vector<TokenId>>();
  return r;
}

// Blank lines are skipped; anything else must be a record.
inline std::vector<TokenRecord> read_records(std::istream& in, const std::string& name) {
  std::vector<TokenRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kParse, name + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<TokenRecord> read_records_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::kMissingFile, "cannot open '" + path + "'");
  return read_records(in, path);
}

inline void write_records(std::ostream& out, const std::vector<TokenRecord>& records,
                          const Vocabulary* vocab = nullptr) {
  for (const auto& r : records) out << record_to_json(r, vocab).dump() << '\n';
}

// Stable field names: statistic, p_value, verdict, scheme, tokens_scored.
inline nlohmann::json detection_to_json(const std::string& id, const DetectionResult& d) {
  return {{"id", id},
          {"scheme", d.scheme},
          {"statistic", d.statistic},
          {"p_value", d.p_value},
          {"threshold", d.threshold},
          {"verdict", d.is_watermarked ? "watermarked" : "clean"},
          {"tokens_scored", d.tokens_scored}};
}

inline nlohmann::json verdict_to_json(const ModelVerdict& v) {
  return {{"outputs_tested", v.outputs_tested},
          {"outputs_flagged", v.outputs_flagged},
          {"flag_rate", v.flag_rate},
          {"model_flagged", v.model_flagged},
          {"flag_rate_threshold", v.flag_rate_threshold}};
}

}  // namespace wmlab
