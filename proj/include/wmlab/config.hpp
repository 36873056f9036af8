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

// Experiment configuration: a strict JSON schema. Unknown keys are errors,
// absent keys take the defaults below, and every range check names the
// offending field. See docs/config.md for the schema.

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wmlab/attacks.hpp"
#include "wmlab/common.hpp"
#include "wmlab/corpus.hpp"
#include "wmlab/random.hpp"
#include "wmlab/scenario.hpp"
#include "wmlab/watermark.hpp"

namespace wmlab {

using Json = nlohmann::json;

// Environment variable that overrides the configured watermark secret.
inline constexpr const char* kSecretEnvVar = "WMLAB_SECRET";

struct NamedAttack {
  std::string name;
  AttackConfig config;
};

struct StealingSection {
  bool enabled = true;
  std::string victim;  // empty: first model
  std::vector<std::size_t> queries = {50, 200, 1000};
  std::vector<std::uint64_t> seeds;  // empty: the experiment seeds
  std::vector<std::string> schemes;  // empty: every registered scheme
  std::size_t probes = 50;
  std::size_t completion_length = 200;
  int surrogate_order = 2;
  double surrogate_smoothing = 0.01;
  // Replaces the bias strength of logit-bias schemes on the victim.
  std::optional<double> delta = 4.0;
};

struct ExperimentConfig {
  std::vector<std::string> corpus_paths;
  LabOptions lab;
  std::vector<ModelSpec> models;
  std::vector<NamedScheme> schemes;
  std::vector<NamedAttack> attacks;
  std::vector<Scenario> scenarios = {Scenario::kA, Scenario::kB, Scenario::kC};
  BankOptions bank;  // bank.secret is set from `secret`
  DetectorOptions detector;
  double flag_rate_threshold = kDefaultFlagRateThreshold;
  std::size_t attack_texts = 100;
  std::vector<std::size_t> learning_curve = {50, 100, 250, 500};
  StealingSection stealing;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::uint64_t secret = 0;
  std::string output_dir = "out";

  bool has_scenario(Scenario s) const {
    return std::find(scenarios.begin(), scenarios.end(), s) != scenarios.end();
  }
  std::vector<std::string> model_ids() const {
    std::vector<std::string> ids;
    for (const auto& m : models) ids.push_back(m.id);
    return ids;
  }
  std::vector<std::uint64_t> stealing_seeds() const {
    return stealing.seeds.empty() ? seeds : stealing.seeds;
  }
  std::vector<std::string> stealing_schemes() const {
    if (!stealing.schemes.empty()) return stealing.schemes;
    std::vector<std::string> names;
    for (const auto& s : schemes) names.push_back(s.name);
    return names;
  }
  std::string stealing_victim() const {
    return stealing.victim.empty() && !models.empty() ? models.front().id : stealing.victim;
  }
};

namespace config_detail {

inline std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

// Closest allowed key, if one is near enough to be a plausible typo.
inline std::optional<std::string> nearest_key(std::string_view key,
                                              const std::vector<std::string>& allowed) {
  std::optional<std::string> best;
  std::size_t best_d = std::numeric_limits<std::size_t>::max();
  for (const auto& a : allowed) {
    const std::size_t d = edit_distance(key, a);
    if (d < best_d) {
      best_d = d;
      best = a;
    }
  }
  if (!best || best_d > std::max<std::size_t>(2, key.size() / 3)) return std::nullopt;
  return best;
}

// Reads fields of one JSON object, recording which keys were consumed so the
// rest can be rejected.
class ObjectReader {
 public:
  ObjectReader(const Json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    require(obj_.is_object(), ErrorCode::kParse, where() + " must be an object");
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  std::string where() const { return path_.empty() ? "config root" : "'" + path_ + "'"; }

  const Json* get(const std::string& key) {
    allowed_.push_back(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    const Json* v = get(key);
    if (!v) return;
    try {
      if constexpr (std::is_same_v<T, double>) {
        require(v->is_number(), ErrorCode::kParse, "'" + field(key) + "' must be a number");
      } else if constexpr (std::is_same_v<T, bool>) {
        require(v->is_boolean(), ErrorCode::kParse, "'" + field(key) + "' must be a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        require(v->is_number_integer(), ErrorCode::kParse,
                "'" + field(key) + "' must be an integer");
        if constexpr (std::is_unsigned_v<T>) {
          require(v->is_number_unsigned() || v->get<std::int64_t>() >= 0, ErrorCode::kInvalidParameter,
                  "'" + field(key) + "' must be non-negative");
        }
      } else if constexpr (std::is_same_v<T, std::string>) {
        require(v->is_string(), ErrorCode::kParse, "'" + field(key) + "' must be a string");
      }
      out = v->get<T>();
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kParse, "'" + field(key) + "': " + e.what());
    }
  }

  // Rejects keys that were never asked for.
  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (std::find(allowed_.begin(), allowed_.end(), it.key()) != allowed_.end()) continue;
      std::string msg = "unknown key '" + field(it.key()) + "'";
      if (auto s = nearest_key(it.key(), allowed_)) msg += "; did you mean '" + *s + "'?";
      fail(ErrorCode::kParse, msg);
    }
  }

 private:
  const Json& obj_;
  std::string path_;
  std::vector<std::string> allowed_;
};

inline void check(bool ok, const std::string& field, const std::string& what) {
  require(ok, ErrorCode::kInvalidParameter, "'" + field + "' " + what);
}

inline std::string indexed(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

inline const Json& array_at(const Json* v, const std::string& field) {
  require(v->is_array(), ErrorCode::kParse, "'" + field + "' must be an array");
  return *v;
}

inline SchemeConfig read_scheme(ObjectReader& r, const std::string& kind_name) {
  SchemeConfig cfg;
  cfg.kind = parse_scheme_kind(kind_name);
  switch (cfg.kind) {
    case SchemeKind::kKgw: cfg = SchemeConfig::kgw({}); break;
    case SchemeKind::kUnigram: cfg = SchemeConfig::unigram({}); break;
    case SchemeKind::kSirLite: cfg = SchemeConfig::sirlite({}); break;
    case SchemeKind::kExp: cfg = SchemeConfig::exp({}); break;
  }
  if (cfg.kind != SchemeKind::kExp) {
    if (cfg.kind != SchemeKind::kSirLite) r.read("gamma", cfg.gamma);
    r.read("delta", cfg.delta);
    check(cfg.gamma > 0.0 && cfg.gamma < 1.0, r.field("gamma"),
          "must be in (0, 1), got " + std::to_string(cfg.gamma));
    check(cfg.delta >= 0.0 && std::isfinite(cfg.delta), r.field("delta"), "must be >= 0");
  }
  if (cfg.kind == SchemeKind::kKgw || cfg.kind == SchemeKind::kSirLite) {
    r.read("context_width", cfg.context_width);
    check(cfg.context_width >= 1 && cfg.context_width <= 8, r.field("context_width"),
          "must be in [1, 8]");
  }
  if (cfg.kind == SchemeKind::kSirLite) {
    r.read("num_synonym_classes", cfg.num_synonym_classes);
    check(cfg.num_synonym_classes == 0 || cfg.num_synonym_classes >= 2,
          r.field("num_synonym_classes"), "must be 0 (shared table) or >= 2");
  }
  if (cfg.kind == SchemeKind::kExp) {
    r.read("key_length", cfg.exp_key_length);
    r.read("random_shift", cfg.exp_random_shift);
    check(cfg.exp_key_length >= 1 && cfg.exp_key_length <= 4096, r.field("key_length"),
          "must be in [1, 4096]");
  }
  return cfg;
}

inline AttackConfig read_attack(ObjectReader& r, const std::string& kind_name) {
  AttackConfig cfg;
  cfg.kind = parse_attack_kind(kind_name);
  switch (cfg.kind) {
    case AttackKind::kSubstitution:
      cfg = AttackConfig::substitution();
      r.read("edit_rate", cfg.edit_rate);
      check(cfg.edit_rate >= 0.0 && cfg.edit_rate <= 1.0, r.field("edit_rate"), "must be in [0, 1]");
      break;
    case AttackKind::kParaphrase:
      cfg = AttackConfig::paraphrase();
      r.read("edit_rate", cfg.edit_rate);
      r.read("window", cfg.window);
      check(cfg.edit_rate >= 0.0 && cfg.edit_rate <= 1.0, r.field("edit_rate"), "must be in [0, 1]");
      check(cfg.window >= 2, r.field("window"), "must be >= 2");
      break;
    case AttackKind::kRemoval:
      cfg = AttackConfig::removal();
      r.read("perplexity_budget", cfg.perplexity_budget);
      check(cfg.perplexity_budget >= 1.0, r.field("perplexity_budget"), "must be >= 1");
      break;
  }
  return cfg;
}

template <typename T>
std::vector<T> read_number_list(const Json* v, const std::string& field) {
  std::vector<T> out;
  for (const auto& e : array_at(v, field)) {
    require(e.is_number_integer() && (e.is_number_unsigned() || e.get<std::int64_t>() >= 0),
            ErrorCode::kParse, "'" + field + "' entries must be non-negative integers");
    out.push_back(e.get<T>());
  }
  return out;
}

inline std::vector<std::string> read_string_list(const Json* v, const std::string& field) {
  std::vector<std::string> out;
  for (const auto& e : array_at(v, field)) {
    require(e.is_string(), ErrorCode::kParse, "'" + field + "' entries must be strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

template <typename Named>
void check_unique_names(const std::vector<Named>& items, const std::string& field) {
  std::set<std::string> seen;
  for (const auto& it : items) {
    check(!it.name.empty(), field, "entries need a non-empty name");
    check(seen.insert(it.name).second, field, "has duplicate name '" + it.name + "'");
  }
}

inline std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
}

}  // namespace config_detail

inline std::vector<NamedScheme> default_schemes() {
  return {{"kgw", SchemeConfig::kgw({})},
          {"unigram", SchemeConfig::unigram({})},
          {"sirlite", SchemeConfig::sirlite({})},
          {"exp", SchemeConfig::exp({})}};
}

inline std::vector<NamedAttack> default_attacks() {
  return {{"substitution", AttackConfig::substitution()},
          {"paraphrase", AttackConfig::paraphrase()},
          {"removal", AttackConfig::removal()}};
}

inline std::vector<ModelSpec> default_models() {
  return {{"m0", 2, 0.01}, {"m1", 3, 0.05}, {"m2", 3, 0.1}, {"m3", 4, 0.5}};
}

// Parses and validates a config document. Relative corpus and output paths resolve
// against `base_dir`.
inline ExperimentConfig parse_config(std::string_view text, const std::string& base_dir = ".") {
  using namespace config_detail;
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::kParse, "line " + std::to_string(line_of_offset(text, e.byte)) + ": " +
                                e.what());
  }
  ExperimentConfig cfg;
  cfg.models = default_models();
  cfg.schemes = default_schemes();
  cfg.attacks = default_attacks();

  ObjectReader r(root, "");
  if (const Json* corpus = r.get("corpus")) {
    ObjectReader c(*corpus, "corpus");
    if (const Json* paths = c.get("paths")) cfg.corpus_paths = read_string_list(paths, "corpus.paths");
    c.read("vocab_cap", cfg.lab.vocab_cap);
    c.read("synonym_bucket", cfg.lab.synonym_bucket);
    c.read("evaluator_order", cfg.lab.evaluator_order);
    c.read("evaluator_smoothing", cfg.lab.evaluator_smoothing);
    c.finish();
  }
  check(!cfg.corpus_paths.empty(), "corpus.paths", "must list at least one file");
  for (auto& p : cfg.corpus_paths) {
    std::filesystem::path path(p);
    if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
    p = path.lexically_normal().string();
    require(std::filesystem::is_regular_file(p), ErrorCode::kMissingFile,
            "corpus file '" + p + "' does not exist");
  }
  check(cfg.lab.vocab_cap >= 16 && cfg.lab.vocab_cap <= kMaxVocab, "corpus.vocab_cap",
        "must be in [16, 65536]");
  check(cfg.lab.synonym_bucket >= 2, "corpus.synonym_bucket", "must be >= 2");
  check(cfg.lab.evaluator_order >= 1 && cfg.lab.evaluator_order <= kMaxOrder,
        "corpus.evaluator_order", "must be in [1, 5]");
  check(cfg.lab.evaluator_smoothing > 0.0, "corpus.evaluator_smoothing", "must be positive");

  if (const Json* models = r.get("models")) {
    cfg.models.clear();
    const auto& arr = array_at(models, "models");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string f = indexed("models", i);
      ObjectReader m(arr[i], f);
      ModelSpec spec;
      m.read("id", spec.id);
      m.read("order", spec.order);
      m.read("smoothing", spec.smoothing);
      m.finish();
      check(!spec.id.empty(), f + ".id", "must be non-empty");
      check(spec.order >= 1 && spec.order <= kMaxOrder, f + ".order", "must be in [1, 5]");
      check(spec.smoothing > 0.0, f + ".smoothing", "must be positive");
      cfg.models.push_back(spec);
    }
  }
  check(cfg.models.size() >= 2, "models", "must list at least two models");
  {
    std::set<std::string> ids;
    for (const auto& m : cfg.models) check(ids.insert(m.id).second, "models", "has duplicate id '" + m.id + "'");
  }

  if (const Json* schemes = r.get("schemes")) {
    cfg.schemes.clear();
    const auto& arr = array_at(schemes, "schemes");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string f = indexed("schemes", i);
      ObjectReader s(arr[i], f);
      NamedScheme ns;
      std::string kind;
      s.read("name", ns.name);
      s.read("kind", kind);
      check(!kind.empty(), f + ".kind", "is required");
      ns.config = read_scheme(s, kind);
      s.finish();
      if (ns.name.empty()) ns.name = kind;
      cfg.schemes.push_back(ns);
    }
  }
  check_unique_names(cfg.schemes, "schemes");

  if (const Json* attacks = r.get("attacks")) {
    cfg.attacks.clear();
    const auto& arr = array_at(attacks, "attacks");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string f = indexed("attacks", i);
      ObjectReader a(arr[i], f);
      NamedAttack na;
      std::string kind;
      a.read("name", na.name);
      a.read("kind", kind);
      check(!kind.empty(), f + ".kind", "is required");
      na.config = read_attack(a, kind);
      a.finish();
      if (na.name.empty()) na.name = kind;
      cfg.attacks.push_back(na);
    }
  }
  check_unique_names(cfg.attacks, "attacks");

  if (const Json* scenarios = r.get("scenarios")) {
    cfg.scenarios.clear();
    for (const auto& s : read_string_list(scenarios, "scenarios")) {
      const Scenario sc = parse_scenario(s);
      check(!cfg.has_scenario(sc), "scenarios", "lists '" + s + "' twice");
      cfg.scenarios.push_back(sc);
    }
  }
  if (cfg.has_scenario(Scenario::kB) || cfg.has_scenario(Scenario::kC)) {
    check(cfg.has_scenario(Scenario::kA), "scenarios",
          "must include A whenever B or C is run (F1 change baseline)");
  }

  if (const Json* ds = r.get("dataset")) {
    ObjectReader d(*ds, "dataset");
    d.read("train_per_class", cfg.bank.train_per_class);
    d.read("test_per_class", cfg.bank.test_per_class);
    d.read("prompt_length", cfg.lab.prompt_length);
    d.read("completion_length", cfg.bank.completion_length);
    d.read("histogram_size", cfg.bank.histogram_size);
    d.read("scheme_features", cfg.bank.scheme_features);
    d.finish();
  }
  check(cfg.bank.train_per_class >= 10, "dataset.train_per_class", "must be >= 10");
  check(cfg.bank.test_per_class >= 1, "dataset.test_per_class", "must be >= 1");
  check(cfg.lab.prompt_length >= 1, "dataset.prompt_length", "must be >= 1");
  check(cfg.bank.completion_length >= 8, "dataset.completion_length", "must be >= 8");

  if (const Json* cl = r.get("classifier")) {
    ObjectReader c(*cl, "classifier");
    c.read("epochs", cfg.bank.train.epochs);
    c.read("learning_rate", cfg.bank.train.learning_rate);
    c.read("l2", cfg.bank.train.l2);
    c.finish();
  }
  check(cfg.bank.train.epochs >= 1, "classifier.epochs", "must be >= 1");
  check(cfg.bank.train.learning_rate > 0.0, "classifier.learning_rate", "must be positive");
  check(cfg.bank.train.l2 >= 0.0, "classifier.l2", "must be >= 0");

  if (const Json* det = r.get("detector")) {
    ObjectReader d(*det, "detector");
    d.read("z_threshold", cfg.detector.z_threshold);
    d.read("alpha", cfg.detector.alignment.alpha);
    d.read("permutations", cfg.detector.num_permutations);
    d.read("band", cfg.detector.alignment.band);
    d.read("flag_rate_threshold", cfg.flag_rate_threshold);
    d.finish();
  }
  check(cfg.detector.z_threshold > 0.0, "detector.z_threshold", "must be positive");
  check(cfg.detector.alignment.alpha > 0.0 && cfg.detector.alignment.alpha < 1.0, "detector.alpha",
        "must be in (0, 1)");
  check(cfg.detector.num_permutations >= 20, "detector.permutations", "must be >= 20");
  check(cfg.flag_rate_threshold > 0.0 && cfg.flag_rate_threshold <= 1.0,
        "detector.flag_rate_threshold", "must be in (0, 1]");

  r.read("attack_texts", cfg.attack_texts);
  check(cfg.attack_texts >= 1, "attack_texts", "must be >= 1");
  check(cfg.attack_texts <= cfg.bank.test_per_class * cfg.models.size(), "attack_texts",
        "exceeds the number of test texts");

  if (const Json* lc = r.get("learning_curve")) {
    cfg.learning_curve = read_number_list<std::size_t>(lc, "learning_curve");
  }
  for (std::size_t n : cfg.learning_curve) {
    check(n >= 10 && n <= cfg.bank.train_per_class, "learning_curve",
          "sizes must be in [10, dataset.train_per_class]");
  }
  check(std::is_sorted(cfg.learning_curve.begin(), cfg.learning_curve.end()) &&
            std::adjacent_find(cfg.learning_curve.begin(), cfg.learning_curve.end()) ==
                cfg.learning_curve.end(),
        "learning_curve", "must be strictly increasing");

  if (const Json* st = r.get("stealing")) {
    ObjectReader s(*st, "stealing");
    s.read("enabled", cfg.stealing.enabled);
    s.read("victim", cfg.stealing.victim);
    if (const Json* q = s.get("queries")) cfg.stealing.queries = read_number_list<std::size_t>(q, "stealing.queries");
    if (const Json* sd = s.get("seeds")) cfg.stealing.seeds = read_number_list<std::uint64_t>(sd, "stealing.seeds");
    if (const Json* sc = s.get("schemes")) cfg.stealing.schemes = read_string_list(sc, "stealing.schemes");
    s.read("probes", cfg.stealing.probes);
    s.read("completion_length", cfg.stealing.completion_length);
    s.read("surrogate_order", cfg.stealing.surrogate_order);
    s.read("surrogate_smoothing", cfg.stealing.surrogate_smoothing);
    if (const Json* d = s.get("delta")) {
      if (d->is_null()) {
        cfg.stealing.delta.reset();
      } else {
        double v = 0.0;
        s.read("delta", v);
        cfg.stealing.delta = v;
      }
    }
    s.finish();
  }
  if (cfg.stealing.enabled) {
    const auto ids = cfg.model_ids();
    check(std::find(ids.begin(), ids.end(), cfg.stealing_victim()) != ids.end(), "stealing.victim",
          "names an unknown model");
    check(!cfg.stealing.queries.empty(), "stealing.queries", "must be non-empty");
    for (std::size_t q : cfg.stealing.queries) check(q >= 1, "stealing.queries", "entries must be >= 1");
    check(std::is_sorted(cfg.stealing.queries.begin(), cfg.stealing.queries.end()),
          "stealing.queries", "must be increasing");
    for (const auto& name : cfg.stealing.schemes) {
      check(std::any_of(cfg.schemes.begin(), cfg.schemes.end(),
                        [&](const NamedScheme& s) { return s.name == name; }),
            "stealing.schemes", "names unknown scheme '" + name + "'");
    }
    check(cfg.stealing.probes >= 10, "stealing.probes", "must be >= 10");
    check(cfg.stealing.completion_length >= 8, "stealing.completion_length", "must be >= 8");
    check(cfg.stealing.surrogate_order >= 1 && cfg.stealing.surrogate_order <= kMaxOrder,
          "stealing.surrogate_order", "must be in [1, 5]");
    check(cfg.stealing.surrogate_smoothing > 0.0, "stealing.surrogate_smoothing",
          "must be positive");
    check(!cfg.stealing.delta || (*cfg.stealing.delta > 0.0 && *cfg.stealing.delta <= 20.0),
          "stealing.delta", "must be in (0, 20] or null");
  }

  if (const Json* seeds = r.get("seeds")) cfg.seeds = read_number_list<std::uint64_t>(seeds, "seeds");
  check(!cfg.seeds.empty(), "seeds", "must be non-empty");
  {
    std::set<std::uint64_t> uniq(cfg.seeds.begin(), cfg.seeds.end());
    check(uniq.size() == cfg.seeds.size(), "seeds", "must be distinct");
  }
  r.read("secret", cfg.secret);
  r.read("output_dir", cfg.output_dir);
  r.finish();
  check(!cfg.output_dir.empty(), "output_dir", "must be non-empty");
  if (std::filesystem::path(cfg.output_dir).is_relative()) {
    cfg.output_dir = (std::filesystem::path(base_dir) / cfg.output_dir).lexically_normal().string();
  }

  if (const char* env = std::getenv(kSecretEnvVar); env && *env) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 0);
    require(end && *end == '\0', ErrorCode::kInvalidParameter,
            std::string(kSecretEnvVar) + " must be an unsigned integer");
    cfg.secret = v;
  }
  cfg.bank.secret = cfg.secret;

  // Registries are canonicalized so listing order never matters: shards are
  // assigned to models in id order, and cells are enumerated in name order.
  std::sort(cfg.models.begin(), cfg.models.end(),
            [](const ModelSpec& a, const ModelSpec& b) { return a.id < b.id; });
  const auto by_name = [](const auto& a, const auto& b) { return a.name < b.name; };
  std::sort(cfg.schemes.begin(), cfg.schemes.end(), by_name);
  std::sort(cfg.attacks.begin(), cfg.attacks.end(), by_name);
  std::sort(cfg.scenarios.begin(), cfg.scenarios.end());
  std::sort(cfg.stealing.schemes.begin(), cfg.stealing.schemes.end());
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  require(std::filesystem::is_regular_file(path), ErrorCode::kMissingFile,
          "config file '" + path + "' does not exist");
  const std::string text = read_text_file(path);
  const auto dir = std::filesystem::path(path).parent_path();
  try {
    return parse_config(text, dir.empty() ? "." : dir.string());
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + std::string(e.what()).substr(
                                            error_code_name(e.code()).size() + 2));
  }
}

inline Json scheme_to_json(const NamedScheme& s) {
  Json j{{"name", s.name}, {"kind", std::string(scheme_kind_name(s.config.kind))}};
  const SchemeConfig& c = s.config;
  if (c.kind != SchemeKind::kExp) {
    if (c.kind != SchemeKind::kSirLite) j["gamma"] = c.gamma;
    j["delta"] = c.delta;
  }
  if (c.kind == SchemeKind::kKgw || c.kind == SchemeKind::kSirLite) j["context_width"] = c.context_width;
  if (c.kind == SchemeKind::kSirLite) j["num_synonym_classes"] = c.num_synonym_classes;
  if (c.kind == SchemeKind::kExp) {
    j["key_length"] = c.exp_key_length;
    j["random_shift"] = c.exp_random_shift;
  }
  return j;
}

inline Json attack_to_json(const NamedAttack& a) {
  Json j{{"name", a.name}, {"kind", std::string(attack_kind_name(a.config.kind))}};
  switch (a.config.kind) {
    case AttackKind::kSubstitution: j["edit_rate"] = a.config.edit_rate; break;
    case AttackKind::kParaphrase:
      j["edit_rate"] = a.config.edit_rate;
      j["window"] = a.config.window;
      break;
    case AttackKind::kRemoval: j["perplexity_budget"] = a.config.perplexity_budget; break;
  }
  return j;
}

// Full config with defaults filled in. The secret is never echoed.
inline Json config_to_json(const ExperimentConfig& cfg) {
  Json j;
  j["corpus"] = {{"paths", cfg.corpus_paths},
                 {"vocab_cap", cfg.lab.vocab_cap},
                 {"synonym_bucket", cfg.lab.synonym_bucket},
                 {"evaluator_order", cfg.lab.evaluator_order},
                 {"evaluator_smoothing", cfg.lab.evaluator_smoothing}};
  j["models"] = Json::array();
  for (const auto& m : cfg.models) {
    j["models"].push_back({{"id", m.id}, {"order", m.order}, {"smoothing", m.smoothing}});
  }
  j["schemes"] = Json::array();
  for (const auto& s : cfg.schemes) j["schemes"].push_back(scheme_to_json(s));
  j["attacks"] = Json::array();
  for (const auto& a : cfg.attacks) j["attacks"].push_back(attack_to_json(a));
  j["scenarios"] = Json::array();
  for (Scenario s : cfg.scenarios) j["scenarios"].push_back(std::string(scenario_name(s)));
  j["dataset"] = {{"train_per_class", cfg.bank.train_per_class},
                  {"test_per_class", cfg.bank.test_per_class},
                  {"prompt_length", cfg.lab.prompt_length},
                  {"completion_length", cfg.bank.completion_length},
                  {"histogram_size", cfg.bank.histogram_size},
                  {"scheme_features", cfg.bank.scheme_features}};
  j["classifier"] = {{"epochs", cfg.bank.train.epochs},
                     {"learning_rate", cfg.bank.train.learning_rate},
                     {"l2", cfg.bank.train.l2}};
  j["detector"] = {{"z_threshold", cfg.detector.z_threshold},
                   {"alpha", cfg.detector.alignment.alpha},
                   {"permutations", cfg.detector.num_permutations},
                   {"band", cfg.detector.alignment.band},
                   {"flag_rate_threshold", cfg.flag_rate_threshold}};
  j["attack_texts"] = cfg.attack_texts;
  j["learning_curve"] = cfg.learning_curve;
  j["stealing"] = {{"enabled", cfg.stealing.enabled},
                   {"victim", cfg.stealing_victim()},
                   {"queries", cfg.stealing.queries},
                   {"seeds", cfg.stealing_seeds()},
                   {"schemes", cfg.stealing_schemes()},
                   {"probes", cfg.stealing.probes},
                   {"completion_length", cfg.stealing.completion_length},
                   {"surrogate_order", cfg.stealing.surrogate_order},
                   {"surrogate_smoothing", cfg.stealing.surrogate_smoothing},
                   {"delta", cfg.stealing.delta ? Json(*cfg.stealing.delta) : Json(nullptr)}};
  j["seeds"] = cfg.seeds;
  j["output_dir"] = cfg.output_dir;
  return j;
}

// Hash of the canonical config (registries sorted at parse time, object keys
// sorted by the serializer). The output directory and the secret are not
// part of it; corpus files enter by content.
inline std::string config_fingerprint(const ExperimentConfig& cfg) {
  Json j = config_to_json(cfg);
  j.erase("output_dir");
  // Corpus identity is its content, not where it lives.
  Json digests = Json::array();
  for (const auto& p : cfg.corpus_paths) digests.push_back(hash_string(read_text_file(p)));
  std::sort(digests.begin(), digests.end());
  j["corpus"]["paths"] = digests;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(hash_string(j.dump())));
  return buf;
}

}  // namespace wmlab
