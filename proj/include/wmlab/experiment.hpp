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

// End-to-end experiment runner.
//
// The configured cells are grouped into jobs: one per experiment seed (all
// attribution, attack and learning-curve cells of that seed, which share
// generated texts) and one per stealing seed. Jobs run on up to `workers`
// threads; their records are committed to the report in job order, so the
// report does not depend on the worker count.

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "wmlab/attacks.hpp"
#include "wmlab/classifier.hpp"
#include "wmlab/common.hpp"
#include "wmlab/config.hpp"
#include "wmlab/corpus.hpp"
#include "wmlab/detector.hpp"
#include "wmlab/report.hpp"
#include "wmlab/scenario.hpp"
#include "wmlab/stats.hpp"
#include "wmlab/stealing.hpp"

namespace wmlab {

struct ExperimentJob {
  bool stealing = false;
  std::uint64_t seed = 0;
  std::vector<CellKey> cells;
};

namespace experiment_detail {

inline std::vector<std::string> names_of(const Json& arr, const char* field) {
  std::vector<std::string> out;
  for (const auto& e : arr) out.push_back(e.at(field).get<std::string>());
  return out;
}

inline bool lists(const Json& arr, const std::string& v) {
  return std::find(arr.begin(), arr.end(), v) != arr.end();
}

}  // namespace experiment_detail

// Cell plan from a config echo (see config_to_json), so a stored report can
// be checked for completeness without the corpus at hand.
inline std::vector<ExperimentJob> plan_jobs(const Json& config) {
  using namespace experiment_detail;
  const auto models = names_of(config.at("models"), "id");
  const auto schemes = names_of(config.at("schemes"), "name");
  const auto attacks = names_of(config.at("attacks"), "name");
  const Json& scenarios = config.at("scenarios");
  const std::uint64_t train = config.at("dataset").at("train_per_class").get<std::uint64_t>();
  std::set<std::uint64_t> sizes;
  for (const auto& n : config.at("learning_curve")) sizes.insert(n.get<std::uint64_t>());
  sizes.insert(train);
  const std::uint64_t attack_texts = config.at("attack_texts").get<std::uint64_t>();

  std::vector<ExperimentJob> jobs;
  for (const auto& sj : config.at("seeds")) {
    const auto seed = sj.get<std::uint64_t>();
    ExperimentJob job{false, seed, {}};
    if (lists(scenarios, "A")) {
      for (std::uint64_t n : sizes) job.cells.push_back({"A", "*", "none", "none", seed, n});
    }
    if (lists(scenarios, "C")) {
      for (const auto& s : schemes) job.cells.push_back({"C", "*", s, "none", seed, train});
    }
    if (lists(scenarios, "B")) {
      for (const auto& m : models) {
        for (const auto& s : schemes) job.cells.push_back({"B", m, s, "none", seed, train});
      }
    }
    for (const auto& s : schemes) {
      for (const auto& a : attacks) {
        job.cells.push_back({std::string(kAttackCell), "*", s, a, seed, attack_texts});
      }
    }
    if (!job.cells.empty()) jobs.push_back(std::move(job));
  }
  const Json& st = config.at("stealing");
  if (st.at("enabled").get<bool>()) {
    const auto victim = st.at("victim").get<std::string>();
    for (const auto& sj : st.at("seeds")) {
      const auto seed = sj.get<std::uint64_t>();
      ExperimentJob job{true, seed, {}};
      for (const auto& q : st.at("queries")) {
        for (const auto& s : st.at("schemes")) {
          for (auto kind : {kStealCleanCell, kStealWatermarkedCell}) {
            job.cells.push_back({std::string(kind), victim, s.get<std::string>(), "none", seed,
                                 q.get<std::uint64_t>()});
          }
        }
      }
      jobs.push_back(std::move(job));
    }
  }
  return jobs;
}

inline std::vector<CellKey> expected_cells(const Json& config) {
  std::vector<CellKey> out;
  for (const auto& job : plan_jobs(config)) out.insert(out.end(), job.cells.begin(), job.cells.end());
  return out;
}

namespace experiment_detail {

inline Json metrics_json(const EvalMetrics& m) {
  Json per_class = Json::object();
  for (const auto& c : m.per_class) {
    per_class[c.label] = {{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1},
                          {"support", c.support}};
  }
  return {{"macro_f1", m.macro_f1}, {"accuracy", m.accuracy}, {"per_class", per_class},
          {"confusion", m.confusion}};
}

inline void add_perplexity_stats(Json& out, TextBank& bank, int scheme, const char* prefix) {
  std::vector<double> all;
  Json by_model = Json::object();
  for (std::size_t m = 0; m < bank.lab().models.size(); ++m) {
    const auto& p = bank.perplexities(m, scheme);
    by_model[bank.lab().models[m]->model_id()] = mean_of(p);
    all.insert(all.end(), p.begin(), p.end());
  }
  out[std::string(prefix) + "mean"] = mean_of(all);
  out[std::string(prefix) + "std"] = stddev_of(all);
  out[std::string(prefix) + "by_model"] = by_model;
}

// Everything one seed's cells share: generated texts, the scenario-A
// baseline, and per-(model, scheme) detectors.
class SeedRun {
 public:
  SeedRun(const ExperimentConfig& cfg, const Lab& lab, std::uint64_t seed)
      : cfg_(cfg), lab_(lab), seed_(seed), bank_(lab, cfg.schemes, cfg.bank, seed) {}

  Json run(const CellKey& key) {
    if (key.scenario == "A") return scenario_a(key.param);
    if (key.scenario == "B") return scenario_b(key.model, key.scheme);
    if (key.scenario == "C") return scenario_c(key.scheme);
    if (key.scenario == kAttackCell) return attack(key.scheme, key.attack, key.param);
    fail(ErrorCode::kInvalidParameter, "unknown cell kind '" + key.scenario + "'");
  }

 private:
  const ScenarioResult& baseline() {
    if (!baseline_) baseline_ = run_scenario(ScenarioSpec::a(cfg_.model_ids()), bank_);
    return *baseline_;
  }

  Detector& detector(std::size_t model, int scheme) {
    auto& slot = detectors_[{model, scheme}];
    if (!slot) {
      slot = std::make_unique<Detector>(bank_.keyed_scheme(scheme, model), lab_.vocab->size(),
                                        lab_.synonyms, cfg_.detector);
    }
    return *slot;
  }

  Json scenario_a(std::uint64_t train_size) {
    const bool full = train_size == cfg_.bank.train_per_class;
    const ScenarioResult r =
        full ? baseline() : run_scenario(ScenarioSpec::a(cfg_.model_ids()), bank_, train_size);
    Json out = metrics_json(r.metrics);
    out["train_per_class"] = r.train_per_class;
    out["test_per_class"] = r.test_per_class;
    if (full) add_perplexity_stats(out, bank_, kNoScheme, "ppl_");
    return out;
  }

  Json scenario_c(const std::string& scheme) {
    const int s = bank_.scheme_index(scheme);
    const ScenarioResult r = run_scenario(ScenarioSpec::c(cfg_.model_ids(), scheme), bank_);
    Json out = metrics_json(r.metrics);
    out["f1_nw"] = baseline().metrics.macro_f1;
    out["f1_change"] = f1_change(r.metrics.macro_f1, baseline().metrics.macro_f1);
    add_perplexity_stats(out, bank_, s, "ppl_");
    add_perplexity_stats(out, bank_, kNoScheme, "ppl_nw_");
    out["ppl_rel_change"] = relative_change(out["ppl_nw_mean"].get<double>(),
                                            out["ppl_mean"].get<double>());
    // Own-key detection over the test split.
    std::size_t tp = 0, fp = 0, n = 0;
    const auto test = bank_.test_indices();
    for (std::size_t m = 0; m < lab_.models.size(); ++m) {
      Detector& det = detector(m, s);
      const auto& wm = bank_.texts(m, s);
      const auto& nw = bank_.texts(m, kNoScheme);
      for (std::size_t j : test) {
        tp += det.detect(wm[j].ids, derive_seed(seed_, 0xd1, m, j)).is_watermarked ? 1 : 0;
        fp += det.detect(nw[j].ids, derive_seed(seed_, 0xd0, m, j)).is_watermarked ? 1 : 0;
        ++n;
      }
    }
    out["tpr"] = static_cast<double>(tp) / static_cast<double>(n);
    out["fpr"] = static_cast<double>(fp) / static_cast<double>(n);
    return out;
  }

  Json scenario_b(const std::string& model, const std::string& scheme) {
    const ScenarioResult r =
        run_scenario(ScenarioSpec::b(cfg_.model_ids(), model, scheme), bank_);
    Json out = metrics_json(r.metrics);
    out["f1_nw"] = baseline().metrics.macro_f1;
    out["f1_change"] = f1_change(r.metrics.macro_f1, baseline().metrics.macro_f1);
    out["f1_marked"] = r.metrics.for_label(model).f1;
    out["f1_marked_nw"] = baseline().metrics.for_label(model).f1;
    return out;
  }

  // The first `count` test texts, round-robin over models, watermarked under
  // `scheme`, each attacked once and re-checked with its model's detector.
  Json attack(const std::string& scheme, const std::string& attack_name, std::uint64_t count) {
    const int s = bank_.scheme_index(scheme);
    const auto it = std::find_if(cfg_.attacks.begin(), cfg_.attacks.end(),
                                 [&](const NamedAttack& a) { return a.name == attack_name; });
    require(it != cfg_.attacks.end(), ErrorCode::kInvalidParameter,
            "unknown attack '" + attack_name + "'");
    const auto test = bank_.test_indices();
    const std::size_t models = lab_.models.size();
    require(count <= test.size() * models, ErrorCode::kInvalidParameter,
            "attack_texts exceeds the test split");
    std::vector<DetectionResult> pre, post;
    std::vector<double> ppl_pre, ppl_post;
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t m = i % models;
      const std::size_t j = test[i / models];
      const TokenSequence& text = bank_.texts(m, s)[j];
      const TokenSequence& prompt = bank_.prompts()[j];
      AttackConfig ac = it->config;
      ac.rng_seed = derive_seed(seed_, hash_string(attack_name), i);
      const TokenSequence attacked = apply_attack(text, ac, *lab_.synonyms, lab_.evaluator.get(),
                                                  prompt.ids);
      Detector& det = detector(m, s);
      pre.push_back(det.detect(text.ids, derive_seed(seed_, 0xa0, i)));
      post.push_back(det.detect(attacked.ids, derive_seed(seed_, 0xa1, i)));
      ppl_pre.push_back(bank_.perplexities(m, s)[j]);
      ppl_post.push_back(perplexity(*lab_.evaluator, attacked.ids, prompt.ids));
    }
    std::size_t flagged = 0, evaded = 0;
    for (std::size_t i = 0; i < pre.size(); ++i) {
      flagged += pre[i].is_watermarked ? 1 : 0;
      evaded += pre[i].is_watermarked && !post[i].is_watermarked ? 1 : 0;
    }
    const TestOutcome t = paired_t_test_greater(ppl_post, ppl_pre);
    return {{"attack_success_rate", attack_success_rate(pre, post)},
            {"texts", count},
            {"flagged_pre", flagged},
            {"evaded", evaded},
            {"ppl_pre", mean_of(ppl_pre)},
            {"ppl_post", mean_of(ppl_post)},
            {"ppl_increase_t", t.statistic},
            {"ppl_increase_p", t.p_value}};
  }

  const ExperimentConfig& cfg_;
  const Lab& lab_;
  std::uint64_t seed_;
  TextBank bank_;
  std::optional<ScenarioResult> baseline_;
  std::map<std::pair<std::size_t, int>, std::unique_ptr<Detector>> detectors_;
};

// Victim queries are generated once for the largest query count; smaller
// counts train on prefixes, which equals querying afresh because prompt
// choice and sampling seeds are prefix-stable.
class StealRun {
 public:
  StealRun(const ExperimentConfig& cfg, const Lab& lab, std::uint64_t seed)
      : cfg_(cfg), lab_(lab), seed_(seed), victim_(*lab.models.at(lab.model_index(cfg.stealing_victim()))) {}

  Json run(const CellKey& key) {
    const bool watermarked = key.scenario == kStealWatermarkedCell;
    const SchemeConfig scheme = victim_scheme(key.scheme);
    const NGramModel& surrogate = this->surrogate(watermarked ? key.scheme : "", key.param);
    RadioactivityOptions ro;
    ro.num_probes = cfg_.stealing.probes;
    ro.probe_length = cfg_.stealing.completion_length;
    ro.flag_rate_threshold = cfg_.flag_rate_threshold;
    ro.detector = cfg_.detector;
    // Clean and watermarked surrogates share probe prompts and seeds.
    const ModelVerdict v = radioactivity_check(surrogate, scheme, lab_.prompts, ro,
                                               derive_seed(seed_, 0x9b, key.param), lab_.synonyms);
    return {{"flag_rate", v.flag_rate},
            {"outputs_flagged", v.outputs_flagged},
            {"outputs_tested", v.outputs_tested},
            {"model_flagged", v.model_flagged},
            {"queries", key.param}};
  }

 private:
  SchemeConfig victim_scheme(const std::string& name) const {
    for (const auto& s : cfg_.schemes) {
      if (s.name == name) {
        SchemeConfig c = s.config;
        c.key = model_key(cfg_.secret, victim_.model_id());
        if (cfg_.stealing.delta && c.kind != SchemeKind::kExp) c.delta = *cfg_.stealing.delta;
        return c;
      }
    }
    fail(ErrorCode::kInvalidParameter, "unknown scheme '" + name + "'");
  }

  StealingConfig stealing_config(const std::string& scheme, std::size_t n) const {
    StealingConfig sc;
    sc.num_queries = n;
    sc.completion_length = cfg_.stealing.completion_length;
    sc.surrogate_order = cfg_.stealing.surrogate_order;
    sc.surrogate_smoothing = cfg_.stealing.surrogate_smoothing;
    if (!scheme.empty()) sc.victim_scheme = victim_scheme(scheme);
    return sc;
  }

  // scheme "" is the unwatermarked victim.
  const NGramModel& surrogate(const std::string& scheme, std::size_t n) {
    auto& slot = surrogates_[{scheme, n}];
    if (!slot) {
      auto& answers = answers_[scheme];
      if (answers.empty()) {
        const std::size_t max_n = cfg_.stealing.queries.back();
        answers = query_victim(victim_, lab_.prompts, stealing_config(scheme, max_n),
                               derive_seed(seed_, 0x57), lab_.synonyms);
      }
      std::vector<std::span<const TokenId>> docs;
      for (std::size_t q = 0; q < n; ++q) docs.emplace_back(answers[q].ids);
      slot = std::make_unique<NGramModel>(train_ngram_documents(
          victim_.shared_vocab(), docs, cfg_.stealing.surrogate_order,
          cfg_.stealing.surrogate_smoothing, victim_.model_id() + "-surrogate"));
    }
    return *slot;
  }

  const ExperimentConfig& cfg_;
  const Lab& lab_;
  std::uint64_t seed_;
  const NGramModel& victim_;
  std::map<std::string, std::vector<TokenSequence>> answers_;
  std::map<std::pair<std::string, std::size_t>, std::unique_ptr<NGramModel>> surrogates_;
};

inline std::int64_t elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                               since)
      .count();
}

}  // namespace experiment_detail

inline Lab build_experiment_lab(const ExperimentConfig& cfg) {
  return build_lab(cfg.corpus_paths, cfg.models, cfg.lab);
}

// Runs `cells` (a subset of `job`'s cells) and hands each record to `emit`
// as soon as it is done. Cell failures are recorded, not thrown.
inline void run_job(const ExperimentConfig& cfg, const Lab& lab, const ExperimentJob& job,
                    const std::vector<CellKey>& cells,
                    const std::function<void(CellRecord)>& emit) {
  using namespace experiment_detail;
  std::unique_ptr<SeedRun> seed_run;
  std::unique_ptr<StealRun> steal_run;
  for (const auto& key : cells) {
    const auto start = std::chrono::steady_clock::now();
    CellRecord rec;
    rec.key = key;
    try {
      if (job.stealing) {
        if (!steal_run) steal_run = std::make_unique<StealRun>(cfg, lab, job.seed);
        rec.metrics = steal_run->run(key);
      } else {
        if (!seed_run) seed_run = std::make_unique<SeedRun>(cfg, lab, job.seed);
        rec.metrics = seed_run->run(key);
      }
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
      rec.metrics = Json::object();
    }
    rec.wall_ms = elapsed_ms(start);
    emit(std::move(rec));
  }
}

struct RunOptions {
  std::size_t workers = 1;
  std::string out_dir;  // empty: the config's output_dir
  std::function<void(const CellRecord&)> on_cell;
};

struct RunSummary {
  std::size_t executed = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
  std::string report_path;
  ExperimentReport report;
};

inline Json report_header(const ExperimentConfig& cfg, const std::vector<std::string>& layout) {
  return {{"report", std::string(kReportFormat)},
          {"tool_version", std::string(kToolVersion)},
          {"fingerprint", config_fingerprint(cfg)},
          {"f1_average", "macro"},
          {"perplexity_evaluator",
           {{"order", cfg.lab.evaluator_order}, {"smoothing", cfg.lab.evaluator_smoothing}}},
          {"feature_layout", layout},
          {"config", config_to_json(cfg)}};
}

void write_summary(const ExperimentReport& report, const std::string& path);

// Executes every configured cell not already present in the output
// directory's report. Completed cells are skipped; failed ones are retried.
inline RunSummary run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {}) {
  using namespace experiment_detail;
  const std::string out_dir = opts.out_dir.empty() ? cfg.output_dir : opts.out_dir;
  std::filesystem::create_directories(out_dir);
  RunSummary summary;
  summary.report_path = report_path(out_dir);
  const std::string fingerprint = config_fingerprint(cfg);

  std::unique_ptr<Lab> lab;
  const auto get_lab = [&]() -> const Lab& {
    if (!lab) lab = std::make_unique<Lab>(build_experiment_lab(cfg));
    return *lab;
  };

  ExperimentReport& report = summary.report;
  if (std::filesystem::exists(summary.report_path)) {
    report = read_report(summary.report_path);
    require(report.fingerprint() == fingerprint, ErrorCode::kInvalidInput,
            "report in '" + out_dir + "' was produced by a different config (fingerprint " +
                report.fingerprint() + ", expected " + fingerprint + ")");
    std::erase_if(report.cells, [](const CellRecord& c) { return !c.ok; });
  } else {
    const Lab& l = get_lab();
    report.header =
        report_header(cfg, TextBank::make_registry(l, cfg.schemes, cfg.bank).layout());
  }
  // Normalizes the file: drops failed records and any torn trailing line.
  write_report(report, summary.report_path);

  std::set<CellKey> done;
  for (const auto& c : report.cells) done.insert(c.key);
  struct Pending {
    ExperimentJob job;
    std::vector<CellKey> cells;
  };
  std::vector<Pending> pending;
  for (auto& job : plan_jobs(report.header.at("config"))) {
    std::vector<CellKey> todo;
    for (const auto& k : job.cells) {
      if (done.count(k)) {
        ++summary.skipped;
      } else {
        todo.push_back(k);
      }
    }
    if (!todo.empty()) pending.push_back({std::move(job), std::move(todo)});
  }

  if (!pending.empty()) {
    const Lab& l = get_lab();
    struct Slot {
      std::vector<CellRecord> records;
      bool done = false;
    };
    std::vector<Slot> slots(pending.size());
    std::mutex mu;
    std::condition_variable cv;
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
      for (std::size_t i = next++; i < pending.size(); i = next++) {
        run_job(cfg, l, pending[i].job, pending[i].cells, [&](CellRecord rec) {
          std::lock_guard<std::mutex> lock(mu);
          slots[i].records.push_back(std::move(rec));
          cv.notify_all();
        });
        std::lock_guard<std::mutex> lock(mu);
        slots[i].done = true;
        cv.notify_all();
      }
    };
    const std::size_t threads = std::clamp<std::size_t>(opts.workers, 1, pending.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);

    // Single writer: commits records job by job, in plan order.
    for (std::size_t i = 0; i < slots.size(); ++i) {
      std::size_t written = 0;
      while (true) {
        std::vector<CellRecord> batch;
        bool finished = false;
        {
          std::unique_lock<std::mutex> lock(mu);
          cv.wait(lock, [&] { return slots[i].records.size() > written || slots[i].done; });
          batch.assign(slots[i].records.begin() + static_cast<std::ptrdiff_t>(written),
                       slots[i].records.end());
          written = slots[i].records.size();
          finished = slots[i].done && batch.empty();
        }
        for (auto& rec : batch) {
          append_record(rec, summary.report_path);
          ++summary.executed;
          summary.failed += rec.ok ? 0 : 1;
          if (opts.on_cell) opts.on_cell(rec);
          report.cells.push_back(std::move(rec));
        }
        if (finished) break;
      }
    }
    for (auto& t : pool) t.join();
  }
  write_summary(report, (std::filesystem::path(out_dir) / "summary.txt").string());
  return summary;
}

namespace experiment_detail {

// Mean of metrics[field] over the given cells; fails listing any missing.
class CellGather {
 public:
  explicit CellGather(const ExperimentReport& report) : report_(report) {}

  const CellRecord* get(const CellKey& key) {
    const CellRecord* c = report_.find_ok(key);
    if (!c) missing_.push_back(key.str());
    return c;
  }

  double mean(const std::vector<CellKey>& keys, const std::string& field) {
    std::vector<double> xs;
    for (const auto& k : keys) {
      if (const CellRecord* c = get(k)) xs.push_back(c->metrics.at(field).get<double>());
    }
    return xs.empty() ? 0.0 : mean_of(xs);
  }

  void throw_if_missing(const std::string& what) const {
    if (missing_.empty()) return;
    std::string msg = what + " is missing " + std::to_string(missing_.size()) + " cell(s):";
    for (const auto& m : missing_) msg += " " + m;
    fail(ErrorCode::kMissingCells, msg);
  }

 private:
  const ExperimentReport& report_;
  std::vector<std::string> missing_;
};

inline std::vector<std::uint64_t> seeds_of(const Json& arr) {
  std::vector<std::uint64_t> out;
  for (const auto& s : arr) out.push_back(s.get<std::uint64_t>());
  return out;
}

}  // namespace experiment_detail

// Per-scheme perplexity vs the unwatermarked baseline, averaged over seeds.
inline PerplexityTable perplexity_delta_table(const ExperimentReport& report) {
  using namespace experiment_detail;
  require(report.header.contains("config"), ErrorCode::kInvalidInput, "report has no header");
  const Json& cfg = report.header.at("config");
  const auto seeds = seeds_of(cfg.at("seeds"));
  const std::uint64_t train = cfg.at("dataset").at("train_per_class").get<std::uint64_t>();
  PerplexityTable t;
  t.models = names_of(cfg.at("models"), "id");
  t.schemes = names_of(cfg.at("schemes"), "name");
  CellGather g(report);
  const auto by_model = [&](const CellKey& key, std::vector<double>& acc) {
    if (const CellRecord* c = g.get(key)) {
      for (std::size_t m = 0; m < t.models.size(); ++m) {
        acc[m] += c->metrics.at("ppl_by_model").at(t.models[m]).get<double>() /
                  static_cast<double>(seeds.size());
      }
    }
  };
  t.baseline.assign(t.models.size(), 0.0);
  for (auto seed : seeds) by_model({"A", "*", "none", "none", seed, train}, t.baseline);
  g.throw_if_missing("perplexity table baseline (scenario A)");
  for (const auto& s : t.schemes) {
    std::vector<double> row(t.models.size(), 0.0);
    for (auto seed : seeds) by_model({"C", "*", s, "none", seed, train}, row);
    t.watermarked.push_back(row);
  }
  g.throw_if_missing("perplexity table (scenario C)");
  return t;
}

inline constexpr std::array<std::string_view, 4> kPlotKinds = {"f1_bars", "attack_tradeoff",
                                                               "learning_curve", "n_sweep"};

// Writes <out_dir>/<kind>.tsv and returns its path.
inline std::string emit_plot_data(const ExperimentReport& report, std::string_view kind,
                                  const std::string& out_dir) {
  using namespace experiment_detail;
  require(std::find(kPlotKinds.begin(), kPlotKinds.end(), kind) != kPlotKinds.end(),
          ErrorCode::kInvalidParameter, "unknown plot kind '" + std::string(kind) + "'");
  require(report.header.contains("config"), ErrorCode::kInvalidInput, "report has no header");
  const Json& cfg = report.header.at("config");
  const auto seeds = seeds_of(cfg.at("seeds"));
  const auto models = names_of(cfg.at("models"), "id");
  const auto schemes = names_of(cfg.at("schemes"), "name");
  const auto attacks = names_of(cfg.at("attacks"), "name");
  const std::uint64_t train = cfg.at("dataset").at("train_per_class").get<std::uint64_t>();
  CellGather g(report);
  std::ostringstream out;
  char buf[64];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  const auto over_seeds = [&](const std::vector<std::uint64_t>& ss, const CellKey& proto) {
    std::vector<CellKey> keys;
    for (auto s : ss) {
      CellKey k = proto;
      k.seed = s;
      keys.push_back(k);
    }
    return keys;
  };

  if (kind == "f1_bars") {
    out << "classifier\tsetting\tscheme\tf1_nw\tf1_wm\tf1_change\n";
    const double nw = g.mean(over_seeds(seeds, {"A", "*", "none", "none", 0, train}), "macro_f1");
    for (const auto& s : schemes) {
      const auto keys = over_seeds(seeds, {"C", "*", s, "none", 0, train});
      out << "logreg\tC\t" << s << '\t' << num(nw) << '\t' << num(g.mean(keys, "macro_f1")) << '\t'
          << num(g.mean(keys, "f1_change")) << '\n';
    }
    const bool has_b = experiment_detail::lists(cfg.at("scenarios"), "B");
    for (const auto& m : has_b ? models : std::vector<std::string>{}) {
      for (const auto& s : schemes) {
        const auto keys = over_seeds(seeds, {"B", m, s, "none", 0, train});
        out << "logreg\tB:" << m << '\t' << s << '\t' << num(nw) << '\t'
            << num(g.mean(keys, "macro_f1")) << '\t' << num(g.mean(keys, "f1_change")) << '\n';
      }
    }
  } else if (kind == "attack_tradeoff") {
    out << "scheme\tattack\tsuccess_rate\tppl_pre\tppl_post\n";
    const std::uint64_t n = cfg.at("attack_texts").get<std::uint64_t>();
    for (const auto& s : schemes) {
      for (const auto& a : attacks) {
        const auto keys = over_seeds(seeds, {std::string(kAttackCell), "*", s, a, 0, n});
        out << s << '\t' << a << '\t' << num(g.mean(keys, "attack_success_rate")) << '\t'
            << num(g.mean(keys, "ppl_pre")) << '\t' << num(g.mean(keys, "ppl_post")) << '\n';
      }
    }
  } else if (kind == "learning_curve") {
    out << "train_per_class\tmacro_f1\tmacro_f1_sd\n";
    for (const auto& nj : cfg.at("learning_curve")) {
      const auto n = nj.get<std::uint64_t>();
      std::vector<double> xs;
      for (const auto& k : over_seeds(seeds, {"A", "*", "none", "none", 0, n})) {
        if (const CellRecord* c = g.get(k)) xs.push_back(c->metrics.at("macro_f1").get<double>());
      }
      out << n << '\t' << num(xs.empty() ? 0.0 : mean_of(xs)) << '\t' << num(stddev_of(xs)) << '\n';
    }
  } else {
    out << "scheme\tqueries\tflag_rate_clean\tflag_rate_wm\n";
    const Json& st = cfg.at("stealing");
    const auto steal_seeds = seeds_of(st.at("seeds"));
    const auto victim = st.at("victim").get<std::string>();
    for (const auto& sj : st.at("schemes")) {
      const auto s = sj.get<std::string>();
      for (const auto& q : st.at("queries")) {
        const auto n = q.get<std::uint64_t>();
        const double clean = g.mean(
            over_seeds(steal_seeds, {std::string(kStealCleanCell), victim, s, "none", 0, n}),
            "flag_rate");
        const double wm = g.mean(
            over_seeds(steal_seeds, {std::string(kStealWatermarkedCell), victim, s, "none", 0, n}),
            "flag_rate");
        out << s << '\t' << n << '\t' << num(clean) << '\t' << num(wm) << '\n';
      }
    }
  }
  g.throw_if_missing(std::string(kind));
  std::filesystem::create_directories(out_dir);
  const std::string path = (std::filesystem::path(out_dir) / (std::string(kind) + ".tsv")).string();
  std::ofstream f(path, std::ios::trunc);
  require(static_cast<bool>(f), ErrorCode::kIo, "cannot write '" + path + "'");
  f << out.str();
  return path;
}

// Human-readable digest; sections whose cells are absent are skipped.
inline void write_summary(const ExperimentReport& report, const std::string& path) {
  std::ostringstream out;
  out << "wmlab experiment summary\nfingerprint " << report.fingerprint() << "\ncells "
      << report.cells.size() << "\nF1 is macro-averaged over classes.\n";
  try {
    out << "\n# perplexity (mean over seeds; change vs no watermark)\n"
        << perplexity_delta_table(report).render();
  } catch (const Error& e) {
    out << "(unavailable: " << e.what() << ")\n";
  }
  for (auto kind : kPlotKinds) {
    out << "\n# " << kind << '\n';
    try {
      const auto dir = std::filesystem::path(path).parent_path() / "plot-data";
      std::ifstream in(emit_plot_data(report, kind, dir.string()));
      out << in.rdbuf();
    } catch (const Error& e) {
      out << "(unavailable: " << e.what() << ")\n";
    }
  }
  std::ofstream f(path, std::ios::trunc);
  require(static_cast<bool>(f), ErrorCode::kIo, "cannot write '" + path + "'");
  f << out.str();
}

}  // namespace wmlab
