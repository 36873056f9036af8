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

// wmlab command-line driver.
//
// Exit status: 0 success, 1 some experiment cell failed, 2 usage or config
// error, 3 any other failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wmlab/attacks.hpp"
#include "wmlab/config.hpp"
#include "wmlab/corpus.hpp"
#include "wmlab/detector.hpp"
#include "wmlab/experiment.hpp"
#include "wmlab/records.hpp"
#include "wmlab/report.hpp"
#include "wmlab/scenario.hpp"
#include "wmlab/stealing.hpp"

namespace {

using wmlab::ErrorCode;
using Json = nlohmann::json;

constexpr int kExitCellFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitError = 3;

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::size_t workers = 1;
};

// Config and corpus state shared by the subcommands, loaded on first use.
class Session {
 public:
  explicit Session(const Globals& g) : g_(g) {}

  const wmlab::ExperimentConfig& config() {
    if (!cfg_) {
      wmlab::require(!g_.config_path.empty(), ErrorCode::kInvalidParameter,
                     "--config is required for this command");
      cfg_ = wmlab::load_config(g_.config_path);
      if (!g_.out_dir.empty()) cfg_->output_dir = g_.out_dir;
    }
    return *cfg_;
  }

  const wmlab::Lab& lab() {
    if (!lab_) {
      std::cerr << "building corpus and models...\n";
      lab_ = std::make_unique<wmlab::Lab>(wmlab::build_experiment_lab(config()));
    }
    return *lab_;
  }

  std::uint64_t seed() { return g_.seed.value_or(config().seeds.front()); }

  std::string out_dir() { return g_.out_dir.empty() ? config().output_dir : g_.out_dir; }

  const wmlab::NamedScheme& scheme(const std::string& name) {
    for (const auto& s : config().schemes) {
      if (s.name == name) return s;
    }
    wmlab::fail(ErrorCode::kInvalidParameter, "unknown scheme '" + name + "'");
  }

  // The scheme keyed for `model`, as every generation and detection uses it.
  wmlab::SchemeConfig keyed(const std::string& scheme_name, const std::string& model) {
    wmlab::SchemeConfig c = scheme(scheme_name).config;
    c.key = wmlab::model_key(config().secret, model);
    return c;
  }

  const Globals& globals() const { return g_; }

 private:
  const Globals& g_;
  std::optional<wmlab::ExperimentConfig> cfg_;
  std::unique_ptr<wmlab::Lab> lab_;
};

std::ofstream open_output(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::trunc);
  wmlab::require(static_cast<bool>(out), ErrorCode::kIo, "cannot write '" + path + "'");
  return out;
}

// Writes to `path`, or stdout when it is empty or "-".
template <typename F>
void with_output(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
  } else {
    std::ofstream out = open_output(path);
    write(out);
  }
}

std::vector<wmlab::TokenRecord> read_input(const std::string& path) {
  if (path.empty() || path == "-") return wmlab::read_records(std::cin, "<stdin>");
  return wmlab::read_records_file(path);
}

// --- train-lm --------------------------------------------------------------

struct TrainLmArgs {
  std::vector<std::string> models;
  std::string output;
};

int cmd_train_lm(Session& s, const TrainLmArgs& a) {
  const wmlab::Lab& lab = s.lab();
  const std::string dir = a.output.empty() ? s.out_dir() + "/models" : a.output;
  std::filesystem::create_directories(dir);
  std::vector<std::string> ids = a.models.empty() ? s.config().model_ids() : a.models;
  for (const auto& id : ids) {
    const auto& model = *lab.models.at(lab.model_index(id));
    const std::string path = dir + "/" + id + ".wmlm";
    wmlab::save_model_file(model, path);
    std::cout << Json{{"model", id}, {"order", model.order()}, {"smoothing", model.smoothing_k()},
                      {"vocab", model.vocab_size()}, {"path", path}}
                     .dump()
              << '\n';
  }
  return 0;
}

// --- generate --------------------------------------------------------------

struct GenerateArgs {
  std::string model;
  std::string model_file;
  std::string scheme = "none";
  std::size_t count = 10;
  std::size_t length = 0;
  std::string output;
  bool with_text = false;
};

int cmd_generate(Session& s, const GenerateArgs& a) {
  const wmlab::Lab& lab = s.lab();
  std::shared_ptr<const wmlab::NGramModel> model;
  if (!a.model_file.empty()) {
    auto loaded = std::make_shared<wmlab::NGramModel>(wmlab::load_model_file(a.model_file));
    wmlab::require(loaded->vocab() == *lab.vocab, ErrorCode::kInvalidInput,
                   "model file vocabulary differs from the configured corpus vocabulary");
    model = std::move(loaded);
  } else {
    model = lab.models.at(lab.model_index(a.model));
  }
  const std::string id = model->model_id();
  const std::size_t length = a.length ? a.length : s.config().bank.completion_length;
  const std::uint64_t seed = s.seed();
  std::optional<wmlab::Watermarker> wm;
  if (a.scheme != "none") wm.emplace(s.keyed(a.scheme, id), lab.vocab->size(), lab.synonyms);

  const auto picked = wmlab::choose_prompts(lab.prompts.size(), a.count, wmlab::derive_seed(seed, 0x70));
  std::vector<wmlab::TokenRecord> records;
  for (std::size_t j = 0; j < picked.size(); ++j) {
    const auto& prompt = lab.prompts[picked[j]];
    const std::uint64_t gs = wmlab::derive_seed(seed, 0x67, j);
    const auto out = wm ? wm->generate(*model, prompt, length, gs)
                        : wmlab::generate(*model, prompt, length, wmlab::Sampler::kMultinomial, gs);
    records.push_back({id + "-" + std::to_string(j), id, prompt.ids, out.ids});
  }
  with_output(a.output, [&](std::ostream& o) {
    wmlab::write_records(o, records, a.with_text ? lab.vocab.get() : nullptr);
  });
  return 0;
}

// --- detect ----------------------------------------------------------------

struct DetectArgs {
  std::string scheme;
  std::string key_model;
  std::string input;
  std::string output;
};

int cmd_detect(Session& s, const DetectArgs& a) {
  const auto records = read_input(a.input);
  const wmlab::Lab& lab = s.lab();
  std::map<std::string, std::unique_ptr<wmlab::Detector>> detectors;
  const std::uint64_t seed = s.seed();
  std::vector<wmlab::DetectionResult> results;
  with_output(a.output, [&](std::ostream& o) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      // The key belongs to the claimed source model unless one is forced.
      const std::string owner = a.key_model.empty() ? r.model : a.key_model;
      wmlab::require(!owner.empty(), ErrorCode::kInvalidInput,
                     "record '" + r.id + "' names no model; pass --key-model");
      auto& det = detectors[owner];
      if (!det) {
        lab.model_index(owner);
        det = std::make_unique<wmlab::Detector>(s.keyed(a.scheme, owner), lab.vocab->size(),
                                                lab.synonyms, s.config().detector);
      }
      results.push_back(det->detect(r.tokens, wmlab::derive_seed(seed, 0xd3, i)));
      o << wmlab::detection_to_json(r.id, results.back()).dump() << '\n';
    }
  });
  const auto v = wmlab::flag_model(results, s.config().flag_rate_threshold);
  std::cerr << "flagged " << v.outputs_flagged << "/" << v.outputs_tested << '\n';
  return 0;
}

// --- attack ----------------------------------------------------------------

struct AttackArgs {
  std::string attack;
  std::string input;
  std::string output;
};

int cmd_attack(Session& s, const AttackArgs& a) {
  const auto records = read_input(a.input);
  const auto& attacks = s.config().attacks;
  const auto it = std::find_if(attacks.begin(), attacks.end(),
                               [&](const wmlab::NamedAttack& x) { return x.name == a.attack; });
  wmlab::require(it != attacks.end(), ErrorCode::kInvalidParameter,
                 "unknown attack '" + a.attack + "'");
  const wmlab::Lab& lab = s.lab();
  const std::uint64_t seed = s.seed();
  std::vector<wmlab::TokenRecord> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    wmlab::AttackConfig cfg = it->config;
    cfg.rng_seed = wmlab::derive_seed(seed, wmlab::hash_string(a.attack), i);
    wmlab::TokenSequence text{records[i].tokens, records[i].model};
    auto attacked = wmlab::apply_attack(text, cfg, *lab.synonyms, lab.evaluator.get(),
                                        records[i].prompt);
    out.push_back({records[i].id, records[i].model, records[i].prompt, std::move(attacked.ids)});
  }
  with_output(a.output, [&](std::ostream& o) { wmlab::write_records(o, out); });
  return 0;
}

// --- classify --------------------------------------------------------------

struct ClassifyArgs {
  std::string scenario = "A";
  std::string scheme;
  std::string model;
  std::vector<std::size_t> train_sizes;
};

int cmd_classify(Session& s, const ClassifyArgs& a) {
  const auto& cfg = s.config();
  const wmlab::Lab& lab = s.lab();
  const std::uint64_t seed = s.seed();
  wmlab::TextBank bank(lab, cfg.schemes, cfg.bank, seed);
  const wmlab::Scenario sc = wmlab::parse_scenario(a.scenario);
  const auto ids = cfg.model_ids();
  wmlab::ScenarioSpec spec = wmlab::ScenarioSpec::a(ids);
  if (sc == wmlab::Scenario::kB) spec = wmlab::ScenarioSpec::b(ids, a.model, a.scheme);
  if (sc == wmlab::Scenario::kC) spec = wmlab::ScenarioSpec::c(ids, a.scheme);
  spec.validate();

  std::vector<std::size_t> sizes = a.train_sizes;
  if (sizes.empty()) sizes.push_back(cfg.bank.train_per_class);
  const std::string dir = s.out_dir();
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/classify.jsonl";
  std::ofstream store = open_output(path);
  for (std::size_t n : sizes) {
    const auto r = wmlab::run_scenario(spec, bank, n);
    wmlab::CellRecord rec;
    rec.key = {std::string(wmlab::scenario_name(sc)),
               sc == wmlab::Scenario::kB ? a.model : std::string(wmlab::kWildcard),
               spec.scheme.value_or(std::string(wmlab::kNone)), std::string(wmlab::kNone), seed,
               r.train_per_class};
    Json per_class = Json::object();
    for (const auto& c : r.metrics.per_class) {
      per_class[c.label] = {{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1},
                            {"support", c.support}};
    }
    rec.metrics = {{"macro_f1", r.metrics.macro_f1}, {"accuracy", r.metrics.accuracy},
                   {"per_class", per_class},         {"confusion", r.metrics.confusion},
                   {"labels", ids},                  {"train_per_class", r.train_per_class},
                   {"test_per_class", r.test_per_class}};
    const std::string line = rec.to_json().dump();
    store << line << '\n';
    std::cout << line << '\n';
  }
  std::cerr << "records written to " << path << '\n';
  return 0;
}

// --- steal -----------------------------------------------------------------

struct StealArgs {
  std::string scheme;
  std::string victim;
  std::vector<std::size_t> queries;
  std::size_t trials = 1;
};

int cmd_steal(Session& s, const StealArgs& a) {
  const auto& cfg = s.config();
  const wmlab::Lab& lab = s.lab();
  const std::string victim_id = a.victim.empty() ? cfg.stealing_victim() : a.victim;
  const auto& victim = *lab.models.at(lab.model_index(victim_id));
  wmlab::SchemeConfig scheme = s.keyed(a.scheme, victim_id);
  if (cfg.stealing.delta && scheme.kind != wmlab::SchemeKind::kExp) scheme.delta = *cfg.stealing.delta;
  const auto queries = a.queries.empty() ? cfg.stealing.queries : a.queries;
  wmlab::RadioactivityOptions ro;
  ro.num_probes = cfg.stealing.probes;
  ro.probe_length = cfg.stealing.completion_length;
  ro.flag_rate_threshold = cfg.flag_rate_threshold;
  ro.detector = cfg.detector;

  const std::string dir = s.out_dir();
  std::filesystem::create_directories(dir);
  std::ofstream store = open_output(dir + "/steal.jsonl");
  std::map<std::size_t, std::pair<double, double>> sweep;  // N -> (clean, wm) sums
  for (std::size_t t = 0; t < a.trials; ++t) {
    const std::uint64_t seed = wmlab::derive_seed(s.seed(), t);
    for (std::size_t n : queries) {
      for (bool watermarked : {false, true}) {
        wmlab::StealingConfig sc;
        sc.num_queries = n;
        sc.completion_length = cfg.stealing.completion_length;
        sc.surrogate_order = cfg.stealing.surrogate_order;
        sc.surrogate_smoothing = cfg.stealing.surrogate_smoothing;
        if (watermarked) sc.victim_scheme = scheme;
        const auto surrogate = wmlab::steal(victim, lab.prompts, sc, wmlab::derive_seed(seed, 0x57),
                                            lab.synonyms);
        const auto v = wmlab::radioactivity_check(surrogate, scheme, lab.prompts, ro,
                                                  wmlab::derive_seed(seed, 0x9b, n), lab.synonyms);
        Json rec = wmlab::verdict_to_json(v);
        rec["victim"] = victim_id;
        rec["scheme"] = a.scheme;
        rec["distilled_from"] = watermarked ? "watermarked" : "clean";
        rec["queries"] = n;
        rec["trial"] = t;
        store << rec.dump() << '\n';
        std::cout << rec.dump() << '\n';
        (watermarked ? sweep[n].second : sweep[n].first) += v.flag_rate;
      }
    }
  }
  std::cout << "# n-sweep (mean flag rate over " << a.trials << " trial(s))\n"
            << "queries\tflag_rate_clean\tflag_rate_wm\n";
  for (const auto& [n, sums] : sweep) {
    std::printf("%zu\t%.4f\t%.4f\n", n, sums.first / static_cast<double>(a.trials),
                sums.second / static_cast<double>(a.trials));
  }
  return 0;
}

// --- experiment ------------------------------------------------------------

int cmd_experiment(Session& s) {
  wmlab::ExperimentConfig cfg = s.config();
  if (s.globals().seed) {
    cfg.seeds = {*s.globals().seed};
    if (cfg.stealing.seeds.empty()) cfg.stealing.seeds = cfg.seeds;
  }
  wmlab::RunOptions opts;
  opts.workers = s.globals().workers;
  opts.out_dir = s.out_dir();
  opts.on_cell = [](const wmlab::CellRecord& r) {
    std::cerr << (r.ok ? "done   " : "FAILED ") << r.key.str() << " (" << r.wall_ms << " ms)";
    if (!r.ok) std::cerr << ": " << r.error;
    std::cerr << '\n';
  };
  const auto summary = wmlab::run_experiment(cfg, opts);
  std::cout << Json{{"executed", summary.executed},
                    {"skipped", summary.skipped},
                    {"failed", summary.failed},
                    {"report", summary.report_path}}
                   .dump()
            << '\n';
  return summary.failed ? kExitCellFailed : 0;
}

// --- plot-data -------------------------------------------------------------

struct PlotArgs {
  std::string report;
  std::vector<std::string> kinds;
  std::string output;
};

int cmd_plot_data(Session& s, const PlotArgs& a) {
  std::string out_dir = s.globals().out_dir;
  if (out_dir.empty() && !s.globals().config_path.empty()) out_dir = s.out_dir();
  wmlab::require(!a.report.empty() || !out_dir.empty(), ErrorCode::kInvalidParameter,
                 "pass --report, --out-dir or --config");
  const std::string path = a.report.empty() ? wmlab::report_path(out_dir) : a.report;
  const auto report = wmlab::read_report(path);
  const std::string dest = a.output.empty()
                               ? (std::filesystem::path(path).parent_path() / "plot-data").string()
                               : a.output;
  std::vector<std::string> kinds = a.kinds;
  if (kinds.empty()) kinds.assign(wmlab::kPlotKinds.begin(), wmlab::kPlotKinds.end());
  for (const auto& k : kinds) std::cout << wmlab::emit_plot_data(report, k, dest) << '\n';
  if (a.kinds.empty()) {
    const std::string table = dest + "/perplexity_table.tsv";
    std::ofstream(table) << wmlab::perplexity_delta_table(report).render();
    std::cout << table << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wmlab: watermarking experiments on toy n-gram language models"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Experiment config (JSON)");
  app.add_option("--seed", g.seed, "Seed override");
  app.add_option("--out-dir", g.out_dir, "Output directory override");
  app.add_option("--workers", g.workers, "Parallel jobs")->check(CLI::PositiveNumber);
  app.footer(std::string("Environment: ") + wmlab::kSecretEnvVar +
             " overrides the config's watermark secret.");

  TrainLmArgs train;
  auto* c_train = app.add_subcommand("train-lm", "Train the configured models and save them");
  c_train->add_option("--model", train.models, "Model id (repeatable; default all)");
  c_train->add_option("-o,--output", train.output, "Directory for <id>.wmlm files");

  GenerateArgs gen;
  auto* c_gen = app.add_subcommand("generate", "Generate completions as token records");
  auto* gen_model = c_gen->add_option("--model", gen.model, "Configured model id");
  c_gen->add_option("--model-file", gen.model_file, "Model saved by train-lm")->excludes(gen_model);
  c_gen->add_option("--scheme", gen.scheme, "Scheme name or 'none'");
  c_gen->add_option("-n,--count", gen.count, "Number of completions")->check(CLI::PositiveNumber);
  c_gen->add_option("--length", gen.length, "Completion length (default: config)");
  c_gen->add_option("-o,--output", gen.output, "Record file (default stdout)");
  c_gen->add_flag("--text", gen.with_text, "Include decoded text");

  DetectArgs det;
  auto* c_det = app.add_subcommand("detect", "Check token records for a watermark");
  c_det->add_option("--scheme", det.scheme, "Scheme name")->required();
  c_det->add_option("--key-model", det.key_model, "Use this model's key for every record");
  c_det->add_option("-i,--input", det.input, "Record file (default stdin)");
  c_det->add_option("-o,--output", det.output, "Result file (default stdout)");

  AttackArgs att;
  auto* c_att = app.add_subcommand("attack", "Apply an attack to token records");
  c_att->add_option("--attack", att.attack, "Attack name")->required();
  c_att->add_option("-i,--input", att.input, "Record file (default stdin)");
  c_att->add_option("-o,--output", att.output, "Record file (default stdout)");

  ClassifyArgs cls;
  auto* c_cls = app.add_subcommand("classify", "Train and evaluate the source classifier");
  c_cls->add_option("--scenario", cls.scenario, "A, B or C");
  c_cls->add_option("--scheme", cls.scheme, "Scheme for scenarios B and C");
  c_cls->add_option("--model", cls.model, "Watermarked model for scenario B");
  c_cls->add_option("--train-sizes", cls.train_sizes, "Per-class training sizes to sweep")
      ->delimiter(',');

  StealArgs st;
  auto* c_st = app.add_subcommand("steal", "Distill a surrogate and test it for radioactivity");
  c_st->add_option("--scheme", st.scheme, "Victim scheme")->required();
  c_st->add_option("--victim", st.victim, "Victim model (default: config)");
  c_st->add_option("--queries", st.queries, "Query counts to sweep")->delimiter(',');
  c_st->add_option("--trials", st.trials, "Paired trials")->check(CLI::PositiveNumber);

  auto* c_exp = app.add_subcommand("experiment", "Run or resume the configured experiment");

  PlotArgs plot;
  auto* c_plot = app.add_subcommand("plot-data", "Emit columnar plot data from a report");
  c_plot->add_option("--report", plot.report, "Report file (default <out-dir>/report.jsonl)");
  c_plot->add_option("--kind", plot.kinds, "f1_bars, attack_tradeoff, learning_curve, n_sweep")
      ->check(CLI::IsMember({"f1_bars", "attack_tradeoff", "learning_curve", "n_sweep"}));
  c_plot->add_option("-o,--output", plot.output, "Directory for the .tsv files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  Session session(g);
  try {
    if (c_train->parsed()) return cmd_train_lm(session, train);
    if (c_gen->parsed()) {
      if (gen.model.empty() && gen.model_file.empty()) {
        std::cerr << "error: generate needs --model or --model-file\n";
        return kExitUsage;
      }
      return cmd_generate(session, gen);
    }
    if (c_det->parsed()) return cmd_detect(session, det);
    if (c_att->parsed()) return cmd_attack(session, att);
    if (c_cls->parsed()) return cmd_classify(session, cls);
    if (c_st->parsed()) return cmd_steal(session, st);
    if (c_exp->parsed()) return cmd_experiment(session);
    if (c_plot->parsed()) return cmd_plot_data(session, plot);
  } catch (const wmlab::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    const bool usage = e.code() == ErrorCode::kInvalidParameter || e.code() == ErrorCode::kParse ||
                       e.code() == ErrorCode::kMissingFile;
    return usage ? kExitUsage : kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitUsage;
}
