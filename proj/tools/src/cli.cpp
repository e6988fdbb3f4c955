#include "s3cli/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "s3/common/rng.hpp"
#include "s3/diversity/diversity.hpp"
#include "s3/ees/ees.hpp"
#include "s3/gapsim/gapsim.hpp"
#include "s3/llm/remote_backend.hpp"
#include "s3/llm/response_cache.hpp"
#include "s3/llm/scripted_oracle.hpp"
#include "s3/metrics/flops.hpp"
#include "s3/metrics/metrics.hpp"
#include "s3/synthesis/seed.hpp"
#include "s3/trainer/trainer.hpp"
#include "s3cli/demo.hpp"
#include "s3cli/manifest.hpp"

namespace s3::cli {

namespace fs = std::filesystem;

int exit_code(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::config: return 2;
    case ErrorCategory::backend: return 3;
    case ErrorCategory::internal: return 4;
  }
  return 4;
}

namespace {

struct Globals {
  std::uint64_t seed = 42;
  std::size_t parallel = 4;
  std::string log_level = "info";
  fs::path out_dir = ".";
  std::string backend = "scripted";
  std::string oracle;
  std::string cache;
  std::string model;
};

fs::path under(const Globals& g, const fs::path& p) { return p.is_absolute() ? p : g.out_dir / p; }

void require_file(const std::string& flag, const std::string& path) {
  if (path.empty()) throw ConfigError(flag + " is required");
  if (!fs::exists(path)) throw ConfigError(flag + ": no such file " + path);
}

struct BackendHandle {
  std::shared_ptr<llm::ResponseCache> cache;
  std::unique_ptr<llm::CachedBackend> backend;
};

BackendHandle open_backend(const Globals& g, RunManifest& manifest) {
  std::shared_ptr<llm::Backend> inner;
  if (g.backend == "scripted") {
    require_file("--oracle", g.oracle);
    auto script = llm::load_oracle_script(g.oracle);
    script.rng_seed = stream_seed(g.seed, "oracle");
    manifest.add_seed("oracle", script.rng_seed);
    inner = std::make_shared<llm::ScriptedOracle>(std::move(script));
  } else if (g.backend == "remote") {
    auto cfg = llm::remote_config_from_env();
    if (!g.model.empty()) cfg.model = g.model;
    inner = std::make_shared<llm::RemoteBackend>(std::move(cfg));
  } else {
    throw ConfigError("unknown backend '" + g.backend + "' (expected scripted or remote)");
  }
  BackendHandle h;
  h.cache = g.cache.empty() ? std::make_shared<llm::ResponseCache>() : std::make_shared<llm::ResponseCache>(g.cache);
  h.backend = std::make_unique<llm::CachedBackend>(std::move(inner), h.cache);
  manifest.set_backend(h.backend->id());
  return h;
}

std::unique_ptr<trainer::Trainer> open_trainer(const std::string& config_path, const std::string& cmd,
                                               nlohmann::ordered_json& cfg_out) {
  trainer::TrainerConfig cfg;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open trainer config " + config_path);
    try {
      cfg = trainer::trainer_config_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("trainer config " + config_path + ": " + e.what());
    }
  }
  if (!cmd.empty()) {
    cfg.backend = trainer::BackendKind::external;
    cfg.external_cmd = cmd;
  }
  cfg_out = trainer::to_json(cfg);
  return trainer::make_trainer(cfg);
}

void finish(RunManifest& m, const Globals& g, const std::vector<fs::path>& artifacts, const BackendHandle* b,
            const std::string& command) {
  if (b) m.set_cache(b->cache->stats());
  for (const auto& p : artifacts) m.add_artifact(g.out_dir, p);
  m.finish();
  m.write(g.out_dir / (command + ".manifest.json"));
}

// ------------------------------------------------------------- subcommands

struct SynthArgs {
  std::string task, out = "seed.jsonl", contexts, rationales;
};

void cmd_synthesize_seed(const Globals& g, const SynthArgs& a) {
  RunManifest manifest("synthesize-seed");
  require_file("--task", a.task);
  auto spec = std::make_shared<const TaskSpec>(load_task_spec(a.task));
  auto backend = open_backend(g, manifest);
  synthesis::SynthesisOptions sopts;
  sopts.parallel = g.parallel;
  const auto seed = stream_seed(g.seed, "synthesis");
  manifest.add_seed("root", g.seed);
  manifest.add_seed("synthesis", seed);
  std::vector<fs::path> artifacts;

  Dataset out;
  if (spec->kind == TaskKind::single_text_classification) {
    synthesis::RationaleSet rationales;
    if (!a.rationales.empty()) {
      std::ifstream in(a.rationales);
      if (!in) throw ConfigError("cannot open rationales " + a.rationales);
      rationales = synthesis::rationales_from_json(nlohmann::json::parse(in, nullptr, true));
    } else {
      rationales = synthesis::synthesize_rationales(*spec, *backend.backend, sopts);
      const auto p = under(g, "rationales.json");
      write_json(p, synthesis::to_json(rationales, *spec));
      artifacts.push_back(p);
    }
    out = synthesis::synthesize_seed(spec, rationales, *backend.backend, seed, sopts);
  } else {
    require_file("--contexts", a.contexts);
    auto pool = synthesis::load_context_pool(a.contexts);
    out = synthesis::synthesize_seed_conditional(spec, pool, *backend.backend, stream_seed(g.seed, "contexts"), sopts);
    manifest.add_seed("contexts", stream_seed(g.seed, "contexts"));
  }
  const auto p = under(g, a.out);
  save_dataset(out, p);
  artifacts.push_back(p);
  manifest.set_config({{"task", to_json(*spec)}, {"parallel", g.parallel}});
  finish(manifest, g, artifacts, &backend, "synthesize-seed");
  std::cout << "wrote " << out.size() << " seed examples to " << p.string() << '\n';
}

struct EesArgs {
  std::string task, seed_data, gold_val, gold_test, out = "train.jsonl", report = "report.json", trainer, trainer_cmd;
  std::optional<int> rounds;
  bool dedup = false;
};

void cmd_run_ees(const Globals& g, const EesArgs& a) {
  RunManifest manifest("run-ees");
  require_file("--task", a.task);
  require_file("--seed-data", a.seed_data);
  require_file("--gold-val", a.gold_val);
  auto spec = std::make_shared<const TaskSpec>(load_task_spec(a.task));
  auto seed = load_dataset(a.seed_data, spec, LoadOptions{Stage::seed});
  auto val = load_dataset(a.gold_val, spec, LoadOptions{Stage::gold_val});
  std::optional<Dataset> test;
  if (!a.gold_test.empty()) {
    require_file("--gold-test", a.gold_test);
    test = load_dataset(a.gold_test, spec, LoadOptions{Stage::gold_test});
  }
  nlohmann::ordered_json trainer_cfg;
  auto tr = open_trainer(a.trainer, a.trainer_cmd, trainer_cfg);
  auto backend = open_backend(g, manifest);

  auto opts = ees::ees_options_from(*spec);
  if (a.rounds) opts.rounds = static_cast<std::size_t>(*a.rounds);
  if (a.dedup) opts.dedup = true;
  opts.synthesis.parallel = g.parallel;
  auto result = ees::run_ees(spec, seed, val, test ? &*test : nullptr, *tr, *backend.backend, opts);

  std::vector<fs::path> artifacts;
  const auto out = under(g, a.out);
  save_dataset(result.train, out);
  artifacts.push_back(out);
  const auto report = under(g, a.report);
  write_json(report, result.to_json());
  artifacts.push_back(report);
  for (std::size_t q = 0; q < result.additions.size(); ++q) {
    const auto mis = under(g, "mis_round" + std::to_string(q) + ".jsonl");
    const auto add = under(g, "add_round" + std::to_string(q + 1) + ".jsonl");
    save_dataset(trainer::to_dataset(result.errors[q], spec), mis);
    save_dataset(result.additions[q], add);
    artifacts.push_back(mis);
    artifacts.push_back(add);
  }
  manifest.add_seed("root", g.seed);
  manifest.set_config({{"task", to_json(*spec)},
                       {"rounds", opts.rounds},
                       {"dedup", opts.dedup},
                       {"min_improvement", opts.min_improvement},
                       {"trainer", trainer_cfg},
                       {"parallel", g.parallel}});
  finish(manifest, g, artifacts, &backend, "run-ees");
  const auto& last = result.final_report();
  std::cout << "final train size " << result.train.size() << ", val " << last.val.headline();
  if (last.test) std::cout << ", test " << last.test->headline();
  std::cout << '\n';
}

struct EvalArgs {
  std::string task, gold, pred, train, trainer, trainer_cmd, out = "metrics.json";
};

std::vector<std::string> load_predictions(const std::string& path, const Dataset& gold) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open predictions " + path);
  std::map<std::string, std::string, std::less<>> by_id;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      by_id[j.at("id").get<std::string>()] = j.at("prediction").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw RecordError(path, lineno, e.what());
    }
  }
  std::vector<std::string> out;
  out.reserve(gold.size());
  for (const auto& e : gold) {
    auto it = by_id.find(e.id);
    if (it == by_id.end()) throw ConfigError("no prediction for gold example '" + e.id + "'");
    out.push_back(it->second);
  }
  return out;
}

void cmd_evaluate(const Globals& g, const EvalArgs& a) {
  RunManifest manifest("evaluate");
  require_file("--task", a.task);
  require_file("--gold", a.gold);
  auto spec = std::make_shared<const TaskSpec>(load_task_spec(a.task));
  auto gold = load_dataset(a.gold, spec, LoadOptions{Stage::gold_test});
  std::vector<std::string> preds;
  nlohmann::ordered_json cfg{{"task", spec->name}};
  if (!a.pred.empty()) {
    require_file("--pred", a.pred);
    preds = load_predictions(a.pred, gold);
  } else {
    require_file("--train", a.train);
    auto train = load_dataset(a.train, spec, LoadOptions{Stage::seed});
    nlohmann::ordered_json tcfg;
    auto tr = open_trainer(a.trainer, a.trainer_cmd, tcfg);
    cfg["trainer"] = tcfg;
    auto model = trainer::train(*tr, train);
    preds = trainer::predict(*model, gold).values();
  }
  auto report = metrics::evaluate(preds, gold);
  const auto out = under(g, a.out);
  write_json(out, report.to_json());
  manifest.set_config(std::move(cfg));
  finish(manifest, g, {out}, nullptr, "evaluate");
  std::cout << report.to_json().dump() << '\n';
}

struct QualityArgs {
  std::string task, mis, add, embeddings, out = "quality.json", csv = "quality.csv";
};

void cmd_quality(const Globals& g, const QualityArgs& a) {
  RunManifest manifest("diversity-quality");
  require_file("--task", a.task);
  require_file("--mis", a.mis);
  require_file("--add", a.add);
  auto spec = std::make_shared<const TaskSpec>(load_task_spec(a.task));
  auto mis = load_dataset(a.mis, spec, LoadOptions{Stage::gold_val});
  auto add = load_dataset(a.add, spec, LoadOptions{Stage::add});
  diversity::EmbeddingSet emb;
  if (!a.embeddings.empty()) {
    emb = diversity::load_embeddings(a.embeddings);
  } else {
    emb = diversity::embed(mis);
    const auto add_emb = diversity::embed(add);
    for (const auto& [id, v] : add_emb.entries()) emb.insert(id, v);
  }
  auto r = diversity::quality_report(mis, add, emb);
  const auto out = under(g, a.out), csv = under(g, a.csv);
  write_json(out, r.to_json());
  {
    std::ofstream f(csv, std::ios::binary | std::ios::trunc);
    f << r.to_csv();
  }
  manifest.set_config({{"embeddings", a.embeddings.empty() ? "hashed-256" : "external"}});
  finish(manifest, g, {out, csv}, nullptr, "diversity-quality");
  std::cout << r.to_json().dump() << '\n';
}

struct CoverageArgs {
  std::string task, gold, embeddings, coords, method = "pca", out = "coverage.json", csv = "coverage.csv";
  std::vector<std::string> syn;
  std::optional<double> gamma;
  std::size_t sample = 0;
};

Dataset subsample(const Dataset& d, std::size_t n, std::uint64_t seed) {
  if (n == 0 || n >= d.size()) return d;
  Rng rng(seed);
  auto idx = rng.sample_without_replacement(d.size(), n);
  std::sort(idx.begin(), idx.end());
  std::vector<Example> ex;
  for (auto i : idx) ex.push_back(d[i]);
  return Dataset(d.task_ptr(), std::move(ex));
}

void cmd_coverage(const Globals& g, const CoverageArgs& a) {
  RunManifest manifest("diversity-coverage");
  require_file("--task", a.task);
  require_file("--gold", a.gold);
  if (a.syn.empty()) throw ConfigError("--syn needs at least one dataset");
  if (a.method != "pca" && a.method != "external") throw ConfigError("--method must be pca or external");
  auto spec = std::make_shared<const TaskSpec>(load_task_spec(a.task));
  const auto sample_seed = stream_seed(g.seed, "coverage-sample");
  manifest.add_seed("coverage-sample", sample_seed);

  struct Set {
    std::string name;
    Dataset data;
  };
  std::vector<Set> sets;
  sets.push_back({"gold", subsample(load_dataset(a.gold, spec, LoadOptions{Stage::gold_test}), a.sample,
                                    item_seed(sample_seed, 0))});
  for (std::size_t i = 0; i < a.syn.size(); ++i) {
    require_file("--syn", a.syn[i]);
    auto name = fs::path(a.syn[i]).stem().string();
    sets.push_back({name, subsample(load_dataset(a.syn[i], spec, LoadOptions{Stage::seed}), a.sample,
                                    item_seed(sample_seed, i + 1))});
  }

  std::optional<diversity::EmbeddingSet> provided;
  if (!a.embeddings.empty()) provided = diversity::load_embeddings(a.embeddings);
  diversity::EmbeddingSet joint;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    for (const auto& e : sets[s].data) {
      std::vector<double> v;
      if (provided) {
        const auto* pv = provided->find(e.id);
        if (!pv) throw ConfigError("no embedding for example '" + e.id + "'");
        v = *pv;
      } else {
        v = diversity::hashed_embedding(diversity::analysis_text(e));
      }
      joint.insert(std::to_string(s) + "/" + e.id, std::move(v));
    }
  }
  diversity::Projection proj;
  if (a.method == "pca") {
    proj = diversity::project_pca(joint);
  } else {
    require_file("--coords", a.coords);
    auto coords = diversity::load_coords(a.coords);
    for (std::size_t s = 0; s < sets.size(); ++s) {
      for (const auto& e : sets[s].data) {
        auto it = coords.find(e.id);
        if (it == coords.end()) throw ConfigError("external coordinates lack id '" + e.id + "'");
        proj[std::to_string(s) + "/" + e.id] = it->second;
      }
    }
  }
  auto points = [&](std::size_t s) {
    std::vector<diversity::Point2> pts;
    for (const auto& e : sets[s].data) pts.push_back(proj.at(std::to_string(s) + "/" + e.id));
    return pts;
  };
  const auto gold_pts = points(0);
  const double gamma = a.gamma ? *a.gamma : diversity::default_gamma(gold_pts);
  nlohmann::ordered_json j;
  j["gamma"] = gamma;
  j["gamma_source"] = a.gamma ? "user" : "median_gold_nn";
  j["method"] = a.method;
  j["n_gold"] = gold_pts.size();
  j["rates"] = nlohmann::ordered_json::object();
  for (std::size_t s = 1; s < sets.size(); ++s) {
    const auto pts = points(s);
    j["rates"][sets[s].name] = {{"n", pts.size()}, {"coverage_rate", diversity::coverage_rate(gold_pts, pts, gamma)}};
  }
  const auto out = under(g, a.out), csv = under(g, a.csv);
  write_json(out, j);
  {
    std::ofstream f(csv, std::ios::binary | std::ios::trunc);
    f.precision(17);
    f << "set,id,x,y\n";
    for (std::size_t s = 0; s < sets.size(); ++s) {
      for (const auto& e : sets[s].data) {
        const auto& p = proj.at(std::to_string(s) + "/" + e.id);
        f << sets[s].name << ',' << e.id << ',' << p.x << ',' << p.y << '\n';
      }
    }
  }
  manifest.set_config({{"method", a.method}, {"sample", a.sample}, {"gamma", gamma}});
  finish(manifest, g, {out, csv}, nullptr, "diversity-coverage");
  std::cout << j.dump() << '\n';
}

struct GapArgs {
  std::string scenario, out = "trace.csv", json;
};

void cmd_simulate_gap(const Globals& g, const GapArgs& a) {
  RunManifest manifest("simulate-gap");
  require_file("--scenario", a.scenario);
  auto s = gapsim::load_scenario(a.scenario);
  auto trace = gapsim::simulate_ees_rounds(s.p_d, s.p_s0, s.rounds, s.policy, s.empirical);
  const auto out = under(g, a.out);
  const auto json = under(g, a.json.empty() ? fs::path(a.out).replace_extension(".json") : fs::path(a.json));
  {
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write " + out.string());
    f << trace.to_csv();
  }
  write_json(json, trace.to_json());
  manifest.set_config({{"rounds", s.rounds},
                       {"policy", s.policy.kind == gapsim::MixPolicy::Kind::optimal_p ? "optimal_p" : "fixed_p"}});
  finish(manifest, g, {out, json}, nullptr, "simulate-gap");
  const auto& last = trace.steps.back();
  std::cout << "rounds " << last.round << ", final tv " << last.tv << '\n';
}

struct FlopsArgs {
  double params = 66e6;
  double seq_len = 512;
  std::vector<std::string> stages;
  std::string preset, out;
};

metrics::FlopsStage parse_stage(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw ConfigError("--stage expects records:epochs, got '" + s + "'");
  try {
    std::size_t used = 0;
    metrics::FlopsStage st{std::stod(s.substr(0, colon), &used), 0};
    if (used != colon) throw std::invalid_argument(s);
    const auto rest = s.substr(colon + 1);
    st.epochs = std::stod(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(s);
    return st;
  } catch (const std::logic_error&) {
    throw ConfigError("--stage expects records:epochs, got '" + s + "'");
  }
}

void cmd_flops(const Globals& g, const FlopsArgs& a) {
  std::vector<metrics::FlopsStage> stages;
  if (a.preset == "zerogen") {
    stages = {{200'000, 10}};
  } else if (a.preset == "s3") {
    stages = {{51'200, 8}, {64'000, 8}, {76'800, 8}};
  } else if (!a.preset.empty()) {
    throw ConfigError("unknown --preset '" + a.preset + "' (expected zerogen or s3)");
  }
  for (const auto& s : a.stages) stages.push_back(parse_stage(s));
  auto r = metrics::flops(a.params, a.seq_len, stages);
  if (!a.out.empty()) write_json(under(g, a.out), r.to_json());
  std::cout << r.to_json().dump(2) << '\n';
}

struct DemoArgs {
  std::size_t seed_size = 200, val_size = 100, test_size = 100;
  int rounds = 2;
};

void cmd_demo(const Globals& g, const DemoArgs& a) {
  DemoOptions o;
  o.seed = g.seed;
  o.parallel = g.parallel;
  o.seed_size = a.seed_size;
  o.val_size = a.val_size;
  o.test_size = a.test_size;
  o.rounds = static_cast<std::size_t>(a.rounds);
  o.out_dir = g.out_dir;
  if (!g.cache.empty()) o.cache = g.cache;
  auto r = run_demo(o);
  std::cout << "seed-only test accuracy " << r.seed_only_test.headline() << ", after EES "
            << r.ees_test.headline() << " (" << r.ees.train.size() << " training examples)\n";
}

void setup_logging(const std::string& level) {
  auto logger = spdlog::get("s3");
  if (!logger) logger = spdlog::stderr_color_mt("s3");
  spdlog::set_default_logger(logger);
  const auto lvl = spdlog::level::from_str(level);
  if (lvl == spdlog::level::off && level != "off") throw ConfigError("unknown --log-level '" + level + "'");
  spdlog::set_level(lvl);
}

}  // namespace

int run_pipeline(const std::vector<std::string>& args) {
  CLI::App app{"Seed synthesis and error extrapolation for small-model training data", "s3"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Root RNG seed; module streams derive from it")->capture_default_str();
  app.add_option("--parallel", g.parallel, "Concurrent LLM requests")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--log-level", g.log_level, "trace|debug|info|warn|error|off")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "Directory for all outputs")->capture_default_str();
  app.add_option("--backend", g.backend, "scripted|remote")->capture_default_str();
  app.add_option("--oracle", g.oracle, "Oracle script for the scripted backend");
  app.add_option("--cache", g.cache, "Response cache file (JSONL)");
  app.add_option("--model", g.model, "Model name for the remote backend");

  SynthArgs synth;
  auto* s = app.add_subcommand("synthesize-seed", "Generate the seed dataset");
  s->add_option("--task", synth.task, "Task spec JSON")->required();
  s->add_option("--out", synth.out, "Seed dataset (JSONL)")->capture_default_str();
  s->add_option("--contexts", synth.contexts, "Context pool for pair and QA tasks");
  s->add_option("--rationales", synth.rationales, "Reuse a rationale file instead of querying");

  EesArgs ees_args;
  int rounds = 0;
  auto* e = app.add_subcommand("run-ees", "Run error extrapolation on a seed set");
  e->add_option("--task", ees_args.task)->required();
  e->add_option("--seed-data", ees_args.seed_data, "Seed dataset (JSONL)")->required();
  e->add_option("--gold-val", ees_args.gold_val)->required();
  e->add_option("--gold-test", ees_args.gold_test);
  auto* rounds_opt = e->add_option("--rounds", rounds, "Extrapolation rounds R")->check(CLI::NonNegativeNumber);
  e->add_option("--out", ees_args.out)->capture_default_str();
  e->add_option("--report", ees_args.report)->capture_default_str();
  e->add_option("--trainer", ees_args.trainer, "Trainer config JSON");
  e->add_option("--trainer-cmd", ees_args.trainer_cmd, "Command launching an external trainer");
  e->add_flag("--dedup", ees_args.dedup, "Drop duplicate texts when merging");

  EvalArgs eval;
  auto* v = app.add_subcommand("evaluate", "Score predictions against gold data");
  v->add_option("--task", eval.task)->required();
  v->add_option("--gold", eval.gold)->required();
  auto* pred_opt = v->add_option("--pred", eval.pred, "JSONL of {id, prediction}");
  auto* train_opt = v->add_option("--train", eval.train, "Train a model on this dataset and score it");
  pred_opt->excludes(train_opt);
  v->add_option("--trainer", eval.trainer);
  v->add_option("--trainer-cmd", eval.trainer_cmd);
  v->add_option("--out", eval.out)->capture_default_str();

  auto* d = app.add_subcommand("diversity", "Additional-data quality and coverage analyses");
  d->require_subcommand(1);
  QualityArgs qa;
  auto* dq = d->add_subcommand("quality", "Similarity of added examples to their source errors");
  dq->add_option("--task", qa.task)->required();
  dq->add_option("--mis", qa.mis)->required();
  dq->add_option("--add", qa.add)->required();
  dq->add_option("--embeddings", qa.embeddings, "JSONL of {id, vector}");
  dq->add_option("--out", qa.out)->capture_default_str();
  dq->add_option("--csv", qa.csv)->capture_default_str();
  CoverageArgs ca;
  double gamma = 0.0;
  auto* dc = d->add_subcommand("coverage", "Share of gold points near synthesized points");
  dc->add_option("--task", ca.task)->required();
  dc->add_option("--gold", ca.gold)->required();
  dc->add_option("--syn", ca.syn, "Synthesized dataset(s)")->required();
  dc->add_option("--embeddings", ca.embeddings);
  dc->add_option("--method", ca.method, "pca|external")->capture_default_str();
  dc->add_option("--coords", ca.coords, "JSONL of {id, x, y} for --method external");
  auto* gamma_opt = dc->add_option("--gamma", gamma, "Radius; default is the median gold nearest-neighbour distance")
                        ->check(CLI::NonNegativeNumber);
  dc->add_option("--sample", ca.sample, "Points drawn per set (0 = all)");
  dc->add_option("--out", ca.out)->capture_default_str();
  dc->add_option("--csv", ca.csv)->capture_default_str();

  GapArgs gap;
  auto* gs = app.add_subcommand("simulate-gap", "Iterate the mixture model of error extrapolation");
  gs->add_option("--scenario", gap.scenario)->required();
  gs->add_option("--out", gap.out, "Trace CSV")->capture_default_str();
  gs->add_option("--json", gap.json, "Trace JSON (default: --out with .json)");

  FlopsArgs fl;
  auto* f = app.add_subcommand("flops", "Fine-tuning compute estimate");
  f->add_option("--params", fl.params)->capture_default_str();
  f->add_option("--seq-len", fl.seq_len)->capture_default_str();
  f->add_option("--stage", fl.stages, "records:epochs (repeatable)");
  f->add_option("--preset", fl.preset, "zerogen|s3");
  f->add_option("--out", fl.out);

  DemoArgs demo;
  auto* dm = app.add_subcommand("demo", "Offline end-to-end run with a scripted oracle");
  dm->add_option("--seed-size", demo.seed_size)->capture_default_str();
  dm->add_option("--val-size", demo.val_size)->capture_default_str();
  dm->add_option("--test-size", demo.test_size)->capture_default_str();
  dm->add_option("--rounds", demo.rounds)->check(CLI::NonNegativeNumber)->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForVersion& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    std::cerr << "error:config: " << ex.what() << '\n';
    return exit_code(ErrorCategory::config);
  }

  try {
    setup_logging(g.log_level);
    fs::create_directories(g.out_dir);
    if (*s) {
      cmd_synthesize_seed(g, synth);
    } else if (*e) {
      if (rounds_opt->count() > 0) ees_args.rounds = rounds;
      cmd_run_ees(g, ees_args);
    } else if (*v) {
      if (eval.pred.empty() && eval.train.empty()) throw ConfigError("evaluate needs --pred or --train");
      cmd_evaluate(g, eval);
    } else if (*dq) {
      cmd_quality(g, qa);
    } else if (*dc) {
      if (gamma_opt->count() > 0) ca.gamma = gamma;
      cmd_coverage(g, ca);
    } else if (*gs) {
      cmd_simulate_gap(g, gap);
    } else if (*f) {
      cmd_flops(g, fl);
    } else if (*dm) {
      cmd_demo(g, demo);
    }
  } catch (const Error& ex) {
    std::cerr << "error:" << to_string(ex.category()) << ": " << ex.what() << '\n';
    return exit_code(ex.category());
  } catch (const std::exception& ex) {
    std::cerr << "error:internal: " << ex.what() << '\n';
    return exit_code(ErrorCategory::internal);
  }
  return 0;
}

}  // namespace s3::cli
