#include "s3cli/demo.hpp"

#include <filesystem>

#include <spdlog/spdlog.h>

#include "s3/common/rng.hpp"
#include "s3/llm/response_cache.hpp"
#include "s3/trainer/naive_bayes.hpp"

namespace s3::cli {

namespace {

struct ClusterDef {
  const char* name;
  const char* label;
  std::vector<std::string> cues;
  double weight;
  std::vector<std::string> nouns;
  std::vector<std::string> adjectives;
};

std::vector<std::string> expand(const ClusterDef& c) {
  std::vector<std::string> out;
  for (const auto& n : c.nouns) {
    for (const auto& a : c.adjectives) {
      out.push_back("the " + n + " was " + a);
      out.push_back("honestly the " + n + " felt " + a);
      out.push_back(a + " " + n + " overall");
    }
  }
  return out;
}

const std::vector<ClusterDef>& cluster_defs() {
  static const std::vector<ClusterDef> defs{
      {"pos-acting", "positive", {"acting"}, 1.0,
       {"acting", "cast", "performances", "lead actor", "dialogue"},
       {"superb", "convincing", "brilliant", "heartfelt", "natural"}},
      {"pos-story", "positive", {"plot", "story"}, 1.0,
       {"plot", "story", "script", "ending", "storyline"},
       {"gripping", "clever", "moving", "original", "engaging"}},
      {"pos-sound", "positive", {"soundtrack", "sound", "music"}, 1.0,
       {"soundtrack", "score", "music", "songs", "sound design"},
       {"beautiful", "lovely", "memorable", "soaring", "catchy"}},
      {"neg-pacing", "negative", {"pacing", "slow", "story"}, 1.0,
       {"pacing", "story", "second act", "runtime", "editing"},
       {"boring", "sluggish", "tedious", "dull", "slow"}},
      {"neg-effects", "negative", {"effects"}, 1.0,
       {"effects", "cgi", "visuals", "sets", "costumes"},
       {"cheap", "fake", "ugly", "dated", "shoddy"}},
      // Never reached without an exemplar: the seed distribution under-covers it.
      {"neg-sound", "negative", {"soundtrack", "sound", "music"}, 0.0,
       {"soundtrack", "score", "music", "songs", "sound design"},
       {"grating", "shrill", "jarring", "repetitive", "overbearing"}},
  };
  return defs;
}

Dataset sample_gold(std::shared_ptr<const TaskSpec> task, const llm::DistributionalSpec& dist, std::size_t n,
                    std::uint64_t stream, Stage stage) {
  DatasetBuilder b(task);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(item_seed(stream, i));
    const auto& label = task->labels[rng.below(task->labels.size())];
    std::vector<const llm::OracleCluster*> pool;
    for (const auto& c : dist.clusters) {
      if (c.label == label) pool.push_back(&c);
    }
    const auto* c = pool[rng.below(pool.size())];
    Provenance p;
    p.stage = stage;
    b.add(TextLabel{c->atoms[rng.below(c->atoms.size())], label}, p);
  }
  return std::move(b).build();
}

}  // namespace

DemoScenario make_demo_scenario(const DemoOptions& opts) {
  auto task = std::make_shared<TaskSpec>();
  task->name = "demo-imdb";
  task->kind = TaskKind::single_text_classification;
  auto builtin = prompting::builtin_templates("imdb");
  task->templates = builtin.templates;
  task->labels = builtin.labels;
  task->rationale_count = 3;
  task->rationales_per_query = 2;
  task->seed_size = opts.seed_size;
  task->ees_rounds = opts.rounds;
  task->dedup = false;
  validate(*task);

  DemoScenario s;
  s.oracle.rng_seed = stream_seed(opts.seed, "oracle");
  s.oracle.rules = {
      {"lead to positive impression", false, {"1. superb acting\n2. gripping plot\n3. memorable soundtrack"}},
      {"lead to negative impression", false, {"1. boring pacing\n2. cheap effects\n3. slow story"}},
  };
  llm::DistributionalSpec dist;
  dist.label_cues = {{"positive", "a positive "}, {"negative", "a negative "}};
  dist.similar_marker = "similar to:";
  for (const auto& d : cluster_defs()) {
    dist.clusters.push_back({d.name, d.label, d.cues, d.weight, expand(d)});
  }
  s.gold_val = sample_gold(task, dist, opts.val_size, stream_seed(opts.seed, "gold-val"), Stage::gold_val);
  s.gold_test = sample_gold(task, dist, opts.test_size, stream_seed(opts.seed, "gold-test"), Stage::gold_test);
  s.oracle.distributional = std::move(dist);
  s.task = std::move(task);
  return s;
}

DemoOutcome run_demo(const DemoOptions& opts) {
  namespace fs = std::filesystem;
  RunManifest manifest("demo");
  fs::create_directories(opts.out_dir);
  const auto& dir = opts.out_dir;
  auto scenario = make_demo_scenario(opts);

  auto oracle = std::make_shared<llm::ScriptedOracle>(scenario.oracle);
  auto cache = opts.cache ? std::make_shared<llm::ResponseCache>(*opts.cache) : std::make_shared<llm::ResponseCache>();
  llm::CachedBackend backend(oracle, cache);

  synthesis::SynthesisOptions sopts;
  sopts.parallel = opts.parallel;
  const auto synth_seed = stream_seed(opts.seed, "synthesis");

  std::vector<fs::path> artifacts;
  auto keep = [&](const fs::path& p) {
    artifacts.push_back(p);
    return p;
  };
  save_task_spec(*scenario.task, keep(dir / "task.json"));
  write_json(keep(dir / "oracle.json"), llm::to_json(scenario.oracle));
  save_dataset(scenario.gold_val, keep(dir / "gold_val.jsonl"));
  save_dataset(scenario.gold_test, keep(dir / "gold_test.jsonl"));

  auto rationales = synthesis::synthesize_rationales(*scenario.task, backend, sopts);
  write_json(keep(dir / "rationales.json"), synthesis::to_json(rationales, *scenario.task));
  auto seed = synthesis::synthesize_seed(scenario.task, rationales, backend, synth_seed, sopts);
  save_dataset(seed, keep(dir / "seed.jsonl"));
  spdlog::info("demo: {} seed examples", seed.size());

  trainer::NaiveBayesTrainer nb;
  auto eopts = ees::ees_options_from(*scenario.task);
  eopts.synthesis = sopts;
  auto result = ees::run_ees(scenario.task, seed, scenario.gold_val, &scenario.gold_test, nb, backend, eopts);

  save_dataset(result.train, keep(dir / "train.jsonl"));
  write_json(keep(dir / "report.json"), result.to_json());
  for (std::size_t q = 0; q < result.additions.size(); ++q) {
    save_dataset(trainer::to_dataset(result.errors[q], scenario.task),
                 keep(dir / ("mis_round" + std::to_string(q) + ".jsonl")));
    save_dataset(result.additions[q], keep(dir / ("add_round" + std::to_string(q + 1) + ".jsonl")));
  }

  DemoOutcome out{std::move(rationales), std::move(seed), std::move(result), {}, {}, std::move(manifest)};
  out.seed_only_test = *out.ees.reports.front().test;
  out.ees_test = *out.ees.final_report().test;
  nlohmann::ordered_json m;
  m["seed_only"] = out.seed_only_test.to_json();
  m["ees"] = out.ees_test.to_json();
  m["improvement_points"] = 100.0 * (out.ees_test.headline() - out.seed_only_test.headline());
  write_json(keep(dir / "metrics.json"), m);

  nlohmann::ordered_json cfg;
  cfg["task"] = scenario.task->name;
  cfg["seed_size"] = opts.seed_size;
  cfg["val_size"] = opts.val_size;
  cfg["test_size"] = opts.test_size;
  cfg["rounds"] = opts.rounds;
  cfg["parallel"] = opts.parallel;
  cfg["trainer"] = nb.name();
  out.manifest.set_config(std::move(cfg));
  out.manifest.add_seed("root", opts.seed);
  out.manifest.add_seed("synthesis", synth_seed);
  out.manifest.add_seed("oracle", scenario.oracle.rng_seed);
  out.manifest.add_seed("gold-val", stream_seed(opts.seed, "gold-val"));
  out.manifest.add_seed("gold-test", stream_seed(opts.seed, "gold-test"));
  out.manifest.set_backend(backend.id());
  out.manifest.set_cache(cache->stats());
  for (const auto& p : artifacts) out.manifest.add_artifact(dir, p);
  out.manifest.finish();
  out.manifest.write(dir / "manifest.json");
  spdlog::info("demo: test accuracy seed-only {:.4f}, after EES {:.4f}", out.seed_only_test.headline(),
               out.ees_test.headline());
  return out;
}

}  // namespace s3::cli
