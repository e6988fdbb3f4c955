#include "s3/ees/ees.hpp"

#include <spdlog/spdlog.h>

#include "s3/common/error.hpp"
#include "s3/common/parallel.hpp"

namespace s3::ees {

using prompting::Role;
namespace key = prompting::key;

std::string_view to_string(StopReason r) noexcept {
  switch (r) {
    case StopReason::none: return "none";
    case StopReason::rounds_exhausted: return "rounds_exhausted";
    case StopReason::no_errors: return "no_errors";
    case StopReason::no_improvement: return "no_improvement";
  }
  return "?";
}

namespace {

Role mis_role(const TaskSpec& spec) {
  return spec.kind == TaskKind::single_text_classification ? Role::mis1 : Role::mis2;
}

prompting::Bindings bindings_for(const Example& e) {
  prompting::Bindings b;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, TextLabel>) {
          b[std::string(key::x)] = p.x;
          b[std::string(key::y)] = p.y;
        } else if constexpr (std::is_same_v<T, PairLabel>) {
          b[std::string(key::x)] = p.context;
          b[std::string(key::premise)] = p.context;
          b[std::string(key::question)] = p.x;
          b[std::string(key::hypothesis)] = p.x;
          b[std::string(key::y)] = p.y;
        } else {
          b[std::string(key::x)] = p.context;
          b[std::string(key::context)] = p.context;
          b[std::string(key::answer)] = p.answer;
          b[std::string(key::question)] = p.question;
        }
      },
      e.payload);
  return b;
}

Payload with_new_text(const Payload& gold, std::string x) {
  return std::visit(
      [&](const auto& p) -> Payload {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, TextLabel>) {
          return TextLabel{std::move(x), p.y};
        } else if constexpr (std::is_same_v<T, PairLabel>) {
          return PairLabel{p.context, std::move(x), p.y};
        } else {
          return ContextQA{p.context, p.answer, std::move(x)};
        }
      },
      gold);
}

bool fatal(const BackendError& e) {
  return e.kind() == BackendErrorKind::auth || e.kind() == BackendErrorKind::prompt_too_long;
}

}  // namespace

std::string extrapolation_prompt(const Example& error, const TaskSpec& spec) {
  const auto role = mis_role(spec);
  auto it = spec.templates.find(role);
  if (it == spec.templates.end()) {
    throw ConfigError("task '" + spec.name + "' has no " + std::string(prompting::to_string(role)) + " template");
  }
  return prompting::render(it->second, bindings_for(error));
}

ExtrapolationResult extrapolate_errors(const trainer::MisclassifiedSet& mis, std::shared_ptr<const TaskSpec> spec_ptr,
                                       llm::Backend& backend, std::size_t round,
                                       const synthesis::SynthesisOptions& opts) {
  const TaskSpec& spec = *spec_ptr;
  if (spec.expansion == 0) throw ConfigError("expansion must be >= 1");
  const std::size_t per_error = spec.expansion;
  const std::size_t attempts = spec.generation_attempts;
  const std::size_t n = mis.size() * per_error;
  if (n * attempts >= kRoundStride) {
    throw ConfigError("too many extrapolation requests in one round (" + std::to_string(n * attempts) + ")");
  }

  struct Slot {
    std::optional<Payload> payload;
    std::string prompt;
  };
  std::vector<Slot> slots(n);
  parallel_for(n, opts.parallel, [&](std::size_t i) {
    const auto& err = mis.errors[i / per_error];
    const std::string prompt = extrapolation_prompt(err.gold, spec);
    slots[i].prompt = prompt;
    for (std::size_t a = 0; a < attempts; ++a) {
      const std::uint64_t sample_index = round * kRoundStride + i * attempts + a;
      try {
        auto completions = llm::generate(backend, llm::make_request(prompt, spec.sampling, sample_index));
        auto x = synthesis::clean_completion(completions.front(), prompt, opts);
        if (x.empty()) continue;
        slots[i].payload = with_new_text(err.gold.payload, std::move(x));
        return;
      } catch (const BackendError& e) {
        if (fatal(e)) throw;
        spdlog::debug("extrapolation of {} attempt {} failed: {}", err.error_id, a, e.what());
      }
    }
  });

  DatasetBuilder b(spec_ptr);
  ExtrapolationResult r{Dataset(spec_ptr, {}), n, 0};
  for (std::size_t i = 0; i < n; ++i) {
    if (!slots[i].payload) {
      ++r.failures;
      continue;
    }
    Provenance p;
    p.stage = Stage::add;
    p.round = static_cast<int>(round + 1);
    p.source_error_id = mis.errors[i / per_error].error_id;
    p.prompt_hash = synthesis::prompt_hash(slots[i].prompt);
    b.add(std::move(*slots[i].payload), std::move(p));
  }
  r.added = std::move(b).build();
  if (r.failures > 0) spdlog::warn("round {}: {} of {} extrapolations failed", round + 1, r.failures, n);
  return r;
}

nlohmann::ordered_json RoundReport::to_json() const {
  nlohmann::ordered_json j;
  j["round"] = round;
  j["train_size"] = train_size;
  j["seed_size"] = seed_size;
  j["added_total"] = added_total;
  j["val"] = val.to_json();
  if (test) j["test"] = test->to_json();
  j["errors"] = errors;
  j["extrapolated"] = extrapolated;
  j["added_this_round"] = added_this_round;
  j["failures"] = failures;
  j["stop"] = std::string(ees::to_string(stop));
  return j;
}

nlohmann::ordered_json EesResult::to_json() const {
  nlohmann::ordered_json j;
  j["rounds"] = nlohmann::ordered_json::array();
  for (const auto& r : reports) j["rounds"].push_back(r.to_json());
  j["final_train_size"] = train.size();
  if (!reports.empty()) {
    j["final_val"] = reports.back().val.to_json();
    if (reports.back().test) j["final_test"] = reports.back().test->to_json();
  }
  return j;
}

EesOptions ees_options_from(const TaskSpec& spec) {
  EesOptions o;
  o.rounds = spec.ees_rounds;
  o.dedup = spec.dedup;
  o.min_improvement = spec.min_improvement;
  return o;
}

EesResult run_ees(std::shared_ptr<const TaskSpec> spec_ptr, const Dataset& seed, const Dataset& val,
                  const Dataset* test, trainer::Trainer& trainer, llm::Backend& backend, const EesOptions& opts) {
  const TaskSpec& spec = *spec_ptr;
  if (seed.empty()) throw ConfigError("EES needs a non-empty seed set");
  if (val.empty()) throw ConfigError("EES needs a non-empty validation set");

  EesResult result;
  std::vector<Dataset> parts{seed};
  std::optional<double> previous;
  for (std::size_t q = 0;; ++q) {
    Dataset train = merge(parts, opts.dedup);
    auto model = trainer::train(trainer, train);
    auto val_preds = trainer::predict(*model, val);
    RoundReport rep;
    rep.round = q;
    rep.train_size = train.size();
    rep.seed_size = seed.size();
    rep.added_total = train.size() >= seed.size() ? train.size() - seed.size() : 0;
    rep.val = metrics::evaluate(val_preds.values(), val);
    if (test && !test->empty()) rep.test = metrics::evaluate(trainer::predict(*model, *test).values(), *test);
    auto mis = trainer::misclassified(val_preds, val, spec);
    rep.errors = mis.size();
    const double score = rep.val.headline();
    spdlog::info("pass {}: train={} val={:.4f} errors={}", q, rep.train_size, score, rep.errors);

    if (q == opts.rounds) {
      rep.stop = StopReason::rounds_exhausted;
    } else if (mis.empty()) {
      rep.stop = StopReason::no_errors;
    } else if (previous && score - *previous < opts.min_improvement) {
      rep.stop = StopReason::no_improvement;
    }
    if (rep.stop != StopReason::none) {
      result.reports.push_back(std::move(rep));
      result.train = std::move(train);
      break;
    }

    auto ext = extrapolate_errors(mis, spec_ptr, backend, q, opts.synthesis);
    rep.extrapolated = true;
    rep.added_this_round = ext.added.size();
    rep.failures = ext.failures;
    result.reports.push_back(std::move(rep));
    result.errors.push_back(std::move(mis));
    parts.push_back(ext.added);
    result.additions.push_back(std::move(ext.added));
    previous = score;
  }
  return result;
}

}  // namespace s3::ees
