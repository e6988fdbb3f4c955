#include "s3/synthesis/seed.hpp"

#include <fstream>
#include <regex>

#include "s3/common/error.hpp"
#include "s3/common/hash.hpp"
#include "s3/common/parallel.hpp"
#include "s3/common/rng.hpp"
#include "s3/common/text.hpp"
#include "s3/llm/rationales.hpp"

namespace s3::synthesis {

using prompting::Role;
namespace key = prompting::key;

std::string prompt_hash(std::string_view prompt) { return sha256_hex(prompt).substr(0, 16); }

nlohmann::ordered_json to_json(const RationaleSet& r, const TaskSpec& spec) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& label : spec.labels) {
    if (auto it = r.find(label); it != r.end()) j[label] = it->second;
  }
  return j;
}

RationaleSet rationales_from_json(const nlohmann::json& j) {
  try {
    return j.get<RationaleSet>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("rationale file: ") + e.what());
  }
}

ContextPool load_context_pool(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open context pool " + path.string());
  ContextPool pool;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      ContextRecord rec;
      rec.context = j.at("context").get<std::string>();
      if (j.contains("answer") && !j["answer"].is_null()) rec.answer = j["answer"].get<std::string>();
      pool.contexts.push_back(std::move(rec));
    } catch (const nlohmann::json::exception& e) {
      throw RecordError(path.string(), lineno, e.what());
    }
  }
  return pool;
}

std::string clean_completion(std::string_view completion, std::string_view prompt, const SynthesisOptions& opts) {
  std::string s = text::trim(completion);
  if (opts.strip_echo) {
    const std::string tail = text::trim(prompt);
    const std::size_t max_len = std::min(tail.size(), s.size());
    for (std::size_t len = max_len; len >= opts.min_echo_chars && len > 0; --len) {
      if (std::string_view(s).starts_with(std::string_view(tail).substr(tail.size() - len))) {
        s = text::trim(std::string_view(s).substr(len));
        break;
      }
    }
  }
  static const std::regex kFieldEcho(R"(^(review|movie review|question|sentence|hypothesis|answer|text)\s*:\s*)",
                                     std::regex::icase);
  s = std::regex_replace(s, kFieldEcho, "", std::regex_constants::format_first_only);
  s = text::trim(s);
  auto strip_pair = [&](std::string_view open, std::string_view close) {
    if (s.size() >= open.size() + close.size() && std::string_view(s).starts_with(open) &&
        std::string_view(s).ends_with(close)) {
      s = text::trim(std::string_view(s).substr(open.size(), s.size() - open.size() - close.size()));
      return true;
    }
    return false;
  };
  strip_pair("\"", "\"") || strip_pair("\xE2\x80\x9C", "\xE2\x80\x9D") || strip_pair("'", "'");
  return s;
}

namespace {

void require_template(const TaskSpec& spec, Role role) {
  if (!spec.templates.contains(role)) {
    throw ConfigError("task '" + spec.name + "' has no " + std::string(prompting::to_string(role)) + " template");
  }
}

bool fatal(const BackendError& e) {
  return e.kind() == BackendErrorKind::auth || e.kind() == BackendErrorKind::prompt_too_long;
}

struct Draft {
  Payload payload;
  std::string prompt;
};

// Runs `draw(i, attempt)` -> Draft plus one generation per example, retrying with a
// fresh draw on failure. Results land in index order.
template <typename DrawFn, typename FillFn>
std::vector<Draft> generate_all(std::size_t n, const TaskSpec& spec, llm::Backend& backend,
                                const SynthesisOptions& opts, DrawFn&& draw, FillFn&& fill) {
  std::vector<Draft> out(n);
  const std::size_t attempts = spec.generation_attempts;
  parallel_for(n, opts.parallel, [&](std::size_t i) {
    std::string last_error = "empty completion";
    for (std::size_t a = 0; a < attempts; ++a) {
      Draft d = draw(i, a);
      const std::uint64_t sample_index = static_cast<std::uint64_t>(i * attempts + a);
      try {
        auto completions = llm::generate(backend, llm::make_request(d.prompt, spec.sampling, sample_index));
        auto x = clean_completion(completions.front(), d.prompt, opts);
        if (x.empty()) {
          last_error = "empty completion";
          continue;
        }
        fill(d.payload, std::move(x));
        out[i] = std::move(d);
        return;
      } catch (const BackendError& e) {
        if (fatal(e)) throw;
        last_error = e.what();
      }
    }
    throw BackendError(BackendErrorKind::budget_exhausted, "seed example " + std::to_string(i) + " failed after " +
                                                               std::to_string(attempts) + " attempt(s): " + last_error);
  });
  return out;
}

Dataset assemble(std::shared_ptr<const TaskSpec> spec, std::vector<Draft> drafts) {
  DatasetBuilder b(std::move(spec));
  for (auto& d : drafts) {
    Provenance p;
    p.stage = Stage::seed;
    p.round = 0;
    p.prompt_hash = prompt_hash(d.prompt);
    b.add(std::move(d.payload), std::move(p));
  }
  return std::move(b).build();
}

}  // namespace

RationaleSet synthesize_rationales(const TaskSpec& spec, llm::Backend& backend, const SynthesisOptions& opts) {
  if (spec.kind != TaskKind::single_text_classification) {
    throw ConfigError("rationale synthesis applies to single_text_classification tasks");
  }
  if (spec.rationale_count == 0) throw ConfigError("K must be >= 1");
  require_template(spec, Role::ration);
  llm::RationaleOptions ropts;
  ropts.attempt_budget = opts.rationale_attempts;
  ropts.prompt_count = spec.ration_placeholder_count();
  ropts.sampling = spec.sampling;

  RationaleSet out;
  for (const auto& label : spec.labels) {
    try {
      out[label] = llm::top_k_rationales(backend, label, spec.templates.at(Role::ration), spec.rationale_count, ropts);
    } catch (const BackendError& e) {
      throw BackendError(e.kind(), "rationales for label '" + label + "': " + e.what());
    }
  }
  return out;
}

Dataset synthesize_seed(std::shared_ptr<const TaskSpec> spec_ptr, const RationaleSet& rationales,
                        llm::Backend& backend, std::uint64_t rng_seed, const SynthesisOptions& opts) {
  const TaskSpec& spec = *spec_ptr;
  if (spec.kind != TaskKind::single_text_classification) {
    throw ConfigError("synthesize_seed applies to single_text_classification tasks");
  }
  if (spec.rationales_per_query > spec.rationale_count) {
    throw ConfigError("k exceeds K (k=" + std::to_string(spec.rationales_per_query) +
                      ", K=" + std::to_string(spec.rationale_count) + ")");
  }
  require_template(spec, Role::query1);
  if (spec.seed_size == 0) return DatasetBuilder(spec_ptr).build();
  for (const auto& label : spec.labels) {
    auto it = rationales.find(label);
    if (it == rationales.end()) throw ConfigError("no rationales for label '" + label + "'");
    if (it->second.size() < spec.rationales_per_query) {
      throw ConfigError("label '" + label + "' has " + std::to_string(it->second.size()) +
                        " rationales, fewer than k=" + std::to_string(spec.rationales_per_query));
    }
  }

  const auto& tmpl = spec.templates.at(Role::query1);
  auto draw = [&](std::size_t i, std::size_t attempt) {
    Rng rng(item_seed(rng_seed, i * spec.generation_attempts + attempt));
    const std::string& y =
        spec.balance ? spec.labels[i % spec.labels.size()] : spec.labels[rng.below(spec.labels.size())];
    const auto& pool = rationales.at(y);
    std::vector<std::string> chosen;
    for (auto idx : rng.sample_without_replacement(pool.size(), spec.rationales_per_query)) chosen.push_back(pool[idx]);
    prompting::Bindings b;
    b[std::string(key::x)] = text::join_phrases(chosen);
    b[std::string(key::y)] = y;
    return Draft{TextLabel{{}, y}, prompting::render(tmpl, b)};
  };
  auto fill = [](Payload& p, std::string x) { std::get<TextLabel>(p).x = std::move(x); };
  return assemble(spec_ptr, generate_all(spec.seed_size, spec, backend, opts, draw, fill));
}

Dataset synthesize_seed_conditional(std::shared_ptr<const TaskSpec> spec_ptr, const ContextPool& pool,
                                    llm::Backend& backend, std::uint64_t rng_seed, const SynthesisOptions& opts) {
  const TaskSpec& spec = *spec_ptr;
  if (spec.kind == TaskKind::single_text_classification) {
    throw ConfigError("conditional seed synthesis applies to pair_classification and context_qa tasks");
  }
  if (pool.contexts.empty()) throw ConfigError("context pool is empty");
  require_template(spec, Role::query2);
  const bool qa = spec.kind == TaskKind::context_qa;
  if (qa) {
    for (const auto& c : pool.contexts) {
      if (!c.answer || c.answer->empty()) throw ConfigError("context_qa pools need an answer for every context");
    }
  }
  if (spec.seed_size == 0) return DatasetBuilder(spec_ptr).build();

  // Epoch mode: consecutive shuffled passes over the pool.
  std::vector<std::size_t> epoch_order;
  if (spec.context_epochs) {
    Rng rng(stream_seed(rng_seed, "context-epochs"));
    while (epoch_order.size() < spec.seed_size) {
      auto perm = rng.sample_without_replacement(pool.contexts.size(), pool.contexts.size());
      epoch_order.insert(epoch_order.end(), perm.begin(), perm.end());
    }
  }

  const auto& tmpl = spec.templates.at(Role::query2);
  auto draw = [&](std::size_t i, std::size_t attempt) {
    Rng rng(item_seed(rng_seed, i * spec.generation_attempts + attempt));
    const auto ci = spec.context_epochs ? epoch_order[i] : rng.below(pool.contexts.size());
    const auto& rec = pool.contexts[ci];
    prompting::Bindings b;
    b[std::string(key::x)] = rec.context;
    b[std::string(key::premise)] = rec.context;
    b[std::string(key::context)] = rec.context;
    if (rec.answer) b[std::string(key::answer)] = *rec.answer;
    Payload payload;
    if (qa) {
      payload = ContextQA{rec.context, *rec.answer, {}};
    } else {
      const std::string& y =
          spec.balance ? spec.labels[i % spec.labels.size()] : spec.labels[rng.below(spec.labels.size())];
      b[std::string(key::y)] = y;
      payload = PairLabel{rec.context, {}, y};
    }
    return Draft{std::move(payload), prompting::render(tmpl, b)};
  };
  auto fill = [](Payload& p, std::string x) {
    if (auto* pair = std::get_if<PairLabel>(&p)) {
      pair->x = std::move(x);
    } else {
      std::get<ContextQA>(p).question = std::move(x);
    }
  };
  return assemble(spec_ptr, generate_all(spec.seed_size, spec, backend, opts, draw, fill));
}

}  // namespace s3::synthesis
