#include "s3/llm/scripted_oracle.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "s3/common/error.hpp"
#include "s3/common/hash.hpp"
#include "s3/common/rng.hpp"
#include "s3/common/text.hpp"

namespace s3::llm {

OracleScript oracle_script_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("oracle script must be a JSON object");
  OracleScript s;
  try {
    s.rng_seed = j.value("rng_seed", std::uint64_t{0});
    if (j.contains("rules")) {
      for (const auto& r : j.at("rules")) {
        OracleRule rule;
        rule.match = r.at("match").get<std::string>();
        rule.regex = r.value("regex", false);
        rule.responses = r.at("responses").get<std::vector<std::string>>();
        if (rule.responses.empty()) throw ConfigError("oracle rule '" + rule.match + "' has no responses");
        s.rules.push_back(std::move(rule));
      }
    }
    if (j.contains("distributional") && !j["distributional"].is_null()) {
      const auto& d = j["distributional"];
      DistributionalSpec spec;
      spec.similar_marker = d.value("similar_marker", spec.similar_marker);
      for (const auto& c : d.at("label_cues")) {
        spec.label_cues.emplace_back(c.at("label").get<std::string>(), c.at("cue").get<std::string>());
      }
      for (const auto& c : d.at("clusters")) {
        OracleCluster cl;
        cl.name = c.at("name").get<std::string>();
        cl.label = c.at("label").get<std::string>();
        cl.cues = c.value("cues", std::vector<std::string>{});
        cl.weight = c.value("weight", 1.0);
        cl.atoms = c.at("atoms").get<std::vector<std::string>>();
        if (!(cl.weight >= 0.0)) throw ConfigError("oracle cluster '" + cl.name + "' has a negative weight");
        if (cl.atoms.empty()) throw ConfigError("oracle cluster '" + cl.name + "' has no atoms");
        spec.clusters.push_back(std::move(cl));
      }
      if (spec.clusters.empty()) throw ConfigError("distributional oracle needs at least one cluster");
      s.distributional = std::move(spec);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("oracle script: ") + e.what());
  }
  if (s.rules.empty() && !s.distributional) throw ConfigError("oracle script needs rules or a distributional spec");
  return s;
}

nlohmann::ordered_json to_json(const OracleScript& s) {
  nlohmann::ordered_json j;
  j["rng_seed"] = s.rng_seed;
  j["rules"] = nlohmann::ordered_json::array();
  for (const auto& r : s.rules) {
    nlohmann::ordered_json rj;
    rj["match"] = r.match;
    if (r.regex) rj["regex"] = true;
    rj["responses"] = r.responses;
    j["rules"].push_back(std::move(rj));
  }
  if (s.distributional) {
    const auto& d = *s.distributional;
    nlohmann::ordered_json dj;
    dj["similar_marker"] = d.similar_marker;
    dj["label_cues"] = nlohmann::ordered_json::array();
    for (const auto& [label, cue] : d.label_cues) dj["label_cues"].push_back({{"label", label}, {"cue", cue}});
    dj["clusters"] = nlohmann::ordered_json::array();
    for (const auto& c : d.clusters) {
      nlohmann::ordered_json cj;
      cj["name"] = c.name;
      cj["label"] = c.label;
      cj["cues"] = c.cues;
      cj["weight"] = c.weight;
      cj["atoms"] = c.atoms;
      dj["clusters"].push_back(std::move(cj));
    }
    j["distributional"] = std::move(dj);
  }
  return j;
}

OracleScript load_oracle_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open oracle script " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return oracle_script_from_json(j);
}

ScriptedOracle::ScriptedOracle(OracleScript script) : script_(std::move(script)) {
  for (const auto& r : script_.rules) {
    if (r.regex) {
      try {
        compiled_.emplace_back(std::regex(r.match, std::regex::ECMAScript));
      } catch (const std::regex_error& e) {
        throw ConfigError("oracle rule regex '" + r.match + "': " + e.what());
      }
    } else {
      compiled_.emplace_back(std::nullopt);
    }
  }
  id_ = "scripted:" + sha256_hex(to_json(script_).dump()).substr(0, 12);
}

std::vector<std::string> ScriptedOracle::generate(const GenerationRequest& req) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(req.n));
  for (std::size_t i = 0; i < script_.rules.size(); ++i) {
    const auto& rule = script_.rules[i];
    const bool hit = compiled_[i] ? std::regex_search(req.prompt, *compiled_[i])
                                   : req.prompt.find(rule.match) != std::string::npos;
    if (!hit) continue;
    for (int j = 0; j < req.n; ++j) {
      const auto draw = req.sample_index * static_cast<std::uint64_t>(req.n) + static_cast<std::uint64_t>(j);
      out.push_back(rule.responses[draw % rule.responses.size()]);
    }
    return out;
  }
  if (!script_.distributional) {
    throw BackendError(BackendErrorKind::no_rule, "no oracle rule matches prompt: " + req.prompt.substr(0, 120));
  }
  for (int j = 0; j < req.n; ++j) {
    out.push_back(sample_distribution(req.prompt,
                                      req.sample_index * static_cast<std::uint64_t>(req.n) +
                                          static_cast<std::uint64_t>(j)));
  }
  return out;
}

namespace {

double overlap(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::size_t common = 0;
  for (const auto& t : sa) common += sb.count(t);
  const std::size_t uni = sa.size() + sb.size() - common;
  return uni == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(uni);
}

}  // namespace

std::string ScriptedOracle::sample_distribution(const std::string& prompt, std::uint64_t draw) const {
  const auto& d = *script_.distributional;
  const auto marker_pos = d.similar_marker.empty() ? std::string::npos : prompt.find(d.similar_marker);
  const std::string_view head = std::string_view(prompt).substr(0, marker_pos);

  const std::string* label = nullptr;
  for (const auto& [l, cue] : d.label_cues) {
    if (head.find(cue) != std::string_view::npos) {
      label = &l;
      break;
    }
  }
  if (!label) {
    throw BackendError(BackendErrorKind::no_rule,
                       "distributional oracle found no label cue in prompt: " + prompt.substr(0, 120));
  }

  Rng rng(item_seed(splitmix64(script_.rng_seed ^ fnv1a64(prompt)), draw));

  if (marker_pos != std::string::npos) {
    // Exemplar-conditioned: stay inside the exemplar's cluster.
    const auto exemplar = text::normalize_space(prompt.substr(marker_pos + d.similar_marker.size()));
    const OracleCluster* best = nullptr;
    double best_score = -1.0;
    const auto ex_tokens = text::word_tokens(exemplar);
    for (const auto& c : d.clusters) {
      for (const auto& a : c.atoms) {
        double score = text::normalize_space(a) == exemplar ? 2.0 : overlap(text::word_tokens(a), ex_tokens);
        if (score > best_score) {
          best_score = score;
          best = &c;
        }
      }
    }
    if (best && best->label == *label && best_score > 0.0) {
      return best->atoms[rng.below(best->atoms.size())];
    }
  }

  // Unconditioned: clusters of this label, narrowed to those whose cues the prompt mentions.
  const auto lowered = text::to_lower(head);
  std::vector<const OracleCluster*> pool, cued;
  for (const auto& c : d.clusters) {
    if (c.label != *label || c.weight <= 0.0) continue;
    pool.push_back(&c);
    for (const auto& cue : c.cues) {
      if (lowered.find(text::to_lower(cue)) != std::string::npos) {
        cued.push_back(&c);
        break;
      }
    }
  }
  const auto& chosen = cued.empty() ? pool : cued;
  if (chosen.empty()) {
    throw BackendError(BackendErrorKind::no_rule, "distributional oracle has no cluster for label '" + *label + "'");
  }
  std::vector<double> w;
  w.reserve(chosen.size());
  for (const auto* c : chosen) w.push_back(c->weight);
  const auto* cluster = chosen[rng.weighted(w)];
  return cluster->atoms[rng.below(cluster->atoms.size())];
}

}  // namespace s3::llm
