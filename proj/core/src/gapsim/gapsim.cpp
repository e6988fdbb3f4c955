#include "s3/gapsim/gapsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "s3/common/rng.hpp"

namespace s3::gapsim {

namespace {

void check_probs(const std::vector<double>& probs, std::size_t support_size, const char* what) {
  if (probs.size() != support_size) {
    throw ConfigError(std::string(what) + ": " + std::to_string(probs.size()) + " probabilities for " +
                      std::to_string(support_size) + " atoms");
  }
  if (probs.empty()) throw ConfigError(std::string(what) + ": empty support");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError(std::string(what) + ": negative or non-finite probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > DiscreteDistribution::kTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": probabilities sum to " << sum;
    throw ConfigError(os.str());
  }
}

}  // namespace

DiscreteDistribution::DiscreteDistribution(std::vector<std::string> support, std::vector<double> probs)
    : support_(std::move(support)), probs_(std::move(probs)) {
  check_probs(probs_, support_.size(), "distribution");
}

void require_same_support(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  if (p.support() != q.support()) throw ConfigError("distributions are over different supports");
}

double tv_distance(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  require_same_support(p, q);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

Residual residual_distribution(const DiscreteDistribution& p_d, const DiscreteDistribution& p_s) {
  require_same_support(p_d, p_s);
  std::vector<double> pos(p_d.size());
  double mass = 0.0;
  for (std::size_t i = 0; i < p_d.size(); ++i) {
    pos[i] = std::max(p_d[i] - p_s[i], 0.0);
    mass += pos[i];
  }
  if (!(mass > 0.0)) throw NoGapError("no distribution gap: the synthesized distribution already matches");
  for (double& x : pos) x /= mass;
  // Normalization can leave the sum one ulp-scale off; fold the remainder into the largest atom.
  double sum = 0.0;
  for (double x : pos) sum += x;
  *std::max_element(pos.begin(), pos.end()) += 1.0 - sum;
  return {DiscreteDistribution(p_d.support(), std::move(pos)), mass};
}

DiscreteDistribution mix(const DiscreteDistribution& p_add, const DiscreteDistribution& p_s, double p) {
  require_same_support(p_add, p_s);
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("mix ratio must lie in [0, 1]");
  std::vector<double> out(p_s.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = p * p_add[i] + (1.0 - p) * p_s[i];
  return DiscreteDistribution(p_s.support(), std::move(out));
}

MixOptimum optimal_mix_ratio(const DiscreteDistribution& p_d, const DiscreteDistribution& p_s,
                             const DiscreteDistribution& p_add) {
  require_same_support(p_d, p_s);
  require_same_support(p_d, p_add);
  std::vector<double> candidates{0.0, 1.0};
  for (std::size_t i = 0; i < p_d.size(); ++i) {
    const double slope = p_add[i] - p_s[i];
    if (slope == 0.0) continue;
    const double p = (p_d[i] - p_s[i]) / slope;
    if (p > 0.0 && p < 1.0) candidates.push_back(p);
  }
  std::sort(candidates.begin(), candidates.end());
  MixOptimum best{0.0, tv_distance(mix(p_add, p_s, 0.0), p_d)};
  for (double p : candidates) {
    const double tv = tv_distance(mix(p_add, p_s, p), p_d);
    if (tv < best.tv) best = {p, tv};
  }
  return best;
}

GapTrace simulate_ees_rounds(const DiscreteDistribution& p_d, const DiscreteDistribution& p_s0, std::size_t rounds,
                             MixPolicy policy, std::optional<EmpiricalMode> empirical) {
  require_same_support(p_d, p_s0);
  if (policy.kind == MixPolicy::Kind::fixed_p && !(policy.p >= 0.0 && policy.p <= 1.0)) {
    throw ConfigError("fixed mix ratio must lie in [0, 1]");
  }
  GapTrace trace;
  DiscreteDistribution current = p_s0;
  for (std::size_t q = 0;; ++q) {
    GapStep step;
    step.round = q;
    step.tv = tv_distance(p_d, current);
    step.dist = current;
    if (empirical && empirical->samples > 0) {
      Rng rng(item_seed(empirical->seed, q));
      std::vector<double> counts(current.size(), 0.0);
      for (std::size_t s = 0; s < empirical->samples; ++s) counts[rng.weighted(current.probs())] += 1.0;
      double l1 = 0.0;
      for (std::size_t i = 0; i < counts.size(); ++i) {
        l1 += std::abs(counts[i] / static_cast<double>(empirical->samples) - p_d[i]);
      }
      step.tv_empirical = 0.5 * l1;
    }
    if (q == rounds || step.tv < kConvergedTv) {
      trace.steps.push_back(std::move(step));
      break;
    }
    const auto residual = residual_distribution(p_d, current);
    const double p = policy.kind == MixPolicy::Kind::optimal_p ? optimal_mix_ratio(p_d, current, residual.p_add).p
                                                                : policy.p;
    step.p_used = p;
    trace.steps.push_back(std::move(step));
    current = mix(residual.p_add, current, p);
  }
  return trace;
}

nlohmann::ordered_json GapTrace::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& s : steps) {
    nlohmann::ordered_json e;
    e["round"] = s.round;
    e["tv"] = s.tv;
    e["p_used"] = s.p_used ? nlohmann::ordered_json(*s.p_used) : nlohmann::ordered_json(nullptr);
    if (s.tv_empirical) e["tv_empirical"] = *s.tv_empirical;
    e["support"] = s.dist.support();
    e["probs"] = s.dist.probs();
    j.push_back(std::move(e));
  }
  return j;
}

std::string GapTrace::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  const bool emp = !steps.empty() && steps.front().tv_empirical.has_value();
  os << "round,tv,p_used";
  if (emp) os << ",tv_empirical";
  if (!steps.empty()) {
    for (const auto& a : steps.front().dist.support()) os << ",P[" << a << ']';
  }
  os << '\n';
  for (const auto& s : steps) {
    os << s.round << ',' << s.tv << ',';
    if (s.p_used) os << *s.p_used;
    if (emp) os << ',' << s.tv_empirical.value_or(0.0);
    for (double p : s.dist.probs()) os << ',' << p;
    os << '\n';
  }
  return os.str();
}

JointDistribution::JointDistribution(std::vector<std::pair<std::string, std::string>> support,
                                     std::vector<double> probs)
    : support_(std::move(support)), probs_(std::move(probs)) {
  check_probs(probs_, support_.size(), "joint distribution");
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& a : support_) {
    if (!seen.insert(a).second) throw ConfigError("duplicate atom (" + a.first + ", " + a.second + ")");
  }
}

std::vector<std::string> JointDistribution::labels() const {
  std::vector<std::string> out;
  for (const auto& [x, y] : support_) {
    if (std::find(out.begin(), out.end(), y) == out.end()) out.push_back(y);
  }
  return out;
}

DiscreteDistribution JointDistribution::flatten() const {
  std::vector<std::string> names;
  names.reserve(support_.size());
  for (const auto& [x, y] : support_) names.push_back("(" + x + ", " + y + ")");
  return DiscreteDistribution(std::move(names), probs_);
}

ClassifierGap simulate_classifier_gap(const JointDistribution& s_joint, const JointDistribution& d_joint) {
  if (s_joint.support() != d_joint.support()) throw ConfigError("joint distributions are over different supports");
  const auto& support = s_joint.support();
  const auto labels = s_joint.labels();
  auto label_idx = [&](const std::string& y) {
    return static_cast<std::size_t>(std::find(labels.begin(), labels.end(), y) - labels.begin());
  };

  std::vector<double> prior(labels.size(), 0.0);
  std::vector<std::string> xs;
  std::map<std::string, std::vector<double>> by_x;
  for (std::size_t i = 0; i < support.size(); ++i) {
    const auto& [x, y] = support[i];
    auto [it, fresh] = by_x.try_emplace(x, labels.size(), 0.0);
    if (fresh) xs.push_back(x);
    it->second[label_idx(y)] += s_joint.probs()[i];
    prior[label_idx(y)] += s_joint.probs()[i];
  }
  auto argmax = [](const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < v.size(); ++c) {
      if (v[c] > v[best]) best = c;
    }
    return best;
  };

  ClassifierGap out;
  std::map<std::string, std::size_t> decision;
  for (const auto& x : xs) {
    const auto& row = by_x.at(x);
    const bool has_mass = std::any_of(row.begin(), row.end(), [](double p) { return p > 0.0; });
    const std::size_t c = has_mass ? argmax(row) : argmax(prior);
    decision[x] = c;
    out.decisions.emplace_back(x, labels[c]);
  }

  std::vector<double> err(support.size(), 0.0);
  for (std::size_t i = 0; i < support.size(); ++i) {
    const auto& [x, y] = support[i];
    if (decision.at(x) != label_idx(y)) {
      err[i] = d_joint.probs()[i];
      out.error_mass += d_joint.probs()[i];
    }
  }
  if (!(out.error_mass > 0.0)) throw NoErrorsError("the classifier makes no errors on the target distribution");
  for (double& p : err) p /= out.error_mass;
  double sum = 0.0;
  for (double p : err) sum += p;
  *std::max_element(err.begin(), err.end()) += 1.0 - sum;
  out.error_dist = JointDistribution(support, std::move(err));
  return out;
}

Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  try {
    s.support = j.at("support").get<std::vector<std::string>>();
    s.p_d = DiscreteDistribution(s.support, j.at("P_D").get<std::vector<double>>());
    s.p_s0 = DiscreteDistribution(s.support, j.at("P_S0").get<std::vector<double>>());
    const auto rounds = j.value("rounds", 1LL);
    if (rounds < 0) throw ConfigError("scenario rounds must be >= 0");
    s.rounds = static_cast<std::size_t>(rounds);
    const auto policy = j.value("policy", std::string("optimal_p"));
    if (policy == "optimal_p") {
      s.policy = MixPolicy::optimal();
    } else if (policy == "fixed_p") {
      s.policy = MixPolicy::fixed(j.at("p").get<double>());
      if (!(s.policy.p >= 0.0 && s.policy.p <= 1.0)) throw ConfigError("scenario p must lie in [0, 1]");
    } else {
      throw ConfigError("unknown policy '" + policy + "' (expected optimal_p or fixed_p)");
    }
    if (j.contains("samples")) {
      s.empirical = EmpiricalMode{j.at("samples").get<std::size_t>(), j.value("seed", std::uint64_t{0})};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open scenario " + path.string());
  try {
    return scenario_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("scenario " + path.string() + ": " + e.what());
  }
}

}  // namespace s3::gapsim
