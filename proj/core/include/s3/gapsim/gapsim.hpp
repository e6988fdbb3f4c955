#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "s3/common/error.hpp"

namespace s3::gapsim {

/// Raised when the synthesized distribution already equals the target.
class NoGapError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Raised when a classifier makes no errors on the target distribution.
class NoErrorsError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Probabilities over an ordered finite support of opaque atoms.
class DiscreteDistribution {
 public:
  /// Sum tolerance for validation.
  static constexpr double kTolerance = 1e-12;

  DiscreteDistribution() = default;
  /// Throws unless sizes match, probs >= 0 and the sum is 1 within tolerance.
  DiscreteDistribution(std::vector<std::string> support, std::vector<double> probs);

  const std::vector<std::string>& support() const noexcept { return support_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_.at(i); }

 private:
  std::vector<std::string> support_;
  std::vector<double> probs_;
};

/// Throws ConfigError unless both have the same support in the same order.
void require_same_support(const DiscreteDistribution& p, const DiscreteDistribution& q);

/// Half the L1 distance.
double tv_distance(const DiscreteDistribution& p, const DiscreteDistribution& q);

struct Residual {
  DiscreteDistribution p_add;
  /// Positive-part mass; equals tv_distance(p_d, p_s).
  double mass = 0.0;
};

/// Normalized positive part of p_d - p_s. Throws NoGapError when it is empty.
Residual residual_distribution(const DiscreteDistribution& p_d, const DiscreteDistribution& p_s);

/// p * p_add + (1 - p) * p_s.
DiscreteDistribution mix(const DiscreteDistribution& p_add, const DiscreteDistribution& p_s, double p);

struct MixOptimum {
  double p = 0.0;
  double tv = 0.0;
};

/// Exact minimizer of tv(mix(p_add, p_s, p), p_d) over [0, 1]. The objective is convex
/// and piecewise linear, so it is evaluated at every breakpoint and both endpoints;
/// ties go to the smallest p.
MixOptimum optimal_mix_ratio(const DiscreteDistribution& p_d, const DiscreteDistribution& p_s,
                             const DiscreteDistribution& p_add);

struct MixPolicy {
  enum class Kind { optimal_p, fixed_p } kind = Kind::optimal_p;
  double p = 0.0;  ///< used by fixed_p

  static MixPolicy optimal() { return {}; }
  static MixPolicy fixed(double p) { return {Kind::fixed_p, p}; }
};

struct GapStep {
  std::size_t round = 0;
  double tv = 0.0;
  /// Ratio applied to move to the next round; absent on the last entry.
  std::optional<double> p_used;
  std::optional<double> tv_empirical;
  DiscreteDistribution dist;
};

struct GapTrace {
  std::vector<GapStep> steps;

  nlohmann::ordered_json to_json() const;
  std::string to_csv() const;
};

/// Estimate tv against the current iterate from `n` draws per round.
struct EmpiricalMode {
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

/// Iterates P(q+1) = mix(residual(P_D, P(q)), P(q), p_q) for at most `rounds` steps,
/// stopping once tv < 1e-12.
GapTrace simulate_ees_rounds(const DiscreteDistribution& p_d, const DiscreteDistribution& p_s0, std::size_t rounds,
                             MixPolicy policy, std::optional<EmpiricalMode> empirical = std::nullopt);

inline constexpr double kConvergedTv = 1e-12;

/// Distribution over (x, y) atoms.
class JointDistribution {
 public:
  JointDistribution() = default;
  JointDistribution(std::vector<std::pair<std::string, std::string>> support, std::vector<double> probs);

  const std::vector<std::pair<std::string, std::string>>& support() const noexcept { return support_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return probs_.size(); }
  /// Labels in order of first appearance in the support.
  std::vector<std::string> labels() const;
  DiscreteDistribution flatten() const;

 private:
  std::vector<std::pair<std::string, std::string>> support_;
  std::vector<double> probs_;
};

struct ClassifierGap {
  double error_mass = 0.0;
  JointDistribution error_dist;
  /// x -> predicted label under the S-trained Bayes classifier.
  std::vector<std::pair<std::string, std::string>> decisions;
};

/// Bayes classifier argmax_y S(y|x) (ties to the lower label index; x without S-mass
/// falls back to the S-prior argmax) scored against D. Throws NoErrorsError when the
/// error event has zero D-mass.
ClassifierGap simulate_classifier_gap(const JointDistribution& s_joint, const JointDistribution& d_joint);

struct Scenario {
  std::vector<std::string> support;
  DiscreteDistribution p_d;
  DiscreteDistribution p_s0;
  std::size_t rounds = 0;
  MixPolicy policy;
  std::optional<EmpiricalMode> empirical;
};

/// {support, P_D, P_S0, rounds, policy: "optimal_p" | "fixed_p", p?, samples?, seed?}
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace s3::gapsim
