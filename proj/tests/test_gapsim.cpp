#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "s3/common/error.hpp"
#include "s3/gapsim/gapsim.hpp"
#include "support.hpp"

using namespace s3;
using namespace s3::gapsim;

namespace {

DiscreteDistribution dist(std::vector<double> p) {
  std::vector<std::string> support;
  for (std::size_t i = 0; i < p.size(); ++i) support.push_back("a" + std::to_string(i));
  return DiscreteDistribution(std::move(support), std::move(p));
}

DiscreteDistribution random_dist(std::mt19937_64& rng, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(n);
  double s = 0;
  for (auto& x : p) s += (x = e(rng));
  for (auto& x : p) x /= s;
  double t = 0;
  for (std::size_t i = 1; i < n; ++i) t += p[i];
  p[0] = 1.0 - t;
  return dist(p);
}

double tv_by_hand(const DiscreteDistribution& a, const DiscreteDistribution& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return s / 2;
}

}  // namespace

TEST(Distribution, Validation) {
  EXPECT_THROW(dist({0.5, 0.6}), ConfigError);
  EXPECT_THROW(dist({-0.1, 1.1}), ConfigError);
  EXPECT_THROW(DiscreteDistribution({"a"}, {0.5, 0.5}), ConfigError);
  EXPECT_THROW(tv_distance(dist({1.0}), dist({0.5, 0.5})), ConfigError);
}

TEST(Tv, Examples) {
  EXPECT_DOUBLE_EQ(tv_distance(dist({0.5, 0.5}), dist({1.0, 0.0})), 0.5);
  EXPECT_DOUBLE_EQ(tv_distance(dist({0.2, 0.3, 0.5}), dist({0.2, 0.3, 0.5})), 0.0);
  EXPECT_DOUBLE_EQ(tv_distance(dist({1.0, 0.0}), dist({0.0, 1.0})), 1.0);
}

TEST(Residual, PositivePartNormalized) {
  auto r = residual_distribution(dist({0.5, 0.3, 0.2}), dist({0.2, 0.3, 0.5}));
  EXPECT_NEAR(r.mass, 0.3, 1e-15);
  EXPECT_DOUBLE_EQ(r.p_add[0], 1.0);
  EXPECT_DOUBLE_EQ(r.p_add[1], 0.0);

  auto r2 = residual_distribution(dist({0.4, 0.4, 0.2}), dist({0.2, 0.2, 0.6}));
  EXPECT_NEAR(r2.mass, 0.4, 1e-15);
  EXPECT_NEAR(r2.p_add[0], 0.5, 1e-15);
  EXPECT_NEAR(r2.p_add[1], 0.5, 1e-15);
  EXPECT_NEAR(r2.mass, tv_distance(dist({0.4, 0.4, 0.2}), dist({0.2, 0.2, 0.6})), 1e-15);

  EXPECT_THROW(residual_distribution(dist({0.5, 0.5}), dist({0.5, 0.5})), NoGapError);
}

TEST(Mix, EndpointsAndRange) {
  const auto a = dist({1.0, 0.0}), s = dist({0.25, 0.75});
  EXPECT_DOUBLE_EQ(mix(a, s, 0.0)[0], 0.25);
  EXPECT_DOUBLE_EQ(mix(a, s, 1.0)[0], 1.0);
  EXPECT_DOUBLE_EQ(mix(a, s, 0.5)[1], 0.375);
  EXPECT_THROW(mix(a, s, 1.5), ConfigError);
  EXPECT_THROW(mix(a, s, -0.1), ConfigError);
}

TEST(OptimalMix, HandInstances) {
  // S = (1, 0), D = (1/2, 1/2): residual (0, 1); tv(p) = |1/2 - p|.
  auto o = optimal_mix_ratio(dist({0.5, 0.5}), dist({1.0, 0.0}), dist({0.0, 1.0}));
  EXPECT_NEAR(o.p, 0.5, 1e-15);
  EXPECT_NEAR(o.tv, 0.0, 1e-15);

  // D = (1/2, 1/4, 1/4), S = (1/4, 1/4, 1/2), residual (1, 0, 0):
  // tv(p) = (|1/4 - 3p/4| + p/4 + |p/2 - 1/4|) / 2, minimized at p = 1/3 with tv = 1/12.
  auto o2 = optimal_mix_ratio(dist({0.5, 0.25, 0.25}), dist({0.25, 0.25, 0.5}), dist({1.0, 0.0, 0.0}));
  EXPECT_NEAR(o2.p, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(o2.tv, 1.0 / 12.0, 1e-12);
}

TEST(OptimalMix, FlatObjectiveTiesToSmallestP) {
  const auto d = dist({0.5, 0.5});
  auto o = optimal_mix_ratio(d, d, d);
  EXPECT_DOUBLE_EQ(o.p, 0.0);
  EXPECT_DOUBLE_EQ(o.tv, 0.0);
}

TEST(OptimalMix, MatchesFineGrid) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto d = random_dist(rng, 5), s = random_dist(rng, 5), a = random_dist(rng, 5);
    const auto o = optimal_mix_ratio(d, s, a);
    double best = 1e9;
    for (int k = 0; k <= 20000; ++k) best = std::min(best, tv_by_hand(mix(a, s, k / 20000.0), d));
    EXPECT_LE(o.tv, best + 1e-12);
    EXPECT_GE(o.tv, best - 1e-4);
    EXPECT_NEAR(o.tv, tv_by_hand(mix(a, s, o.p), d), 1e-12);
  }
}

TEST(OptimalMix, ResidualStepStrictlyReducesGap) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = random_dist(rng, 6), s = random_dist(rng, 6);
    const auto r = residual_distribution(d, s);
    const auto o = optimal_mix_ratio(d, s, r.p_add);
    EXPECT_LT(o.tv, tv_distance(d, s));
    EXPECT_GT(o.p, 0.0);
  }
}

TEST(Simulate, OptimalPolicyDescendsMonotonically) {
  std::mt19937_64 rng(3);
  const auto d = random_dist(rng, 8), s = random_dist(rng, 8);
  auto trace = simulate_ees_rounds(d, s, 25, MixPolicy::optimal());
  ASSERT_GE(trace.steps.size(), 2u);
  EXPECT_NEAR(trace.steps[0].tv, tv_distance(d, s), 1e-15);
  for (std::size_t i = 0; i + 1 < trace.steps.size(); ++i) {
    EXPECT_LT(trace.steps[i + 1].tv, trace.steps[i].tv);
    EXPECT_TRUE(trace.steps[i].p_used);
    EXPECT_NEAR(trace.steps[i + 1].tv, tv_distance(trace.steps[i + 1].dist, d), 1e-15);
  }
  EXPECT_FALSE(trace.steps.back().p_used);
  EXPECT_LT(trace.steps.back().tv, trace.steps.front().tv * 0.5);
}

TEST(Simulate, StopsOnConvergence) {
  // A single-atom residual step closes the gap exactly.
  auto trace = simulate_ees_rounds(dist({0.5, 0.5}), dist({1.0, 0.0}), 10, MixPolicy::optimal());
  ASSERT_EQ(trace.steps.size(), 2u);
  EXPECT_LT(trace.steps[1].tv, kConvergedTv);
}

TEST(Simulate, FixedPolicyAndZeroRounds) {
  auto trace = simulate_ees_rounds(dist({0.5, 0.5}), dist({1.0, 0.0}), 2, MixPolicy::fixed(0.25));
  ASSERT_EQ(trace.steps.size(), 3u);
  EXPECT_DOUBLE_EQ(*trace.steps[0].p_used, 0.25);
  // P1 = (3/4, 1/4): tv 1/4; residual (0,1) again, P2 = (9/16, 7/16): tv 1/16.
  EXPECT_NEAR(trace.steps[1].tv, 0.25, 1e-15);
  EXPECT_NEAR(trace.steps[2].tv, 1.0 / 16.0, 1e-15);
  EXPECT_EQ(simulate_ees_rounds(dist({0.5, 0.5}), dist({1.0, 0.0}), 0, MixPolicy::optimal()).steps.size(), 1u);
  const auto csv = trace.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "round,tv,p_used,P[a0],P[a1]");
  EXPECT_EQ(trace.to_json().size(), 3u);
}

TEST(Simulate, EmpiricalEstimateIsReproducible) {
  const auto d = dist({0.1, 0.2, 0.3, 0.4}), s = dist({0.4, 0.3, 0.2, 0.1});
  auto a = simulate_ees_rounds(d, s, 3, MixPolicy::optimal(), EmpiricalMode{20000, 1});
  auto b = simulate_ees_rounds(d, s, 3, MixPolicy::optimal(), EmpiricalMode{20000, 1});
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    ASSERT_TRUE(a.steps[i].tv_empirical);
    EXPECT_EQ(*a.steps[i].tv_empirical, *b.steps[i].tv_empirical);
    EXPECT_NEAR(*a.steps[i].tv_empirical, a.steps[i].tv, 0.03);
  }
}

TEST(ClassifierGap, BayesDecisionsAndErrorDistribution) {
  const std::vector<std::pair<std::string, std::string>> support{{"x1", "a"}, {"x1", "b"}, {"x2", "a"}, {"x2", "b"}};
  JointDistribution s(support, {0.4, 0.1, 0.3, 0.2});
  JointDistribution d(support, {0.1, 0.4, 0.25, 0.25});
  auto g = simulate_classifier_gap(s, d);
  EXPECT_EQ(g.decisions, (std::vector<std::pair<std::string, std::string>>{{"x1", "a"}, {"x2", "a"}}));
  EXPECT_NEAR(g.error_mass, 0.65, 1e-15);
  EXPECT_DOUBLE_EQ(g.error_dist.probs()[0], 0.0);
  EXPECT_NEAR(g.error_dist.probs()[1], 0.4 / 0.65, 1e-15);
  EXPECT_NEAR(g.error_dist.probs()[3], 0.25 / 0.65, 1e-15);
}

TEST(ClassifierGap, UnseenInputFallsBackToPrior) {
  const std::vector<std::pair<std::string, std::string>> support{{"x1", "a"}, {"x1", "b"}, {"x3", "a"}, {"x3", "b"}};
  JointDistribution s(support, {0.3, 0.7, 0.0, 0.0});
  JointDistribution d(support, {0.0, 0.5, 0.2, 0.3});
  auto g = simulate_classifier_gap(s, d);
  EXPECT_EQ(g.decisions[1], (std::pair<std::string, std::string>{"x3", "b"}));
  EXPECT_NEAR(g.error_mass, 0.2, 1e-15);
  EXPECT_THROW(simulate_classifier_gap(s, JointDistribution(support, {0.0, 1.0, 0.0, 0.0})), NoErrorsError);
}

TEST(Scenario, JsonParsing) {
  auto sc = scenario_from_json(nlohmann::json::parse(R"({
    "support": ["u", "v"], "P_D": [0.5, 0.5], "P_S0": [0.9, 0.1], "rounds": 3,
    "policy": "fixed_p", "p": 0.2, "samples": 100, "seed": 4})"));
  EXPECT_EQ(sc.rounds, 3u);
  EXPECT_EQ(sc.policy.kind, MixPolicy::Kind::fixed_p);
  EXPECT_DOUBLE_EQ(sc.policy.p, 0.2);
  ASSERT_TRUE(sc.empirical);
  EXPECT_EQ(sc.empirical->samples, 100u);
  EXPECT_THROW(scenario_from_json(nlohmann::json::parse(R"({"support":["u"],"P_D":[1],"P_S0":[1],"rounds":-1})")),
               ConfigError);
  EXPECT_THROW(scenario_from_json(nlohmann::json::parse(R"({"support":["u"],"P_D":[1],"P_S0":[1],"policy":"x"})")),
               ConfigError);
}
