#include <benchmark/benchmark.h>

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "s3/core/dataset.hpp"
#include "s3/diversity/diversity.hpp"
#include "s3/gapsim/gapsim.hpp"
#include "s3/prompting/template.hpp"
#include "s3/trainer/naive_bayes.hpp"

namespace {

std::string random_text(std::mt19937_64& rng, std::size_t words) {
  static const std::vector<std::string> vocab{"film", "plot",   "acting", "dull", "great", "music", "slow",
                                              "fun",  "boring", "score",  "cast", "weak",  "story", "bright"};
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  std::string s;
  for (std::size_t i = 0; i < words; ++i) s += (i ? " " : "") + vocab[pick(rng)];
  return s;
}

std::shared_ptr<s3::TaskSpec> imdb() {
  auto t = std::make_shared<s3::TaskSpec>();
  t->name = "imdb";
  t->kind = s3::TaskKind::single_text_classification;
  auto b = s3::prompting::builtin_templates("imdb");
  t->templates = b.templates;
  t->labels = b.labels;
  return t;
}

s3::Dataset random_dataset(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  s3::DatasetBuilder b(imdb());
  for (std::size_t i = 0; i < n; ++i) {
    b.add(s3::TextLabel{random_text(rng, 20), i % 2 ? "negative" : "positive"}, {});
  }
  return std::move(b).build();
}

void BM_EditDistance(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto a = random_text(rng, static_cast<std::size_t>(state.range(0)));
  const auto b = random_text(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(s3::diversity::edit_distance(a, b));
}
BENCHMARK(BM_EditDistance)->Arg(10)->Arg(50)->Arg(200);

void BM_CoverageRate(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-10, 10);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<s3::diversity::Point2> gold(n), syn(n);
  for (auto& p : gold) p = {u(rng), u(rng)};
  for (auto& p : syn) p = {u(rng), u(rng)};
  for (auto _ : state) benchmark::DoNotOptimize(s3::diversity::coverage_rate(gold, syn, 0.5));
}
BENCHMARK(BM_CoverageRate)->Arg(200)->Arg(2000);

void BM_NaiveBayesTrain(benchmark::State& state) {
  const auto d = random_dataset(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(s3::trainer::NaiveBayesModel(d, 1.0).vocabulary_size());
}
BENCHMARK(BM_NaiveBayesTrain)->Arg(1000)->Arg(10000);

void BM_NaiveBayesPredict(benchmark::State& state) {
  const auto train = random_dataset(2000, 4);
  const auto test = random_dataset(static_cast<std::size_t>(state.range(0)), 5);
  const s3::trainer::NaiveBayesModel m(train, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(m.predict(test).size());
}
BENCHMARK(BM_NaiveBayesPredict)->Arg(1000);

void BM_OptimalMixRatio(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(6);
  std::exponential_distribution<double> e(1.0);
  auto dist = [&] {
    std::vector<double> w(n);
    double sum = 0;
    for (auto& x : w) sum += (x = e(rng));
    double rest = 1.0;
    for (std::size_t i = 0; i + 1 < n; ++i) rest -= (w[i] /= sum);
    w[n - 1] = std::max(0.0, rest);
    std::vector<std::string> support;
    for (std::size_t i = 0; i < n; ++i) support.push_back("a" + std::to_string(i));
    return s3::gapsim::DiscreteDistribution(support, w);
  };
  const auto d = dist(), s = dist();
  const auto add = s3::gapsim::residual_distribution(d, s).p_add;
  for (auto _ : state) benchmark::DoNotOptimize(s3::gapsim::optimal_mix_ratio(d, s, add).p);
}
BENCHMARK(BM_OptimalMixRatio)->Arg(8)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
