#include <gtest/gtest.h>

#include <fstream>

#include <nlohmann/json.hpp>

#include "s3/common/error.hpp"
#include "s3/metrics/flops.hpp"
#include "s3/metrics/metrics.hpp"
#include "support.hpp"

using namespace s3;
using namespace s3::metrics;
using namespace s3::testing;

TEST(Normalize, ArticlesPunctuationCase) {
  EXPECT_EQ(normalize_answer("The  Eiffel-Tower!"), "eiffeltower");
  EXPECT_EQ(normalize_answer("an apple, a pear"), "apple pear");
  EXPECT_EQ(normalize_answer("theater"), "theater");
  EXPECT_EQ(normalize_answer("   "), "");
}

TEST(TokenF1, HandComputed) {
  // pred tokens {red, car}, gold {red, big, car, park}: P = 1, R = 1/2.
  EXPECT_DOUBLE_EQ(token_f1("the red car", "a red big car park"), 2.0 * 1.0 * 0.5 / 1.5);
  EXPECT_DOUBLE_EQ(token_f1("x x y", "x y y"), 2.0 * (2.0 / 3) * (2.0 / 3) / (4.0 / 3));
  EXPECT_DOUBLE_EQ(token_f1("", "the"), 1.0);
  EXPECT_DOUBLE_EQ(token_f1("", "word"), 0.0);
  EXPECT_DOUBLE_EQ(token_f1("word", ""), 0.0);
}

TEST(EmF1, GoldenCorpusFromIndependentScorer) {
  std::ifstream in(std::string(S3_TEST_DATA_DIR) + "/em_f1_golden.jsonl");
  ASSERT_TRUE(in);
  std::string line;
  int cases = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = nlohmann::json::parse(line);
    const auto pred = c["pred"].get<std::string>();
    const auto gold = c["gold"].get<std::string>();
    EXPECT_EQ(exact_match(pred, gold), c["em"].get<int>()) << pred << " | " << gold;
    EXPECT_NEAR(token_f1(pred, gold), c["f1"].get<double>(), 1e-12) << pred << " | " << gold;
    ++cases;
  }
  EXPECT_EQ(cases, 50);
}

TEST(Accuracy, CountsAndErrors) {
  std::vector<std::string> p{"a", "b", "a", "a"}, g{"a", "a", "a", "b"};
  EXPECT_DOUBLE_EQ(accuracy(p, g), 0.5);
  std::vector<std::string> empty;
  EXPECT_THROW(accuracy(empty, empty), ConfigError);
  EXPECT_THROW(accuracy(p, std::span<const std::string>(g).first(3)), ConfigError);
}

TEST(Evaluate, ClassificationAndQa) {
  auto gold = text_dataset(imdb_task(), {{"x1", "positive"}, {"x2", "negative"}, {"x3", "negative"}}, Stage::gold_val);
  std::vector<std::string> preds{"positive", "positive", "negative"};
  auto r = evaluate(preds, gold);
  EXPECT_EQ(r.n, 3u);
  EXPECT_DOUBLE_EQ(*r.accuracy, 2.0 / 3.0);
  EXPECT_FALSE(r.f1);
  EXPECT_DOUBLE_EQ(r.headline(), 2.0 / 3.0);

  DatasetBuilder b(adqa_task());
  b.add(ContextQA{"c", "two prizes", "q1"}, {});
  b.add(ContextQA{"c", "Paris", "q2"}, {});
  auto qa = std::move(b).build();
  std::vector<std::string> answers{"two", "the Paris"};
  auto q = evaluate(answers, qa);
  EXPECT_DOUBLE_EQ(*q.em, 0.5);
  EXPECT_DOUBLE_EQ(*q.f1, (2.0 / 3.0 + 1.0) / 2.0);
  EXPECT_DOUBLE_EQ(q.headline(), *q.f1);
  EXPECT_TRUE(q.to_json().contains("em"));
  EXPECT_THROW(evaluate(std::vector<std::string>{"x"}, qa), ConfigError);
}

TEST(Flops, PresetArithmetic) {
  const double per_record = 6.0 * 512.0 * 66e6;
  EXPECT_DOUBLE_EQ(per_record, 202752000000.0);

  std::vector<FlopsStage> zerogen{{200000, 10}};
  auto z = flops(66e6, 512, zerogen);
  EXPECT_DOUBLE_EQ(z.per_record_flops, per_record);
  EXPECT_DOUBLE_EQ(z.total, 4.05504e17);

  std::vector<FlopsStage> s3{{51200, 8}, {64000, 8}, {76800, 8}};
  auto s = flops(66e6, 512, s3);
  ASSERT_EQ(s.per_stage.size(), 3u);
  EXPECT_DOUBLE_EQ(s.per_stage[0].flops, 8.30472192e16);
  EXPECT_DOUBLE_EQ(s.total, 3.11427072e17);
  EXPECT_NEAR(s.total / z.total, 0.768, 1e-12);
}

TEST(Flops, RejectsNonPositive) {
  std::vector<FlopsStage> ok{{1, 1}}, bad{{0, 1}}, none;
  EXPECT_THROW(flops(0, 512, ok), ConfigError);
  EXPECT_THROW(flops(1, 512, bad), ConfigError);
  EXPECT_THROW(flops(1, 512, none), ConfigError);
  auto j = flops(2, 3, ok).to_json();
  EXPECT_DOUBLE_EQ(j["total"].get<double>(), 36.0);
}
