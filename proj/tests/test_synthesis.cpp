#include <gtest/gtest.h>

#include <map>
#include <set>

#include "s3/common/error.hpp"
#include "s3/llm/response_cache.hpp"
#include "s3/llm/scripted_oracle.hpp"
#include "s3/synthesis/seed.hpp"
#include "support.hpp"

using namespace s3;
using namespace s3::synthesis;
using namespace s3::testing;

namespace {

llm::OracleScript imdb_script() {
  llm::OracleScript s;
  s.rules = {
      {"lead to positive impression", false, {"1. superb acting\n2. gripping plot\n3. memorable soundtrack"}},
      {"lead to negative impression", false, {"1. boring pacing\n2. cheap effects\n3. slow story"}},
      {"write a positive review", false, {"Review: \"a fine film\"", "what a ride"}},
      {"write a negative review", false, {"a dull film", "fell asleep"}},
  };
  return s;
}

std::shared_ptr<TaskSpec> seeded_imdb(std::size_t n) {
  auto t = imdb_task();
  t->seed_size = n;
  return t;
}

}  // namespace

TEST(CleanCompletion, StripsEchoFieldNameAndQuotes) {
  const std::string prompt = "Now you should write a negative review about this movie.";
  EXPECT_EQ(clean_completion("  about this movie. It was bad.", prompt), "It was bad.");
  EXPECT_EQ(clean_completion("Review: \"Loved it\"", prompt), "Loved it");
  EXPECT_EQ(clean_completion("\xE2\x80\x9Csmart quotes\xE2\x80\x9D", prompt), "smart quotes");
  EXPECT_EQ(clean_completion("movie. short", prompt), "movie. short");
  SynthesisOptions keep;
  keep.strip_echo = false;
  EXPECT_EQ(clean_completion("about this movie. It was bad.", prompt, keep), "about this movie. It was bad.");
}

TEST(Rationales, OneListPerLabel) {
  llm::ScriptedOracle o(imdb_script());
  auto r = synthesize_rationales(*imdb_task(), o);
  EXPECT_EQ(r.at("positive"), (std::vector<std::string>{"superb acting", "gripping plot", "memorable soundtrack"}));
  EXPECT_EQ(r.at("negative").size(), 3u);
  auto j = to_json(r, *imdb_task());
  EXPECT_EQ(j.begin().key(), "positive");
  EXPECT_EQ(rationales_from_json(nlohmann::json::parse(j.dump())), r);
}

TEST(Rationales, SingleTextOnly) {
  llm::ScriptedOracle o(imdb_script());
  EXPECT_THROW(synthesize_rationales(*qnli_task(), o), ConfigError);
}

TEST(Seed, ExactSizeProvenanceAndDeterminism) {
  auto t = seeded_imdb(40);
  llm::ScriptedOracle o(imdb_script());
  const auto r = synthesize_rationales(*t, o);
  SynthesisOptions opts;
  opts.parallel = 4;
  auto a = synthesize_seed(t, r, o, 7, opts);
  opts.parallel = 1;
  auto b = synthesize_seed(t, r, o, 7, opts);
  ASSERT_EQ(a.size(), 40u);
  EXPECT_TRUE(a.same_examples(b));
  std::set<std::string> texts;
  for (const auto& e : a) {
    EXPECT_EQ(e.provenance.stage, Stage::seed);
    EXPECT_EQ(e.provenance.round, 0);
    EXPECT_EQ(e.provenance.prompt_hash->size(), 16u);
    texts.insert(e.target());
  }
  EXPECT_TRUE(texts.count("a fine film"));
  EXPECT_FALSE(synthesize_seed(t, r, o, 8).same_examples(a));
}

TEST(Seed, PromptUsesKDistinctRationalesOfTheLabel) {
  auto t = seeded_imdb(30);
  llm::ScriptedOracle inner(imdb_script());
  const auto r = synthesize_rationales(*t, inner);

  // Capture every prompt sent during seed synthesis.
  struct Spy final : llm::Backend {
    llm::Backend& inner;
    std::mutex mu;
    std::vector<std::string> prompts;
    explicit Spy(llm::Backend& b) : inner(b) {}
    std::vector<std::string> generate(const llm::GenerationRequest& q) override {
      std::lock_guard lock(mu);
      prompts.push_back(q.prompt);
      return inner.generate(q);
    }
    std::string id() const override { return inner.id(); }
  } spy(inner);

  auto d = synthesize_seed(t, r, spy, 3);
  ASSERT_EQ(spy.prompts.size(), 30u);
  for (const auto& p : spy.prompts) {
    const bool pos = p.find("write a positive review") != std::string::npos;
    const auto& pool = r.at(pos ? "positive" : "negative");
    std::size_t used = 0;
    for (const auto& phrase : pool) used += p.find(phrase) != std::string::npos ? 1 : 0;
    EXPECT_EQ(used, 2u) << p;
  }
}

TEST(Seed, BalanceAlternatesLabels) {
  auto t = seeded_imdb(10);
  t->balance = true;
  llm::ScriptedOracle o(imdb_script());
  auto d = synthesize_seed(t, synthesize_rationales(*t, o), o, 1);
  std::map<std::string, int> counts;
  for (const auto& e : d) ++counts[*e.label()];
  EXPECT_EQ(counts["positive"], 5);
  EXPECT_EQ(counts["negative"], 5);
}

TEST(Seed, KAboveKIsConfigError) {
  auto t = seeded_imdb(4);
  t->rationales_per_query = 4;
  llm::ScriptedOracle o(imdb_script());
  RationaleSet r{{"positive", {"a", "b", "c"}}, {"negative", {"d", "e", "f"}}};
  EXPECT_THROW(synthesize_seed(t, r, o, 1), ConfigError);
  t->rationales_per_query = 2;
  r["negative"] = {"only"};
  EXPECT_THROW(synthesize_seed(t, r, o, 1), ConfigError);
}

TEST(Seed, UnanswerablePromptExhaustsBudget) {
  auto t = seeded_imdb(2);
  llm::OracleScript s;
  s.rules = {{"impression", false, {"1. a\n2. b\n3. c"}}};
  llm::ScriptedOracle o(s);
  try {
    synthesize_seed(t, synthesize_rationales(*t, o), o, 1);
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendErrorKind::budget_exhausted);
  }
}

TEST(Conditional, PairSeedsKeepContextAndLabel) {
  auto t = qnli_task();
  t->seed_size = 12;
  t->balance = true;
  llm::OracleScript s;
  s.rules = {{"has answers in", false, {"Where is it?"}}, {"has answers not in", false, {"Who won?"}}};
  llm::ScriptedOracle o(s);
  ContextPool pool{{{"Paris is in France.", std::nullopt}, {"Rome is in Italy.", std::nullopt}}};
  auto d = synthesize_seed_conditional(t, pool, o, 5);
  ASSERT_EQ(d.size(), 12u);
  for (const auto& e : d) {
    const auto& p = std::get<PairLabel>(e.payload);
    EXPECT_TRUE(p.context == "Paris is in France." || p.context == "Rome is in Italy.");
    EXPECT_EQ(p.x, p.y == "entailment" ? "Where is it?" : "Who won?");
  }
}

TEST(Conditional, EpochModeCoversPool) {
  auto t = rte_task();
  t->seed_size = 4;
  t->context_epochs = true;
  llm::OracleScript s;
  s.rules = {{"definitely", false, {"A sentence."}}};
  llm::ScriptedOracle o(s);
  ContextPool pool{{{"c1", {}}, {"c2", {}}, {"c3", {}}, {"c4", {}}}};
  auto d = synthesize_seed_conditional(t, pool, o, 9);
  std::set<std::string> used;
  for (const auto& e : d) used.insert(std::get<PairLabel>(e.payload).context);
  EXPECT_EQ(used.size(), 4u);
}

TEST(Conditional, QaNeedsAnswers) {
  auto t = adqa_task();
  t->seed_size = 3;
  llm::OracleScript s;
  s.rules = {{"is the answer to the following question", false, {"How many prizes?"}}};
  llm::ScriptedOracle o(s);
  ContextPool missing{{{"ctx", std::nullopt}}};
  EXPECT_THROW(synthesize_seed_conditional(t, missing, o, 1), ConfigError);
  ContextPool pool{{{"Curie won two prizes.", std::string("two")}}};
  auto d = synthesize_seed_conditional(t, pool, o, 1);
  ASSERT_EQ(d.size(), 3u);
  const auto& qa = std::get<ContextQA>(d[0].payload);
  EXPECT_EQ(qa.answer, "two");
  EXPECT_EQ(qa.question, "How many prizes?");
  EXPECT_THROW(synthesize_seed_conditional(t, ContextPool{}, o, 1), ConfigError);
}

TEST(ContextPoolIo, LoadsAndReportsLine) {
  TempDir dir;
  write_file(dir / "pool.jsonl", "{\"context\":\"a\",\"answer\":\"b\"}\n\n{\"context\":\"c\"}\n");
  auto p = load_context_pool(dir / "pool.jsonl");
  ASSERT_EQ(p.contexts.size(), 2u);
  EXPECT_EQ(*p.contexts[0].answer, "b");
  EXPECT_FALSE(p.contexts[1].answer);
  write_file(dir / "bad.jsonl", "{\"context\":\"a\"}\n{\"nope\":1}\n");
  try {
    load_context_pool(dir / "bad.jsonl");
    FAIL();
  } catch (const RecordError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}
