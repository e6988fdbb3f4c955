#include <gtest/gtest.h>

#include "s3/common/error.hpp"
#include "s3/core/dataset.hpp"
#include "s3/core/task_spec.hpp"
#include "support.hpp"

using namespace s3;
using namespace s3::testing;

TEST(TaskSpec, DefaultsMatchSamplingSetup) {
  TaskSpec t;
  EXPECT_DOUBLE_EQ(t.sampling.temperature, 0.9);
  EXPECT_EQ(t.ees_rounds, 2u);
  EXPECT_EQ(t.rationale_count, 3u);
  EXPECT_EQ(t.rationales_per_query, 2u);
}

TEST(TaskSpec, ValidationMessages) {
  auto t = imdb_task();
  EXPECT_NO_THROW(validate(*t));
  t->rationales_per_query = 5;
  try {
    validate(*t);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("k exceeds K"), std::string::npos);
  }
  t = imdb_task();
  t->templates.erase(prompting::Role::mis1);
  try {
    validate(*t);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("mis1"), std::string::npos);
  }
}

TEST(TaskSpec, JsonRoundTrip) {
  auto j = nlohmann::json::parse(R"({
    "name": "movies", "kind": "single_text_classification", "builtin_templates": "imdb",
    "seed_size": 10, "ees_rounds": 3, "rationale_count": 4, "rationales_per_query": 2,
    "sampling": {"temperature": 0.7}
  })");
  auto t = task_spec_from_json(j);
  EXPECT_EQ(t.labels, (std::vector<std::string>{"positive", "negative"}));
  EXPECT_EQ(t.seed_size, 10u);
  EXPECT_DOUBLE_EQ(t.sampling.temperature, 0.7);
  auto back = task_spec_from_json(nlohmann::json::parse(to_json(t).dump()));
  EXPECT_EQ(back.templates, t.templates);
  EXPECT_EQ(back.ees_rounds, 3u);
  EXPECT_EQ(back.rationale_count, 4u);
}

TEST(Dataset, RejectsUnknownLabelAndDuplicateIds) {
  auto t = imdb_task();
  EXPECT_THROW(text_dataset(t, {{"x", "neutral"}}), ConfigError);
  Example e{"id1", TextLabel{"a", "positive"}, {}};
  EXPECT_THROW(Dataset(t, {e, e}), ConfigError);
}

TEST(Dataset, RejectsWrongPayloadKind) {
  Example e{"id1", PairLabel{"c", "x", "entailment"}, {}};
  EXPECT_THROW(Dataset(imdb_task(), {e}), ConfigError);
}

TEST(Dataset, AddProvenanceNeedsSource) {
  Provenance p;
  p.stage = Stage::add;
  p.round = 1;
  EXPECT_THROW(validate(p), ConfigError);
  p.source_error_id = "abc";
  EXPECT_NO_THROW(validate(p));
  p.round = 0;
  EXPECT_THROW(validate(p), ConfigError);
}

TEST(DatasetBuilder, ContentIdsWithCollisionSuffix) {
  DatasetBuilder b(imdb_task());
  const auto id1 = b.add(TextLabel{"same text", "positive"}, {}).id;
  const auto id2 = b.add(TextLabel{"same  text ", "positive"}, {}).id;
  EXPECT_EQ(id1.size(), 16u);
  EXPECT_EQ(id1, content_hash(TextLabel{"same text", "positive"}));
  EXPECT_EQ(id2, id1 + "-1");
  EXPECT_EQ(std::move(b).build().size(), 2u);
}

TEST(Merge, ConcatenatesInOrderAndDedups) {
  auto t = imdb_task();
  auto a = text_dataset(t, {{"one", "positive"}, {"two", "negative"}});
  auto b = text_dataset(t, {{"two", "negative"}, {"three", "positive"}});
  std::vector<Dataset> parts{a, b};
  EXPECT_EQ(merge(parts, false).size(), 4u);
  auto d = merge(parts, true);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d[2].target(), "three");
  EXPECT_FALSE(merge(std::vector<Dataset>{}, false).has_task());
}

TEST(Merge, RefusesMixedTasks) {
  std::vector<Dataset> parts{text_dataset(imdb_task(), {{"a", "positive"}}),
                             text_dataset(builtin_task("imdb", TaskKind::single_text_classification), {})};
  auto other = imdb_task();
  other->name = "other";
  parts.push_back(text_dataset(other, {{"b", "negative"}}));
  EXPECT_THROW(merge(parts, false), ConfigError);
}

TEST(DatasetIo, RoundTripIsByteStable) {
  TempDir dir;
  auto t = qnli_task();
  DatasetBuilder b(t);
  Provenance seed;
  b.add(PairLabel{"Paris is in France.", "Where is Paris?", "entailment"}, seed);
  Provenance add;
  add.stage = Stage::add;
  add.round = 1;
  add.source_error_id = "abc";
  add.prompt_hash = "0123456789abcdef";
  b.add(PairLabel{"Ünïcode context", "Is it \"quoted\"?", "not_entailment"}, add);
  auto d = std::move(b).build();
  save_dataset(d, dir / "a.jsonl");
  auto back = load_dataset(dir / "a.jsonl", t);
  EXPECT_TRUE(back.same_examples(d));
  save_dataset(back, dir / "b.jsonl");
  EXPECT_EQ(read_file(dir / "a.jsonl"), read_file(dir / "b.jsonl"));
}

TEST(DatasetIo, QaRecordsKeepFieldOrder) {
  auto t = adqa_task();
  DatasetBuilder b(t);
  b.add(ContextQA{"ctx", "ans", "q?"}, {});
  auto d = std::move(b).build();
  const auto line = serialize_example(d[0]);
  EXPECT_LT(line.find("\"context\""), line.find("\"question\""));
  EXPECT_LT(line.find("\"question\""), line.find("\"answer\""));
}

TEST(DatasetIo, ErrorsCarryLineNumbers) {
  TempDir dir;
  write_file(dir / "bad.jsonl",
             "{\"format\":\"s3-dataset\",\"schema_version\":1,\"task\":\"imdb\"}\n"
             "{\"x\":\"fine\",\"y\":\"positive\"}\n"
             "{\"x\":\"bad\",\"y\":\"z\"}\n");
  try {
    load_dataset(dir / "bad.jsonl", imdb_task(), LoadOptions{Stage::gold_val});
    FAIL();
  } catch (const RecordError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("label 'z' is not in the label set"), std::string::npos);
  }
  write_file(dir / "broken.jsonl", "{not json\n");
  EXPECT_THROW(load_dataset(dir / "broken.jsonl", imdb_task()), RecordError);
}

TEST(DatasetIo, HeaderOptionalAndEmptyFileAllowed) {
  TempDir dir;
  write_file(dir / "plain.jsonl", "{\"x\":\"hello\",\"y\":\"negative\"}\n");
  auto d = load_dataset(dir / "plain.jsonl", imdb_task(), LoadOptions{Stage::gold_test});
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].provenance.stage, Stage::gold_test);
  write_file(dir / "empty.jsonl", "");
  EXPECT_TRUE(load_dataset(dir / "empty.jsonl", imdb_task()).empty());
}
