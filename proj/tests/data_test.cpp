#include <gtest/gtest.h>

#include <cstring>
#include <sstream>

#include "vist/data/dataset.hpp"
#include "vist/data/synth.hpp"
#include "vist/numerics/random.hpp"

namespace vist::data {
namespace {

StoryLoad parse(const std::string& s) {
  std::istringstream is(s);
  return parse_stories(is);
}

std::string entry(const std::string& id, int pos, const std::string& split = "test") {
  return R"({"story_id":")" + id + R"(","position":)" + std::to_string(pos) + R"(,"photo_id":")" + id + "_" +
         std::to_string(pos) + R"(","text":"text )" + std::to_string(pos) + R"(","split":")" + split + "\"}\n";
}

std::string message_of(const std::string& input) {
  try {
    parse(input);
  } catch (const FormatError& e) {
    return e.what();
  }
  return "";
}

TEST(Stories, OneCompleteStory) {
  const auto load = parse(
      R"({"story_id":"s1","photos":["a","b","c","d","e"],"texts":["1","2","3","4","5"],"split":"train"})"
      "\n");
  ASSERT_EQ(load.records.size(), 1u);
  EXPECT_EQ(load.kept, 1u);
  EXPECT_EQ(load.records[0].photos[4], "e");
  EXPECT_EQ(load.records[0].texts[0], "1");
  EXPECT_EQ(load.records[0].split, "train");
}

TEST(Stories, EntriesAreOrderedByPosition) {
  const auto load = parse(entry("s", 3) + entry("s", 1) + entry("s", 5) + entry("s", 2) + entry("s", 4));
  ASSERT_EQ(load.records.size(), 1u);
  for (int k = 0; k < 5; ++k) EXPECT_EQ(load.records[0].photos[k], "s_" + std::to_string(k + 1));
}

TEST(Stories, FourImagesDropped) {
  const auto load = parse(entry("short", 1) + entry("short", 2) + entry("short", 3) + entry("short", 4) +
                          entry("ok", 1) + entry("ok", 2) + entry("ok", 3) + entry("ok", 4) + entry("ok", 5));
  EXPECT_EQ(load.kept, 1u);
  EXPECT_EQ(load.dropped, 1u);
  ASSERT_EQ(load.warnings.size(), 1u);
  EXPECT_NE(load.warnings[0].find("short"), std::string::npos);
  EXPECT_EQ(load.records[0].story_id, "ok");
}

TEST(Stories, BadPositionNamesLine) {
  const auto msg = message_of(entry("s", 1) + entry("s", 7));
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("position"), std::string::npos) << msg;
}

TEST(Stories, MissingFieldNamesLine) {
  const auto msg =
      message_of(entry("s", 1) + "\n" + R"({"story_id":"s","position":2,"text":"x","split":"test"})" + "\n");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("photo_id"), std::string::npos) << msg;
}

TEST(Stories, InvalidJsonNamesLine) { EXPECT_NE(message_of("{nope\n").find("line 1"), std::string::npos); }

TEST(Stories, DuplicateAndSplitConflicts) {
  const std::string whole =
      R"({"story_id":"s","photos":["a","b","c","d","e"],"texts":["1","2","3","4","5"],"split":"train"})"
      "\n";
  try {
    parse(whole + whole);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.kind(), FormatError::Kind::kDuplicate);
  }
  EXPECT_THROW(parse(entry("s", 1, "train") + entry("s", 2, "test")), FormatError);
  EXPECT_THROW(parse(entry("s", 1) + entry("s", 1)), FormatError);
}

std::vector<StoryRecord> random_records(std::size_t n, Rng& rng) {
  const char* splits[] = {"train", "val", "test"};
  std::vector<StoryRecord> out;
  for (std::size_t s = 0; s < n; ++s) {
    StoryRecord r;
    r.story_id = std::to_string(40000 + s);
    r.split = splits[uniform_index(rng, 3)];
    for (std::size_t k = 0; k < kNumImages; ++k) {
      r.photos[k] = std::to_string(uniform_index(rng, 1u << 30));
      std::string text;
      const auto words = 1 + uniform_index(rng, 12);
      for (std::uint64_t w = 0; w < words; ++w) {
        const auto letter = static_cast<char>('a' + uniform_index(rng, 26));
        text += (w ? " " : "") + std::string(1 + uniform_index(rng, 6), letter);
      }
      if (uniform_index(rng, 4) == 0) text += " \"quoted\" \\ café .";
      r.texts[k] = text;
    }
    out.push_back(std::move(r));
  }
  return out;
}

TEST(Stories, PublicTestSizedRoundTrip) {
  Rng rng(1938);
  const auto records = random_records(1938, rng);
  std::ostringstream os;
  write_stories(os, records);
  std::istringstream is(os.str());
  const auto load = parse_stories(is);
  EXPECT_EQ(load.kept, 1938u);
  EXPECT_EQ(load.dropped, 0u);
  EXPECT_EQ(load.records, records);
  std::ostringstream again;
  write_stories(again, load.records);
  EXPECT_EQ(again.str(), os.str());
}

TEST(Stories, FilterSplitPartitions) {
  Rng rng(4);
  const auto records = random_records(60, rng);
  const auto train = filter_split(records, "train");
  const auto val = filter_split(records, "val");
  const auto test = filter_split(records, "test");
  EXPECT_EQ(train.size() + val.size() + test.size(), records.size());
  std::set<std::string> ids;
  for (const auto* part : {&train, &val, &test}) {
    for (const auto& r : *part) EXPECT_TRUE(ids.insert(r.story_id).second);
  }
}

TEST(Embeddings, HundredVectorsBitExact) {
  Rng rng(100);
  EmbeddingStore store(37);
  for (int i = 0; i < 100; ++i) {
    std::vector<float> v(37);
    for (auto& x : v) x = static_cast<float>(standard_normal(rng) * 1e3);
    v[0] = i == 7 ? -0.0f : v[0];
    v[1] = i == 9 ? std::numeric_limits<float>::denorm_min() : v[1];
    store.insert("photo" + std::to_string(i), std::move(v));
  }
  const auto back = deserialize_embeddings(serialize_embeddings(store));
  ASSERT_EQ(back.size(), 100u);
  for (const auto& [id, v] : store.entries()) {
    const auto& w = back.at(id);
    EXPECT_EQ(std::memcmp(v.data(), w.data(), v.size() * sizeof(float)), 0) << id;
  }
  EXPECT_EQ(serialize_embeddings(back), serialize_embeddings(store));
}

FormatError::Kind kind_of(std::string_view bytes) {
  try {
    deserialize_embeddings(bytes);
  } catch (const FormatError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "accepted";
  return FormatError::Kind::kMalformed;
}

TEST(Embeddings, DuplicateIdInFile) {
  EmbeddingStore store(2);
  store.insert("a", {1, 2});
  auto bytes = serialize_embeddings(store);
  // Declare two entries and repeat the only one.
  bytes[8] = 2;
  bytes += bytes.substr(16);
  EXPECT_EQ(kind_of(bytes), FormatError::Kind::kDuplicate);
  EXPECT_THROW(store.insert("a", {3, 4}), FormatError);
}

TEST(Embeddings, TruncationAndCorruption) {
  EmbeddingStore store(3);
  store.insert("a", {1, 2, 3});
  store.insert("b", {4, 5, 6});
  const auto bytes = serialize_embeddings(store);
  for (std::size_t len = 0; len < bytes.size(); ++len) {
    EXPECT_EQ(kind_of(std::string_view(bytes).substr(0, len)), FormatError::Kind::kTruncated) << len;
  }
  auto bad = bytes;
  bad[1] = 'X';
  EXPECT_EQ(kind_of(bad), FormatError::Kind::kCorrupt);
  bad = bytes;
  bad[4] = 9;
  EXPECT_EQ(kind_of(bad), FormatError::Kind::kVersionMismatch);
}

TEST(Embeddings, DimensionMismatchOnInsert) {
  EmbeddingStore store(4);
  EXPECT_THROW(store.insert("a", {1, 2, 3}), DimensionError);
}

TEST(Embeddings, EmptyStoreNamesMissingPhoto) {
  const EmbeddingStore store(8);
  StoryRecord rec{"s", {"p1", "p2", "p3", "p4", "p5"}, {"a", "b", "c", "d", "e"}, "test"};
  try {
    check_joined(store, {rec});
    FAIL();
  } catch (const MissingEmbedding& e) {
    EXPECT_EQ(e.photo_id(), "p1");
    EXPECT_NE(std::string(e.what()).find("p1"), std::string::npos);
  }
  const auto vocab = text::Vocab::build({{"a"}}, 1);
  EXPECT_THROW(build_examples<double>({rec}, store, vocab), MissingEmbedding);
}

TEST(Synth, SameSeedIsIdentical) {
  SynthConfig cfg;
  cfg.n_stories = 25;
  const auto a = synth_dataset(cfg);
  const auto b = synth_dataset(cfg);
  EXPECT_EQ(a.records, b.records);
  EXPECT_EQ(serialize_embeddings(a.store), serialize_embeddings(b.store));
  cfg.seed = 2;
  EXPECT_NE(synth_dataset(cfg).records, a.records);
}

TEST(Synth, MarkersByPosition) {
  SynthConfig cfg;
  cfg.n_stories = 200;
  const auto ds = synth_dataset(cfg);
  for (const auto& r : ds.records) {
    for (std::size_t k = 0; k < kNumImages; ++k) {
      const auto tokens = text::tokenize(r.texts[k]);
      const bool opener = std::count(tokens.begin(), tokens.end(), cfg.vocab.opener) > 0;
      const bool closer = std::count(tokens.begin(), tokens.end(), cfg.vocab.closer) > 0;
      EXPECT_EQ(opener, k == 0) << r.story_id << " " << k;
      EXPECT_EQ(closer, k == 4) << r.story_id << " " << k;
    }
  }
}

TEST(Synth, UnitNormEmbeddingsAndSplits) {
  SynthConfig cfg;
  cfg.n_stories = 20;
  cfg.val_fraction = 0.1;
  cfg.test_fraction = 0.25;
  const auto ds = synth_dataset(cfg);
  EXPECT_EQ(filter_split(ds.records, "train").size(), 13u);
  EXPECT_EQ(filter_split(ds.records, "val").size(), 2u);
  EXPECT_EQ(filter_split(ds.records, "test").size(), 5u);
  check_joined(ds.store, ds.records);
  for (const auto& [id, v] : ds.store.entries()) {
    double sq = 0;
    for (float x : v) sq += static_cast<double>(x) * x;
    EXPECT_NEAR(std::sqrt(sq), 1.0, 1e-5) << id;
  }
}

TEST(Synth, RejectsEmpty) {
  SynthConfig cfg;
  cfg.n_stories = 0;
  EXPECT_THROW(synth_dataset(cfg), InvalidArgument);
}

}  // namespace
}  // namespace vist::data
