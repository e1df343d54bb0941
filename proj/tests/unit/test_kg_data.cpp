#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "helpers.hpp"

using namespace star;
using namespace star::test;

TEST(Parse, InternsInFirstAppearanceOrder) {
  Vocab v;
  std::istringstream in("a\tr\tb\nb\ts\tc\na\tr\tc\n");
  auto parsed = parse_triples(in, "mem", v, false);
  ASSERT_EQ(parsed.triples.size(), 3u);
  EXPECT_EQ(v.entity_names(), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(v.relation_names(), (std::vector<std::string>{"r", "s"}));
  EXPECT_EQ(parsed.triples[2], (Triple{0, 0, 2}));
}

TEST(Parse, MalformedLineReportsLineNumber) {
  Vocab v;
  std::istringstream in("a\tr\tb\na\tr\n");
  try {
    parse_triples(in, "bad.txt", v, false);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream extra("a\tr\tb\tc\n");
  EXPECT_THROW(parse_triples(extra, "x", v, false), ParseError);
  std::istringstream empty_field("a\t\tb\n");
  EXPECT_THROW(parse_triples(empty_field, "x", v, false), ParseError);
}

TEST(Parse, CrlfAndBlankLinesAreTolerated) {
  Vocab v;
  std::istringstream in("a\tr\tb\r\n\n c\tr\td\r\n");
  auto parsed = parse_triples(in, "mem", v, false);
  EXPECT_EQ(parsed.triples.size(), 2u);
  EXPECT_TRUE(v.find_entity(" c").has_value());  // fields are not trimmed
}

TEST(Parse, DuplicatesAreDroppedAndCounted) {
  Vocab v;
  std::istringstream in("a\tr\tb\na\tr\tb\nb\tr\ta\na\tr\tb\n");
  auto parsed = parse_triples(in, "mem", v, false);
  EXPECT_EQ(parsed.triples.size(), 2u);
  EXPECT_EQ(parsed.duplicates_dropped, 2u);
}

TEST(Parse, FrozenVocabularyRejectsUnknownNames) {
  Vocab v;
  v.intern_entity("a");
  v.intern_entity("b");
  v.intern_relation("r");
  std::istringstream ok("a\tr\tb\n");
  EXPECT_EQ(parse_triples(ok, "mem", v, true).triples.size(), 1u);
  std::istringstream bad_entity("a\tr\tz\n");
  EXPECT_THROW(parse_triples(bad_entity, "mem", v, true), VocabularyError);
  std::istringstream bad_relation("a\tq\tb\n");
  EXPECT_THROW(parse_triples(bad_relation, "mem", v, true), VocabularyError);
  EXPECT_EQ(v.num_entities(), 2u);
}

TEST(Store, ReciprocalIdsAreOffsetByRelationCount) {
  auto store = make_store("a r b; b s c");
  ASSERT_EQ(store.num_relations(), 2u);
  EXPECT_EQ(store.reciprocal(0), 2);
  EXPECT_EQ(store.reciprocal(3), 1);
  EXPECT_TRUE(store.is_reciprocal(2));
  EXPECT_FALSE(store.is_reciprocal(1));
  EXPECT_EQ(store.original(3), 1);
  auto aug = store.augmented_train();
  EXPECT_EQ(aug.size(), 4u);
  for (const auto& t : store.train()) {
    auto rt = store.reciprocal(t);
    EXPECT_NE(std::find(aug.begin(), aug.end(), rt), aug.end());
    EXPECT_EQ(store.reciprocal(rt), t);
  }
}

// Filter index against a brute-force scan of all three splits.
TEST(Store, FilterIndexMatchesBruteForce) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto store = random_store(12, 3, 40, 8, 8, seed);
    std::map<std::pair<EntityId, RelationId>, std::set<EntityId>> oracle;
    for (auto split : {Split::Train, Split::Valid, Split::Test})
      for (const auto& t : store.split(split)) {
        oracle[{t.head, t.relation}].insert(t.tail);
        oracle[{t.tail, store.reciprocal(t.relation)}].insert(t.head);
      }
    for (EntityId e = 0; e < 12; ++e)
      for (RelationId r = 0; r < 6; ++r) {
        auto known = store.known_answers(e, r);
        std::vector<EntityId> got(known.begin(), known.end());
        auto it = oracle.find({e, r});
        std::vector<EntityId> want;
        if (it != oracle.end()) want.assign(it->second.begin(), it->second.end());
        EXPECT_EQ(got, want) << "entity " << e << " relation " << r;
      }
  }
}

TEST(Store, EntitiesAbsentFromTrainAreFlagged) {
  auto store = make_store("a r b", "", "a r c");
  EXPECT_EQ(store.num_absent_from_train(), 1u);
  EXPECT_TRUE(store.absent_from_train()[static_cast<std::size_t>(*store.vocab().find_entity("c"))]);
}

TEST(Store, SaveLoadRoundTripIsExact) {
  TempDir dir;
  auto store = random_store(15, 4, 50, 5, 5, 11);
  save_store(store, dir.path());
  auto back = load_store(dir.path());
  EXPECT_EQ(back.vocab(), store.vocab());
  EXPECT_EQ(back.train(), store.train());
  EXPECT_EQ(back.valid(), store.valid());
  EXPECT_EQ(back.test(), store.test());
  auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  EXPECT_EQ(manifest["train"], 50);
}

TEST(Store, LoadDatasetWithoutValidOrTest) {
  TempDir dir;
  write_file(dir / "train.txt", "a\tr\tb\nb\tr\tc\n");
  auto store = load_dataset(dir.path());
  EXPECT_EQ(store.train().size(), 2u);
  EXPECT_TRUE(store.valid().empty());
}

TEST(Classify, ThresholdSplitsCategories) {
  EXPECT_EQ(categorize(1.0, 1.0), RelationCategory::OneToOne);
  EXPECT_EQ(categorize(1.5, 1.5), RelationCategory::OneToOne);  // strictly greater than 1.5
  EXPECT_EQ(categorize(1.6, 1.0), RelationCategory::OneToMany);
  EXPECT_EQ(categorize(1.0, 2.0), RelationCategory::ManyToOne);
  EXPECT_EQ(categorize(3.0, 3.0), RelationCategory::ManyToMany);
}

// Recount tphr/hptr by grouping directly.
TEST(Classify, MatchesGroupedRecount) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto store = random_store(10, 4, 60, 0, 0, seed + 100);
    auto cls = classify_relations(store);
    for (const auto& c : cls.classes) {
      std::map<EntityId, int> by_head, by_tail;
      int n = 0;
      for (const auto& t : store.train())
        if (t.relation == c.relation) {
          ++by_head[t.head];
          ++by_tail[t.tail];
          ++n;
        }
      EXPECT_DOUBLE_EQ(c.tphr, static_cast<double>(n) / static_cast<double>(by_head.size()));
      EXPECT_DOUBLE_EQ(c.hptr, static_cast<double>(n) / static_cast<double>(by_tail.size()));
      EXPECT_EQ(c.category, categorize(c.tphr, c.hptr));
    }
  }
}

TEST(Classify, RelationsWithoutTrainTriplesAreExcluded) {
  auto store = make_store("a r b", "", "a s b");
  auto cls = classify_relations(store);
  ASSERT_EQ(cls.excluded.size(), 1u);
  EXPECT_EQ(cls.excluded[0], *store.vocab().find_relation("s"));
  EXPECT_FALSE(cls.category_of(cls.excluded[0]).has_value());
}

TEST(Classify, FanInIsManyToOne) {
  auto store = make_store("a r x; b r x; c r x; d r y; e r y");
  auto cls = classify_relations(store);
  ASSERT_EQ(cls.classes.size(), 1u);
  EXPECT_DOUBLE_EQ(cls.classes[0].tphr, 1.0);
  EXPECT_DOUBLE_EQ(cls.classes[0].hptr, 2.5);
  EXPECT_EQ(cls.classes[0].category, RelationCategory::ManyToOne);
}

TEST(Frequency, CountsPerSide) {
  auto store = make_store("a r b; c r b; a s c");
  auto tails = entity_frequency(store, Side::Tail);
  auto heads = entity_frequency(store, Side::Head);
  auto id = [&](const char* n) { return static_cast<std::size_t>(*store.vocab().find_entity(n)); };
  EXPECT_EQ(tails.counts[id("b")], 2u);
  EXPECT_EQ(tails.counts[id("c")], 1u);
  EXPECT_EQ(tails.max, 2u);
  EXPECT_EQ(heads.counts[id("a")], 2u);
  EXPECT_EQ(heads.counts[id("b")], 0u);
}
