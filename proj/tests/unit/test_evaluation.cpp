#include <gtest/gtest.h>

#include <algorithm>

#include "helpers.hpp"

using namespace star;
using namespace star::test;

namespace {

// Sort-based oracle: drop the other known answers, sort candidates by score
// descending, then place the answer before (random) or after (pessimistic) its ties.
std::size_t sort_rank(const std::vector<double>& scores, EntityId answer, const std::set<EntityId>& known,
                      TieRule tie, std::uint64_t seed, std::size_t qi) {
  std::vector<std::pair<double, EntityId>> cands;
  for (std::size_t e = 0; e < scores.size(); ++e) {
    auto id = static_cast<EntityId>(e);
    if (id != answer && known.count(id)) continue;
    cands.emplace_back(scores[e], id);
  }
  std::stable_sort(cands.begin(), cands.end(), [](auto& a, auto& b) { return a.first > b.first; });
  const double target = scores[static_cast<std::size_t>(answer)];
  std::size_t first = 0, ties = 0;
  for (auto& [s, id] : cands) {
    if (s > target) ++first;
    if (s == target && id != answer) ++ties;
  }
  if (tie == TieRule::Pessimistic) return first + ties + 1;
  return first + 1 + static_cast<std::size_t>(splitmix64(seed ^ splitmix64(qi)) % (ties + 1));
}

// Coarsen scores so that ties actually happen.
void quantize(EmbeddingTable& t) {
  for (auto& v : t.entities.flat()) v = std::round(v * 2.0) / 2.0;
  for (auto& v : t.rel_c.flat()) v = std::round(v * 2.0) / 2.0;
  for (auto& v : t.rel_tau.flat()) v = std::round(v * 2.0) / 2.0;
}

}  // namespace

TEST(Rank, MatchesSortOracleUnderBothTieRules) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto store = random_store(12, 3, 30, 6, 8, seed);
    auto table = random_table(12, 3, 4, ModelKind::STaR, seed, 0.8);
    if (seed % 2 == 0) quantize(table);
    for (auto tie : {TieRule::Pessimistic, TieRule::Random}) {
      EvalOptions opts{tie, seed * 7 + 1, 1, Direction::Both};
      auto report = evaluate(table, store, Split::Test, nullptr, opts);
      auto queries = make_queries(store, store.test(), Direction::Both);
      ASSERT_EQ(report.ranks.size(), queries.size());
      for (std::size_t i = 0; i < queries.size(); ++i) {
        const auto& q = queries[i];
        std::vector<double> scores(12);
        for (EntityId e = 0; e < 12; ++e) scores[static_cast<std::size_t>(e)] = score(table, q.entity, q.relation, e);
        auto known_span = store.known_answers(q.entity, q.relation);
        std::set<EntityId> known(known_span.begin(), known_span.end());
        EXPECT_EQ(report.ranks[i], sort_rank(scores, q.answer, known, tie, opts.seed, i)) << "query " << i;
      }
    }
  }
}

TEST(Rank, TiesArePessimisticByDefault) {
  std::vector<double> scores{1.0, 2.0, 2.0, 2.0, 0.5};
  std::vector<EntityId> known{1};
  EXPECT_EQ(rank_from_scores(scores, 1, known, TieRule::Pessimistic, 0, 0), 3u);
  std::vector<EntityId> known2{1, 2};
  EXPECT_EQ(rank_from_scores(scores, 1, known2, TieRule::Pessimistic, 0, 0), 2u);
  for (std::size_t qi = 0; qi < 50; ++qi) {
    auto r = rank_from_scores(scores, 1, known, TieRule::Random, 99, qi);
    EXPECT_GE(r, 1u);
    EXPECT_LE(r, 3u);
  }
}

TEST(Rank, RandomTieOffsetIsUniformish) {
  // 3 ties -> offsets 0..3; each should appear about a quarter of the time.
  std::array<int, 4> counts{};
  const int n = 40000;
  for (int i = 0; i < n; ++i) ++counts[random_tie_offset(5, static_cast<std::size_t>(i), 3)];
  for (int c : counts) EXPECT_NEAR(static_cast<double>(c) / n, 0.25, 0.01);  // ~4.6 sd of a binomial proportion
}

TEST(Rank, QueryOutsideFilterIsContractViolation) {
  auto store = make_store("a r b; b r c", "", "a r c");
  auto table = random_table(3, 1, 2, ModelKind::STaR, 1);
  EXPECT_THROW(filtered_rank(table, store, Query{2, 0, 0}), ContractViolation);
  EXPECT_NO_THROW(filtered_rank(table, store, Query{0, 0, 2}));
}

TEST(Report, MetricInvariants) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto store = random_store(15, 3, 40, 10, 10, seed + 50);
    auto table = random_table(15, 3, 4, ModelKind::STaR, seed);
    auto cls = classify_relations(store);
    auto r = evaluate(table, store, Split::Valid, &cls);
    EXPECT_GT(r.mrr, 0.0);
    EXPECT_LE(r.mrr, 1.0);
    EXPECT_LE(r.hits.at(1), r.hits.at(3));
    EXPECT_LE(r.hits.at(3), r.hits.at(10));
    EXPECT_LE(r.hits.at(1), r.mrr);  // every hit@1 contributes 1 to the MRR sum
    EXPECT_EQ(r.num_queries, 2 * store.valid().size());
    double weighted = 0.0;
    std::size_t total = 0;
    for (const auto& rel : r.per_relation) {
      weighted += rel.mrr * static_cast<double>(rel.queries);
      total += rel.queries;
      EXPECT_EQ(rel.queries, 2 * rel.triples);
    }
    EXPECT_EQ(total, r.num_queries);
    EXPECT_NEAR(weighted / static_cast<double>(total), r.mrr, 1e-12);
    std::size_t class_total = 0;
    for (const auto& [cat, m] : r.per_class) class_total += m.queries;
    EXPECT_LE(class_total, r.num_queries);
  }
}

TEST(Report, DirectionsPartitionTheQueries) {
  auto store = random_store(10, 2, 20, 0, 8, 3);
  auto table = random_table(10, 2, 4, ModelKind::STaR, 3);
  auto both = evaluate(table, store, Split::Test);
  auto tail = evaluate(table, store, Split::Test, nullptr, {TieRule::Pessimistic, 0, 1, Direction::Tail});
  auto head = evaluate(table, store, Split::Test, nullptr, {TieRule::Pessimistic, 0, 1, Direction::Head});
  EXPECT_NEAR(both.mrr, (tail.mrr + head.mrr) / 2.0, 1e-12);
  for (std::size_t i = 0; i < tail.ranks.size(); ++i) {
    EXPECT_EQ(both.ranks[2 * i], tail.ranks[i]);
    EXPECT_EQ(both.ranks[2 * i + 1], head.ranks[i]);
  }
}

TEST(Report, ThreadedEqualsSerial) {
  auto store = random_store(30, 3, 60, 0, 40, 12);
  auto table = random_table(30, 3, 6, ModelKind::STaR, 12);
  auto a = evaluate(table, store, Split::Test, nullptr, {TieRule::Random, 4, 1, Direction::Both});
  auto b = evaluate(table, store, Split::Test, nullptr, {TieRule::Random, 4, 5, Direction::Both});
  EXPECT_EQ(a.ranks, b.ranks);
  EXPECT_EQ(a.mrr, b.mrr);
}

TEST(Report, MemorizedToyModelScoresOne) {
  // Head-independent model: r_c = 0 and a translation pointing at the answer.
  auto store = make_store("a r b; c r d", "", "a r b");
  EmbeddingTable t = init_embeddings(4, 1, 4, ModelKind::STaR, 1e-3, 0);
  t.entities.fill(0.0);
  for (std::size_t e = 0; e < 4; ++e) t.entities(e, e) = 1.0;
  auto id = [&](const char* n) { return static_cast<std::size_t>(*store.vocab().find_entity(n)); };
  t.rel_c.fill(0.0);
  t.rel_tau.fill(0.0);
  t.rel_tau(0, id("b")) = 5.0;
  t.rel_tau(1, id("a")) = 5.0;
  auto r = evaluate(t, store, Split::Test);
  EXPECT_DOUBLE_EQ(r.mrr, 1.0);
}

TEST(Report, CsvHasOneRowPerRelation) {
  TempDir dir;
  auto store = make_store("a r b; b s c; c t a", "", "a r c");
  auto table = random_table(3, 3, 2, ModelKind::STaR, 1);
  auto r = evaluate(table, store, Split::Test);
  write_per_relation_csv(r, store.vocab(), dir / "rel.csv");
  auto text = read_file(dir / "rel.csv");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 3);
  EXPECT_NE(text.find("r,1,"), std::string::npos);
  auto j = to_json(r, &store.vocab());
  EXPECT_EQ(j["num_queries"], 2);
  EXPECT_EQ(j["per_relation"][0]["name"], "r");
}

TEST(Report, EmptySplitIsContractViolation) {
  auto store = make_store("a r b");
  auto table = random_table(2, 1, 2, ModelKind::STaR, 1);
  EXPECT_THROW(evaluate(table, store, Split::Test), ContractViolation);
}
