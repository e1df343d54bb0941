#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace star;
using namespace star::test;

namespace {

// O(|T|^2) join over ordered triple pairs.
PairCounts brute_force(const std::vector<Triple>& triples, std::size_t nr, bool exclude_degenerate) {
  PairCounts out(nr);
  for (const auto& a : triples)
    for (const auto& b : triples) {
      if (a.tail != b.head) continue;
      if (exclude_degenerate && (a.head == a.tail || b.head == b.tail || a.head == b.tail)) continue;
      ++out(static_cast<std::size_t>(a.relation), static_cast<std::size_t>(b.relation));
    }
  return out;
}

}  // namespace

TEST(TwoPaths, MatchesBruteForceJoin) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    // small entity pools force self loops and repeated entities
    auto store = random_store(4 + seed % 20, 1 + seed % 5, 30 + 10 * seed, 0, 0, seed);
    for (bool degenerate : {false, true}) {
      auto fast = count_two_paths(store, PathCountOptions{degenerate});
      auto slow = brute_force(store.train(), store.num_relations(), degenerate);
      EXPECT_EQ(fast.counts, slow.counts) << "seed " << seed << " exclude_degenerate " << degenerate;
    }
  }
}

// Two toys: the first has one r1-then-r2 chain only;
// the second has one r1-then-r2 chain and two r2-then-r1 chains.
TEST(Imbalance, ToyExamplesAreOneAndOneThird) {
  auto left = make_store("e1 r1 e2; e2 r2 e3");
  auto lc = count_two_paths(left);
  EXPECT_EQ(lc(0, 1), 1u);
  EXPECT_EQ(lc(1, 0), 0u);
  EXPECT_EQ(pair_imbalance(lc, 0, 1), 1.0);

  auto right = make_store("e1 r1 e2; e2 r2 e3; e4 r2 e5; e5 r1 e6; e5 r1 e7");
  auto rc = count_two_paths(right);
  EXPECT_EQ(rc(0, 1), 1u);
  EXPECT_EQ(rc(1, 0), 2u);
  EXPECT_EQ(*pair_imbalance(rc, 0, 1), 1.0 / 3.0);
}

TEST(Imbalance, UndefinedWithoutPaths) {
  EXPECT_FALSE(pair_imbalance(0, 0).has_value());
  EXPECT_EQ(*pair_imbalance(5, 5), 0.0);
  // agrees with 2 max / (sum) - 1 on random counts
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::uint64_t> d(0, 1000);
  for (int i = 0; i < 1000; ++i) {
    auto a = d(rng), b = d(rng);
    if (a + b == 0) continue;
    const double direct = 2.0 * static_cast<double>(std::max(a, b)) / static_cast<double>(a + b) - 1.0;
    EXPECT_NEAR(*pair_imbalance(a, b), direct, 1e-15);
  }
}

TEST(Imbalance, DatasetRatioByHand) {
  // pair (0,1): 1 vs 2 chains -> both; pair (0,2): 1 vs 0 -> single
  PairCounts c(3);
  c(0, 1) = 1;
  c(1, 0) = 2;
  c(0, 2) = 1;
  c(1, 1) = 4;
  auto both = dataset_imbalance(c, DiagonalPolicy::Both);
  EXPECT_EQ(both.triple_both, 3u + 4u);
  EXPECT_EQ(both.triple_single, 1u);
  EXPECT_DOUBLE_EQ(both.Psi, 1.0 / 8.0);
  auto excl = dataset_imbalance(c, DiagonalPolicy::Exclude);
  EXPECT_DOUBLE_EQ(excl.Psi, 1.0 / 4.0);
  ASSERT_EQ(both.pairs.size(), 2u);
  EXPECT_TRUE(both.pairs[0].both);
  EXPECT_FALSE(both.pairs[1].both);
}

TEST(Imbalance, NoPathsIsAnError) {
  auto store = make_store("a r b; c r d");
  EXPECT_THROW(dataset_imbalance(count_two_paths(store)), AnalysisError);
}

TEST(Imbalance, RelabelingRelationsPermutesTheMatrix) {
  auto store = random_store(15, 4, 120, 0, 0, 77);
  auto counts = count_two_paths(store);
  std::vector<RelationId> perm{2, 0, 3, 1};
  std::vector<Triple> relabeled;
  for (auto t : store.train()) relabeled.push_back({t.head, perm[static_cast<std::size_t>(t.relation)], t.tail});
  auto pc = count_two_paths(relabeled, 4, 15);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      EXPECT_EQ(counts(i, j), pc(static_cast<std::size_t>(perm[i]), static_cast<std::size_t>(perm[j])));
  EXPECT_DOUBLE_EQ(dataset_imbalance(counts).Psi, dataset_imbalance(pc).Psi);
}

TEST(Export, CsvAndSvgAreWritten) {
  TempDir dir;
  auto store = make_store("e1 r1 e2; e2 r2 e3; e4 r2 e5; e5 r1 e6; e5 r3 e7; e7 r1 e1");
  auto report = dataset_imbalance(count_two_paths(store));
  export_arc_csv(report, dir / "arcs.csv", &store.vocab());
  export_arc_svg(report, store.num_relations(), dir / "arcs.svg", &store.vocab());
  auto csv = read_file(dir / "arcs.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "rel_i,rel_j,count_ij,count_ji,psi");
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), 1 + report.pairs.size());
  auto svg = read_file(dir / "arcs.svg");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  std::size_t arcs = 0;
  for (auto pos = svg.find("<path"); pos != std::string::npos; pos = svg.find("<path", pos + 1)) ++arcs;
  EXPECT_EQ(arcs, report.pairs.size());
  auto j = to_json(report, &store.vocab());
  EXPECT_EQ(j["pairs"].size(), report.pairs.size());
}
