#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace star;
using namespace star::test;

class Suite : public ::testing::TestWithParam<std::size_t> {};

TEST_P(Suite, AllChecksPass) {
  auto report = run_pattern_suite(GetParam(), 11, 30);
  for (const auto& e : report.entries) EXPECT_TRUE(e.result.passed()) << e.name << ": " << e.result.detail;
  EXPECT_TRUE(report.all_passed());
}

INSTANTIATE_TEST_SUITE_P(Dims, Suite, ::testing::Values(2, 4, 8, 16));

TEST(Suite, OddDimensionIsRejected) { EXPECT_THROW(run_pattern_suite(7, 0, 1), ContractViolation); }

TEST(Suite, SignErrorInKernelIsCaughtWithWitness) {
  ScoreFn broken = [](std::span<const double> h, RelationView r, std::span<const double> t) {
    // flips the sign of the off-diagonal block entry
    std::vector<double> rc(r.r_c.begin(), r.r_c.end());
    for (std::size_t k = 1; k < rc.size(); k += 2) rc[k] = -rc[k];
    return score(h, RelationView{rc, r.tau}, t);
  };
  auto report = run_pattern_suite(8, 1, 10, broken);
  EXPECT_FALSE(report.all_passed());
  bool closure_failed = false;
  for (const auto& e : report.entries)
    if (e.name.rfind("composition closure", 0) == 0 && !e.result.passed()) {
      closure_failed = true;
      ASSERT_TRUE(e.result.witness.has_value());
      EXPECT_FALSE(e.result.witness->h.empty());
    }
  EXPECT_TRUE(closure_failed);
  auto j = to_json(report);
  EXPECT_FALSE(j["all_passed"].get<bool>());
}

// Composition in closed form: R_c = R_c1 R_c2 blockwise, tau = R_c2^T tau1 + tau2.
TEST(Composition, TranslationFormulaByHand) {
  // n = 2: rotation by 90 degrees, then scaling by 2
  RelationParams r1({0.0, 1.0}, {1.0, 0.0});
  RelationParams r2({2.0, 0.0}, {0.0, 3.0});
  Eigen::MatrixXd m = materialize_star_matrix(r1) * materialize_star_matrix(r2);
  auto composed = extract_relation(m);
  EXPECT_DOUBLE_EQ(composed.r_c[0], 0.0);
  EXPECT_DOUBLE_EQ(composed.r_c[1], 2.0);
  // tau1^T R_c2 = (1, 0) * 2I = (2, 0); plus tau2 = (0, 3)
  EXPECT_DOUBLE_EQ(composed.tau[0], 2.0);
  EXPECT_DOUBLE_EQ(composed.tau[1], 3.0);
  std::mt19937_64 rng(0);
  EXPECT_TRUE(check_composition_closure(r1, r2, rng).passed());
}

TEST(Commutativity, ExactlyWhenTranslationsVanish) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    auto a = random_relation(6, rng), b = random_relation(6, rng);
    EXPECT_TRUE(check_commutativity(a, b, false).passed());
    std::fill(a.tau.begin(), a.tau.end(), 0.0);
    std::fill(b.tau.begin(), b.tau.end(), 0.0);
    EXPECT_TRUE(check_commutativity(a, b, true).passed());
  }
}

// Two constructions of a non-commuting pair: a rotation against a pure
// translation with identity blocks, and against r_c = 0 with tau != 0.
TEST(Commutativity, RotationAgainstTranslationWitness) {
  RelationParams rot({0.0, 1.0}, {0.0, 0.0});
  RelationParams shift = RelationParams::identity(2);
  shift.tau = {1.0, 0.0};
  Eigen::MatrixXd a = materialize_star_matrix(rot), b = materialize_star_matrix(shift);
  Eigen::MatrixXd diff = a * b - b * a;
  // translation rows differ: tau^T - tau^T R_rot = (1, 0) - (0, -1)
  EXPECT_DOUBLE_EQ(diff(2, 0), 1.0);
  EXPECT_DOUBLE_EQ(diff(2, 1), 1.0);
  EXPECT_TRUE(check_commutativity(rot, shift, false).passed());
  RelationParams zero_block({0.0, 0.0}, {1.0, 0.0});
  EXPECT_TRUE(check_commutativity(rot, zero_block, false).passed());
}

TEST(Symmetry, DiagonalWithoutTranslationIsSymmetric) {
  std::mt19937_64 rng(5);
  auto diag = random_diagonal(8, rng);
  EXPECT_TRUE(in_symmetric_mode(diag));
  EXPECT_TRUE(check_symmetry_mode(diag, rng).passed());
  auto generic = random_relation(8, rng);
  EXPECT_EQ(check_symmetry_mode(generic, rng).status, CheckStatus::Inapplicable);
  auto found = search_symmetry_counterexample(generic, rng);
  EXPECT_EQ(found.status, CheckStatus::Failed);
  ASSERT_TRUE(found.witness.has_value());
  const auto& w = *found.witness;
  EXPECT_NE(score(w.h, generic, w.t), score(w.t, generic, w.h));
}

TEST(Inversion, ConjugateTransposesTheMatrix) {
  std::mt19937_64 rng(6);
  auto r = random_relation(4, rng);
  std::fill(r.tau.begin(), r.tau.end(), 0.0);
  auto inv = conjugate(r);
  EXPECT_TRUE((materialize_star_matrix(r).transpose() - materialize_star_matrix(inv)).isZero(0.0));
  EXPECT_TRUE(check_inversion(r, rng).passed());
  r.tau[0] = 1.0;
  EXPECT_EQ(check_inversion(r, rng).status, CheckStatus::Inapplicable);
}

// Scaling every relation parameter by alpha scales the score by alpha only
// up to the constant (alpha - 1): the homogeneous 1 is not scaled.
TEST(Margin, CorrectedScalingIdentity) {
  std::mt19937_64 rng(7);
  for (double alpha : {-2.0, 0.5, 3.0}) {
    auto r = random_relation(4, rng);
    EXPECT_TRUE(check_margin_scaling(r, alpha, rng).passed());
    RelationParams scaled = r;
    for (auto& v : scaled.r_c) v *= alpha;
    for (auto& v : scaled.tau) v *= alpha;
    auto h = random_vector(4, rng), t = random_vector(4, rng);
    EXPECT_NEAR(alpha * score(h, r, t) - score(h, scaled, t), alpha - 1.0, 1e-12);
  }
}

TEST(ETerm, TranslationContributionIgnoresTheHead) {
  std::mt19937_64 rng(8);
  auto r = random_relation(8, rng);
  EXPECT_TRUE(check_E_term(r, rng).passed());
}

// With r_c = 0 the model ignores the head entirely, so it cannot act as a
// head-dependent translational distance.
TEST(AntiSymmetry, ZeroRotationIsHeadIndependent) {
  std::mt19937_64 rng(9);
  RelationParams r(4);
  r.tau = random_vector(4, rng);
  EXPECT_TRUE(check_antisymmetry_mode(r, rng).passed());
  auto t = random_vector(4, rng);
  EXPECT_DOUBLE_EQ(score(random_vector(4, rng), r, t), score(random_vector(4, rng), r, t));
}

TEST(Witness, JsonCarriesRelationsAndVectors) {
  std::mt19937_64 rng(10);
  auto r = random_relation(2, rng);
  auto res = search_symmetry_counterexample(r, rng);
  auto j = to_json(res);
  EXPECT_EQ(j["status"], "failed");
  EXPECT_EQ(j["witness"]["h"].size(), 2u);
}
