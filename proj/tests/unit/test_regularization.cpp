#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace star;
using namespace star::test;

namespace {

// DURA in homogeneous coordinates with the materialized matrix:
// |h^|^2 + |R* t^|^2 + |t^|^2 + |h^T R*|^2 - 4.
double homogeneous_dura(const std::vector<double>& h, const RelationParams& rel, const std::vector<double>& t) {
  Eigen::MatrixXd m = materialize_star_matrix(rel);
  Eigen::VectorXd hh = homogeneous(h), tt = homogeneous(t);
  return hh.squaredNorm() + (m * tt).squaredNorm() + tt.squaredNorm() + (hh.transpose() * m).squaredNorm() - 4.0;
}

}  // namespace

TEST(Fro, IsSumOfSquares) {
  std::vector<double> h{1, 2}, t{3, -1};
  RelationParams rel({0.5, -0.5}, {2, 0});
  EXPECT_DOUBLE_EQ(fro_penalty(h, rel, t), 1 + 4 + 9 + 1 + 0.25 + 0.25 + 4);
}

TEST(Dura, ExactVariantEqualsHomogeneousNorms) {
  std::mt19937_64 rng(1);
  for (std::size_t n : {2u, 4u, 8u}) {
    for (int i = 0; i < 200; ++i) {
      auto rel = random_relation(n, rng);
      auto h = random_vector(n, rng), t = random_vector(n, rng);
      const double want = homogeneous_dura(h, rel, t);
      EXPECT_NEAR(dura_penalty(h, rel, t, DuraVariant::Exact), want, 1e-10 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST(Dura, LiteralDiffersFromExactOnlyInCouplingTerm) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    auto rel = random_relation(6, rng);
    auto h = random_vector(6, rng), t = random_vector(6, rng);
    const double c = dot(rel.tau, t);
    EXPECT_NEAR(dura_penalty(h, rel, t, DuraVariant::Exact) - dura_penalty(h, rel, t, DuraVariant::Literal),
                c * c + c, 1e-10);
  }
}

TEST(Dura, WithoutTranslationReducesToComplexDura) {
  std::mt19937_64 rng(3);
  auto rel = random_relation(4, rng);
  std::fill(rel.tau.begin(), rel.tau.end(), 0.0);
  auto h = random_vector(4, rng), t = random_vector(4, rng);
  Eigen::MatrixXd rc = materialize_complex_block(rel.r_c);
  Eigen::Map<const Eigen::VectorXd> hv(h.data(), 4), tv(t.data(), 4);
  const double want = hv.squaredNorm() + tv.squaredNorm() + (hv.transpose() * rc).squaredNorm() + (rc * tv).squaredNorm();
  EXPECT_NEAR(dura_penalty(h, rel, t, DuraVariant::Literal), want, 1e-12);
  EXPECT_NEAR(dura_penalty(h, rel, t, DuraVariant::Exact), want, 1e-12);
}

struct PenaltyCase {
  RegKind kind;
  DuraVariant variant;
};

class PenaltyGradientTest : public ::testing::TestWithParam<PenaltyCase> {};

TEST_P(PenaltyGradientTest, MatchesCentralDifferences) {
  const auto [kind, variant] = GetParam();
  RegConfig cfg{kind, 1.0, variant};
  std::mt19937_64 rng(static_cast<std::uint64_t>(kind) * 10 + static_cast<std::uint64_t>(variant));
  for (std::size_t n : {2u, 4u, 8u}) {
    for (int trial = 0; trial < 30; ++trial) {
      auto rel = random_relation(n, rng);
      auto h = random_vector(n, rng), t = random_vector(n, rng);
      auto g = penalty_gradient(cfg, h, rel, t);
      auto check = [&](std::vector<double>& x, const std::vector<double>& analytic) {
        auto numeric = central_differences(
            [&](std::span<const double> v) {
              auto saved = x;
              std::copy(v.begin(), v.end(), x.begin());
              double p = penalty(cfg, h, rel, t);
              x = saved;
              return p;
            },
            x, 1e-5);
        EXPECT_LT(max_relative_error(analytic, numeric), 1e-6);
      };
      check(h, g.d_h);
      check(t, g.d_t);
      check(rel.r_c, g.d_r_c);
      check(rel.tau, g.d_tau);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Kinds, PenaltyGradientTest,
                         ::testing::Values(PenaltyCase{RegKind::Fro, DuraVariant::Literal},
                                           PenaltyCase{RegKind::DURA, DuraVariant::Literal},
                                           PenaltyCase{RegKind::DURA, DuraVariant::Exact}));

TEST(Reg, NoneIsZeroAndParsersRoundTrip) {
  std::vector<double> h{1, 1}, t{1, 1};
  auto rel = RelationParams::identity(2);
  EXPECT_EQ(penalty(RegConfig{}, h, rel, t), 0.0);
  for (auto k : {RegKind::None, RegKind::Fro, RegKind::DURA}) EXPECT_EQ(parse_reg_kind(to_string(k)), k);
  for (auto v : {DuraVariant::Literal, DuraVariant::Exact}) EXPECT_EQ(parse_dura_variant(to_string(v)), v);
  EXPECT_THROW(parse_reg_kind("l3"), ConfigError);
}
