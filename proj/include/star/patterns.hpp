#pragma once

// Executable relation-pattern checks. Every identity is evaluated on the
// materialized (n+1)x(n+1) relation matrices; the fast kernel is consulted
// only where a check explicitly compares against it.

#include <functional>
#include <optional>
#include <random>
#include <string>

#include <json.hpp>

#include "model.hpp"
#include "regularization.hpp"

namespace star {

enum class Pattern {
  Symmetry,
  AntiSymmetry,
  Composition,
  Commutativity,
  NonCommutativity,
  Inversion,
  ComplexRelationsMargin,
  ETerm,
  KernelOracle,
  Gradient,
};

inline const char* to_string(Pattern p) {
  switch (p) {
    case Pattern::Symmetry: return "Symmetry";
    case Pattern::AntiSymmetry: return "AntiSymmetry";
    case Pattern::Composition: return "Composition";
    case Pattern::Commutativity: return "Commutativity";
    case Pattern::NonCommutativity: return "NonCommutativity";
    case Pattern::Inversion: return "Inversion";
    case Pattern::ComplexRelationsMargin: return "ComplexRelationsMargin";
    case Pattern::ETerm: return "ETerm";
    case Pattern::KernelOracle: return "KernelOracle";
    case Pattern::Gradient: return "Gradient";
  }
  return "?";
}

enum class CheckStatus { Passed, Failed, Inapplicable };

inline const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Passed: return "passed";
    case CheckStatus::Failed: return "failed";
    case CheckStatus::Inapplicable: return "inapplicable";
  }
  return "?";
}

struct Witness {
  std::vector<RelationParams> relations;
  std::vector<double> h, t;
};

struct PatternCheckResult {
  Pattern pattern;
  CheckStatus status = CheckStatus::Passed;
  double residual = 0.0;
  std::string detail;
  std::optional<Witness> witness;

  bool passed() const noexcept { return status == CheckStatus::Passed; }
};

inline constexpr double kIdentityTolerance = 1e-10;

using ScoreFn = std::function<double(std::span<const double>, RelationView, std::span<const double>)>;

inline ScoreFn default_kernel() {
  return [](std::span<const double> h, RelationView r, std::span<const double> t) { return score(h, r, t); };
}

// ---- random parameter draws ---------------------------------------------------

inline std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline RelationParams random_relation(std::size_t n, std::mt19937_64& rng) {
  return {random_vector(n, rng), random_vector(n, rng)};
}

// Unit-norm blocks with angles bounded away from 0, tau = 0.
inline RelationParams random_rotation(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.3, 6.0);
  RelationParams p(n);
  for (std::size_t k = 0; k < n; k += 2) {
    double a = angle(rng);
    p.r_c[k] = std::cos(a);
    p.r_c[k + 1] = std::sin(a);
  }
  return p;
}

// Identity blocks with a nonzero translation offset.
inline RelationParams random_translation(std::size_t n, std::mt19937_64& rng) {
  RelationParams p = RelationParams::identity(n);
  p.tau = random_vector(n, rng);
  return p;
}

// Zero off-diagonal block components and tau = 0.
inline RelationParams random_diagonal(std::size_t n, std::mt19937_64& rng) {
  RelationParams p(n);
  p.r_c = random_vector(n, rng);
  for (std::size_t k = 1; k < n; k += 2) p.r_c[k] = 0.0;
  return p;
}

inline RelationParams conjugate(const RelationParams& rel) {
  RelationParams c = rel;
  for (std::size_t k = 1; k < c.r_c.size(); k += 2) c.r_c[k] = -c.r_c[k];
  return c;
}

// ---- helpers ------------------------------------------------------------------

namespace detail {

inline double oracle_score(const Eigen::MatrixXd& m, std::span<const double> h, std::span<const double> t) {
  return homogeneous(h).dot(m * homogeneous(t));
}

inline double relative_gap(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

inline PatternCheckResult finish(Pattern p, double residual, bool ok, std::string detail,
                                 std::optional<Witness> witness) {
  PatternCheckResult r{p, ok ? CheckStatus::Passed : CheckStatus::Failed, residual, std::move(detail), std::nullopt};
  if (!ok) r.witness = std::move(witness);
  return r;
}

inline bool all_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

}  // namespace detail

// Reads (r_c, tau) back out of a matrix already known to have the
// [[R_c, 0], [tau^T, 1]] layout.
inline RelationParams extract_relation(const Eigen::MatrixXd& m) {
  const auto n = static_cast<std::size_t>(m.rows() - 1);
  RelationParams p(n);
  for (std::size_t k = 0; k < n; k += 2) {
    auto ki = static_cast<Eigen::Index>(k);
    p.r_c[k] = m(ki, ki);
    p.r_c[k + 1] = m(ki + 1, ki);
  }
  for (std::size_t j = 0; j < n; ++j) p.tau[j] = m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j));
  return p;
}

// Largest deviation of `m` from the relation-matrix layout: zero last column
// above the corner, corner 1, 2x2 blocks of the form [[a,-b],[b,a]], zeros
// off the block diagonal.
inline double structure_residual(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows() - 1;
  double worst = std::abs(m(n, n) - 1.0);
  for (Eigen::Index i = 0; i < n; ++i) worst = std::max(worst, std::abs(m(i, n)));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i / 2 != j / 2) worst = std::max(worst, std::abs(m(i, j)));
    }
  }
  for (Eigen::Index k = 0; k < n; k += 2) {
    worst = std::max(worst, std::abs(m(k, k) - m(k + 1, k + 1)));
    worst = std::max(worst, std::abs(m(k, k + 1) + m(k + 1, k)));
  }
  return worst;
}

// ---- checks -----------------------------------------------------------------------

// The product of two relation matrices is again a relation matrix, whose
// translation row is tau1^T R_c2 + tau2^T; the kernel scoring the composed
// parameters must agree with h^ . (M1 M2) t^.
inline PatternCheckResult check_composition_closure(const RelationParams& rel1, const RelationParams& rel2,
                                                    std::mt19937_64& rng, const ScoreFn& kernel = default_kernel(),
                                                    std::size_t pairs = 10) {
  require(rel1.dim() == rel2.dim(), "check_composition_closure: dimension mismatch");
  const std::size_t n = rel1.dim();
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd m = materialize_star_matrix(rel1) * materialize_star_matrix(rel2);
  Witness witness{{rel1, rel2}, {}, {}};

  double structure = structure_residual(m);
  if (structure > kIdentityTolerance)
    return detail::finish(Pattern::Composition, structure, false, "product leaves the relation-matrix form", witness);

  Eigen::RowVectorXd tau1(ni), tau2(ni);
  for (Eigen::Index j = 0; j < ni; ++j) {
    tau1(j) = rel1.tau[static_cast<std::size_t>(j)];
    tau2(j) = rel2.tau[static_cast<std::size_t>(j)];
  }
  Eigen::RowVectorXd expected_tau = tau1 * materialize_complex_block(rel2.r_c) + tau2;
  double tau_gap = (m.row(ni).head(ni) - expected_tau).cwiseAbs().maxCoeff();
  Eigen::MatrixXd expected_rc = materialize_complex_block(rel1.r_c) * materialize_complex_block(rel2.r_c);
  double rc_gap = (m.topLeftCorner(ni, ni) - expected_rc).cwiseAbs().maxCoeff();

  RelationParams composed = extract_relation(m);
  double roundtrip = (materialize_star_matrix(composed) - m).cwiseAbs().maxCoeff();

  double kernel_gap = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    auto h = random_vector(n, rng);
    auto t = random_vector(n, rng);
    double gap = detail::relative_gap(kernel(h, composed, t), detail::oracle_score(m, h, t));
    if (gap > kernel_gap) {
      kernel_gap = gap;
      witness.h = h;
      witness.t = t;
    }
  }
  double residual = std::max({tau_gap, rc_gap, roundtrip, kernel_gap});
  witness.relations.push_back(composed);
  std::string detail = "tau_gap=" + std::to_string(tau_gap) + " kernel_gap=" + std::to_string(kernel_gap);
  return detail::finish(Pattern::Composition, residual, residual < kIdentityTolerance, detail, witness);
}

// Passes when (M1 M2 == M2 M1 within tolerance) matches `expect_commute`.
inline PatternCheckResult check_commutativity(const RelationParams& rel1, const RelationParams& rel2,
                                              bool expect_commute) {
  require(rel1.dim() == rel2.dim(), "check_commutativity: dimension mismatch");
  Eigen::MatrixXd a = materialize_star_matrix(rel1), b = materialize_star_matrix(rel2);
  double distance = (a * b - b * a).norm();
  bool commute = distance < kIdentityTolerance;
  Pattern p = expect_commute ? Pattern::Commutativity : Pattern::NonCommutativity;
  std::string detail = "||M1 M2 - M2 M1||_F=" + std::to_string(distance);
  return detail::finish(p, distance, commute == expect_commute, detail, Witness{{rel1, rel2}, {}, {}});
}

inline bool in_symmetric_mode(const RelationParams& rel) {
  for (std::size_t k = 1; k < rel.r_c.size(); k += 2)
    if (rel.r_c[k] != 0.0) return false;
  return detail::all_zero(rel.tau);
}

// Diagonal R_c with tau = 0 gives s(h, r, t) == s(t, r, h).
inline PatternCheckResult check_symmetry_mode(const RelationParams& rel, std::mt19937_64& rng,
                                              std::size_t trials = 100) {
  if (!in_symmetric_mode(rel))
    return {Pattern::Symmetry, CheckStatus::Inapplicable, 0.0,
            "relation has nonzero off-diagonal components or translation", std::nullopt};
  Eigen::MatrixXd m = materialize_star_matrix(rel);
  double worst = 0.0;
  Witness witness{{rel}, {}, {}};
  for (std::size_t i = 0; i < trials; ++i) {
    auto h = random_vector(rel.dim(), rng);
    auto t = random_vector(rel.dim(), rng);
    double gap = std::abs(detail::oracle_score(m, h, t) - detail::oracle_score(m, t, h));
    if (gap > worst) {
      worst = gap;
      witness.h = h;
      witness.t = t;
    }
  }
  return detail::finish(Pattern::Symmetry, worst, worst < kIdentityTolerance, "max |s(h,t)-s(t,h)|", witness);
}

// Random search for (h, t) with s(h, r, t) != s(t, r, h). Reports Failed with
// the witness once one is found, Passed if symmetry survived every draw.
inline PatternCheckResult search_symmetry_counterexample(const RelationParams& rel, std::mt19937_64& rng,
                                                         std::size_t trials = 100) {
  Eigen::MatrixXd m = materialize_star_matrix(rel);
  for (std::size_t i = 0; i < trials; ++i) {
    auto h = random_vector(rel.dim(), rng);
    auto t = random_vector(rel.dim(), rng);
    double gap = std::abs(detail::oracle_score(m, h, t) - detail::oracle_score(m, t, h));
    if (gap > 1e-6)
      return {Pattern::Symmetry, CheckStatus::Failed, gap, "asymmetric pair found", Witness{{rel}, h, t}};
  }
  return {Pattern::Symmetry, CheckStatus::Passed, 0.0, "no asymmetric pair found", std::nullopt};
}

// With tau = 0, the conjugate relation (off-diagonal components negated) has
// the transposed matrix, so s(h, r, t) == s(t, conj(r), h).
inline PatternCheckResult check_inversion(const RelationParams& rel, std::mt19937_64& rng, std::size_t trials = 100) {
  if (!detail::all_zero(rel.tau))
    return {Pattern::Inversion, CheckStatus::Inapplicable, 0.0, "tau != 0: the transpose leaves the relation form",
            std::nullopt};
  RelationParams inverse = conjugate(rel);
  Eigen::MatrixXd m1 = materialize_star_matrix(rel), m2 = materialize_star_matrix(inverse);
  double worst = (m1.transpose() - m2).cwiseAbs().maxCoeff();
  Witness witness{{rel, inverse}, {}, {}};
  for (std::size_t i = 0; i < trials; ++i) {
    auto h = random_vector(rel.dim(), rng);
    auto t = random_vector(rel.dim(), rng);
    double gap = detail::relative_gap(detail::oracle_score(m1, h, t), detail::oracle_score(m2, t, h));
    if (gap > worst) {
      worst = gap;
      witness.h = h;
      witness.t = t;
    }
  }
  return detail::finish(Pattern::Inversion, worst, worst < kIdentityTolerance, "max gap of s(h,r,t) vs s(t,r',h)",
                        witness);
}

// alpha * s(h, r, t) == s(h, r', t) + (alpha - 1) with r' = (alpha r_c, alpha tau).
inline PatternCheckResult check_margin_scaling(const RelationParams& rel, double alpha, std::mt19937_64& rng,
                                               std::size_t trials = 100) {
  require(alpha != 0.0, "check_margin_scaling: alpha must be nonzero");
  RelationParams scaled = rel;
  for (auto& v : scaled.r_c) v *= alpha;
  for (auto& v : scaled.tau) v *= alpha;
  Eigen::MatrixXd m = materialize_star_matrix(rel), ms = materialize_star_matrix(scaled);
  double worst = 0.0;
  Witness witness{{rel, scaled}, {}, {}};
  for (std::size_t i = 0; i < trials; ++i) {
    auto h = random_vector(rel.dim(), rng);
    auto t = random_vector(rel.dim(), rng);
    double lhs = alpha * detail::oracle_score(m, h, t);
    double rhs = detail::oracle_score(ms, h, t) + (alpha - 1.0);
    double gap = detail::relative_gap(lhs, rhs);
    if (gap > worst) {
      worst = gap;
      witness.h = h;
      witness.t = t;
    }
  }
  return detail::finish(Pattern::ComplexRelationsMargin, worst, worst < kIdentityTolerance,
                        "alpha=" + std::to_string(alpha), witness);
}

// s(h, r, t) - s(h, r with tau = 0, t) == tau . t for every head h.
inline PatternCheckResult check_E_term(const RelationParams& rel, std::mt19937_64& rng, std::size_t trials = 100) {
  RelationParams no_translation = rel;
  std::fill(no_translation.tau.begin(), no_translation.tau.end(), 0.0);
  Eigen::MatrixXd m = materialize_star_matrix(rel), m0 = materialize_star_matrix(no_translation);
  auto t = random_vector(rel.dim(), rng);
  const double expected = dot(rel.tau, t);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, worst = 0.0;
  Witness witness{{rel}, {}, t};
  for (std::size_t i = 0; i < trials; ++i) {
    auto h = random_vector(rel.dim(), rng);
    double diff = detail::oracle_score(m, h, t) - detail::oracle_score(m0, h, t);
    lo = std::min(lo, diff);
    hi = std::max(hi, diff);
    double gap = detail::relative_gap(diff, expected);
    if (gap > worst) {
      worst = gap;
      witness.h = h;
    }
  }
  double residual = std::max(worst, hi - lo);
  return detail::finish(Pattern::ETerm, residual, residual < kIdentityTolerance,
                        "spread over heads=" + std::to_string(hi - lo), witness);
}

// With r_c = 0 the score reduces to tau . t + 1: it ignores the head, so
// s(h, r, t) == s(t, r, h) exactly when tau . t == tau . h. Verifies that
// identity and that asymmetric pairs exist; the translational-distance
// reading is not asserted.
inline PatternCheckResult check_antisymmetry_mode(const RelationParams& rel, std::mt19937_64& rng,
                                                  std::size_t trials = 100) {
  if (!detail::all_zero(rel.r_c) || detail::all_zero(rel.tau))
    return {Pattern::AntiSymmetry, CheckStatus::Inapplicable, 0.0, "requires r_c = 0 and tau != 0", std::nullopt};
  Eigen::MatrixXd m = materialize_star_matrix(rel);
  double worst = 0.0;
  bool asymmetric_seen = false;
  Witness witness{{rel}, {}, {}};
  for (std::size_t i = 0; i < trials; ++i) {
    auto h = random_vector(rel.dim(), rng);
    auto t = random_vector(rel.dim(), rng);
    double forward = detail::oracle_score(m, h, t), backward = detail::oracle_score(m, t, h);
    double gap = std::abs((forward - backward) - (dot(rel.tau, t) - dot(rel.tau, h)));
    gap = std::max(gap, std::abs(forward - (dot(rel.tau, t) + 1.0)));
    if (std::abs(forward - backward) > 1e-6) asymmetric_seen = true;
    if (gap > worst) {
      worst = gap;
      witness.h = h;
      witness.t = t;
    }
  }
  bool ok = worst < kIdentityTolerance && asymmetric_seen;
  return detail::finish(Pattern::AntiSymmetry, worst, ok,
                        "head-independent; symmetric iff tau.t == tau.h (translational reading not asserted)",
                        witness);
}

// ---- kernel and gradient checks used by the verify suite -------------------------------

inline PatternCheckResult check_kernel_oracle(std::size_t n, std::size_t trials, std::mt19937_64& rng,
                                              const ScoreFn& kernel = default_kernel()) {
  double worst = 0.0;
  Witness witness;
  for (std::size_t i = 0; i < trials; ++i) {
    auto rel = random_relation(n, rng);
    auto h = random_vector(n, rng);
    auto t = random_vector(n, rng);
    double gap = detail::relative_gap(kernel(h, rel, t), detail::oracle_score(materialize_star_matrix(rel), h, t));
    if (gap > worst) {
      worst = gap;
      witness = {{rel}, h, t};
    }
  }
  return detail::finish(Pattern::KernelOracle, worst, worst < kIdentityTolerance, "max relative gap", witness);
}

// Central differences of `f` at `x` with step `step`.
inline std::vector<double> central_differences(const std::function<double(std::span<const double>)>& f,
                                               std::vector<double> x, double step) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + step;
    const double up = f(x);
    x[i] = orig - step;
    const double down = f(x);
    x[i] = orig;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

inline double max_relative_error(std::span<const double> analytic, std::span<const double> numeric) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i)
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / std::max(1.0, std::abs(numeric[i])));
  return worst;
}

// Score gradients against central differences over the packed (h, t, r_c, tau).
inline PatternCheckResult check_score_gradients(std::size_t n, std::size_t trials, std::mt19937_64& rng,
                                                double step = 1e-5, double tolerance = 1e-4) {
  double worst = 0.0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    auto packed = random_vector(4 * n, rng);
    auto unpack = [n](std::span<const double> x) {
      return std::tuple{x.subspan(0, n), x.subspan(n, n), RelationView{x.subspan(2 * n, n), x.subspan(3 * n, n)}};
    };
    auto [h, t, rel] = unpack(packed);
    auto g = score_gradients(h, rel, t);
    std::vector<double> analytic;
    for (const auto* part : {&g.d_h, &g.d_t, &g.d_r_c, &g.d_tau}) analytic.insert(analytic.end(), part->begin(), part->end());
    auto numeric = central_differences(
        [&](std::span<const double> x) {
          auto [hh, tt, rr] = unpack(x);
          return score(hh, rr, tt);
        },
        packed, step);
    worst = std::max(worst, max_relative_error(analytic, numeric));
  }
  return detail::finish(Pattern::Gradient, worst, worst < tolerance, "score gradient vs central differences",
                        std::nullopt);
}

// ---- suite ------------------------------------------------------------------------

struct SuiteEntry {
  std::string name;
  PatternCheckResult result;
};

struct SuiteReport {
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::vector<SuiteEntry> entries;

  bool all_passed() const {
    return std::all_of(entries.begin(), entries.end(), [](const SuiteEntry& e) { return e.result.passed(); });
  }
};

// Runs every pattern check `trials` times with fresh random parameters. Each
// entry reports Passed when the check behaves as the construction requires
// (including expected failures such as symmetry breaking off the degenerate
// mode, which are folded into Passed).
inline SuiteReport run_pattern_suite(std::size_t n, std::uint64_t seed, std::size_t trials,
                                     const ScoreFn& kernel = default_kernel()) {
  if (n == 0 || n % 2 != 0) throw ContractViolation("verify: n must be a positive even number");
  std::mt19937_64 rng(seed);
  SuiteReport report{n, seed, trials, {}};

  auto worst_of = [&](const std::string& name, auto&& make) {
    PatternCheckResult worst = make();
    for (std::size_t i = 1; i < trials && worst.passed(); ++i) {
      auto r = make();
      if (!r.passed() || r.residual > worst.residual) worst = r;
    }
    report.entries.push_back({name, worst});
  };

  worst_of("composition closure (random)", [&] {
    return check_composition_closure(random_relation(n, rng), random_relation(n, rng), rng, kernel, 4);
  });
  worst_of("composition closure (identity)", [&] {
    return check_composition_closure(RelationParams::identity(n), RelationParams::identity(n), rng, kernel, 2);
  });
  worst_of("commutativity (tau = 0)", [&] {
    auto a = random_relation(n, rng), b = random_relation(n, rng);
    std::fill(a.tau.begin(), a.tau.end(), 0.0);
    std::fill(b.tau.begin(), b.tau.end(), 0.0);
    return check_commutativity(a, b, true);
  });
  worst_of("no commutativity (random tau)", [&] {
    return check_commutativity(random_relation(n, rng), random_relation(n, rng), false);
  });
  worst_of("non-commutativity (rotation vs translation)", [&] {
    return check_commutativity(random_rotation(n, rng), random_translation(n, rng), false);
  });
  worst_of("non-commutativity (rotation vs r_c = 0)", [&] {
    RelationParams pure(n);
    pure.tau = random_vector(n, rng);
    return check_commutativity(random_rotation(n, rng), pure, false);
  });
  worst_of("self commutativity", [&] {
    auto a = random_relation(n, rng);
    return check_commutativity(a, a, true);
  });
  worst_of("symmetry (diagonal, tau = 0)", [&] { return check_symmetry_mode(random_diagonal(n, rng), rng, 10); });
  worst_of("symmetry breaks for generic relations", [&] {
    auto r = search_symmetry_counterexample(random_relation(n, rng), rng, 10);
    // a found counterexample is the expected outcome here
    r.status = r.status == CheckStatus::Failed ? CheckStatus::Passed : CheckStatus::Failed;
    return r;
  });
  worst_of("anti-symmetry mode (r_c = 0)", [&] {
    RelationParams r(n);
    r.tau = random_vector(n, rng);
    return check_antisymmetry_mode(r, rng, 10);
  });
  worst_of("inversion (conjugate, tau = 0)", [&] {
    auto r = random_relation(n, rng);
    std::fill(r.tau.begin(), r.tau.end(), 0.0);
    return check_inversion(r, rng, 10);
  });
  worst_of("margin scaling", [&] {
    std::uniform_real_distribution<double> a(-3.0, 3.0);
    double alpha = a(rng);
    if (std::abs(alpha) < 0.1) alpha = 2.0;
    return check_margin_scaling(random_relation(n, rng), alpha, rng, 10);
  });
  worst_of("E-term head independence", [&] { return check_E_term(random_relation(n, rng), rng, 10); });
  report.entries.push_back({"kernel vs materialized matrix", check_kernel_oracle(n, trials, rng, kernel)});
  report.entries.push_back({"score gradients vs finite differences", check_score_gradients(n, trials, rng)});
  return report;
}

inline nlohmann::json to_json(const PatternCheckResult& r) {
  nlohmann::json j{{"pattern", to_string(r.pattern)},
                   {"status", to_string(r.status)},
                   {"residual", r.residual},
                   {"detail", r.detail}};
  if (r.witness) {
    nlohmann::json w;
    for (const auto& rel : r.witness->relations) w["relations"].push_back({{"r_c", rel.r_c}, {"tau", rel.tau}});
    if (!r.witness->h.empty()) w["h"] = r.witness->h;
    if (!r.witness->t.empty()) w["t"] = r.witness->t;
    j["witness"] = w;
  }
  return j;
}

inline nlohmann::json to_json(const SuiteReport& r) {
  nlohmann::json j{{"n", r.dim}, {"seed", r.seed}, {"trials", r.trials}, {"all_passed", r.all_passed()}};
  j["checks"] = nlohmann::json::array();
  for (const auto& e : r.entries) {
    auto c = to_json(e.result);
    c["name"] = e.name;
    j["checks"].push_back(c);
  }
  return j;
}

}  // namespace star
