#pragma once

// Relation parameterization and the homogeneous-coordinate bilinear score
//
//   s(h, r, t) = [h;1]^T [[R_c, 0], [tau^T, 1]] [t;1]
//              = h^T R_c t + tau . t + 1
//
// R_c is block diagonal with 2x2 blocks [[a, -b], [b, a]] built from the
// interleaved pairs (r_c[2k], r_c[2k+1]). The homogeneous coordinate is never
// stored; kernels append the constant 1 implicitly.

#include <cmath>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "common.hpp"

namespace star {

enum class ModelKind { STaR, TaR, ComplEx, DistMult };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::STaR: return "STaR";
    case ModelKind::TaR: return "TaR";
    case ModelKind::ComplEx: return "ComplEx";
    case ModelKind::DistMult: return "DistMult";
  }
  return "?";
}

inline ModelKind parse_model_kind(const std::string& s) {
  if (s == "STaR" || s == "star") return ModelKind::STaR;
  if (s == "TaR" || s == "tar") return ModelKind::TaR;
  if (s == "ComplEx" || s == "complex") return ModelKind::ComplEx;
  if (s == "DistMult" || s == "distmult") return ModelKind::DistMult;
  throw ConfigError("model.kind: unknown model kind '" + s + "' (expected STaR|TaR|ComplEx|DistMult)");
}

// Whether the kind trains the translation offset / the off-diagonal block
// components.
inline bool has_translation(ModelKind k) { return k == ModelKind::STaR || k == ModelKind::TaR; }
inline bool has_rotation(ModelKind k) { return k != ModelKind::DistMult; }

// Non-owning view of one relation's parameters.
struct RelationView {
  std::span<const double> r_c;
  std::span<const double> tau;

  std::size_t dim() const noexcept { return r_c.size(); }
};

struct RelationParams {
  std::vector<double> r_c;
  std::vector<double> tau;

  RelationParams() = default;
  RelationParams(std::vector<double> rc, std::vector<double> t) : r_c(std::move(rc)), tau(std::move(t)) {}
  explicit RelationParams(std::size_t n) : r_c(n, 0.0), tau(n, 0.0) {}

  // r_c = (1,0,1,0,...), tau = 0: the identity relation.
  static RelationParams identity(std::size_t n) {
    RelationParams p(n);
    for (std::size_t k = 0; k < n; k += 2) p.r_c[k] = 1.0;
    return p;
  }

  RelationView view() const noexcept { return {r_c, tau}; }
  operator RelationView() const noexcept { return view(); }
  std::size_t dim() const noexcept { return r_c.size(); }
};

inline void check_dims(std::span<const double> h, RelationView rel, std::span<const double> t) {
  require(rel.r_c.size() % 2 == 0, "embedding dimension must be even");
  require(h.size() == rel.r_c.size() && t.size() == rel.r_c.size() && rel.tau.size() == rel.r_c.size(),
          "dimension mismatch between entity and relation parameters");
}

// q = R_c^T h + tau, so that s(h, r, t) = q . t + 1 for every candidate t.
inline void query_vector(std::span<const double> h, RelationView rel, std::span<double> q) {
  const std::size_t n = h.size();
  for (std::size_t k = 0; k < n; k += 2) {
    const double a = rel.r_c[k], b = rel.r_c[k + 1];
    const double h1 = h[k], h2 = h[k + 1];
    q[k] = a * h1 + b * h2 + rel.tau[k];
    q[k + 1] = a * h2 - b * h1 + rel.tau[k + 1];
  }
}

// Bilinear part h^T R_c t without translation or the homogeneous constant.
inline double complex_part(std::span<const double> h, std::span<const double> r_c, std::span<const double> t) {
  double s = 0.0;
  for (std::size_t k = 0; k < r_c.size(); k += 2) {
    const double h1 = h[k], h2 = h[k + 1], t1 = t[k], t2 = t[k + 1];
    s += r_c[k] * (h1 * t1 + h2 * t2) + r_c[k + 1] * (h2 * t1 - h1 * t2);
  }
  return s;
}

inline double score(std::span<const double> h, RelationView rel, std::span<const double> t) {
  check_dims(h, rel, t);
  return complex_part(h, rel.r_c, t) + dot(rel.tau, t) + 1.0;
}

struct ScoreGradient {
  std::vector<double> d_h, d_t, d_r_c, d_tau;
};

inline ScoreGradient score_gradients(std::span<const double> h, RelationView rel, std::span<const double> t) {
  check_dims(h, rel, t);
  const std::size_t n = h.size();
  ScoreGradient g{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t k = 0; k < n; k += 2) {
    const double a = rel.r_c[k], b = rel.r_c[k + 1];
    const double h1 = h[k], h2 = h[k + 1], t1 = t[k], t2 = t[k + 1];
    g.d_h[k] = a * t1 - b * t2;
    g.d_h[k + 1] = a * t2 + b * t1;
    g.d_t[k] = a * h1 + b * h2 + rel.tau[k];
    g.d_t[k + 1] = a * h2 - b * h1 + rel.tau[k + 1];
    g.d_r_c[k] = h1 * t1 + h2 * t2;
    g.d_r_c[k + 1] = h2 * t1 - h1 * t2;
    g.d_tau[k] = t1;
    g.d_tau[k + 1] = t2;
  }
  return g;
}

// Backpropagates dL/dq through q = R_c^T h + tau, accumulating into the
// head and relation gradients.
inline void backprop_query(std::span<const double> h, RelationView rel, std::span<const double> d_q,
                           std::span<double> d_h, std::span<double> d_r_c, std::span<double> d_tau) {
  for (std::size_t k = 0; k < h.size(); k += 2) {
    const double a = rel.r_c[k], b = rel.r_c[k + 1];
    const double h1 = h[k], h2 = h[k + 1];
    const double g1 = d_q[k], g2 = d_q[k + 1];
    d_h[k] += a * g1 - b * g2;
    d_h[k + 1] += b * g1 + a * g2;
    d_r_c[k] += h1 * g1 + h2 * g2;
    d_r_c[k + 1] += h2 * g1 - h1 * g2;
    d_tau[k] += g1;
    d_tau[k + 1] += g2;
  }
}

// ---- materialized matrices (test oracle and pattern checks) ---------------

inline Eigen::MatrixXd materialize_complex_block(std::span<const double> r_c) {
  require(r_c.size() % 2 == 0, "embedding dimension must be even");
  const auto n = static_cast<Eigen::Index>(r_c.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k < n; k += 2) {
    const double a = r_c[static_cast<std::size_t>(k)], b = r_c[static_cast<std::size_t>(k + 1)];
    m(k, k) = a;
    m(k, k + 1) = -b;
    m(k + 1, k) = b;
    m(k + 1, k + 1) = a;
  }
  return m;
}

// [[R_c, 0], [tau^T, 1]], of size (n+1) x (n+1).
inline Eigen::MatrixXd materialize_star_matrix(RelationView rel) {
  require(rel.r_c.size() % 2 == 0, "embedding dimension must be even");
  require(rel.tau.size() == rel.r_c.size(), "dimension mismatch between r_c and tau");
  const auto n = static_cast<Eigen::Index>(rel.r_c.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n + 1, n + 1);
  m.topLeftCorner(n, n) = materialize_complex_block(rel.r_c);
  for (Eigen::Index j = 0; j < n; ++j) m(n, j) = rel.tau[static_cast<std::size_t>(j)];
  m(n, n) = 1.0;
  return m;
}

inline Eigen::VectorXd homogeneous(std::span<const double> x) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(x.size()) + 1);
  for (std::size_t i = 0; i < x.size(); ++i) v(static_cast<Eigen::Index>(i)) = x[i];
  v(static_cast<Eigen::Index>(x.size())) = 1.0;
  return v;
}

// Translation by tau written as the homogeneous product
// [[I, tau], [0, 1]] [x; 1]; returns the first n coordinates.
inline std::vector<double> apply_translation_matrix(std::span<const double> x, std::span<const double> tau) {
  require(x.size() == tau.size(), "apply_translation_matrix: length mismatch");
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n + 1, n + 1);
  for (Eigen::Index i = 0; i < n; ++i) m(i, n) = tau[static_cast<std::size_t>(i)];
  Eigen::VectorXd y = m * homogeneous(x);
  require(y(n) == 1.0, "homogeneous coordinate must stay 1");
  return {y.data(), y.data() + n};
}

// ---- embedding table -------------------------------------------------------

struct EmbeddingTable {
  std::size_t dim = 0;
  std::size_t num_entities = 0;
  std::size_t num_relations = 0;  // original relations; rows hold 2x this
  ModelKind kind = ModelKind::STaR;
  Matrix entities;  // num_entities x dim
  Matrix rel_c;     // 2*num_relations x dim
  Matrix rel_tau;   // 2*num_relations x dim

  std::size_t num_relation_rows() const noexcept { return rel_c.rows(); }

  RelationView relation(RelationId r) const {
    require(r >= 0 && static_cast<std::size_t>(r) < rel_c.rows(), "relation id out of range");
    return {rel_c.row(static_cast<std::size_t>(r)), rel_tau.row(static_cast<std::size_t>(r))};
  }
  std::span<const double> entity(EntityId e) const {
    require(e >= 0 && static_cast<std::size_t>(e) < entities.rows(), "entity id out of range");
    return entities.row(static_cast<std::size_t>(e));
  }

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;
};

inline double score(const EmbeddingTable& table, EntityId h, RelationId r, EntityId t) {
  return score(table.entity(h), table.relation(r), table.entity(t));
}

#ifdef STAR_BATCH_FLOAT32
using BatchAccumulator = float;
#else
using BatchAccumulator = double;
#endif

// Scores of (head, rel, e) for every entity e, via the projected query
// vector q = R_c^T h + tau: out[e] = q . e + 1.
template <typename Accum = BatchAccumulator>
inline void score_all_tails(const Matrix& entities, std::span<const double> q, std::span<double> out) {
  const std::size_t n = q.size();
  for (std::size_t e = 0; e < entities.rows(); ++e) {
    auto row = entities.row(e);
    Accum s = 0;
    for (std::size_t i = 0; i < n; ++i) s += static_cast<Accum>(q[i]) * static_cast<Accum>(row[i]);
    out[e] = static_cast<double>(s) + 1.0;
  }
}

inline std::vector<double> score_batch(const EmbeddingTable& table, EntityId head, RelationId rel) {
  auto h = table.entity(head);
  auto r = table.relation(rel);
  std::vector<double> q(table.dim);
  query_vector(h, r, q);
  std::vector<double> out(table.num_entities);
  score_all_tails(table.entities, q, out);
  return out;
}

// Projects every 2x2 block of r_c onto the unit circle (pure rotation).
// Zero blocks become the identity rotation.
inline void project_unit_blocks(std::span<double> r_c) {
  for (std::size_t k = 0; k < r_c.size(); k += 2) {
    double norm = std::hypot(r_c[k], r_c[k + 1]);
    if (norm == 0.0) {
      r_c[k] = 1.0;
      r_c[k + 1] = 0.0;
    } else {
      r_c[k] /= norm;
      r_c[k + 1] /= norm;
    }
  }
}

// Forces the structural constraints of `table.kind` onto relation rows.
inline void enforce_model_constraints(EmbeddingTable& table) {
  for (std::size_t r = 0; r < table.num_relation_rows(); ++r) {
    auto rc = table.rel_c.row(r);
    auto tau = table.rel_tau.row(r);
    if (!has_translation(table.kind)) std::fill(tau.begin(), tau.end(), 0.0);
    if (!has_rotation(table.kind))
      for (std::size_t k = 1; k < rc.size(); k += 2) rc[k] = 0.0;
    if (table.kind == ModelKind::TaR) project_unit_blocks(rc);
  }
}

inline EmbeddingTable init_embeddings(std::size_t num_entities, std::size_t num_relations, std::size_t dim,
                                      ModelKind kind, double init_scale, std::uint64_t seed) {
  if (dim == 0 || dim % 2 != 0) throw ContractViolation("embedding dimension must be even and positive");
  require(init_scale > 0.0, "init_scale must be positive");
  EmbeddingTable t;
  t.dim = dim;
  t.num_entities = num_entities;
  t.num_relations = num_relations;
  t.kind = kind;
  t.entities = Matrix(num_entities, dim);
  t.rel_c = Matrix(2 * num_relations, dim);
  t.rel_tau = Matrix(2 * num_relations, dim);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, init_scale);
  for (auto& v : t.entities.flat()) v = normal(rng);
  for (auto& v : t.rel_c.flat()) v = normal(rng);
  enforce_model_constraints(t);
  return t;
}

}  // namespace star
