#pragma once

// Frobenius and DURA penalties for a single (h, r, t).
//
// DURA expands, in homogeneous coordinates,
//   |h^|^2 + |R* t^|^2 + |t^|^2 + |h^T R*|^2
//     = |h|^2 + |t|^2 + |h^T R_c + tau^T|^2 + |R_c t|^2 + (tau.t)^2 + 2 tau.t + 4.
// The `literal` variant keeps the published expansion, which has the single
// term tau.t in place of (tau.t)^2 + 2 tau.t; `exact` keeps the true one. Both
// drop the constant 4.

#include <string>

#include "model.hpp"

namespace star {

enum class RegKind { None, Fro, DURA };
enum class DuraVariant { Literal, Exact };

inline RegKind parse_reg_kind(const std::string& s) {
  if (s == "none") return RegKind::None;
  if (s == "fro" || s == "Fro") return RegKind::Fro;
  if (s == "dura" || s == "DURA") return RegKind::DURA;
  throw ConfigError("reg.kind: unknown regularizer '" + s + "' (expected none|fro|dura)");
}

inline const char* to_string(RegKind k) {
  switch (k) {
    case RegKind::None: return "none";
    case RegKind::Fro: return "fro";
    case RegKind::DURA: return "dura";
  }
  return "?";
}

inline DuraVariant parse_dura_variant(const std::string& s) {
  if (s == "literal") return DuraVariant::Literal;
  if (s == "exact") return DuraVariant::Exact;
  throw ConfigError("reg.dura_variant: unknown variant '" + s + "' (expected literal|exact)");
}

inline const char* to_string(DuraVariant v) { return v == DuraVariant::Literal ? "literal" : "exact"; }

struct RegConfig {
  RegKind kind = RegKind::None;
  double lambda = 0.0;
  DuraVariant dura_variant = DuraVariant::Literal;
};

struct PenaltyGradient {
  std::vector<double> d_h, d_t, d_r_c, d_tau;

  explicit PenaltyGradient(std::size_t n) : d_h(n, 0.0), d_t(n, 0.0), d_r_c(n, 0.0), d_tau(n, 0.0) {}
};

inline double fro_penalty(std::span<const double> h, RelationView rel, std::span<const double> t) {
  check_dims(h, rel, t);
  return squared_norm(h) + squared_norm(t) + squared_norm(rel.r_c) + squared_norm(rel.tau);
}

inline PenaltyGradient fro_gradient(std::span<const double> h, RelationView rel, std::span<const double> t) {
  check_dims(h, rel, t);
  PenaltyGradient g(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    g.d_h[i] = 2.0 * h[i];
    g.d_t[i] = 2.0 * t[i];
    g.d_r_c[i] = 2.0 * rel.r_c[i];
    g.d_tau[i] = 2.0 * rel.tau[i];
  }
  return g;
}

namespace detail {

// R_c t, block by block.
inline void rotate(std::span<const double> r_c, std::span<const double> t, std::span<double> out) {
  for (std::size_t k = 0; k < r_c.size(); k += 2) {
    const double a = r_c[k], b = r_c[k + 1];
    out[k] = a * t[k] - b * t[k + 1];
    out[k + 1] = b * t[k] + a * t[k + 1];
  }
}

}  // namespace detail

inline double dura_penalty(std::span<const double> h, RelationView rel, std::span<const double> t,
                           DuraVariant variant = DuraVariant::Literal) {
  check_dims(h, rel, t);
  const std::size_t n = h.size();
  std::vector<double> u(n), v(n);
  query_vector(h, rel, u);  // (h^T R_c + tau^T)^T
  detail::rotate(rel.r_c, t, v);
  const double tau_t = dot(rel.tau, t);
  double base = squared_norm(h) + squared_norm(t) + squared_norm(u) + squared_norm(v);
  switch (variant) {
    case DuraVariant::Literal: return base + tau_t;
    case DuraVariant::Exact: return base + tau_t * tau_t + 2.0 * tau_t;
  }
  throw ContractViolation("unknown DURA variant");
}

inline PenaltyGradient dura_gradient(std::span<const double> h, RelationView rel, std::span<const double> t,
                                     DuraVariant variant = DuraVariant::Literal) {
  check_dims(h, rel, t);
  const std::size_t n = h.size();
  PenaltyGradient g(n);
  std::vector<double> u(n), v(n), d_u(n);
  query_vector(h, rel, u);
  detail::rotate(rel.r_c, t, v);

  for (std::size_t i = 0; i < n; ++i) {
    g.d_h[i] = 2.0 * h[i];
    g.d_t[i] = 2.0 * t[i];
    d_u[i] = 2.0 * u[i];
  }
  backprop_query(h, rel, d_u, g.d_h, g.d_r_c, g.d_tau);

  // |R_c t|^2
  for (std::size_t k = 0; k < n; k += 2) {
    const double a = rel.r_c[k], b = rel.r_c[k + 1];
    const double v1 = 2.0 * v[k], v2 = 2.0 * v[k + 1];
    g.d_t[k] += a * v1 + b * v2;
    g.d_t[k + 1] += -b * v1 + a * v2;
    g.d_r_c[k] += v1 * t[k] + v2 * t[k + 1];
    g.d_r_c[k + 1] += -v1 * t[k + 1] + v2 * t[k];
  }

  // translation/tail coupling term: c * tau.t contributes c*t to d_tau, c*tau to d_t
  const double tau_t = dot(rel.tau, t);
  const double coupling = variant == DuraVariant::Literal ? 1.0 : 2.0 * tau_t + 2.0;
  for (std::size_t i = 0; i < n; ++i) {
    g.d_tau[i] += coupling * t[i];
    g.d_t[i] += coupling * rel.tau[i];
  }
  return g;
}

inline double penalty(const RegConfig& cfg, std::span<const double> h, RelationView rel, std::span<const double> t) {
  switch (cfg.kind) {
    case RegKind::None: return 0.0;
    case RegKind::Fro: return fro_penalty(h, rel, t);
    case RegKind::DURA: return dura_penalty(h, rel, t, cfg.dura_variant);
  }
  return 0.0;
}

inline PenaltyGradient penalty_gradient(const RegConfig& cfg, std::span<const double> h, RelationView rel,
                                        std::span<const double> t) {
  switch (cfg.kind) {
    case RegKind::None: return PenaltyGradient(h.size());
    case RegKind::Fro: return fro_gradient(h, rel, t);
    case RegKind::DURA: return dura_gradient(h, rel, t, cfg.dura_variant);
  }
  return PenaltyGradient(h.size());
}

}  // namespace star
