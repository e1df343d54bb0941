#pragma once

// Full-softmax weighted cross-entropy training in the reciprocal setting.
//
// Each train triple (h, r, t) contributes two queries, (h, r, ?) with answer t
// and (t, r~, ?) with answer h, each scored against every entity:
//   w(t) * -log softmax(s(h, r, .))[t]  +  w(h) * -log softmax(s(t, r~, .))[h]
// plus lambda * Reg(h, r, t). The batch loss is the sum divided by the number
// of queries (2 * batch size).

#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <thread>

#include "evaluation.hpp"
#include "model.hpp"
#include "regularization.hpp"
#include "triple_store.hpp"

namespace star {

enum class OptimizerKind { Adagrad, SGD };

inline OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "adagrad" || s == "Adagrad") return OptimizerKind::Adagrad;
  if (s == "sgd" || s == "SGD") return OptimizerKind::SGD;
  throw ConfigError("train.optimizer: unknown optimizer '" + s + "' (expected adagrad|sgd)");
}

inline const char* to_string(OptimizerKind k) { return k == OptimizerKind::Adagrad ? "adagrad" : "sgd"; }

struct TrainConfig {
  std::size_t dim = 500;
  ModelKind model_kind = ModelKind::STaR;
  double init_scale = 1e-3;
  double lr = 0.1;
  std::size_t batch_size = 100;
  std::size_t epochs = 50;
  double w0 = 0.0;
  RegConfig reg{};
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::Adagrad;
  double adagrad_epsilon = 1e-10;
  std::size_t eval_every = 0;  // 0 disables validation
  std::size_t threads = 1;
  TieRule tie_rule = TieRule::Pessimistic;

  void validate() const {
    if (dim == 0 || dim % 2 != 0) throw ConfigError("model.dim: must be a positive even number");
    if (batch_size < 1) throw ConfigError("train.batch_size: must be >= 1");
    if (w0 < 0.0 || w0 > 1.0) throw ConfigError("train.w0: must lie in [0, 1]");
    if (!(lr > 0.0)) throw ConfigError("train.lr: must be positive");
    if (!(init_scale > 0.0)) throw ConfigError("model.init_scale: must be positive");
    if (reg.lambda < 0.0) throw ConfigError("reg.lambda: must be >= 0");
    if (threads < 1) throw ConfigError("train.threads: must be >= 1");
  }
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// w(e) = w0 * count(e) / max count + (1 - w0).
inline double tail_weight(EntityId entity, const EntityFrequency& counts, double w0) {
  if (counts.counts.empty() || counts.max == 0) throw ContractViolation("tail_weight: empty entity counts");
  const double ratio =
      static_cast<double>(counts.counts.at(static_cast<std::size_t>(entity))) / static_cast<double>(counts.max);
  return w0 * ratio + (1.0 - w0);
}

// Per-entity answer weights for tail queries (tail-side counts) and head
// queries (head-side counts).
struct AnswerWeights {
  std::vector<double> tail;
  std::vector<double> head;

  static AnswerWeights uniform(std::size_t num_entities) {
    return {std::vector<double>(num_entities, 1.0), std::vector<double>(num_entities, 1.0)};
  }

  static AnswerWeights from_store(const TripleStore& store, double w0) {
    AnswerWeights w;
    auto tails = entity_frequency(store, Side::Tail);
    auto heads = entity_frequency(store, Side::Head);
    w.tail.resize(store.num_entities());
    w.head.resize(store.num_entities());
    for (std::size_t e = 0; e < store.num_entities(); ++e) {
      w.tail[e] = tail_weight(static_cast<EntityId>(e), tails, w0);
      w.head[e] = tail_weight(static_cast<EntityId>(e), heads, w0);
    }
    return w;
  }
};

struct Gradients {
  Matrix entities, rel_c, rel_tau;

  Gradients() = default;
  explicit Gradients(const EmbeddingTable& t)
      : entities(t.entities.rows(), t.dim), rel_c(t.rel_c.rows(), t.dim), rel_tau(t.rel_tau.rows(), t.dim) {}

  void zero() {
    entities.fill(0.0);
    rel_c.fill(0.0);
    rel_tau.fill(0.0);
  }

  void add(const Gradients& other) {
    auto acc = [](Matrix& a, const Matrix& b) {
      auto fa = a.flat();
      auto fb = b.flat();
      for (std::size_t i = 0; i < fa.size(); ++i) fa[i] += fb[i];
    };
    acc(entities, other.entities);
    acc(rel_c, other.rel_c);
    acc(rel_tau, other.rel_tau);
  }
};

namespace detail {

// Adds the contribution of one query (entity, relation, ?) -> answer, scaled
// by `coef`, and returns coef * cross-entropy.
inline double accumulate_query(const EmbeddingTable& table, EntityId entity, RelationId relation, EntityId answer,
                               double coef, Gradients& grad, std::vector<double>& q, std::vector<double>& scores,
                               std::vector<double>& d_q) {
  const std::size_t n = table.dim;
  auto h = table.entity(entity);
  auto rel = table.relation(relation);
  query_vector(h, rel, q);
  score_all_tails(table.entities, q, scores);

  const double true_score = scores[static_cast<std::size_t>(answer)];
  double max_s = -std::numeric_limits<double>::infinity();
  for (double s : scores) max_s = std::max(max_s, s);
  double sum = 0.0;
  for (double& s : scores) {
    s = std::exp(s - max_s);
    sum += s;
  }
  const double ce = max_s + std::log(sum) - true_score;

  std::fill(d_q.begin(), d_q.end(), 0.0);
  for (std::size_t e = 0; e < table.num_entities; ++e) {
    double p = scores[e] / sum;
    double w = coef * (p - (static_cast<EntityId>(e) == answer ? 1.0 : 0.0));
    if (w == 0.0) continue;
    auto row = table.entities.row(e);
    auto g_row = grad.entities.row(e);
    for (std::size_t i = 0; i < n; ++i) {
      g_row[i] += w * q[i];
      d_q[i] += w * row[i];
    }
  }
  backprop_query(h, rel, d_q, grad.entities.row(static_cast<std::size_t>(entity)),
                 grad.rel_c.row(static_cast<std::size_t>(relation)),
                 grad.rel_tau.row(static_cast<std::size_t>(relation)));
  return coef * ce;
}

inline void accumulate_penalty(const EmbeddingTable& table, const Triple& t, const RegConfig& reg, double coef,
                               Gradients& grad, double& loss) {
  if (reg.kind == RegKind::None || reg.lambda == 0.0) return;
  auto h = table.entity(t.head);
  auto tl = table.entity(t.tail);
  auto rel = table.relation(t.relation);
  loss += coef * penalty(reg, h, rel, tl);
  auto g = penalty_gradient(reg, h, rel, tl);
  auto gh = grad.entities.row(static_cast<std::size_t>(t.head));
  auto gt = grad.entities.row(static_cast<std::size_t>(t.tail));
  auto gc = grad.rel_c.row(static_cast<std::size_t>(t.relation));
  auto ga = grad.rel_tau.row(static_cast<std::size_t>(t.relation));
  for (std::size_t i = 0; i < table.dim; ++i) {
    gh[i] += coef * g.d_h[i];
    gt[i] += coef * g.d_t[i];
    gc[i] += coef * g.d_r_c[i];
    ga[i] += coef * g.d_tau[i];
  }
}

inline void process_triples(const EmbeddingTable& table, std::span<const Triple> triples, const AnswerWeights& weights,
                            const RegConfig& reg, double scale, Gradients& grad, double& loss) {
  std::vector<double> q(table.dim), scores(table.num_entities), d_q(table.dim);
  const auto nr = static_cast<RelationId>(table.num_relations);
  for (const auto& t : triples) {
    const RelationId inverse = t.relation + nr;
    loss += accumulate_query(table, t.head, t.relation, t.tail, scale * weights.tail[static_cast<std::size_t>(t.tail)],
                             grad, q, scores, d_q);
    loss += accumulate_query(table, t.tail, inverse, t.head, scale * weights.head[static_cast<std::size_t>(t.head)],
                             grad, q, scores, d_q);
    accumulate_penalty(table, t, reg, scale * reg.lambda, grad, loss);
  }
}

}  // namespace detail

// Zeroes the gradient entries of parameters the model kind keeps fixed.
inline void mask_gradients(ModelKind kind, Gradients& grad) {
  if (!has_translation(kind)) grad.rel_tau.fill(0.0);
  if (!has_rotation(kind)) {
    for (std::size_t r = 0; r < grad.rel_c.rows(); ++r) {
      auto row = grad.rel_c.row(r);
      for (std::size_t k = 1; k < row.size(); k += 2) row[k] = 0.0;
    }
  }
}

// Mean loss over the 2*|batch| queries, gradients written into `grad`.
inline double batch_loss(std::span<const Triple> batch, const EmbeddingTable& table, const AnswerWeights& weights,
                         const RegConfig& reg, Gradients& grad, std::size_t threads = 1) {
  require(!batch.empty(), "batch_loss: empty batch");
  require(weights.tail.size() == table.num_entities && weights.head.size() == table.num_entities,
          "batch_loss: answer weights do not match the entity count");
  grad.zero();
  const double scale = 1.0 / (2.0 * static_cast<double>(batch.size()));
  double loss = 0.0;
  threads = std::max<std::size_t>(1, std::min(threads, batch.size()));
  if (threads == 1) {
    detail::process_triples(table, batch, weights, reg, scale, grad, loss);
  } else {
    // Fixed chunking and in-order reduction: results depend on the thread
    // count but not on scheduling.
    std::vector<Gradients> partial(threads, Gradients(table));
    std::vector<double> partial_loss(threads, 0.0);
    std::size_t chunk = (batch.size() + threads - 1) / threads;
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < threads; ++w) {
        std::size_t b = w * chunk, e = std::min(batch.size(), b + chunk);
        if (b >= e) continue;
        pool.emplace_back([&, w, b, e] {
          detail::process_triples(table, batch.subspan(b, e - b), weights, reg, scale, partial[w], partial_loss[w]);
        });
      }
    }
    for (std::size_t w = 0; w < threads; ++w) {
      grad.add(partial[w]);
      loss += partial_loss[w];
    }
  }
  mask_gradients(table.kind, grad);
  if (!std::isfinite(loss)) throw TrainingError("non-finite batch loss (score overflow)");
  return loss;
}

struct BatchLoss {
  double loss;
  Gradients grad;
};

inline BatchLoss batch_loss(std::span<const Triple> batch, const EmbeddingTable& table, const AnswerWeights& weights,
                            const RegConfig& reg) {
  BatchLoss out{0.0, Gradients(table)};
  out.loss = batch_loss(batch, table, weights, reg, out.grad);
  return out;
}

// ---- optimizers --------------------------------------------------------------

// accumulator += g^2; param -= lr * g / sqrt(accumulator + eps). Returns false
// if a parameter became non-finite.
inline bool adagrad_update(std::span<double> param, std::span<const double> grad, std::span<double> accumulator,
                           double lr, double eps = 1e-10) {
  bool finite = true;
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    if (g == 0.0) continue;
    accumulator[i] += g * g;
    param[i] -= lr * g / std::sqrt(accumulator[i] + eps);
    finite = finite && std::isfinite(param[i]);
  }
  return finite;
}

inline bool sgd_update(std::span<double> param, std::span<const double> grad, double lr) {
  bool finite = true;
  for (std::size_t i = 0; i < param.size(); ++i) {
    param[i] -= lr * grad[i];
    finite = finite && std::isfinite(param[i]);
  }
  return finite;
}

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::Adagrad;
  double epsilon = 1e-10;
  Matrix acc_entities, acc_rel_c, acc_rel_tau;  // Adagrad only

  OptimizerState() = default;
  OptimizerState(OptimizerKind k, const EmbeddingTable& t, double eps) : kind(k), epsilon(eps) {
    if (k == OptimizerKind::Adagrad) {
      acc_entities = Matrix(t.entities.rows(), t.dim);
      acc_rel_c = Matrix(t.rel_c.rows(), t.dim);
      acc_rel_tau = Matrix(t.rel_tau.rows(), t.dim);
    }
  }

  bool step(EmbeddingTable& table, const Gradients& grad, double lr) {
    bool ok = true;
    if (kind == OptimizerKind::Adagrad) {
      ok &= adagrad_update(table.entities.flat(), grad.entities.flat(), acc_entities.flat(), lr, epsilon);
      ok &= adagrad_update(table.rel_c.flat(), grad.rel_c.flat(), acc_rel_c.flat(), lr, epsilon);
      ok &= adagrad_update(table.rel_tau.flat(), grad.rel_tau.flat(), acc_rel_tau.flat(), lr, epsilon);
    } else {
      ok &= sgd_update(table.entities.flat(), grad.entities.flat(), lr);
      ok &= sgd_update(table.rel_c.flat(), grad.rel_c.flat(), lr);
      ok &= sgd_update(table.rel_tau.flat(), grad.rel_tau.flat(), lr);
    }
    if (table.kind == ModelKind::TaR)
      for (std::size_t r = 0; r < table.rel_c.rows(); ++r) project_unit_blocks(table.rel_c.row(r));
    return ok;
  }
};

// ---- training loop -------------------------------------------------------------

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  std::optional<double> valid_mrr;
  double wall_ms = 0.0;
};

inline nlohmann::json to_json(const EpochLog& e) {
  nlohmann::json j{{"epoch", e.epoch}, {"mean_loss", e.mean_loss}, {"wall_ms", e.wall_ms}};
  j["valid_mrr"] = e.valid_mrr ? nlohmann::json(*e.valid_mrr) : nlohmann::json(nullptr);
  return j;
}

struct TrainResult {
  EmbeddingTable table;  // best-validation table, or the final one without validation
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  std::optional<double> best_valid_mrr;
};

struct TrainHooks {
  std::function<void(const EpochLog&)> on_epoch;
};

inline TrainResult train(const TripleStore& store, const TrainConfig& config, const TrainHooks& hooks = {}) {
  config.validate();
  require(!store.train().empty(), "train: train split is empty");

  TrainResult result;
  EmbeddingTable table = init_embeddings(store.num_entities(), store.num_relations(), config.dim, config.model_kind,
                                         config.init_scale, config.seed);
  OptimizerState optimizer(config.optimizer, table, config.adagrad_epsilon);
  auto weights = AnswerWeights::from_store(store, config.w0);
  Gradients grad(table);

  std::vector<Triple> order = store.train();
  std::mt19937_64 shuffle_rng(splitmix64(config.seed ^ 0x5eedULL));
  const bool validate = config.eval_every > 0 && !store.valid().empty();
  EvalOptions eval_opts{config.tie_rule, config.seed, config.threads, Direction::Both};

  result.table = table;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size, ++batch_index) {
      auto batch = std::span<const Triple>(order).subspan(b, std::min(config.batch_size, order.size() - b));
      double loss = 0.0;
      try {
        loss = batch_loss(batch, table, weights, config.reg, grad, config.threads);
      } catch (const TrainingError& e) {
        throw TrainingError(std::string(e.what()) + " at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batch_index));
      }
      loss_sum += loss * static_cast<double>(batch.size());
      if (!optimizer.step(table, grad, config.lr))
        throw TrainingError("parameters diverged (non-finite) at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batch_index));
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.mean_loss = loss_sum / static_cast<double>(order.size());
    if (validate && epoch % config.eval_every == 0) {
      entry.valid_mrr = evaluate(table, store, Split::Valid, nullptr, eval_opts).mrr;
      if (!result.best_valid_mrr || *entry.valid_mrr > *result.best_valid_mrr) {
        result.best_valid_mrr = entry.valid_mrr;
        result.best_epoch = epoch;
        result.table = table;
      }
    }
    entry.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    result.log.push_back(entry);
    if (hooks.on_epoch) hooks.on_epoch(entry);
  }
  if (!result.best_valid_mrr) {
    result.table = std::move(table);
    result.best_epoch = config.epochs;
  }
  return result;
}

}  // namespace star
