#pragma once

// Filtered link-prediction ranking. Head prediction is always asked as a
// tail query on the reciprocal relation.

#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <thread>

#include <json.hpp>

#include "model.hpp"
#include "triple_store.hpp"

namespace star {

enum class TieRule { Pessimistic, Random };

inline TieRule parse_tie_rule(const std::string& s) {
  if (s == "pessimistic") return TieRule::Pessimistic;
  if (s == "random") return TieRule::Random;
  throw ConfigError("eval.tie_rule: unknown tie rule '" + s + "' (expected pessimistic|random)");
}

inline const char* to_string(TieRule t) { return t == TieRule::Pessimistic ? "pessimistic" : "random"; }

enum class Direction { Both, Tail, Head };

inline const char* to_string(Direction d) {
  switch (d) {
    case Direction::Both: return "both";
    case Direction::Tail: return "tail";
    case Direction::Head: return "head";
  }
  return "?";
}

struct EvalOptions {
  TieRule tie_rule = TieRule::Pessimistic;
  std::uint64_t seed = 0;  // only used by TieRule::Random
  std::size_t threads = 1;
  Direction direction = Direction::Both;
};

// A query (entity, relation, ?) whose expected answer is `answer`.
struct Query {
  EntityId entity;
  RelationId relation;
  EntityId answer;
};

// Number of tied rivals the true answer is placed after under TieRule::Random.
// Depends only on (seed, query index) so any implementation can reproduce it.
inline std::size_t random_tie_offset(std::uint64_t seed, std::size_t query_index, std::size_t ties) {
  if (ties == 0) return 0;
  return static_cast<std::size_t>(splitmix64(seed ^ splitmix64(query_index)) % (ties + 1));
}

// rank = 1 + #(rivals scoring strictly higher) + tie offset, where rivals are
// all candidates except the answer and the other known-true answers.
inline std::size_t rank_from_scores(std::span<const double> scores, EntityId answer,
                                    std::span<const EntityId> known, TieRule tie, std::uint64_t seed,
                                    std::size_t query_index) {
  const double target = scores[static_cast<std::size_t>(answer)];
  std::size_t greater = 0, ties = 0;
  for (std::size_t e = 0; e < scores.size(); ++e) {
    if (scores[e] > target)
      ++greater;
    else if (scores[e] == target)
      ++ties;
  }
  // Remove filtered candidates (the answer itself is in `known`).
  for (auto k : known) {
    const double s = scores[static_cast<std::size_t>(k)];
    if (s > target)
      --greater;
    else if (s == target)
      --ties;
  }
  if (tie == TieRule::Pessimistic) return 1 + greater + ties;
  return 1 + greater + random_tie_offset(seed, query_index, ties);
}

inline std::size_t filtered_rank(const EmbeddingTable& table, const TripleStore& store, const Query& query,
                                 TieRule tie = TieRule::Pessimistic, std::uint64_t seed = 0,
                                 std::size_t query_index = 0) {
  auto known = store.known_answers(query.entity, query.relation);
  if (!std::binary_search(known.begin(), known.end(), query.answer))
    throw ContractViolation("filtered_rank: query triple missing from the filter index");
  auto scores = score_batch(table, query.entity, query.relation);
  return rank_from_scores(scores, query.answer, known, tie, seed, query_index);
}

struct RelationMetrics {
  RelationId relation = 0;
  double mrr = 0.0;
  std::size_t queries = 0;
  std::size_t triples = 0;
};

struct CategoryMetrics {
  double mrr = 0.0;
  std::size_t queries = 0;
};

inline constexpr std::array<std::size_t, 3> kHitsAt{1, 3, 10};

struct EvalReport {
  double mrr = 0.0;
  std::map<std::size_t, double> hits;
  std::vector<RelationMetrics> per_relation;
  std::map<RelationCategory, CategoryMetrics> per_class;
  Direction direction = Direction::Both;
  std::size_t num_queries = 0;
  std::vector<std::size_t> ranks;  // one per query, tail query then head query per triple
};

// Queries of a split in evaluation order: for each triple its tail query then
// its head query (as permitted by `direction`).
inline std::vector<Query> make_queries(const TripleStore& store, std::span<const Triple> triples, Direction dir) {
  std::vector<Query> qs;
  qs.reserve(2 * triples.size());
  for (const auto& t : triples) {
    if (dir != Direction::Head) qs.push_back({t.head, t.relation, t.tail});
    if (dir != Direction::Tail) qs.push_back({t.tail, store.reciprocal(t.relation), t.head});
  }
  return qs;
}

inline std::vector<std::size_t> rank_queries(const EmbeddingTable& table, const TripleStore& store,
                                             std::span<const Query> queries, const EvalOptions& opts) {
  for (const auto& q : queries)
    if (!store.is_known(q.entity, q.relation, q.answer))
      throw ContractViolation("evaluate: query triple missing from the filter index");
  std::vector<std::size_t> ranks(queries.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<double> q(table.dim), scores(table.num_entities);
    for (std::size_t i = begin; i < end; ++i) {
      const auto& query = queries[i];
      query_vector(table.entity(query.entity), table.relation(query.relation), q);
      score_all_tails(table.entities, q, scores);
      ranks[i] = rank_from_scores(scores, query.answer, store.known_answers(query.entity, query.relation),
                                  opts.tie_rule, opts.seed, i);
    }
  };
  std::size_t threads = std::max<std::size_t>(1, std::min(opts.threads, queries.size()));
  if (threads == 1) {
    work(0, queries.size());
  } else {
    std::vector<std::jthread> pool;
    std::size_t chunk = (queries.size() + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      std::size_t b = t * chunk, e = std::min(queries.size(), b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
  }
  return ranks;
}

inline EvalReport evaluate(const EmbeddingTable& table, const TripleStore& store, Split split,
                           const RelationClassification* classes = nullptr, const EvalOptions& opts = {}) {
  const auto& triples = store.split(split);
  if (triples.empty()) throw ContractViolation(std::string("evaluate: split '") + to_string(split) + "' is empty");
  require(table.num_entities == store.num_entities(), "evaluate: entity count mismatch between table and store");
  require(table.num_relation_rows() == store.num_augmented_relations(),
          "evaluate: relation count mismatch between table and store");

  auto queries = make_queries(store, triples, opts.direction);
  EvalReport report;
  report.direction = opts.direction;
  report.num_queries = queries.size();
  report.ranks = rank_queries(table, store, queries, opts);

  std::vector<double> rr_sum(store.num_relations(), 0.0);
  std::vector<std::size_t> rr_count(store.num_relations(), 0), triple_count(store.num_relations(), 0);
  for (const auto& t : triples) ++triple_count[static_cast<std::size_t>(t.relation)];

  double total = 0.0;
  std::map<std::size_t, std::size_t> hit_counts;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const double rr = 1.0 / static_cast<double>(report.ranks[i]);
    total += rr;
    for (auto k : kHitsAt)
      if (report.ranks[i] <= k) ++hit_counts[k];
    auto r = static_cast<std::size_t>(store.original(queries[i].relation));
    rr_sum[r] += rr;
    ++rr_count[r];
  }
  const double nq = static_cast<double>(queries.size());
  report.mrr = total / nq;
  for (auto k : kHitsAt) report.hits[k] = static_cast<double>(hit_counts[k]) / nq;

  for (std::size_t r = 0; r < store.num_relations(); ++r) {
    if (rr_count[r] == 0) continue;
    report.per_relation.push_back(
        {static_cast<RelationId>(r), rr_sum[r] / static_cast<double>(rr_count[r]), rr_count[r], triple_count[r]});
  }
  if (classes != nullptr) {
    std::map<RelationCategory, double> sums;
    for (const auto& rel : report.per_relation) {
      auto cat = classes->category_of(rel.relation);
      if (!cat) continue;  // relation never seen in train
      sums[*cat] += rel.mrr * static_cast<double>(rel.queries);
      report.per_class[*cat].queries += rel.queries;
    }
    for (auto& [cat, m] : report.per_class) m.mrr = sums[cat] / static_cast<double>(m.queries);
  }
  return report;
}

inline nlohmann::json to_json(const EvalReport& r, const Vocab* vocab = nullptr) {
  nlohmann::json j;
  j["mrr"] = r.mrr;
  j["direction"] = to_string(r.direction);
  j["num_queries"] = r.num_queries;
  for (const auto& [k, v] : r.hits) j["hits"][std::to_string(k)] = v;
  j["per_relation"] = nlohmann::json::array();
  for (const auto& rel : r.per_relation) {
    nlohmann::json row{{"relation", rel.relation}, {"mrr", rel.mrr}, {"queries", rel.queries},
                       {"triples", rel.triples}};
    if (vocab) row["name"] = vocab->relation_name(rel.relation);
    j["per_relation"].push_back(row);
  }
  j["per_class"] = nlohmann::json::object();
  for (const auto& [cat, m] : r.per_class) j["per_class"][to_string(cat)] = {{"mrr", m.mrr}, {"queries", m.queries}};
  return j;
}

// One row per relation of the vocabulary: name, share of the split's triples,
// MRR (empty when the relation has no triple in the split).
inline void write_per_relation_csv(const EvalReport& r, const Vocab& vocab, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  std::size_t total = 0;
  std::map<RelationId, const RelationMetrics*> by_id;
  for (const auto& rel : r.per_relation) {
    total += rel.triples;
    by_id[rel.relation] = &rel;
  }
  out << "relation,proportion,mrr\n";
  for (std::size_t i = 0; i < vocab.num_relations(); ++i) {
    std::string name = vocab.relation_name(static_cast<RelationId>(i));
    if (name.find_first_of(",\"") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : name) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
      name = quoted + "\"";
    }
    auto it = by_id.find(static_cast<RelationId>(i));
    out << name << ',';
    if (it == by_id.end()) {
      out << "0,\n";
      continue;
    }
    out << static_cast<double>(it->second->triples) / static_cast<double>(total) << ',' << it->second->mrr << '\n';
  }
}

}  // namespace star
