#pragma once

// Seeded generators for toy knowledge graphs with known relational algebra.
//
// Base relations are drawn from simple rules (functional maps, N-to-1
// fan-ins, symmetric and anti-symmetric pairings, inverses); derived
// relations are compositions of earlier ones. Only derived triples are held
// out, so every valid/test fact follows from train facts by its rule.
//
// The `family` preset builds lineages of married couples:
//   husband_g -HasWife-> wife_g, husband_g/wife_g -HasChild-> husband_{g+1}
// with HasDaughterInLaw = HasChild then HasWife. Composing in the other order
// (HasWife then HasChild) leads to the child instead, which makes every
// daughter-in-law query from a husband order-discriminating.

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>

#include <json.hpp>

#include "config.hpp"
#include "triple_store.hpp"

namespace star {

enum class RuleKind { Functional, FanIn, Symmetric, Antisymmetric, InverseOf, Composed };

inline const char* to_string(RuleKind k) {
  switch (k) {
    case RuleKind::Functional: return "functional";
    case RuleKind::FanIn: return "fan_in";
    case RuleKind::Symmetric: return "symmetric";
    case RuleKind::Antisymmetric: return "antisymmetric";
    case RuleKind::InverseOf: return "inverse_of";
    case RuleKind::Composed: return "compose";
  }
  return "?";
}

struct RelationRule {
  std::string name;
  RuleKind kind = RuleKind::Functional;
  std::size_t count = 0;  // heads (functional), tails (fan_in) or pairs; 0 = num_entities / 2
  std::size_t fan = 2;    // heads per tail for fan_in
  std::string base;       // inverse_of
  std::string first, second;  // compose: first then second
  std::optional<bool> commutes;  // compose: declared relation between the two orders
};

struct SynthSpec {
  std::string preset;  // "" or "family"
  std::size_t num_entities = 200;
  std::size_t generations = 5;  // family preset
  std::vector<RelationRule> relations;
  std::uint64_t seed = 0;
  double holdout_fraction = 0.3;  // share of derived triples sent to test
  double valid_fraction = 0.1;    // share of derived triples sent to valid
};

class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GeneratedKG {
  TripleStore store;
  // Test tail queries (h, r, ?) whose swapped-order composition has a
  // non-empty answer set disjoint from the correct one. Indices into test().
  std::vector<std::size_t> order_discriminating;
  nlohmann::json spec_echo;
};

inline RuleKind parse_rule_kind(const std::string& s) {
  if (s == "functional") return RuleKind::Functional;
  if (s == "fan_in") return RuleKind::FanIn;
  if (s == "symmetric") return RuleKind::Symmetric;
  if (s == "antisymmetric") return RuleKind::Antisymmetric;
  if (s == "inverse_of") return RuleKind::InverseOf;
  if (s == "compose") return RuleKind::Composed;
  throw ConfigError("unknown relation rule '" + s + "'");
}

// synth.* keys; relations are `relation.<name> = <kind>[:args]` with optional
// `relation.<name>.count`, `.fan`, `.commutes`. Declaration order is kept.
inline SynthSpec synth_spec_from(const KeyValueConfig& kv) {
  SynthSpec spec;
  spec.preset = kv.get_string("synth.preset", "");
  spec.num_entities = kv.get_uint("synth.entities", spec.num_entities);
  spec.generations = kv.get_uint("synth.generations", spec.generations);
  spec.seed = kv.get_uint("synth.seed", spec.seed);
  spec.holdout_fraction = kv.get_double("synth.holdout", spec.holdout_fraction);
  spec.valid_fraction = kv.get_double("synth.valid", spec.valid_fraction);
  for (const auto& [key, value] : kv.with_prefix("relation.")) {
    std::string rest = key.substr(std::string("relation.").size());
    if (rest.find('.') != std::string::npos) continue;  // attribute key, read below
    kv.mark_used(key);
    RelationRule rule;
    rule.name = rest;
    auto colon = value.find(':');
    rule.kind = parse_rule_kind(value.substr(0, colon));
    std::string args = colon == std::string::npos ? "" : value.substr(colon + 1);
    if (rule.kind == RuleKind::InverseOf) {
      if (args.empty()) throw ConfigError(key + ": inverse_of needs a base relation");
      rule.base = args;
    } else if (rule.kind == RuleKind::Composed) {
      auto comma = args.find(',');
      if (comma == std::string::npos) throw ConfigError(key + ": compose needs 'first,second'");
      rule.first = args.substr(0, comma);
      rule.second = args.substr(comma + 1);
    }
    rule.count = kv.get_uint(key + ".count", 0);
    rule.fan = kv.get_uint(key + ".fan", 2);
    if (kv.has(key + ".commutes")) rule.commutes = kv.get_bool(key + ".commutes", false);
    spec.relations.push_back(rule);
  }
  return spec;
}

inline nlohmann::json to_json(const SynthSpec& s) {
  nlohmann::json j{{"preset", s.preset},
                   {"entities", s.num_entities},
                   {"generations", s.generations},
                   {"seed", s.seed},
                   {"holdout", s.holdout_fraction},
                   {"valid", s.valid_fraction}};
  j["relations"] = nlohmann::json::array();
  for (const auto& r : s.relations) {
    nlohmann::json rr{{"name", r.name}, {"kind", to_string(r.kind)}, {"count", r.count}, {"fan", r.fan}};
    if (!r.base.empty()) rr["base"] = r.base;
    if (!r.first.empty()) rr["compose"] = {r.first, r.second};
    if (r.commutes) rr["commutes"] = *r.commutes;
    j["relations"].push_back(rr);
  }
  return j;
}

namespace detail {

using Edge = std::pair<EntityId, EntityId>;
using EdgeSet = std::set<Edge>;

inline EdgeSet compose(const EdgeSet& first, const EdgeSet& second) {
  std::multimap<EntityId, EntityId> by_head;
  for (const auto& [h, t] : second) by_head.emplace(h, t);
  EdgeSet out;
  for (const auto& [a, b] : first) {
    auto [lo, hi] = by_head.equal_range(b);
    for (auto it = lo; it != hi; ++it) out.emplace(a, it->second);
  }
  return out;
}

inline std::set<EntityId> answers_from(const EdgeSet& edges, EntityId head) {
  std::set<EntityId> out;
  for (auto it = edges.lower_bound({head, std::numeric_limits<EntityId>::min()}); it != edges.end() && it->first == head;
       ++it)
    out.insert(it->second);
  return out;
}

}  // namespace detail

inline SynthSpec family_spec(std::size_t num_entities, std::size_t generations, std::uint64_t seed,
                             double holdout = 0.3, double valid = 0.1) {
  SynthSpec s;
  s.preset = "family";
  s.num_entities = num_entities;
  s.generations = generations;
  s.seed = seed;
  s.holdout_fraction = holdout;
  s.valid_fraction = valid;
  return s;
}

inline GeneratedKG generate(const SynthSpec& spec) {
  if (spec.holdout_fraction < 0.0 || spec.valid_fraction < 0.0 || spec.holdout_fraction + spec.valid_fraction >= 1.0)
    throw SpecError("holdout + valid fractions must lie in [0, 1)");
  std::mt19937_64 rng(spec.seed);
  std::vector<std::string> names;
  std::vector<std::pair<std::string, detail::EdgeSet>> relations;  // declaration order
  std::map<std::string, std::size_t> rel_index;
  std::vector<RelationRule> rules = spec.relations;
  std::size_t n = spec.num_entities;

  auto add_relation = [&](const std::string& name, detail::EdgeSet edges) {
    if (rel_index.count(name)) throw SpecError("relation '" + name + "' declared twice");
    rel_index[name] = relations.size();
    relations.emplace_back(name, std::move(edges));
  };
  auto edges_of = [&](const std::string& name) -> const detail::EdgeSet& {
    auto it = rel_index.find(name);
    if (it == rel_index.end()) throw SpecError("rule references unknown relation '" + name + "'");
    return relations[it->second].second;
  };

  if (spec.preset == "family") {
    if (spec.generations < 2) throw SpecError("family preset needs at least 2 generations");
    std::size_t per_lineage = 2 * spec.generations;
    std::size_t lineages = n / per_lineage;
    if (lineages == 0) throw SpecError("too few entities for one lineage");
    n = lineages * per_lineage;
    names.resize(n);
    // Shuffle ids so that structure is not visible in the numbering.
    std::vector<EntityId> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    std::shuffle(ids.begin(), ids.end(), rng);
    detail::EdgeSet wife, child;
    for (std::size_t l = 0; l < lineages; ++l) {
      for (std::size_t g = 0; g < spec.generations; ++g) {
        EntityId husband = ids[l * per_lineage + 2 * g], spouse = ids[l * per_lineage + 2 * g + 1];
        names[static_cast<std::size_t>(husband)] = "man_" + std::to_string(l) + "_" + std::to_string(g);
        names[static_cast<std::size_t>(spouse)] = "woman_" + std::to_string(l) + "_" + std::to_string(g);
        wife.emplace(husband, spouse);
        if (g + 1 < spec.generations) {
          EntityId next = ids[l * per_lineage + 2 * (g + 1)];
          child.emplace(husband, next);
          child.emplace(spouse, next);
        }
      }
    }
    detail::EdgeSet husband;
    for (const auto& [a, b] : wife) husband.emplace(b, a);
    add_relation("HasWife", wife);
    add_relation("HasChild", child);
    add_relation("HasHusband", husband);
    rules = {RelationRule{"HasDaughterInLaw", RuleKind::Composed, 0, 2, "", "HasChild", "HasWife", false}};
  } else if (!spec.preset.empty()) {
    throw SpecError("unknown preset '" + spec.preset + "'");
  } else {
    names.resize(n);
    for (std::size_t e = 0; e < n; ++e) names[e] = "e" + std::to_string(e);
  }
  if (n < 2) throw SpecError("need at least 2 entities");

  // Declared kinds per relation name, to catch contradictory declarations.
  std::map<std::string, std::set<RuleKind>> declared;
  for (const auto& r : rules) declared[r.name].insert(r.kind);
  for (const auto& [name, kinds] : declared) {
    if (kinds.count(RuleKind::Symmetric) && kinds.count(RuleKind::Antisymmetric))
      throw SpecError("relation '" + name + "' cannot be both symmetric and anti-symmetric");
    if (kinds.size() > 1) throw SpecError("relation '" + name + "' declared with several rules");
  }

  std::uniform_int_distribution<EntityId> pick(0, static_cast<EntityId>(n - 1));
  std::vector<std::string> derived;
  for (const auto& rule : rules) {
    std::size_t count = rule.count ? rule.count : n / 2;
    detail::EdgeSet edges;
    switch (rule.kind) {
      case RuleKind::Functional: {
        std::vector<EntityId> heads(n);
        std::iota(heads.begin(), heads.end(), 0);
        std::shuffle(heads.begin(), heads.end(), rng);
        for (std::size_t i = 0; i < std::min(count, n); ++i) {
          EntityId t;
          do t = pick(rng);
          while (t == heads[i]);
          edges.emplace(heads[i], t);
        }
        break;
      }
      case RuleKind::FanIn: {
        if (rule.fan < 2) throw SpecError(rule.name + ": fan_in needs fan >= 2");
        std::vector<EntityId> pool(n);
        std::iota(pool.begin(), pool.end(), 0);
        std::shuffle(pool.begin(), pool.end(), rng);
        std::size_t groups = std::min(count, n / (rule.fan + 1));
        if (groups == 0) throw SpecError(rule.name + ": too few entities for the requested fan-in");
        for (std::size_t g = 0; g < groups; ++g) {
          EntityId tail = pool[g * (rule.fan + 1)];
          for (std::size_t k = 1; k <= rule.fan; ++k) edges.emplace(pool[g * (rule.fan + 1) + k], tail);
        }
        break;
      }
      case RuleKind::Symmetric:
      case RuleKind::Antisymmetric: {
        std::vector<EntityId> rank(n);
        std::iota(rank.begin(), rank.end(), 0);
        std::shuffle(rank.begin(), rank.end(), rng);
        std::size_t guard = 0;
        std::size_t target = std::min(count, n * (n - 1) / 2);
        while (edges.size() < (rule.kind == RuleKind::Symmetric ? 2 * target : target) && guard++ < 100 * target + 100) {
          EntityId a = pick(rng), b = pick(rng);
          if (a == b) continue;
          if (rule.kind == RuleKind::Symmetric) {
            edges.emplace(a, b);
            edges.emplace(b, a);
          } else {
            // orient along a random total order: never both directions
            if (rank[static_cast<std::size_t>(a)] > rank[static_cast<std::size_t>(b)]) std::swap(a, b);
            edges.emplace(a, b);
          }
        }
        break;
      }
      case RuleKind::InverseOf: {
        if (rule.base == rule.name) throw SpecError(rule.name + ": a relation cannot be its own inverse rule");
        for (const auto& [a, b] : edges_of(rule.base)) edges.emplace(b, a);
        break;
      }
      case RuleKind::Composed: {
        const auto& first = edges_of(rule.first);
        const auto& second = edges_of(rule.second);
        edges = detail::compose(first, second);
        if (rule.commutes) {
          bool equal = edges == detail::compose(second, first);
          if (*rule.commutes && !equal)
            throw SpecError(rule.name + ": declared commuting, but the two composition orders differ");
          if (!*rule.commutes && equal)
            throw SpecError(rule.name + ": declared non-commuting, but both composition orders coincide");
        }
        derived.push_back(rule.name);
        break;
      }
    }
    if (edges.empty()) throw SpecError(rule.name + ": rule produced no triples");
    add_relation(rule.name, std::move(edges));
  }

  Vocab vocab;
  for (const auto& nm : names) vocab.intern_entity(nm);
  for (const auto& [name, edges] : relations) vocab.intern_relation(name);

  std::vector<Triple> train, valid, test;
  std::vector<std::pair<Triple, const RelationRule*>> held;
  std::map<std::string, const RelationRule*> rule_of;
  for (const auto& r : rules) rule_of[r.name] = &r;
  for (std::size_t r = 0; r < relations.size(); ++r) {
    const auto& [name, edges] = relations[r];
    bool is_derived = std::find(derived.begin(), derived.end(), name) != derived.end();
    std::vector<Triple> triples;
    for (const auto& [a, b] : edges) triples.push_back({a, static_cast<RelationId>(r), b});
    if (!is_derived) {
      train.insert(train.end(), triples.begin(), triples.end());
      continue;
    }
    std::shuffle(triples.begin(), triples.end(), rng);
    auto n_test = static_cast<std::size_t>(std::lround(spec.holdout_fraction * static_cast<double>(triples.size())));
    auto n_valid = static_cast<std::size_t>(std::lround(spec.valid_fraction * static_cast<double>(triples.size())));
    n_test = std::min(n_test, triples.size());
    n_valid = std::min(n_valid, triples.size() - n_test);
    for (std::size_t i = 0; i < triples.size(); ++i) {
      if (i < n_test)
        held.emplace_back(triples[i], rule_of.at(name));
      else if (i < n_test + n_valid)
        valid.push_back(triples[i]);
      else
        train.push_back(triples[i]);
    }
  }

  GeneratedKG out;
  for (const auto& [t, rule] : held) {
    const auto& first = edges_of(rule->first);
    const auto& second = edges_of(rule->second);
    auto correct = detail::answers_from(detail::compose(first, second), t.head);
    auto swapped = detail::answers_from(detail::compose(second, first), t.head);
    bool disjoint = std::none_of(swapped.begin(), swapped.end(), [&](EntityId e) { return correct.count(e) > 0; });
    if (!swapped.empty() && disjoint) out.order_discriminating.push_back(test.size());
    test.push_back(t);
  }
  for (const auto& rule : rules) {
    if (rule.kind != RuleKind::Composed || !rule.commutes || *rule.commutes) continue;
    bool any = std::any_of(out.order_discriminating.begin(), out.order_discriminating.end(), [&](std::size_t i) {
      return vocab.relation_name(test[i].relation) == rule.name;
    });
    if (!any && spec.holdout_fraction > 0.0)
      throw SpecError(rule.name + ": no held-out query distinguishes the two composition orders");
  }
  out.store = TripleStore(std::move(vocab), std::move(train), std::move(valid), std::move(test));
  out.spec_echo = to_json(spec);
  return out;
}

}  // namespace star
