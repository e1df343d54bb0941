#pragma once

// Two-path relation-pair statistics.
//
// count(i, j) is the number of entity chains e1 -(r_i)-> e2 -(r_j)-> e3 in the
// train split. For a pair with count(i,j) + count(j,i) > 0,
//   psi = 2 * max(count(i,j), count(j,i)) / (count(i,j) + count(j,i)) - 1,
// and over the whole graph
//   Psi = paths in single-order pairs / paths in all pairs with a path.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <unordered_map>

#include <json.hpp>

#include "triple_store.hpp"

namespace star {

struct PathCountOptions {
  // Drop chains that revisit an entity (e1 == e2, e2 == e3 or e1 == e3).
  bool exclude_degenerate = false;
};

// Dense |R| x |R| matrix of ordered two-path counts, original relations only.
struct PairCounts {
  std::size_t num_relations = 0;
  std::vector<std::uint64_t> counts;
  PathCountOptions options;

  PairCounts() = default;
  explicit PairCounts(std::size_t nr) : num_relations(nr), counts(nr * nr, 0) {}

  std::uint64_t operator()(std::size_t i, std::size_t j) const { return counts[i * num_relations + j]; }
  std::uint64_t& operator()(std::size_t i, std::size_t j) { return counts[i * num_relations + j]; }

  std::uint64_t total() const {
    std::uint64_t s = 0;
    for (auto c : counts) s += c;
    return s;
  }

  friend bool operator==(const PairCounts& a, const PairCounts& b) {
    return a.num_relations == b.num_relations && a.counts == b.counts;
  }
};

// Indexes triples by their middle entity and multiplies per-relation in- and
// out-degree histograms; cost is sum over entities of in(e) * out(e) in the
// worst case, usually far less.
inline PairCounts count_two_paths(std::span<const Triple> triples, std::size_t num_relations, std::size_t num_entities,
                                  PathCountOptions options = {}) {
  PairCounts out(num_relations);
  out.options = options;
  struct Edge {
    EntityId other;
    RelationId relation;
  };
  std::vector<std::vector<Edge>> incoming(num_entities), outgoing(num_entities);
  for (const auto& t : triples) {
    incoming[static_cast<std::size_t>(t.tail)].push_back({t.head, t.relation});
    outgoing[static_cast<std::size_t>(t.head)].push_back({t.tail, t.relation});
  }

  std::vector<std::uint64_t> in_hist(num_relations), out_hist(num_relations);
  std::vector<RelationId> in_rels, out_rels;
  for (std::size_t e = 0; e < num_entities; ++e) {
    const auto& in = incoming[e];
    const auto& outs = outgoing[e];
    if (in.empty() || outs.empty()) continue;
    in_rels.clear();
    out_rels.clear();
    for (const auto& edge : in)
      if (in_hist[static_cast<std::size_t>(edge.relation)]++ == 0) in_rels.push_back(edge.relation);
    for (const auto& edge : outs)
      if (out_hist[static_cast<std::size_t>(edge.relation)]++ == 0) out_rels.push_back(edge.relation);
    for (auto i : in_rels)
      for (auto j : out_rels)
        out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) +=
            in_hist[static_cast<std::size_t>(i)] * out_hist[static_cast<std::size_t>(j)];
    for (auto i : in_rels) in_hist[static_cast<std::size_t>(i)] = 0;
    for (auto j : out_rels) out_hist[static_cast<std::size_t>(j)] = 0;

    if (!options.exclude_degenerate) continue;
    // Subtract chains (e1, e, e3) with a repeated entity.
    const auto me = static_cast<EntityId>(e);
    std::unordered_map<EntityId, std::vector<RelationId>> out_by_target;
    for (const auto& o : outs)
      if (o.other != me) out_by_target[o.other].push_back(o.relation);
    for (const auto& i : in) {
      if (i.other == me) {
        // e1 == e2: every continuation is degenerate
        for (const auto& o : outs) --out(static_cast<std::size_t>(i.relation), static_cast<std::size_t>(o.relation));
        continue;
      }
      for (const auto& o : outs)
        if (o.other == me) --out(static_cast<std::size_t>(i.relation), static_cast<std::size_t>(o.relation));
      auto it = out_by_target.find(i.other);  // e1 == e3, both distinct from e
      if (it == out_by_target.end()) continue;
      for (auto rj : it->second) --out(static_cast<std::size_t>(i.relation), static_cast<std::size_t>(rj));
    }
  }
  return out;
}

inline PairCounts count_two_paths(const TripleStore& store, PathCountOptions options = {}) {
  return count_two_paths(store.train(), store.num_relations(), store.num_entities(), options);
}

// Undefined (nullopt) when neither order has a path.
inline std::optional<double> pair_imbalance(std::uint64_t count_ij, std::uint64_t count_ji) {
  if (count_ij + count_ji == 0) return std::nullopt;
  // 2 max / sum - 1 rewritten as (max - min) / sum: one rounding step, so
  // ratios such as 1/3 come out as the nearest double.
  const auto mx = std::max(count_ij, count_ji), mn = std::min(count_ij, count_ji);
  return static_cast<double>(mx - mn) / static_cast<double>(count_ij + count_ji);
}

inline std::optional<double> pair_imbalance(const PairCounts& counts, std::size_t i, std::size_t j) {
  return pair_imbalance(counts(i, j), counts(j, i));
}

enum class DiagonalPolicy { Both, Exclude };

struct PairImbalance {
  std::size_t i, j;  // i < j
  std::uint64_t count_ij, count_ji;
  double psi;
  bool both;
};

struct ImbalanceReport {
  std::vector<PairImbalance> pairs;  // unordered pairs i < j with at least one path
  std::vector<std::uint64_t> diagonal;  // count(i, i)
  std::uint64_t triple_both = 0;
  std::uint64_t triple_single = 0;
  double Psi = 0.0;
  DiagonalPolicy diagonal_policy = DiagonalPolicy::Both;
  PathCountOptions path_options;
};

class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline ImbalanceReport dataset_imbalance(const PairCounts& counts, DiagonalPolicy diagonal = DiagonalPolicy::Both) {
  ImbalanceReport r;
  r.diagonal_policy = diagonal;
  r.path_options = counts.options;
  const std::size_t nr = counts.num_relations;
  r.diagonal.resize(nr);
  for (std::size_t i = 0; i < nr; ++i) {
    r.diagonal[i] = counts(i, i);
    if (diagonal == DiagonalPolicy::Both) r.triple_both += counts(i, i);
    for (std::size_t j = i + 1; j < nr; ++j) {
      auto cij = counts(i, j), cji = counts(j, i);
      auto psi = pair_imbalance(cij, cji);
      if (!psi) continue;
      bool both = cij > 0 && cji > 0;
      r.pairs.push_back({i, j, cij, cji, *psi, both});
      (both ? r.triple_both : r.triple_single) += cij + cji;
    }
  }
  if (r.triple_both + r.triple_single == 0) throw AnalysisError("no two-step paths in the train split");
  r.Psi = static_cast<double>(r.triple_single) / static_cast<double>(r.triple_both + r.triple_single);
  return r;
}

inline nlohmann::json to_json(const ImbalanceReport& r, const Vocab* vocab = nullptr) {
  nlohmann::json j;
  j["Psi"] = r.Psi;
  j["triple_both"] = r.triple_both;
  j["triple_single"] = r.triple_single;
  j["policy"] = {{"diagonal", r.diagonal_policy == DiagonalPolicy::Both ? "both" : "exclude"},
                 {"exclude_degenerate", r.path_options.exclude_degenerate}};
  j["pairs"] = nlohmann::json::array();
  for (const auto& p : r.pairs) {
    nlohmann::json row{{"i", p.i}, {"j", p.j}, {"count_ij", p.count_ij}, {"count_ji", p.count_ji},
                       {"psi", p.psi}, {"both", p.both}};
    if (vocab) {
      row["rel_i"] = vocab->relation_name(static_cast<RelationId>(p.i));
      row["rel_j"] = vocab->relation_name(static_cast<RelationId>(p.j));
    }
    j["pairs"].push_back(row);
  }
  j["diagonal"] = r.diagonal;
  return j;
}

// ---- arc diagram export -------------------------------------------------------

inline std::string relation_label(const Vocab* vocab, std::size_t r) {
  return vocab ? vocab->relation_name(static_cast<RelationId>(r)) : std::to_string(r);
}

inline void export_arc_csv(const ImbalanceReport& r, const std::filesystem::path& path, const Vocab* vocab = nullptr) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "rel_i,rel_j,count_ij,count_ji,psi\n";
  for (const auto& p : r.pairs)
    out << relation_label(vocab, p.i) << ',' << relation_label(vocab, p.j) << ',' << p.count_ij << ',' << p.count_ji
        << ',' << p.psi << '\n';
}

inline std::string escape_xml(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

// Relations sit on a horizontal axis; each pair is a semicircular arc.
// Colour runs from blue (psi = 0, balanced) to gray (psi = 1); stroke width
// and opacity grow with the pair's path count relative to the largest pair.
inline void export_arc_svg(const ImbalanceReport& r, std::size_t num_relations, const std::filesystem::path& path,
                           const Vocab* vocab = nullptr) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const double spacing = 24.0, margin = 40.0;
  const double width = margin * 2 + spacing * static_cast<double>(std::max<std::size_t>(num_relations, 2) - 1);
  const double baseline = width / 2.0 + margin;
  const double height = baseline + 120.0;
  std::uint64_t max_count = 1;
  for (const auto& p : r.pairs) max_count = std::max(max_count, p.count_ij + p.count_ji);

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  auto x_of = [&](std::size_t i) { return margin + spacing * static_cast<double>(i); };
  for (const auto& p : r.pairs) {
    const double rel = std::sqrt(static_cast<double>(p.count_ij + p.count_ji) / static_cast<double>(max_count));
    const double x1 = x_of(p.i), x2 = x_of(p.j), radius = (x2 - x1) / 2.0;
    const int red = static_cast<int>(std::lround(40 + p.psi * (150 - 40)));
    const int green = static_cast<int>(std::lround(90 + p.psi * (150 - 90)));
    const int blue = static_cast<int>(std::lround(220 + p.psi * (150 - 220)));
    out << "<path d=\"M " << x1 << ' ' << baseline << " A " << radius << ' ' << radius << " 0 0 1 " << x2 << ' '
        << baseline << "\" fill=\"none\" stroke=\"rgb(" << red << ',' << green << ',' << blue
        << ")\" stroke-width=\"" << 0.5 + 6.0 * rel << "\" stroke-opacity=\"" << 0.15 + 0.85 * rel << "\">"
        << "<title>" << escape_xml(relation_label(vocab, p.i)) << " / " << escape_xml(relation_label(vocab, p.j))
        << ": " << p.count_ij << " vs " << p.count_ji << ", psi=" << p.psi << "</title></path>\n";
  }
  for (std::size_t i = 0; i < num_relations; ++i) {
    out << "<circle cx=\"" << x_of(i) << "\" cy=\"" << baseline << "\" r=\"2.5\" fill=\"black\"/>\n";
    out << "<text x=\"" << x_of(i) << "\" y=\"" << baseline + 10 << "\" font-size=\"8\" transform=\"rotate(60 "
        << x_of(i) << ' ' << baseline + 10 << ")\">" << escape_xml(relation_label(vocab, i)) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace star
