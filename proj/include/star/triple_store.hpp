#pragma once

// Triple ingestion, vocabularies, filter indexes and relation complexity
// classification.

#include <array>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "common.hpp"

namespace star {

class Vocab {
 public:
  std::size_t num_entities() const noexcept { return entity_names_.size(); }
  std::size_t num_relations() const noexcept { return relation_names_.size(); }

  const std::vector<std::string>& entity_names() const noexcept { return entity_names_; }
  const std::vector<std::string>& relation_names() const noexcept { return relation_names_; }
  const std::string& entity_name(EntityId id) const { return entity_names_.at(static_cast<std::size_t>(id)); }
  const std::string& relation_name(RelationId id) const { return relation_names_.at(static_cast<std::size_t>(id)); }

  std::optional<EntityId> find_entity(const std::string& name) const {
    auto it = entity_index_.find(name);
    if (it == entity_index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<RelationId> find_relation(const std::string& name) const {
    auto it = relation_index_.find(name);
    if (it == relation_index_.end()) return std::nullopt;
    return it->second;
  }

  EntityId intern_entity(const std::string& name) {
    if (auto id = find_entity(name)) return *id;
    auto id = static_cast<EntityId>(entity_names_.size());
    entity_names_.push_back(name);
    entity_index_.emplace(name, id);
    return id;
  }
  RelationId intern_relation(const std::string& name) {
    if (auto id = find_relation(name)) return *id;
    auto id = static_cast<RelationId>(relation_names_.size());
    relation_names_.push_back(name);
    relation_index_.emplace(name, id);
    return id;
  }

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.entity_names_ == b.entity_names_ && a.relation_names_ == b.relation_names_;
  }

 private:
  std::vector<std::string> entity_names_;
  std::vector<std::string> relation_names_;
  std::unordered_map<std::string, EntityId> entity_index_;
  std::unordered_map<std::string, RelationId> relation_index_;
};

enum class Split { Train, Valid, Test };

inline const char* to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Valid: return "valid";
    case Split::Test: return "test";
  }
  return "?";
}

inline Split parse_split(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "valid") return Split::Valid;
  if (s == "test") return Split::Test;
  throw ConfigError("unknown split '" + s + "' (expected train|valid|test)");
}

struct ParsedFile {
  std::vector<Triple> triples;
  std::size_t duplicates_dropped = 0;
};

// Parses `head \t relation \t tail` lines. With `frozen` set, names missing
// from the vocabulary raise VocabularyError instead of being added.
inline ParsedFile parse_triples(std::istream& in, const std::string& source, Vocab& vocab, bool frozen) {
  ParsedFile out;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<std::string, 3> fields;
    std::size_t start = 0;
    std::size_t count = 0;
    for (;;) {
      auto tab = line.find('\t', start);
      if (count == 3) throw ParseError(source, line_no, "expected 3 tab-separated fields, found more");
      fields[count++] = line.substr(start, tab == std::string::npos ? std::string::npos : tab - start);
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (count != 3) throw ParseError(source, line_no, "expected 3 tab-separated fields, found " + std::to_string(count));
    for (const auto& f : fields)
      if (f.empty()) throw ParseError(source, line_no, "empty field");

    Triple t{};
    if (frozen) {
      auto h = vocab.find_entity(fields[0]);
      auto r = vocab.find_relation(fields[1]);
      auto tl = vocab.find_entity(fields[2]);
      if (!h) throw VocabularyError(source + ":" + std::to_string(line_no) + ": unknown entity '" + fields[0] + "'");
      if (!r) throw VocabularyError(source + ":" + std::to_string(line_no) + ": unknown relation '" + fields[1] + "'");
      if (!tl) throw VocabularyError(source + ":" + std::to_string(line_no) + ": unknown entity '" + fields[2] + "'");
      t = {*h, *r, *tl};
    } else {
      t.head = vocab.intern_entity(fields[0]);
      t.relation = vocab.intern_relation(fields[1]);
      t.tail = vocab.intern_entity(fields[2]);
    }

    std::uint64_t key = splitmix64((static_cast<std::uint64_t>(t.head) << 32) ^ static_cast<std::uint64_t>(t.tail)) ^
                        static_cast<std::uint64_t>(t.relation);
    auto& bucket = seen[key];
    bool dup = false;
    for (auto idx : bucket)
      if (out.triples[idx] == t) dup = true;
    if (dup) {
      ++out.duplicates_dropped;
      continue;
    }
    bucket.push_back(out.triples.size());
    out.triples.push_back(t);
  }
  return out;
}

inline ParsedFile parse_triples_file(const std::filesystem::path& path, Vocab& vocab, bool frozen) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_triples(in, path.string(), vocab, frozen);
}

// Integer-encoded triples with reciprocal augmentation and a filter index over
// train ∪ valid ∪ test. Relation ids >= num_relations() denote reciprocals.
class TripleStore {
 public:
  TripleStore() = default;
  TripleStore(Vocab vocab, std::vector<Triple> train, std::vector<Triple> valid, std::vector<Triple> test)
      : vocab_(std::move(vocab)), train_(std::move(train)), valid_(std::move(valid)), test_(std::move(test)) {
    rebuild_indexes();
  }

  const Vocab& vocab() const noexcept { return vocab_; }
  std::size_t num_entities() const noexcept { return vocab_.num_entities(); }
  std::size_t num_relations() const noexcept { return vocab_.num_relations(); }
  std::size_t num_augmented_relations() const noexcept { return 2 * vocab_.num_relations(); }

  const std::vector<Triple>& train() const noexcept { return train_; }
  const std::vector<Triple>& valid() const noexcept { return valid_; }
  const std::vector<Triple>& test() const noexcept { return test_; }
  const std::vector<Triple>& split(Split s) const {
    switch (s) {
      case Split::Train: return train_;
      case Split::Valid: return valid_;
      case Split::Test: return test_;
    }
    return train_;
  }

  RelationId reciprocal(RelationId r) const noexcept {
    auto nr = static_cast<RelationId>(num_relations());
    return r < nr ? r + nr : r - nr;
  }
  Triple reciprocal(const Triple& t) const noexcept { return {t.tail, reciprocal(t.relation), t.head}; }
  bool is_reciprocal(RelationId r) const noexcept { return r >= static_cast<RelationId>(num_relations()); }
  RelationId original(RelationId r) const noexcept { return is_reciprocal(r) ? reciprocal(r) : r; }

  // Train triples followed by their reciprocals.
  std::vector<Triple> augmented_train() const {
    std::vector<Triple> out(train_);
    out.reserve(2 * train_.size());
    for (const auto& t : train_) out.push_back(reciprocal(t));
    return out;
  }

  // All known-true answers e for the query (entity, relation, ?), relation
  // possibly reciprocal. Sorted ascending.
  std::span<const EntityId> known_answers(EntityId entity, RelationId relation) const {
    auto it = filter_.find(filter_key(entity, relation));
    if (it == filter_.end()) return {};
    return it->second;
  }

  bool is_known(EntityId entity, RelationId relation, EntityId answer) const {
    auto answers = known_answers(entity, relation);
    return std::binary_search(answers.begin(), answers.end(), answer);
  }

  // True for entities that never occur in the train split.
  const std::vector<bool>& absent_from_train() const noexcept { return absent_from_train_; }
  std::size_t num_absent_from_train() const noexcept {
    return static_cast<std::size_t>(std::count(absent_from_train_.begin(), absent_from_train_.end(), true));
  }

  std::size_t duplicates_dropped = 0;

 private:
  static std::uint64_t filter_key(EntityId e, RelationId r) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(e)) << 32) | static_cast<std::uint32_t>(r);
  }

  void check_ids(const std::vector<Triple>& triples, const char* name) const {
    auto ne = static_cast<EntityId>(num_entities());
    auto nr = static_cast<RelationId>(num_relations());
    for (const auto& t : triples) {
      if (t.head < 0 || t.head >= ne || t.tail < 0 || t.tail >= ne || t.relation < 0 || t.relation >= nr)
        throw ContractViolation(std::string("triple id out of vocabulary range in ") + name);
    }
  }

  void rebuild_indexes() {
    check_ids(train_, "train");
    check_ids(valid_, "valid");
    check_ids(test_, "test");
    filter_.clear();
    for (const auto* split : {&train_, &valid_, &test_}) {
      for (const auto& t : *split) {
        filter_[filter_key(t.head, t.relation)].push_back(t.tail);
        filter_[filter_key(t.tail, reciprocal(t.relation))].push_back(t.head);
      }
    }
    for (auto& [key, answers] : filter_) {
      std::sort(answers.begin(), answers.end());
      answers.erase(std::unique(answers.begin(), answers.end()), answers.end());
    }
    absent_from_train_.assign(num_entities(), true);
    for (const auto& t : train_) {
      absent_from_train_[static_cast<std::size_t>(t.head)] = false;
      absent_from_train_[static_cast<std::size_t>(t.tail)] = false;
    }
  }

  Vocab vocab_;
  std::vector<Triple> train_, valid_, test_;
  std::unordered_map<std::uint64_t, std::vector<EntityId>> filter_;
  std::vector<bool> absent_from_train_;
};

// Loads a single triple file as the train split. When `vocab` is given it is
// frozen: unknown names are errors.
inline TripleStore load_triples(const std::filesystem::path& path, std::optional<Vocab> vocab = std::nullopt) {
  bool frozen = vocab.has_value();
  Vocab v = frozen ? std::move(*vocab) : Vocab{};
  auto parsed = parse_triples_file(path, v, frozen);
  TripleStore store(std::move(v), std::move(parsed.triples), {}, {});
  store.duplicates_dropped = parsed.duplicates_dropped;
  return store;
}

// Loads <dir>/train.txt, valid.txt and test.txt (the latter two optional).
// The vocabulary is built over all three files in that order.
inline TripleStore load_dataset(const std::filesystem::path& dir, std::optional<Vocab> vocab = std::nullopt) {
  bool frozen = vocab.has_value();
  Vocab v = frozen ? std::move(*vocab) : Vocab{};
  auto train = parse_triples_file(dir / "train.txt", v, frozen);
  ParsedFile valid, test;
  if (std::filesystem::exists(dir / "valid.txt")) valid = parse_triples_file(dir / "valid.txt", v, frozen);
  if (std::filesystem::exists(dir / "test.txt")) test = parse_triples_file(dir / "test.txt", v, frozen);
  TripleStore store(std::move(v), std::move(train.triples), std::move(valid.triples), std::move(test.triples));
  store.duplicates_dropped = train.duplicates_dropped + valid.duplicates_dropped + test.duplicates_dropped;
  return store;
}

// ---- persistence ----------------------------------------------------------

inline void write_names(const std::filesystem::path& path, const std::vector<std::string>& names) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < names.size(); ++i) out << i << '\t' << names[i] << '\n';
}

inline std::vector<std::string> read_names(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::string> names;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(path.string(), line_no, "expected 'id<TAB>name'");
    std::size_t id = 0;
    try {
      id = std::stoul(line.substr(0, tab));
    } catch (const std::exception&) {
      throw ParseError(path.string(), line_no, "bad id");
    }
    if (id != names.size()) throw ParseError(path.string(), line_no, "ids must be dense and ascending");
    names.push_back(line.substr(tab + 1));
  }
  return names;
}

inline void save_vocab(const Vocab& vocab, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_names(dir / "entities.tsv", vocab.entity_names());
  write_names(dir / "relations.tsv", vocab.relation_names());
}

inline Vocab load_vocab(const std::filesystem::path& dir) {
  Vocab v;
  for (const auto& n : read_names(dir / "entities.tsv")) v.intern_entity(n);
  for (const auto& n : read_names(dir / "relations.tsv")) v.intern_relation(n);
  return v;
}

inline nlohmann::json store_manifest(const TripleStore& store) {
  return {{"num_entities", store.num_entities()},
          {"num_relations", store.num_relations()},
          {"train", store.train().size()},
          {"valid", store.valid().size()},
          {"test", store.test().size()},
          {"entities_absent_from_train", store.num_absent_from_train()},
          {"duplicates_dropped", store.duplicates_dropped}};
}

inline void write_triples(const std::filesystem::path& path, const Vocab& vocab, const std::vector<Triple>& triples) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& t : triples)
    out << vocab.entity_name(t.head) << '\t' << vocab.relation_name(t.relation) << '\t' << vocab.entity_name(t.tail)
        << '\n';
}

// Writes raw (non-augmented) splits, vocabulary files and manifest.json.
inline void save_store(const TripleStore& store, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_vocab(store.vocab(), dir);
  write_triples(dir / "train.txt", store.vocab(), store.train());
  write_triples(dir / "valid.txt", store.vocab(), store.valid());
  write_triples(dir / "test.txt", store.vocab(), store.test());
  std::ofstream(dir / "manifest.json") << store_manifest(store).dump(2) << '\n';
}

// Inverse of save_store: ids come from the vocabulary files, not from
// first-appearance order.
inline TripleStore load_store(const std::filesystem::path& dir) { return load_dataset(dir, load_vocab(dir)); }

// ---- relation statistics ----------------------------------------------------

enum class RelationCategory { OneToOne, OneToMany, ManyToOne, ManyToMany };

inline const char* to_string(RelationCategory c) {
  switch (c) {
    case RelationCategory::OneToOne: return "1-to-1";
    case RelationCategory::OneToMany: return "1-to-N";
    case RelationCategory::ManyToOne: return "N-to-1";
    case RelationCategory::ManyToMany: return "N-to-N";
  }
  return "?";
}

inline constexpr double kComplexRelationThreshold = 1.5;

inline RelationCategory categorize(double tphr, double hptr) {
  bool many_tails = tphr > kComplexRelationThreshold;
  bool many_heads = hptr > kComplexRelationThreshold;
  if (!many_tails && !many_heads) return RelationCategory::OneToOne;
  if (many_tails && !many_heads) return RelationCategory::OneToMany;
  if (!many_tails && many_heads) return RelationCategory::ManyToOne;
  return RelationCategory::ManyToMany;
}

struct RelationClass {
  RelationId relation;
  double tphr;  // mean tails per distinct head
  double hptr;  // mean heads per distinct tail
  RelationCategory category;
};

struct RelationClassification {
  std::vector<RelationClass> classes;
  std::vector<RelationId> excluded;  // relations without train triples

  std::optional<RelationCategory> category_of(RelationId r) const {
    for (const auto& c : classes)
      if (c.relation == r) return c.category;
    return std::nullopt;
  }
};

inline RelationClassification classify_relations(const TripleStore& store) {
  require(!store.train().empty(), "classify_relations: train split is empty");
  std::size_t nr = store.num_relations();
  std::vector<std::size_t> triples(nr, 0);
  std::vector<std::unordered_set<EntityId>> heads(nr), tails(nr);
  // Input is deduplicated, so triple counts equal distinct (h,t) pairs.
  for (const auto& t : store.train()) {
    auto r = static_cast<std::size_t>(t.relation);
    ++triples[r];
    heads[r].insert(t.head);
    tails[r].insert(t.tail);
  }
  RelationClassification out;
  for (std::size_t r = 0; r < nr; ++r) {
    if (triples[r] == 0) {
      out.excluded.push_back(static_cast<RelationId>(r));
      continue;
    }
    double tphr = static_cast<double>(triples[r]) / static_cast<double>(heads[r].size());
    double hptr = static_cast<double>(triples[r]) / static_cast<double>(tails[r].size());
    out.classes.push_back({static_cast<RelationId>(r), tphr, hptr, categorize(tphr, hptr)});
  }
  return out;
}

enum class Side { Head, Tail };

struct EntityFrequency {
  std::vector<std::uint64_t> counts;  // indexed by entity id
  std::uint64_t max = 0;
};

inline EntityFrequency entity_frequency(const TripleStore& store, Side side) {
  EntityFrequency f;
  f.counts.assign(store.num_entities(), 0);
  for (const auto& t : store.train()) {
    auto e = static_cast<std::size_t>(side == Side::Head ? t.head : t.tail);
    f.max = std::max(f.max, ++f.counts[e]);
  }
  return f;
}

}  // namespace star
