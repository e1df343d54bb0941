#pragma once

#include <filesystem>
#include <random>
#include <sstream>
#include <string>

#include "star/star.hpp"

namespace star::test {

// Store from "h r t" lines separated by ';' (spaces inside a field are not supported).
inline std::vector<Triple> parse_list(const std::string& spec, Vocab& vocab) {
  std::vector<Triple> out;
  std::stringstream items(spec);
  std::string item;
  while (std::getline(items, item, ';')) {
    std::stringstream fields(item);
    std::string h, r, t;
    if (!(fields >> h >> r >> t)) continue;
    out.push_back({vocab.intern_entity(h), vocab.intern_relation(r), vocab.intern_entity(t)});
  }
  return out;
}

inline TripleStore make_store(const std::string& train, const std::string& valid = "", const std::string& test = "") {
  Vocab vocab;
  auto tr = parse_list(train, vocab);
  auto va = parse_list(valid, vocab);
  auto te = parse_list(test, vocab);
  return TripleStore(std::move(vocab), std::move(tr), std::move(va), std::move(te));
}

// Random store over ids e0..e{ne-1}, r0..r{nr-1}, without duplicates.
inline TripleStore random_store(std::size_t ne, std::size_t nr, std::size_t n_train, std::size_t n_valid,
                                std::size_t n_test, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Vocab vocab;
  for (std::size_t e = 0; e < ne; ++e) vocab.intern_entity("e" + std::to_string(e));
  for (std::size_t r = 0; r < nr; ++r) vocab.intern_relation("r" + std::to_string(r));
  std::uniform_int_distribution<EntityId> pe(0, static_cast<EntityId>(ne - 1));
  std::uniform_int_distribution<RelationId> pr(0, static_cast<RelationId>(nr - 1));
  std::set<std::tuple<EntityId, RelationId, EntityId>> seen;
  auto draw = [&](std::size_t k) {
    std::vector<Triple> out;
    std::size_t guard = 0;
    while (out.size() < k && guard++ < 100 * k + 100) {
      Triple t{pe(rng), pr(rng), pe(rng)};
      if (seen.insert({t.head, t.relation, t.tail}).second) out.push_back(t);
    }
    return out;
  };
  auto tr = draw(n_train);
  auto va = draw(n_valid);
  auto te = draw(n_test);
  return TripleStore(std::move(vocab), std::move(tr), std::move(va), std::move(te));
}

class TempDir {
 public:
  TempDir() {
    static std::uint64_t counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("star_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline EmbeddingTable random_table(std::size_t ne, std::size_t nr, std::size_t dim, ModelKind kind,
                                   std::uint64_t seed, double scale = 0.5) {
  auto table = init_embeddings(ne, nr, dim, kind, scale, seed);
  if (has_translation(kind)) {
    std::mt19937_64 rng(seed ^ 0xabcdefULL);
    std::normal_distribution<double> nd(0.0, scale);
    for (auto& x : table.rel_tau.flat()) x = nd(rng);
  }
  return table;
}

}  // namespace star::test
