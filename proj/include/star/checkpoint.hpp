#pragma once

// Binary checkpoint layout (all integers and doubles little-endian):
//   char[8]  magic "STARCKPT"
//   u32      format version
//   u32      model kind (0 STaR, 1 TaR, 2 ComplEx, 3 DistMult)
//   u64      dim, num_entities, num_relation_rows (2|R|)
//   f64[]    entity matrix, r_c matrix, tau matrix, each row-major
// A JSON sidecar (<file>.json) carries the config hash and epoch.

#include <array>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "model.hpp"

namespace star {

inline constexpr std::array<char, 8> kCheckpointMagic{'S', 'T', 'A', 'R', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T read_le(std::istream& in) {
  std::array<char, sizeof(T)> bytes;
  if (!in.read(bytes.data(), bytes.size())) throw CheckpointError("truncated checkpoint");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

inline void write_matrix(std::ostream& out, const Matrix& m) {
  for (double v : m.flat()) write_le(out, v);
}

inline void read_matrix(std::istream& in, Matrix& m) {
  for (auto& v : m.flat()) v = read_le<double>(in);
}

}  // namespace detail

struct CheckpointMeta {
  std::uint64_t config_hash = 0;
  std::size_t epoch = 0;
  nlohmann::json extra = nlohmann::json::object();
};

inline void save_checkpoint(const EmbeddingTable& table, const std::filesystem::path& path,
                            const CheckpointMeta& meta = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write " + path.string());
  out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  detail::write_le<std::uint32_t>(out, kCheckpointVersion);
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(table.kind));
  detail::write_le<std::uint64_t>(out, table.dim);
  detail::write_le<std::uint64_t>(out, table.num_entities);
  detail::write_le<std::uint64_t>(out, table.num_relation_rows());
  detail::write_matrix(out, table.entities);
  detail::write_matrix(out, table.rel_c);
  detail::write_matrix(out, table.rel_tau);
  if (!out) throw CheckpointError("write failed for " + path.string());

  nlohmann::json side = meta.extra;
  side["config_hash"] = meta.config_hash;
  side["epoch"] = meta.epoch;
  side["dim"] = table.dim;
  side["num_entities"] = table.num_entities;
  side["num_relations"] = table.num_relations;
  side["model_kind"] = to_string(table.kind);
  std::ofstream(path.string() + ".json") << side.dump(2) << '\n';
}

inline EmbeddingTable load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kCheckpointMagic)
    throw CheckpointError(path.string() + ": not a checkpoint (bad magic)");
  auto version = detail::read_le<std::uint32_t>(in);
  if (version != kCheckpointVersion)
    throw CheckpointError(path.string() + ": unsupported version " + std::to_string(version));
  auto kind = detail::read_le<std::uint32_t>(in);
  if (kind > 3) throw CheckpointError(path.string() + ": bad model kind");
  EmbeddingTable t;
  t.kind = static_cast<ModelKind>(kind);
  t.dim = detail::read_le<std::uint64_t>(in);
  t.num_entities = detail::read_le<std::uint64_t>(in);
  auto rows = detail::read_le<std::uint64_t>(in);
  if (t.dim == 0 || t.dim % 2 != 0 || rows % 2 != 0) throw CheckpointError(path.string() + ": bad header");
  t.num_relations = rows / 2;
  const auto header_bytes = static_cast<std::uintmax_t>(in.tellg());
  const std::uintmax_t payload = (t.num_entities + 2 * rows) * t.dim * sizeof(double);
  if (t.dim > (std::uintmax_t{1} << 32) || std::filesystem::file_size(path) != header_bytes + payload)
    throw CheckpointError(path.string() + ": size does not match the header");
  t.entities = Matrix(t.num_entities, t.dim);
  t.rel_c = Matrix(rows, t.dim);
  t.rel_tau = Matrix(rows, t.dim);
  detail::read_matrix(in, t.entities);
  detail::read_matrix(in, t.rel_c);
  detail::read_matrix(in, t.rel_tau);
  return t;
}

inline nlohmann::json load_checkpoint_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path.string() + ".json");
  if (!in) return nlohmann::json::object();
  return nlohmann::json::parse(in);
}

}  // namespace star
