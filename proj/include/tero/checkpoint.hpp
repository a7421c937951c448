#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "tero/error.hpp"
#include "tero/model.hpp"

namespace tero {

// Binary checkpoint layout (all integers and floats little-endian):
//
//   "TERO" | u32 version | u32 n_e | u32 n_r | u32 n_steps | u32 k
//   | u8 dual | u8 norm
//   | f32 entity re [n_e*k] | f32 entity im [n_e*k]
//   | f32 rel_begin re [n_r*k] | f32 rel_begin im [n_r*k]
//   | f32 rel_end re [n_r*k] | f32 rel_end im [n_r*k]    (dual only)
//   | f32 phases [n_steps*k]
//   | u32 byte length | sidecar directory path (UTF-8)
//
// Adagrad accumulators are not stored; loading yields zero accumulators.
inline constexpr std::array<char, 4> kCheckpointMagic{'T', 'E', 'R', 'O'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams params;
  std::string sidecar;
};

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff), char((v >> 24) & 0xff)};
  out.write(b, 4);
}

inline std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw DataError("checkpoint truncated");
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24;
}

inline std::uint8_t get_u8(std::istream& in) {
  char c;
  if (!in.get(c)) throw DataError("checkpoint truncated");
  return static_cast<std::uint8_t>(c);
}

// Writes the real (part 0) or imaginary (part 1) halves of a complex table.
template <class T>
void put_part(std::ostream& out, const std::vector<T>& table, std::size_t k, int part) {
  std::size_t rows = k == 0 ? 0 : table.size() / (2 * k);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < k; ++j) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(table[r * 2 * k + part * k + j])));
    }
  }
}

inline void get_part(std::istream& in, std::vector<float>& table, std::size_t k, int part) {
  std::size_t rows = k == 0 ? 0 : table.size() / (2 * k);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < k; ++j) table[r * 2 * k + part * k + j] = std::bit_cast<float>(get_u32(in));
  }
}

}  // namespace detail

template <class T>
void write_checkpoint(std::ostream& out, const BasicParams<T>& p, const std::string& sidecar) {
  out.write(kCheckpointMagic.data(), 4);
  detail::put_u32(out, kCheckpointVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(p.n_entities));
  detail::put_u32(out, static_cast<std::uint32_t>(p.n_relations));
  detail::put_u32(out, static_cast<std::uint32_t>(p.n_steps));
  detail::put_u32(out, static_cast<std::uint32_t>(p.dim));
  out.put(p.dual ? 1 : 0);
  out.put(static_cast<char>(p.norm));
  std::size_t k = p.k();
  detail::put_part(out, p.entity, k, 0);
  detail::put_part(out, p.entity, k, 1);
  detail::put_part(out, p.relation_begin, k, 0);
  detail::put_part(out, p.relation_begin, k, 1);
  if (p.dual) {
    detail::put_part(out, p.relation_end, k, 0);
    detail::put_part(out, p.relation_end, k, 1);
  }
  for (T v : p.phase) detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  detail::put_u32(out, static_cast<std::uint32_t>(sidecar.size()));
  out.write(sidecar.data(), static_cast<std::streamsize>(sidecar.size()));
  if (!out) throw DataError("failed writing checkpoint");
}

inline Checkpoint read_checkpoint(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || magic != kCheckpointMagic) throw DataError("not a checkpoint (bad magic)");
  auto version = detail::get_u32(in);
  if (version != kCheckpointVersion) throw DataError("unsupported checkpoint version " + std::to_string(version));
  Checkpoint c;
  auto& p = c.params;
  p.n_entities = static_cast<std::int32_t>(detail::get_u32(in));
  p.n_relations = static_cast<std::int32_t>(detail::get_u32(in));
  p.n_steps = static_cast<std::int32_t>(detail::get_u32(in));
  p.dim = static_cast<std::int32_t>(detail::get_u32(in));
  auto dual = detail::get_u8(in);
  auto norm = detail::get_u8(in);
  if (dual > 1 || (norm != 1 && norm != 2) || p.n_entities < 1 || p.n_relations < 1 || p.n_steps < 1 || p.dim < 1) {
    throw DataError("corrupt checkpoint header");
  }
  p.dual = dual == 1;
  p.norm = static_cast<Norm>(norm);
  std::size_t k = p.k();
  p.entity.assign(static_cast<std::size_t>(p.n_entities) * 2 * k, 0.f);
  p.relation_begin.assign(static_cast<std::size_t>(p.n_relations) * 2 * k, 0.f);
  p.relation_end.assign(p.dual ? p.relation_begin.size() : 0, 0.f);
  p.phase.assign(static_cast<std::size_t>(p.n_steps) * k, 0.f);
  detail::get_part(in, p.entity, k, 0);
  detail::get_part(in, p.entity, k, 1);
  detail::get_part(in, p.relation_begin, k, 0);
  detail::get_part(in, p.relation_begin, k, 1);
  if (p.dual) {
    detail::get_part(in, p.relation_end, k, 0);
    detail::get_part(in, p.relation_end, k, 1);
  }
  for (auto& v : p.phase) v = std::bit_cast<float>(detail::get_u32(in));
  p.entity_acc.assign(p.entity.size(), 0.f);
  p.relation_begin_acc.assign(p.relation_begin.size(), 0.f);
  p.relation_end_acc.assign(p.relation_end.size(), 0.f);
  p.phase_acc.assign(p.phase.size(), 0.f);
  auto len = detail::get_u32(in);
  c.sidecar.resize(len);
  if (len > 0 && !in.read(c.sidecar.data(), len)) throw DataError("checkpoint truncated");
  if (in.peek() != std::char_traits<char>::eof()) throw DataError("trailing bytes after checkpoint");
  return c;
}

template <class T>
void save_checkpoint(const std::string& path, const BasicParams<T>& p, const std::string& sidecar) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  write_checkpoint(out, p, sidecar);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return read_checkpoint(in);
}

}  // namespace tero
