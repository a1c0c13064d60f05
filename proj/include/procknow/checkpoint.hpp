#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "procknow/error.hpp"
#include "procknow/heads.hpp"

namespace procknow {

// Checkpoint layout: magic "PROC1", u8 mode tag, u32 dim, u32 hidden,
// u64 vocabulary fingerprint, u64 trainable scalar count, then the scalars
// as little-endian IEEE-754 float64 in ParamView order. The frozen word
// vectors are not stored; the fingerprint ties the file to its table.

namespace detail {

inline constexpr char kMagic[5] = {'P', 'R', 'O', 'C', '1'};

template <typename T>
void write_le(std::ofstream& out, T value) {
  static_assert(std::is_integral_v<T>);
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i)
    buf[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T)))
    throw CheckpointError("checkpoint truncated");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return static_cast<T>(v);
}

}  // namespace detail

inline void save_checkpoint(const ModelParams& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot open checkpoint for writing: " + path);
  out.write(detail::kMagic, sizeof(detail::kMagic));
  detail::write_le<std::uint8_t>(out, static_cast<std::uint8_t>(model.mode));
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.dim));
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.hidden));
  detail::write_le<std::uint64_t>(out, model.table.fingerprint());

  ParamView view = trainable_view(const_cast<ModelParams&>(model));
  detail::write_le<std::uint64_t>(out, view.size());
  for (const auto& chunk : view.chunks)
    for (double x : chunk) detail::write_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(x));
  if (!out) throw CheckpointError("write failed: " + path);
}

// Rebuilds a model from a checkpoint and the embedding table it was trained
// against. Any mismatch (dim, vocabulary fingerprint, size, magic) is an
// error; no partial model is ever returned.
inline ModelParams load_checkpoint(const std::string& path, EmbeddingTable table) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path);

  char magic[sizeof(detail::kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, detail::kMagic, sizeof(magic)) != 0)
    throw CheckpointError("bad checkpoint magic");

  const auto mode_tag = detail::read_le<std::uint8_t>(in);
  if (mode_tag > 2) throw CheckpointError("unknown mode tag in checkpoint");
  const auto dim = static_cast<int>(detail::read_le<std::uint32_t>(in));
  const auto hidden = static_cast<int>(detail::read_le<std::uint32_t>(in));
  const auto fingerprint = detail::read_le<std::uint64_t>(in);

  if (dim != table.dim)
    throw CheckpointError("checkpoint dim " + std::to_string(dim) +
                          " does not match requested dim " + std::to_string(table.dim));
  if (fingerprint != table.fingerprint())
    throw CheckpointError("checkpoint was trained against a different vocabulary");

  ModelParams model =
      init_model(dim, hidden, static_cast<ExplanationMode>(mode_tag), std::move(table), 0);
  ParamView view = trainable_view(model);
  const auto n = detail::read_le<std::uint64_t>(in);
  if (n != view.size())
    throw CheckpointError("checkpoint holds " + std::to_string(n) + " scalars, expected " +
                          std::to_string(view.size()));
  for (auto& chunk : view.chunks)
    for (double& x : chunk) x = std::bit_cast<double>(detail::read_le<std::uint64_t>(in));
  char extra;
  if (in.read(&extra, 1)) throw CheckpointError("trailing bytes in checkpoint");
  return model;
}

}  // namespace procknow
