#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "procknow/error.hpp"
#include "procknow/linalg.hpp"
#include "procknow/rng.hpp"

namespace procknow {

// Pretrained word vectors. The matrix is frozen; only the <unk> vector, used
// for every out-of-vocabulary token, receives gradient updates.
struct EmbeddingTable {
  int dim = 0;
  std::vector<std::string> tokens;               // row -> token
  std::unordered_map<std::string, int> vocab;    // token -> row
  std::vector<double> matrix;                    // |V| x dim, row-major, frozen
  Vec unk;                                       // trainable

  const double* row(int r) const { return matrix.data() + static_cast<std::size_t>(r) * dim; }

  // Total lookup: the token's frozen row, or the unk vector.
  const double* lookup(const std::string& token, bool* is_unk = nullptr) const {
    auto it = vocab.find(token);
    if (it == vocab.end()) {
      if (is_unk) *is_unk = true;
      return unk.data();
    }
    if (is_unk) *is_unk = false;
    return row(it->second);
  }

  // Fingerprint of (dim, tokens, frozen matrix); stored in checkpoints to
  // catch vector-file mismatches at load time.
  std::uint64_t fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix_bytes = [&h](const void* p, std::size_t n) {
      const auto* b = static_cast<const unsigned char*>(p);
      for (std::size_t i = 0; i < n; ++i) {
        h ^= b[i];
        h *= 0x100000001b3ULL;
      }
    };
    std::uint32_t d = static_cast<std::uint32_t>(dim);
    mix_bytes(&d, sizeof(d));
    for (const auto& t : tokens) {
      mix_bytes(t.data(), t.size());
      mix_bytes("\0", 1);
    }
    mix_bytes(matrix.data(), matrix.size() * sizeof(double));
    return h;
  }
};

inline Vec init_unk(int dim, std::uint64_t seed) {
  Rng rng(Rng(seed).fork(0x756e6bULL).next_u64());
  Vec v(dim);
  for (double& x : v) x = rng.uniform(-0.05, 0.05);
  return v;
}

// GloVe distribution format: one token per line followed by `dim` decimal
// floats, whitespace-separated.
inline EmbeddingTable load_word_vectors(const std::string& path, int dim,
                                        std::uint64_t seed = 0) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open word-vector file: " + path);
  EmbeddingTable table;
  table.dim = dim;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string token;
    ss >> token;
    std::vector<double> values;
    values.reserve(dim);
    double v;
    while (ss >> v) values.push_back(v);
    if (static_cast<int>(values.size()) != dim)
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                       " values, got " + std::to_string(values.size()));
    if (table.vocab.count(token))
      throw ParseError("line " + std::to_string(line_no) + ": duplicate token '" + token + "'");
    table.vocab.emplace(token, static_cast<int>(table.tokens.size()));
    table.tokens.push_back(token);
    table.matrix.insert(table.matrix.end(), values.begin(), values.end());
  }
  table.unk = init_unk(dim, seed);
  return table;
}

// Frozen random vectors for a known vocabulary. Used when no pretrained file
// is supplied (synthetic corpora whose tokens GloVe has never seen). Rows are
// unit-norm Gaussian directions, so distinct tokens sit at concentrated
// pairwise distances regardless of dim.
inline EmbeddingTable random_table(const std::vector<std::string>& vocabulary, int dim,
                                   std::uint64_t seed) {
  EmbeddingTable table;
  table.dim = dim;
  Rng rng(Rng(seed).fork(0x766563ULL).next_u64());
  auto gaussian = [&rng]() {
    // Box-Muller on splitmix draws.
    const double u1 = std::max(rng.uniform(), 1e-12);
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  };
  for (const auto& token : vocabulary) {
    if (table.vocab.count(token)) throw Error("duplicate token in vocabulary: " + token);
    table.vocab.emplace(token, static_cast<int>(table.tokens.size()));
    table.tokens.push_back(token);
    Vec row(dim);
    double norm = 0.0;
    for (int i = 0; i < dim; ++i) {
      row[i] = gaussian();
      norm += row[i] * row[i];
    }
    norm = std::sqrt(std::max(norm, 1e-12));
    for (int i = 0; i < dim; ++i) table.matrix.push_back(row[i] / norm);
  }
  table.unk = init_unk(dim, seed);
  return table;
}

}  // namespace procknow
