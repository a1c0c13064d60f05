#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "procknow/embedding.hpp"
#include "procknow/error.hpp"
#include "procknow/linalg.hpp"
#include "procknow/rng.hpp"

namespace procknow {

using TokenSpan = std::span<const std::string>;

// Gate order used everywhere: input, forget, output, candidate.
enum Gate { kInput = 0, kForget = 1, kOutput = 2, kCand = 3 };

// One recurrent encoder. Input dimension equals hidden dimension equals the
// embedding dimension. Also serves as its own gradient container (shapes
// match one for one).
struct LstmParams {
  int dim = 0;
  Mat wx[4];
  Mat wh[4];
  Vec b[4];

  static LstmParams zeros(int dim) {
    LstmParams p;
    p.dim = dim;
    for (int g = 0; g < 4; ++g) {
      p.wx[g] = Mat(dim, dim);
      p.wh[g] = Mat(dim, dim);
      p.b[g] = Vec(dim, 0.0);
    }
    return p;
  }

  // Seeded uniform(-1/sqrt(dim), 1/sqrt(dim)); forget-gate bias offset +1.
  static LstmParams init(int dim, Rng& rng) {
    LstmParams p = zeros(dim);
    const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
    for (int g = 0; g < 4; ++g) {
      for (double& v : p.wx[g].a) v = rng.uniform(-bound, bound);
      for (double& v : p.wh[g].a) v = rng.uniform(-bound, bound);
    }
    for (double& v : p.b[kForget]) v = 1.0;
    return p;
  }
};

using LstmGrads = LstmParams;

// Everything the backward pass needs from a forward run.
struct LstmTrace {
  std::vector<const double*> x;  // looked-up embeddings, one per step
  std::vector<bool> x_is_unk;
  std::vector<Vec> i, f, o, g, c, h, tanh_c;

  std::size_t len() const { return x.size(); }
};

namespace detail {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace detail

// Standard LSTM recurrence from zero initial hidden/cell state; the sequence
// embedding is the final hidden state. Empty input encodes to the zero
// vector. `trace`, when given, is filled for the backward pass.
inline Vec lstm_forward(const LstmParams& params, const EmbeddingTable& table, TokenSpan tokens,
                        LstmTrace* trace = nullptr) {
  const int d = params.dim;
  Vec h(d, 0.0), c(d, 0.0);
  if (tokens.empty()) return h;

  Vec pre[4];
  for (auto& v : pre) v.resize(d);
  Vec gate_i(d), gate_f(d), gate_o(d), gate_g(d), tc(d);

  for (const auto& token : tokens) {
    bool is_unk = false;
    const double* x = table.lookup(token, &is_unk);
    for (int g = 0; g < 4; ++g) {
      std::copy(params.b[g].begin(), params.b[g].end(), pre[g].begin());
      matvec_add(params.wx[g], x, pre[g].data());
      matvec_add(params.wh[g], h.data(), pre[g].data());
    }
    for (int k = 0; k < d; ++k) {
      gate_i[k] = detail::sigmoid(pre[kInput][k]);
      gate_f[k] = detail::sigmoid(pre[kForget][k]);
      gate_o[k] = detail::sigmoid(pre[kOutput][k]);
      gate_g[k] = std::tanh(pre[kCand][k]);
      c[k] = gate_f[k] * c[k] + gate_i[k] * gate_g[k];
      tc[k] = std::tanh(c[k]);
      h[k] = gate_o[k] * tc[k];
    }
    if (trace) {
      trace->x.push_back(x);
      trace->x_is_unk.push_back(is_unk);
      trace->i.push_back(gate_i);
      trace->f.push_back(gate_f);
      trace->o.push_back(gate_o);
      trace->g.push_back(gate_g);
      trace->c.push_back(c);
      trace->h.push_back(h);
      trace->tanh_c.push_back(tc);
    }
  }
  if (!all_finite(h)) throw Error("non-finite value in recurrent encoder output");
  return h;
}

// Reverse accumulation of d(upstream . h_last)/d(params) through the
// recurrence. Embedding gradients flow only into the unk vector; frozen rows
// receive nothing.
inline void lstm_backward(const LstmParams& params, const LstmTrace& trace, const Vec& upstream,
                          LstmGrads& grads, Vec& unk_grad) {
  const int d = params.dim;
  const std::size_t len = trace.len();
  if (len == 0) return;

  Vec dh = upstream;
  Vec dc(d, 0.0);
  Vec dpre[4];
  for (auto& v : dpre) v.resize(d);
  Vec dh_prev(d), zero(d, 0.0);

  for (std::size_t t = len; t-- > 0;) {
    const Vec& gi = trace.i[t];
    const Vec& gf = trace.f[t];
    const Vec& go = trace.o[t];
    const Vec& gg = trace.g[t];
    const Vec& tc = trace.tanh_c[t];
    const Vec& c_prev = t > 0 ? trace.c[t - 1] : zero;
    const Vec& h_prev = t > 0 ? trace.h[t - 1] : zero;

    for (int k = 0; k < d; ++k) {
      dc[k] += dh[k] * go[k] * (1.0 - tc[k] * tc[k]);
      const double d_o = dh[k] * tc[k];
      dpre[kOutput][k] = d_o * go[k] * (1.0 - go[k]);
      dpre[kInput][k] = dc[k] * gg[k] * gi[k] * (1.0 - gi[k]);
      dpre[kForget][k] = dc[k] * c_prev[k] * gf[k] * (1.0 - gf[k]);
      dpre[kCand][k] = dc[k] * gi[k] * (1.0 - gg[k] * gg[k]);
    }

    std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
    for (int g = 0; g < 4; ++g) {
      add_outer(grads.wx[g], dpre[g].data(), trace.x[t]);
      add_outer(grads.wh[g], dpre[g].data(), h_prev.data());
      for (int k = 0; k < d; ++k) grads.b[g][k] += dpre[g][k];
      matTvec_add(params.wh[g], dpre[g].data(), dh_prev.data());
      if (trace.x_is_unk[t]) matTvec_add(params.wx[g], dpre[g].data(), unk_grad.data());
    }
    for (int k = 0; k < d; ++k) dc[k] *= gf[k];
    dh = dh_prev;
  }
}

// Elementwise mean of the looked-up vectors; empty input encodes to zero.
inline Vec encode_bag(const EmbeddingTable& table, TokenSpan tokens) {
  Vec out(table.dim, 0.0);
  if (tokens.empty()) return out;
  for (const auto& token : tokens) {
    const double* x = table.lookup(token);
    for (int k = 0; k < table.dim; ++k) out[k] += x[k];
  }
  const double inv = 1.0 / static_cast<double>(tokens.size());
  for (double& v : out) v *= inv;
  return out;
}

inline void bag_backward(const EmbeddingTable& table, TokenSpan tokens, const Vec& upstream,
                         Vec& unk_grad) {
  if (tokens.empty()) return;
  std::size_t n_unk = 0;
  for (const auto& token : tokens)
    if (!table.vocab.count(token)) ++n_unk;
  if (n_unk == 0) return;
  const double scale = static_cast<double>(n_unk) / static_cast<double>(tokens.size());
  for (int k = 0; k < table.dim; ++k) unk_grad[k] += scale * upstream[k];
}

// Sequence embedding: the last hidden state of the recurrence.
inline Vec encode_recurrent(const LstmParams& params, const EmbeddingTable& table,
                            TokenSpan tokens) {
  return lstm_forward(params, table, tokens);
}

}  // namespace procknow
