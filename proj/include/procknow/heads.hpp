#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "procknow/embedding.hpp"
#include "procknow/encoder.hpp"
#include "procknow/error.hpp"
#include "procknow/linalg.hpp"
#include "procknow/sampling.hpp"

namespace procknow {

// How the step explanation enters the model. Title and gist always go through
// their own recurrent encoders; the three modes mirror the ablations
// (recurrent explanation, bag-of-vectors explanation, no explanation).
enum class ExplanationMode { kLstm = 0, kBag = 1, kNone = 2 };

inline const char* mode_name(ExplanationMode m) {
  switch (m) {
    case ExplanationMode::kLstm: return "lstm";
    case ExplanationMode::kBag: return "bag";
    case ExplanationMode::kNone: return "none";
  }
  return "?";
}

inline ExplanationMode mode_from_name(const std::string& s) {
  if (s == "lstm") return ExplanationMode::kLstm;
  if (s == "bag") return ExplanationMode::kBag;
  if (s == "none") return ExplanationMode::kNone;
  throw Error("unknown mode: " + s);
}

// Hidden layer (tanh) + 2-way output layer. The output layer starts at zero
// so an untrained head emits exactly 0.5.
struct HeadParams {
  Mat w1;  // hidden x in
  Vec b1;
  Mat w2;  // 2 x hidden
  Vec b2;

  static HeadParams zeros(int in, int hidden) {
    HeadParams p;
    p.w1 = Mat(hidden, in);
    p.b1 = Vec(hidden, 0.0);
    p.w2 = Mat(2, hidden);
    p.b2 = Vec(2, 0.0);
    return p;
  }

  static HeadParams init(int in, int hidden, Rng& rng) {
    HeadParams p = zeros(in, hidden);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& v : p.w1.a) v = rng.uniform(-bound, bound);
    return p;
  }
};

using HeadGrads = HeadParams;

struct ModelParams {
  int dim = 0;
  int hidden = 0;
  ExplanationMode mode = ExplanationMode::kLstm;
  EmbeddingTable table;
  LstmParams title_enc;
  LstmParams gist_enc;
  std::optional<LstmParams> expl_enc;  // present only in kLstm mode
  HeadParams relevance_head;
  HeadParams ordering_head;

  int relevance_in() const { return dim * (mode == ExplanationMode::kNone ? 2 : 3); }
  int ordering_in() const { return dim * (mode == ExplanationMode::kNone ? 3 : 5); }
};

inline ModelParams init_model(int dim, int hidden, ExplanationMode mode, EmbeddingTable table,
                              std::uint64_t seed) {
  if (table.dim != dim) throw Error("embedding table dim does not match model dim");
  ModelParams m;
  m.dim = dim;
  m.hidden = hidden;
  m.mode = mode;
  m.table = std::move(table);
  Rng base(seed);
  Rng r1 = base.fork(1), r2 = base.fork(2), r3 = base.fork(3), r4 = base.fork(4),
      r5 = base.fork(5);
  m.title_enc = LstmParams::init(dim, r1);
  m.gist_enc = LstmParams::init(dim, r2);
  if (mode == ExplanationMode::kLstm) m.expl_enc = LstmParams::init(dim, r3);
  m.relevance_head = HeadParams::init(m.relevance_in(), hidden, r4);
  m.ordering_head = HeadParams::init(m.ordering_in(), hidden, r5);
  return m;
}

// Gradient buffers shaped like the trainable parts of a model.
struct ModelGrads {
  Vec unk;
  LstmGrads title_enc;
  LstmGrads gist_enc;
  std::optional<LstmGrads> expl_enc;
  HeadGrads relevance_head;
  HeadGrads ordering_head;

  static ModelGrads zeros_like(const ModelParams& m) {
    ModelGrads g;
    g.unk = Vec(m.dim, 0.0);
    g.title_enc = LstmParams::zeros(m.dim);
    g.gist_enc = LstmParams::zeros(m.dim);
    if (m.expl_enc) g.expl_enc = LstmParams::zeros(m.dim);
    g.relevance_head = HeadParams::zeros(m.relevance_in(), m.hidden);
    g.ordering_head = HeadParams::zeros(m.ordering_in(), m.hidden);
    return g;
  }
};

// Flat view over the trainable scalars as contiguous chunks. The chunk order
// is the serialization order of checkpoints and the parameter order of Adam,
// so trainable_view and grad_view must enumerate identically.
struct ParamView {
  std::vector<std::span<double>> chunks;

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& c : chunks) n += c.size();
    return n;
  }

  double& flat(std::size_t idx) {
    for (auto& c : chunks) {
      if (idx < c.size()) return c[idx];
      idx -= c.size();
    }
    throw Error("flat parameter index out of range");
  }
};

namespace detail {

inline void append_lstm(ParamView& v, LstmParams& p) {
  for (int g = 0; g < 4; ++g) {
    v.chunks.emplace_back(p.wx[g].a);
    v.chunks.emplace_back(p.wh[g].a);
    v.chunks.emplace_back(p.b[g]);
  }
}

inline void append_head(ParamView& v, HeadParams& p) {
  v.chunks.emplace_back(p.w1.a);
  v.chunks.emplace_back(p.b1);
  v.chunks.emplace_back(p.w2.a);
  v.chunks.emplace_back(p.b2);
}

}  // namespace detail

inline ParamView trainable_view(ModelParams& m) {
  ParamView v;
  v.chunks.emplace_back(m.table.unk);
  detail::append_lstm(v, m.title_enc);
  detail::append_lstm(v, m.gist_enc);
  if (m.expl_enc) detail::append_lstm(v, *m.expl_enc);
  detail::append_head(v, m.relevance_head);
  detail::append_head(v, m.ordering_head);
  return v;
}

inline ParamView grad_view(ModelGrads& g) {
  ParamView v;
  v.chunks.emplace_back(g.unk);
  detail::append_lstm(v, g.title_enc);
  detail::append_lstm(v, g.gist_enc);
  if (g.expl_enc) detail::append_lstm(v, *g.expl_enc);
  detail::append_head(v, g.relevance_head);
  detail::append_head(v, g.ordering_head);
  return v;
}

inline void zero_grads(ModelGrads& g) {
  ParamView v = grad_view(g);
  for (auto& c : v.chunks) std::fill(c.begin(), c.end(), 0.0);
}

inline void scale_grads(ModelGrads& g, double s) {
  ParamView v = grad_view(g);
  for (auto& c : v.chunks)
    for (double& x : c) x *= s;
}

// Sequence length caps; they bound the recurrence cost on long free text.
inline constexpr std::size_t kMaxTitleGistTokens = 30;
inline constexpr std::size_t kMaxExplanationTokens = 100;

inline TokenSpan clip(const std::vector<std::string>& tokens, std::size_t cap) {
  return TokenSpan(tokens.data(), std::min(tokens.size(), cap));
}

namespace detail {

struct HeadTrace {
  Vec z;
  Vec h;
  double logits[2] = {0.0, 0.0};
  double p = 0.5;  // probability of class 1
};

inline double head_forward(const HeadParams& head, Vec z, HeadTrace* trace) {
  Vec h(head.w1.rows);
  matvec(head.w1, z.data(), h.data());
  for (int k = 0; k < head.w1.rows; ++k) h[k] = std::tanh(h[k] + head.b1[k]);
  double logits[2];
  matvec(head.w2, h.data(), logits);
  logits[0] += head.b2[0];
  logits[1] += head.b2[1];
  const double margin = logits[1] - logits[0];
  if (!std::isfinite(margin)) throw Error("non-finite activation in classifier head");
  const double p = 1.0 / (1.0 + std::exp(-margin));
  if (trace) {
    trace->z = std::move(z);
    trace->h = std::move(h);
    trace->logits[0] = logits[0];
    trace->logits[1] = logits[1];
    trace->p = p;
  }
  return p;
}

// dlogit1 = p - y drives the whole backward pass; dlogit0 is its negation.
inline void head_backward(const HeadParams& head, const HeadTrace& trace, double dlogit1,
                          HeadGrads& grads, Vec& dz) {
  const double dlogits[2] = {-dlogit1, dlogit1};
  add_outer(grads.w2, dlogits, trace.h.data());
  grads.b2[0] += dlogits[0];
  grads.b2[1] += dlogits[1];

  Vec dh(trace.h.size(), 0.0);
  matTvec_add(head.w2, dlogits, dh.data());
  Vec dpre(trace.h.size());
  for (std::size_t k = 0; k < trace.h.size(); ++k)
    dpre[k] = dh[k] * (1.0 - trace.h[k] * trace.h[k]);

  add_outer(grads.w1, dpre.data(), trace.z.data());
  for (std::size_t k = 0; k < dpre.size(); ++k) grads.b1[k] += dpre[k];
  dz.assign(trace.z.size(), 0.0);
  matTvec_add(head.w1, dpre.data(), dz.data());
}

// softplus(-s * margin), computed without overflow.
inline double nll_from_margin(double margin, bool label) {
  const double z = label ? margin : -margin;
  if (z > 0) return std::log1p(std::exp(-z));
  return -z + std::log1p(std::exp(z));
}

struct EncodedSlots {
  Vec z;                              // concatenation of all slot embeddings
  std::vector<LstmTrace> lstm_traces; // one per recurrent slot, in slot order
};

}  // namespace detail

// --- Relevance -------------------------------------------------------------

namespace detail {

inline EncodedSlots encode_relevance(const ModelParams& m,
                                     const std::vector<std::string>& title,
                                     const std::vector<std::string>& gist,
                                     const std::vector<std::string>& expl, bool want_traces) {
  EncodedSlots slots;
  slots.lstm_traces.reserve(3);
  auto run = [&](const LstmParams& enc, TokenSpan tokens) {
    slots.lstm_traces.emplace_back();
    return lstm_forward(enc, m.table, tokens, want_traces ? &slots.lstm_traces.back() : nullptr);
  };
  Vec et = run(m.title_enc, clip(title, kMaxTitleGistTokens));
  Vec eg = run(m.gist_enc, clip(gist, kMaxTitleGistTokens));
  slots.z.reserve(m.relevance_in());
  slots.z.insert(slots.z.end(), et.begin(), et.end());
  slots.z.insert(slots.z.end(), eg.begin(), eg.end());
  if (m.mode == ExplanationMode::kLstm) {
    Vec ee = run(*m.expl_enc, clip(expl, kMaxExplanationTokens));
    slots.z.insert(slots.z.end(), ee.begin(), ee.end());
  } else if (m.mode == ExplanationMode::kBag) {
    Vec ee = encode_bag(m.table, clip(expl, kMaxExplanationTokens));
    slots.z.insert(slots.z.end(), ee.begin(), ee.end());
  }
  return slots;
}

}  // namespace detail

// Probability that the step belongs to the titled task.
inline double predict_relevance(const ModelParams& m, const std::vector<std::string>& title,
                                const std::vector<std::string>& gist,
                                const std::vector<std::string>& expl) {
  detail::EncodedSlots slots = detail::encode_relevance(m, title, gist, expl, false);
  double p = detail::head_forward(m.relevance_head, std::move(slots.z), nullptr);
  return std::clamp(p, 1e-15, 1.0 - 1e-15);
}

// --- Ordering ---------------------------------------------------------------

namespace detail {

inline EncodedSlots encode_ordering(const ModelParams& m, const std::vector<std::string>& title,
                                    const std::vector<std::string>& g1,
                                    const std::vector<std::string>& e1,
                                    const std::vector<std::string>& g2,
                                    const std::vector<std::string>& e2, bool want_traces) {
  EncodedSlots slots;
  slots.lstm_traces.reserve(5);
  auto run = [&](const LstmParams& enc, TokenSpan tokens) {
    slots.lstm_traces.emplace_back();
    return lstm_forward(enc, m.table, tokens, want_traces ? &slots.lstm_traces.back() : nullptr);
  };
  auto append = [&](const Vec& v) { slots.z.insert(slots.z.end(), v.begin(), v.end()); };

  const std::vector<std::string>* gists[2] = {&g1, &g2};
  const std::vector<std::string>* expls[2] = {&e1, &e2};
  slots.z.reserve(m.ordering_in());
  append(run(m.title_enc, clip(title, kMaxTitleGistTokens)));
  for (int s = 0; s < 2; ++s) {
    append(run(m.gist_enc, clip(*gists[s], kMaxTitleGistTokens)));
    if (m.mode == ExplanationMode::kLstm)
      append(run(*m.expl_enc, clip(*expls[s], kMaxExplanationTokens)));
    else if (m.mode == ExplanationMode::kBag)
      append(encode_bag(m.table, clip(*expls[s], kMaxExplanationTokens)));
  }
  return slots;
}

}  // namespace detail

// Probability that step1 precedes step2.
inline double predict_order(const ModelParams& m, const std::vector<std::string>& title,
                            const std::vector<std::string>& g1, const std::vector<std::string>& e1,
                            const std::vector<std::string>& g2,
                            const std::vector<std::string>& e2) {
  detail::EncodedSlots slots = detail::encode_ordering(m, title, g1, e1, g2, e2, false);
  double p = detail::head_forward(m.ordering_head, std::move(slots.z), nullptr);
  return std::clamp(p, 1e-15, 1.0 - 1e-15);
}

// Negative log-likelihood of the labeled class.
inline double nll_loss(double prob, bool label) {
  if (!(prob > 0.0 && prob < 1.0)) throw Error("nll_loss probability must lie in (0,1)");
  return label ? -std::log(prob) : -std::log(1.0 - prob);
}

// --- Composed loss + gradients ----------------------------------------------

struct LossResult {
  double loss = 0.0;
  double p = 0.5;
  bool correct = false;  // thresholded at 0.5; exact ties count as incorrect
};

namespace detail {

inline bool thresholded_correct(double p, bool label) {
  if (p == 0.5) return false;
  return (p > 0.5) == label;
}

// Shared tail: softmax NLL on the head output, then backprop through the
// head and each encoder slot.
inline LossResult finish_loss_grad(const ModelParams& m, const HeadParams& head,
                                   HeadGrads& head_grads, EncodedSlots& slots, bool label,
                                   bool is_ordering, ModelGrads& grads,
                                   const std::vector<const std::vector<std::string>*>& expl_tokens) {
  HeadTrace trace;
  const double p = head_forward(head, std::move(slots.z), &trace);
  LossResult result;
  result.p = p;
  result.loss = nll_from_margin(trace.logits[1] - trace.logits[0], label);
  result.correct = thresholded_correct(p, label);
  if (!std::isfinite(result.loss)) throw Error("non-finite loss");

  Vec dz;
  head_backward(head, trace, p - (label ? 1.0 : 0.0), head_grads, dz);

  // Slot layout: title, then per step gist [+ explanation when encoded].
  const int d = m.dim;
  std::size_t lstm_idx = 0;
  std::size_t offset = 0;
  auto slice = [&](std::size_t at) { return Vec(dz.begin() + at, dz.begin() + at + d); };

  Vec up = slice(offset);
  lstm_backward(m.title_enc, slots.lstm_traces[lstm_idx++], up, grads.title_enc, grads.unk);
  offset += d;

  const int n_steps = is_ordering ? 2 : 1;
  for (int s = 0; s < n_steps; ++s) {
    up = slice(offset);
    lstm_backward(m.gist_enc, slots.lstm_traces[lstm_idx++], up, grads.gist_enc, grads.unk);
    offset += d;
    if (m.mode == ExplanationMode::kLstm) {
      up = slice(offset);
      lstm_backward(*m.expl_enc, slots.lstm_traces[lstm_idx++], up, *grads.expl_enc, grads.unk);
      offset += d;
    } else if (m.mode == ExplanationMode::kBag) {
      up = slice(offset);
      bag_backward(m.table, clip(*expl_tokens[s], kMaxExplanationTokens), up, grads.unk);
      offset += d;
    }
  }
  return result;
}

}  // namespace detail

inline LossResult relevance_loss_grad(const ModelParams& m, const RelevanceExample& ex,
                                      ModelGrads& grads) {
  detail::EncodedSlots slots =
      detail::encode_relevance(m, ex.title_tokens, ex.gist_tokens, ex.explanation_tokens, true);
  return detail::finish_loss_grad(m, m.relevance_head, grads.relevance_head, slots, ex.label,
                                  false, grads, {&ex.explanation_tokens});
}

inline LossResult ordering_loss_grad(const ModelParams& m, const OrderingExample& ex,
                                     ModelGrads& grads) {
  detail::EncodedSlots slots =
      detail::encode_ordering(m, ex.title_tokens, ex.step1_gist, ex.step1_explanation,
                              ex.step2_gist, ex.step2_explanation, true);
  return detail::finish_loss_grad(m, m.ordering_head, grads.ordering_head, slots, ex.label, true,
                                  grads, {&ex.step1_explanation, &ex.step2_explanation});
}

// Forward-only loss evaluation; the finite-difference path in gradcheck and
// the validation loop both use these.
inline LossResult relevance_loss(const ModelParams& m, const RelevanceExample& ex) {
  detail::EncodedSlots slots =
      detail::encode_relevance(m, ex.title_tokens, ex.gist_tokens, ex.explanation_tokens, false);
  detail::HeadTrace trace;
  const double p = detail::head_forward(m.relevance_head, std::move(slots.z), &trace);
  return {detail::nll_from_margin(trace.logits[1] - trace.logits[0], ex.label), p,
          detail::thresholded_correct(p, ex.label)};
}

inline LossResult ordering_loss(const ModelParams& m, const OrderingExample& ex) {
  detail::EncodedSlots slots =
      detail::encode_ordering(m, ex.title_tokens, ex.step1_gist, ex.step1_explanation,
                              ex.step2_gist, ex.step2_explanation, false);
  detail::HeadTrace trace;
  const double p = detail::head_forward(m.ordering_head, std::move(slots.z), &trace);
  return {detail::nll_from_margin(trace.logits[1] - trace.logits[0], ex.label), p,
          detail::thresholded_correct(p, ex.label)};
}

struct EvalMetrics {
  double loss = 0.0;
  double accuracy = 0.0;
};

inline EvalMetrics eval_metrics(const ModelParams& m, std::span<const RelevanceExample> examples) {
  if (examples.empty()) throw Error("cannot evaluate an empty example set");
  EvalMetrics out;
  for (const auto& ex : examples) {
    LossResult r = relevance_loss(m, ex);
    out.loss += r.loss;
    out.accuracy += r.correct ? 1.0 : 0.0;
  }
  out.loss /= static_cast<double>(examples.size());
  out.accuracy /= static_cast<double>(examples.size());
  return out;
}

inline EvalMetrics eval_metrics(const ModelParams& m, std::span<const OrderingExample> examples) {
  if (examples.empty()) throw Error("cannot evaluate an empty example set");
  EvalMetrics out;
  for (const auto& ex : examples) {
    LossResult r = ordering_loss(m, ex);
    out.loss += r.loss;
    out.accuracy += r.correct ? 1.0 : 0.0;
  }
  out.loss /= static_cast<double>(examples.size());
  out.accuracy /= static_cast<double>(examples.size());
  return out;
}

}  // namespace procknow
