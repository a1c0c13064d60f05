#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "procknow/heads.hpp"

namespace procknow {

struct GradCheckReport {
  int configs = 0;
  double max_rel_error = 0.0;
  bool ok = false;
};

namespace detail {

inline std::vector<std::string> random_tokens(Rng& rng, std::size_t lo, std::size_t hi) {
  static const char* kKnown[] = {"w0", "w1", "w2", "w3", "w4", "w5"};
  static const char* kUnknown[] = {"u0", "u1", "u2"};
  const std::size_t len = lo + rng.below(hi - lo + 1);
  std::vector<std::string> out;
  out.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    if (rng.below(4) == 0) out.push_back(kUnknown[rng.below(3)]);
    else out.push_back(kKnown[rng.below(6)]);
  }
  return out;
}

}  // namespace detail

// Compares the analytic gradient of the composed NLL loss against central
// finite differences over every trainable scalar, for randomly shaped models
// covering all explanation modes and both prediction heads. Error metric per
// component: |analytic - numeric| / max(|analytic|, |numeric|, 1e-4); the
// floor turns the check absolute for near-zero components.
inline GradCheckReport gradcheck_run(int max_dim, int max_seq, int n_configs,
                                     std::uint64_t seed) {
  if (max_dim < 2) max_dim = 2;
  if (max_seq < 1) max_seq = 1;
  const double h = 1e-5;

  GradCheckReport report;
  report.configs = n_configs;

  for (int cfg = 0; cfg < n_configs; ++cfg) {
    Rng rng = Rng(seed).fork(0x47C0 + static_cast<std::uint64_t>(cfg));
    const int dim = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_dim - 1)));
    const int hidden = 2 + static_cast<int>(rng.below(7));
    const auto mode = static_cast<ExplanationMode>(rng.below(3));
    const bool ordering = rng.coin();

    std::vector<std::string> vocab = {"w0", "w1", "w2", "w3", "w4", "w5"};
    EmbeddingTable table = random_table(vocab, dim, rng.next_u64());
    ModelParams model = init_model(dim, hidden, mode, std::move(table), rng.next_u64());

    // A generic point: every trainable scalar uniform in (-0.5, 0.5), so the
    // zero-initialized output layers do not mask upstream gradients.
    ParamView params = trainable_view(model);
    for (auto& chunk : params.chunks)
      for (double& x : chunk) x = rng.uniform(-0.5, 0.5);

    RelevanceExample rel_ex;
    OrderingExample ord_ex;
    const auto seq = static_cast<std::size_t>(max_seq);
    if (ordering) {
      ord_ex.title_tokens = detail::random_tokens(rng, 1, seq);
      ord_ex.step1_gist = detail::random_tokens(rng, 1, seq);
      ord_ex.step1_explanation = detail::random_tokens(rng, 0, seq);
      ord_ex.step2_gist = detail::random_tokens(rng, 1, seq);
      ord_ex.step2_explanation = detail::random_tokens(rng, 0, seq);
      ord_ex.label = rng.coin();
    } else {
      rel_ex.title_tokens = detail::random_tokens(rng, 1, seq);
      rel_ex.gist_tokens = detail::random_tokens(rng, 1, seq);
      rel_ex.explanation_tokens = detail::random_tokens(rng, 0, seq);
      rel_ex.label = rng.coin();
    }
    auto loss_at = [&]() {
      return ordering ? ordering_loss(model, ord_ex).loss : relevance_loss(model, rel_ex).loss;
    };

    ModelGrads grads = ModelGrads::zeros_like(model);
    if (ordering) ordering_loss_grad(model, ord_ex, grads);
    else relevance_loss_grad(model, rel_ex, grads);
    ParamView gview = grad_view(grads);

    const std::size_t n = params.size();
    for (std::size_t k = 0; k < n; ++k) {
      double& theta = params.flat(k);
      const double saved = theta;
      theta = saved + h;
      const double up = loss_at();
      theta = saved - h;
      const double down = loss_at();
      theta = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = gview.flat(k);
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-4});
      report.max_rel_error = std::max(report.max_rel_error, std::abs(analytic - numeric) / denom);
    }
  }
  report.ok = report.max_rel_error < 1e-4;
  return report;
}

}  // namespace procknow
