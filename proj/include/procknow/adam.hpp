#pragma once

#include <cmath>
#include <cstdint>

#include "procknow/error.hpp"
#include "procknow/heads.hpp"

namespace procknow {

// Bias-corrected first/second moment accumulators, one scalar per trainable
// parameter, in ParamView order.
struct AdamState {
  Vec m;
  Vec v;
  std::int64_t t = 0;

  static AdamState zeros(std::size_t n_params) {
    AdamState s;
    s.m = Vec(n_params, 0.0);
    s.v = Vec(n_params, 0.0);
    return s;
  }
};

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

inline void adam_step(AdamState& state, ParamView& params, ParamView& grads,
                      const AdamConfig& cfg) {
  if (params.chunks.size() != grads.chunks.size() || params.size() != state.m.size())
    throw Error("adam_step: parameter/gradient/state size mismatch");

  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));

  std::size_t idx = 0;
  for (std::size_t ci = 0; ci < params.chunks.size(); ++ci) {
    auto& pc = params.chunks[ci];
    auto& gc = grads.chunks[ci];
    if (pc.size() != gc.size()) throw Error("adam_step: gradient chunk shape mismatch");
    for (std::size_t k = 0; k < pc.size(); ++k) {
      const double g = gc[k];
      double& m = state.m[idx];
      double& v = state.v[idx];
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
      pc[k] -= cfg.lr * (m / bc1) / (std::sqrt(v / bc2) + cfg.eps);
      ++idx;
    }
  }
}

}  // namespace procknow
