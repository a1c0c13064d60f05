#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "procknow/adam.hpp"
#include "procknow/heads.hpp"
#include "procknow/sampling.hpp"

namespace procknow {

enum class Problem { kRelevance, kOrdering, kJoint };

inline const char* problem_name(Problem p) {
  switch (p) {
    case Problem::kRelevance: return "relevance";
    case Problem::kOrdering: return "ordering";
    case Problem::kJoint: return "joint";
  }
  return "?";
}

inline Problem problem_from_name(const std::string& s) {
  if (s == "relevance") return Problem::kRelevance;
  if (s == "ordering") return Problem::kOrdering;
  if (s == "joint") return Problem::kJoint;
  throw Error("unknown problem: " + s);
}

struct TrainConfig {
  int dim = 500;
  int hidden = 128;
  double lr = 0.001;
  int batch = 64;
  std::int64_t max_iterations = 5000;
  int validation_interval = 100;
  int n_val_examples = 512;
  ExplanationMode mode = ExplanationMode::kLstm;
  std::uint64_t seed = 0;
};

struct MetricsRow {
  std::int64_t iteration = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

struct TrainResult {
  ModelParams model;  // snapshot with the highest validation accuracy
  std::int64_t best_iteration = 0;
  double best_val_accuracy = 0.0;
  std::vector<MetricsRow> series;
};

namespace detail {

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return Rng(seed).fork(a).fork(b).next_u64();
}

inline Vec snapshot_values(ParamView& view) {
  Vec out;
  out.reserve(view.size());
  for (const auto& c : view.chunks) out.insert(out.end(), c.begin(), c.end());
  return out;
}

inline void restore_values(ParamView& view, const Vec& values) {
  std::size_t i = 0;
  for (auto& c : view.chunks)
    for (double& x : c) x = values[i++];
}

}  // namespace detail

// Mini-batch NLL training with Adam. Fresh training batches are drawn from
// the train split every iteration; joint mode alternates the two problems
// over shared encoders. Validation accuracy on fixed example sets decides
// which snapshot is returned (ties go to the earliest).
inline TrainResult train(const TrainConfig& config, const SplitCorpus& split, Problem problem,
                         EmbeddingTable table) {
  if (config.batch <= 0 || config.max_iterations < 0 || config.validation_interval <= 0 ||
      config.n_val_examples <= 0)
    throw TrainError("train config values must be positive");
  const bool want_rel = problem != Problem::kOrdering;
  const bool want_ord = problem != Problem::kRelevance;
  if (want_rel && (config.batch % 2 != 0 || config.n_val_examples % 2 != 0))
    throw TrainError("relevance batches must be even (balanced positives/negatives)");

  ModelParams model = init_model(config.dim, config.hidden, config.mode, std::move(table),
                                 detail::derive_seed(config.seed, 0x6D, 0));
  ModelGrads grads = ModelGrads::zeros_like(model);
  ParamView params = trainable_view(model);
  ParamView gview = grad_view(grads);
  AdamState adam = AdamState::zeros(params.size());
  AdamConfig adam_cfg;
  adam_cfg.lr = config.lr;

  // Fixed validation sets, fixed probe batches for the iteration-0 row.
  std::vector<RelevanceExample> val_rel, probe_rel;
  std::vector<OrderingExample> val_ord, probe_ord;
  if (want_rel) {
    val_rel = sample_relevance(split.validation, static_cast<std::size_t>(config.n_val_examples),
                               detail::derive_seed(config.seed, 0x76, 1));
    probe_rel = sample_relevance(split.train, static_cast<std::size_t>(config.batch),
                                 detail::derive_seed(config.seed, 0x70, 1));
  }
  if (want_ord) {
    val_ord = sample_ordering(split.validation, static_cast<std::size_t>(config.n_val_examples),
                              detail::derive_seed(config.seed, 0x76, 2));
    probe_ord = sample_ordering(split.train, static_cast<std::size_t>(config.batch),
                                detail::derive_seed(config.seed, 0x70, 2));
  }

  TrainResult result;
  double best_acc = -1.0;
  Vec best_values;
  std::int64_t best_iter = 0;

  double run_loss = 0.0, run_acc = 0.0;
  std::int64_t run_count = 0;

  for (std::int64_t iter = 0;; ++iter) {
    const bool boundary = iter % config.validation_interval == 0 || iter == config.max_iterations;
    if (boundary) {
      double val_loss = 0.0, val_acc = 0.0;
      int parts = 0;
      if (want_rel) {
        EvalMetrics mref = eval_metrics(model, val_rel);
        val_loss += mref.loss;
        val_acc += mref.accuracy;
        ++parts;
      }
      if (want_ord) {
        EvalMetrics mord = eval_metrics(model, val_ord);
        val_loss += mord.loss;
        val_acc += mord.accuracy;
        ++parts;
      }
      val_loss /= parts;
      val_acc /= parts;

      double train_loss, train_acc;
      if (run_count > 0) {
        train_loss = run_loss / static_cast<double>(run_count);
        train_acc = run_acc / static_cast<double>(run_count);
      } else {
        // No batches yet: measure the untouched model on fixed probe batches.
        double l = 0.0, a = 0.0;
        int pp = 0;
        if (want_rel) {
          EvalMetrics mp = eval_metrics(model, probe_rel);
          l += mp.loss;
          a += mp.accuracy;
          ++pp;
        }
        if (want_ord) {
          EvalMetrics mp = eval_metrics(model, probe_ord);
          l += mp.loss;
          a += mp.accuracy;
          ++pp;
        }
        train_loss = l / pp;
        train_acc = a / pp;
      }
      run_loss = run_acc = 0.0;
      run_count = 0;

      result.series.push_back({iter, train_loss, train_acc, val_loss, val_acc});
      if (val_acc > best_acc) {
        best_acc = val_acc;
        best_iter = iter;
        best_values = detail::snapshot_values(params);
      }
    }
    if (iter == config.max_iterations) break;

    // One mini-batch step.
    const bool rel_batch = want_rel && (!want_ord || iter % 2 == 0);
    zero_grads(grads);
    double batch_loss = 0.0;
    double batch_acc = 0.0;
    if (rel_batch) {
      auto batch = sample_relevance(split.train, static_cast<std::size_t>(config.batch),
                                    detail::derive_seed(config.seed, 0xB0, static_cast<std::uint64_t>(iter)));
      for (const auto& ex : batch) {
        LossResult r = relevance_loss_grad(model, ex, grads);
        batch_loss += r.loss;
        batch_acc += r.correct ? 1.0 : 0.0;
      }
    } else {
      auto batch = sample_ordering(split.train, static_cast<std::size_t>(config.batch),
                                   detail::derive_seed(config.seed, 0xB1, static_cast<std::uint64_t>(iter)));
      for (const auto& ex : batch) {
        LossResult r = ordering_loss_grad(model, ex, grads);
        batch_loss += r.loss;
        batch_acc += r.correct ? 1.0 : 0.0;
      }
    }
    batch_loss /= config.batch;
    batch_acc /= config.batch;
    if (!std::isfinite(batch_loss))
      throw TrainError("training diverged at iteration " + std::to_string(iter));
    scale_grads(grads, 1.0 / config.batch);
    adam_step(adam, params, gview, adam_cfg);

    run_loss += batch_loss;
    run_acc += batch_acc;
    ++run_count;
  }

  detail::restore_values(params, best_values);
  result.model = std::move(model);
  result.best_iteration = best_iter;
  result.best_val_accuracy = best_acc;
  return result;
}

// Learning-curve series: `iteration,train_loss,train_acc,val_loss,val_acc`.
inline void write_metrics_csv(const std::vector<MetricsRow>& series, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out << "iteration,train_loss,train_acc,val_loss,val_acc\n";
  char buf[160];
  for (const auto& row : series) {
    std::snprintf(buf, sizeof(buf), "%lld,%.10g,%.10g,%.10g,%.10g\n",
                  static_cast<long long>(row.iteration), row.train_loss, row.train_acc,
                  row.val_loss, row.val_acc);
    out << buf;
  }
}

}  // namespace procknow
