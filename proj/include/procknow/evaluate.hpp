#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "procknow/corpus.hpp"
#include "procknow/heads.hpp"
#include "procknow/ordersolve.hpp"

namespace procknow {

// Fraction of examples whose thresholded probability matches the label.
// Exact 0.5 outputs count as incorrect.
inline double accuracy(const ModelParams& m, std::span<const RelevanceExample> examples) {
  return eval_metrics(m, examples).accuracy;
}

inline double accuracy(const ModelParams& m, std::span<const OrderingExample> examples) {
  return eval_metrics(m, examples).accuracy;
}

struct CurvePoint {
  double ambiguity_fraction = 0.0;
  double error_rate = 0.0;
};

// P(step i before step j) for steps of one task. The neural model provides
// one; synthetic evaluations can plug in anything else.
using PairwisePredictor = std::function<double(const Task&, int, int)>;

inline PairwisePredictor model_predictor(const ModelParams& m) {
  return [&m](const Task& task, int i, int j) {
    const Step& a = task.steps[i];
    const Step& b = task.steps[j];
    return predict_order(m, task.title_tokens, a.gist_tokens, a.explanation_tokens, b.gist_tokens,
                         b.explanation_tokens);
  };
}

namespace detail {

// Per-task error at each ambiguity fraction: decided pairs contradicting the
// listing order, over all unordered pairs. Undecided pairs never count.
inline std::vector<double> task_errors(const Task& task, const PairwisePredictor& predictor,
                                       const std::vector<double>& fractions, double eps,
                                       double time_limit) {
  const int t = static_cast<int>(task.steps.size());
  if (t < 2) throw SolveError("task " + task.task_id + " has fewer than 2 steps");
  std::vector<double> probs(static_cast<std::size_t>(t) * t, 0.0);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < t; ++j)
      if (i != j) probs[static_cast<std::size_t>(i) * t + j] = predictor(task, i, j);

  PairwiseWeights weights = weights_from_probs(probs, t, eps);
  const auto total_pairs = weights.max_decidable();

  std::vector<double> errors;
  errors.reserve(fractions.size());
  for (double a : fractions) {
    OrderProblem problem{weights, std::llround((1.0 - a) * static_cast<double>(total_pairs))};
    OrderSolution solution;
    try {
      solution = solve_exact(problem, time_limit);
    } catch (const SolveError& e) {
      throw SolveError("task " + task.task_id + ": " + e.what());
    }
    std::int64_t contradictions = 0;
    for (int i = 0; i < t; ++i)
      for (int j = 0; j < t; ++j)
        if (solution.before(i, j) && i > j) ++contradictions;  // positions are list indices
    errors.push_back(static_cast<double>(contradictions) / static_cast<double>(total_pairs));
  }
  return errors;
}

}  // namespace detail

// Solves the ordering IP for every task at every ambiguity fraction and
// averages the error rates. Tasks are independent; `jobs` threads may fan
// out, and aggregation stays in task order either way.
inline std::vector<CurvePoint> ip_error_curve_from_predictor(
    const std::vector<Task>& tasks, const PairwisePredictor& predictor,
    const std::vector<double>& fractions, double eps = 1e-9, double time_limit = 5.0,
    int jobs = 1) {
  if (tasks.empty()) throw Error("ip_error_curve needs at least one task");
  std::vector<std::vector<double>> per_task(tasks.size());

  if (jobs <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i)
      per_task[i] = detail::task_errors(tasks[i], predictor, fractions, eps, time_limit);
  } else {
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w) {
      workers.emplace_back([&, w]() {
        try {
          for (std::size_t i = static_cast<std::size_t>(w); i < tasks.size();
               i += static_cast<std::size_t>(jobs))
            per_task[i] = detail::task_errors(tasks[i], predictor, fractions, eps, time_limit);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& th : workers) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  std::vector<CurvePoint> curve;
  curve.reserve(fractions.size());
  for (std::size_t f = 0; f < fractions.size(); ++f) {
    double sum = 0.0;
    for (const auto& errs : per_task) sum += errs[f];
    curve.push_back({fractions[f], sum / static_cast<double>(tasks.size())});
  }
  return curve;
}

inline std::vector<CurvePoint> ip_error_curve(const ModelParams& m, const std::vector<Task>& tasks,
                                              const std::vector<double>& fractions,
                                              double time_limit = 5.0, double eps = 1e-9,
                                              int jobs = 1) {
  return ip_error_curve_from_predictor(tasks, model_predictor(m), fractions, eps, time_limit,
                                       jobs);
}

// Expected error when pairs are marked ambiguous uniformly at random.
inline std::vector<CurvePoint> random_baseline_curve(double e0,
                                                     const std::vector<double>& fractions) {
  if (!(e0 >= 0.0 && e0 <= 1.0)) throw Error("base error must lie in [0,1]");
  std::vector<CurvePoint> curve;
  curve.reserve(fractions.size());
  for (double a : fractions) curve.push_back({a, (1.0 - a) * e0});
  return curve;
}

// TSV of task id, title, and the title embedding, for external projection
// tools. Header row only when there are no tasks.
inline void export_embeddings(const ModelParams& m, const std::vector<Task>& tasks,
                              const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out << "task_id\ttitle";
  for (int k = 0; k < m.dim; ++k) out << "\tv" << k;
  out << '\n';
  char buf[32];
  for (const auto& task : tasks) {
    Vec e = lstm_forward(m.title_enc, m.table, clip(task.title_tokens, kMaxTitleGistTokens));
    std::string title = task.title_text;
    for (char& c : title)
      if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    out << task.task_id << '\t' << title;
    for (int k = 0; k < m.dim; ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", e[k]);
      out << '\t' << buf;
    }
    out << '\n';
  }
}

}  // namespace procknow
