#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "procknow/corpus.hpp"
#include "procknow/error.hpp"
#include "procknow/rng.hpp"

namespace procknow {

struct SplitCorpus {
  Corpus train;
  Corpus validation;
  Corpus test;
};

struct RelevanceExample {
  std::vector<std::string> title_tokens;
  std::vector<std::string> gist_tokens;
  std::vector<std::string> explanation_tokens;
  bool label = false;  // true = step belongs to the titled task
};

struct OrderingExample {
  std::vector<std::string> title_tokens;
  std::vector<std::string> step1_gist;
  std::vector<std::string> step1_explanation;
  std::vector<std::string> step2_gist;
  std::vector<std::string> step2_explanation;
  bool label = false;  // true = step1 precedes step2 in the reference order
};

// Shuffles tasks with the seeded PRNG, then partitions train/validation/test.
// Validation and test sizes are floored; the remainder goes to train.
inline SplitCorpus split_corpus(const Corpus& corpus, std::array<double, 3> ratios,
                                std::uint64_t seed) {
  for (double r : ratios)
    if (!(r > 0.0)) throw SamplingError("split ratios must be positive");
  double sum = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(sum - 1.0) > 1e-9) throw SamplingError("split ratios must sum to 1");
  const std::size_t n = corpus.tasks.size();
  if (n < 3) throw SamplingError("cannot split a corpus with fewer than 3 tasks");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  const auto n_val = static_cast<std::size_t>(std::floor(ratios[1] * static_cast<double>(n)));
  const auto n_test = static_cast<std::size_t>(std::floor(ratios[2] * static_cast<double>(n)));
  const std::size_t n_train = n - n_val - n_test;

  SplitCorpus split;
  for (std::size_t i = 0; i < n; ++i) {
    const Task& t = corpus.tasks[order[i]];
    if (i < n_train)
      split.train.tasks.push_back(t);
    else if (i < n_train + n_val)
      split.validation.tasks.push_back(t);
    else
      split.test.tasks.push_back(t);
  }
  return split;
}

namespace detail {

inline bool task_contains_pair(const Task& task, const Step& step) {
  for (const auto& s : task.steps)
    if (s.gist_tokens == step.gist_tokens && s.explanation_tokens == step.explanation_tokens)
      return true;
  return false;
}

}  // namespace detail

// n/2 positive pairs (task plus one of its own steps) and n/2 negatives
// (task and step drawn independently, redrawn while the step's
// gist/explanation pair occurs in the titled task), shuffled together.
inline std::vector<RelevanceExample> sample_relevance(const Corpus& corpus, std::size_t n,
                                                      std::uint64_t seed) {
  if (n % 2 != 0) throw SamplingError("relevance sample size must be even");
  if (corpus.tasks.size() < 2)
    throw SamplingError("relevance sampling needs at least 2 tasks");

  constexpr int kMaxRedraws = 1000;
  Rng rng(seed);
  std::vector<RelevanceExample> out;
  out.reserve(n);

  for (std::size_t k = 0; k < n / 2; ++k) {
    const Task& task = corpus.tasks[rng.below(corpus.tasks.size())];
    const Step& step = task.steps[rng.below(task.steps.size())];
    out.push_back({task.title_tokens, step.gist_tokens, step.explanation_tokens, true});
  }
  for (std::size_t k = 0; k < n / 2; ++k) {
    int tries = 0;
    for (;;) {
      if (++tries > kMaxRedraws)
        throw SamplingError("negative sampling did not terminate after " +
                            std::to_string(kMaxRedraws) + " redraws");
      const Task& task = corpus.tasks[rng.below(corpus.tasks.size())];
      const Task& other = corpus.tasks[rng.below(corpus.tasks.size())];
      const Step& step = other.steps[rng.below(other.steps.size())];
      if (detail::task_contains_pair(task, step)) continue;
      out.push_back({task.title_tokens, step.gist_tokens, step.explanation_tokens, false});
      break;
    }
  }
  rng.shuffle(out);
  return out;
}

// Uniform task among those with >= 2 steps, uniform unordered step pair, coin
// flip for which is step1. The label records positional truth.
inline std::vector<OrderingExample> sample_ordering(const Corpus& corpus, std::size_t n,
                                                    std::uint64_t seed) {
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < corpus.tasks.size(); ++i)
    if (corpus.tasks[i].steps.size() >= 2) eligible.push_back(i);
  if (eligible.empty())
    throw SamplingError("ordering sampling needs a task with at least 2 steps");

  Rng rng(seed);
  std::vector<OrderingExample> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Task& task = corpus.tasks[eligible[rng.below(eligible.size())]];
    const std::size_t t = task.steps.size();
    std::size_t i = rng.below(t);
    std::size_t j = rng.below(t - 1);
    if (j >= i) ++j;  // distinct positions
    if (i > j) std::swap(i, j);
    if (rng.coin()) std::swap(i, j);  // coin flip assigns step1/step2
    const Step& s1 = task.steps[i];
    const Step& s2 = task.steps[j];
    out.push_back({task.title_tokens, s1.gist_tokens, s1.explanation_tokens, s2.gist_tokens,
                   s2.explanation_tokens, s1.position < s2.position});
  }
  return out;
}

}  // namespace procknow
