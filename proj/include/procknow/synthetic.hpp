#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <unordered_set>
#include <vector>

#include "procknow/corpus.hpp"
#include "procknow/error.hpp"
#include "procknow/rng.hpp"

namespace procknow {

// Desk-scale corpus with planted signal. Every task owns a distinct topic
// token that appears in its title and in all of its step gists, so relevance
// is decidable by topic match. Every gist starts with an ordinal marker from
// a fixed sequence, so pairwise order is decidable by marker comparison.
// Explanations echo both tokens padded with noise words.
inline Corpus gen_synthetic(std::uint64_t seed, std::size_t n_tasks, std::size_t min_steps,
                            std::size_t max_steps) {
  if (n_tasks < 3) throw SamplingError("synthetic corpus needs at least 3 tasks");
  if (min_steps < 1 || max_steps < min_steps)
    throw SamplingError("invalid steps-per-task range");

  static const std::vector<std::string> kVerbs = {"prepare", "clean", "arrange", "inspect",
                                                  "assemble", "polish", "sort", "repair"};
  static const std::vector<std::string> kNouns = {"kit", "area", "surface", "frame",
                                                  "corner", "shelf", "panel", "drawer"};
  static const std::vector<std::string> kNoise = {"the",  "a",      "then", "carefully", "next",
                                                  "with", "gently", "now",  "also",      "first"};

  auto topic_token = [](std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "topic%03zu", i);
    return std::string(buf);
  };
  auto ordinal_token = [](std::size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "ord%02zu", k);
    return std::string(buf);
  };

  Rng rng(seed);
  Corpus corpus;
  corpus.tasks.reserve(n_tasks);
  for (std::size_t t = 0; t < n_tasks; ++t) {
    const std::string topic = topic_token(t);
    Task task;
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "synth-%04zu", t);
    task.task_id = idbuf;

    // Titles and gists stay terse so the planted topic dominates them; the
    // free-text variety lives in the explanations.
    const std::string& verb = kVerbs[rng.below(kVerbs.size())];
    task.title_text = verb + " " + topic;
    task.title_tokens = tokenize(task.title_text);

    const std::size_t n_steps = min_steps + rng.below(max_steps - min_steps + 1);
    for (std::size_t k = 0; k < n_steps; ++k) {
      Step step;
      step.position = static_cast<int>(k);
      step.gist_tokens = {ordinal_token(k), topic};
      step.explanation_tokens = {kNoise[rng.below(kNoise.size())], topic, ordinal_token(k),
                                 topic, kNouns[rng.below(kNouns.size())]};
      task.steps.push_back(std::move(step));
    }
    corpus.tasks.push_back(std::move(task));
  }
  return corpus;
}

// Every distinct token of the corpus, in first-appearance order.
inline std::vector<std::string> corpus_vocabulary(const Corpus& corpus) {
  std::vector<std::string> vocab;
  std::unordered_set<std::string> seen;
  auto add = [&](const std::vector<std::string>& tokens) {
    for (const auto& t : tokens)
      if (seen.insert(t).second) vocab.push_back(t);
  };
  for (const auto& task : corpus.tasks) {
    add(task.title_tokens);
    for (const auto& step : task.steps) {
      add(step.gist_tokens);
      add(step.explanation_tokens);
    }
  }
  return vocab;
}

}  // namespace procknow
