#include <doctest.h>

#include <string>

#include "procknow/sampling.hpp"
#include "procknow/synthetic.hpp"
#include "test_util.hpp"

using namespace procknow;

namespace {

// Rule-based reference classifiers that must be perfect on generated data:
// relevance by topic-token match, ordering by ordinal-marker comparison.
std::string topic_of(const std::vector<std::string>& tokens) {
  for (const auto& t : tokens)
    if (t.rfind("topic", 0) == 0) return t;
  return "";
}

int ordinal_of(const std::vector<std::string>& gist) {
  return std::stoi(gist.at(0).substr(3));  // gists start with "ordNN"
}

}  // namespace

TEST_CASE("generation is deterministic per seed") {
  testutil::TempDir dir;
  Corpus a = gen_synthetic(99, 10, 3, 6);
  Corpus b = gen_synthetic(99, 10, 3, 6);
  auto pa = dir.file("a.jsonl"), pb = dir.file("b.jsonl");
  save_corpus_jsonl(a, pa);
  save_corpus_jsonl(b, pb);
  CHECK(testutil::read_file(pa) == testutil::read_file(pb));
}

TEST_CASE("every gist carries its task topic") {
  Corpus c = gen_synthetic(4, 15, 2, 7);
  for (const auto& task : c.tasks) {
    const std::string topic = topic_of(task.title_tokens);
    REQUIRE(!topic.empty());
    for (const auto& step : task.steps) {
      CHECK(topic_of(step.gist_tokens) == topic);
      CHECK(topic_of(step.explanation_tokens) == topic);
    }
  }
}

TEST_CASE("step counts respect the requested range") {
  Corpus c = gen_synthetic(21, 30, 5, 8);
  CHECK(c.tasks.size() == 30);
  for (const auto& task : c.tasks) {
    CHECK(task.steps.size() >= 5);
    CHECK(task.steps.size() <= 8);
  }
}

TEST_CASE("rule-based relevance classifier is perfect on generated data") {
  Corpus c = gen_synthetic(7, 20, 3, 6);
  auto examples = sample_relevance(c, 2000, 13);
  for (const auto& ex : examples) {
    const bool predicted = topic_of(ex.title_tokens) == topic_of(ex.gist_tokens);
    CHECK(predicted == ex.label);
  }
}

TEST_CASE("rule-based ordering classifier is perfect on generated data") {
  Corpus c = gen_synthetic(7, 20, 3, 6);
  auto examples = sample_ordering(c, 2000, 29);
  for (const auto& ex : examples) {
    const bool predicted = ordinal_of(ex.step1_gist) < ordinal_of(ex.step2_gist);
    CHECK(predicted == ex.label);
  }
}

TEST_CASE("generator rejects degenerate parameters") {
  CHECK_THROWS_AS(gen_synthetic(0, 2, 3, 5), SamplingError);
  CHECK_THROWS_AS(gen_synthetic(0, 5, 4, 3), SamplingError);
}
