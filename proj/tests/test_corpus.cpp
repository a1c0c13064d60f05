#include <doctest.h>

#include <string>

#include "procknow/corpus.hpp"
#include "test_util.hpp"

using namespace procknow;

namespace {

std::string article(const std::string& id, const std::string& title, int sections, int steps,
                    bool titled_sections) {
  nlohmann::ordered_json secs = nlohmann::ordered_json::array();
  for (int s = 0; s < sections; ++s) {
    nlohmann::ordered_json stepsj = nlohmann::ordered_json::array();
    for (int k = 0; k < steps; ++k)
      stepsj.push_back({{"gist", "step " + std::to_string(k) + " gist"},
                        {"explanation", "explanation " + std::to_string(k)}});
    nlohmann::ordered_json sec;
    if (titled_sections) sec["title"] = title + " part " + std::to_string(s);
    else sec["title"] = nullptr;
    sec["steps"] = stepsj;
    secs.push_back(sec);
  }
  nlohmann::ordered_json j = {{"id", id}, {"title", title}, {"sections", secs}};
  return j.dump();
}

}  // namespace

TEST_CASE("hierarchical article flattens to one task per subsection") {
  testutil::TempDir dir;
  auto path = dir.file("corpus.jsonl");
  testutil::write_file(path, article("a1", "Clean kitchen", 2, 3, true) + "\n");
  Corpus c = load_corpus(path);
  REQUIRE(c.tasks.size() == 2);
  CHECK(c.tasks[0].steps.size() == 3);
  CHECK(c.tasks[1].steps.size() == 3);
  CHECK(c.tasks[0].task_id == "a1#0");
  CHECK(c.tasks[0].title_tokens == std::vector<std::string>{"clean", "kitchen", "part", "0"});
}

TEST_CASE("flat article becomes a single task") {
  testutil::TempDir dir;
  auto path = dir.file("corpus.jsonl");
  testutil::write_file(path, article("a1", "Move house", 1, 5, false) + "\n");
  Corpus c = load_corpus(path);
  REQUIRE(c.tasks.size() == 1);
  CHECK(c.tasks[0].task_id == "a1");
  CHECK(c.tasks[0].title_text == "Move house");
  CHECK(c.tasks[0].steps.size() == 5);
}

TEST_CASE("10 articles, 3 hierarchical with 2 sections each, give 13 tasks") {
  testutil::TempDir dir;
  auto path = dir.file("corpus.jsonl");
  std::string content;
  for (int i = 0; i < 7; ++i)
    content += article("flat" + std::to_string(i), "Task " + std::to_string(i), 1, 2, false) + "\n";
  for (int i = 0; i < 3; ++i)
    content += article("hier" + std::to_string(i), "Big " + std::to_string(i), 2, 2, true) + "\n";
  testutil::write_file(path, content);
  Corpus c = load_corpus(path);
  CHECK(c.tasks.size() == 13);
}

TEST_CASE("flattening conserves steps") {
  testutil::TempDir dir;
  auto path = dir.file("corpus.jsonl");
  std::string content;
  std::size_t expected = 0;
  for (int i = 0; i < 5; ++i) {
    int sections = 1 + i % 3;
    int steps = 2 + i;
    expected += static_cast<std::size_t>(sections) * steps;
    content +=
        article("a" + std::to_string(i), "T " + std::to_string(i), sections, steps, sections > 1) +
        "\n";
  }
  testutil::write_file(path, content);
  CHECK(load_corpus(path).total_steps() == expected);
}

TEST_CASE("step positions are contiguous list indices") {
  testutil::TempDir dir;
  auto path = dir.file("corpus.jsonl");
  testutil::write_file(path, article("a1", "Fix sink", 1, 4, false) + "\n");
  Corpus c = load_corpus(path);
  for (std::size_t k = 0; k < c.tasks[0].steps.size(); ++k)
    CHECK(c.tasks[0].steps[k].position == static_cast<int>(k));
}

TEST_CASE("malformed line reports its line number") {
  testutil::TempDir dir;
  auto path = dir.file("corpus.jsonl");
  testutil::write_file(path, article("a1", "Good", 1, 2, false) + "\nnot json at all\n");
  try {
    load_corpus(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("duplicate task id is an ingestion error") {
  testutil::TempDir dir;
  auto path = dir.file("corpus.jsonl");
  testutil::write_file(path,
                       article("dup", "One", 1, 2, false) + "\n" +
                           article("dup", "Two", 1, 2, false) + "\n");
  CHECK_THROWS_AS(load_corpus(path), Error);
}

TEST_CASE("empty sections are dropped") {
  testutil::TempDir dir;
  auto path = dir.file("corpus.jsonl");
  nlohmann::ordered_json j = {
      {"id", "a1"},
      {"title", "Mixed"},
      {"sections",
       nlohmann::ordered_json::array(
           {{{"title", "Empty part"}, {"steps", nlohmann::ordered_json::array()}},
            {{"title", "Full part"},
             {"steps", nlohmann::ordered_json::array(
                           {{{"gist", "do it"}, {"explanation", "well"}}})}}})}};
  testutil::write_file(path, j.dump() + "\n");
  Corpus c = load_corpus(path);
  REQUIRE(c.tasks.size() == 1);
  CHECK(c.tasks[0].title_text == "Full part");
}

TEST_CASE("empty gist is rejected with its line number") {
  testutil::TempDir dir;
  auto path = dir.file("corpus.jsonl");
  nlohmann::ordered_json j = {
      {"id", "a1"},
      {"title", "Bad"},
      {"sections", nlohmann::ordered_json::array(
                       {{{"title", nullptr},
                         {"steps", nlohmann::ordered_json::array(
                                       {{{"gist", "  "}, {"explanation", "x"}}})}}})}};
  testutil::write_file(path, j.dump() + "\n");
  CHECK_THROWS_AS(load_corpus(path), ParseError);
}

TEST_CASE("save and reload round-trips task structure") {
  testutil::TempDir dir;
  auto path = dir.file("corpus.jsonl");
  testutil::write_file(path, article("a1", "Round trip", 2, 3, true) + "\n");
  Corpus c = load_corpus(path);
  auto out = dir.file("again.jsonl");
  save_corpus_jsonl(c, out);
  Corpus c2 = load_corpus(out);
  REQUIRE(c2.tasks.size() == c.tasks.size());
  for (std::size_t i = 0; i < c.tasks.size(); ++i) {
    CHECK(c2.tasks[i].task_id == c.tasks[i].task_id);
    CHECK(c2.tasks[i].title_tokens == c.tasks[i].title_tokens);
    REQUIRE(c2.tasks[i].steps.size() == c.tasks[i].steps.size());
    for (std::size_t k = 0; k < c.tasks[i].steps.size(); ++k)
      CHECK(c2.tasks[i].steps[k].gist_tokens == c.tasks[i].steps[k].gist_tokens);
  }
}
