#pragma once

#include <fstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "procknow/error.hpp"
#include "procknow/tokenize.hpp"

namespace procknow {

struct Step {
  std::vector<std::string> gist_tokens;
  std::vector<std::string> explanation_tokens;
  int position = 0;  // 0-based index within its task
};

struct Task {
  std::string task_id;
  std::string title_text;
  std::vector<std::string> title_tokens;
  std::vector<Step> steps;
};

struct Corpus {
  std::vector<Task> tasks;

  std::size_t total_steps() const {
    std::size_t n = 0;
    for (const auto& t : tasks) n += t.steps.size();
    return n;
  }
};

namespace detail {

inline Task make_task(std::string id, const std::string& title,
                      const nlohmann::json& steps_json, int line_no) {
  Task task;
  task.task_id = std::move(id);
  task.title_text = title;
  task.title_tokens = tokenize(title);
  if (task.title_tokens.empty())
    throw ParseError("line " + std::to_string(line_no) + ": task title tokenizes to nothing");
  for (const auto& sj : steps_json) {
    if (!sj.is_object() || !sj.contains("gist") || !sj.contains("explanation") ||
        !sj["gist"].is_string() || !sj["explanation"].is_string())
      throw ParseError("line " + std::to_string(line_no) + ": step must have string gist and explanation");
    Step step;
    step.gist_tokens = tokenize(sj["gist"].get<std::string>());
    step.explanation_tokens = tokenize(sj["explanation"].get<std::string>());
    step.position = static_cast<int>(task.steps.size());
    if (step.gist_tokens.empty())
      throw ParseError("line " + std::to_string(line_no) + ": step gist tokenizes to nothing");
    task.steps.push_back(std::move(step));
  }
  return task;
}

}  // namespace detail

// Reads a JSONL corpus, one article per line:
//   {"id": ..., "title": ..., "sections": [{"title": <string|null>, "steps": [...]}]}
// A single-section article yields one task keyed by the article id. Each
// titled subsection of a multi-section article becomes its own task
// ("<id>#<k>") whose title is the subsection title. Sections with no steps
// are dropped.
inline Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open corpus file: " + path);

  Corpus corpus;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("title") || !j.contains("sections") ||
        !j["id"].is_string() || !j["title"].is_string() || !j["sections"].is_array())
      throw ParseError("line " + std::to_string(line_no) +
                       ": article must have string id, string title, and sections array");

    const std::string article_id = j["id"].get<std::string>();
    const std::string article_title = j["title"].get<std::string>();
    const auto& sections = j["sections"];
    const bool single = sections.size() == 1;

    int section_index = 0;
    for (const auto& sec : sections) {
      if (!sec.is_object() || !sec.contains("steps") || !sec["steps"].is_array())
        throw ParseError("line " + std::to_string(line_no) + ": section must have a steps array");
      if (sec["steps"].empty()) {
        ++section_index;
        continue;  // empty sections are dropped
      }
      std::string title = article_title;
      if (sec.contains("title") && sec["title"].is_string())
        title = sec["title"].get<std::string>();
      std::string task_id = single ? article_id : article_id + "#" + std::to_string(section_index);
      Task task = detail::make_task(std::move(task_id), title, sec["steps"], line_no);
      if (!seen_ids.insert(task.task_id).second)
        throw Error("duplicate task id after flattening: " + task.task_id);
      corpus.tasks.push_back(std::move(task));
      ++section_index;
    }
  }
  return corpus;
}

// Writes tasks back out in the corpus schema, one flat article per task.
inline void save_corpus_jsonl(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  for (const auto& task : corpus.tasks) {
    nlohmann::ordered_json steps = nlohmann::ordered_json::array();
    for (const auto& step : task.steps) {
      steps.push_back({{"gist", join_tokens(step.gist_tokens)},
                       {"explanation", join_tokens(step.explanation_tokens)}});
    }
    nlohmann::ordered_json j = {
        {"id", task.task_id},
        {"title", task.title_text},
        {"sections", nlohmann::ordered_json::array({{{"title", nullptr}, {"steps", steps}}})}};
    out << j.dump() << '\n';
  }
}

}  // namespace procknow
