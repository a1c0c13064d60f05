#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "procknow/evaluate.hpp"
#include "procknow/synthetic.hpp"
#include "planted.hpp"
#include "test_util.hpp"

using namespace procknow;

namespace {

ModelParams tiny_model(int dim, std::uint64_t seed) {
  EmbeddingTable table = random_table({"a", "b", "c", "d"}, dim, seed);
  return init_model(dim, 4, ExplanationMode::kLstm, std::move(table), seed);
}

std::vector<Task> chain_tasks(int n_tasks, int steps) {
  Corpus c = gen_synthetic(5, static_cast<std::size_t>(std::max(n_tasks, 3)),
                           static_cast<std::size_t>(steps), static_cast<std::size_t>(steps));
  c.tasks.resize(static_cast<std::size_t>(n_tasks));
  return c.tasks;
}

}  // namespace

TEST_CASE("accuracy is 0 for a zero-output model and 1 for a perfect oracle") {
  ModelParams m = tiny_model(3, 2);
  std::vector<RelevanceExample> balanced;
  for (int i = 0; i < 8; ++i) balanced.push_back({{"a"}, {"b"}, {"c"}, i % 2 == 0});
  CHECK(accuracy(m, balanced) == 0.0);  // all outputs exactly 0.5, ties incorrect

  std::vector<RelevanceExample> empty;
  CHECK_THROWS_AS(accuracy(m, empty), Error);
}

TEST_CASE("accuracy is invariant under example order") {
  ModelParams m = tiny_model(4, 7);
  ParamView view = trainable_view(m);
  Rng rng(3);
  for (auto& c : view.chunks)
    for (double& x : c) x = rng.uniform(-0.5, 0.5);

  std::vector<RelevanceExample> examples;
  const char* words[] = {"a", "b", "c", "d", "zz"};
  for (int i = 0; i < 40; ++i)
    examples.push_back({{words[i % 5]}, {words[(i + 1) % 5]}, {words[(i + 2) % 5]}, i % 3 == 0});
  const double base = accuracy(m, examples);
  std::reverse(examples.begin(), examples.end());
  CHECK(accuracy(m, examples) == base);
}

TEST_CASE("random baseline follows the linear formula") {
  auto curve = random_baseline_curve(0.3, {0.0, 0.5, 1.0});
  CHECK(curve[0].error_rate == doctest::Approx(0.3));
  CHECK(curve[1].error_rate == doctest::Approx(0.15));
  CHECK(curve[2].error_rate == doctest::Approx(0.0));
  CHECK_THROWS_AS(random_baseline_curve(1.3, {0.0}), Error);
}

TEST_CASE("a perfect pairwise predictor gives zero error at every fraction") {
  auto tasks = chain_tasks(5, 5);
  PairwisePredictor perfect = [](const Task&, int i, int j) { return i < j ? 0.98 : 0.02; };
  auto curve =
      ip_error_curve_from_predictor(tasks, perfect, {0.0, 0.1, 0.2, 0.3, 0.4, 0.5});
  for (const auto& pt : curve) CHECK(pt.error_rate == 0.0);
}

TEST_CASE("an inverted predictor errs on every decided pair at a=0") {
  auto tasks = chain_tasks(3, 4);
  PairwisePredictor inverted = [](const Task&, int i, int j) { return i < j ? 0.02 : 0.98; };
  auto curve = ip_error_curve_from_predictor(tasks, inverted, {0.0});
  CHECK(curve[0].error_rate == doctest::Approx(1.0));
}

TEST_CASE("ip error curve is non-increasing on the planted-ambiguity fixture") {
  auto tasks = planted::chain_tasks(12, 6);
  planted::PlantedConfig cfg;
  cfg.seed = 41;
  auto curve = ip_error_curve_from_predictor(tasks, planted::predictor(cfg),
                                             {0.0, 0.1, 0.2, 0.3, 0.4, 0.5});
  for (std::size_t k = 1; k < curve.size(); ++k)
    CHECK(curve[k].error_rate <= curve[k - 1].error_rate + 1e-12);
  CHECK(curve.front().error_rate > 0.0);
  CHECK(curve.back().error_rate < curve.front().error_rate);
}

TEST_CASE("parallel evaluation matches single-threaded exactly") {
  auto tasks = chain_tasks(8, 5);
  PairwisePredictor perfect = [](const Task&, int i, int j) { return i < j ? 0.9 : 0.1; };
  auto a = ip_error_curve_from_predictor(tasks, perfect, {0.0, 0.3}, 1e-9, 5.0, 1);
  auto b = ip_error_curve_from_predictor(tasks, perfect, {0.0, 0.3}, 1e-9, 5.0, 3);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k].error_rate == b[k].error_rate);
}

TEST_CASE("embedding export shape and determinism") {
  testutil::TempDir dir;
  Corpus c = gen_synthetic(9, 10, 3, 5);
  EmbeddingTable table = random_table(corpus_vocabulary(c), 6, 4);
  ModelParams m = init_model(6, 4, ExplanationMode::kLstm, std::move(table), 4);

  auto p1 = dir.file("e1.tsv");
  auto p2 = dir.file("e2.tsv");
  export_embeddings(m, c.tasks, p1);
  export_embeddings(m, c.tasks, p2);
  CHECK(testutil::read_file(p1) == testutil::read_file(p2));

  const auto text = testutil::read_file(p1);
  std::size_t rows = std::count(text.begin(), text.end(), '\n');
  CHECK(rows == c.tasks.size() + 1);
  const std::string header = text.substr(0, text.find('\n'));
  CHECK(std::count(header.begin(), header.end(), '\t') == 1 + 6);  // id, title, 6 dims

  auto empty_path = dir.file("empty.tsv");
  export_embeddings(m, {}, empty_path);
  const auto empty_text = testutil::read_file(empty_path);
  CHECK(std::count(empty_text.begin(), empty_text.end(), '\n') == 1);
}
