#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include <json.hpp>

#include "test_util.hpp"

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

// Runs the CLI with stdout captured to a file; stderr left alone.
RunResult run_cli(const testutil::TempDir& dir, const std::string& args) {
  static int counter = 0;
  const std::string out_path = dir.file("stdout-" + std::to_string(counter++) + ".txt");
  const std::string cmd = std::string(PROCKNOW_CLI_PATH) + " " + args + " > " + out_path;
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = testutil::read_file(out_path);
  return r;
}

nlohmann::json summary(const RunResult& r) { return nlohmann::json::parse(r.out); }

}  // namespace

TEST_CASE("unknown subcommands and flags exit with status 2") {
  testutil::TempDir dir;
  CHECK(run_cli(dir, "frobnicate 2>/dev/null").exit_code == 2);
  CHECK(run_cli(dir, "order --no-such-flag 2>/dev/null").exit_code == 2);
  CHECK(run_cli(dir, "2>/dev/null").exit_code == 2);
}

TEST_CASE("operational failures exit with status 1") {
  testutil::TempDir dir;
  CHECK(run_cli(dir, "ingest --corpus /nonexistent/path.jsonl 2>/dev/null").exit_code == 1);
}

TEST_CASE("gen-synthetic, ingest, and split compose") {
  testutil::TempDir dir;
  const auto corpus = dir.file("corpus.jsonl");
  auto gen = run_cli(dir, "gen-synthetic --out " + corpus + " --seed 5 --n-tasks 20");
  REQUIRE(gen.exit_code == 0);
  CHECK(summary(gen)["tasks"] == 20);

  auto ingest = run_cli(dir, "ingest --corpus " + corpus);
  REQUIRE(ingest.exit_code == 0);
  CHECK(summary(ingest)["tasks"] == 20);

  auto split = run_cli(dir, "split --corpus " + corpus + " --out " + dir.file("sp") + " --seed 1");
  REQUIRE(split.exit_code == 0);
  auto j = summary(split);
  CHECK(j["train"]["tasks"] == 16);
  CHECK(j["validation"]["tasks"] == 2);
  CHECK(j["test"]["tasks"] == 2);
  CHECK(testutil::read_file(dir.file("sp.train.jsonl")).size() > 0);
}

TEST_CASE("split and gen-synthetic are byte-deterministic per seed") {
  testutil::TempDir dir;
  const auto c1 = dir.file("c1.jsonl"), c2 = dir.file("c2.jsonl");
  REQUIRE(run_cli(dir, "gen-synthetic --out " + c1 + " --seed 9 --n-tasks 12").exit_code == 0);
  REQUIRE(run_cli(dir, "gen-synthetic --out " + c2 + " --seed 9 --n-tasks 12").exit_code == 0);
  CHECK(testutil::read_file(c1) == testutil::read_file(c2));

  REQUIRE(run_cli(dir, "split --corpus " + c1 + " --out " + dir.file("a") + " --seed 3").exit_code == 0);
  REQUIRE(run_cli(dir, "split --corpus " + c1 + " --out " + dir.file("b") + " --seed 3").exit_code == 0);
  for (const char* part : {".train.jsonl", ".val.jsonl", ".test.jsonl"})
    CHECK(testutil::read_file(dir.file("a") + part) == testutil::read_file(dir.file("b") + part));
}

TEST_CASE("order solves the documented problem file format") {
  testutil::TempDir dir;
  const auto problem = dir.file("problem.json");
  testutil::write_file(problem,
                       R"({"task_id":"chain","steps":["first","second","third"],)"
                       R"("probs":[[0,0.9,0.8],[0.1,0,0.9],[0.2,0.1,0]],"D":3})");
  const auto solution = dir.file("solution.json");
  auto r = run_cli(dir, "order --problem " + problem + " --out " + solution);
  REQUIRE(r.exit_code == 0);
  auto j = summary(r);
  CHECK(j["optimal"] == true);
  CHECK(j["decided"] == 3);

  auto sol = nlohmann::json::parse(testutil::read_file(solution));
  CHECK(sol["linearization"] == nlohmann::json::array({0, 1, 2}));
  // log 0.9 + log 0.9 + log 0.8
  const double expected = std::log(0.9) + std::log(0.9) + std::log(0.8);
  CHECK(sol["objective"].get<double>() == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("order does not mutate its input file") {
  testutil::TempDir dir;
  const auto problem = dir.file("problem.json");
  const std::string body =
      R"({"task_id":"t","steps":["a","b"],"probs":[[0,0.6],[0.4,0]],"D":1})";
  testutil::write_file(problem, body);
  REQUIRE(run_cli(dir, "order --problem " + problem + " --out " + dir.file("s.json")).exit_code ==
          0);
  CHECK(testutil::read_file(problem) == body);
}

TEST_CASE("train is byte-deterministic and eval reads its checkpoint back") {
  testutil::TempDir dir;
  const auto corpus = dir.file("corpus.jsonl");
  REQUIRE(run_cli(dir, "gen-synthetic --out " + corpus + " --seed 2 --n-tasks 24 "
                       "--min-steps 3 --max-steps 5").exit_code == 0);

  const std::string train_args = " --corpus " + corpus +
                                 " --dim 6 --hidden 8 --batch 8 --iters 20 --val-interval 10 "
                                 "--val-examples 16 --seed 4 --problem joint --mode bag";
  auto t1 = run_cli(dir, "train --checkpoint " + dir.file("m1.ckpt") + " --out " +
                             dir.file("m1.csv") + train_args);
  REQUIRE(t1.exit_code == 0);
  auto t2 = run_cli(dir, "train --checkpoint " + dir.file("m2.ckpt") + " --out " +
                             dir.file("m2.csv") + train_args);
  REQUIRE(t2.exit_code == 0);
  CHECK(testutil::read_file(dir.file("m1.ckpt")) == testutil::read_file(dir.file("m2.ckpt")));
  CHECK(testutil::read_file(dir.file("m1.csv")) == testutil::read_file(dir.file("m2.csv")));

  auto metrics = testutil::read_file(dir.file("m1.csv"));
  CHECK(metrics.rfind("iteration,train_loss,train_acc,val_loss,val_acc\n", 0) == 0);

  auto ev = run_cli(dir, "eval --corpus " + corpus + " --checkpoint " + dir.file("m1.ckpt") +
                             " --dim 6 --seed 4 --n-examples 50");
  REQUIRE(ev.exit_code == 0);
  auto j = summary(ev);
  CHECK(j["relevance_accuracy"].is_number());
  CHECK(j["ordering_accuracy"].is_number());
}

TEST_CASE("curve and export-embeddings write their documented formats") {
  testutil::TempDir dir;
  const auto corpus = dir.file("corpus.jsonl");
  REQUIRE(run_cli(dir, "gen-synthetic --out " + corpus + " --seed 6 --n-tasks 24 "
                       "--min-steps 3 --max-steps 4").exit_code == 0);
  const auto ckpt = dir.file("m.ckpt");
  REQUIRE(run_cli(dir, "train --corpus " + corpus + " --checkpoint " + ckpt +
                       " --dim 6 --hidden 8 --batch 8 --iters 10 --val-interval 5 "
                       "--val-examples 16 --seed 6").exit_code == 0);

  auto cv = run_cli(dir, "curve --corpus " + corpus + " --checkpoint " + ckpt +
                             " --dim 6 --seed 6 --out " + dir.file("curve.csv") +
                             " --fractions 0,0.25,0.5 --jobs 2");
  REQUIRE(cv.exit_code == 0);
  auto text = testutil::read_file(dir.file("curve.csv"));
  CHECK(text.rfind("fraction,ip_error,baseline_error\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);

  auto ex = run_cli(dir, "export-embeddings --corpus " + corpus + " --checkpoint " + ckpt +
                             " --dim 6 --seed 6 --n-tasks 5 --out " + dir.file("emb.tsv"));
  REQUIRE(ex.exit_code == 0);
  auto tsv = testutil::read_file(dir.file("emb.tsv"));
  CHECK(std::count(tsv.begin(), tsv.end(), '\n') == 6);
}

TEST_CASE("gradcheck subcommand reports a max relative error below 1e-4") {
  testutil::TempDir dir;
  auto r = run_cli(dir, "gradcheck --dim 4 --seed 1 --configs 5");
  REQUIRE(r.exit_code == 0);
  auto j = summary(r);
  CHECK(j["ok"] == true);
  CHECK(j["max_rel_error"].get<double>() < 1e-4);
}
