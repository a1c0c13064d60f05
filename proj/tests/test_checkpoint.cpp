#include <doctest.h>

#include <filesystem>

#include "procknow/checkpoint.hpp"
#include "test_util.hpp"

using namespace procknow;

namespace {

EmbeddingTable demo_table(int dim) {
  return random_table({"a", "b", "c", "d", "e"}, dim, 77);
}

}  // namespace

TEST_CASE("checkpoint round-trip is bitwise lossless") {
  testutil::TempDir dir;
  ModelParams m = init_model(6, 5, ExplanationMode::kLstm, demo_table(6), 42);
  // Scribble on the trainables so the file is not just the init pattern.
  ParamView view = trainable_view(m);
  Rng rng(9);
  for (auto& c : view.chunks)
    for (double& x : c) x = rng.uniform(-2.0, 2.0);

  auto path = dir.file("model.ckpt");
  save_checkpoint(m, path);
  ModelParams back = load_checkpoint(path, demo_table(6));

  ParamView a = trainable_view(m), b = trainable_view(back);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.flat(i) == b.flat(i));
  CHECK(back.mode == m.mode);
  CHECK(back.hidden == m.hidden);
}

TEST_CASE("all modes round-trip") {
  testutil::TempDir dir;
  for (auto mode : {ExplanationMode::kLstm, ExplanationMode::kBag, ExplanationMode::kNone}) {
    ModelParams m = init_model(3, 4, mode, demo_table(3), 1);
    auto path = dir.file("m.ckpt");
    save_checkpoint(m, path);
    ModelParams back = load_checkpoint(path, demo_table(3));
    CHECK(back.mode == mode);
    CHECK(back.expl_enc.has_value() == (mode == ExplanationMode::kLstm));
  }
}

TEST_CASE("truncated checkpoints are rejected whole") {
  testutil::TempDir dir;
  ModelParams m = init_model(4, 3, ExplanationMode::kBag, demo_table(4), 7);
  auto path = dir.file("model.ckpt");
  save_checkpoint(m, path);
  auto bytes = testutil::read_file(path);
  testutil::write_file(path, bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(load_checkpoint(path, demo_table(4)), CheckpointError);
}

TEST_CASE("dim mismatch is an explicit error") {
  testutil::TempDir dir;
  ModelParams m = init_model(6, 3, ExplanationMode::kLstm, demo_table(6), 7);
  auto path = dir.file("model.ckpt");
  save_checkpoint(m, path);
  try {
    load_checkpoint(path, demo_table(4));
    FAIL("expected CheckpointError");
  } catch (const CheckpointError& e) {
    CHECK(std::string(e.what()).find("dim") != std::string::npos);
  }
}

TEST_CASE("vocabulary mismatch is detected by the fingerprint") {
  testutil::TempDir dir;
  ModelParams m = init_model(4, 3, ExplanationMode::kLstm, demo_table(4), 7);
  auto path = dir.file("model.ckpt");
  save_checkpoint(m, path);
  EmbeddingTable other = random_table({"x", "y", "z"}, 4, 5);
  CHECK_THROWS_AS(load_checkpoint(path, std::move(other)), CheckpointError);
}

TEST_CASE("garbage magic is rejected") {
  testutil::TempDir dir;
  auto path = dir.file("model.ckpt");
  testutil::write_file(path, "definitely not a checkpoint");
  CHECK_THROWS_AS(load_checkpoint(path, demo_table(4)), CheckpointError);
}
