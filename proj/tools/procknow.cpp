#include <algorithm>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "procknow/procknow.hpp"

using nlohmann::ordered_json;

namespace {

using namespace procknow;

std::array<double, 3> parse_ratios(const std::string& s) {
  std::array<double, 3> out{};
  if (std::sscanf(s.c_str(), "%lf,%lf,%lf", &out[0], &out[1], &out[2]) != 3)
    throw Error("ratios must be three comma-separated fractions, e.g. 0.8,0.1,0.1");
  return out;
}

std::vector<double> parse_fractions(const std::string& s) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t next = s.find(',', pos);
    if (next == std::string::npos) next = s.size();
    out.push_back(std::stod(s.substr(pos, next - pos)));
    pos = next + 1;
  }
  if (out.empty()) throw Error("no fractions given");
  return out;
}

// Table for a run: pretrained vectors when a file is given, otherwise frozen
// random vectors over the corpus vocabulary (seeded, so train/eval agree).
EmbeddingTable make_table(const std::string& vectors_path, const Corpus& corpus, int dim,
                          std::uint64_t seed) {
  if (!vectors_path.empty()) return load_word_vectors(vectors_path, dim, seed);
  return random_table(corpus_vocabulary(corpus), dim, seed);
}

void emit(const ordered_json& j) { std::cout << j.dump() << std::endl; }

struct CommonOpts {
  std::string corpus, vectors, checkpoint, out;
  int dim = 500;
  int hidden = 128;
  double lr = 0.001;
  int batch = 64;
  std::int64_t iters = 5000;
  int val_interval = 100;
  int val_examples = 512;
  std::uint64_t seed = 0;
  std::string mode = "lstm";
  std::string problem = "joint";
  std::string ratios = "0.8,0.1,0.1";
  double eps = 1e-9;
  double time_limit = 5.0;
  std::string fractions = "0,0.1,0.2,0.3,0.4,0.5";
  int jobs = 1;
};

int cmd_gen_synthetic(const std::string& out, std::uint64_t seed, std::size_t n_tasks,
                      std::size_t min_steps, std::size_t max_steps) {
  Corpus corpus = gen_synthetic(seed, n_tasks, min_steps, max_steps);
  save_corpus_jsonl(corpus, out);
  emit({{"command", "gen-synthetic"},
        {"tasks", corpus.tasks.size()},
        {"steps", corpus.total_steps()},
        {"out", out}});
  return 0;
}

int cmd_ingest(const CommonOpts& o) {
  Corpus corpus = load_corpus(o.corpus);
  if (!o.out.empty()) save_corpus_jsonl(corpus, o.out);
  std::size_t tokens = 0;
  for (const auto& t : corpus.tasks) {
    tokens += t.title_tokens.size();
    for (const auto& s : t.steps) tokens += s.gist_tokens.size() + s.explanation_tokens.size();
  }
  ordered_json j = {{"command", "ingest"},
                    {"tasks", corpus.tasks.size()},
                    {"steps", corpus.total_steps()},
                    {"tokens", tokens}};
  if (!o.out.empty()) j["out"] = o.out;
  emit(j);
  return 0;
}

int cmd_split(const CommonOpts& o) {
  Corpus corpus = load_corpus(o.corpus);
  SplitCorpus split = split_corpus(corpus, parse_ratios(o.ratios), o.seed);
  const std::string train_path = o.out + ".train.jsonl";
  const std::string val_path = o.out + ".val.jsonl";
  const std::string test_path = o.out + ".test.jsonl";
  save_corpus_jsonl(split.train, train_path);
  save_corpus_jsonl(split.validation, val_path);
  save_corpus_jsonl(split.test, test_path);
  emit({{"command", "split"},
        {"train", {{"tasks", split.train.tasks.size()}, {"path", train_path}}},
        {"validation", {{"tasks", split.validation.tasks.size()}, {"path", val_path}}},
        {"test", {{"tasks", split.test.tasks.size()}, {"path", test_path}}}});
  return 0;
}

int cmd_train(const CommonOpts& o) {
  Corpus corpus = load_corpus(o.corpus);
  SplitCorpus split = split_corpus(corpus, parse_ratios(o.ratios), o.seed);
  EmbeddingTable table = make_table(o.vectors, corpus, o.dim, o.seed);

  TrainConfig config;
  config.dim = o.dim;
  config.hidden = o.hidden;
  config.lr = o.lr;
  config.batch = o.batch;
  config.max_iterations = o.iters;
  config.validation_interval = o.val_interval;
  config.n_val_examples = o.val_examples;
  config.mode = mode_from_name(o.mode);
  config.seed = o.seed;

  TrainResult result = train(config, split, problem_from_name(o.problem), std::move(table));
  save_checkpoint(result.model, o.checkpoint);
  if (!o.out.empty()) write_metrics_csv(result.series, o.out);

  ordered_json j = {{"command", "train"},
                    {"problem", o.problem},
                    {"mode", o.mode},
                    {"iterations", o.iters},
                    {"best_iteration", result.best_iteration},
                    {"best_val_accuracy", result.best_val_accuracy},
                    {"checkpoint", o.checkpoint}};
  if (!o.out.empty()) j["metrics"] = o.out;
  emit(j);
  return 0;
}

int cmd_eval(const CommonOpts& o, int n_examples) {
  Corpus corpus = load_corpus(o.corpus);
  SplitCorpus split = split_corpus(corpus, parse_ratios(o.ratios), o.seed);
  EmbeddingTable table = make_table(o.vectors, corpus, o.dim, o.seed);
  ModelParams model = load_checkpoint(o.checkpoint, std::move(table));

  auto rel = sample_relevance(split.test, static_cast<std::size_t>(n_examples),
                              Rng(o.seed).fork(0xE1).next_u64());
  auto ord = sample_ordering(split.test, static_cast<std::size_t>(n_examples),
                             Rng(o.seed).fork(0xE2).next_u64());
  emit({{"command", "eval"},
        {"mode", mode_name(model.mode)},
        {"n_examples", n_examples},
        {"relevance_accuracy", accuracy(model, rel)},
        {"ordering_accuracy", accuracy(model, ord)}});
  return 0;
}

int cmd_order(const std::string& problem_path, const std::string& out, double eps,
              double time_limit) {
  OrderInstance inst = load_problem_json(problem_path);
  const int t = static_cast<int>(inst.steps.size());
  OrderProblem problem{weights_from_probs(inst.probs, t, eps), inst.min_decided};
  OrderSolution solution = solve_exact(problem, time_limit);
  std::vector<int> extension = linearize(solution);
  save_solution_json(solution, extension, out);
  emit({{"command", "order"},
        {"task_id", inst.task_id},
        {"steps", t},
        {"objective", solution.objective},
        {"optimal", solution.optimal},
        {"decided", solution.decided_count},
        {"out", out}});
  return 0;
}

int cmd_curve(const CommonOpts& o, int max_task_steps) {
  Corpus corpus = load_corpus(o.corpus);
  EmbeddingTable table = make_table(o.vectors, corpus, o.dim, o.seed);
  ModelParams model = load_checkpoint(o.checkpoint, std::move(table));

  std::vector<Task> tasks;
  std::size_t skipped = 0;
  for (const auto& t : corpus.tasks) {
    const auto n = t.steps.size();
    if (n >= 2 && n <= static_cast<std::size_t>(max_task_steps)) tasks.push_back(t);
    else ++skipped;
  }
  if (tasks.empty()) throw Error("no tasks with a solvable step count in " + o.corpus);

  std::vector<double> requested = parse_fractions(o.fractions);
  std::vector<double> all = requested;
  if (std::find(all.begin(), all.end(), 0.0) == all.end()) all.insert(all.begin(), 0.0);

  auto curve = ip_error_curve(model, tasks, all, o.time_limit, o.eps, o.jobs);
  double e0 = 0.0;
  for (const auto& pt : curve)
    if (pt.ambiguity_fraction == 0.0) e0 = pt.error_rate;

  std::ofstream csv(o.out, std::ios::binary);
  if (!csv) throw Error("cannot open for writing: " + o.out);
  csv << "fraction,ip_error,baseline_error\n";
  ordered_json points = ordered_json::array();
  char buf[128];
  for (double a : requested) {
    double ip = 0.0;
    for (const auto& pt : curve)
      if (pt.ambiguity_fraction == a) ip = pt.error_rate;
    const double baseline = (1.0 - a) * e0;
    std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g\n", a, ip, baseline);
    csv << buf;
    points.push_back({{"fraction", a}, {"ip_error", ip}, {"baseline_error", baseline}});
  }
  emit({{"command", "curve"},
        {"tasks", tasks.size()},
        {"skipped_tasks", skipped},
        {"e0", e0},
        {"points", points},
        {"out", o.out}});
  return 0;
}

int cmd_export_embeddings(const CommonOpts& o, std::size_t n_tasks) {
  Corpus corpus = load_corpus(o.corpus);
  EmbeddingTable table = make_table(o.vectors, corpus, o.dim, o.seed);
  ModelParams model = load_checkpoint(o.checkpoint, std::move(table));

  std::vector<std::size_t> idx(corpus.tasks.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(Rng(o.seed).fork(0x58).next_u64());
  rng.shuffle(idx);
  idx.resize(std::min(n_tasks, idx.size()));
  std::sort(idx.begin(), idx.end());

  std::vector<Task> selected;
  for (std::size_t i : idx) selected.push_back(corpus.tasks[i]);
  export_embeddings(model, selected, o.out);
  emit({{"command", "export-embeddings"}, {"tasks", selected.size()}, {"out", o.out}});
  return 0;
}

int cmd_gradcheck(int dim, int seq, int configs, std::uint64_t seed) {
  GradCheckReport report = gradcheck_run(dim, seq, configs, seed);
  emit({{"command", "gradcheck"},
        {"configs", report.configs},
        {"max_rel_error", report.max_rel_error},
        {"ok", report.ok}});
  return report.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Task/step embedding learning and globally consistent step ordering"};
  app.require_subcommand(1);

  CommonOpts o;
  std::size_t n_tasks = 200, min_steps = 5, max_steps = 8;
  int n_examples = 2000;
  int max_task_steps = 15;
  std::size_t export_n = 50;
  int gc_dim = 8, gc_seq = 6, gc_configs = 10;

  auto add_common = [&o](CLI::App* cmd, bool with_model) {
    cmd->add_option("--seed", o.seed, "PRNG seed");
    if (with_model) {
      cmd->add_option("--vectors", o.vectors, "pretrained word-vector file");
      cmd->add_option("--dim", o.dim, "embedding dimensionality");
    }
  };

  auto* gen = app.add_subcommand("gen-synthetic", "generate a synthetic corpus");
  gen->add_option("--out", o.out)->required();
  gen->add_option("--seed", o.seed);
  gen->add_option("--n-tasks", n_tasks);
  gen->add_option("--min-steps", min_steps);
  gen->add_option("--max-steps", max_steps);

  auto* ingest = app.add_subcommand("ingest", "load and validate a corpus");
  ingest->add_option("--corpus", o.corpus)->required();
  ingest->add_option("--out", o.out, "write the flattened tasks here");

  auto* split = app.add_subcommand("split", "split a corpus into train/val/test files");
  split->add_option("--corpus", o.corpus)->required();
  split->add_option("--out", o.out, "output path prefix")->required();
  split->add_option("--ratios", o.ratios);
  add_common(split, false);

  auto* train = app.add_subcommand("train", "train the model");
  train->add_option("--corpus", o.corpus)->required();
  train->add_option("--checkpoint", o.checkpoint, "checkpoint output path")->required();
  train->add_option("--out", o.out, "metrics CSV output path");
  train->add_option("--hidden", o.hidden);
  train->add_option("--lr", o.lr);
  train->add_option("--batch", o.batch);
  train->add_option("--iters", o.iters);
  train->add_option("--val-interval", o.val_interval);
  train->add_option("--val-examples", o.val_examples);
  train->add_option("--mode", o.mode, "lstm|bag|none");
  train->add_option("--problem", o.problem, "relevance|ordering|joint");
  train->add_option("--ratios", o.ratios);
  add_common(train, true);

  auto* eval = app.add_subcommand("eval", "accuracy on the held-out test split");
  eval->add_option("--corpus", o.corpus)->required();
  eval->add_option("--checkpoint", o.checkpoint)->required();
  eval->add_option("--n-examples", n_examples);
  eval->add_option("--ratios", o.ratios);
  add_common(eval, true);

  auto* order = app.add_subcommand("order", "solve one ordering problem file");
  order->add_option("--problem", o.corpus, "problem JSON path")->required();
  order->add_option("--out", o.out)->required();
  order->add_option("--eps", o.eps);
  order->add_option("--time-limit", o.time_limit);

  auto* curve = app.add_subcommand("curve", "ambiguity-vs-error curve with random baseline");
  curve->add_option("--corpus", o.corpus)->required();
  curve->add_option("--checkpoint", o.checkpoint)->required();
  curve->add_option("--out", o.out)->required();
  curve->add_option("--fractions", o.fractions);
  curve->add_option("--eps", o.eps);
  curve->add_option("--time-limit", o.time_limit);
  curve->add_option("--jobs", o.jobs);
  curve->add_option("--max-task-steps", max_task_steps);
  add_common(curve, true);

  auto* exp = app.add_subcommand("export-embeddings", "TSV of task title embeddings");
  exp->add_option("--corpus", o.corpus)->required();
  exp->add_option("--checkpoint", o.checkpoint)->required();
  exp->add_option("--out", o.out)->required();
  exp->add_option("--n-tasks", export_n);
  add_common(exp, true);

  auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient verification");
  gc->add_option("--dim", gc_dim, "max embedding dim (capped at 8)");
  gc->add_option("--seq", gc_seq, "max sequence length");
  gc->add_option("--configs", gc_configs);
  gc->add_option("--seed", o.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen_synthetic(o.out, o.seed, n_tasks, min_steps, max_steps);
    if (ingest->parsed()) return cmd_ingest(o);
    if (split->parsed()) return cmd_split(o);
    if (train->parsed()) return cmd_train(o);
    if (eval->parsed()) return cmd_eval(o, n_examples);
    if (order->parsed()) return cmd_order(o.corpus, o.out, o.eps, o.time_limit);
    if (curve->parsed()) return cmd_curve(o, max_task_steps);
    if (exp->parsed()) return cmd_export_embeddings(o, export_n);
    if (gc->parsed()) return cmd_gradcheck(std::min(gc_dim, 8), gc_seq, gc_configs, o.seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
