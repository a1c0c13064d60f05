#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "procknow/error.hpp"

namespace procknow {

// T x T matrix of pairwise log-probabilities, w[i][j] = log Pr(i before j).
// Off-diagonal entries are finite and <= 0 (probabilities are clamped away
// from zero before the log); the diagonal is unused.
struct PairwiseWeights {
  int t = 0;
  std::vector<double> w;  // t*t row-major

  double at(int i, int j) const { return w[static_cast<std::size_t>(i) * t + j]; }
  double& at(int i, int j) { return w[static_cast<std::size_t>(i) * t + j]; }

  std::int64_t max_decidable() const { return static_cast<std::int64_t>(t) * (t - 1) / 2; }
};

inline PairwiseWeights weights_from_probs(const std::vector<double>& probs, int t, double eps) {
  if (t < 2) throw SolveError("need at least 2 steps");
  if (static_cast<std::size_t>(t) * t != probs.size())
    throw SolveError("probability matrix size does not match step count");
  if (!(eps > 0.0 && eps < 0.5)) throw SolveError("eps must lie in (0, 0.5)");
  PairwiseWeights out;
  out.t = t;
  out.w.assign(probs.size(), 0.0);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < t; ++j) {
      if (i == j) continue;
      const double p = probs[static_cast<std::size_t>(i) * t + j];
      if (!(p >= 0.0 && p <= 1.0))
        throw SolveError("probability outside [0,1] at (" + std::to_string(i) + "," +
                         std::to_string(j) + ")");
      out.at(i, j) = std::log(std::max(p, eps));
    }
  return out;
}

struct OrderProblem {
  PairwiseWeights weights;
  std::int64_t min_decided = 0;  // D: at least this many ordered pairs decided
};

// A strict partial order over the steps: x[i][j] = 1 means i strictly before
// j. The stored relation is transitively closed.
struct OrderSolution {
  int t = 0;
  std::vector<std::uint8_t> x;  // t*t row-major
  double objective = 0.0;
  bool optimal = false;
  std::int64_t decided_count = 0;

  bool before(int i, int j) const { return x[static_cast<std::size_t>(i) * t + j] != 0; }

  std::vector<std::pair<int, int>> decided_pairs() const {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < t; ++i)
      for (int j = 0; j < t; ++j)
        if (before(i, j)) out.emplace_back(i, j);
    return out;
  }
};

namespace detail {

inline std::vector<std::pair<int, int>> unordered_pairs(int t) {
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(t) * (t - 1) / 2);
  for (int i = 0; i < t; ++i)
    for (int j = i + 1; j < t; ++j) out.emplace_back(i, j);
  return out;
}

// Fixed summation order so both solvers produce bit-identical objectives for
// identical relations.
inline double canonical_objective(const PairwiseWeights& w,
                                  const std::vector<std::uint8_t>& rel) {
  double obj = 0.0;
  for (int i = 0; i < w.t; ++i)
    for (int j = i + 1; j < w.t; ++j) {
      if (rel[static_cast<std::size_t>(i) * w.t + j]) obj += w.at(i, j);
      else if (rel[static_cast<std::size_t>(j) * w.t + i]) obj += w.at(j, i);
    }
  return obj;
}

inline void validate_problem(const OrderProblem& problem) {
  const auto& w = problem.weights;
  if (w.t < 2) throw SolveError("need at least 2 steps");
  if (w.w.size() != static_cast<std::size_t>(w.t) * w.t)
    throw SolveError("weight matrix size does not match step count");
  for (int i = 0; i < w.t; ++i)
    for (int j = 0; j < w.t; ++j) {
      if (i == j) continue;
      const double v = w.at(i, j);
      if (!std::isfinite(v) || v > 0.0)
        throw SolveError("weights must be finite log-probabilities (<= 0)");
    }
  if (problem.min_decided < 0) throw SolveError("D must be non-negative");
  if (problem.min_decided > w.max_decidable())
    throw SolveError("D = " + std::to_string(problem.min_decided) +
                     " exceeds T(T-1)/2 = " + std::to_string(w.max_decidable()) +
                     "; the antisymmetry constraints would be unsatisfiable");
}

// Tie order on relations: fewer decided pairs first, then lexicographic over
// unordered pairs preferring undecided, then i->j, then j->i.
inline int pair_state(const std::vector<std::uint8_t>& rel, int t, int i, int j) {
  if (rel[static_cast<std::size_t>(i) * t + j]) return 1;
  if (rel[static_cast<std::size_t>(j) * t + i]) return 2;
  return 0;
}

inline bool tie_better(const std::vector<std::uint8_t>& a, std::int64_t count_a,
                       const std::vector<std::uint8_t>& b, std::int64_t count_b, int t) {
  if (count_a != count_b) return count_a < count_b;
  for (int i = 0; i < t; ++i)
    for (int j = i + 1; j < t; ++j) {
      const int sa = pair_state(a, t, i, j);
      const int sb = pair_state(b, t, i, j);
      if (sa != sb) return sa < sb;
    }
  return false;
}

}  // namespace detail

// Exhaustive oracle: every assignment of each unordered pair to {i<j, j<i,
// ambiguous}. Only for tiny instances (3^(T(T-1)/2) cases).
inline OrderSolution solve_bruteforce(const OrderProblem& problem) {
  detail::validate_problem(problem);
  const int t = problem.weights.t;
  if (t > 5) throw SolveError("brute-force oracle refuses T > 5");

  const auto pairs = detail::unordered_pairs(t);
  const std::size_t n_pairs = pairs.size();
  std::vector<int> state(n_pairs, 0);  // 0 undecided, 1 fwd, 2 bwd

  OrderSolution best;
  best.t = t;
  bool have_best = false;

  std::vector<std::uint8_t> rel(static_cast<std::size_t>(t) * t, 0);
  for (;;) {
    // Materialize the relation for this assignment.
    std::fill(rel.begin(), rel.end(), 0);
    std::int64_t decided = 0;
    for (std::size_t p = 0; p < n_pairs; ++p) {
      if (state[p] == 1) rel[static_cast<std::size_t>(pairs[p].first) * t + pairs[p].second] = 1;
      else if (state[p] == 2) rel[static_cast<std::size_t>(pairs[p].second) * t + pairs[p].first] = 1;
      if (state[p] != 0) ++decided;
    }
    bool feasible = decided >= problem.min_decided;
    for (int i = 0; feasible && i < t; ++i)
      for (int j = 0; feasible && j < t; ++j) {
        if (!rel[static_cast<std::size_t>(i) * t + j]) continue;
        for (int k = 0; k < t; ++k)
          if (rel[static_cast<std::size_t>(j) * t + k] &&
              !rel[static_cast<std::size_t>(i) * t + k]) {
            feasible = false;
            break;
          }
      }
    if (feasible) {
      const double obj = detail::canonical_objective(problem.weights, rel);
      bool take = !have_best;
      if (have_best) {
        if (obj > best.objective) take = true;
        else if (obj == best.objective &&
                 detail::tie_better(rel, decided, best.x, best.decided_count, t))
          take = true;
      }
      if (take) {
        best.x = rel;
        best.objective = obj;
        best.decided_count = decided;
        have_best = true;
      }
    }

    // Next base-3 assignment.
    std::size_t p = 0;
    while (p < n_pairs && state[p] == 2) state[p++] = 0;
    if (p == n_pairs) break;
    ++state[p];
  }
  best.optimal = true;
  return best;
}

namespace detail {

struct SearchState {
  std::vector<std::uint64_t> succ;   // succ[i] bit j set iff i before j
  std::vector<std::uint64_t> pred;   // transpose
  std::vector<std::uint64_t> ambig;  // bit per unordered-pair index
  double obj = 0.0;
  std::int64_t decided = 0;
};

inline bool has_edge(const SearchState& s, int i, int j) {
  return (s.succ[i] >> j) & 1ULL;
}

// Adds i->j and its transitive consequences. Returns false on conflict with
// antisymmetry or a pair already committed ambiguous.
inline bool add_edge_closure(SearchState& s, int i, int j, const PairwiseWeights& w,
                             const std::vector<int>& pair_index) {
  const int t = w.t;
  if (has_edge(s, i, j)) return true;
  if (has_edge(s, j, i)) return false;
  const std::uint64_t above = s.pred[i] | (1ULL << i);  // everything before i, plus i
  const std::uint64_t below = s.succ[j] | (1ULL << j);  // everything after j, plus j
  if (above & below) return false;  // would close a cycle
  for (int a = 0; a < t; ++a) {
    if (!((above >> a) & 1ULL)) continue;
    for (int b = 0; b < t; ++b) {
      if (!((below >> b) & 1ULL) || has_edge(s, a, b)) continue;
      if (has_edge(s, b, a)) return false;
      if ((s.ambig[pair_index[a * t + b] / 64] >> (pair_index[a * t + b] % 64)) & 1ULL)
        return false;
      s.succ[a] |= 1ULL << b;
      s.pred[b] |= 1ULL << a;
      s.obj += w.at(a, b);
      ++s.decided;
    }
  }
  return true;
}

struct Searcher {
  const PairwiseWeights& w;
  std::int64_t min_decided;
  std::vector<std::pair<int, int>> order;  // branch order over unordered pairs
  std::vector<int> pair_index;             // (i,j) -> index into `order`-independent pair ids
  std::chrono::steady_clock::time_point deadline;
  bool timed_out = false;
  std::uint32_t node_counter = 0;

  bool have_incumbent = false;
  double best_obj = 0.0;
  std::vector<std::uint8_t> best_rel;
  std::int64_t best_count = 0;

  explicit Searcher(const OrderProblem& problem, double time_limit_seconds)
      : w(problem.weights), min_decided(problem.min_decided) {
    const int t = w.t;
    order = unordered_pairs(t);
    pair_index.assign(static_cast<std::size_t>(t) * t, -1);
    for (std::size_t p = 0; p < order.size(); ++p) {
      pair_index[order[p].first * t + order[p].second] = static_cast<int>(p);
      pair_index[order[p].second * t + order[p].first] = static_cast<int>(p);
    }
    // Cheapest-to-decide pairs first: the optimum decides those, so a greedy
    // descent reaches the budget near-optimally and the expensive pairs left
    // behind keep the bound tight. Stable keeps lexicographic order on ties.
    std::stable_sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
      const double da = std::max(w.at(a.first, a.second), w.at(a.second, a.first));
      const double db = std::max(w.at(b.first, b.second), w.at(b.second, b.first));
      return da > db;
    });
    // Small margin keeps the returned wall time under the stated limit even
    // though the clock is only polled every few nodes.
    const double budget = std::max(time_limit_seconds - 0.02, time_limit_seconds * 0.5);
    deadline = std::chrono::steady_clock::now() +
               std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                   std::chrono::duration<double>(budget));
  }

  void offer(const SearchState& s) {
    std::vector<std::uint8_t> rel(static_cast<std::size_t>(w.t) * w.t, 0);
    for (int i = 0; i < w.t; ++i)
      for (int j = 0; j < w.t; ++j)
        if (i != j && has_edge(s, i, j)) rel[static_cast<std::size_t>(i) * w.t + j] = 1;
    const double obj = canonical_objective(w, rel);
    if (!have_incumbent || obj > best_obj) {
      have_incumbent = true;
      best_obj = obj;
      best_rel = std::move(rel);
      best_count = s.decided;
    }
  }

  bool check_time() {
    if ((++node_counter & 0x3F) == 0 && std::chrono::steady_clock::now() > deadline)
      timed_out = true;
    return timed_out;
  }

  bool remaining_pair(const SearchState& s, int a, int b) const {
    if (has_edge(s, a, b) || has_edge(s, b, a)) return false;
    const int idx = pair_index[a * w.t + b];
    return ((s.ambig[idx / 64] >> (idx % 64)) & 1ULL) == 0;
  }

  // Sum of forced regrets from edge-disjoint cyclic triangles whose pairs all
  // prefer directions forming a cycle; up to `free_abstentions` triangles can
  // be resolved for free, so the largest regrets are forgiven first.
  double triangle_correction(const SearchState& s, std::int64_t free_abstentions) {
    const int t = w.t;
    std::uint64_t used[64] = {};
    std::vector<double> regrets;
    auto pref = [&](int a, int b) { return w.at(a, b) >= w.at(b, a); };
    auto regret = [&](int a, int b) { return std::abs(w.at(a, b) - w.at(b, a)); };
    for (int i = 0; i < t; ++i)
      for (int j = i + 1; j < t; ++j) {
        if (((used[i] >> j) & 1ULL) || !remaining_pair(s, i, j)) continue;
        for (int l = j + 1; l < t; ++l) {
          if (((used[i] >> l) & 1ULL) || ((used[j] >> l) & 1ULL)) continue;
          if (!remaining_pair(s, i, l) || !remaining_pair(s, j, l)) continue;
          const bool cyc = (pref(i, j) && pref(j, l) && pref(l, i)) ||
                           (pref(j, i) && pref(l, j) && pref(i, l));
          if (!cyc) continue;
          regrets.push_back(std::min({regret(i, j), regret(j, l), regret(i, l)}));
          used[i] |= (1ULL << j) | (1ULL << l);
          used[j] |= 1ULL << l;
          break;  // pair (i,j) is consumed
        }
      }
    if (static_cast<std::int64_t>(regrets.size()) <= free_abstentions) return 0.0;
    std::sort(regrets.begin(), regrets.end(), std::greater<>());
    double sum = 0.0;
    for (std::size_t q = static_cast<std::size_t>(free_abstentions); q < regrets.size(); ++q)
      sum += regrets[q];
    return sum;
  }

  void dfs(const SearchState& s, std::size_t k) {
    if (check_time()) return;

    // Once the budget is met, leaving every remaining pair ambiguous is
    // feasible and dominates (weights are <= 0), so this state is the
    // subtree's optimum.
    if (s.decided >= min_decided) {
      offer(s);
      return;
    }

    // Skip pairs already decided through closure.
    while (k < order.size()) {
      const auto [i, j] = order[k];
      if (has_edge(s, i, j) || has_edge(s, j, i)) ++k;
      else break;
    }
    // All pairs committed yet the budget is unmet: infeasible leaf.
    if (k == order.size()) return;

    // Admissible bound, two stacked terms. First: every remaining pair may
    // abstain for free, except that `need` of them must take their best
    // decided value (charge the `need` smallest penalties). Second: among the
    // remaining pairs' preferred directions, each edge-disjoint cyclic
    // triangle forces a minimum regret unless one of its pairs abstains, and
    // at most (remaining - need) pairs can abstain in total.
    const std::int64_t need = min_decided - s.decided;
    double bound = s.obj;
    std::vector<double> penalties;
    std::int64_t remaining = 0;
    for (std::size_t p = k; p < order.size(); ++p) {
      const auto [i, j] = order[p];
      if (has_edge(s, i, j) || has_edge(s, j, i)) continue;
      ++remaining;
      const double best_decided = std::max(w.at(i, j), w.at(j, i));
      if (best_decided >= 0.0) bound += best_decided;
      else penalties.push_back(-best_decided);
    }
    if (need > remaining) return;  // cannot reach D
    if (static_cast<std::int64_t>(penalties.size()) > need)
      std::nth_element(penalties.begin(), penalties.begin() + (need - 1), penalties.end());
    const std::int64_t take = std::min<std::int64_t>(need, penalties.size());
    for (std::int64_t q = 0; q < take; ++q) bound -= penalties[q];
    if (have_incumbent && bound <= best_obj) return;

    // An edge-disjoint packing has at most remaining/3 triangles, so the
    // correction can only bind when abstentions are scarcer than that.
    if ((remaining - need) * 3 < remaining) {
      bound -= triangle_correction(s, remaining - need);
      if (have_incumbent && bound <= best_obj) return;
    }

    const auto [i, j] = order[k];
    const int idx = pair_index[i * w.t + j];

    // Stronger direction first, then the reverse, then ambiguous: the greedy
    // descent reaches the decided budget immediately and becomes the first
    // incumbent.
    const bool forward_first = w.at(i, j) >= w.at(j, i);
    for (int branch = 0; branch < 2; ++branch) {
      const bool forward = (branch == 0) == forward_first;
      SearchState child = s;
      if (add_edge_closure(child, forward ? i : j, forward ? j : i, w, pair_index))
        dfs(child, k + 1);
      if (timed_out) return;
    }
    {
      SearchState child = s;
      child.ambig[idx / 64] |= 1ULL << (idx % 64);
      dfs(child, k + 1);
      if (timed_out) return;
    }
  }
};

}  // namespace detail

namespace detail {

// Deterministic greedy total order: win-score ranking refined by strict-gain
// reinsertion passes. Feasible for any D and a strong starting incumbent.
inline std::vector<int> greedy_total_order(const PairwiseWeights& w) {
  const int t = w.t;
  std::vector<int> order(t);
  for (int i = 0; i < t; ++i) order[i] = i;
  std::vector<double> score(t, 0.0);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < t; ++j)
      if (i != j) score[i] += w.at(i, j) - w.at(j, i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return score[a] > score[b]; });

  auto objective = [&](const std::vector<int>& ord) {
    double obj = 0.0;
    for (int a = 0; a < t; ++a)
      for (int b = a + 1; b < t; ++b) obj += w.at(ord[a], ord[b]);
    return obj;
  };
  double best = objective(order);
  for (int pass = 0; pass < 3; ++pass) {
    bool improved = false;
    for (int from = 0; from < t; ++from) {
      for (int to = 0; to < t; ++to) {
        if (to == from) continue;
        std::vector<int> cand = order;
        const int item = cand[from];
        cand.erase(cand.begin() + from);
        cand.insert(cand.begin() + to, item);
        const double obj = objective(cand);
        if (obj > best) {
          best = obj;
          order = std::move(cand);
          improved = true;
        }
      }
    }
    if (!improved) break;
  }
  return order;
}

}  // namespace detail

// Branch and bound over unordered pairs with three branches per pair and
// transitive-closure propagation. Returns a provably optimal solution, or the
// best incumbent with optimal=false when the time limit fires.
inline OrderSolution solve_exact(const OrderProblem& problem, double time_limit_seconds = 5.0) {
  detail::validate_problem(problem);
  const int t = problem.weights.t;
  if (t > 63) throw SolveError("solver supports at most 63 steps");

  detail::Searcher searcher(problem, time_limit_seconds);

  // Start from a guaranteed-feasible incumbent: the empty relation when D is
  // zero, otherwise a greedy total order.
  {
    detail::SearchState init;
    init.succ.assign(t, 0);
    init.pred.assign(t, 0);
    init.ambig.assign((searcher.order.size() + 63) / 64, 0);
    if (problem.min_decided == 0) {
      searcher.offer(init);
    } else {
      const std::vector<int> greedy = detail::greedy_total_order(problem.weights);
      detail::SearchState total = init;
      for (int a = 0; a < t; ++a)
        for (int b = a + 1; b < t; ++b)
          add_edge_closure(total, greedy[a], greedy[b], problem.weights, searcher.pair_index);
      searcher.offer(total);
    }
    searcher.dfs(init, 0);
  }

  OrderSolution out;
  out.t = t;
  out.x = std::move(searcher.best_rel);
  out.objective = searcher.best_obj;
  out.decided_count = searcher.best_count;
  out.optimal = !searcher.timed_out;
  return out;
}

// Topological sort of the decided relation; ties broken by original step
// index (Kahn with minimum-index selection).
inline std::vector<int> linearize(const OrderSolution& solution) {
  const int t = solution.t;
  std::vector<int> indegree(t, 0);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < t; ++j)
      if (solution.before(i, j)) ++indegree[j];

  std::vector<int> out;
  std::vector<bool> placed(t, false);
  out.reserve(t);
  for (int round = 0; round < t; ++round) {
    int pick = -1;
    for (int i = 0; i < t; ++i)
      if (!placed[i] && indegree[i] == 0) {
        pick = i;
        break;
      }
    if (pick < 0) throw Error("cycle in order solution; invariant violated");
    placed[pick] = true;
    out.push_back(pick);
    for (int j = 0; j < t; ++j)
      if (solution.before(pick, j)) --indegree[j];
  }
  return out;
}

// --- Problem/solution files ---------------------------------------------------

struct OrderInstance {
  std::string task_id;
  std::vector<std::string> steps;
  std::vector<double> probs;  // t*t
  std::int64_t min_decided = 0;
};

inline OrderInstance load_problem_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open problem file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("problem file: ") + e.what());
  }
  if (!j.contains("steps") || !j["steps"].is_array() || !j.contains("probs") ||
      !j["probs"].is_array() || !j.contains("D"))
    throw ParseError("problem file must have steps, probs, and D");
  OrderInstance inst;
  inst.task_id = j.value("task_id", "");
  for (const auto& s : j["steps"]) inst.steps.push_back(s.get<std::string>());
  const int t = static_cast<int>(inst.steps.size());
  if (static_cast<int>(j["probs"].size()) != t) throw ParseError("probs must be a TxT matrix");
  for (const auto& row : j["probs"]) {
    if (!row.is_array() || static_cast<int>(row.size()) != t)
      throw ParseError("probs must be a TxT matrix");
    for (const auto& v : row) inst.probs.push_back(v.get<double>());
  }
  inst.min_decided = j["D"].get<std::int64_t>();
  return inst;
}

inline void save_solution_json(const OrderSolution& solution, const std::vector<int>& linearization,
                               const std::string& path) {
  nlohmann::ordered_json j;
  auto pairs = nlohmann::ordered_json::array();
  for (const auto& [i, k] : solution.decided_pairs()) pairs.push_back({i, k});
  j["pairs"] = pairs;
  j["objective"] = solution.objective;
  j["optimal"] = solution.optimal;
  j["linearization"] = linearization;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out << j.dump() << '\n';
}

}  // namespace procknow
