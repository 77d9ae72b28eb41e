#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <stop_token>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "safactor/annealer.hpp"
#include "safactor/biguint.hpp"
#include "safactor/energy.hpp"
#include "safactor/number_theory.hpp"

namespace safactor {

// Closed interval of digit counts or popcounts.
struct Range {
  std::size_t lo = 0;
  std::size_t hi = 0;
  bool contains(std::size_t v) const noexcept { return lo <= v && v <= hi; }
  friend bool operator==(const Range&, const Range&) = default;
};

// Restricts the outer search, e.g. to the cell consistent with known factors.
struct SearchHint {
  std::optional<Range> a;
  std::optional<Range> b;
  std::optional<Range> a_ones;
  std::optional<Range> b_ones;

  bool admits(const SearchTask& t) const noexcept {
    return (!a || a->contains(t.a)) && (!b || b->contains(t.b)) &&
           (!a_ones || a_ones->contains(t.a_ones)) && (!b_ones || b_ones->contains(t.b_ones));
  }

  // "a=29,b=29,a1=15,b1=14"; each value may also be a range "lo-hi".
  static SearchHint parse(std::string_view text) {
    SearchHint hint;
    auto number = [&](std::string_view s) -> std::size_t {
      if (s.empty() || s.find_first_not_of("0123456789") != std::string_view::npos) {
        throw std::invalid_argument("bad hint value '" + std::string(s) + "'");
      }
      return static_cast<std::size_t>(std::stoull(std::string(s)));
    };
    while (!text.empty()) {
      const std::size_t comma = text.find(',');
      const std::string_view item = text.substr(0, comma);
      text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
      const std::size_t eq = item.find('=');
      if (eq == std::string_view::npos) throw std::invalid_argument("bad hint item '" + std::string(item) + "'");
      const std::string_view key = item.substr(0, eq);
      const std::string_view val = item.substr(eq + 1);
      const std::size_t dash = val.find('-');
      Range r;
      if (dash == std::string_view::npos) {
        r.lo = r.hi = number(val);
      } else {
        r.lo = number(val.substr(0, dash));
        r.hi = number(val.substr(dash + 1));
      }
      if (r.lo == 0 || r.lo > r.hi) throw std::invalid_argument("bad hint range for '" + std::string(key) + "'");
      if (key == "a") {
        hint.a = r;
      } else if (key == "b") {
        hint.b = r;
      } else if (key == "a1") {
        hint.a_ones = r;
      } else if (key == "b1") {
        hint.b_ones = r;
      } else {
        throw std::invalid_argument("unknown hint key '" + std::string(key) + "'");
      }
    }
    return hint;
  }
};

enum class TaskOrder {
  heuristic,      // balanced digit splits first, balanced popcounts last
  lexicographic,  // plain a, b, a1, b1 loop nest
};

enum class Schedule {
  interleaved,  // every task advances one temperature level per round
  sequential,   // each task runs its whole schedule before the next starts
};

struct SearchPolicy {
  bool semiprime_mode = false;
  std::optional<SearchHint> hint;
  std::size_t worker_count = 1;
  TaskOrder order = TaskOrder::heuristic;
  Schedule schedule = Schedule::interleaved;
  std::uint64_t master_seed = 0;
  // Smallest factor length once primes up to 1000 are divided out (1009 has 10 digits).
  std::size_t min_factor_bits = 10;
  std::optional<double> deadline_seconds;
};

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::size_t index, std::size_t depth) noexcept {
  return mix64(mix64(mix64(master) ^ static_cast<std::uint64_t>(index)) ^ (static_cast<std::uint64_t>(depth) << 32));
}

// All legal (a, b, a1, b1) cells for an n-digit target, ordered and seeded.
inline std::vector<SearchTask> enumerate_tasks(std::size_t n, const SearchPolicy& policy, std::size_t depth = 0) {
  const bool hinted_lengths = policy.hint && (policy.hint->a || policy.hint->b);
  const std::size_t floor_bits = hinted_lengths ? 1 : std::max<std::size_t>(1, policy.min_factor_bits);
  std::vector<SearchTask> tasks;
  for (std::size_t a = floor_bits; a + floor_bits <= n + 1; ++a) {
    for (const std::size_t b : {n - a, n - a + 1}) {
      if (b < floor_bits || b > a) continue;
      for (std::size_t a1 = 1; a1 <= a; ++a1) {
        for (std::size_t b1 = 1; b1 <= b; ++b1) {
          SearchTask t{a, b, a1, b1, 0, 0};
          if (policy.hint && !policy.hint->admits(t)) continue;
          tasks.push_back(t);
        }
      }
    }
  }
  if (policy.order == TaskOrder::heuristic) {
    // Doubled distance of each popcount from half its length.
    auto imbalance = [](const SearchTask& t) {
      auto off = [](std::size_t ones, std::size_t len) {
        const auto d = static_cast<long long>(2 * ones) - static_cast<long long>(len);
        return d < 0 ? -d : d;
      };
      return off(t.a_ones, t.a) + off(t.b_ones, t.b);
    };
    std::stable_sort(tasks.begin(), tasks.end(), [&](const SearchTask& x, const SearchTask& y) {
      const std::size_t dx = x.a - x.b;
      const std::size_t dy = y.a - y.b;
      if (dx != dy) return dx < dy;
      return imbalance(x) > imbalance(y);
    });
  }
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    tasks[i].index = i;
    tasks[i].seed = derive_seed(policy.master_seed, i, depth);
  }
  return tasks;
}

// Upper bound on work: n^4 outer cells times N_a steps times M * n proposals.
inline BigUint scaling_estimate(std::uint64_t n, std::uint64_t steps, std::uint64_t configs_scale) {
  if (n < 2) throw std::domain_error("scaling_estimate requires n >= 2");
  const BigUint bn{n};
  return bn * bn * bn * bn * bn * BigUint{steps} * BigUint{configs_scale};
}

// A successful annealing split of `value` into a * b.
struct SplitRecord {
  BigUint value;
  BigUint a;
  BigUint b;
  SearchTask task;
  std::uint64_t steps_used = 0;
  std::uint64_t winner_configurations = 0;
  std::size_t depth = 0;
};

struct FactorOnceResult {
  std::optional<SplitRecord> split;
  std::size_t task_count = 0;
  std::uint64_t configurations_tried = 0;  // over all tasks
  double wall_seconds = 0;
  bool timed_out = false;
};

using Clock = std::chrono::steady_clock;

namespace detail {

inline std::optional<Clock::time_point> deadline_from(const SearchPolicy& policy, Clock::time_point start) {
  if (!policy.deadline_seconds) return std::nullopt;
  return start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(*policy.deadline_seconds));
}

inline SplitRecord make_split(const BigUint& value, const AnnealOutcome& out, std::size_t depth) {
  const auto& [x, y] = *out.factors;
  SplitRecord r{value, x, y, out.task, out.steps_used, out.counters.tried, depth};
  if (r.a < r.b) std::swap(r.a, r.b);
  return r;
}

// Runs `body(i)` for i in [0, count) on `workers` threads.
template <class Body>
void parallel_for(std::size_t count, std::size_t workers, Body&& body) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  const std::size_t n = std::min(workers, count);
  pool.reserve(n);
  for (std::size_t w = 0; w < n; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
    });
  }
}

// Requests stop on `source` once the deadline passes.
class DeadlineWatch {
 public:
  DeadlineWatch(std::stop_source& source, std::optional<Clock::time_point> deadline) {
    if (!deadline) return;
    thread_ = std::jthread([&source, at = *deadline](std::stop_token quit) {
      std::mutex m;
      std::condition_variable_any cv;
      std::unique_lock lock(m);
      cv.wait_until(lock, quit, at, [] { return false; });
      if (!quit.stop_requested()) source.request_stop();
    });
  }

 private:
  std::jthread thread_;
};

inline bool past(std::optional<Clock::time_point> deadline) { return deadline && Clock::now() >= *deadline; }

// Every live task advances one temperature level per round. The lowest task
// index that finds factors in a round wins, so the result does not depend on
// the worker count. Annealers are built on first use.
template <class Anneal>
FactorOnceResult factor_interleaved(const BigUint& value, const std::vector<SearchTask>& tasks,
                                           const SearchPolicy& policy, const AnnealParams& params,
                                           std::size_t depth, std::optional<Clock::time_point> deadline) {
  FactorOnceResult result;
  result.task_count = tasks.size();
  const EnergyModel model(value, params.cost);
  std::vector<std::optional<Anneal>> annealers(tasks.size());
  std::optional<std::size_t> winner;
  std::stop_source stop;
  const DeadlineWatch watch(stop, deadline);
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < tasks.size(); ++i) live.push_back(i);

  while (!winner && !live.empty() && !stop.stop_requested()) {
    std::atomic<std::size_t> best{tasks.size()};
    detail::parallel_for(live.size(), policy.worker_count, [&](std::size_t k) {
      const std::size_t i = live[k];
      if (i > best.load(std::memory_order_relaxed) || stop.stop_requested()) return;
      auto& an = annealers[i];
      if (!an) {
        an.emplace(model, tasks[i], params, stop.get_token());
      } else {
        an->step(stop.get_token());
      }
      if (an->status() == AnnealStatus::found) {
        std::size_t cur = best.load();
        while (i < cur && !best.compare_exchange_weak(cur, i)) {
        }
      }
    });
    if (best.load() < tasks.size()) winner = best.load();
    std::erase_if(live, [&](std::size_t i) {
      return annealers[i] && annealers[i]->status() != AnnealStatus::running;
    });
  }
  result.timed_out = !winner && stop.stop_requested();

  for (const auto& an : annealers) {
    if (an) result.configurations_tried += an->state().counters.tried;
  }
  if (winner) result.split = make_split(value, annealers[*winner]->outcome(), depth);
  return result;
}

// Each task runs its whole schedule; with several workers the first task to
// finish with factors wins.
template <class Anneal>
FactorOnceResult factor_sequential(const BigUint& value, const std::vector<SearchTask>& tasks,
                                          const SearchPolicy& policy, const AnnealParams& params,
                                          std::size_t depth, std::optional<Clock::time_point> deadline) {
  FactorOnceResult result;
  result.task_count = tasks.size();
  const EnergyModel model(value, params.cost);
  std::stop_source stop;
  const DeadlineWatch watch(stop, deadline);
  std::mutex mu;
  std::optional<AnnealOutcome> win;
  std::atomic<std::uint64_t> tried{0};

  detail::parallel_for(tasks.size(), policy.worker_count, [&](std::size_t i) {
    if (stop.stop_requested()) return;
    Anneal an(model, tasks[i], params, stop.get_token());
    an.run(stop.get_token());
    tried += an.state().counters.tried;
    if (an.status() == AnnealStatus::found) {
      const std::scoped_lock lock(mu);
      if (!win) win = an.outcome();
      stop.request_stop();
    }
  });

  result.configurations_tried = tried.load();
  result.timed_out = !win && past(deadline);
  if (win) result.split = make_split(value, *win, depth);
  return result;
}

}  // namespace detail

// Searches for one split N = A * B. Failure is reported as an empty split.
inline FactorOnceResult factor_once(const BigUint& value, const SearchPolicy& policy, const AnnealParams& params,
                                    std::size_t depth = 0, std::optional<Clock::time_point> deadline = std::nullopt) {
  params.validate();
  const auto start = Clock::now();
  if (!deadline) deadline = detail::deadline_from(policy, start);
  const auto tasks = enumerate_tasks(value.bit_length(), policy, depth);
  FactorOnceResult result;
  if (!tasks.empty()) {
    using Wide = Annealer<std::mt19937_64, FactorConfig>;
    using Narrow = Annealer<std::mt19937_64, WordConfig>;
    // a + b <= n + 1, so every product fits a word when n < 64.
    const bool narrow = value.bit_length() < WordConfig::max_len;
    if (policy.schedule == Schedule::interleaved) {
      result = narrow ? detail::factor_interleaved<Narrow>(value, tasks, policy, params, depth, deadline)
                      : detail::factor_interleaved<Wide>(value, tasks, policy, params, depth, deadline);
    } else {
      result = narrow ? detail::factor_sequential<Narrow>(value, tasks, policy, params, depth, deadline)
                      : detail::factor_sequential<Wide>(value, tasks, policy, params, depth, deadline);
    }
  }
  result.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return result;
}

enum class LeafKind {
  prime,
  failed,   // the annealer could not split this composite
  unsplit,  // composite left alone in semiprime mode
};

inline std::string_view to_string(LeafKind k) {
  switch (k) {
    case LeafKind::prime: return "prime";
    case LeafKind::failed: return "failed";
    case LeafKind::unsplit: return "unsplit";
  }
  return "?";
}

// Recursive record of splits. Internal nodes equal the product of their children.
struct FactorTree {
  BigUint value;
  std::vector<FactorTree> children;
  LeafKind kind = LeafKind::prime;  // meaningful for leaves only

  bool is_leaf() const noexcept { return children.empty(); }

  template <class Visit>
  void for_each_leaf(Visit&& visit) const {
    if (is_leaf()) {
      visit(*this);
      return;
    }
    for (const auto& c : children) c.for_each_leaf(visit);
  }

  std::vector<BigUint> leaves(LeafKind want) const {
    std::vector<BigUint> out;
    for_each_leaf([&](const FactorTree& leaf) {
      if (leaf.kind == want) out.push_back(leaf.value);
    });
    std::sort(out.begin(), out.end());
    return out;
  }

  bool complete() const {
    bool ok = true;
    for_each_leaf([&](const FactorTree& leaf) { ok = ok && leaf.kind == LeafKind::prime; });
    return ok;
  }
};

struct Factorization {
  FactorTree tree;
  std::vector<SplitRecord> splits;  // in the order they were found
  std::uint64_t configurations_tried = 0;
  double wall_seconds = 0;
  bool timed_out = false;
};

namespace detail {

inline FactorTree leaf(BigUint v, LeafKind k) { return FactorTree{std::move(v), {}, k}; }

// Splits a composite with no prime factor <= 1000.
inline FactorTree split_composite(const BigUint& value, const SearchPolicy& policy, const AnnealParams& params,
                                  std::size_t depth, std::optional<Clock::time_point> deadline, Factorization& acc);

inline FactorTree build_tree(const BigUint& value, const SearchPolicy& policy, const AnnealParams& params,
                             std::size_t depth, std::optional<Clock::time_point> deadline, Factorization& acc) {
  if (is_prime(value)) return leaf(value, LeafKind::prime);
  const TrialDivisionResult td = trial_divide(value);
  if (td.small_factors.empty()) return split_composite(value, policy, params, depth, deadline, acc);
  FactorTree node{value, {}, LeafKind::prime};
  for (const std::uint32_t p : td.small_factors) node.children.push_back(leaf(BigUint{p}, LeafKind::prime));
  if (td.remainder != BigUint{1}) {
    node.children.push_back(build_tree(td.remainder, policy, params, depth, deadline, acc));
  }
  return node;
}

inline FactorTree split_composite(const BigUint& value, const SearchPolicy& policy, const AnnealParams& params,
                                  std::size_t depth, std::optional<Clock::time_point> deadline, Factorization& acc) {
  const FactorOnceResult once = factor_once(value, policy, params, depth, deadline);
  acc.configurations_tried += once.configurations_tried;
  acc.timed_out = acc.timed_out || once.timed_out;
  if (!once.split) return leaf(value, LeafKind::failed);
  const SplitRecord split = *once.split;
  acc.splits.push_back(split);
  FactorTree node{value, {}, LeafKind::prime};
  for (const BigUint& part : {split.a, split.b}) {
    if (policy.semiprime_mode) {
      node.children.push_back(leaf(part, is_prime(part) ? LeafKind::prime : LeafKind::unsplit));
    } else {
      node.children.push_back(build_tree(part, policy, params, depth + 1, deadline, acc));
    }
  }
  return node;
}

}  // namespace detail

// Complete factorization: trial division, primality, then recursive
// annealing splits. Failures stay in the tree as marked leaves.
inline Factorization factorize(const BigUint& value, const SearchPolicy& policy, const AnnealParams& params) {
  if (value < BigUint{2}) throw std::domain_error("factorize requires N >= 2");
  params.validate();
  if (policy.worker_count < 1) throw std::invalid_argument("worker count must be >= 1");
  const auto start = Clock::now();
  Factorization out;
  out.tree = detail::build_tree(value, policy, params, 0, detail::deadline_from(policy, start), out);
  out.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

}  // namespace safactor
