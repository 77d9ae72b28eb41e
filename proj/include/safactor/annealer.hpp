#pragma once

#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <stop_token>
#include <string>
#include <type_traits>
#include <utility>

#include "safactor/biguint.hpp"
#include "safactor/energy.hpp"
#include "safactor/moves.hpp"

namespace safactor {

// One cell of the outer search: digit counts and popcounts of both factors.
// `a` is the larger factor's digit count (a >= b).
struct SearchTask {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t a_ones = 0;
  std::size_t b_ones = 0;
  std::uint64_t seed = 0;
  std::size_t index = 0;

  friend bool operator==(const SearchTask&, const SearchTask&) = default;
};

struct AnnealParams {
  double cooling_factor = 0.997;
  std::optional<double> initial_temperature;  // defaults to cooling_factor
  std::optional<Energy> boltzmann_k;          // defaults to max_energy(n, cost)
  std::uint64_t max_steps = 10000;
  std::uint64_t configs_scale = 50000;  // per-step budget is configs_scale * max(a, b)
  CostFunction cost = kQuadraticCost;
  std::optional<double> bad_move_fraction;
  std::optional<std::uint64_t> revert_patience;
  bool enforce_product_popcount = true;
  // Literal rule: accept downhill moves when r < exp(-(E' - E)/kT),
  // which accepts every downhill move.
  bool literal_metropolis = false;
  // For odd targets, pin digit 1 of both factors to 1.
  bool freeze_odd_digit = false;
  std::array<double, 4> move_weights{1.0, 1.0, 1.0, 1.0};

  void validate() const {
    if (!(cooling_factor > 0.0 && cooling_factor < 1.0)) {
      throw std::invalid_argument("cooling factor must lie in (0, 1)");
    }
    if (initial_temperature && !(*initial_temperature > 0.0)) {
      throw std::invalid_argument("initial temperature must be positive");
    }
    if (boltzmann_k && *boltzmann_k < 1) throw std::invalid_argument("k must be >= 1");
    if (max_steps < 1) throw std::invalid_argument("annealing steps must be >= 1");
    if (configs_scale < 1) throw std::invalid_argument("M must be >= 1");
    if (bad_move_fraction && !(*bad_move_fraction > 0.0 && *bad_move_fraction <= 1.0)) {
      throw std::invalid_argument("bad-move fraction must lie in (0, 1]");
    }
    if (revert_patience && *revert_patience < 1) {
      throw std::invalid_argument("revert patience must be >= 1");
    }
    MoveMix{move_weights};
  }

  double start_temperature() const { return initial_temperature.value_or(cooling_factor); }
  Energy k_for(std::size_t digits) const { return boltzmann_k.value_or(max_energy(digits, cost)); }
  std::uint64_t budget_for(const SearchTask& task) const {
    const std::uint64_t width = std::max(task.a, task.b);
    if (width != 0 && configs_scale > std::numeric_limits<std::uint64_t>::max() / width) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    return configs_scale * width;
  }
};

// Probability of accepting a move from energy `current` to `proposed`.
inline double metropolis_probability(Energy current, Energy proposed, double temperature, Energy k,
                                     bool literal = false) {
  if (proposed >= current) return 1.0;
  const double drop = static_cast<double>(current - proposed);
  const double exponent = drop / (static_cast<double>(k) * temperature);
  if (literal) return std::min(1.0, std::exp(exponent));
  return std::exp(-exponent);
}

template <class Rng>
bool metropolis_accept(Energy current, Energy proposed, double temperature, Energy k, Rng& rng,
                       bool literal = false) {
  if (proposed >= current) return true;
  const double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return r < metropolis_probability(current, proposed, temperature, k, literal);
}

// A downhill move may drop the energy by at most fraction * current.
inline bool bad_move_allowed(Energy current, Energy proposed, double fraction) {
  if (proposed >= current) return true;
  return static_cast<double>(current - proposed) <= fraction * static_cast<double>(current);
}

struct AnnealCounters {
  std::uint64_t tried = 0;
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t filtered = 0;  // discarded by the product-popcount filter
  std::uint64_t reverted = 0;
};

template <class Config = FactorConfig>
struct BasicCheckpoint {
  Config a;
  Config b;
  Energy energy;
  std::uint64_t remaining;  // proposals left before reverting
};

template <class Config = FactorConfig>
struct BasicAnnealState {
  Config a;
  Config b;
  Energy energy = 0;
  double temperature = 0;
  std::uint64_t step = 0;  // completed temperature levels
  std::optional<BasicCheckpoint<Config>> checkpoint;
  AnnealCounters counters;
  // False only before the first configuration passing the popcount filter
  // has been installed.
  bool satisfies_filter = true;
};

using Checkpoint = BasicCheckpoint<>;
using AnnealState = BasicAnnealState<>;

enum class AnnealStatus { running, found, exhausted, cancelled };

inline std::string_view to_string(AnnealStatus s) {
  switch (s) {
    case AnnealStatus::running: return "running";
    case AnnealStatus::found: return "found";
    case AnnealStatus::exhausted: return "exhausted";
    case AnnealStatus::cancelled: return "cancelled";
  }
  return "?";
}

struct AnnealOutcome {
  AnnealStatus status = AnnealStatus::running;
  std::optional<std::pair<BigUint, BigUint>> factors;  // (A, B) with A * B = N
  SearchTask task;
  std::uint64_t steps_used = 0;  // completed temperature levels before the win
  AnnealCounters counters;
  Energy final_energy = 0;
  double wall_seconds = 0;
};

// Checks a task's shape against the target's digit count.
inline void validate_task(const SearchTask& task, std::size_t digits, bool freeze_lowest = false) {
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument("invalid search task (a=" + std::to_string(task.a) +
                                ", b=" + std::to_string(task.b) + ", a1=" + std::to_string(task.a_ones) +
                                ", b1=" + std::to_string(task.b_ones) + "): " + why);
  };
  if (task.b < 1 || task.a < task.b) fail("need a >= b >= 1");
  if (task.a + task.b != digits && task.a + task.b != digits + 1) fail("a + b must be n or n+1");
  if (!FactorConfig::feasible(task.a, task.a_ones, freeze_lowest)) fail("a1 out of range");
  if (!FactorConfig::feasible(task.b, task.b_ones, freeze_lowest)) fail("b1 out of range");
}

// Simulated annealing over one search cell.
//
// Each temperature level tries up to M * max(a, b) proposals. A proposal
// mutates one factor chosen uniformly. The filter, the exact product test and
// the Metropolis rule run in that order, so a proposal that multiplies to N
// always wins regardless of its energy.
//
// Config is FactorConfig for any size, or WordConfig when a + b <= 64 so the
// product fits one machine word. Both give identical trajectories.
template <class Rng = std::mt19937_64, class Config = FactorConfig>
class Annealer {
  static constexpr bool kWord = std::is_same_v<Config, WordConfig>;
  using Product = std::conditional_t<kWord, std::uint64_t, BigUint>;

 public:
  using config_type = Config;
  using state_type = BasicAnnealState<Config>;

  Annealer(const EnergyModel& model, const SearchTask& task, const AnnealParams& params,
           const std::stop_token& stop = {})
      : model_(&model), task_(task), params_(params), rng_(task.seed) {
    params_.validate();
    freeze_ = params_.freeze_odd_digit && model.target().is_odd();
    validate_task(task_, model.digits(), freeze_);
    init_common();
    auto a = Config::random(task_.a, task_.a_ones, rng_, freeze_);
    auto b = Config::random(task_.b, task_.b_ones, rng_, freeze_);
    install_initial(std::move(a), std::move(b));
    // Redraw the start until it satisfies the filter, within one step's budget.
    for (std::uint64_t i = 0; i < budget_ && status_ == AnnealStatus::running && !state_->satisfies_filter;
         ++i) {
      if ((i & 0xFFF) == 0 && stop.stop_requested()) break;
      install_initial(Config::random(task_.a, task_.a_ones, rng_, freeze_),
                      Config::random(task_.b, task_.b_ones, rng_, freeze_));
    }
  }

  // Starts from the given configuration instead of a random one.
  Annealer(const EnergyModel& model, const SearchTask& task, const AnnealParams& params, Config a, Config b)
      : model_(&model), task_(task), params_(params), rng_(task.seed) {
    params_.validate();
    freeze_ = params_.freeze_odd_digit && model.target().is_odd();
    validate_task(task_, model.digits(), freeze_);
    if (a.len() != task_.a || a.ones() != task_.a_ones || b.len() != task_.b || b.ones() != task_.b_ones) {
      throw std::invalid_argument("initial configuration does not match the task");
    }
    init_common();
    install_initial(std::move(a), std::move(b));
  }

  AnnealStatus status() const noexcept { return status_; }
  const state_type& state() const { return *state_; }
  const SearchTask& task() const noexcept { return task_; }
  std::uint64_t budget_per_step() const noexcept { return budget_; }
  Energy k() const noexcept { return k_; }
  Rng& rng() noexcept { return rng_; }

  // Runs one temperature level, then cools. Polls `stop` periodically.
  AnnealStatus step(const std::stop_token& stop = {}) {
    if (status_ != AnnealStatus::running) return status_;
    const auto started = std::chrono::steady_clock::now();
    std::bernoulli_distribution pick_a(0.5);
    for (std::uint64_t i = 0; i < budget_; ++i) {
      if ((i & 0xFFF) == 0 && stop.stop_requested()) {
        status_ = AnnealStatus::cancelled;
        break;
      }
      const bool mutate_a = pick_a(rng_);
      const MoveKind kind = mix_(rng_);
      if (mutate_a) {
        offer(propose(state_->a, kind, rng_), state_->b);
      } else {
        offer(state_->a, propose(state_->b, kind, rng_));
      }
      if (status_ != AnnealStatus::running) break;
    }
    if (status_ == AnnealStatus::running) {
      state_->temperature *= params_.cooling_factor;
      ++state_->step;
      if (state_->step >= params_.max_steps) status_ = AnnealStatus::exhausted;
    }
    wall_seconds_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return status_;
  }

  AnnealOutcome run(const std::stop_token& stop = {}) {
    while (status_ == AnnealStatus::running) step(stop);
    return outcome();
  }

  // Processes one proposed configuration through filter, product test and
  // acceptance rule.
  AnnealStatus offer(Config a, Config b) {
    if (status_ != AnnealStatus::running) return status_;
    state_type& s = *state_;
    ++s.counters.tried;
    multiply(a, b);

    if (params_.enforce_product_popcount && product_popcount() != model_->target_popcount()) {
      ++s.counters.filtered;
      tick_checkpoint();
      return status_;
    }
    if (product_is_target()) {
      s.a = std::move(a);
      s.b = std::move(b);
      s.energy = model_->max();
      s.satisfies_filter = true;
      ++s.counters.accepted;
      found_at_ = s.step;
      status_ = AnnealStatus::found;
      return status_;
    }

    const Energy proposed = product_energy();
    bool accept = false;
    bool downhill = false;
    if (!s.satisfies_filter || proposed >= s.energy) {
      accept = true;
    } else {
      downhill = true;
      const bool within_bound =
          !params_.bad_move_fraction || bad_move_allowed(s.energy, proposed, *params_.bad_move_fraction);
      accept = within_bound && metropolis_accept(s.energy, proposed, s.temperature, k_, rng_,
                                                 params_.literal_metropolis);
    }

    if (!accept) {
      ++s.counters.rejected;
      tick_checkpoint();
      return status_;
    }
    ++s.counters.accepted;
    const bool arm = downhill && params_.revert_patience && !s.checkpoint;
    if (arm) s.checkpoint = BasicCheckpoint<Config>{s.a, s.b, s.energy, *params_.revert_patience};
    s.a = std::move(a);
    s.b = std::move(b);
    s.energy = proposed;
    s.satisfies_filter = true;
    if (!arm) tick_checkpoint();
    return status_;
  }

  AnnealOutcome outcome() const {
    AnnealOutcome out;
    out.status = status_;
    out.task = task_;
    out.counters = state_->counters;
    out.final_energy = state_->energy;
    out.wall_seconds = wall_seconds_;
    out.steps_used = status_ == AnnealStatus::found ? found_at_ : state_->step;
    if (status_ == AnnealStatus::found) out.factors.emplace(state_->a.value(), state_->b.value());
    return out;
  }

 private:
  void multiply(const Config& a, const Config& b) {
    if constexpr (kWord) {
      product_ = a.word() * b.word();
    } else {
      multiply_into(a.value(), b.value(), product_);
    }
  }
  std::size_t product_popcount() const {
    if constexpr (kWord) {
      return static_cast<std::size_t>(std::popcount(product_));
    } else {
      return product_.popcount();
    }
  }
  bool product_is_target() const {
    if constexpr (kWord) {
      return product_ == target_word_;
    } else {
      return product_ == model_->target();
    }
  }
  Energy product_energy() const {
    if constexpr (kWord) {
      return model_->of_word(product_);
    } else {
      return model_->of_product(product_);
    }
  }

  void init_common() {
    if constexpr (kWord) {
      if (task_.a + task_.b > WordConfig::max_len) {
        throw std::invalid_argument("word-sized annealer needs a + b <= 64");
      }
      target_word_ = *model_->target().to_u64();
    }
    k_ = params_.k_for(model_->digits());
    budget_ = params_.budget_for(task_);
    mix_ = MoveMix{params_.move_weights};
  }

  void install_initial(Config a, Config b) {
    multiply(a, b);
    const bool passes = !params_.enforce_product_popcount || product_popcount() == model_->target_popcount();
    const Energy e = product_is_target() ? model_->max() : product_energy();
    if (!state_) {
      state_.emplace(state_type{std::move(a), std::move(b), e, params_.start_temperature(), 0,
                                 std::nullopt, {}, passes});
    } else {
      state_->a = std::move(a);
      state_->b = std::move(b);
      state_->energy = e;
      state_->satisfies_filter = passes;
    }
    ++state_->counters.tried;
    if (product_is_target()) {
      found_at_ = 0;
      status_ = AnnealStatus::found;
    }
  }

  void tick_checkpoint() {
    state_type& s = *state_;
    if (!s.checkpoint) return;
    if (s.energy > s.checkpoint->energy) {
      s.checkpoint.reset();
      return;
    }
    if (--s.checkpoint->remaining == 0) {
      s.a = s.checkpoint->a;
      s.b = s.checkpoint->b;
      s.energy = s.checkpoint->energy;
      ++s.counters.reverted;
      s.checkpoint.reset();
    }
  }

  const EnergyModel* model_;
  SearchTask task_;
  AnnealParams params_;
  Rng rng_;
  MoveMix mix_;
  bool freeze_ = false;
  Energy k_ = 1;
  std::uint64_t budget_ = 0;
  std::optional<state_type> state_;
  AnnealStatus status_ = AnnealStatus::running;
  std::uint64_t found_at_ = 0;
  double wall_seconds_ = 0;
  Product product_{};
  std::uint64_t target_word_ = 0;
};

}  // namespace safactor
