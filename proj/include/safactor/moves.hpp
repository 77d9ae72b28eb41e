#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include <boost/container/small_vector.hpp>

#include "safactor/biguint.hpp"

namespace safactor {

namespace detail {

// Sets the leading digit, the frozen lowest digit if any, and a uniformly
// random subset of the remaining positions so that `ones` bits are set.
// `set` receives zero-based bit indices.
template <class Rng, class Set>
void scatter_ones(std::size_t len, std::size_t ones, bool frozen_low, Rng& rng, Set&& set) {
  set(len - 1);
  std::size_t remaining = ones - 1;
  if (frozen_low) {
    set(0);
    --remaining;
  }
  const std::size_t lo = frozen_low ? 1 : 0;
  const std::size_t hi = len - 1;  // exclusive
  // Selection sampling: each position is chosen with probability
  // remaining / positions_left, which yields a uniform subset.
  for (std::size_t pos = lo; pos < hi && remaining > 0; ++pos) {
    const std::size_t left = hi - pos;
    if (std::uniform_int_distribution<std::size_t>(0, left - 1)(rng) < remaining) {
      set(pos);
      --remaining;
    }
  }
}

}  // namespace detail

// One trial factor: a bit string of fixed length with a fixed number of ones.
//
// Positions run 1..len from least significant. The leading 1 at position len
// is frozen; optionally position 1 is frozen to 1 as well (odd factors).
// Moves only permute digits inside the mutable region, so len and ones never
// change.
class FactorConfig {
 public:
  FactorConfig(BigUint value, std::size_t len, std::size_t ones, bool freeze_lowest = false)
      : value_(std::move(value)), len_(len), ones_(ones), freeze_lowest_(freeze_lowest && len > 1) {
    if (len_ == 0 || value_.bit_length() != len_) {
      throw std::invalid_argument("FactorConfig: value must have exactly len digits");
    }
    if (value_.popcount() != ones_) throw std::invalid_argument("FactorConfig: popcount mismatch");
    if (freeze_lowest_ && !value_.bit(0)) {
      throw std::invalid_argument("FactorConfig: frozen lowest digit must be 1");
    }
  }

  static FactorConfig from_value(const BigUint& value, bool freeze_lowest = false) {
    return {value, value.bit_length(), value.popcount(), freeze_lowest};
  }

  static bool feasible(std::size_t len, std::size_t ones, bool freeze_lowest = false) {
    if (len == 0 || ones < 1 || ones > len) return false;
    return !(freeze_lowest && len > 1 && ones < 2);
  }

  // Uniformly random configuration: leading 1 (and frozen lowest 1), with the
  // remaining ones scattered over the mutable positions.
  template <class Rng>
  static FactorConfig random(std::size_t len, std::size_t ones, Rng& rng, bool freeze_lowest = false) {
    if (!feasible(len, ones, freeze_lowest)) {
      throw std::invalid_argument("FactorConfig: no configuration with len=" + std::to_string(len) +
                                  " ones=" + std::to_string(ones));
    }
    const bool frozen_low = freeze_lowest && len > 1;
    BigUint value;
    detail::scatter_ones(len, ones, frozen_low, rng, [&](std::size_t bit) { value.set_bit(bit, true); });
    return {std::move(value), len, ones, frozen_low};
  }

  const BigUint& value() const noexcept { return value_; }
  std::size_t len() const noexcept { return len_; }
  std::size_t ones() const noexcept { return ones_; }
  bool lowest_frozen() const noexcept { return freeze_lowest_; }

  // 1-based digit access.
  bool digit(std::size_t position) const noexcept { return value_.bit(position - 1); }

  // Mutable region, inclusive, 1-based. Empty when first > last.
  std::size_t first_mutable() const noexcept { return freeze_lowest_ ? 2 : 1; }
  std::size_t last_mutable() const noexcept { return len_ - 1; }
  std::size_t mutable_count() const noexcept {
    return last_mutable() >= first_mutable() ? last_mutable() - first_mutable() + 1 : 0;
  }
  std::size_t mutable_ones() const noexcept { return ones_ - 1 - (freeze_lowest_ ? 1 : 0); }

  // Position of the rank-th (0-based) mutable digit equal to `d`, counting up
  // from the least significant end. Requires rank < the number of such digits.
  std::size_t nth_mutable(bool d, std::size_t rank) const noexcept {
    for (std::size_t p = first_mutable();; ++p) {
      if (digit(p) == d && rank-- == 0) return p;
    }
  }

  // Permutation primitives over the mutable region.
  void swap_digits(std::size_t i, std::size_t j) {
    check_mutable(i);
    check_mutable(j);
    const bool di = digit(i);
    const bool dj = digit(j);
    if (di == dj) return;
    value_.set_bit(i - 1, dj);
    value_.set_bit(j - 1, di);
  }

  // Removes the digit at lo, shifts lo+1..hi down one place, and puts the
  // removed digit at hi.
  void rotate_down(std::size_t lo, std::size_t hi) {
    check_range(lo, hi);
    const bool removed = digit(lo);
    for (std::size_t p = lo; p < hi; ++p) value_.set_bit(p - 1, digit(p + 1));
    value_.set_bit(hi - 1, removed);
  }

  void reverse(std::size_t lo, std::size_t hi) {
    check_range(lo, hi);
    while (lo < hi) {
      swap_digits(lo, hi);
      ++lo;
      --hi;
    }
  }

  friend bool operator==(const FactorConfig& x, const FactorConfig& y) {
    return x.len_ == y.len_ && x.value_ == y.value_;
  }

 private:
  void check_mutable(std::size_t p) const {
    if (p < first_mutable() || p > last_mutable()) {
      throw std::out_of_range("FactorConfig: position " + std::to_string(p) + " is frozen");
    }
  }
  void check_range(std::size_t lo, std::size_t hi) const {
    check_mutable(lo);
    check_mutable(hi);
    if (lo > hi) throw std::out_of_range("FactorConfig: empty range");
  }

  BigUint value_;
  std::size_t len_;
  std::size_t ones_;
  bool freeze_lowest_;
};

// Same interface as FactorConfig for factors of at most 64 digits, held in
// one machine word. Consumes the random stream identically, so an annealer
// gives the same trajectory with either representation.
class WordConfig {
 public:
  static constexpr std::size_t max_len = 64;

  WordConfig(std::uint64_t bits, std::size_t len, std::size_t ones, bool freeze_lowest = false)
      : bits_(bits), len_(len), ones_(ones), freeze_lowest_(freeze_lowest && len > 1) {
    if (len_ == 0 || len_ > max_len || static_cast<std::size_t>(std::bit_width(bits_)) != len_) {
      throw std::invalid_argument("WordConfig: value must have exactly len digits, len <= 64");
    }
    if (static_cast<std::size_t>(std::popcount(bits_)) != ones_) {
      throw std::invalid_argument("WordConfig: popcount mismatch");
    }
    if (freeze_lowest_ && (bits_ & 1U) == 0) throw std::invalid_argument("WordConfig: frozen lowest digit must be 1");
  }

  static WordConfig from_value(const BigUint& value, bool freeze_lowest = false) {
    const auto w = value.to_u64();
    if (!w) throw std::invalid_argument("WordConfig: value exceeds 64 digits");
    return {*w, value.bit_length(), value.popcount(), freeze_lowest};
  }

  static bool feasible(std::size_t len, std::size_t ones, bool freeze_lowest = false) {
    return len <= max_len && FactorConfig::feasible(len, ones, freeze_lowest);
  }

  template <class Rng>
  static WordConfig random(std::size_t len, std::size_t ones, Rng& rng, bool freeze_lowest = false) {
    if (!feasible(len, ones, freeze_lowest)) {
      throw std::invalid_argument("WordConfig: no configuration with len=" + std::to_string(len) +
                                  " ones=" + std::to_string(ones));
    }
    const bool frozen_low = freeze_lowest && len > 1;
    std::uint64_t bits = 0;
    detail::scatter_ones(len, ones, frozen_low, rng, [&](std::size_t bit) { bits |= std::uint64_t{1} << bit; });
    return {bits, len, ones, frozen_low};
  }

  std::uint64_t word() const noexcept { return bits_; }
  BigUint value() const { return BigUint{bits_}; }
  std::size_t len() const noexcept { return len_; }
  std::size_t ones() const noexcept { return ones_; }
  bool lowest_frozen() const noexcept { return freeze_lowest_; }

  bool digit(std::size_t position) const noexcept { return ((bits_ >> (position - 1)) & 1U) != 0; }

  std::size_t first_mutable() const noexcept { return freeze_lowest_ ? 2 : 1; }
  std::size_t last_mutable() const noexcept { return len_ - 1; }
  std::size_t mutable_count() const noexcept {
    return last_mutable() >= first_mutable() ? last_mutable() - first_mutable() + 1 : 0;
  }
  std::size_t mutable_ones() const noexcept { return ones_ - 1 - (freeze_lowest_ ? 1 : 0); }

  std::size_t nth_mutable(bool d, std::size_t rank) const noexcept {
    const std::uint64_t region = ((std::uint64_t{1} << (len_ - 1)) - 1) & ~std::uint64_t{freeze_lowest_ ? 1U : 0U};
    std::uint64_t m = (d ? bits_ : ~bits_) & region;
    for (; rank > 0; --rank) m &= m - 1;
    return static_cast<std::size_t>(std::countr_zero(m)) + 1;
  }

  void swap_digits(std::size_t i, std::size_t j) {
    check_mutable(i);
    check_mutable(j);
    if (digit(i) != digit(j)) bits_ ^= (std::uint64_t{1} << (i - 1)) | (std::uint64_t{1} << (j - 1));
  }

  void rotate_down(std::size_t lo, std::size_t hi) {
    check_range(lo, hi);
    const std::size_t width = hi - lo + 1;  // <= 63: the leading digit is never inside
    const std::uint64_t mask = ((std::uint64_t{1} << width) - 1) << (lo - 1);
    std::uint64_t field = (bits_ & mask) >> (lo - 1);
    field = (field >> 1) | ((field & 1U) << (width - 1));
    bits_ = (bits_ & ~mask) | (field << (lo - 1));
  }

  void reverse(std::size_t lo, std::size_t hi) {
    check_range(lo, hi);
    while (lo < hi) {
      swap_digits(lo, hi);
      ++lo;
      --hi;
    }
  }

  friend bool operator==(const WordConfig& x, const WordConfig& y) noexcept {
    return x.len_ == y.len_ && x.bits_ == y.bits_;
  }

 private:
  void check_mutable(std::size_t p) const {
    if (p < first_mutable() || p > last_mutable()) {
      throw std::out_of_range("WordConfig: position " + std::to_string(p) + " is frozen");
    }
  }
  void check_range(std::size_t lo, std::size_t hi) const {
    check_mutable(lo);
    check_mutable(hi);
    if (lo > hi) throw std::out_of_range("WordConfig: empty range");
  }

  std::uint64_t bits_;
  std::size_t len_;
  std::size_t ones_;
  bool freeze_lowest_;
};

enum class MoveKind : std::uint8_t { swap, slide, reverse, random };

inline constexpr std::array<MoveKind, 4> kAllMoveKinds{MoveKind::swap, MoveKind::slide,
                                                       MoveKind::reverse, MoveKind::random};

inline std::string_view to_string(MoveKind kind) {
  switch (kind) {
    case MoveKind::swap: return "swap";
    case MoveKind::slide: return "slide";
    case MoveKind::reverse: return "reverse";
    case MoveKind::random: return "random";
  }
  return "?";
}

namespace detail {

// Two distinct positions in the mutable region, returned sorted. Returns
// false when fewer than two positions exist.
template <class Config, class Rng>
bool pick_range(const Config& cfg, Rng& rng, std::size_t& lo, std::size_t& hi) {
  if (cfg.mutable_count() < 2) return false;
  std::uniform_int_distribution<std::size_t> pos(cfg.first_mutable(), cfg.last_mutable());
  lo = pos(rng);
  do {
    hi = pos(rng);
  } while (hi == lo);
  if (lo > hi) std::swap(lo, hi);
  return true;
}

}  // namespace detail

// Exchanges one 1-digit with one 0-digit.
template <class Config, class Rng>
Config swap_move(Config cfg, Rng& rng) {
  const std::size_t ones = cfg.mutable_ones();
  const std::size_t zeros = cfg.mutable_count() - ones;
  if (ones == 0 || zeros == 0) return cfg;
  const std::size_t one_rank = std::uniform_int_distribution<std::size_t>(0, ones - 1)(rng);
  const std::size_t zero_rank = std::uniform_int_distribution<std::size_t>(0, zeros - 1)(rng);
  cfg.swap_digits(cfg.nth_mutable(true, one_rank), cfg.nth_mutable(false, zero_rank));
  return cfg;
}

template <class Config, class Rng>
Config slide_move(Config cfg, Rng& rng) {
  std::size_t lo = 0;
  std::size_t hi = 0;
  if (detail::pick_range(cfg, rng, lo, hi)) cfg.rotate_down(lo, hi);
  return cfg;
}

template <class Config, class Rng>
Config reverse_move(Config cfg, Rng& rng) {
  std::size_t lo = 0;
  std::size_t hi = 0;
  if (detail::pick_range(cfg, rng, lo, hi)) cfg.reverse(lo, hi);
  return cfg;
}

// Largest subset the random move permutes: a quarter of the mutable
// positions, at least 2.
constexpr std::size_t random_move_max_subset(std::size_t mutable_count) {
  return std::max<std::size_t>(2, (mutable_count + 3) / 4);
}

// Uniformly permutes the digits at a sparse random subset of positions.
template <class Config, class Rng>
Config random_move(Config cfg, Rng& rng) {
  const std::size_t m = cfg.mutable_count();
  if (m < 2) return cfg;
  const std::size_t upper = std::min(m, random_move_max_subset(m));
  const std::size_t size = std::uniform_int_distribution<std::size_t>(2, upper)(rng);

  boost::container::small_vector<std::size_t, 64> positions(m);
  for (std::size_t i = 0; i < m; ++i) positions[i] = cfg.first_mutable() + i;
  for (std::size_t i = 0; i < size; ++i) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(i, m - 1)(rng);
    std::swap(positions[i], positions[j]);
  }
  positions.resize(size);

  boost::container::small_vector<bool, 64> digits;
  for (const std::size_t p : positions) digits.push_back(cfg.digit(p));
  std::shuffle(digits.begin(), digits.end(), rng);
  // Re-apply as swaps so every intermediate state stays valid.
  for (std::size_t i = 0; i < size; ++i) {
    if (cfg.digit(positions[i]) == digits[i]) continue;
    for (std::size_t j = i + 1; j < size; ++j) {
      if (cfg.digit(positions[j]) == digits[i] && cfg.digit(positions[j]) != digits[j]) {
        cfg.swap_digits(positions[i], positions[j]);
        break;
      }
    }
  }
  return cfg;
}

template <class Config, class Rng>
Config propose(const Config& cfg, MoveKind kind, Rng& rng) {
  switch (kind) {
    case MoveKind::swap: return swap_move(cfg, rng);
    case MoveKind::slide: return slide_move(cfg, rng);
    case MoveKind::reverse: return reverse_move(cfg, rng);
    case MoveKind::random: return random_move(cfg, rng);
  }
  return cfg;
}

// Distribution over move kinds; uniform unless weights are given.
class MoveMix {
 public:
  MoveMix() : MoveMix({1.0, 1.0, 1.0, 1.0}) {}
  explicit MoveMix(const std::array<double, 4>& weights) : weights_(weights) {
    double total = 0;
    for (const double w : weights_) {
      if (!(w >= 0)) throw std::invalid_argument("move weights must be non-negative");
      total += w;
    }
    if (total <= 0) throw std::invalid_argument("at least one move weight must be positive");
    dist_ = std::discrete_distribution<int>(weights_.begin(), weights_.end());
  }

  template <class Rng>
  MoveKind operator()(Rng& rng) {
    return kAllMoveKinds[static_cast<std::size_t>(dist_(rng))];
  }

  const std::array<double, 4>& weights() const noexcept { return weights_; }

 private:
  std::array<double, 4> weights_;
  std::discrete_distribution<int> dist_;
};

}  // namespace safactor
