#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "safactor/biguint.hpp"

namespace safactor {

// Energies are exact integers: a sum of digit weights f(i).
using Energy = std::uint64_t;

enum class CostKind { linear, quadratic };

// Monotone digit weight f(i), i >= 1.
struct CostFunction {
  CostKind kind = CostKind::quadratic;

  constexpr Energy operator()(std::uint64_t i) const noexcept {
    return kind == CostKind::linear ? i : i * i;
  }

  friend constexpr bool operator==(CostFunction, CostFunction) = default;
};

inline constexpr CostFunction kLinearCost{CostKind::linear};
inline constexpr CostFunction kQuadraticCost{CostKind::quadratic};

inline std::string_view to_string(CostKind kind) {
  return kind == CostKind::linear ? "linear" : "quadratic";
}

inline CostKind parse_cost_kind(std::string_view text) {
  if (text == "linear") return CostKind::linear;
  if (text == "quadratic") return CostKind::quadratic;
  throw std::invalid_argument("unknown cost function '" + std::string(text) + "'");
}

// Sum of f(i) for i = 1..n.
constexpr Energy max_energy(std::uint64_t n, CostFunction f) {
  if (f.kind == CostKind::linear) return n * (n + 1) / 2;
  return n * (n + 1) * (2 * n + 1) / 6;
}

// Energy of a trial product against a fixed target N.
//
// Matched digits contribute f(i); the model starts from the maximum and
// subtracts the weight of every mismatched digit among the low n. Product
// digits above position n never enter the sum.
class EnergyModel {
 public:
  EnergyModel(BigUint target, CostFunction f)
      : target_(std::move(target)), cost_(f), digits_(target_.bit_length()) {
    if (target_ < BigUint{2}) throw std::domain_error("energy target must be >= 2");
    weights_.reserve(digits_);
    for (std::size_t i = 1; i <= digits_; ++i) weights_.push_back(f(i));
    max_ = max_energy(digits_, f);
    target_popcount_ = target_.popcount();
  }

  const BigUint& target() const noexcept { return target_; }
  CostFunction cost() const noexcept { return cost_; }
  std::size_t digits() const noexcept { return digits_; }
  Energy max() const noexcept { return max_; }
  std::size_t target_popcount() const noexcept { return target_popcount_; }

  Energy of_product(const BigUint& product) const noexcept {
    Energy e = max_;
    const std::size_t full_limbs = digits_ / BigUint::limb_bits;
    const std::size_t tail_bits = digits_ % BigUint::limb_bits;
    const std::size_t limbs = full_limbs + (tail_bits != 0 ? 1 : 0);
    for (std::size_t l = 0; l < limbs; ++l) {
      BigUint::limb_type diff = product.limb(l) ^ target_.limb(l);
      if (l == full_limbs) diff &= (BigUint::limb_type{1} << tail_bits) - 1;
      while (diff != 0) {
        const auto bit = static_cast<std::size_t>(std::countr_zero(diff));
        e -= weights_[l * BigUint::limb_bits + bit];
        diff &= diff - 1;
      }
    }
    return e;
  }

  // Same as of_product for targets of at most 64 digits.
  Energy of_word(std::uint64_t product) const noexcept {
    Energy e = max_;
    std::uint64_t diff = product ^ target_.limb(0);
    if (digits_ < 64) diff &= (std::uint64_t{1} << digits_) - 1;
    while (diff != 0) {
      e -= weights_[static_cast<std::size_t>(std::countr_zero(diff))];
      diff &= diff - 1;
    }
    return e;
  }

  Energy of(const BigUint& a, const BigUint& b) const { return of_product(a * b); }

 private:
  BigUint target_;
  CostFunction cost_;
  std::size_t digits_;
  std::vector<Energy> weights_;
  Energy max_ = 0;
  std::size_t target_popcount_ = 0;
};

inline Energy energy(const BigUint& a, const BigUint& b, const BigUint& target, CostFunction f) {
  return EnergyModel(target, f).of(a, b);
}

}  // namespace safactor
