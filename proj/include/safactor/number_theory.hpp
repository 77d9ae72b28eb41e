#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "safactor/biguint.hpp"

namespace safactor {

// Binary digits of a positive integer, indexed 1..len from least significant.
// The digit at position len is always 1.
class BitView {
 public:
  explicit BitView(std::vector<std::uint8_t> digits) : digits_(std::move(digits)) {
    if (digits_.empty() || digits_.back() != 1) {
      throw std::invalid_argument("BitView requires a leading 1 digit");
    }
  }

  std::size_t len() const noexcept { return digits_.size(); }
  int operator[](std::size_t position) const { return digits_.at(position - 1); }
  const std::vector<std::uint8_t>& digits() const noexcept { return digits_; }

  BigUint value() const {
    BigUint out;
    for (std::size_t i = 0; i < digits_.size(); ++i) {
      if (digits_[i] != 0) out.set_bit(i, true);
    }
    return out;
  }

 private:
  std::vector<std::uint8_t> digits_;
};

inline BitView to_bit_view(const BigUint& x) {
  if (x.is_zero()) throw std::domain_error("to_bit_view: zero has no leading 1 digit");
  std::vector<std::uint8_t> digits(x.bit_length());
  for (std::size_t i = 0; i < digits.size(); ++i) digits[i] = x.bit(i) ? 1 : 0;
  return BitView(std::move(digits));
}

inline std::size_t popcount(const BigUint& x) noexcept { return x.popcount(); }

inline BigUint multiply(const BigUint& a, const BigUint& b) { return a * b; }

namespace detail {

inline constexpr std::size_t kSmallPrimeCount = 168;

constexpr std::array<std::uint32_t, kSmallPrimeCount> sieve_small_primes() {
  std::array<bool, 1001> composite{};
  std::array<std::uint32_t, kSmallPrimeCount> out{};
  std::size_t count = 0;
  for (std::uint32_t i = 2; i <= 1000; ++i) {
    if (composite[i]) continue;
    out[count++] = i;
    for (std::uint32_t j = i * i; j <= 1000; j += i) composite[j] = true;
  }
  return out;
}

}  // namespace detail

// The 168 primes up to 1000.
inline constexpr std::array<std::uint32_t, detail::kSmallPrimeCount> kSmallPrimes =
    detail::sieve_small_primes();
inline constexpr std::uint32_t kTrialDivisionBound = 1000;

struct TrialDivisionResult {
  std::vector<std::uint32_t> small_factors;  // ascending, with multiplicity
  BigUint remainder;
};

inline TrialDivisionResult trial_divide(const BigUint& x) {
  if (x < BigUint{2}) throw std::domain_error("trial_divide requires x >= 2");
  TrialDivisionResult result{{}, x};
  for (const std::uint32_t p : kSmallPrimes) {
    while (result.remainder.mod_small(p) == 0) {
      result.remainder.divide_small(p);
      result.small_factors.push_back(p);
    }
  }
  return result;
}

namespace detail {

inline std::uint64_t mulmod64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline std::uint64_t powmod64(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  std::uint64_t result = 1 % m;
  base %= m;
  while (exp != 0) {
    if ((exp & 1U) != 0) result = mulmod64(result, base, m);
    base = mulmod64(base, base, m);
    exp >>= 1;
  }
  return result;
}

// Strong probable-prime test to base `a` for odd n = d * 2^s + 1.
inline bool sprp64(std::uint64_t n, std::uint64_t a, std::uint64_t d, unsigned s) {
  a %= n;
  if (a == 0) return true;
  std::uint64_t x = powmod64(a, d, n);
  if (x == 1 || x == n - 1) return true;
  for (unsigned r = 1; r < s; ++r) {
    x = mulmod64(x, x, n);
    if (x == n - 1) return true;
  }
  return false;
}

inline bool is_prime64(std::uint64_t n) {
  if (n < 2) return false;
  for (const std::uint32_t p : {2U, 3U, 5U, 7U, 11U, 13U, 17U, 19U, 23U, 29U, 31U, 37U}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  unsigned s = 0;
  while ((d & 1U) == 0) {
    d >>= 1;
    ++s;
  }
  // The first twelve primes as bases are exact for n < 3.3e24.
  for (const std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL,
                                31ULL, 37ULL}) {
    if (!sprp64(n, a, d, s)) return false;
  }
  return true;
}

inline BigUint powmod(BigUint base, BigUint exp, const BigUint& m) {
  BigUint result = BigUint{1} % m;
  base = base % m;
  const std::size_t bits = exp.bit_length();
  for (std::size_t i = 0; i < bits; ++i) {
    if (exp.bit(i)) result = (result * base) % m;
    base = (base * base) % m;
  }
  return result;
}

inline constexpr int kMillerRabinRounds = 64;

inline bool is_prime_big(const BigUint& n) {
  for (const std::uint32_t p : kSmallPrimes) {
    if (n.mod_small(p) == 0) return false;
  }
  const BigUint one{1};
  const BigUint n_minus_1 = n - one;
  BigUint d = n_minus_1;
  std::size_t s = 0;
  while (!d.is_odd()) {
    d = d >> 1;
    ++s;
  }
  // Bases come from a stream seeded by n itself, so the verdict is a pure
  // function of n.
  std::uint64_t seed = 0x9E3779B97F4A7C15ULL;
  for (const auto limb : n.limbs()) seed = (seed ^ limb) * 0xBF58476D1CE4E5B9ULL;
  std::mt19937_64 rng(seed);
  const BigUint span = n - BigUint{3};  // bases drawn from [2, n-2]
  for (int round = 0; round < kMillerRabinRounds; ++round) {
    BigUint raw;
    for (std::size_t l = 0; l <= n.limb_count(); ++l) {
      raw = (raw << 64) + BigUint{rng()};
    }
    const BigUint a = raw % span + BigUint{2};
    BigUint x = powmod(a, d, n);
    if (x == one || x == n_minus_1) continue;
    bool witness = true;
    for (std::size_t r = 1; r < s; ++r) {
      x = (x * x) % n;
      if (x == n_minus_1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

}  // namespace detail

// Deterministic below 2^64; 64 Miller-Rabin rounds above.
inline bool is_prime(const BigUint& x) {
  if (x < BigUint{2}) throw std::domain_error("is_prime requires x >= 2");
  if (const auto small = x.to_u64(); small) return detail::is_prime64(*small);
  return detail::is_prime_big(x);
}

}  // namespace safactor
