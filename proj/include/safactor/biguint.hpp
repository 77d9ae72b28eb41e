#pragma once

#include <algorithm>
#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include <boost/container/small_vector.hpp>

namespace safactor {

// Arbitrary-precision non-negative integer.
//
// Little-endian 64-bit limbs with no high zero limbs, so zero is the empty
// limb sequence and equal values always have equal representations. Values up
// to 256 bits live inline; the annealer's inner loop never touches the heap
// for the sizes it works with.
class BigUint {
 public:
  using limb_type = std::uint64_t;
  static constexpr std::size_t limb_bits = 64;

  BigUint() = default;
  BigUint(std::uint64_t v) {  // NOLINT(google-explicit-constructor)
    if (v != 0) limbs_.push_back(v);
  }

  static BigUint from_decimal(std::string_view text) {
    if (text.empty()) throw std::invalid_argument("empty number");
    BigUint out;
    // Consume up to 19 digits at a time: 10^19 < 2^64.
    std::size_t pos = 0;
    while (pos < text.size()) {
      const std::size_t chunk = std::min<std::size_t>(19, text.size() - pos);
      std::uint64_t part = 0;
      std::uint64_t scale = 1;
      for (std::size_t i = 0; i < chunk; ++i) {
        const char c = text[pos + i];
        if (c < '0' || c > '9') {
          throw std::invalid_argument("not a decimal number: '" + std::string(text) + "'");
        }
        part = part * 10 + static_cast<std::uint64_t>(c - '0');
        scale *= 10;
      }
      out.mul_add_small(scale, part);
      pos += chunk;
    }
    return out;
  }

  std::string to_decimal() const {
    if (is_zero()) return "0";
    constexpr std::uint64_t chunk = 10'000'000'000'000'000'000ULL;  // 10^19
    BigUint rest = *this;
    std::string out;
    while (!rest.is_zero()) {
      std::uint64_t r = rest.divide_small(chunk);
      for (int i = 0; i < 19; ++i) {
        out.push_back(static_cast<char>('0' + r % 10));
        r /= 10;
        if (rest.is_zero() && r == 0) break;
      }
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

  bool is_zero() const noexcept { return limbs_.empty(); }
  std::span<const limb_type> limbs() const noexcept { return {limbs_.data(), limbs_.size()}; }
  std::size_t limb_count() const noexcept { return limbs_.size(); }
  limb_type limb(std::size_t i) const noexcept { return i < limbs_.size() ? limbs_[i] : 0; }

  std::size_t bit_length() const noexcept {
    if (limbs_.empty()) return 0;
    return (limbs_.size() - 1) * limb_bits +
           (limb_bits - static_cast<std::size_t>(std::countl_zero(limbs_.back())));
  }

  // Zero-based bit access; bits past the top read as 0.
  bool bit(std::size_t index) const noexcept {
    const std::size_t l = index / limb_bits;
    return l < limbs_.size() && ((limbs_[l] >> (index % limb_bits)) & 1U) != 0;
  }

  void set_bit(std::size_t index, bool value) {
    const std::size_t l = index / limb_bits;
    const limb_type mask = limb_type{1} << (index % limb_bits);
    if (value) {
      if (l >= limbs_.size()) limbs_.resize(l + 1, 0);
      limbs_[l] |= mask;
    } else if (l < limbs_.size()) {
      limbs_[l] &= ~mask;
      trim();
    }
  }

  std::size_t popcount() const noexcept {
    std::size_t total = 0;
    for (const limb_type l : limbs_) total += static_cast<std::size_t>(std::popcount(l));
    return total;
  }

  std::optional<std::uint64_t> to_u64() const noexcept {
    if (limbs_.size() > 1) return std::nullopt;
    return limbs_.empty() ? 0 : limbs_[0];
  }

  bool is_odd() const noexcept { return !limbs_.empty() && (limbs_[0] & 1U) != 0; }

  // In-place division by a single limb; returns the remainder.
  std::uint64_t divide_small(std::uint64_t divisor) {
    if (divisor == 0) throw std::domain_error("division by zero");
    unsigned __int128 rem = 0;
    for (std::size_t i = limbs_.size(); i-- > 0;) {
      const unsigned __int128 cur = (rem << 64) | limbs_[i];
      limbs_[i] = static_cast<limb_type>(cur / divisor);
      rem = cur % divisor;
    }
    trim();
    return static_cast<std::uint64_t>(rem);
  }

  std::uint64_t mod_small(std::uint64_t divisor) const {
    if (divisor == 0) throw std::domain_error("division by zero");
    unsigned __int128 rem = 0;
    for (std::size_t i = limbs_.size(); i-- > 0;) {
      rem = ((rem << 64) | limbs_[i]) % divisor;
    }
    return static_cast<std::uint64_t>(rem);
  }

  friend bool operator==(const BigUint& x, const BigUint& y) noexcept {
    return std::equal(x.limbs_.begin(), x.limbs_.end(), y.limbs_.begin(), y.limbs_.end());
  }

  friend std::strong_ordering operator<=>(const BigUint& x, const BigUint& y) noexcept {
    if (x.limbs_.size() != y.limbs_.size()) return x.limbs_.size() <=> y.limbs_.size();
    for (std::size_t i = x.limbs_.size(); i-- > 0;) {
      if (x.limbs_[i] != y.limbs_[i]) return x.limbs_[i] <=> y.limbs_[i];
    }
    return std::strong_ordering::equal;
  }

  // out = x * y, reusing out's storage. out must not alias x or y.
  friend void multiply_into(const BigUint& x, const BigUint& y, BigUint& out) {
    out.limbs_.assign(x.limbs_.size() + y.limbs_.size(), 0);
    if (x.is_zero() || y.is_zero()) {
      out.limbs_.clear();
      return;
    }
    for (std::size_t i = 0; i < x.limbs_.size(); ++i) {
      unsigned __int128 carry = 0;
      for (std::size_t j = 0; j < y.limbs_.size(); ++j) {
        const unsigned __int128 cur =
            static_cast<unsigned __int128>(x.limbs_[i]) * y.limbs_[j] + out.limbs_[i + j] + carry;
        out.limbs_[i + j] = static_cast<limb_type>(cur);
        carry = cur >> 64;
      }
      out.limbs_[i + y.limbs_.size()] = static_cast<limb_type>(carry);
    }
    out.trim();
  }

  friend BigUint operator*(const BigUint& x, const BigUint& y) {
    BigUint out;
    multiply_into(x, y, out);
    return out;
  }

  friend BigUint operator+(const BigUint& x, const BigUint& y) {
    const BigUint& big = x.limbs_.size() >= y.limbs_.size() ? x : y;
    const BigUint& small = x.limbs_.size() >= y.limbs_.size() ? y : x;
    BigUint out = big;
    limb_type carry = 0;
    for (std::size_t i = 0; i < out.limbs_.size(); ++i) {
      const limb_type add = small.limb(i);
      if (add == 0 && carry == 0 && i >= small.limbs_.size()) break;
      const unsigned __int128 cur = static_cast<unsigned __int128>(out.limbs_[i]) + add + carry;
      out.limbs_[i] = static_cast<limb_type>(cur);
      carry = static_cast<limb_type>(cur >> 64);
    }
    if (carry != 0) out.limbs_.push_back(carry);
    return out;
  }

  // Requires x >= y.
  friend BigUint operator-(const BigUint& x, const BigUint& y) {
    if (x < y) throw std::domain_error("BigUint subtraction underflow");
    BigUint out = x;
    limb_type borrow = 0;
    for (std::size_t i = 0; i < out.limbs_.size(); ++i) {
      const limb_type sub = y.limb(i);
      const limb_type before = out.limbs_[i];
      out.limbs_[i] = before - sub - borrow;
      borrow = (before < sub || (before - sub) < borrow) ? 1 : 0;
    }
    out.trim();
    return out;
  }

  friend BigUint operator<<(const BigUint& x, std::size_t shift) {
    if (x.is_zero()) return x;
    const std::size_t whole = shift / limb_bits;
    const unsigned part = static_cast<unsigned>(shift % limb_bits);
    BigUint out;
    out.limbs_.assign(x.limbs_.size() + whole + 1, 0);
    for (std::size_t i = 0; i < x.limbs_.size(); ++i) {
      out.limbs_[i + whole] |= x.limbs_[i] << part;
      if (part != 0) out.limbs_[i + whole + 1] |= x.limbs_[i] >> (limb_bits - part);
    }
    out.trim();
    return out;
  }

  friend BigUint operator>>(const BigUint& x, std::size_t shift) {
    const std::size_t whole = shift / limb_bits;
    if (whole >= x.limbs_.size()) return {};
    const unsigned part = static_cast<unsigned>(shift % limb_bits);
    BigUint out;
    out.limbs_.assign(x.limbs_.size() - whole, 0);
    for (std::size_t i = 0; i < out.limbs_.size(); ++i) {
      out.limbs_[i] = x.limbs_[i + whole] >> part;
      if (part != 0 && i + whole + 1 < x.limbs_.size()) {
        out.limbs_[i] |= x.limbs_[i + whole + 1] << (limb_bits - part);
      }
    }
    out.trim();
    return out;
  }

  // Shift-subtract long division. Only used off the hot path (primality
  // testing on values wider than 64 bits), so simplicity wins over speed.
  friend std::pair<BigUint, BigUint> divmod(const BigUint& x, const BigUint& y) {
    if (y.is_zero()) throw std::domain_error("division by zero");
    if (x < y) return {BigUint{}, x};
    if (const auto ys = y.to_u64(); ys) {
      BigUint q = x;
      const std::uint64_t r = q.divide_small(*ys);
      return {std::move(q), BigUint{r}};
    }
    BigUint quotient;
    BigUint rem;
    for (std::size_t i = x.bit_length(); i-- > 0;) {
      rem = rem << 1;
      if (x.bit(i)) rem.set_bit(0, true);
      if (rem >= y) {
        rem = rem - y;
        quotient.set_bit(i, true);
      }
    }
    return {std::move(quotient), std::move(rem)};
  }

  friend BigUint operator/(const BigUint& x, const BigUint& y) { return divmod(x, y).first; }
  friend BigUint operator%(const BigUint& x, const BigUint& y) { return divmod(x, y).second; }

 private:
  void trim() noexcept {
    while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
  }

  void mul_add_small(std::uint64_t mul, std::uint64_t add) {
    unsigned __int128 carry = add;
    for (limb_type& l : limbs_) {
      const unsigned __int128 cur = static_cast<unsigned __int128>(l) * mul + carry;
      l = static_cast<limb_type>(cur);
      carry = cur >> 64;
    }
    if (carry != 0) limbs_.push_back(static_cast<limb_type>(carry));
  }

  boost::container::small_vector<limb_type, 4> limbs_;
};

inline std::string to_string(const BigUint& x) { return x.to_decimal(); }

}  // namespace safactor
