#pragma once

#include <cstdint>
#include <compare>

namespace hhesim {

/// Deterministic Miller-Rabin, exact for every 64-bit input.
bool is_prime(std::uint64_t n);

/// A prime modulus q with 2 <= q < 2^61.
///
/// Products of two canonical residues fit in an unsigned 128-bit
/// intermediate, so reduction is a plain remainder.
class Modulus {
 public:
  static constexpr unsigned kMaxBits = 61;

  /// Throws ParameterError unless q is a prime below 2^61.
  explicit Modulus(std::uint64_t q);

  std::uint64_t value() const noexcept { return q_; }
  /// ceil(log2 q).
  unsigned bits() const noexcept { return bits_; }

  std::uint64_t reduce(std::uint64_t x) const noexcept { return x % q_; }
  std::uint64_t reduce_signed(std::int64_t x) const noexcept;

  std::uint64_t add(std::uint64_t a, std::uint64_t b) const noexcept {
    std::uint64_t s = a + b;
    return s >= q_ ? s - q_ : s;
  }
  std::uint64_t sub(std::uint64_t a, std::uint64_t b) const noexcept {
    return a >= b ? a - b : a + (q_ - b);
  }
  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const noexcept {
    return static_cast<std::uint64_t>(
        static_cast<unsigned __int128>(a) * b % q_);
  }
  std::uint64_t pow3(std::uint64_t a) const noexcept { return mul(mul(a, a), a); }

  friend bool operator==(const Modulus&, const Modulus&) = default;

 private:
  std::uint64_t q_;
  unsigned bits_;
};

/// Canonical residue in [0, q) bound to its modulus.
class ZqElement {
 public:
  /// Reduces `v` into canonical range.
  ZqElement(std::uint64_t v, const Modulus& m) : value_(m.reduce(v)), mod_(m) {}

  std::uint64_t value() const noexcept { return value_; }
  const Modulus& modulus() const noexcept { return mod_; }

  friend bool operator==(const ZqElement&, const ZqElement&) = default;

 private:
  std::uint64_t value_;
  Modulus mod_;
};

// All three throw ModulusMismatch when operands disagree on q.
ZqElement zq_add(const ZqElement& a, const ZqElement& b);
ZqElement zq_mul(const ZqElement& a, const ZqElement& b);
ZqElement zq_pow3(const ZqElement& a);

}  // namespace hhesim
