#include "hhesim/zq.hpp"

#include <bit>
#include <string>

#include "hhesim/error.hpp"

namespace hhesim {

namespace {

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  base %= m;
  while (e != 0) {
    if (e & 1) r = mulmod(r, base, m);
    base = mulmod(base, base, m);
    e >>= 1;
  }
  return r;
}

}  // namespace

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL,
                          23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // These twelve bases are sufficient for all n < 3.3e24.
  for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL,
                          23ULL, 29ULL, 31ULL, 37ULL}) {
    std::uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

Modulus::Modulus(std::uint64_t q) : q_(q), bits_(0) {
  if (q < 2 || q >= (std::uint64_t{1} << kMaxBits)) {
    throw ParameterError("modulus " + std::to_string(q) +
                         " outside [2, 2^61)");
  }
  if (!is_prime(q)) {
    throw ParameterError("modulus " + std::to_string(q) + " is not prime");
  }
  // ceil(log2 q): q is prime and > 2 is never a power of two.
  bits_ = static_cast<unsigned>(std::bit_width(q - 1));
}

std::uint64_t Modulus::reduce_signed(std::int64_t x) const noexcept {
  auto q = static_cast<std::int64_t>(q_);
  std::int64_t r = x % q;
  if (r < 0) r += q;
  return static_cast<std::uint64_t>(r);
}

ZqElement zq_add(const ZqElement& a, const ZqElement& b) {
  if (!(a.modulus() == b.modulus())) throw ModulusMismatch();
  const Modulus& m = a.modulus();
  return ZqElement(m.add(a.value(), b.value()), m);
}

ZqElement zq_mul(const ZqElement& a, const ZqElement& b) {
  if (!(a.modulus() == b.modulus())) throw ModulusMismatch();
  const Modulus& m = a.modulus();
  return ZqElement(m.mul(a.value(), b.value()), m);
}

ZqElement zq_pow3(const ZqElement& a) {
  const Modulus& m = a.modulus();
  return ZqElement(m.pow3(a.value()), m);
}

}  // namespace hhesim
