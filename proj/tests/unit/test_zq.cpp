#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <vector>

#include "hhesim/error.hpp"
#include "hhesim/zq.hpp"

using namespace hhesim;

namespace {

const Modulus q17(17);

ZqElement z(std::uint64_t v, const Modulus& m = q17) { return ZqElement(v, m); }

// Plain trial division, only for small inputs.
bool slow_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

}  // namespace

TEST(Zq, AddExamples) {
  EXPECT_EQ(zq_add(z(9), z(12)).value(), 4u);
  EXPECT_EQ(zq_add(z(5), z(0)).value(), 5u);
  EXPECT_EQ(zq_add(z(16), z(1)).value(), 0u);
}

TEST(Zq, MulExamples) {
  EXPECT_EQ(zq_mul(z(5), z(7)).value(), 1u);
  EXPECT_EQ(zq_mul(z(1), z(9)).value(), 9u);
  EXPECT_EQ(zq_mul(z(0), z(13)).value(), 0u);
}

TEST(Zq, Pow3Examples) {
  EXPECT_EQ(zq_pow3(z(2)).value(), 8u);
  EXPECT_EQ(zq_pow3(z(3)).value(), 10u);
  EXPECT_EQ(zq_pow3(z(0)).value(), 0u);
  EXPECT_EQ(zq_pow3(z(1)).value(), 1u);
}

TEST(Zq, MismatchedModuliThrow) {
  const Modulus q19(19);
  EXPECT_THROW(zq_add(z(1), z(1, q19)), ModulusMismatch);
  EXPECT_THROW(zq_mul(z(1), z(1, q19)), ModulusMismatch);
}

TEST(Zq, ModulusRejectsComposites) {
  EXPECT_THROW(Modulus(16), ParameterError);
  EXPECT_THROW(Modulus(1), ParameterError);
  EXPECT_THROW(Modulus(0), ParameterError);
  // 2^61 - 1 is prime and the largest allowed.
  EXPECT_NO_THROW(Modulus((std::uint64_t{1} << 61) - 1));
  EXPECT_THROW(Modulus(std::uint64_t{1} << 61), ParameterError);
  EXPECT_NO_THROW(Modulus(2));
  EXPECT_EQ(Modulus(17).bits(), 5u);
  EXPECT_EQ(Modulus(167772161).bits(), 28u);
  EXPECT_EQ(Modulus(22806529).bits(), 25u);
}

TEST(Zq, PrimalityAgreesWithTrialDivision) {
  for (std::uint64_t n = 0; n < 20000; ++n) ASSERT_EQ(is_prime(n), slow_prime(n)) << n;
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const std::uint64_t n = rng() % 4000000000ull;
    ASSERT_EQ(is_prime(n), slow_prime(n)) << n;
  }
  // Strong pseudoprimes to several small bases.
  EXPECT_FALSE(is_prime(3215031751ull));
  EXPECT_FALSE(is_prime(3825123056546413051ull));
  EXPECT_TRUE(is_prime(2305843009213693951ull));
}

TEST(Zq, CanonicalResultsOnRandomOperands) {
  std::mt19937_64 rng(11);
  for (std::uint64_t qv : {17ull, 167772161ull, 22806529ull, 2305843009213693921ull}) {
    if (!is_prime(qv)) continue;
    const Modulus m(qv);
    for (int i = 0; i < 100000; ++i) {
      const auto a = z(rng(), m), b = z(rng(), m);
      const auto s = zq_add(a, b), p = zq_mul(a, b);
      ASSERT_LT(s.value(), qv);
      ASSERT_LT(p.value(), qv);
      ASSERT_EQ(s.value(), static_cast<std::uint64_t>(
                               (static_cast<unsigned __int128>(a.value()) + b.value()) % qv));
      ASSERT_EQ(p.value(), static_cast<std::uint64_t>(
                               static_cast<unsigned __int128>(a.value()) * b.value() % qv));
    }
  }
}

TEST(Zq, LargestModulusNeedsWideProducts) {
  // Largest prime below 2^61.
  std::uint64_t qv = (std::uint64_t{1} << 61) - 2;
  while (!is_prime(qv)) --qv;
  const Modulus m(qv);
  const auto a = z(qv - 1, m);
  EXPECT_EQ(zq_mul(a, a).value(), 1u);  // (-1)^2
  EXPECT_EQ(zq_pow3(a).value(), qv - 1);
}

TEST(Zq, RingLaws) {
  std::mt19937_64 rng(3);
  const Modulus m(167772161);
  for (int i = 0; i < 20000; ++i) {
    const auto a = z(rng(), m), b = z(rng(), m), c = z(rng(), m);
    ASSERT_EQ(zq_add(zq_add(a, b), c), zq_add(a, zq_add(b, c)));
    ASSERT_EQ(zq_mul(zq_mul(a, b), c), zq_mul(a, zq_mul(b, c)));
    ASSERT_EQ(zq_add(a, b), zq_add(b, a));
    ASSERT_EQ(zq_mul(a, b), zq_mul(b, a));
    ASSERT_EQ(zq_mul(a, zq_add(b, c)), zq_add(zq_mul(a, b), zq_mul(a, c)));
  }
}

namespace {

bool cube_is_bijection(std::uint64_t qv) {
  const Modulus m(qv);
  std::vector<bool> hit(qv, false);
  for (std::uint64_t x = 0; x < qv; ++x) {
    const auto y = m.pow3(x);
    if (hit[y]) return false;
    hit[y] = true;
  }
  return true;
}

}  // namespace

TEST(Zq, CubePermutationFollowsGcdRule) {
  for (std::uint64_t qv : {5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 31ull, 97ull, 101ull}) {
    EXPECT_EQ(cube_is_bijection(qv), std::gcd(3ull, qv - 1) == 1) << qv;
  }
}

TEST(Zq, CubePermutationOnDefaultPrimes) {
  EXPECT_EQ(std::gcd(3ull, 167772161ull - 1), 1ull);
  EXPECT_TRUE(cube_is_bijection(167772161));
  // The Rubato prime is 1 mod 3, which is fine since it never cubes.
  EXPECT_EQ(std::gcd(3ull, 22806529ull - 1), 3ull);
  EXPECT_FALSE(cube_is_bijection(22806529));
}
