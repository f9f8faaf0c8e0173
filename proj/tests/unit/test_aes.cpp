#include <gtest/gtest.h>

#include <random>

#include "hhesim/aes128.hpp"
#include "ref_aes.hpp"

using namespace hhesim;

namespace {

AesBlock from_hex(const char* h) {
  AesBlock b{};
  for (int i = 0; i < 16; ++i) {
    unsigned v = 0;
    std::sscanf(h + 2 * i, "%2x", &v);
    b[i] = static_cast<std::uint8_t>(v);
  }
  return b;
}

}  // namespace

TEST(ReferenceAes, Fips197AppendixC1) {
  const auto key = from_hex("000102030405060708090a0b0c0d0e0f");
  const auto pt = from_hex("00112233445566778899aabbccddeeff");
  EXPECT_EQ(ref::encrypt(key, pt), from_hex("69c4e0d86a7b0430d8cdb78070b4c55a"));
}

TEST(ReferenceAes, Fips197AppendixB) {
  const auto key = from_hex("2b7e151628aed2a6abf7158809cf4f3c");
  const auto pt = from_hex("3243f6a8885a308d313198a2e0370734");
  EXPECT_EQ(ref::encrypt(key, pt), from_hex("3925841d02dc09fbdc118597196a0b32"));
}

TEST(Aes128, KnownAnswer) {
  Aes128 aes(from_hex("000102030405060708090a0b0c0d0e0f"));
  EXPECT_EQ(aes.encrypt(from_hex("00112233445566778899aabbccddeeff")),
            from_hex("69c4e0d86a7b0430d8cdb78070b4c55a"));
}

TEST(Aes128, AgreesWithReferenceOnRandomInputs) {
  std::mt19937 rng(5);
  for (int i = 0; i < 200; ++i) {
    AesBlock key, pt;
    for (auto& b : key) b = static_cast<std::uint8_t>(rng());
    for (auto& b : pt) b = static_cast<std::uint8_t>(rng());
    Aes128 aes(key);
    ASSERT_EQ(aes.encrypt(pt), ref::encrypt(key, pt));
  }
}

TEST(Aes128, MoveKeepsKey) {
  const auto key = from_hex("000102030405060708090a0b0c0d0e0f");
  Aes128 a(key);
  Aes128 b(std::move(a));
  EXPECT_EQ(b.encrypt(from_hex("00112233445566778899aabbccddeeff")),
            from_hex("69c4e0d86a7b0430d8cdb78070b4c55a"));
}
