#pragma once
// Straightforward FIPS-197 AES-128, written from the standard's pseudocode.
// Slow and table-free on purpose: it only serves as an oracle.

#include <array>
#include <cstdint>

namespace ref {

using Block = std::array<std::uint8_t, 16>;

inline std::uint8_t xtime(std::uint8_t x) {
  return static_cast<std::uint8_t>((x << 1) ^ ((x & 0x80) ? 0x1b : 0));
}

inline std::uint8_t gmul(std::uint8_t a, std::uint8_t b) {
  std::uint8_t p = 0;
  while (b) {
    if (b & 1) p ^= a;
    a = xtime(a);
    b >>= 1;
  }
  return p;
}

// S-box from the multiplicative inverse and the affine map.
inline std::uint8_t sbox(std::uint8_t x) {
  std::uint8_t inv = 0;
  if (x) {
    // x^254 = x^-1 in GF(2^8)
    std::uint8_t r = 1, b = x;
    for (int e = 254; e; e >>= 1) {
      if (e & 1) r = gmul(r, b);
      b = gmul(b, b);
    }
    inv = r;
  }
  std::uint8_t s = inv;
  for (int i = 1; i <= 4; ++i)
    s ^= static_cast<std::uint8_t>((inv << i) | (inv >> (8 - i)));
  return s ^ 0x63;
}

inline Block encrypt(const Block& key, const Block& in) {
  std::array<std::uint8_t, 176> w{};
  for (int i = 0; i < 16; ++i) w[i] = key[i];
  std::uint8_t rcon = 1;
  for (int i = 4; i < 44; ++i) {
    std::uint8_t t[4] = {w[4 * i - 4], w[4 * i - 3], w[4 * i - 2], w[4 * i - 1]};
    if (i % 4 == 0) {
      std::uint8_t t0 = t[0];
      t[0] = sbox(t[1]) ^ rcon;
      t[1] = sbox(t[2]);
      t[2] = sbox(t[3]);
      t[3] = sbox(t0);
      rcon = xtime(rcon);
    }
    for (int j = 0; j < 4; ++j) w[4 * i + j] = w[4 * (i - 4) + j] ^ t[j];
  }
  Block s = in;
  auto add_round_key = [&](int r) {
    for (int i = 0; i < 16; ++i) s[i] ^= w[16 * r + i];
  };
  add_round_key(0);
  for (int r = 1; r <= 10; ++r) {
    for (auto& b : s) b = sbox(b);
    // ShiftRows; state byte (row, col) lives at s[4*col + row].
    Block t = s;
    for (int row = 1; row < 4; ++row)
      for (int col = 0; col < 4; ++col) s[4 * col + row] = t[4 * ((col + row) % 4) + row];
    if (r != 10) {
      for (int col = 0; col < 4; ++col) {
        std::uint8_t* c = &s[4 * col];
        std::uint8_t a0 = c[0], a1 = c[1], a2 = c[2], a3 = c[3];
        c[0] = gmul(a0, 2) ^ gmul(a1, 3) ^ a2 ^ a3;
        c[1] = a0 ^ gmul(a1, 2) ^ gmul(a2, 3) ^ a3;
        c[2] = a0 ^ a1 ^ gmul(a2, 2) ^ gmul(a3, 3);
        c[3] = gmul(a0, 3) ^ a1 ^ a2 ^ gmul(a3, 2);
      }
    }
    add_round_key(r);
  }
  return s;
}

}  // namespace ref
