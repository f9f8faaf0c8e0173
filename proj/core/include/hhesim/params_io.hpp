#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hhesim/cipher.hpp"

namespace hhesim {

// Parameter-set text format, one `key = value` per line, '#' comments:
//
//   scheme = rubato
//   q = 22806529
//   n = 64
//   r = 2
//   l = 60
//   lambda = 128
//   sigma = 1.6
//   tail_cut = 16
//   mix_circulant = 3 1 4 1 2 1 1 1     (or v lines of `mix_row = ...`)
//   ic = 1 2 3 ...                       (optional, default 1..n)
CipherParams parse_params(std::string_view text);
CipherParams load_params(const std::filesystem::path& path);
std::string format_params(const CipherParams& p);

/// Hex string (optional 0x prefix, even length) to bytes. Throws
/// ParameterError on malformed input.
std::vector<std::uint8_t> parse_hex(std::string_view hex);
std::string to_hex(std::span<const std::uint8_t> bytes);

/// Key material from hex: the bytes are split into n big-endian words of
/// ceil(bits/8) bytes each, every word reduced mod q. A shorter string is
/// expanded through the XOF (domain tag 0x03) with rejection sampling.
Key key_from_hex(const CipherParams& p, std::string_view hex);

enum class KeystreamFormat { kDecimal, kBinary };

/// Decimal: one integer per line. Binary: each element as a little-endian
/// word of ceil(bits/8) bytes.
void write_keystream(std::ostream& os, std::span<const std::uint64_t> z,
                     const Modulus& q, KeystreamFormat fmt);

}  // namespace hhesim
