#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hhesim/aes128.hpp"
#include "hhesim/zq.hpp"

namespace hhesim {

using u128 = unsigned __int128;

/// Domain tags separating the two consumers of XOF output.
enum class DomainTag : std::uint8_t { kRoundConstant = 0x01, kNoise = 0x02 };

/// Source of uniformly random bits, consumed most-significant-first.
class BitSource {
 public:
  virtual ~BitSource() = default;
  /// Next `n` bits (n <= 64) as an unsigned integer, first bit in the MSB.
  virtual std::uint64_t take(unsigned n) = 0;
  virtual std::uint64_t bits_consumed() const = 0;
};

/// AES-128 counter-mode extendable output.
///
/// Block i of the stream is AES-128 under the seed of the 128-bit
/// big-endian encoding of i. Output is a pure function of the seed and the
/// number of bits consumed so far.
class XofStream final : public BitSource {
 public:
  /// Seed = nonce zero-padded to 16 bytes with the final byte replaced by
  /// `tag`. Throws ParameterError when the nonce exceeds 16 bytes.
  XofStream(std::span<const std::uint8_t> nonce, std::uint8_t tag);
  XofStream(std::span<const std::uint8_t> nonce, DomainTag tag)
      : XofStream(nonce, static_cast<std::uint8_t>(tag)) {}

  std::uint64_t take(unsigned n) override;
  std::uint64_t bits_consumed() const override { return consumed_; }

  /// Next `nbits` bits as individual booleans.
  std::vector<bool> squeeze_bits(std::size_t nbits);

  const AesBlock& seed() const noexcept { return seed_; }
  std::uint64_t blocks_generated() const noexcept { return counter_; }

 private:
  bool next_bit();
  void refill();

  AesBlock seed_;
  Aes128 aes_;
  std::uint64_t counter_ = 0;
  AesBlock block_{};
  unsigned pos_ = 128;  // bit position within block_; 128 = exhausted
  std::uint64_t consumed_ = 0;
};

/// Convenience wrapper matching the other sampler entry points.
XofStream xof_init(std::span<const std::uint8_t> nonce, std::uint8_t tag);

struct SamplerStats {
  std::uint64_t draws_attempted = 0;
  std::uint64_t draws_accepted = 0;
  std::uint64_t bits_consumed = 0;
};

inline constexpr std::uint64_t kMaxRejectionAttempts = 1'000'000;

/// Draws ceil(log2 q)-bit candidates until one lands in [0, q), skipping
/// zero when `exclude_zero`. Throws StreamFault after 10^6 rejections.
ZqElement rejection_sample_uniform(BitSource& src, const Modulus& m,
                                   bool exclude_zero,
                                   SamplerStats* stats = nullptr);

/// Cumulative distribution of |e| for a discrete Gaussian, stored as
/// fixed-point integers of `precision_bits` bits.
struct CdfTable {
  double sigma = 0;
  unsigned precision_bits = 0;
  unsigned tail_cut = 0;
  /// entries[i] ~ 2^precision_bits * P(|e| <= i); the last one is 2^p - 1.
  std::vector<u128> entries;

  u128 max_value() const noexcept;
};

/// Throws ParameterError for sigma <= 0, precision outside [16, 128] or
/// tail_cut < ceil(8 sigma).
CdfTable build_cdf_table(double sigma, unsigned precision_bits,
                         unsigned tail_cut);

/// Inverse-CDF sample; one extra sign bit is drawn for nonzero magnitudes.
std::int64_t sample_discrete_gaussian(BitSource& src, const CdfTable& table,
                                      SamplerStats* stats = nullptr);

/// Exact magnitude lookup shared by the sampler and the pipeline model.
unsigned cdf_lookup(const CdfTable& table, u128 u);

// Binary table format: "HCDF" magic, u16 version, f64 sigma, u16 precision,
// u16 tail_cut, u16 entry count, then entries as big-endian integers of
// ceil(precision/8) bytes. Multi-byte header fields are big-endian.
std::vector<std::uint8_t> serialize_cdf_table(const CdfTable& table);
CdfTable deserialize_cdf_table(std::span<const std::uint8_t> bytes);
void write_cdf_table(const std::filesystem::path& path, const CdfTable& table);
CdfTable read_cdf_table(const std::filesystem::path& path);

}  // namespace hhesim
