#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hhesim/sampler.hpp"
#include "hhesim/zq.hpp"

namespace hhesim {

enum class Scheme { kHera, kRubato };
enum class Order { kRowMajor, kColMajor };

std::string to_string(Scheme s);
std::string to_string(Order o);
Order flipped(Order o);

using Residues = std::vector<std::uint64_t>;

/// Constant v x v matrix applied by MixColumns / MixRows.
class MixingMatrix {
 public:
  MixingMatrix(unsigned v, std::vector<std::uint64_t> entries);
  /// Row i is `first_row` rotated right by i.
  static MixingMatrix circulant(std::span<const std::uint64_t> first_row);
  /// Default matrix for v in {4, 6, 8}.
  static MixingMatrix standard(unsigned v);

  unsigned dim() const noexcept { return v_; }
  std::uint64_t at(unsigned r, unsigned c) const { return e_[r * v_ + c]; }
  const std::vector<std::uint64_t>& entries() const noexcept { return e_; }

  friend bool operator==(const MixingMatrix&, const MixingMatrix&) = default;

 private:
  unsigned v_;
  std::vector<std::uint64_t> e_;
};

struct CipherParams {
  Scheme scheme = Scheme::kHera;
  Modulus q{17};
  unsigned n = 16;
  unsigned v = 4;
  unsigned l = 16;
  unsigned rounds = 5;
  unsigned lambda = 128;
  std::optional<double> sigma;  // Rubato only
  unsigned tail_cut = 16;
  MixingMatrix mix = MixingMatrix::standard(4);
  Residues ic;  // initial state; defaults to (1, 2, ..., n) mod q

  /// Throws ParameterError when any structural invariant fails.
  void validate() const;

  unsigned cdf_precision() const { return lambda / 2; }
  /// Round constants consumed by one keystream block.
  unsigned constants_per_block() const;
};

CipherParams hera_par128a();
CipherParams rubato_par128l();
/// Rubato with a custom state size n in {16, 36, 64}; r and l as given.
CipherParams rubato_params(unsigned n, unsigned rounds, unsigned l,
                           std::uint64_t q);
/// Replace q, reducing ic into the new ring.
CipherParams with_modulus(CipherParams p, std::uint64_t q);

/// n residues viewed as a v x v matrix, x_{r*v+c} at (r, c).
struct StateMatrix {
  Modulus mod;
  unsigned v;
  Residues elems;
  Order order = Order::kRowMajor;

  StateMatrix(const Modulus& m, unsigned dim, Residues values,
              Order o = Order::kRowMajor);

  std::uint64_t at(unsigned r, unsigned c) const { return elems[r * v + c]; }
  std::uint64_t& at(unsigned r, unsigned c) { return elems[r * v + c]; }
  /// Transposed values; the order tag is kept.
  StateMatrix transposed() const;

  friend bool operator==(const StateMatrix&, const StateMatrix&) = default;
};

struct Key {
  Residues k;
};
struct RoundConstants {
  Residues rc;
};
struct NoiseVector {
  std::vector<std::int64_t> e;
};

// Elementwise x + k * rc. Throws LengthMismatch on unequal lengths.
Residues ark(std::span<const std::uint64_t> x, std::span<const std::uint64_t> k,
             std::span<const std::uint64_t> rc, const Modulus& m);
StateMatrix ark(const StateMatrix& x, const Key& k, const RoundConstants& rc);

StateMatrix mix_columns(const StateMatrix& x, const MixingMatrix& mv);
StateMatrix mix_rows(const StateMatrix& x, const MixingMatrix& mv);
/// mix_rows(mix_columns(x)) with the streaming order tag flipped.
StateMatrix mrmc(const StateMatrix& x, const MixingMatrix& mv);
StateMatrix cube(const StateMatrix& x);
/// y_1 = x_1, y_i = x_i + x_{i-1}^2 over the flattened row-major index.
StateMatrix feistel(const StateMatrix& x);
/// First l elements in row-major order.
Residues truncate(const StateMatrix& x, unsigned l);
/// Adds signed noise; negative e_i enter as q - |e_i|.
Residues agn(std::span<const std::uint64_t> x, const NoiseVector& e,
             const Modulus& m);

/// Seed bytes for block `block_index`: nonce (<= 11 bytes, zero-padded)
/// followed by the 4-byte big-endian block index.
std::vector<std::uint8_t> block_nonce(std::span<const std::uint8_t> nonce,
                                      std::uint32_t block_index);

struct KeystreamResult {
  Residues z;
  SamplerStats rc_stats;
  SamplerStats noise_stats;
  std::vector<RoundConstants> constants;  // one entry per ARK layer
  NoiseVector noise;
};

/// Keystream generation with caller-supplied randomness; `noise_src` is
/// ignored for HERA.
KeystreamResult generate_keystream(const CipherParams& p, const Key& key,
                                   BitSource& rc_src, BitSource& noise_src,
                                   bool exclude_zero = true);

/// Keystream for one block from the AES-based XOF.
KeystreamResult keystream_block(const CipherParams& p, const Key& key,
                                std::span<const std::uint8_t> nonce,
                                std::uint32_t block_index);

Residues hera_keystream(const CipherParams& p, const Key& key,
                        std::span<const std::uint8_t> nonce,
                        std::uint32_t block_index);
Residues rubato_keystream(const CipherParams& p, const Key& key,
                          std::span<const std::uint8_t> nonce,
                          std::uint32_t block_index);

/// c_i = round(delta * m_i) + z_i mod q. Throws EncodingError when a
/// scaled coordinate does not satisfy |round(delta m_i)| < q/2.
Residues encrypt(const CipherParams& p, const Key& key,
                 std::span<const std::uint8_t> nonce, std::uint32_t block_index,
                 std::span<const double> m, double delta);
std::vector<double> decrypt(const CipherParams& p, const Key& key,
                            std::span<const std::uint8_t> nonce,
                            std::uint32_t block_index,
                            std::span<const std::uint64_t> c, double delta);

/// Centered representative in (-q/2, q/2].
std::int64_t center(std::uint64_t x, const Modulus& m);

}  // namespace hhesim
