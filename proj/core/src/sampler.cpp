#include "hhesim/sampler.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "hhesim/error.hpp"

namespace hhesim {

namespace {

AesBlock make_seed(std::span<const std::uint8_t> nonce, std::uint8_t tag) {
  if (nonce.size() > 16) {
    throw ParameterError("XOF nonce longer than 16 bytes");
  }
  AesBlock seed{};
  std::copy(nonce.begin(), nonce.end(), seed.begin());
  seed[15] = tag;
  return seed;
}

}  // namespace

XofStream::XofStream(std::span<const std::uint8_t> nonce, std::uint8_t tag)
    : seed_(make_seed(nonce, tag)), aes_(seed_) {}

void XofStream::refill() {
  AesBlock ctr{};
  std::uint64_t c = counter_;
  for (int i = 15; i >= 8; --i) {
    ctr[i] = static_cast<std::uint8_t>(c & 0xff);
    c >>= 8;
  }
  block_ = aes_.encrypt(ctr);
  ++counter_;
  pos_ = 0;
}

bool XofStream::next_bit() {
  if (pos_ == 128) refill();
  const bool bit = (block_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1;
  ++pos_;
  ++consumed_;
  return bit;
}

std::uint64_t XofStream::take(unsigned n) {
  if (n > 64) throw ParameterError("take() returns at most 64 bits");
  std::uint64_t out = 0;
  while (n > 0) {
    if (pos_ == 128) refill();
    const unsigned off = pos_ & 7;
    const unsigned k = std::min(n, 8 - off);
    const unsigned bits = (block_[pos_ >> 3] >> (8 - off - k)) & ((1u << k) - 1);
    out = (out << k) | bits;
    pos_ += k;
    consumed_ += k;
    n -= k;
  }
  return out;
}

std::vector<bool> XofStream::squeeze_bits(std::size_t nbits) {
  std::vector<bool> out;
  out.reserve(nbits);
  for (std::size_t i = 0; i < nbits; ++i) out.push_back(next_bit());
  return out;
}

XofStream xof_init(std::span<const std::uint8_t> nonce, std::uint8_t tag) {
  return XofStream(nonce, tag);
}

ZqElement rejection_sample_uniform(BitSource& src, const Modulus& m,
                                   bool exclude_zero, SamplerStats* stats) {
  const unsigned width = m.bits();
  for (std::uint64_t attempt = 0; attempt < kMaxRejectionAttempts; ++attempt) {
    const std::uint64_t c = src.take(width);
    if (stats != nullptr) {
      ++stats->draws_attempted;
      stats->bits_consumed += width;
    }
    if (c >= m.value() || (exclude_zero && c == 0)) continue;
    if (stats != nullptr) ++stats->draws_accepted;
    return ZqElement(c, m);
  }
  throw StreamFault("rejection sampler exceeded 10^6 attempts");
}

u128 CdfTable::max_value() const noexcept {
  return precision_bits >= 128 ? ~u128{0}
                               : ((u128{1} << precision_bits) - 1);
}

CdfTable build_cdf_table(double sigma, unsigned precision_bits,
                         unsigned tail_cut) {
  if (!(sigma > 0) || !std::isfinite(sigma)) {
    throw ParameterError("CDF sigma must be positive");
  }
  if (precision_bits < 16 || precision_bits > 128) {
    throw ParameterError("CDF precision must lie in [16, 128]");
  }
  if (static_cast<double>(tail_cut) < std::ceil(8.0 * sigma)) {
    throw ParameterError("CDF tail cut below ceil(8 sigma)");
  }
  using Real = boost::multiprecision::cpp_bin_float_50;
  const Real s(sigma);
  std::vector<Real> rho(tail_cut + 1);
  for (unsigned x = 0; x <= tail_cut; ++x) {
    rho[x] = exp(-Real(x) * Real(x) / (2 * s * s));
  }
  Real total = rho[0];
  for (unsigned x = 1; x <= tail_cut; ++x) total += 2 * rho[x];

  CdfTable t;
  t.sigma = sigma;
  t.precision_bits = precision_bits;
  t.tail_cut = tail_cut;
  const u128 cap = t.max_value();
  const Real scale = ldexp(Real(1), static_cast<int>(precision_bits));
  Real cum = 0;
  for (unsigned i = 0; i <= tail_cut; ++i) {
    cum += (i == 0 ? rho[0] : 2 * rho[i]);
    Real v = round(scale * cum / total);
    u128 e;
    if (v >= scale - 1) {
      e = cap;
    } else {
      // Split into two 64-bit halves; cpp_bin_float converts exactly.
      const Real two64 = ldexp(Real(1), 64);
      const Real hi = floor(v / two64);
      const Real lo = v - hi * two64;
      e = (u128{hi.convert_to<std::uint64_t>()} << 64) |
          lo.convert_to<std::uint64_t>();
    }
    t.entries.push_back(e);
  }
  t.entries.back() = cap;
  return t;
}

unsigned cdf_lookup(const CdfTable& table, u128 u) {
  for (unsigned i = 0; i < table.entries.size(); ++i) {
    if (u < table.entries[i]) return i;
  }
  return table.tail_cut;
}

std::int64_t sample_discrete_gaussian(BitSource& src, const CdfTable& table,
                                      SamplerStats* stats) {
  u128 u = 0;
  unsigned left = table.precision_bits;
  while (left > 0) {
    const unsigned chunk = left > 64 ? 64 : left;
    u = (u << chunk) | src.take(chunk);
    left -= chunk;
  }
  std::uint64_t used = table.precision_bits;
  const unsigned mag = cdf_lookup(table, u);
  std::int64_t out = static_cast<std::int64_t>(mag);
  if (mag > 0) {
    if (src.take(1) == 1) out = -out;
    ++used;
  }
  if (stats != nullptr) {
    ++stats->draws_attempted;
    ++stats->draws_accepted;
    stats->bits_consumed += used;
  }
  return out;
}

namespace {

constexpr std::uint8_t kMagic[4] = {'H', 'C', 'D', 'F'};
constexpr std::uint16_t kVersion = 1;

void put_be(std::vector<std::uint8_t>& out, u128 v, unsigned bytes) {
  for (unsigned i = bytes; i-- > 0;) {
    out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
  }
}

u128 get_be(std::span<const std::uint8_t> in, std::size_t& pos,
            unsigned bytes) {
  if (pos + bytes > in.size()) throw IoError("truncated CDF table file");
  u128 v = 0;
  for (unsigned i = 0; i < bytes; ++i) v = (v << 8) | in[pos++];
  return v;
}

}  // namespace

std::vector<std::uint8_t> serialize_cdf_table(const CdfTable& table) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_be(out, kVersion, 2);
  put_be(out, std::bit_cast<std::uint64_t>(table.sigma), 8);
  put_be(out, table.precision_bits, 2);
  put_be(out, table.tail_cut, 2);
  put_be(out, table.entries.size(), 2);
  const unsigned width = (table.precision_bits + 7) / 8;
  for (u128 e : table.entries) put_be(out, e, width);
  return out;
}

CdfTable deserialize_cdf_table(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw IoError("not a CDF table file (bad magic)");
  }
  std::size_t pos = 4;
  if (get_be(bytes, pos, 2) != kVersion) {
    throw IoError("unsupported CDF table version");
  }
  CdfTable t;
  t.sigma = std::bit_cast<double>(
      static_cast<std::uint64_t>(get_be(bytes, pos, 8)));
  t.precision_bits = static_cast<unsigned>(get_be(bytes, pos, 2));
  t.tail_cut = static_cast<unsigned>(get_be(bytes, pos, 2));
  const auto count = static_cast<std::size_t>(get_be(bytes, pos, 2));
  if (t.precision_bits < 16 || t.precision_bits > 128 ||
      count != t.tail_cut + 1) {
    throw IoError("inconsistent CDF table header");
  }
  const unsigned width = (t.precision_bits + 7) / 8;
  for (std::size_t i = 0; i < count; ++i) {
    t.entries.push_back(get_be(bytes, pos, width));
  }
  if (pos != bytes.size()) throw IoError("trailing bytes in CDF table file");
  return t;
}

void write_cdf_table(const std::filesystem::path& path, const CdfTable& table) {
  const auto bytes = serialize_cdf_table(table);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
}

CdfTable read_cdf_table(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return deserialize_cdf_table(bytes);
}

}  // namespace hhesim
