#include "hhesim/cipher.hpp"

#include <cmath>

#include "hhesim/error.hpp"

namespace hhesim {

std::string to_string(Scheme s) { return s == Scheme::kHera ? "hera" : "rubato"; }
std::string to_string(Order o) { return o == Order::kRowMajor ? "ROW" : "COL"; }
Order flipped(Order o) {
  return o == Order::kRowMajor ? Order::kColMajor : Order::kRowMajor;
}

MixingMatrix::MixingMatrix(unsigned v, std::vector<std::uint64_t> entries)
    : v_(v), e_(std::move(entries)) {
  if (v == 0 || e_.size() != static_cast<std::size_t>(v) * v)
    throw ParameterError("mixing matrix must be v x v");
  for (auto x : e_)
    if (x > 15) throw ParameterError("mixing matrix entries must be <= 15");
}

MixingMatrix MixingMatrix::circulant(std::span<const std::uint64_t> first_row) {
  const auto v = static_cast<unsigned>(first_row.size());
  std::vector<std::uint64_t> e(static_cast<std::size_t>(v) * v);
  for (unsigned r = 0; r < v; ++r)
    for (unsigned c = 0; c < v; ++c) e[r * v + c] = first_row[(c + v - r) % v];
  return MixingMatrix(v, std::move(e));
}

MixingMatrix MixingMatrix::standard(unsigned v) {
  switch (v) {
    case 4: {
      const std::uint64_t row[] = {2, 3, 1, 1};
      return circulant(row);
    }
    case 6: {
      const std::uint64_t row[] = {2, 3, 1, 1, 1, 1};
      return circulant(row);
    }
    case 8: {
      const std::uint64_t row[] = {3, 1, 4, 1, 2, 1, 1, 1};
      return circulant(row);
    }
    default:
      throw ParameterError("no default mixing matrix for v = " +
                           std::to_string(v));
  }
}

void CipherParams::validate() const {
  if (v * v != n) throw ParameterError("v^2 must equal n");
  if (scheme == Scheme::kHera) {
    if (n != 16) throw ParameterError("HERA requires n = 16");
    if (l != n) throw ParameterError("HERA requires l = n");
    if (sigma) throw ParameterError("HERA takes no sigma");
  } else {
    if (n != 16 && n != 36 && n != 64)
      throw ParameterError("Rubato requires n in {16, 36, 64}");
    if (!sigma || !(*sigma > 0))
      throw ParameterError("Rubato requires sigma > 0");
    if (tail_cut < static_cast<unsigned>(std::ceil(8 * *sigma)))
      throw ParameterError("tail_cut must be >= ceil(8 sigma)");
    if (cdf_precision() < 16 || cdf_precision() > 128)
      throw ParameterError("lambda/2 must lie in [16, 128]");
  }
  if (l < 1 || l > n) throw ParameterError("l must lie in [1, n]");
  if (rounds < 1) throw ParameterError("r must be >= 1");
  if (mix.dim() != v) throw ParameterError("mixing matrix dimension != v");
  if (v == 4 && mix != MixingMatrix::standard(4))
    throw ParameterError("M_4 is fixed");
  if (ic.size() != n) throw ParameterError("ic must have n entries");
  for (auto x : ic)
    if (x >= q.value()) throw ParameterError("ic entries must be < q");
}

unsigned CipherParams::constants_per_block() const {
  return scheme == Scheme::kHera ? (rounds + 1) * n : rounds * n + l;
}

namespace {

Residues counting_ic(unsigned n, const Modulus& q) {
  Residues ic(n);
  for (unsigned i = 0; i < n; ++i) ic[i] = q.reduce(i + 1);
  return ic;
}

}  // namespace

CipherParams hera_par128a() {
  CipherParams p;
  p.scheme = Scheme::kHera;
  p.q = Modulus(167772161);
  p.n = 16;
  p.v = 4;
  p.l = 16;
  p.rounds = 5;
  p.lambda = 128;
  p.mix = MixingMatrix::standard(4);
  p.ic = counting_ic(16, p.q);
  return p;
}

CipherParams rubato_params(unsigned n, unsigned rounds, unsigned l,
                           std::uint64_t q) {
  CipherParams p;
  p.scheme = Scheme::kRubato;
  p.q = Modulus(q);
  p.n = n;
  p.v = static_cast<unsigned>(std::lround(std::sqrt(n)));
  p.l = l;
  p.rounds = rounds;
  p.lambda = 128;
  p.sigma = 1.6;
  p.tail_cut = 16;
  p.mix = MixingMatrix::standard(p.v);
  p.ic = counting_ic(n, p.q);
  p.validate();
  return p;
}

CipherParams rubato_par128l() { return rubato_params(64, 2, 60, 22806529); }

CipherParams with_modulus(CipherParams p, std::uint64_t q) {
  p.q = Modulus(q);
  for (auto& x : p.ic) x = p.q.reduce(x);
  return p;
}

StateMatrix::StateMatrix(const Modulus& m, unsigned dim, Residues values,
                         Order o)
    : mod(m), v(dim), elems(std::move(values)), order(o) {
  if (elems.size() != static_cast<std::size_t>(v) * v)
    throw LengthMismatch("state length must be v^2");
}

StateMatrix StateMatrix::transposed() const {
  StateMatrix t = *this;
  for (unsigned r = 0; r < v; ++r)
    for (unsigned c = 0; c < v; ++c) t.at(c, r) = at(r, c);
  return t;
}

Residues ark(std::span<const std::uint64_t> x, std::span<const std::uint64_t> k,
             std::span<const std::uint64_t> rc, const Modulus& m) {
  if (x.size() != k.size() || x.size() != rc.size())
    throw LengthMismatch("ark operands differ in length");
  Residues y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] = m.add(m.reduce(x[i]), m.mul(m.reduce(k[i]), m.reduce(rc[i])));
  return y;
}

StateMatrix ark(const StateMatrix& x, const Key& k, const RoundConstants& rc) {
  StateMatrix y = x;
  y.elems = ark(x.elems, k.k, rc.rc, x.mod);
  return y;
}

StateMatrix mix_columns(const StateMatrix& x, const MixingMatrix& mv) {
  if (mv.dim() != x.v) throw LengthMismatch("mixing matrix dimension != v");
  const auto& m = x.mod;
  StateMatrix y = x;
  for (unsigned c = 0; c < x.v; ++c)
    for (unsigned r = 0; r < x.v; ++r) {
      std::uint64_t acc = 0;
      for (unsigned j = 0; j < x.v; ++j)
        acc = m.add(acc, m.mul(mv.at(r, j), x.at(j, c)));
      y.at(r, c) = acc;
    }
  return y;
}

StateMatrix mix_rows(const StateMatrix& x, const MixingMatrix& mv) {
  if (mv.dim() != x.v) throw LengthMismatch("mixing matrix dimension != v");
  const auto& m = x.mod;
  StateMatrix y = x;
  for (unsigned r = 0; r < x.v; ++r)
    for (unsigned c = 0; c < x.v; ++c) {
      std::uint64_t acc = 0;
      for (unsigned j = 0; j < x.v; ++j)
        acc = m.add(acc, m.mul(x.at(r, j), mv.at(c, j)));
      y.at(r, c) = acc;
    }
  return y;
}

StateMatrix mrmc(const StateMatrix& x, const MixingMatrix& mv) {
  StateMatrix y = mix_rows(mix_columns(x, mv), mv);
  y.order = flipped(x.order);
  return y;
}

StateMatrix cube(const StateMatrix& x) {
  StateMatrix y = x;
  for (auto& e : y.elems) e = x.mod.pow3(e);
  return y;
}

StateMatrix feistel(const StateMatrix& x) {
  StateMatrix y = x;
  const auto& m = x.mod;
  for (std::size_t i = 1; i < x.elems.size(); ++i)
    y.elems[i] = m.add(x.elems[i], m.mul(x.elems[i - 1], x.elems[i - 1]));
  return y;
}

Residues truncate(const StateMatrix& x, unsigned l) {
  if (l < 1 || l > x.elems.size()) throw ParameterError("l out of range");
  return Residues(x.elems.begin(), x.elems.begin() + l);
}

Residues agn(std::span<const std::uint64_t> x, const NoiseVector& e,
             const Modulus& m) {
  if (x.size() != e.e.size()) throw LengthMismatch("noise length != l");
  Residues y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] = m.add(x[i], m.reduce_signed(e.e[i]));
  return y;
}

std::vector<std::uint8_t> block_nonce(std::span<const std::uint8_t> nonce,
                                      std::uint32_t block_index) {
  if (nonce.size() > 11)
    throw ParameterError("nonce must be at most 11 bytes");
  std::vector<std::uint8_t> out(15, 0);
  std::copy(nonce.begin(), nonce.end(), out.begin());
  for (int i = 0; i < 4; ++i)
    out[11 + i] = static_cast<std::uint8_t>(block_index >> (24 - 8 * i));
  return out;
}

namespace {

RoundConstants draw_constants(BitSource& src, const Modulus& q, unsigned count,
                              bool exclude_zero, SamplerStats& st) {
  RoundConstants rc;
  rc.rc.reserve(count);
  for (unsigned i = 0; i < count; ++i)
    rc.rc.push_back(rejection_sample_uniform(src, q, exclude_zero, &st).value());
  return rc;
}

}  // namespace

KeystreamResult generate_keystream(const CipherParams& p, const Key& key,
                                   BitSource& rc_src, BitSource& noise_src,
                                   bool exclude_zero) {
  p.validate();
  if (key.k.size() != p.n) throw LengthMismatch("key length != n");
  for (auto x : key.k)
    if (x >= p.q.value()) throw ParameterError("key entries must be < q");

  KeystreamResult out;
  auto next_rc = [&](unsigned count) -> const RoundConstants& {
    out.constants.push_back(
        draw_constants(rc_src, p.q, count, exclude_zero, out.rc_stats));
    return out.constants.back();
  };

  StateMatrix x(p.q, p.v, p.ic);
  x = ark(x, key, next_rc(p.n));
  const bool hera = p.scheme == Scheme::kHera;
  auto nonlinear = [&](const StateMatrix& s) {
    return hera ? cube(s) : feistel(s);
  };
  for (unsigned i = 1; i < p.rounds; ++i) {
    x = nonlinear(mrmc(x, p.mix));
    x = ark(x, key, next_rc(p.n));
  }
  x = mrmc(nonlinear(mrmc(x, p.mix)), p.mix);

  if (hera) {
    x = ark(x, key, next_rc(p.n));
    out.z = x.elems;
    return out;
  }

  // Final ARK only touches the l lanes that survive truncation.
  const auto& rc = next_rc(p.l);
  Residues head = truncate(x, p.l);
  head = ark(head, std::span(key.k).first(p.l), rc.rc, p.q);

  // Building the table dominates a block, so keep the last one per thread.
  thread_local CdfTable cached;
  if (cached.entries.empty() || cached.sigma != *p.sigma ||
      cached.precision_bits != p.cdf_precision() || cached.tail_cut != p.tail_cut)
    cached = build_cdf_table(*p.sigma, p.cdf_precision(), p.tail_cut);
  const CdfTable& table = cached;
  out.noise.e.reserve(p.l);
  for (unsigned i = 0; i < p.l; ++i)
    out.noise.e.push_back(
        sample_discrete_gaussian(noise_src, table, &out.noise_stats));
  out.z = agn(head, out.noise, p.q);
  return out;
}

KeystreamResult keystream_block(const CipherParams& p, const Key& key,
                                std::span<const std::uint8_t> nonce,
                                std::uint32_t block_index) {
  const auto seed = block_nonce(nonce, block_index);
  XofStream rc(seed, DomainTag::kRoundConstant);
  XofStream noise(seed, DomainTag::kNoise);
  return generate_keystream(p, key, rc, noise);
}

Residues hera_keystream(const CipherParams& p, const Key& key,
                        std::span<const std::uint8_t> nonce,
                        std::uint32_t block_index) {
  if (p.scheme != Scheme::kHera) throw ParameterError("params are not HERA");
  return keystream_block(p, key, nonce, block_index).z;
}

Residues rubato_keystream(const CipherParams& p, const Key& key,
                          std::span<const std::uint8_t> nonce,
                          std::uint32_t block_index) {
  if (p.scheme != Scheme::kRubato)
    throw ParameterError("params are not Rubato");
  return keystream_block(p, key, nonce, block_index).z;
}

std::int64_t center(std::uint64_t x, const Modulus& m) {
  const std::uint64_t q = m.value();
  x = m.reduce(x);
  // (-q/2, q/2]: for odd q the upper bound is (q-1)/2.
  return x > q / 2 ? static_cast<std::int64_t>(x) - static_cast<std::int64_t>(q)
                   : static_cast<std::int64_t>(x);
}

Residues encrypt(const CipherParams& p, const Key& key,
                 std::span<const std::uint8_t> nonce, std::uint32_t block_index,
                 std::span<const double> m, double delta) {
  if (m.size() != p.l) throw LengthMismatch("message length != l");
  const Residues z = keystream_block(p, key, nonce, block_index).z;
  const double half = static_cast<double>(p.q.value()) / 2;
  Residues c(p.l);
  for (unsigned i = 0; i < p.l; ++i) {
    const double s = std::round(delta * m[i]);
    if (!(std::fabs(s) < half))
      throw EncodingError("scaled message coordinate exceeds q/2");
    c[i] = p.q.add(p.q.reduce_signed(static_cast<std::int64_t>(s)), z[i]);
  }
  return c;
}

std::vector<double> decrypt(const CipherParams& p, const Key& key,
                            std::span<const std::uint8_t> nonce,
                            std::uint32_t block_index,
                            std::span<const std::uint64_t> c, double delta) {
  if (c.size() != p.l) throw LengthMismatch("ciphertext length != l");
  const Residues z = keystream_block(p, key, nonce, block_index).z;
  std::vector<double> m(p.l);
  for (unsigned i = 0; i < p.l; ++i)
    m[i] = static_cast<double>(center(p.q.sub(p.q.reduce(c[i]), z[i]), p.q)) /
           delta;
  return m;
}

}  // namespace hhesim
