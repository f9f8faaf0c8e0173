#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>

#include "cli.hpp"
#include "hhesim/pipesim.hpp"
#include "hhesim/sampler.hpp"

namespace hhesim::cli {

namespace {

enum class Verdict { kPass, kFail, kSkip };

struct Suite {
  Verdict verdict = Verdict::kPass;
  std::string detail;
};

void print(const std::string& name, const Suite& s) {
  const char* tag = s.verdict == Verdict::kPass ? "PASS" : s.verdict == Verdict::kFail ? "FAIL" : "SKIP";
  std::printf("%-4s  %-28s %s\n", tag, name.c_str(), s.detail.c_str());
  std::fflush(stdout);
}

Suite ring_laws(const CipherParams& p, std::mt19937_64& rng) {
  const auto& m = p.q;
  std::uint64_t bad = 0;
  for (int i = 0; i < 100000; ++i) {
    const std::uint64_t a = rng() % m.value(), b = rng() % m.value(), c = rng() % m.value();
    bad += m.add(a, b) != m.add(b, a);
    bad += m.mul(a, m.mul(b, c)) != m.mul(m.mul(a, b), c);
    bad += m.mul(a, m.add(b, c)) != m.add(m.mul(a, b), m.mul(a, c));
    bad += m.sub(m.add(a, b), b) != a;
    bad += m.pow3(a) != static_cast<std::uint64_t>(
                            static_cast<unsigned __int128>(a) * a % m.value() * a % m.value());
  }
  return {bad ? Verdict::kFail : Verdict::kPass, std::to_string(bad) + " violations over 1e5 triples"};
}

// MixRows uses `rows`, MixColumns the parameter matrix; they match unless a typo is injected.
Suite transpose_invariance(const CipherParams& p, const MixingMatrix& rows, std::mt19937_64& rng) {
  const auto ref = MixingMatrix::standard(p.v);
  std::uint64_t bad = 0;
  for (int i = 0; i < 10000; ++i) {
    Residues e(p.n);
    for (auto& x : e) x = rng() % p.q.value();
    const StateMatrix x(p.q, p.v, e);
    auto datapath = [&](const StateMatrix& s) { return mix_rows(mix_columns(s, p.mix), rows); };
    const auto y = datapath(x);
    bad += datapath(x.transposed()).elems != y.transposed().elems;
    bad += mrmc(x, p.mix).elems != y.elems;
    if (p.mix.entries() == ref.entries()) {
      // Plain M X M^T against the reference matrix.
      for (unsigned r = 0; r < p.v; ++r)
        for (unsigned c = 0; c < p.v; ++c) {
          unsigned __int128 acc = 0;
          for (unsigned a = 0; a < p.v; ++a)
            for (unsigned b = 0; b < p.v; ++b)
              acc += static_cast<unsigned __int128>(ref.at(r, a)) * x.at(a, b) * ref.at(c, b);
          bad += static_cast<std::uint64_t>(acc % p.q.value()) != y.at(r, c);
        }
    }
  }
  return {bad ? Verdict::kFail : Verdict::kPass, std::to_string(bad) + " mismatches over 1e4 states"};
}

Suite differential(const CipherParams& p, unsigned trials, std::mt19937_64& rng) {
  unsigned bad = 0, runs = 0;
  for (auto v : {Variant::kD1Baseline, Variant::kD2Decoupled, Variant::kD3Full, Variant::kVectorAblation}) {
    const auto cfg = HwConfig::defaults(v, p);
    for (unsigned t = 0; t < trials; ++t) {
      Key key;
      for (unsigned i = 0; i < p.n; ++i) key.k.push_back(rng() % p.q.value());
      std::vector<std::uint8_t> nonce(8);
      for (auto& b : nonce) b = static_cast<std::uint8_t>(rng());
      ++runs;
      try {
        const auto res = simulate(cfg, key, nonce, cfg.lanes);
        std::vector<KeystreamResult> golden;
        for (unsigned b = 0; b < cfg.lanes; ++b) golden.push_back(keystream_block(p, key, nonce, b));
        const auto vr = verify_trace(res.trace, p, key, golden);
        bad += !vr.ok;
      } catch (const Error&) {
        ++bad;
      }
    }
  }
  return {bad ? Verdict::kFail : Verdict::kPass,
          std::to_string(runs) + " traces (d1/d2/d3/vector), " + std::to_string(bad) + " divergent"};
}

Suite sampler_stats(const CipherParams& p) {
  const std::vector<std::uint8_t> nonce{0x5a};
  XofStream src(nonce, DomainTag::kRoundConstant);
  const Modulus q17(17);
  std::vector<double> counts(17, 0);
  for (int i = 0; i < 100000; ++i) counts[rejection_sample_uniform(src, q17, false).value()] += 1;
  double chi = 0;
  for (double c : counts) chi += (c - 100000 / 17.0) * (c - 100000 / 17.0) / (100000 / 17.0);
  const double pval = boost::math::cdf(boost::math::complement(boost::math::chi_squared(16), chi));

  SamplerStats st;
  for (int i = 0; i < 20000; ++i) rejection_sample_uniform(src, p.q, true, &st);
  const double attempts = static_cast<double>(st.draws_attempted) / st.draws_accepted;
  const double expect = std::ldexp(1.0, p.q.bits()) / static_cast<double>(p.q.value() - 1);
  bool ok = pval > 0.01 && std::fabs(attempts - expect) < 0.05 * expect;
  std::string detail = "chi2 p=" + std::to_string(pval).substr(0, 5) + ", attempts/draw " +
                       std::to_string(attempts).substr(0, 5);

  if (p.sigma) {
    const auto table = build_cdf_table(*p.sigma, p.cdf_precision(), p.tail_cut);
    XofStream noise(nonce, DomainTag::kNoise);
    constexpr int kDraws = 200000;
    double sum = 0;
    for (int i = 0; i < kDraws; ++i) sum += static_cast<double>(sample_discrete_gaussian(noise, table));
    const double mean = sum / kDraws;
    ok &= std::fabs(mean) < 5 * *p.sigma / std::sqrt(kDraws);
    detail += ", Gaussian mean " + std::to_string(mean).substr(0, 7);
  }
  return {ok ? Verdict::kPass : Verdict::kFail, detail};
}

Suite cube_permutation(const CipherParams& p, std::mt19937_64& rng) {
  const std::uint64_t q = p.q.value();
  if (std::gcd<std::uint64_t>(3, q - 1) != 1)
    return {Verdict::kSkip, "expected: gcd(3, q-1) = 3, cube is not a permutation mod " + std::to_string(q)};
  // x -> x^3 inverts with exponent d = 3^-1 mod (q-1).
  std::uint64_t d = 0;
  for (std::uint64_t k = 1; k < 3; ++k)
    if ((k * (q - 1) + 1) % 3 == 0) d = (k * (q - 1) + 1) / 3;
  auto pow = [&](std::uint64_t x, std::uint64_t e) {
    std::uint64_t r = 1;
    for (; e; e >>= 1, x = p.q.mul(x, x))
      if (e & 1) r = p.q.mul(r, x);
    return r;
  };
  unsigned bad = 0;
  for (int i = 0; i < 100000; ++i) {
    const std::uint64_t x = rng() % q;
    bad += pow(p.q.pow3(x), d) != x;
  }
  return {bad ? Verdict::kFail : Verdict::kPass, "inverse exponent " + std::to_string(d) + ", " +
                                                     std::to_string(bad) + " failures over 1e5"};
}

}  // namespace

bool run_selftest(const SelftestOptions& opt) {
  bool ok = true;
  std::mt19937_64 rng(0x5e1f);
  for (const auto& p : opt.sets) {
    const std::string tag = to_string(p.scheme) + " q=" + std::to_string(p.q.value()) + ": ";
    MixingMatrix rows = p.mix;
    if (opt.inject_mix_typo) {
      auto e = rows.entries();
      e[1] = e[1] == 1 ? 2 : 1;
      rows = MixingMatrix(rows.dim(), e);
    }
    const std::pair<const char*, Suite> suites[] = {
        {"ring laws", ring_laws(p, rng)},
        {"MRMC transpose invariance", transpose_invariance(p, rows, rng)},
        {"differential traces", differential(p, opt.trials, rng)},
        {"sampler statistics", sampler_stats(p)},
        {"cube permutation", cube_permutation(p, rng)},
    };
    for (const auto& [name, s] : suites) {
      print(tag + name, s);
      ok &= s.verdict != Verdict::kFail;
    }
  }
  std::printf("selftest: %s\n", ok ? "all suites passed" : "FAILED");
  return ok;
}

}  // namespace hhesim::cli
