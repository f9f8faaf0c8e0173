#include <benchmark/benchmark.h>

#include <random>

#include "hhesim/cipher.hpp"
#include "hhesim/pipesim.hpp"
#include "hhesim/sampler.hpp"

using namespace hhesim;

namespace {

const std::vector<std::uint8_t> kNonce{1, 2, 3, 4};

CipherParams scheme(int i) { return i == 0 ? hera_par128a() : rubato_par128l(); }

Key some_key(const CipherParams& p) {
  Key k;
  for (unsigned i = 0; i < p.n; ++i) k.k.push_back((i * 31 + 5) % p.q.value());
  return k;
}

void BM_Keystream(benchmark::State& st) {
  const auto p = scheme(static_cast<int>(st.range(0)));
  const auto key = some_key(p);
  std::uint32_t block = 0;
  for (auto _ : st) benchmark::DoNotOptimize(keystream_block(p, key, kNonce, block++));
  st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations()) * p.l);
  st.SetLabel(to_string(p.scheme));
}
BENCHMARK(BM_Keystream)->Arg(0)->Arg(1);

void BM_Mrmc(benchmark::State& st) {
  const auto p = scheme(static_cast<int>(st.range(0)));
  std::mt19937_64 rng(1);
  Residues e(p.n);
  for (auto& x : e) x = rng() % p.q.value();
  StateMatrix x(p.q, p.v, e);
  for (auto _ : st) {
    x = mrmc(x, p.mix);
    benchmark::DoNotOptimize(x.elems.data());
  }
  st.SetLabel(to_string(p.scheme));
}
BENCHMARK(BM_Mrmc)->Arg(0)->Arg(1);

void BM_RejectionSample(benchmark::State& st) {
  const auto p = rubato_par128l();
  XofStream src(kNonce, DomainTag::kRoundConstant);
  for (auto _ : st) benchmark::DoNotOptimize(rejection_sample_uniform(src, p.q, true));
}
BENCHMARK(BM_RejectionSample);

void BM_Gaussian(benchmark::State& st) {
  const auto table = build_cdf_table(1.6, 64, 16);
  XofStream src(kNonce, DomainTag::kNoise);
  for (auto _ : st) benchmark::DoNotOptimize(sample_discrete_gaussian(src, table));
}
BENCHMARK(BM_Gaussian);

void BM_Simulate(benchmark::State& st) {
  const auto p = scheme(static_cast<int>(st.range(0)));
  const auto cfg = HwConfig::defaults(static_cast<Variant>(st.range(1)), p);
  const auto key = some_key(p);
  std::uint64_t cycles = 0;
  for (auto _ : st) {
    const auto r = simulate(cfg, key, kNonce, cfg.lanes);
    cycles += r.report.total_cycles;
  }
  st.counters["sim_cycles/s"] = benchmark::Counter(static_cast<double>(cycles), benchmark::Counter::kIsRate);
  st.SetLabel(to_string(p.scheme) + " " + to_string(cfg.variant));
}
BENCHMARK(BM_Simulate)->ArgsProduct({{0, 1}, {0, 1, 2}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
