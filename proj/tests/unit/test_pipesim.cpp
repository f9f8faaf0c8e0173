#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "hhesim/pipesim.hpp"
#include "json.hpp"

using namespace hhesim;

namespace {

const std::vector<std::uint8_t> kNonce{7, 7, 7};

Key test_key(const CipherParams& p) {
  Key k;
  for (unsigned i = 0; i < p.n; ++i) k.k.push_back((i * 7919 + 3) % p.q.value());
  return k;
}

std::vector<KeystreamResult> golden(const CipherParams& p, const Key& k, unsigned blocks) {
  std::vector<KeystreamResult> g;
  for (unsigned b = 0; b < blocks; ++b) g.push_back(keystream_block(p, k, kNonce, b));
  return g;
}

struct Case {
  Scheme scheme;
  Variant variant;
};

CipherParams params_for(Scheme s) { return s == Scheme::kHera ? hera_par128a() : rubato_par128l(); }

const std::vector<Case> kCases = {
    {Scheme::kHera, Variant::kD1Baseline},     {Scheme::kHera, Variant::kD2Decoupled},
    {Scheme::kHera, Variant::kD3Full},         {Scheme::kHera, Variant::kVectorAblation},
    {Scheme::kRubato, Variant::kD1Baseline},   {Scheme::kRubato, Variant::kD2Decoupled},
    {Scheme::kRubato, Variant::kD3Full},       {Scheme::kRubato, Variant::kVectorAblation},
};

}  // namespace

TEST(FifoModel, RateAndDepth) {
  // 84 b/c of demand against a 128 b/c producer never starves.
  const auto sched = steady_schedule(84, 25, 10000);
  auto r = fifo_model(128, sched, 8, 25);
  EXPECT_EQ(r.consumer_stalls, 0u);
  EXPECT_LE(r.max_occupancy, 8u);
  EXPECT_GT(r.producer_stalls, 0u);
  // Demand above supply stalls about in proportion.
  r = fifo_model(64, steady_schedule(128, 32, 1000), 8, 32);
  EXPECT_NEAR(static_cast<double>(r.consumer_stalls), 1000.0, 10.0);
  EXPECT_THROW(fifo_model(128, sched, 8, 0), ParameterError);
}

TEST(SteadySchedule, SpreadsEvenly) {
  const auto s = steady_schedule(84, 25, 100);
  unsigned total = 0;
  for (auto x : s) {
    EXPECT_LE(x, 4u);
    total += x;
  }
  EXPECT_EQ(total, 336u);
}

TEST(StagePlan, Shapes) {
  using S = StageKind;
  EXPECT_EQ(stage_plan(rubato_par128l()),
            (std::vector<S>{S::kArk, S::kMrmc, S::kFeistel, S::kArk, S::kMrmc, S::kFeistel,
                            S::kMrmc, S::kArk, S::kAgn}));
  const auto h = stage_plan(hera_par128a());
  EXPECT_EQ(h.size(), 1u + 4 * 3 + 4);
  EXPECT_EQ(std::count(h.begin(), h.end(), S::kArk), 6);
  EXPECT_EQ(std::count(h.begin(), h.end(), S::kCube), 5);
  EXPECT_EQ(std::count(h.begin(), h.end(), S::kMrmc), 6);
}

TEST(HwConfig, Validation) {
  auto c = HwConfig::defaults(Variant::kD3Full, hera_par128a());
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.lanes, 2u);
  c.vector_width = 2;
  EXPECT_THROW(c.validate(), ParameterError);
  c = HwConfig::defaults(Variant::kD3Full, rubato_par128l());
  c.function_overlap = false;
  EXPECT_THROW(c.validate(), ParameterError);
  c = HwConfig::defaults(Variant::kD1Baseline, rubato_par128l());
  EXPECT_EQ(c.fifo_depth, 8u * 188);
  c.vector_width = 8;
  EXPECT_THROW(c.validate(), ParameterError);
  EXPECT_EQ(parse_variant("d2"), Variant::kD2Decoupled);
  EXPECT_THROW(parse_variant("d9"), ParameterError);
}

TEST(Simulate, EveryVariantMatchesCipher) {
  for (const auto& c : kCases) {
    const auto p = params_for(c.scheme);
    const auto key = test_key(p);
    auto cfg = HwConfig::defaults(c.variant, p);
    const unsigned blocks = cfg.lanes * 2;
    const auto res = simulate(cfg, key, kNonce, blocks);
    const auto g = golden(p, key, blocks);
    const auto vr = verify_trace(res.trace, p, key, g);
    EXPECT_TRUE(vr.ok) << to_string(c.scheme) << " " << to_string(c.variant) << " "
                       << (vr.first ? vr.first->what + " cycle " + std::to_string(vr.first->cycle) + " " + to_string(vr.first->unit) : "");
    ASSERT_EQ(res.report.keystreams.size(), blocks);
    for (unsigned b = 0; b < blocks; ++b) EXPECT_EQ(res.report.keystreams[b], g[b].z);
  }
}

TEST(Simulate, EventConservation) {
  for (const auto& c : kCases) {
    const auto p = params_for(c.scheme);
    auto cfg = HwConfig::defaults(c.variant, p);
    cfg.warm_start = false;  // otherwise preloaded constants have no RNG event
    const auto res = simulate(cfg, test_key(p), kNonce, cfg.lanes);
    std::map<std::pair<std::uint32_t, Unit>, std::size_t> elems;
    std::map<std::uint32_t, std::size_t> mc, mr;
    for (const auto& ev : res.trace.events) {
      if (ev.unit == Unit::kMrmc) (ev.phase == 0 ? mc : mr)[ev.block] += ev.indices.size();
      else elems[{ev.block, ev.unit}] += ev.indices.size();
    }
    const auto plan = stage_plan(p);
    const std::size_t nonlin = std::count_if(plan.begin(), plan.end(), [](StageKind k) {
      return k == StageKind::kCube || k == StageKind::kFeistel;
    });
    const std::size_t mrmcs = std::count(plan.begin(), plan.end(), StageKind::kMrmc);
    for (std::uint32_t b = 0; b < cfg.lanes; ++b) {
      EXPECT_EQ((elems[{b, Unit::kArk}]), p.constants_per_block()) << to_string(c.variant);
      EXPECT_EQ((elems[{b, Unit::kRng}]), p.constants_per_block());
      EXPECT_EQ((elems[{b, Unit::kNonlin}]), nonlin * p.n);
      EXPECT_EQ(mr[b], mrmcs * p.n);
      if (p.scheme == Scheme::kRubato) {
        EXPECT_EQ((elems[{b, Unit::kAgn}]), p.l);
      }
    }
  }
}

TEST(Simulate, OneIssuePerUnitPerLanePerCycle) {
  for (const auto& c : kCases) {
    const auto p = params_for(c.scheme);
    auto cfg = HwConfig::defaults(c.variant, p);
    const auto res = simulate(cfg, test_key(p), kNonce, cfg.lanes * 2);
    std::set<std::tuple<std::uint32_t, Unit, unsigned, unsigned>> seen;
    std::uint32_t last = 0;
    for (const auto& ev : res.trace.events) {
      EXPECT_GE(ev.cycle, last);
      last = ev.cycle;
      EXPECT_LE(ev.cycle, ev.done);
      for (auto i : ev.indices) {
        EXPECT_GE(i, 1u);
        EXPECT_LE(i, p.n);
      }
      if (ev.unit == Unit::kRng || ev.unit == Unit::kFifo || ev.unit == Unit::kTr) continue;
      EXPECT_LT(ev.done, ev.avail);
      // MixColumns events list the column they read.
      if (!(ev.unit == Unit::kMrmc && ev.phase == 0)) {
        EXPECT_LE(ev.indices.size(), cfg.vector_width) << to_string(ev.unit);
      }
      EXPECT_TRUE(seen.insert({ev.cycle, ev.unit, ev.lane, ev.phase}).second)
          << to_string(ev.unit) << " lane " << ev.lane << " cycle " << ev.cycle;
    }
  }
}

TEST(Simulate, OrderTagAlternatesAcrossMrmc) {
  for (auto s : {Scheme::kHera, Scheme::kRubato}) {
    const auto p = params_for(s);
    for (auto v : {Variant::kD3Full, Variant::kVectorAblation, Variant::kD2Decoupled}) {
      const auto cfg = HwConfig::defaults(v, p);
      const auto res = simulate(cfg, test_key(p), kNonce, 1);
      std::map<unsigned, std::set<Order>> out_order;
      for (const auto& ev : res.trace.events)
        if (ev.unit == Unit::kMrmc && ev.phase == 1) out_order[ev.stage].insert(ev.order);
      std::optional<Order> prev;
      for (auto& [stage, orders] : out_order) {
        ASSERT_EQ(orders.size(), 1u);
        const Order o = *orders.begin();
        if (v == Variant::kD3Full) {
          if (prev) {
            EXPECT_NE(o, *prev) << "stage " << stage;
          }
        } else {
          EXPECT_EQ(o, Order::kRowMajor);
        }
        prev = o;
      }
    }
  }
}

TEST(Simulate, FaultInjectionIsLocalised) {
  const auto p = rubato_par128l();
  const auto key = test_key(p);
  auto cfg = HwConfig::defaults(Variant::kD3Full, p);
  auto res = simulate(cfg, key, kNonce, 1);
  const auto g = golden(p, key, 1);
  for (const Unit target : {Unit::kArk, Unit::kMrmc, Unit::kNonlin, Unit::kAgn}) {
    auto t = res.trace;
    std::size_t hit = 0;
    for (std::size_t i = 0; i < t.events.size(); ++i)
      if (t.events[i].unit == target && !t.events[i].values.empty() &&
          !(target == Unit::kMrmc && t.events[i].phase == 0)) {
        hit = i;
        break;
      }
    auto& ev = t.events[hit];
    const unsigned slot = static_cast<unsigned>(ev.values.size() - 1);
    ev.values[slot] = (ev.values[slot] + 1) % p.q.value();
    const auto vr = verify_trace(t, p, key, g);
    ASSERT_FALSE(vr.ok);
    EXPECT_EQ(vr.first->unit, target);
    EXPECT_EQ(vr.first->cycle, ev.cycle);
    EXPECT_EQ(vr.first->element, ev.indices[slot]);
  }
}

TEST(Simulate, DecouplingRemovesPresampling) {
  for (auto s : {Scheme::kHera, Scheme::kRubato}) {
    const auto p = params_for(s);
    const auto key = test_key(p);
    const auto d1 = simulate(HwConfig::defaults(Variant::kD1Baseline, p), key, kNonce, 8).report;
    const auto d2 = simulate(HwConfig::defaults(Variant::kD2Decoupled, p), key, kNonce, 8).report;
    const auto d3 = simulate(HwConfig::defaults(Variant::kD3Full, p), key, kNonce,
                             HwConfig::defaults(Variant::kD3Full, p).lanes)
                        .report;
    EXPECT_GT(d1.presample_cycles, 0u);
    EXPECT_EQ(d2.presample_cycles, 0u);
    EXPECT_GT(d1.latency_cycles, d2.latency_cycles);
    EXPECT_GT(d2.latency_cycles, d3.latency_cycles);
    EXPECT_EQ(d2.rng_stall_cycles, 0u);
  }
}

TEST(Simulate, D1NeedsFullPresampleDepth) {
  for (auto s : {Scheme::kHera, Scheme::kRubato}) {
    const auto p = params_for(s);
    for (unsigned lanes : {1u, 8u}) {
      auto cfg = HwConfig::defaults(Variant::kD1Baseline, p);
      cfg.lanes = lanes;
      const unsigned need = lanes * p.constants_per_block();
      EXPECT_EQ(cfg.presample_depth(), need);
      cfg.fifo_depth = need;
      EXPECT_NO_THROW(simulate(cfg, test_key(p), kNonce, lanes));
      cfg.fifo_depth = need - 1;
      EXPECT_THROW(simulate(cfg, test_key(p), kNonce, lanes), SimulationFault);
    }
  }
}

TEST(Simulate, ZeroDepthFifoDeadlocks) {
  const auto p = hera_par128a();
  auto cfg = HwConfig::defaults(Variant::kD2Decoupled, p);
  cfg.fifo_depth = 0;
  cfg.warm_start = false;
  try {
    simulate(cfg, test_key(p), kNonce, 1);
    FAIL() << "expected a fault";
  } catch (const SimulationFault& f) {
    EXPECT_NE(std::string(f.what()).find("deadlock"), std::string::npos) << f.what();
  }
}

TEST(Simulate, MonotoneInRngRate) {
  const auto p = rubato_par128l();
  std::uint64_t prev = 0;
  for (unsigned bits : {128u, 64u, 32u, 16u}) {
    auto cfg = HwConfig::defaults(Variant::kD2Decoupled, p);
    cfg.rng_bits_per_cycle = bits;
    cfg.warm_start = false;
    const auto r = simulate(cfg, test_key(p), kNonce, 8).report;
    EXPECT_GE(r.latency_cycles, prev) << bits;
    prev = r.latency_cycles;
  }
}

TEST(Simulate, StreamExactStillCorrect) {
  const auto p = hera_par128a();
  const auto key = test_key(p);
  auto cfg = HwConfig::defaults(Variant::kD3Full, p);
  cfg.rejection_model = RejectionModel::kStreamExact;
  const auto res = simulate(cfg, key, kNonce, 4);
  EXPECT_TRUE(verify_trace(res.trace, p, key, golden(p, key, 4)).ok);
  EXPECT_GE(res.report.rc_bits_demand, 4u * 96 * 28);
}

TEST(CountBubbles, MatchesReport) {
  const auto p = rubato_par128l();
  auto cfg = HwConfig::defaults(Variant::kVectorAblation, p);
  const auto res = simulate(cfg, test_key(p), kNonce, 1);
  const auto passes = count_bubbles(res.trace);
  ASSERT_EQ(passes.size(), res.report.passes.size());
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < passes.size(); ++i) {
    EXPECT_EQ(passes[i].bubble, res.report.passes[i].bubble);
    EXPECT_EQ(passes[i].stall_before, res.report.passes[i].stall_before);
    total += passes[i].bubble;
  }
  EXPECT_EQ(total, res.report.bubble_count);
}

TEST(TraceCsv, Format) {
  const auto p = hera_par128a();
  const auto res = simulate(HwConfig::defaults(Variant::kD3Full, p), test_key(p), kNonce, 1);
  std::ostringstream os;
  write_trace_csv(os, res.trace);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "cycle,unit,lane,indices,order,values_hex");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 5) << line;
    for (char ch : line.substr(line.rfind(',') + 1))
      EXPECT_TRUE(std::isdigit(static_cast<unsigned char>(ch)) || (ch >= 'a' && ch <= 'f') ||
                  ch == ';')
          << line;
  }
  EXPECT_EQ(rows, res.trace.events.size());
}

TEST(ReportJson, Fields) {
  const auto p = rubato_par128l();
  const auto cfg = HwConfig::defaults(Variant::kD3Full, p);
  const auto res = simulate(cfg, test_key(p), kNonce, 1);
  auto j = nlohmann::json::parse(report_json(res.report, cfg));
  EXPECT_EQ(j["latency_cycles"].get<std::uint64_t>(), res.report.latency_cycles);
  EXPECT_EQ(j["msps"], "n/a (out of scope)");
  j = nlohmann::json::parse(report_json(res.report, cfg, 200.0));
  EXPECT_NEAR(j["msps"].get<double>(), res.report.msps_at(200.0), 1e-9);
}

TEST(Throughput, ConsistentWithReferenceTables) {
  // Table clock (MHz) and Msps for D1/D2/D3.
  struct Ref {
    Variant v;
    double mhz, msps;
  };
  const std::vector<std::pair<CipherParams, std::vector<Ref>>> cases = {
      {hera_par128a(),
       {{Variant::kD1Baseline, 52.6, 9.24}, {Variant::kD2Decoupled, 222, 55.6}, {Variant::kD3Full, 167, 65.8}}},
      {rubato_par128l(),
       {{Variant::kD1Baseline, 37.0, 12.0}, {Variant::kD2Decoupled, 182, 109}, {Variant::kD3Full, 175, 188}}}};
  for (const auto& [p, refs] : cases)
    for (const auto& ref : refs) {
      const auto cfg = HwConfig::defaults(ref.v, p);
      const auto r = simulate(cfg, test_key(p), kNonce, cfg.lanes).report;
      EXPECT_NEAR(r.msps_at(ref.mhz), ref.msps, 0.15 * ref.msps) << to_string(p.scheme) << " " << to_string(ref.v);
      EXPECT_DOUBLE_EQ(r.elements_per_cycle,
                       static_cast<double>(p.l) * cfg.lanes / r.initiation_interval_cycles);
    }
}
