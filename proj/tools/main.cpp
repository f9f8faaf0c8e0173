#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "cli.hpp"
#include "hhesim/error.hpp"
#include "hhesim/params_io.hpp"
#include "hhesim/pipesim.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace hhesim;
using json = nlohmann::ordered_json;

namespace {

struct Options {
  std::string scheme = "rubato";
  std::string params;
  std::string variant = "d3";
  std::string key;
  std::string nonce = "00";
  std::string seed = "01";
  unsigned blocks = 1;
  std::string out;
  std::string format;
  std::optional<double> freq_mhz;
  std::optional<unsigned> fifo_depth;
  std::optional<unsigned> lanes;
  bool inject_mix_typo = false;
  unsigned trials = 20;
};

// Resolved inputs, echoed into every output.
struct Resolved {
  CipherParams params;
  std::string params_source;
  Key key;
  std::string key_source;
  std::vector<std::uint8_t> nonce;
};

fs::path find_params(const std::string& name) {
  fs::path p(name);
  if (fs::exists(p)) return p;
  if (const char* dir = std::getenv("HHESIM_PARAMS_DIR"); dir && p.is_relative()) {
    for (const fs::path& cand : {fs::path(dir) / p, fs::path(dir) / (name + ".params")})
      if (fs::exists(cand)) return cand;
  }
  throw IoError("params file not found: " + name);
}

Resolved resolve(const Options& o, bool need_key = true) {
  Resolved r;
  if (!o.params.empty()) {
    const auto path = find_params(o.params);
    r.params = load_params(path);
    r.params_source = fs::absolute(path).string();
  } else {
    const char* dir = std::getenv("HHESIM_PARAMS_DIR");
    const fs::path cand = dir ? fs::path(dir) / (o.scheme + ".params") : fs::path();
    if (dir && fs::exists(cand)) {
      r.params = load_params(cand);
      r.params_source = fs::absolute(cand).string();
    } else if (o.scheme == "hera") {
      r.params = hera_par128a();
      r.params_source = "builtin:hera";
    } else if (o.scheme == "rubato") {
      r.params = rubato_par128l();
      r.params_source = "builtin:rubato";
    } else {
      throw ParameterError("unknown scheme: " + o.scheme);
    }
  }
  r.nonce = parse_hex(o.nonce);
  if (r.nonce.size() > 11) throw ParameterError("nonce longer than 11 bytes");
  if (need_key) {
    r.key_source = o.key.empty() ? "seed:" + o.seed : "key:" + o.key;
    r.key = key_from_hex(r.params, o.key.empty() ? o.seed : o.key);
  }
  return r;
}

json config_json(const Resolved& r, const Options& o) {
  json c;
  c["version"] = HHESIM_VERSION;
  c["scheme"] = to_string(r.params.scheme);
  c["params"] = r.params_source;
  c["q"] = r.params.q.value();
  c["n"] = r.params.n;
  c["r"] = r.params.rounds;
  c["l"] = r.params.l;
  if (r.params.sigma) c["sigma"] = *r.params.sigma;
  c["key"] = r.key_source;
  c["nonce"] = to_hex(r.nonce);
  c["blocks"] = o.blocks;
  return c;
}

json stats_json(const SamplerStats& s) {
  return {{"draws_attempted", s.draws_attempted},
          {"draws_accepted", s.draws_accepted},
          {"bits_consumed", s.bits_consumed}};
}

// Writes to --out or stdout.
template <typename F>
void with_output(const std::string& out, bool binary, F&& body) {
  if (out.empty() || out == "-") {
    body(std::cout);
    return;
  }
  std::ofstream f(out, binary ? std::ios::binary : std::ios::out);
  if (!f) throw IoError("cannot write " + out);
  body(f);
  if (!f) throw IoError("write failed: " + out);
}

HwConfig make_config(const Options& o, const CipherParams& p, Variant v) {
  auto cfg = HwConfig::defaults(v, p);
  if (o.lanes) {
    cfg.lanes = *o.lanes;
    if (v == Variant::kD1Baseline && !o.fifo_depth) cfg.fifo_depth = cfg.presample_depth();
  }
  if (o.fifo_depth) cfg.fifo_depth = *o.fifo_depth;
  cfg.validate();
  return cfg;
}

// Writes the partial trace next to the output and returns its path.
std::string dump_fault_trace(const SimulationFault& f, const Options& o) {
  const std::string path = (o.out.empty() || o.out == "-" ? std::string("hhesim") : o.out) + ".fault.csv";
  std::ofstream t(path);
  write_trace_csv(t, f.trace());
  return path;
}

int cmd_gen(const Options& o) {
  const auto r = resolve(o);
  const std::string fmt = o.format.empty() ? "csv" : o.format;
  if (fmt == "md") throw ParameterError("gen writes json, csv or bin");
  std::vector<KeystreamResult> res;
  for (unsigned b = 0; b < o.blocks; ++b) res.push_back(keystream_block(r.params, r.key, r.nonce, b));

  with_output(o.out, fmt == "bin", [&](std::ostream& os) {
    if (fmt == "bin") {
      for (const auto& k : res) write_keystream(os, k.z, r.params.q, KeystreamFormat::kBinary);
    } else if (fmt == "json") {
      json j;
      j["config"] = config_json(r, o);
      j["keystream"] = json::array();
      for (const auto& k : res) j["keystream"].push_back(k.z);
      os << j.dump(2) << '\n';
    } else {
      os << "# hhesim " << HHESIM_VERSION << ' ' << config_json(r, o).dump() << '\n';
      os << "block,index,value\n";
      for (unsigned b = 0; b < res.size(); ++b)
        for (unsigned i = 0; i < res[b].z.size(); ++i) os << b << ',' << i << ',' << res[b].z[i] << '\n';
    }
  });

  json side;
  side["config"] = config_json(r, o);
  side["format"] = fmt;
  side["blocks"] = json::array();
  for (const auto& k : res)
    side["blocks"].push_back({{"round_constants", stats_json(k.rc_stats)},
                              {"noise", stats_json(k.noise_stats)}});
  const std::string sidecar = (o.out.empty() || o.out == "-" ? std::string("keystream") : o.out) + ".stats.json";
  std::ofstream s(sidecar);
  if (!s) throw IoError("cannot write " + sidecar);
  s << side.dump(2) << '\n';
  return 0;
}

int cmd_sim(const Options& o, bool trace_mode) {
  const auto r = resolve(o);
  const auto cfg = make_config(o, r.params, parse_variant(o.variant));
  SimResult res;
  try {
    res = simulate(cfg, r.key, r.nonce, o.blocks);
  } catch (const SimulationFault& f) {
    std::cerr << "simulation fault: " << f.what() << "\npartial trace: " << dump_fault_trace(f, o) << '\n';
    return 3;
  }
  std::vector<KeystreamResult> golden;
  for (unsigned b = 0; b < o.blocks; ++b) golden.push_back(keystream_block(r.params, r.key, r.nonce, b));
  const auto vr = verify_trace(res.trace, r.params, r.key, golden);

  if (trace_mode) {
    with_output(o.out, false, [&](std::ostream& os) { write_trace_csv(os, res.trace); });
  } else {
    const std::string fmt = o.format.empty() ? "json" : o.format;
    with_output(o.out, false, [&](std::ostream& os) {
      auto j = json::parse(report_json(res.report, cfg, o.freq_mhz));
      j["inputs"] = config_json(r, o);
      j["verified"] = vr.ok;
      if (fmt == "json") {
        os << j.dump(2) << '\n';
      } else if (fmt == "md" || fmt == "csv") {
        const char* sep = fmt == "md" ? " | " : ",";
        if (fmt == "md") os << "<!-- " << j["config"].dump() << " -->\n| metric | value |\n|---|---|\n";
        else os << "metric,value\n";
        for (auto& [k, v] : j.items())
          if (!v.is_object()) os << (fmt == "md" ? "| " : "") << k << sep << v.dump() << (fmt == "md" ? " |" : "") << '\n';
      } else {
        throw ParameterError("sim writes json, csv or md");
      }
    });
  }
  std::cerr << (trace_mode ? "trace" : "sim") << ": " << res.trace.events.size() << " events, "
            << res.report.latency_cycles << " cycles, " << (vr.ok ? "verified" : "DIVERGED") << '\n';
  if (!vr.ok) {
    const auto& d = *vr.first;
    std::cerr << "first divergence: cycle " << d.cycle << " " << to_string(d.unit) << " lane " << d.lane
              << " block " << d.block << " element " << d.element << ": " << d.what << '\n';
    return 4;
  }
  return 0;
}

struct BenchRow {
  std::string name;
  SimReport report;
  HwConfig cfg;
  unsigned reference = 0;
};

int cmd_bench(const Options& o) {
  const auto r = resolve(o);
  const bool hera = r.params.scheme == Scheme::kHera;
  const std::vector<std::tuple<std::string, Variant, unsigned>> plan = {
      {"D1: Baseline", Variant::kD1Baseline, hera ? 729u : 1478u},
      {"D2: + Decoupling", Variant::kD2Decoupled, hera ? 512u : 800u},
      {"D3: + V/FO/MRMC", Variant::kD3Full, hera ? 90u : 66u}};
  std::vector<std::future<BenchRow>> jobs;
  for (const auto& [name, v, ref] : plan) {
    const auto cfg = make_config(o, r.params, v);
    jobs.push_back(std::async(std::launch::async, [&r, &o, cfg, name = name, ref = ref] {
      const unsigned blocks = std::max(o.blocks, cfg.lanes);
      return BenchRow{name, simulate(cfg, r.key, r.nonce, blocks).report, cfg, ref};
    }));
  }
  std::vector<BenchRow> rows;
  try {
    for (auto& j : jobs) rows.push_back(j.get());
  } catch (const SimulationFault& f) {
    std::cerr << "simulation fault: " << f.what() << "\npartial trace: " << dump_fault_trace(f, o) << '\n';
    return 3;
  }

  auto deviation = [](const BenchRow& b) {
    return 100.0 * (static_cast<double>(b.report.latency_cycles) - b.reference) / b.reference;
  };
  auto stalls = [](const SimReport& s) {
    std::uint64_t t = 0;
    for (const auto& [u, c] : s.stall_cycles_by_unit) t += c;
    return t;
  };
  const std::string fmt = o.format.empty() ? "md" : o.format;
  with_output(o.out, false, [&](std::ostream& os) {
    if (fmt == "json") {
      json j;
      j["config"] = config_json(r, o);
      for (const auto& b : rows) {
        auto row = json::parse(report_json(b.report, b.cfg, o.freq_mhz));
        row["name"] = b.name;
        row["reference_cycles"] = b.reference;
        row["deviation_pct"] = deviation(b);
        j["rows"].push_back(row);
      }
      os << j.dump(2) << '\n';
      return;
    }
    if (fmt != "md" && fmt != "csv") throw ParameterError("bench writes md, csv or json");
    const std::string na = "n/a (out of scope)";
    char freq[32] = "", msps[32] = "";
    if (fmt == "md") {
      os << "<!-- hhesim " << HHESIM_VERSION << ' ' << config_json(r, o).dump() << " -->\n";
      os << "| Implementation | Cycles | Ref. cycles | Deviation | Elements/cycle | Throughput [Msps] | Freq. [MHz] | "
            "Power [W] | Stall cycles | FIFO depth |\n";
      os << "|---|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n";
    } else {
      os << "implementation,cycles,ref_cycles,deviation_pct,elements_per_cycle,msps,freq_mhz,power_w,stall_cycles,fifo_depth\n";
    }
    for (const auto& b : rows) {
      if (o.freq_mhz) {
        std::snprintf(freq, sizeof freq, "%g", *o.freq_mhz);
        std::snprintf(msps, sizeof msps, "%.3g", b.report.msps_at(*o.freq_mhz));
      }
      char line[512];
      const char* fmt_line = fmt == "md" ? "| %s | %llu | %u | %+.1f%% | %.4f | %s | %s | %s | %llu | %u |\n"
                                         : "%s,%llu,%u,%.2f,%.6f,%s,%s,%s,%llu,%u\n";
      std::snprintf(line, sizeof line, fmt_line, b.name.c_str(),
                    static_cast<unsigned long long>(b.report.latency_cycles), b.reference, deviation(b),
                    b.report.elements_per_cycle, o.freq_mhz ? msps : na.c_str(),
                    o.freq_mhz ? freq : na.c_str(), na.c_str(),
                    static_cast<unsigned long long>(stalls(b.report)), b.cfg.fifo_depth);
      os << line;
    }
  });
  return 0;
}

int cmd_selftest(const Options& o, bool explicit_scheme) {
  cli::SelftestOptions st;
  st.inject_mix_typo = o.inject_mix_typo;
  st.trials = o.trials;
  if (!o.params.empty() || explicit_scheme) {
    st.sets.push_back(resolve(o, false).params);
  } else {
    st.sets = {hera_par128a(), rubato_par128l()};
  }
  std::printf("hhesim %s selftest\n", HHESIM_VERSION);
  return cli::run_selftest(st) ? 0 : 1;
}

void add_common(CLI::App* app, Options& o) {
  app->add_option("--scheme", o.scheme, "Cipher")->check(CLI::IsMember({"hera", "rubato"}));
  app->add_option("--params", o.params, "Parameter file (also looked up in $HHESIM_PARAMS_DIR)");
  app->add_option("--key", o.key, "Key as n big-endian words in hex, or a 1..15 byte seed");
  app->add_option("--seed", o.seed, "Key seed in hex, used when --key is absent");
  app->add_option("--nonce", o.nonce, "Nonce in hex, up to 11 bytes");
  app->add_option("--blocks", o.blocks, "Keystream blocks")->check(CLI::Range(1u, 1u << 20));
  app->add_option("--out", o.out, "Output path (default stdout)");
  app->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv", "md", "bin"}));
}

void add_hw(CLI::App* app, Options& o) {
  app->add_option("--variant", o.variant, "Design point")->check(CLI::IsMember({"d1", "d2", "d3", "vector"}));
  app->add_option("--freq-mhz", o.freq_mhz, "Clock for the Msps column");
  app->add_option("--fifo-depth", o.fifo_depth, "Round constant FIFO depth");
  app->add_option("--lanes", o.lanes, "Parallel lanes")->check(CLI::Range(1u, 64u));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HE-friendly cipher keystream generator and accelerator pipeline model"};
  app.set_version_flag("--version", std::string(HHESIM_VERSION));
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen", "Generate keystream blocks");
  add_common(gen, o);
  auto* sim = app.add_subcommand("sim", "Simulate one design point and report cycles");
  add_common(sim, o);
  add_hw(sim, o);
  auto* bench = app.add_subcommand("bench", "Run D1/D2/D3 and compare with the reference cycle counts");
  add_common(bench, o);
  add_hw(bench, o);
  auto* trace = app.add_subcommand("trace", "Write the cycle trace as CSV");
  add_common(trace, o);
  add_hw(trace, o);
  auto* self = app.add_subcommand("selftest", "Run the invariant suites");
  self->add_option("--scheme", o.scheme, "Only this cipher")->check(CLI::IsMember({"hera", "rubato"}));
  self->add_option("--params", o.params, "Only this parameter file");
  self->add_option("--trials", o.trials, "Random traces per variant")->check(CLI::Range(1u, 100000u));
  self->add_flag("--inject-mix-typo", o.inject_mix_typo, "Corrupt one MixRows constant");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen(o);
    if (*sim) return cmd_sim(o, false);
    if (*trace) return cmd_sim(o, true);
    if (*bench) return cmd_bench(o);
    if (*self) return cmd_selftest(o, self->count("--scheme") > 0);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
