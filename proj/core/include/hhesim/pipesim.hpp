#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hhesim/cipher.hpp"
#include "hhesim/error.hpp"

namespace hhesim {

enum class Variant { kD1Baseline, kD2Decoupled, kD3Full, kVectorAblation };
enum class RejectionModel { kExpectedRate, kStreamExact };
enum class Unit : std::uint8_t { kRng, kFifo, kArk, kMrmc, kNonlin, kTr, kAgn };
enum class StageKind : std::uint8_t { kArk, kMrmc, kCube, kFeistel, kAgn };

std::string to_string(Variant v);
std::string to_string(Unit u);
std::string to_string(StageKind k);
Variant parse_variant(std::string_view s);

/// Per-unit pipeline latency (issue to result) in cycles. Every unit
/// accepts one operation per cycle except Cube, which holds its slot for
/// `cube_occupancy` cycles.
struct UnitTiming {
  unsigned ark = 4;
  unsigned cube = 2;
  unsigned cube_occupancy = 2;
  unsigned feistel = 3;
  unsigned agn = 3;
  unsigned mix_columns = 1;
  unsigned mix_rows = 2;
};

struct HwConfig {
  Variant variant = Variant::kD3Full;
  CipherParams params;
  unsigned lanes = 1;
  unsigned vector_width = 1;
  unsigned fifo_depth = 8;  // in round constants
  unsigned rng_bits_per_cycle = 128;
  RejectionModel rejection_model = RejectionModel::kExpectedRate;
  bool function_overlap = false;
  bool mrmc_opt = false;
  /// Decoupled variants start with the FIFO, staging banks and the first
  /// noise buffer full, as they are after the RNG has free-run.
  bool warm_start = true;
  bool exclude_zero = true;
  UnitTiming timing;

  /// Reference design point for `variant`: D1/D2 are 8 scalar lanes; D3 is
  /// 2 lanes of width 4 for HERA and 1 lane of width 8 for Rubato. D1's
  /// FIFO is sized for full pre-sampling.
  static HwConfig defaults(Variant variant, const CipherParams& p);

  /// Throws ParameterError when the variant constraints are violated.
  void validate() const;
  /// Round constants one keygen needs across all lanes.
  unsigned presample_depth() const;
};

struct TraceEvent {
  std::uint32_t cycle = 0;     // issue cycle
  std::uint32_t done = 0;      // last occupied cycle
  std::uint32_t avail = 0;     // first cycle the result can be consumed
  Unit unit = Unit::kArk;
  std::uint16_t lane = 0;
  std::uint32_t block = 0;
  std::uint16_t stage = 0;     // stage index; ARK layer for RNG/FIFO events
  std::uint8_t phase = 0;      // MRMC: 0 MixColumns, 1 MixRows
  std::int16_t aux = -1;       // scalar MixColumns: output row
  Order order = Order::kRowMajor;
  std::vector<std::uint16_t> indices;  // 1-based element indices
  std::vector<std::uint64_t> values;
  std::vector<std::uint8_t> layers;    // RNG/FIFO: ARK layer of each constant
};

struct Trace {
  Scheme scheme = Scheme::kHera;
  unsigned v = 4;
  unsigned vector_width = 1;
  bool function_overlap = false;
  std::vector<StageKind> stages;
  std::vector<TraceEvent> events;  // sorted by cycle
};

struct MrmcPass {
  unsigned lane = 0;
  std::uint32_t block = 0;
  unsigned stage = 0;
  bool layer_entry = false;  // first MRMC of a round layer
  std::uint32_t first_input = 0;
  std::uint32_t first_mc = 0;
  std::uint32_t last_mr = 0;
  unsigned bubble = 0;               // idle cycles before the first MixColumns
  std::optional<unsigned> stall_before;  // idle cycles since the previous pass
};

struct SimReport {
  std::uint64_t latency_cycles = 0;
  std::uint64_t initiation_interval_cycles = 0;
  std::uint64_t total_cycles = 0;
  double elements_per_cycle = 0;        // keystream elements
  double state_elements_per_cycle = 0;  // n per keygen
  std::map<std::string, std::uint64_t> stall_cycles_by_unit;
  std::uint64_t bubble_count = 0;
  std::vector<unsigned> bubbles_per_layer;   // layer-entry passes, lane 0 block 0
  std::vector<unsigned> inter_rf_stalls;     // same passes, excluding the first
  std::vector<MrmcPass> passes;
  std::uint64_t fifo_max_occupancy = 0;
  std::uint64_t rng_stall_cycles = 0;
  std::uint64_t producer_stall_cycles = 0;
  std::uint64_t presample_cycles = 0;   // D1 only, first batch
  std::uint64_t rc_bits_demand = 0;     // bits actually consumed by the rc sampler
  std::uint64_t constants_consumed = 0;
  std::map<std::string, std::uint64_t> events_by_unit;
  std::vector<Residues> keystreams;     // per block, reconstructed by the datapath

  double msps_at(double freq_mhz) const { return elements_per_cycle * freq_mhz; }
};

class SimulationFault : public Error {
 public:
  SimulationFault(const std::string& what, Trace partial)
      : Error(what), trace_(std::move(partial)) {}
  const Trace& trace() const noexcept { return trace_; }

 private:
  Trace trace_;
};

struct SimResult {
  SimReport report;
  Trace trace;
};

/// Block b runs on lane b % lanes with block index b; every block of a
/// lane follows the previous one.
SimResult simulate(const HwConfig& cfg, const Key& key,
                   std::span<const std::uint8_t> nonce, unsigned blocks);

std::vector<StageKind> stage_plan(const CipherParams& p);

struct FifoResult {
  std::uint64_t consumer_stalls = 0;
  std::uint64_t producer_stalls = 0;
  std::uint64_t max_occupancy = 0;
};

/// Cycle-stepped FIFO in units of constants. Each cycle the producer turns
/// `producer_bits_per_cycle` into constants of `bits_per_constant` bits
/// while there is room, then the consumer pops its scheduled count. A
/// cycle whose demand cannot be met is a consumer stall and the demand is
/// retried next cycle.
FifoResult fifo_model(double producer_bits_per_cycle,
                      std::span<const unsigned> consumer_schedule,
                      unsigned depth, double bits_per_constant);

/// Evenly spread schedule consuming `bits_per_cycle` for `cycles` cycles.
std::vector<unsigned> steady_schedule(double bits_per_cycle,
                                      double bits_per_constant,
                                      unsigned cycles);

struct Divergence {
  std::uint32_t cycle = 0;
  Unit unit = Unit::kArk;
  unsigned lane = 0;
  std::uint32_t block = 0;
  unsigned element = 0;  // 1-based
  std::uint64_t expected = 0;
  std::uint64_t actual = 0;
  std::string what;
};

struct VerifyReport {
  bool ok = true;
  std::uint64_t events_checked = 0;
  std::optional<Divergence> first;
};

/// Checks every payload against the golden per-stage states and then the
/// keystream rebuilt from the final unit's events against `golden[b].z`.
VerifyReport verify_trace(const Trace& trace, const CipherParams& p,
                          const Key& key,
                          std::span<const KeystreamResult> golden);

/// Per-pass MRMC summary rebuilt from trace timing alone.
std::vector<MrmcPass> count_bubbles(const Trace& trace);

void write_trace_csv(std::ostream& os, const Trace& trace);
std::string report_json(const SimReport& r, const HwConfig& cfg,
                        std::optional<double> freq_mhz = std::nullopt);

}  // namespace hhesim
