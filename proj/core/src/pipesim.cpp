#include "hhesim/pipesim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <cstdio>
#include <set>
#include <tuple>

#include "json.hpp"

#include "hhesim/sampler.hpp"

namespace hhesim {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kD1Baseline: return "d1";
    case Variant::kD2Decoupled: return "d2";
    case Variant::kD3Full: return "d3";
    case Variant::kVectorAblation: return "vector";
  }
  return "?";
}

std::string to_string(Unit u) {
  switch (u) {
    case Unit::kRng: return "RNG";
    case Unit::kFifo: return "FIFO";
    case Unit::kArk: return "ARK";
    case Unit::kMrmc: return "MRMC";
    case Unit::kNonlin: return "NONLIN";
    case Unit::kTr: return "TR";
    case Unit::kAgn: return "AGN";
  }
  return "?";
}

std::string to_string(StageKind k) {
  switch (k) {
    case StageKind::kArk: return "ARK";
    case StageKind::kMrmc: return "MRMC";
    case StageKind::kCube: return "CUBE";
    case StageKind::kFeistel: return "FEISTEL";
    case StageKind::kAgn: return "AGN";
  }
  return "?";
}

Variant parse_variant(std::string_view s) {
  if (s == "d1") return Variant::kD1Baseline;
  if (s == "d2") return Variant::kD2Decoupled;
  if (s == "d3") return Variant::kD3Full;
  if (s == "vector") return Variant::kVectorAblation;
  throw ParameterError("unknown variant: " + std::string(s));
}

HwConfig HwConfig::defaults(Variant variant, const CipherParams& p) {
  HwConfig c;
  c.variant = variant;
  c.params = p;
  const bool hera = p.scheme == Scheme::kHera;
  switch (variant) {
    case Variant::kD1Baseline:
    case Variant::kD2Decoupled:
      c.lanes = 8;
      c.vector_width = 1;
      c.function_overlap = false;
      c.mrmc_opt = false;
      c.fifo_depth = variant == Variant::kD1Baseline ? c.presample_depth() : 8;
      break;
    case Variant::kD3Full:
    case Variant::kVectorAblation:
      c.lanes = hera ? 2 : 1;
      c.vector_width = p.v;
      c.function_overlap = variant == Variant::kD3Full;
      c.mrmc_opt = variant == Variant::kD3Full;
      c.fifo_depth = 8;
      break;
  }
  return c;
}

void HwConfig::validate() const {
  params.validate();
  if (lanes < 1) throw ParameterError("lanes must be >= 1");
  if (rng_bits_per_cycle < 1) throw ParameterError("rng_bits_per_cycle must be >= 1");
  switch (variant) {
    case Variant::kD1Baseline:
    case Variant::kD2Decoupled:
      if (vector_width != 1) throw ParameterError("D1/D2 are scalar (vector_width 1)");
      break;
    case Variant::kD3Full:
      if (vector_width != params.v) throw ParameterError("D3 needs vector_width = v");
      if (!function_overlap || !mrmc_opt)
        throw ParameterError("D3 requires function overlap and the MRMC schedule");
      break;
    case Variant::kVectorAblation:
      if (vector_width != params.v)
        throw ParameterError("vector ablation needs vector_width = v");
      break;
  }
  if (timing.cube_occupancy < 1) throw ParameterError("cube occupancy must be >= 1");
}

unsigned HwConfig::presample_depth() const {
  return lanes * params.constants_per_block();
}

std::vector<StageKind> stage_plan(const CipherParams& p) {
  const StageKind nl =
      p.scheme == Scheme::kHera ? StageKind::kCube : StageKind::kFeistel;
  std::vector<StageKind> s{StageKind::kArk};
  for (unsigned i = 1; i < p.rounds; ++i)
    s.insert(s.end(), {StageKind::kMrmc, nl, StageKind::kArk});
  s.insert(s.end(), {StageKind::kMrmc, nl, StageKind::kMrmc, StageKind::kArk});
  if (p.scheme == Scheme::kRubato) s.push_back(StageKind::kAgn);
  return s;
}

namespace {

enum class OpKind : std::uint8_t { kArk, kCube, kFeistel, kMc, kMr, kAgn };
enum LaneUnit { kUArk = 0, kUNl = 1, kUMrmc = 2, kUAgn = 3, kLaneUnits = 4 };

LaneUnit lane_unit(OpKind k) {
  switch (k) {
    case OpKind::kArk: return kUArk;
    case OpKind::kCube:
    case OpKind::kFeistel: return kUNl;
    case OpKind::kMc:
    case OpKind::kMr: return kUMrmc;
    case OpKind::kAgn: return kUAgn;
  }
  return kUArk;
}

Unit trace_unit(OpKind k) {
  switch (lane_unit(k)) {
    case kUArk: return Unit::kArk;
    case kUNl: return Unit::kNonlin;
    case kUMrmc: return Unit::kMrmc;
    default: return Unit::kAgn;
  }
}

struct Op {
  OpKind kind;
  std::uint16_t lane;
  std::uint32_t block;
  std::uint16_t stage;
  std::int16_t aux = -1;
  std::uint8_t layer = 0;
  Order order = Order::kRowMajor;
  std::vector<std::uint16_t> elems;
  std::vector<int> dependents;
  int pending = 0;
  std::int64_t ready = 0;
  std::int64_t issue = -1;
  std::int64_t avail = 0;
};

struct Waiter {
  int op;
  bool use_avail;  // false: wait for the last issue slot to pass
};

struct Group {
  int remaining = 0;
  std::int64_t max_avail = 0;
  std::int64_t max_end = -1;
  std::vector<Waiter> waiters;
};

struct BlockState {
  unsigned lane = 0;
  unsigned batch = 0;
  std::uint32_t index = 0;
  Residues ic;
  std::vector<Residues> out;   // per stage output, indexed by element
  std::vector<Residues> mixed; // per MRMC stage: MixColumns buffer U, U[r*v+c]
  std::vector<Residues> rc;    // per ARK layer
  std::vector<double> rc_cost;
  std::vector<std::int64_t> noise;
  std::vector<double> noise_cost;
  std::uint64_t rc_bits = 0;
  std::vector<unsigned> delivered;  // per layer, constants staged in order
  unsigned noise_ready = 0;
  int last_group = -1;
};

struct ConstRef {
  std::uint32_t block;
  std::uint8_t layer;
  std::uint16_t elem;
};

std::vector<std::uint16_t> vector_elems(Order o, unsigned v, unsigned i) {
  std::vector<std::uint16_t> e(v);
  for (unsigned k = 0; k < v; ++k)
    e[k] = static_cast<std::uint16_t>(o == Order::kRowMajor ? i * v + k : k * v + i);
  return e;
}

// Items of an elementwise pass in streaming order.
std::vector<std::vector<std::uint16_t>> pass_items(Order o, unsigned v,
                                                   unsigned width) {
  std::vector<std::vector<std::uint16_t>> items;
  if (width == v) {
    for (unsigned i = 0; i < v; ++i) items.push_back(vector_elems(o, v, i));
  } else {
    for (unsigned i = 0; i < v; ++i)
      for (unsigned k = 0; k < v; ++k)
        items.push_back({vector_elems(o, v, i)[k]});
  }
  return items;
}

class Engine {
 public:
  Engine(const HwConfig& cfg, const Key& key, std::span<const std::uint8_t> nonce,
         unsigned blocks)
      : cfg_(cfg), p_(cfg.params), key_(key), v_(p_.v), n_(p_.n), w_(cfg.vector_width) {
    cfg_.validate();
    if (blocks < 1) throw ParameterError("blocks must be >= 1");
    if (key.k.size() != n_) throw LengthMismatch("key length != n");
    d1_ = cfg.variant == Variant::kD1Baseline;
    stages_ = stage_plan(p_);
    trace_.scheme = p_.scheme;
    trace_.v = v_;
    trace_.vector_width = w_;
    trace_.function_overlap = cfg.function_overlap;
    trace_.stages = stages_;
    batches_ = (blocks + cfg.lanes - 1) / cfg.lanes;
    make_randomness(nonce, blocks);
    for (unsigned b = 0; b < blocks; ++b) build_block(b);
    build_sequences();
  }

  SimResult run();

 private:
  void make_randomness(std::span<const std::uint8_t> nonce, unsigned blocks);
  void build_block(unsigned b);
  void build_sequences();
  int new_group() {
    groups_.emplace_back();
    return static_cast<int>(groups_.size()) - 1;
  }
  void wait_on(int op, int group, bool use_avail);
  void release(int id);
  void on_issue(int id, std::int64_t t);
  void resolve_group(int g);
  bool resources_ok(const Op& op) const;
  void compute(Op& op, TraceEvent& ev);
  void step_rng(std::int64_t t);
  void emit(TraceEvent ev) { trace_.events.push_back(std::move(ev)); }
  [[noreturn]] void fault(const std::string& what);

  HwConfig cfg_;
  CipherParams p_;
  Key key_;
  unsigned v_, n_, w_;
  bool d1_ = false;
  unsigned batches_ = 0;
  std::vector<StageKind> stages_;
  CdfTable table_;
  std::vector<BlockState> blocks_;
  std::vector<Op> ops_;
  std::vector<int> op_group_;
  std::vector<Group> groups_;
  std::vector<int> presample_group_;  // D1, per batch
  std::vector<std::vector<int>> released_;  // lane * kLaneUnits + unit
  std::vector<std::int64_t> busy_until_;
  std::vector<std::int64_t> stall_;   // per lane unit, consumer stalls

  // Randomness pipeline.
  std::vector<ConstRef> rc_seq_;
  std::vector<ConstRef> noise_seq_;
  std::vector<std::size_t> rc_batch_end_, noise_batch_end_;
  std::size_t rc_next_ = 0, noise_next_ = 0;
  double rc_credit_ = 0, noise_credit_ = 0;
  std::vector<std::size_t> fifo_;  // rc_seq_ positions
  std::size_t fifo_head_ = 0;
  std::vector<unsigned> bank_occ_, noise_occ_;
  unsigned bank_cap_ = 0, noise_cap_ = 0;
  unsigned presample_batch_ = 0;
  std::uint64_t fifo_max_ = 0;
  std::uint64_t producer_stalls_ = 0;
  std::int64_t last_progress_ = 0;

  Trace trace_;
};

void Engine::make_randomness(std::span<const std::uint8_t> nonce, unsigned blocks) {
  if (p_.scheme == Scheme::kRubato)
    table_ = build_cdf_table(*p_.sigma, p_.cdf_precision(), p_.tail_cut);
  const double bits = p_.q.bits();
  const double rc_expected =
      bits * std::ldexp(1.0, static_cast<int>(p_.q.bits())) /
      static_cast<double>(p_.q.value());
  double noise_expected = 0;
  if (p_.scheme == Scheme::kRubato)
    noise_expected = table_.precision_bits + 1.0 -
                     std::ldexp(static_cast<double>(table_.entries[0]),
                                -static_cast<int>(table_.precision_bits));
  const bool exact = cfg_.rejection_model == RejectionModel::kStreamExact;
  const unsigned layers = p_.rounds + 1;

  blocks_.resize(blocks);
  for (unsigned b = 0; b < blocks; ++b) {
    auto& bs = blocks_[b];
    bs.lane = b % cfg_.lanes;
    bs.batch = b / cfg_.lanes;
    bs.index = b;
    bs.ic = p_.ic;
    const auto seed = block_nonce(nonce, b);
    XofStream rc(seed, DomainTag::kRoundConstant);
    bs.rc.resize(layers);
    bs.delivered.assign(layers, 0);
    for (unsigned j = 0; j < layers; ++j) {
      const unsigned count =
          (j + 1 == layers && p_.scheme == Scheme::kRubato) ? p_.l : n_;
      for (unsigned e = 0; e < count; ++e) {
        SamplerStats st;
        bs.rc[j].push_back(
            rejection_sample_uniform(rc, p_.q, cfg_.exclude_zero, &st).value());
        bs.rc_cost.push_back(exact ? static_cast<double>(st.bits_consumed) : rc_expected);
        bs.rc_bits += st.bits_consumed;
      }
    }
    if (p_.scheme == Scheme::kRubato) {
      XofStream ns(seed, DomainTag::kNoise);
      for (unsigned e = 0; e < p_.l; ++e) {
        SamplerStats st;
        bs.noise.push_back(sample_discrete_gaussian(ns, table_, &st));
        bs.noise_cost.push_back(exact ? static_cast<double>(st.bits_consumed)
                                      : noise_expected);
      }
    }
    bs.out.resize(stages_.size());
    bs.mixed.resize(stages_.size());
  }
}

void Engine::wait_on(int op, int group, bool use_avail) {
  groups_[group].waiters.push_back({op, use_avail});
  ++ops_[op].pending;
}

void Engine::build_block(unsigned b) {
  auto& bs = blocks_[b];
  const bool vec = w_ == v_;
  // Vector passes without overlap start after the previous pass's last
  // issue; scalar passes wait for the previous pass to drain.
  const bool floor_avail = !vec;

  std::vector<std::pair<int, bool>> gate;
  // Previous block on this lane must finish first.
  if (b >= cfg_.lanes) gate.push_back({blocks_[b - cfg_.lanes].last_group, true});
  if (d1_) {
    if (presample_group_.size() <= bs.batch) {
      presample_group_.push_back(new_group());
      groups_[presample_group_.back()].remaining = 1;
    }
    gate.push_back({presample_group_[bs.batch], true});
  }

  // The membership counts of groups are raised as members are added.
  auto member_of = [&](int g) { ++groups_[g].remaining; };

  Order orient = Order::kRowMajor;
  std::vector<int> producer(n_, -1);  // element -> op of the previous stage
  int prev_group = -1;
  unsigned layer = 0;
  const unsigned last_layer = p_.rounds;

  for (unsigned s = 0; s < stages_.size(); ++s) {
    const StageKind kind = stages_[s];
    auto waits_for_floor = [&]() {
      std::vector<std::pair<int, bool>> w;
      if (s == 0) return gate;
      if (!cfg_.function_overlap) w.push_back({prev_group, floor_avail});
      return w;
    };
    auto deps_for = [&](const std::vector<std::uint16_t>& elems, bool chain) {
      std::set<int> d;
      for (auto e : elems) {
        if (producer[e] >= 0) d.insert(producer[e]);
        if (chain && e > 0 && producer[e - 1] >= 0) d.insert(producer[e - 1]);
      }
      return std::vector<int>(d.begin(), d.end());
    };

    std::vector<int> next_producer(n_, -1);
    const int g = new_group();

    auto push = [&](Op op, const std::vector<int>& deps,
                    const std::vector<std::pair<int, bool>>& waits, int grp) {
      op.lane = static_cast<std::uint16_t>(bs.lane);
      op.block = b;
      op.stage = static_cast<std::uint16_t>(s);
      const int id = static_cast<int>(ops_.size());
      ops_.push_back(std::move(op));
      for (int d : deps) {
        ops_[d].dependents.push_back(id);
        ++ops_[id].pending;
      }
      for (auto [wg, ua] : waits) wait_on(id, wg, ua);
      member_of(grp);
      op_group_.push_back(grp);
      return id;
    };

    if (kind == StageKind::kMrmc) {
      const bool direct = cfg_.mrmc_opt || orient == Order::kColMajor;
      const Order view = direct ? orient : Order::kColMajor;
      const Order out = flipped(view);
      const int mc_group = g;
      for (unsigned c = 0; c < v_; ++c) {
        const auto elems = vector_elems(view, v_, c);
        const auto deps = deps_for(elems, false);
        const unsigned rows = vec ? 1 : v_;
        for (unsigned r = 0; r < rows; ++r) {
          Op op{};
          op.kind = OpKind::kMc;
          op.order = view;
          op.elems = elems;
          op.aux = vec ? -1 : static_cast<std::int16_t>(r);
          push(std::move(op), deps, waits_for_floor(), mc_group);
        }
      }
      const int mr_group = new_group();
      for (unsigned j = 0; j < v_; ++j) {
        const auto elems = vector_elems(out, v_, j);
        if (vec) {
          Op op{};
          op.kind = OpKind::kMr;
          op.order = out;
          op.elems = elems;
          const int id = push(std::move(op), {}, {{mc_group, true}}, mr_group);
          for (auto e : elems) next_producer[e] = id;
        } else {
          for (unsigned m = 0; m < v_; ++m) {
            Op op{};
            op.kind = OpKind::kMr;
            op.order = out;
            op.elems = {elems[m]};
            const int id = push(std::move(op), {}, {{mc_group, true}}, mr_group);
            next_producer[elems[m]] = id;
          }
        }
      }
      orient = out;
      prev_group = mr_group;
    } else {
      OpKind ok = OpKind::kArk;
      if (kind == StageKind::kCube) ok = OpKind::kCube;
      if (kind == StageKind::kFeistel) ok = OpKind::kFeistel;
      if (kind == StageKind::kAgn) ok = OpKind::kAgn;
      const bool truncating = p_.scheme == Scheme::kRubato &&
                              ((kind == StageKind::kArk && layer == last_layer) ||
                               kind == StageKind::kAgn);
      auto items = pass_items(orient, v_, w_);
      if (ok == OpKind::kFeistel && vec && orient == Order::kColMajor)
        std::rotate(items.begin(), items.begin() + 1, items.end());
      for (auto& elems : items) {
        if (truncating)
          std::erase_if(elems, [&](std::uint16_t e) { return e >= p_.l; });
        if (elems.empty()) continue;
        Op op{};
        op.kind = ok;
        op.order = orient;
        op.layer = static_cast<std::uint8_t>(layer);
        op.elems = elems;
        const auto deps = deps_for(elems, ok == OpKind::kFeistel);
        const int id = push(std::move(op), deps, waits_for_floor(), g);
        for (auto e : ops_[id].elems) next_producer[e] = id;
      }
      if (kind == StageKind::kArk) ++layer;
      prev_group = g;
    }
    producer = std::move(next_producer);
  }
  bs.last_group = prev_group;
}

void Engine::build_sequences() {
  const unsigned layers = p_.rounds + 1;
  const unsigned blocks = static_cast<unsigned>(blocks_.size());
  for (unsigned bt = 0; bt < batches_; ++bt) {
    for (unsigned j = 0; j < layers; ++j) {
      const unsigned count =
          (j + 1 == layers && p_.scheme == Scheme::kRubato) ? p_.l : n_;
      for (unsigned e = 0; e < count; ++e)
        for (unsigned ln = 0; ln < cfg_.lanes; ++ln) {
          const unsigned b = bt * cfg_.lanes + ln;
          if (b < blocks)
            rc_seq_.push_back({b, static_cast<std::uint8_t>(j),
                               static_cast<std::uint16_t>(e)});
        }
    }
    rc_batch_end_.push_back(rc_seq_.size());
    if (p_.scheme == Scheme::kRubato)
      for (unsigned e = 0; e < p_.l; ++e)
        for (unsigned ln = 0; ln < cfg_.lanes; ++ln) {
          const unsigned b = bt * cfg_.lanes + ln;
          if (b < blocks) noise_seq_.push_back({b, 0, static_cast<std::uint16_t>(e)});
        }
    noise_batch_end_.push_back(noise_seq_.size());
  }
  bank_occ_.assign(cfg_.lanes, 0);
  noise_occ_.assign(cfg_.lanes, 0);
  bank_cap_ = 2 * n_;
  noise_cap_ = 2 * p_.l;

  if (!d1_ && cfg_.warm_start) {
    bool to_fifo = false;
    while (rc_next_ < rc_seq_.size()) {
      const auto& c = rc_seq_[rc_next_];
      auto& bs = blocks_[c.block];
      if (!to_fifo && bank_occ_[bs.lane] < bank_cap_) {
        ++bank_occ_[bs.lane];
        ++bs.delivered[c.layer];
      } else {
        to_fifo = true;
        if (fifo_.size() - fifo_head_ >= cfg_.fifo_depth) break;
        fifo_.push_back(rc_next_);
      }
      ++rc_next_;
    }
    fifo_max_ = fifo_.size() - fifo_head_;
    while (noise_next_ < noise_batch_end_[0]) {
      const auto& c = noise_seq_[noise_next_++];
      ++blocks_[c.block].noise_ready;
      ++noise_occ_[blocks_[c.block].lane];
    }
  }
}

void Engine::release(int id) {
  const Op& op = ops_[id];
  released_[op.lane * kLaneUnits + lane_unit(op.kind)].push_back(id);
}

void Engine::resolve_group(int g) {
  Group& gr = groups_[g];
  for (const auto& w : gr.waiters) {
    Op& op = ops_[w.op];
    op.ready = std::max(op.ready, w.use_avail ? gr.max_avail : gr.max_end + 1);
    if (--op.pending == 0) release(w.op);
  }
}

bool Engine::resources_ok(const Op& op) const {
  const auto& bs = blocks_[op.block];
  if (op.kind == OpKind::kArk) {
    unsigned need = 0;
    for (auto e : op.elems) need = std::max<unsigned>(need, e + 1u);
    return bs.delivered[op.layer] >= need;
  }
  if (op.kind == OpKind::kAgn) {
    unsigned need = 0;
    for (auto e : op.elems) need = std::max<unsigned>(need, e + 1u);
    return bs.noise_ready >= need;
  }
  return true;
}

void Engine::compute(Op& op, TraceEvent& ev) {
  auto& bs = blocks_[op.block];
  const auto& q = p_.q;
  auto& out = bs.out[op.stage];
  if (out.empty()) out.assign(n_, 0);
  const auto& in = op.stage == 0 ? bs.ic : bs.out[op.stage - 1];
  for (auto e : op.elems) ev.indices.push_back(static_cast<std::uint16_t>(e + 1));

  switch (op.kind) {
    case OpKind::kArk:
      for (auto e : op.elems) {
        out[e] = q.add(in[e], q.mul(key_.k[e], bs.rc[op.layer][e]));
        ev.values.push_back(out[e]);
      }
      break;
    case OpKind::kCube:
      for (auto e : op.elems) {
        out[e] = q.pow3(in[e]);
        ev.values.push_back(out[e]);
      }
      break;
    case OpKind::kFeistel:
      for (auto e : op.elems) {
        out[e] = e == 0 ? in[0] : q.add(in[e], q.mul(in[e - 1], in[e - 1]));
        ev.values.push_back(out[e]);
      }
      break;
    case OpKind::kAgn:
      for (auto e : op.elems) {
        out[e] = q.add(in[e], q.reduce_signed(bs.noise[e]));
        ev.values.push_back(out[e]);
      }
      break;
    case OpKind::kMc: {
      // Column c of U = M * (view vector c); rows limited to aux in scalar mode.
      auto& u = bs.mixed[op.stage];
      if (u.empty()) u.assign(n_, 0);
      const unsigned c = op.order == Order::kRowMajor ? op.elems[0] / v_ : op.elems[0] % v_;
      const unsigned r0 = op.aux < 0 ? 0 : static_cast<unsigned>(op.aux);
      const unsigned r1 = op.aux < 0 ? v_ : r0 + 1;
      for (unsigned r = r0; r < r1; ++r) {
        std::uint64_t acc = 0;
        for (unsigned k = 0; k < v_; ++k)
          acc = q.add(acc, q.mul(p_.mix.at(r, k), in[op.elems[k]]));
        u[r * v_ + c] = acc;
        ev.values.push_back(acc);
      }
      ev.aux = op.aux;
      ev.phase = 0;
      break;
    }
    case OpKind::kMr: {
      // Output vector j = M * (row j of U).
      const auto& u = bs.mixed[op.stage];
      for (auto e : op.elems) {
        const unsigned j = op.order == Order::kRowMajor ? e / v_ : e % v_;
        const unsigned m = op.order == Order::kRowMajor ? e % v_ : e / v_;
        std::uint64_t acc = 0;
        for (unsigned k = 0; k < v_; ++k)
          acc = q.add(acc, q.mul(p_.mix.at(m, k), u[j * v_ + k]));
        out[e] = acc;
        ev.values.push_back(acc);
      }
      ev.phase = 1;
      break;
    }
  }
}

void Engine::on_issue(int id, std::int64_t t) {
  Op& op = ops_[id];
  const auto& tm = cfg_.timing;
  unsigned occ = 1, lat = 1;
  switch (op.kind) {
    case OpKind::kArk: lat = tm.ark; break;
    case OpKind::kCube: lat = tm.cube; occ = tm.cube_occupancy; break;
    case OpKind::kFeistel: lat = tm.feistel; break;
    case OpKind::kMc: lat = tm.mix_columns; break;
    case OpKind::kMr: lat = tm.mix_rows; break;
    case OpKind::kAgn: lat = tm.agn; break;
  }
  op.issue = t;
  const std::int64_t end = t + occ - 1;
  op.avail = end + lat;
  busy_until_[op.lane * kLaneUnits + lane_unit(op.kind)] = end + 1;

  auto& bs = blocks_[op.block];
  if (op.kind == OpKind::kArk) {
    const auto k = static_cast<unsigned>(op.elems.size());
    if (d1_) {
      fifo_head_ += k;
      TraceEvent fe;
      fe.cycle = fe.done = fe.avail = static_cast<std::uint32_t>(t);
      fe.unit = Unit::kFifo;
      fe.lane = op.lane;
      fe.block = op.block;
      fe.stage = op.layer;
      for (auto e : op.elems) {
        fe.indices.push_back(static_cast<std::uint16_t>(e + 1));
        fe.values.push_back(bs.rc[op.layer][e]);
        fe.layers.push_back(op.layer);
      }
      emit(std::move(fe));
    } else {
      bank_occ_[op.lane] -= k;
    }
  }
  if (op.kind == OpKind::kAgn) noise_occ_[op.lane] -= static_cast<unsigned>(op.elems.size());

  TraceEvent ev;
  ev.cycle = static_cast<std::uint32_t>(t);
  ev.done = static_cast<std::uint32_t>(end);
  ev.avail = static_cast<std::uint32_t>(op.avail);
  ev.unit = trace_unit(op.kind);
  ev.lane = op.lane;
  ev.block = op.block;
  ev.stage = op.stage;
  ev.order = op.order;
  compute(op, ev);
  const bool tr = op.kind == OpKind::kArk && p_.scheme == Scheme::kRubato &&
                  op.layer == p_.rounds;
  if (tr) {
    TraceEvent te = ev;
    te.unit = Unit::kTr;
    emit(std::move(ev));
    emit(std::move(te));
  } else {
    emit(std::move(ev));
  }

  for (int d : op.dependents) {
    Op& dep = ops_[d];
    dep.ready = std::max(dep.ready, op.avail);
    if (--dep.pending == 0) release(d);
  }
  Group& g = groups_[op_group_[id]];
  g.max_avail = std::max(g.max_avail, op.avail);
  g.max_end = std::max(g.max_end, end);
  if (--g.remaining == 0) resolve_group(op_group_[id]);
}

namespace {

// A lane can finish one block and start the next in the same cycle.
TraceEvent& lane_event(std::vector<TraceEvent>& evs, std::uint32_t block) {
  if (evs.empty() || evs.back().block != block) {
    evs.emplace_back();
    evs.back().block = block;
  }
  return evs.back();
}

}  // namespace

void Engine::step_rng(std::int64_t t) {
  const unsigned lanes = cfg_.lanes;
  // Staging: move constants produced in earlier cycles into the banks.
  if (!d1_) {
    std::vector<unsigned> pulled(lanes, 0);
    std::vector<std::vector<TraceEvent>> evs(lanes);
    while (fifo_head_ < fifo_.size()) {
      const auto& c = rc_seq_[fifo_[fifo_head_]];
      auto& bs = blocks_[c.block];
      if (pulled[bs.lane] >= w_ || bank_occ_[bs.lane] >= bank_cap_) break;
      ++pulled[bs.lane];
      ++bank_occ_[bs.lane];
      ++bs.delivered[c.layer];
      auto& ev = lane_event(evs[bs.lane], c.block);
      ev.indices.push_back(static_cast<std::uint16_t>(c.elem + 1));
      ev.values.push_back(bs.rc[c.layer][c.elem]);
      ev.layers.push_back(c.layer);
      ev.block = c.block;
      ev.stage = c.layer;
      ++fifo_head_;
      last_progress_ = t;
    }
    for (unsigned ln = 0; ln < lanes; ++ln)
      for (auto& ev : evs[ln]) {
        ev.cycle = ev.done = ev.avail = static_cast<std::uint32_t>(t);
        ev.unit = Unit::kFifo;
        ev.lane = static_cast<std::uint16_t>(ln);
        emit(std::move(ev));
      }
  }

  // Production.
  std::size_t rc_limit = rc_seq_.size(), noise_limit = noise_seq_.size();
  if (d1_) {
    if (presample_batch_ >= batches_) return;
    if (presample_batch_ > 0) {
      // The previous batch must have finished computing.
      for (const auto& bs : blocks_)
        if (bs.batch + 1 == presample_batch_) {
          const Group& g = groups_[bs.last_group];
          if (g.remaining > 0 || g.max_avail > t) return;
        }
    }
    rc_limit = rc_batch_end_[presample_batch_];
    noise_limit = noise_batch_end_[presample_batch_];
  }

  double pool = cfg_.rng_bits_per_cycle;
  constexpr double kEps = 1e-9;
  std::vector<std::vector<TraceEvent>> evs(lanes);
  bool blocked = false;
  while (rc_next_ < rc_limit && pool > kEps) {
    if (fifo_.size() - fifo_head_ >= cfg_.fifo_depth) {
      blocked = true;
      break;
    }
    const auto& c = rc_seq_[rc_next_];
    auto& bs = blocks_[c.block];
    const std::size_t pos = static_cast<std::size_t>(c.layer) * n_ + c.elem;
    const double need = bs.rc_cost[pos] - rc_credit_;
    if (pool + kEps >= need) {
      pool -= need;
      rc_credit_ = 0;
      fifo_.push_back(rc_next_);
      if (d1_) ++bs.delivered[c.layer];
      auto& ev = lane_event(evs[bs.lane], c.block);
      ev.indices.push_back(static_cast<std::uint16_t>(c.elem + 1));
      ev.values.push_back(bs.rc[c.layer][c.elem]);
      ev.layers.push_back(c.layer);
      ev.block = c.block;
      ev.stage = c.layer;
      ++rc_next_;
      last_progress_ = t;
    } else {
      rc_credit_ += pool;
      pool = 0;
    }
  }
  fifo_max_ = std::max<std::uint64_t>(fifo_max_, fifo_.size() - fifo_head_);
  if (blocked) {
    ++producer_stalls_;
    if (d1_)
      fault("FIFO overflow: depth " + std::to_string(cfg_.fifo_depth) +
            " cannot hold the " + std::to_string(rc_batch_end_[presample_batch_] -
                                                 (presample_batch_ ? rc_batch_end_[presample_batch_ - 1] : 0)) +
            " pre-sampled round constants");
  }
  for (unsigned ln = 0; ln < lanes; ++ln)
    for (auto& ev : evs[ln]) {
      ev.cycle = ev.done = ev.avail = static_cast<std::uint32_t>(t);
      ev.unit = Unit::kRng;
      ev.lane = static_cast<std::uint16_t>(ln);
      emit(std::move(ev));
    }

  while (noise_next_ < noise_limit && pool > kEps) {
    const auto& c = noise_seq_[noise_next_];
    auto& bs = blocks_[c.block];
    if (!d1_ && noise_occ_[bs.lane] >= noise_cap_) break;
    const double need = bs.noise_cost[c.elem] - noise_credit_;
    if (pool + kEps >= need) {
      pool -= need;
      noise_credit_ = 0;
      ++bs.noise_ready;
      ++noise_occ_[bs.lane];
      ++noise_next_;
      last_progress_ = t;
    } else {
      noise_credit_ += pool;
      pool = 0;
    }
  }

  if (d1_ && rc_next_ == rc_limit && noise_next_ == noise_limit) {
    Group& g = groups_[presample_group_[presample_batch_]];
    g.max_avail = t + 1;
    g.remaining = 0;
    resolve_group(presample_group_[presample_batch_]);
    ++presample_batch_;
  }
}

void Engine::fault(const std::string& what) { throw SimulationFault(what, trace_); }

SimResult Engine::run() {
  const std::size_t slots = cfg_.lanes * kLaneUnits;
  released_.assign(slots, {});
  busy_until_.assign(slots, 0);
  stall_.assign(slots, 0);
  for (std::size_t id = 0; id < ops_.size(); ++id)
    if (ops_[id].pending == 0) release(static_cast<int>(id));

  constexpr std::int64_t kDeadlockWindow = 4096;
  std::size_t issued = 0;
  std::int64_t t = 0;
  std::int64_t horizon = 0;
  while (issued < ops_.size() || t < horizon) {
    for (std::size_t slot = 0; slot < slots; ++slot) {
      if (busy_until_[slot] > t) continue;
      auto& rl = released_[slot];
      int best = -1;
      std::size_t best_pos = 0;
      bool data_ready = false;
      for (std::size_t i = 0; i < rl.size(); ++i) {
        const Op& op = ops_[rl[i]];
        if (op.ready > t) continue;
        data_ready = true;
        if (best >= 0 && rl[i] > best) continue;
        if (!resources_ok(op)) continue;
        best = rl[i];
        best_pos = i;
      }
      if (best >= 0) {
        rl.erase(rl.begin() + static_cast<std::ptrdiff_t>(best_pos));
        on_issue(best, t);
        horizon = std::max(horizon, ops_[best].avail);
        ++issued;
        last_progress_ = t;
      } else if (data_ready) {
        ++stall_[slot];
      }
    }
    step_rng(t);
    if (issued < ops_.size() && t - last_progress_ > kDeadlockWindow)
      fault("deadlock at cycle " + std::to_string(t) + ": " +
            std::to_string(ops_.size() - issued) + " operations pending, " +
            std::to_string(fifo_.size() - fifo_head_) + " constants queued");
    ++t;
  }

  SimResult res;
  SimReport& r = res.report;
  const unsigned blocks = static_cast<unsigned>(blocks_.size());
  std::vector<std::int64_t> finish(blocks);
  for (unsigned b = 0; b < blocks; ++b) finish[b] = groups_[blocks_[b].last_group].max_avail;
  for (unsigned b = 0; b < std::min(blocks, cfg_.lanes); ++b)
    r.latency_cycles = std::max<std::uint64_t>(r.latency_cycles, finish[b]);
  r.total_cycles = static_cast<std::uint64_t>(horizon);

  double ii_sum = 0;
  unsigned ii_lanes = 0;
  for (unsigned ln = 0; ln < cfg_.lanes && ln + cfg_.lanes < blocks; ++ln) {
    unsigned last = ln;
    while (last + cfg_.lanes < blocks) last += cfg_.lanes;
    const unsigned count = (last - ln) / cfg_.lanes;
    ii_sum += static_cast<double>(finish[last] - finish[ln]) / count;
    ++ii_lanes;
  }
  r.initiation_interval_cycles =
      ii_lanes ? static_cast<std::uint64_t>(std::llround(ii_sum / ii_lanes))
               : r.latency_cycles;
  const double ii = static_cast<double>(r.initiation_interval_cycles);
  r.elements_per_cycle = p_.l * cfg_.lanes / ii;
  r.state_elements_per_cycle = n_ * cfg_.lanes / ii;

  std::uint64_t ark_st = 0, agn_st = 0;
  for (unsigned ln = 0; ln < cfg_.lanes; ++ln) {
    ark_st += stall_[ln * kLaneUnits + kUArk];
    agn_st += stall_[ln * kLaneUnits + kUAgn];
  }
  r.passes = count_bubbles(trace_);
  std::uint64_t mrmc_st = 0;
  for (const auto& ps : r.passes) {
    r.bubble_count += ps.bubble;
    if (ps.stall_before) mrmc_st += *ps.stall_before;
    if (ps.lane == 0 && ps.block == 0 && ps.layer_entry) {
      r.bubbles_per_layer.push_back(ps.bubble);
      if (ps.stall_before) r.inter_rf_stalls.push_back(*ps.stall_before);
    }
  }
  r.stall_cycles_by_unit = {{"ARK", ark_st}, {"AGN", agn_st}, {"MRMC", mrmc_st},
                            {"NONLIN", 0}, {"RNG", producer_stalls_}};
  r.rng_stall_cycles = ark_st + agn_st;
  r.producer_stall_cycles = producer_stalls_;
  r.fifo_max_occupancy = fifo_max_;
  if (d1_) r.presample_cycles = static_cast<std::uint64_t>(groups_[presample_group_[0]].max_avail);
  for (const auto& bs : blocks_) r.rc_bits_demand += bs.rc_bits;
  r.constants_consumed = rc_seq_.size();
  for (const auto& ev : trace_.events) ++r.events_by_unit[to_string(ev.unit)];
  for (const auto& bs : blocks_)
    r.keystreams.emplace_back(bs.out.back().begin(), bs.out.back().begin() + p_.l);
  res.trace = std::move(trace_);
  return res;
}

}  // namespace

SimResult simulate(const HwConfig& cfg, const Key& key,
                   std::span<const std::uint8_t> nonce, unsigned blocks) {
  Engine e(cfg, key, nonce, blocks);
  return e.run();
}

FifoResult fifo_model(double producer_bits_per_cycle,
                      std::span<const unsigned> consumer_schedule,
                      unsigned depth, double bits_per_constant) {
  if (producer_bits_per_cycle < 0 || bits_per_constant <= 0)
    throw ParameterError("fifo_model rates must be positive");
  FifoResult r;
  std::uint64_t occ = 0;
  double credit = 0;
  std::size_t i = 0;
  while (i < consumer_schedule.size()) {
    // Producer: bits that cannot be stored are dropped, the AES stalls.
    credit += producer_bits_per_cycle;
    while (credit >= bits_per_constant && occ < depth) {
      credit -= bits_per_constant;
      ++occ;
    }
    if (occ == depth) {
      if (credit >= bits_per_constant) ++r.producer_stalls;
      credit = std::min(credit, bits_per_constant);
    }
    r.max_occupancy = std::max(r.max_occupancy, occ);
    const unsigned want = consumer_schedule[i];
    if (occ >= want) {
      occ -= want;
      ++i;
    } else {
      ++r.consumer_stalls;
    }
  }
  return r;
}

std::vector<unsigned> steady_schedule(double bits_per_cycle,
                                      double bits_per_constant,
                                      unsigned cycles) {
  std::vector<unsigned> s(cycles);
  const double rate = bits_per_cycle / bits_per_constant;
  auto upto = [&](unsigned c) {
    return static_cast<std::uint64_t>(std::floor(c * rate + 1e-9));
  };
  for (unsigned c = 0; c < cycles; ++c)
    s[c] = static_cast<unsigned>(upto(c + 1) - upto(c));
  return s;
}

std::vector<MrmcPass> count_bubbles(const Trace& trace) {
  struct StageStats {
    std::uint32_t min_avail = UINT32_MAX, max_avail = 0, max_done = 0;
  };
  using K = std::tuple<unsigned, std::uint32_t, unsigned>;
  std::map<K, StageStats> outs;
  std::map<K, MrmcPass> passes;
  std::map<unsigned, std::vector<char>> busy;
  for (const auto& ev : trace.events) {
    const K k{ev.lane, ev.block, ev.stage};
    const bool datapath = ev.unit == Unit::kArk || ev.unit == Unit::kNonlin ||
                          ev.unit == Unit::kAgn ||
                          (ev.unit == Unit::kMrmc && ev.phase == 1);
    if (datapath) {
      auto& st = outs[k];
      st.min_avail = std::min(st.min_avail, ev.avail);
      st.max_avail = std::max(st.max_avail, ev.avail);
      st.max_done = std::max(st.max_done, ev.done);
    }
    if (ev.unit != Unit::kMrmc) continue;
    auto& b = busy[ev.lane];
    if (b.size() <= ev.done) b.resize(ev.done + 1, 0);
    for (auto c = ev.cycle; c <= ev.done; ++c) b[c] = 1;
    auto [it, fresh] = passes.try_emplace(k);
    auto& ps = it->second;
    if (fresh) {
      ps.lane = ev.lane;
      ps.block = ev.block;
      ps.stage = ev.stage;
      ps.first_mc = UINT32_MAX;
    }
    if (ev.phase == 0) ps.first_mc = std::min(ps.first_mc, ev.cycle);
    else ps.last_mr = std::max(ps.last_mr, ev.cycle);
  }

  std::vector<MrmcPass> out;
  const MrmcPass* prev = nullptr;
  for (auto& [k, ps] : passes) {
    const auto s = ps.stage;
    ps.layer_entry = !(s >= 2 && trace.stages[s - 2] == StageKind::kMrmc);
    std::uint32_t fa = 0;
    if (s > 0) {
      const auto& st = outs[{ps.lane, ps.block, s - 1}];
      fa = st.min_avail;
      if (!trace.function_overlap)
        fa = std::max(fa, trace.vector_width > 1 ? st.max_done + 1 : st.max_avail);
    }
    ps.first_input = fa;
    const auto& b = busy[ps.lane];
    for (auto c = fa; c < ps.first_mc; ++c)
      if (c >= b.size() || !b[c]) ++ps.bubble;
    if (prev && prev->lane == ps.lane && prev->block == ps.block)
      ps.stall_before = ps.first_mc - prev->last_mr - 1;
    out.push_back(ps);
    prev = &out.back();
  }
  return out;
}

namespace {

struct GoldenStages {
  std::vector<Residues> states;  // output of each stage, n entries
};

GoldenStages golden_stages(const CipherParams& p, const Key& key,
                           const KeystreamResult& g) {
  GoldenStages gs;
  const auto plan = stage_plan(p);
  StateMatrix x(p.q, p.v, p.ic);
  Residues head;
  unsigned layer = 0;
  for (auto kind : plan) {
    switch (kind) {
      case StageKind::kArk:
        if (p.scheme == Scheme::kRubato && layer == p.rounds) {
          head = ark(truncate(x, p.l), std::span(key.k).first(p.l),
                     g.constants[layer].rc, p.q);
          Residues full(p.n, 0);
          std::copy(head.begin(), head.end(), full.begin());
          gs.states.push_back(full);
        } else {
          x = ark(x, key, g.constants[layer]);
          gs.states.push_back(x.elems);
        }
        ++layer;
        break;
      case StageKind::kMrmc:
        x = mrmc(x, p.mix);
        gs.states.push_back(x.elems);
        break;
      case StageKind::kCube:
        x = cube(x);
        gs.states.push_back(x.elems);
        break;
      case StageKind::kFeistel:
        x = feistel(x);
        gs.states.push_back(x.elems);
        break;
      case StageKind::kAgn: {
        Residues full(p.n, 0);
        const auto z = agn(head, g.noise, p.q);
        std::copy(z.begin(), z.end(), full.begin());
        gs.states.push_back(full);
        break;
      }
    }
  }
  return gs;
}

}  // namespace

VerifyReport verify_trace(const Trace& trace, const CipherParams& p,
                          const Key& key,
                          std::span<const KeystreamResult> golden) {
  VerifyReport rep;
  std::vector<GoldenStages> gs;
  for (const auto& g : golden) gs.push_back(golden_stages(p, key, g));
  const auto& q = p.q;
  const unsigned v = p.v;
  const unsigned last_stage = static_cast<unsigned>(trace.stages.size()) - 1;

  auto diverge = [&](const TraceEvent& ev, unsigned elem, std::uint64_t want,
                     std::uint64_t got, std::string what) {
    if (!rep.ok) return;
    rep.ok = false;
    rep.first = Divergence{ev.cycle, ev.unit, ev.lane, ev.block, elem, want, got,
                           std::move(what)};
  };

  std::vector<std::vector<std::uint64_t>> z(golden.size());
  std::vector<std::vector<char>> seen(golden.size());
  for (std::size_t b = 0; b < golden.size(); ++b) {
    z[b].assign(p.l, 0);
    seen[b].assign(p.l, 0);
  }

  for (const auto& ev : trace.events) {
    if (!rep.ok) break;
    ++rep.events_checked;
    if (ev.block >= golden.size()) {
      diverge(ev, 0, 0, 0, "event for a block without golden output");
      break;
    }
    const auto& g = golden[ev.block];
    const auto& st = gs[ev.block].states;
    if (ev.indices.size() != ev.values.size() &&
        !(ev.unit == Unit::kMrmc && ev.phase == 0)) {
      diverge(ev, 0, ev.indices.size(), ev.values.size(), "payload shape");
      break;
    }
    switch (ev.unit) {
      case Unit::kRng:
      case Unit::kFifo:
        for (std::size_t i = 0; i < ev.values.size(); ++i) {
          const unsigned layer = ev.layers.at(i);
          const unsigned e = ev.indices[i] - 1u;
          const auto want = g.constants.at(layer).rc.at(e);
          if (want != ev.values[i])
            diverge(ev, e + 1, want, ev.values[i], "round constant");
        }
        break;
      case Unit::kMrmc:
        if (ev.phase == 1) {
          for (std::size_t i = 0; i < ev.values.size(); ++i) {
            const unsigned e = ev.indices[i] - 1u;
            if (st[ev.stage][e] != ev.values[i])
              diverge(ev, e + 1, st[ev.stage][e], ev.values[i], "MixRows output");
          }
        } else {
          const Residues& in = ev.stage == 0 ? p.ic : st[ev.stage - 1];
          const unsigned r0 = ev.aux < 0 ? 0 : static_cast<unsigned>(ev.aux);
          const unsigned rows = ev.aux < 0 ? v : 1;
          if (ev.values.size() != rows || ev.indices.size() != v) {
            diverge(ev, 0, rows, ev.values.size(), "MixColumns payload shape");
            break;
          }
          for (unsigned r = 0; r < rows; ++r) {
            std::uint64_t acc = 0;
            for (unsigned k = 0; k < v; ++k)
              acc = q.add(acc, q.mul(p.mix.at(r0 + r, k), in[ev.indices[k] - 1u]));
            if (acc != ev.values[r])
              diverge(ev, ev.indices[0], acc, ev.values[r], "MixColumns output");
          }
        }
        break;
      default:
        for (std::size_t i = 0; i < ev.values.size(); ++i) {
          const unsigned e = ev.indices[i] - 1u;
          if (st[ev.stage][e] != ev.values[i])
            diverge(ev, e + 1, st[ev.stage][e], ev.values[i],
                    to_string(ev.unit) + " output");
          if (ev.stage == last_stage && ev.unit != Unit::kTr && e < p.l) {
            z[ev.block][e] = ev.values[i];
            seen[ev.block][e] = 1;
          }
        }
        break;
    }
  }
  if (!rep.ok) return rep;

  for (std::size_t b = 0; b < golden.size(); ++b)
    for (unsigned e = 0; e < p.l; ++e) {
      if (!seen[b][e] || z[b][e] != golden[b].z[e]) {
        Divergence d;
        d.block = static_cast<std::uint32_t>(b);
        d.element = e + 1;
        d.expected = golden[b].z[e];
        d.actual = z[b][e];
        d.what = seen[b][e] ? "keystream element" : "keystream element missing";
        rep.ok = false;
        rep.first = d;
        return rep;
      }
    }
  return rep;
}

void write_trace_csv(std::ostream& os, const Trace& trace) {
  os << "cycle,unit,lane,indices,order,values_hex\n";
  char buf[32];
  for (const auto& ev : trace.events) {
    os << ev.cycle << ',' << to_string(ev.unit) << ',' << ev.lane << ',';
    for (std::size_t i = 0; i < ev.indices.size(); ++i)
      os << (i ? ";" : "") << ev.indices[i];
    os << ',' << to_string(ev.order) << ',';
    for (std::size_t i = 0; i < ev.values.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%llx",
                    static_cast<unsigned long long>(ev.values[i]));
      os << (i ? ";" : "") << buf;
    }
    os << '\n';
  }
}

std::string report_json(const SimReport& r, const HwConfig& cfg,
                        std::optional<double> freq_mhz) {
  nlohmann::ordered_json j;
  j["version"] = HHESIM_VERSION;
  auto& c = j["config"];
  c["scheme"] = to_string(cfg.params.scheme);
  c["variant"] = to_string(cfg.variant);
  c["q"] = cfg.params.q.value();
  c["n"] = cfg.params.n;
  c["l"] = cfg.params.l;
  c["r"] = cfg.params.rounds;
  c["lanes"] = cfg.lanes;
  c["vector_width"] = cfg.vector_width;
  c["fifo_depth"] = cfg.fifo_depth;
  c["rng_bits_per_cycle"] = cfg.rng_bits_per_cycle;
  c["rejection_model"] =
      cfg.rejection_model == RejectionModel::kExpectedRate ? "expected_rate" : "stream_exact";
  c["function_overlap"] = cfg.function_overlap;
  c["mrmc_opt"] = cfg.mrmc_opt;
  c["warm_start"] = cfg.warm_start;
  c["timing"] = {{"ark", cfg.timing.ark},
                 {"cube", cfg.timing.cube},
                 {"cube_occupancy", cfg.timing.cube_occupancy},
                 {"feistel", cfg.timing.feistel},
                 {"agn", cfg.timing.agn},
                 {"mix_columns", cfg.timing.mix_columns},
                 {"mix_rows", cfg.timing.mix_rows}};
  j["latency_cycles"] = r.latency_cycles;
  j["initiation_interval_cycles"] = r.initiation_interval_cycles;
  j["total_cycles"] = r.total_cycles;
  j["elements_per_cycle"] = r.elements_per_cycle;
  j["state_elements_per_cycle"] = r.state_elements_per_cycle;
  j["stall_cycles_by_unit"] = r.stall_cycles_by_unit;
  j["bubble_count"] = r.bubble_count;
  j["bubbles_per_layer"] = r.bubbles_per_layer;
  j["inter_rf_stalls"] = r.inter_rf_stalls;
  j["fifo_max_occupancy"] = r.fifo_max_occupancy;
  j["rng_stall_cycles"] = r.rng_stall_cycles;
  j["producer_stall_cycles"] = r.producer_stall_cycles;
  j["presample_cycles"] = r.presample_cycles;
  j["rc_bits_demand"] = r.rc_bits_demand;
  j["constants_consumed"] = r.constants_consumed;
  j["events_by_unit"] = r.events_by_unit;
  if (freq_mhz) {
    j["freq_mhz"] = *freq_mhz;
    j["msps"] = r.msps_at(*freq_mhz);
  } else {
    j["msps"] = "n/a (out of scope)";
  }
  return j.dump(2);
}


}  // namespace hhesim
