#include "dqs/engine.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <utility>

#include "dqs/error.hpp"

namespace dqs {

const char* instr_kind_name(InstrKind k) {
  switch (k) {
    case InstrKind::PREPARE: return "PREPARE";
    case InstrKind::SINGLE_GATE: return "SINGLE_GATE";
    case InstrKind::TWO_QUBIT_GATE: return "TWO_QUBIT_GATE";
    case InstrKind::MEASURE: return "MEASURE";
    case InstrKind::EPR_SEND: return "EPR_SEND";
    case InstrKind::EPR_RECV: return "EPR_RECV";
    case InstrKind::CLASSICAL_SEND: return "CLASSICAL_SEND";
    case InstrKind::CLASSICAL_RECV: return "CLASSICAL_RECV";
    case InstrKind::COND_CORRECTION: return "COND_CORRECTION";
    case InstrKind::RESET: return "RESET";
    case InstrKind::REPORT: return "REPORT";
  }
  return "?";
}

int InstructionSchedule::node_index(const std::string& node) const {
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i] == node) return static_cast<int>(i);
  return -1;
}

std::vector<std::string> validate_trace(const Trace& trace) {
  std::vector<std::string> out;
  auto where = [](const TraceEvent& e) {
    return std::string(instr_kind_name(e.kind)) + " at tick " + std::to_string(e.tick) + " on " +
           e.node;
  };

  // Global execution order is (tick, node index, per-node seq).
  std::map<int, int> last_seq;
  for (size_t i = 0; i < trace.size(); ++i) {
    const TraceEvent& e = trace[i];
    if (i > 0) {
      const TraceEvent& p = trace[i - 1];
      if (e.tick < p.tick || (e.tick == p.tick && e.node_index < p.node_index))
        out.push_back("event order violated: " + where(e) + " follows " + where(p));
    }
    auto it = last_seq.find(e.node_index);
    if (it != last_seq.end() && e.seq <= it->second)
      out.push_back("per-node sequence not increasing: " + where(e));
    last_seq[e.node_index] = e.seq;
  }

  // Classical messages: every receive needs a strictly earlier matching
  // send with the same payload; every send must be received.
  struct Pending {
    size_t idx;
    bool used = false;
  };
  std::vector<Pending> sends;
  for (size_t i = 0; i < trace.size(); ++i)
    if (trace[i].kind == InstrKind::CLASSICAL_SEND) sends.push_back({i});
  for (const TraceEvent& e : trace) {
    if (e.kind != InstrKind::CLASSICAL_RECV) continue;
    bool matched = false;
    for (Pending& s : sends) {
      const TraceEvent& se = trace[s.idx];
      if (s.used || se.program != e.program || se.bit != e.bit || se.node != e.peer ||
          se.peer != e.node || se.tick >= e.tick)
        continue;
      s.used = true;
      matched = true;
      if (se.value >= 0 && e.value >= 0 && se.value != e.value)
        out.push_back("payload mismatch for bit '" + e.bit + "': sent " +
                      std::to_string(se.value) + ", received " + std::to_string(e.value));
      break;
    }
    if (!matched)
      out.push_back("receive without an earlier matching send: bit '" + e.bit + "' " + where(e));
  }
  for (const Pending& s : sends)
    if (!s.used)
      out.push_back("message never arrives: bit '" + trace[s.idx].bit + "' sent from " +
                    trace[s.idx].node + " tick " + std::to_string(trace[s.idx].tick));

  // EPR halves pair up on the same tick across the two nodes.
  std::vector<Pending> epr_recv;
  for (size_t i = 0; i < trace.size(); ++i)
    if (trace[i].kind == InstrKind::EPR_RECV) epr_recv.push_back({i});
  for (const TraceEvent& e : trace) {
    if (e.kind != InstrKind::EPR_SEND) continue;
    bool matched = false;
    for (Pending& r : epr_recv) {
      const TraceEvent& re = trace[r.idx];
      if (r.used || re.program != e.program || re.tick != e.tick || re.node != e.peer ||
          re.peer != e.node || re.qubits != e.qubits)
        continue;
      r.used = true;
      matched = true;
      break;
    }
    if (!matched) out.push_back("EPR half without a same-tick counterpart: " + where(e));
  }
  for (const Pending& r : epr_recv)
    if (!r.used) out.push_back("EPR receive without a generator: " + where(trace[r.idx]));

  // Conditional corrections fire strictly after the measurement that
  // produced their bit, and after local delivery when it was remote.
  for (const TraceEvent& e : trace) {
    if (e.kind != InstrKind::COND_CORRECTION) continue;
    const TraceEvent* meas = nullptr;
    for (const TraceEvent& m : trace)
      if (m.kind == InstrKind::MEASURE && m.program == e.program && m.bit == e.bit &&
          m.tick < e.tick) {
        meas = &m;
        break;
      }
    if (!meas) {
      out.push_back("correction without an earlier measurement: bit '" + e.bit + "' " + where(e));
      continue;
    }
    if (meas->node != e.node) {
      bool delivered = false;
      for (const TraceEvent& r : trace)
        if (r.kind == InstrKind::CLASSICAL_RECV && r.program == e.program && r.bit == e.bit &&
            r.node == e.node && r.tick <= e.tick)
          delivered = true;
      if (!delivered)
        out.push_back("correction before delivery of bit '" + e.bit + "': " + where(e));
    }
  }

  // Sends happen strictly after the producing measurement.
  for (const TraceEvent& e : trace) {
    if (e.kind != InstrKind::CLASSICAL_SEND) continue;
    bool ok = false;
    for (const TraceEvent& m : trace)
      if (m.kind == InstrKind::MEASURE && m.program == e.program && m.bit == e.bit &&
          m.node == e.node && m.tick < e.tick)
        ok = true;
    if (!ok)
      out.push_back("send before the producing measurement: bit '" + e.bit + "' " + where(e));
  }
  return out;
}

namespace {

const std::string& sched_node(const Topology& topo, size_t ni) { return topo.qpus[ni].id; }

Instruction make_instr(long tick, InstrKind k, Gate g, GateRole role, int block, int origin) {
  Instruction in;
  in.tick = tick;
  in.kind = k;
  in.bit = g.bit;
  in.gate = std::move(g);
  in.role = role;
  in.block = block;
  in.origin = origin;
  return in;
}

}  // namespace

InstructionSchedule compile_instructions(const DistributedCircuit& dc, const Topology& topo,
                                         const EngineOptions& opt) {
  if (opt.message_latency < 1)
    throw Error("unsatisfiable timing: message latency must be at least 1 tick");

  InstructionSchedule sched;
  for (const QpuSpec& q : topo.qpus) sched.nodes.push_back(q.id);
  sched.per_node.resize(sched.nodes.size());

  auto node_idx = [&](const std::string& n) {
    int i = topo.index_of(n);
    if (i < 0) throw Error("unknown node '" + n + "' in distributed circuit");
    return i;
  };
  auto dur = [&](const std::string& node, GateKind k) -> long {
    int d = topo.gate_time(node, kind_name(k));
    if (d < 1)
      throw Error(std::string("unsatisfiable timing: gate time for ") + kind_name(k) + " on " +
                  node + " is " + std::to_string(d));
    return d;
  };
  auto emit = [&](const std::string& node, Instruction in) { sched.per_node[node_idx(node)].push_back(std::move(in)); };

  std::map<QubitRef, long> avail;
  // block id -> tick after which its COND_X has been applied
  std::map<int, long> condx_done;
  // bit -> (home node, tick from which it is locally readable)
  std::map<std::string, std::pair<std::string, long>> bit_ready;
  // (bit, node) -> tick from which a forwarded copy is readable there
  std::map<std::pair<std::string, std::string>, long> delivered;

  // Deliver `bit` to `node`, forwarding once if it lives elsewhere.
  // Returns the first tick the value is readable at `node`.
  auto deliver = [&](const std::string& bit, const std::string& node) -> long {
    auto it = bit_ready.find(bit);
    if (it == bit_ready.end())
      throw Error("message never arrives: bit '" + bit + "' is used before any measurement");
    const auto& [home, ready] = it->second;
    if (home == node) return ready;
    auto key = std::make_pair(bit, node);
    auto dit = delivered.find(key);
    if (dit != delivered.end()) return dit->second;
    Gate carrier;
    carrier.bit = bit;
    Instruction send = make_instr(ready, InstrKind::CLASSICAL_SEND, carrier, GateRole::Data, -1, -1);
    send.peer = node;
    emit(home, std::move(send));
    long arrive = ready + opt.message_latency;
    Instruction recv = make_instr(arrive, InstrKind::CLASSICAL_RECV, carrier, GateRole::Data, -1, -1);
    recv.peer = home;
    emit(node, std::move(recv));
    delivered[key] = arrive;
    return arrive;
  };

  const std::vector<Gate>& G = dc.circuit.gates;

  auto entangler_at = [&](size_t i) {
    if (dc.roles[i] != GateRole::Entangle || G[i].kind != GateKind::EPR_GEN) return false;
    if (i + 3 >= G.size()) return false;
    int b = dc.block_ids[i];
    return dc.roles[i + 1] == GateRole::Entangle && G[i + 1].kind == GateKind::CNOT &&
           dc.block_ids[i + 1] == b && dc.roles[i + 2] == GateRole::Entangle &&
           G[i + 2].kind == GateKind::MEASURE && dc.block_ids[i + 2] == b &&
           dc.roles[i + 3] == GateRole::Entangle && G[i + 3].kind == GateKind::COND_X &&
           dc.block_ids[i + 3] == b;
  };
  auto disentangler_at = [&](size_t i) {
    if (dc.roles[i] != GateRole::Disentangle || G[i].kind != GateKind::H) return false;
    if (i + 4 >= G.size()) return false;
    int b = dc.block_ids[i];
    return dc.roles[i + 1] == GateRole::Disentangle && G[i + 1].kind == GateKind::MEASURE &&
           dc.block_ids[i + 1] == b && dc.roles[i + 2] == GateRole::Disentangle &&
           G[i + 2].kind == GateKind::COND_Z && dc.block_ids[i + 2] == b &&
           dc.roles[i + 3] == GateRole::Disentangle && G[i + 3].kind == GateKind::RESET &&
           dc.block_ids[i + 3] == b && dc.roles[i + 4] == GateRole::Disentangle &&
           G[i + 4].kind == GateKind::RESET && dc.block_ids[i + 4] == b;
  };

  for (size_t i = 0; i < G.size(); ++i) {
    const Gate& g = G[i];
    GateRole role = dc.roles[i];
    int blk = dc.block_ids[i];
    int origin = dc.origins[i];

    if (entangler_at(i)) {
      // (t) EPR pair, (t+1) CNOT with the entangler measurement packed on
      // its closing tick, then send / receive+conditional-X.
      const QubitRef al = G[i].operands[0];
      const QubitRef ar = G[i].operands[1];
      const Gate& cnot = G[i + 1];
      const Gate& meas = G[i + 2];
      const Gate& condx = G[i + 3];
      const QubitRef c = cnot.operands[0];

      long t0 = std::max(avail[al], avail[ar]);
      Instruction es = make_instr(t0, InstrKind::EPR_SEND, g, role, blk, -1);
      es.peer = ar.node;
      emit(al.node, std::move(es));
      Instruction er = make_instr(t0, InstrKind::EPR_RECV, g, role, blk, -1);
      er.peer = al.node;
      emit(ar.node, std::move(er));
      avail[al] = t0 + dur(al.node, GateKind::EPR_GEN);
      avail[ar] = t0 + dur(ar.node, GateKind::EPR_GEN);

      long t1 = std::max(avail[al], avail[c]);
      emit(c.node, make_instr(t1, InstrKind::TWO_QUBIT_GATE, cnot, role, blk, -1));
      avail[c] = t1 + dur(c.node, GateKind::CNOT);
      long tm = t1 + dur(al.node, GateKind::CNOT) - 1;
      emit(al.node, make_instr(tm, InstrKind::MEASURE, meas, role, blk, -1));
      avail[al] = tm + dur(al.node, GateKind::MEASURE);
      bit_ready[meas.bit] = {al.node, avail[al]};

      Gate carrier;
      carrier.bit = meas.bit;
      Instruction send =
          make_instr(avail[al], InstrKind::CLASSICAL_SEND, carrier, role, blk, -1);
      send.peer = ar.node;
      emit(al.node, std::move(send));
      long arrive = avail[al] + opt.message_latency;
      Instruction recv = make_instr(arrive, InstrKind::CLASSICAL_RECV, carrier, role, blk, -1);
      recv.peer = al.node;
      emit(ar.node, std::move(recv));
      delivered[{meas.bit, ar.node}] = arrive;

      long tx = std::max(arrive, avail[ar]);
      emit(ar.node, make_instr(tx, InstrKind::COND_CORRECTION, condx, role, blk, -1));
      avail[ar] = tx + dur(ar.node, GateKind::COND_X);
      condx_done[blk] = avail[ar];
      i += 3;
      continue;
    }

    if (disentangler_at(i)) {
      const Gate& h = G[i];
      const Gate& meas = G[i + 1];
      const Gate& condz = G[i + 2];
      const QubitRef ar = h.operands[0];
      const QubitRef c = condz.operands[0];

      long th = avail[ar];
      emit(ar.node, make_instr(th, InstrKind::SINGLE_GATE, h, role, blk, -1));
      long tm = th + dur(ar.node, GateKind::H) - 1;
      emit(ar.node, make_instr(tm, InstrKind::MEASURE, meas, role, blk, -1));
      avail[ar] = tm + dur(ar.node, GateKind::MEASURE);
      bit_ready[meas.bit] = {ar.node, avail[ar]};

      Gate carrier;
      carrier.bit = meas.bit;
      Instruction send =
          make_instr(avail[ar], InstrKind::CLASSICAL_SEND, carrier, role, blk, -1);
      send.peer = c.node;
      emit(ar.node, std::move(send));
      long arrive = avail[ar] + opt.message_latency;
      Instruction recv = make_instr(arrive, InstrKind::CLASSICAL_RECV, carrier, role, blk, -1);
      recv.peer = ar.node;
      emit(c.node, std::move(recv));
      delivered[{meas.bit, c.node}] = arrive;

      long tz = std::max(arrive, avail[c]);
      emit(c.node, make_instr(tz, InstrKind::COND_CORRECTION, condz, role, blk, -1));
      avail[c] = tz + dur(c.node, GateKind::COND_Z);

      // Each ancilla stays live until the correction its measurement feeds
      // has fired: deferred mode replaces that correction with a gate on
      // the ancilla itself, so an earlier reset would orphan it. Costs at
      // most a few idle ticks before the slot can be reused.
      for (size_t k = i + 3; k <= i + 4; ++k) {
        const QubitRef q = G[k].operands[0];
        long t = std::max(avail[q], q == ar ? avail[c] : condx_done[blk]);
        emit(q.node, make_instr(t, InstrKind::RESET, G[k], role, blk, -1));
        avail[q] = t + dur(q.node, GateKind::RESET);
      }
      i += 4;
      continue;
    }

    switch (g.kind) {
      case GateKind::PREPARE: {
        const QubitRef q = g.operands[0];
        long t = avail[q];
        emit(q.node, make_instr(t, InstrKind::PREPARE, g, role, blk, origin));
        avail[q] = t + dur(q.node, GateKind::PREPARE);
        break;
      }
      case GateKind::MEASURE: {
        const QubitRef q = g.operands[0];
        long t = avail[q];
        emit(q.node, make_instr(t, InstrKind::MEASURE, g, role, blk, origin));
        avail[q] = t + dur(q.node, GateKind::MEASURE);
        bit_ready[g.bit] = {q.node, avail[q]};
        for (auto it = delivered.begin(); it != delivered.end();)
          it = (it->first.first == g.bit) ? delivered.erase(it) : std::next(it);
        break;
      }
      case GateKind::RESET: {
        const QubitRef q = g.operands[0];
        long t = avail[q];
        emit(q.node, make_instr(t, InstrKind::RESET, g, role, blk, origin));
        avail[q] = t + dur(q.node, GateKind::RESET);
        break;
      }
      case GateKind::COND_X:
      case GateKind::COND_Z: {
        const QubitRef q = g.operands[0];
        long tb = deliver(g.bit, q.node);
        long t = std::max(avail[q], tb);
        emit(q.node, make_instr(t, InstrKind::COND_CORRECTION, g, role, blk, origin));
        avail[q] = t + dur(q.node, g.kind);
        break;
      }
      case GateKind::EPR_GEN: {
        const QubitRef a = g.operands[0];
        const QubitRef b = g.operands[1];
        long t = std::max(avail[a], avail[b]);
        Instruction es = make_instr(t, InstrKind::EPR_SEND, g, role, blk, origin);
        es.peer = b.node;
        emit(a.node, std::move(es));
        Instruction er = make_instr(t, InstrKind::EPR_RECV, g, role, blk, origin);
        er.peer = a.node;
        emit(b.node, std::move(er));
        avail[a] = t + dur(a.node, GateKind::EPR_GEN);
        avail[b] = t + dur(b.node, GateKind::EPR_GEN);
        break;
      }
      default: {
        if (g.operands.size() == 1) {
          const QubitRef q = g.operands[0];
          long t = avail[q];
          emit(q.node, make_instr(t, InstrKind::SINGLE_GATE, g, role, blk, origin));
          avail[q] = t + dur(q.node, g.kind);
        } else {
          const QubitRef a = g.operands[0];
          const QubitRef b = g.operands[1];
          if (a.node != b.node)
            throw Error(std::string("unsupported non-local kind ") + kind_name(g.kind) +
                        " reached the instruction compiler; remap the circuit first");
          long t = std::max(avail[a], avail[b]);
          emit(a.node, make_instr(t, InstrKind::TWO_QUBIT_GATE, g, role, blk, origin));
          avail[a] = t + dur(a.node, g.kind);
          avail[b] = avail[a];
        }
        break;
      }
    }
  }

  for (auto& [bit, home] : bit_ready) sched.bit_home[bit] = home.first;
  long horizon = 0;
  for (auto& lst : sched.per_node) {
    std::stable_sort(lst.begin(), lst.end(),
                     [](const Instruction& a, const Instruction& b) { return a.tick < b.tick; });
    if (!lst.empty()) horizon = std::max(horizon, lst.back().tick);
  }
  sched.horizon = horizon;
  return sched;
}

void add_reports(InstructionSchedule& sched, const OutputSpec& output, const Allocation* alloc) {
  long t = sched.horizon + 1;
  if (output.mode == OutputSpec::Mode::Exact) {
    if (!output.pauli) throw Error("invalid output: exact mode requires a Pauli string");
    PauliString resolved;
    for (const auto& [q, axis] : output.pauli->factors) {
      QubitRef rq = q;
      if (q.is_abstract()) {
        if (!alloc || q.index < 0 || q.index >= static_cast<int>(alloc->slots.size()))
          throw Error("invalid output: Pauli factor on " + q.str() + " has no placement");
        rq = alloc->slots[q.index];
      }
      resolved.factors[rq] = axis;
    }
    int ni = 0;
    if (!resolved.factors.empty()) {
      ni = sched.node_index(resolved.factors.begin()->first.node);
      if (ni < 0)
        throw Error("unknown node '" + resolved.factors.begin()->first.node + "' in output Pauli");
    }
    Instruction in;
    in.tick = t;
    in.kind = InstrKind::REPORT;
    in.report_pauli = std::move(resolved);
    sched.per_node[ni].push_back(std::move(in));
    sched.horizon = t;
    return;
  }
  if (output.bits.empty()) return;
  std::map<int, std::vector<std::string>> by_node;
  for (const std::string& name : output.bits) {
    auto it = sched.bit_home.find(name);
    if (it == sched.bit_home.end())
      throw Error("message never arrives: output bit '" + name + "' is never measured");
    by_node[sched.node_index(it->second)].push_back(name);
  }
  for (auto& [ni, names] : by_node) {
    Instruction in;
    in.tick = t;
    in.kind = InstrKind::REPORT;
    in.report_bits = std::move(names);
    sched.per_node[ni].push_back(std::move(in));
  }
  sched.horizon = t;
}

ExecutionResult execute(const std::vector<CompiledProgram>& programs, const Topology& topo,
                        CounterRng& rng, const EngineOptions& opt) {
  const bool deferred = opt.deferred_measurement;
  const size_t n_nodes = topo.qpus.size();

  std::vector<std::vector<Instruction>> merged(n_nodes);
  long max_reps = deferred ? 1 : 0;
  for (size_t pi = 0; pi < programs.size(); ++pi) {
    const CompiledProgram& cp = programs[pi];
    if (cp.schedule.per_node.size() != n_nodes)
      throw Error("internal: schedule was compiled against a different topology");
    if (!deferred && cp.repetitions < 1)
      throw Error("invalid program: repetitions must be at least 1");
    for (size_t ni = 0; ni < n_nodes; ++ni)
      for (const Instruction& in : cp.schedule.per_node[ni]) {
        merged[ni].push_back(in);
        merged[ni].back().program = static_cast<int>(pi);
      }
    if (!deferred) max_reps = std::max(max_reps, cp.repetitions);
  }
  for (auto& lst : merged)
    std::stable_sort(lst.begin(), lst.end(), [](const Instruction& a, const Instruction& b) {
      return std::tie(a.tick, a.program) < std::tie(b.tick, b.program);
    });

  ExecutionResult res;
  res.outcomes.resize(programs.size());
  for (size_t pi = 0; pi < programs.size(); ++pi) {
    Outcome& oc = res.outcomes[pi];
    oc.program_index = programs[pi].program_index;
    oc.repetitions = deferred ? 0 : programs[pi].repetitions;
    oc.label = programs[pi].output.label;
    oc.bit_names = programs[pi].output.bits;
  }
  long last_tick = -1;
  for (const auto& lst : merged)
    if (!lst.empty()) last_tick = std::max(last_tick, lst.back().tick);
  res.ticks_elapsed = last_tick + 1;

  for (long shot = 0; shot < max_reps; ++shot) {
    StateVector sv(opt.kernels);
    std::map<std::tuple<int, std::string, std::string>, int> regs;  // (program, node, bit)
    struct Msg {
      long deliver;
      int program;
      std::string to;
      std::string bit;
      int value;
    };
    std::vector<Msg> mailbox;
    std::map<std::pair<int, std::string>, QubitRef> bit_src;  // deferred-mode sources
    std::vector<std::map<std::string, int>> reported(programs.size());
    std::vector<std::optional<double>> reported_val(programs.size());

    const bool tracing = opt.record_trace && !deferred && shot == 0;
    std::vector<size_t> cur(n_nodes, 0);
    Clock clk;
    bool more = true;
    while (more) {
      more = false;
      for (size_t ni = 0; ni < n_nodes; ++ni) {
        std::vector<Instruction>& lst = merged[ni];
        while (cur[ni] < lst.size() && lst[cur[ni]].tick == clk.tick) {
          const Instruction& in = lst[cur[ni]];
          const int p = in.program;
          const bool active = deferred || shot < programs[p].repetitions;
          int traced_value = -1;
          if (active) {
            const Gate& g = in.gate;
            // Qubits join the state lazily at first touch, in |0>. The
            // merged stream order is deterministic, so registration order
            // (and with it bit significance) is too.
            for (const QubitRef& q : g.operands) sv.register_qubit(q);
            switch (in.kind) {
              case InstrKind::PREPARE:
                sv.apply(g);
                break;
              case InstrKind::SINGLE_GATE:
              case InstrKind::TWO_QUBIT_GATE:
                sv.apply(g);
                break;
              case InstrKind::MEASURE:
                if (deferred) {
                  bit_src[{p, g.bit}] = g.operands[0];
                } else {
                  int v = sv.measure(g.operands[0], rng);
                  regs[{p, sched_node(topo, ni), g.bit}] = v;
                  traced_value = v;
                }
                break;
              case InstrKind::EPR_SEND: {
                if (opt.strict_ancilla)
                  for (const QubitRef& q : g.operands) {
                    const QpuSpec* spec = topo.find(q.node);
                    if (spec && q.index >= spec->num_qubits)
                      throw Error("capacity exceeded: ancilla " + q.str() +
                                  " lies past the declared size of " + q.node);
                  }
                sv.gen_epr(g.operands[0], g.operands[1]);
                break;
              }
              case InstrKind::EPR_RECV:
                break;  // generation happens on the sending half's node
              case InstrKind::CLASSICAL_SEND: {
                if (deferred) break;
                auto it = regs.find({p, sched_node(topo, ni), in.bit});
                if (it == regs.end())
                  throw Error("message never arrives: bit '" + in.bit + "' sent from " +
                              sched_node(topo, ni) + " before it was measured");
                mailbox.push_back({clk.tick + opt.message_latency, p, in.peer, in.bit, it->second});
                traced_value = it->second;
                break;
              }
              case InstrKind::CLASSICAL_RECV: {
                if (deferred) break;
                bool got = false;
                for (size_t mi = 0; mi < mailbox.size(); ++mi) {
                  const Msg& m = mailbox[mi];
                  if (m.program == p && m.to == sched_node(topo, ni) && m.bit == in.bit &&
                      m.deliver <= clk.tick) {
                    regs[{p, m.to, m.bit}] = m.value;
                    traced_value = m.value;
                    mailbox.erase(mailbox.begin() + static_cast<long>(mi));
                    got = true;
                    break;
                  }
                }
                if (!got)
                  throw Error("message never arrives: bit '" + in.bit + "' expected at " +
                              sched_node(topo, ni) + " by tick " + std::to_string(clk.tick));
                break;
              }
              case InstrKind::COND_CORRECTION: {
                const QubitRef& q = g.operands[0];
                if (deferred) {
                  auto it = bit_src.find({p, in.bit});
                  if (it == bit_src.end())
                    throw Error("message never arrives: bit '" + in.bit +
                                "' has no measurement source");
                  sv.apply(g.kind == GateKind::COND_X ? Gate::cnot(it->second, q)
                                                      : Gate::cz(it->second, q));
                } else {
                  auto it = regs.find({p, sched_node(topo, ni), in.bit});
                  if (it == regs.end())
                    throw Error("message never arrives: bit '" + in.bit + "' unavailable at " +
                                sched_node(topo, ni));
                  traced_value = it->second;
                  if (it->second)
                    sv.apply(Gate::single(
                        g.kind == GateKind::COND_X ? GateKind::X : GateKind::Z, q));
                }
                break;
              }
              case InstrKind::RESET:
                if (deferred)
                  sv.reset_deferred(g.operands[0]);
                else
                  sv.reset(g.operands[0], rng);
                break;
              case InstrKind::REPORT: {
                if (in.report_pauli) {
                  // A factor qubit no gate ever touched is physically |0>.
                  for (const auto& [fq, axis] : in.report_pauli->factors)
                    sv.register_qubit(fq);
                  reported_val[p] = sv.exact_expectation(*in.report_pauli);
                } else if (!deferred) {
                  for (const std::string& name : in.report_bits) {
                    auto it = regs.find({p, sched_node(topo, ni), name});
                    if (it == regs.end())
                      throw Error("message never arrives: output bit '" + name +
                                  "' was not delivered to " + sched_node(topo, ni));
                    reported[p][name] = it->second;
                  }
                }
                break;
              }
            }
          }
          if (tracing && active) {
            TraceEvent ev;
            ev.tick = in.tick;
            ev.node_index = static_cast<int>(ni);
            ev.node = sched_node(topo, ni);
            ev.seq = static_cast<int>(cur[ni]);
            ev.kind = in.kind;
            ev.gate_kind = in.gate.kind;
            ev.qubits = in.gate.operands;
            ev.bit = in.bit;
            ev.peer = in.peer;
            ev.program = programs[p].program_index;
            ev.role = in.role;
            ev.block = in.block;
            ev.value = traced_value;
            res.trace.push_back(std::move(ev));
          }
          ++cur[ni];
        }
        if (cur[ni] < lst.size()) more = true;
      }
      if (more) clk.advance();
    }

    for (size_t pi = 0; pi < programs.size(); ++pi) {
      const CompiledProgram& cp = programs[pi];
      if (!deferred && shot >= cp.repetitions) continue;
      Outcome& oc = res.outcomes[pi];
      if (cp.output.mode == OutputSpec::Mode::Exact) {
        if (!reported_val[pi])
          throw Error("internal: exact output was never reported for program " +
                      std::to_string(cp.program_index));
        oc.value = *reported_val[pi];
      } else if (!deferred) {
        std::string bs;
        bs.reserve(cp.output.bits.size());
        for (const std::string& name : cp.output.bits) {
          auto it = reported[pi].find(name);
          if (it == reported[pi].end())
            throw Error("message never arrives: output bit '" + name + "' was never reported");
          bs.push_back(static_cast<char>('0' + it->second));
        }
        ++oc.counts[bs];
        oc.last_bits = bs;
      }
    }
    if (opt.capture_final_state && shot == max_reps - 1) res.final_state = std::move(sv);
  }

  if (!deferred)
    for (size_t pi = 0; pi < programs.size(); ++pi)
      if (programs[pi].output.mode == OutputSpec::Mode::Parity) {
        long acc = 0;
        long tot = 0;
        for (const auto& [bs, k] : res.outcomes[pi].counts) {
          long ones = std::count(bs.begin(), bs.end(), '1');
          acc += (ones % 2 == 0) ? k : -k;
          tot += k;
        }
        res.outcomes[pi].value = tot ? static_cast<double>(acc) / static_cast<double>(tot) : 0.0;
      }
  return res;
}

ExecutionResult execute(const InstructionSchedule& sched, const Topology& topo, long repetitions,
                        uint64_t seed, const OutputSpec& output, const EngineOptions& opt) {
  CompiledProgram cp;
  cp.schedule = sched;
  cp.output = output;
  cp.repetitions = repetitions;
  CounterRng rng(seed);
  return execute(std::vector<CompiledProgram>{std::move(cp)}, topo, rng, opt);
}

ParallelRunResult run_parallel(const ParallelProgram& pp, const Topology& topo, uint64_t seed,
                               const EngineOptions& opt) {
  if (pp.allocations.size() != pp.programs.size())
    throw Error("internal: allocation list does not match the program list");
  ParallelRunResult out;
  out.outcomes.resize(pp.programs.size());
  CounterRng rng(seed);
  RemapOptions ropt;
  ropt.strict_ancilla = opt.strict_ancilla;

  for (int r = 0; r < pp.schedule.round_count(); ++r) {
    std::set<int> members;
    for (const std::set<int>& per_qpu : pp.schedule.rounds[r])
      members.insert(per_qpu.begin(), per_qpu.end());

    std::vector<const Allocation*> reserved;
    for (int idx : members) reserved.push_back(&pp.allocations[idx]);
    AncillaPool pool(topo, reserved);

    std::vector<CompiledProgram> cps;
    ResourceReport rres;
    for (int idx : members) {
      DistributedCircuit dcirc =
          remap(pp.programs[idx].circuit, pp.allocations[idx], topo, pool, ropt);
      for (const std::string& w : dcirc.warnings) out.warnings.push_back(w);
      InstructionSchedule sched = compile_instructions(dcirc, topo, opt);
      add_reports(sched, pp.programs[idx].output, &pp.allocations[idx]);
      CompiledProgram cp;
      cp.program_index = idx;
      cp.schedule = std::move(sched);
      cp.output = pp.programs[idx].output;
      cp.repetitions = pp.programs[idx].repetitions;
      cps.push_back(std::move(cp));
      rres += count_distributed(dcirc, opt.accounting);
    }

    ExecutionResult res = execute(cps, topo, rng, opt);
    for (Outcome& oc : res.outcomes) out.outcomes[oc.program_index] = std::move(oc);

    RoundReport rr;
    rr.round = r;
    for (const std::set<int>& per_qpu : pp.schedule.rounds[r]) {
      std::vector<int> ids;
      for (int idx : per_qpu) ids.push_back(idx + 1);
      rr.qpu_programs.push_back(std::move(ids));
    }
    rr.ticks_elapsed = res.ticks_elapsed;
    rr.resources = rres;
    rr.resources.ticks_elapsed = res.ticks_elapsed;
    out.totals += rr.resources;
    out.rounds.push_back(std::move(rr));
    out.traces.push_back(std::move(res.trace));
  }

  if (!opt.deferred_measurement) out.merged = merge(pp.merge_spec, out.outcomes);
  return out;
}

ParallelRunResult run_sequential(const std::vector<Program>& programs, const MergeSpec& merge_spec,
                                 uint64_t seed, const EngineOptions& opt) {
  ParallelRunResult out;
  out.outcomes.resize(programs.size());
  CounterRng rng(seed);

  for (size_t i = 0; i < programs.size(); ++i) {
    const Program& pr = programs[i];
    Topology topo;
    Allocation alloc;
    bool concrete = false;
    for (const QubitRef& q : pr.circuit.qubits)
      if (!q.is_abstract()) concrete = true;
    if (concrete) {
      // Pre-placed circuit: identity placement on a cluster shaped by its
      // own references.
      std::map<std::string, int> need;
      for (const QubitRef& q : pr.circuit.qubits) {
        if (q.is_abstract())
          throw Error("invalid program: circuit mixes abstract and concrete qubits");
        need[q.node] = std::max(need[q.node], q.index + 1);
        alloc.slots.push_back(q);
      }
      for (const QubitRef& q : pr.circuit.qubits)
        if (topo.index_of(q.node) < 0) topo.qpus.push_back({q.node, need[q.node], {}});
    } else {
      int w = std::max(pr.width(), 1);
      topo.qpus.push_back({"QPU_0", w, {}});
      for (int j = 0; j < w; ++j) alloc.slots.push_back({"QPU_0", j});
    }

    RemapOptions ropt;
    ropt.strict_ancilla = opt.strict_ancilla;
    DistributedCircuit dcirc = remap(pr.circuit, alloc, topo, ropt);
    for (const std::string& w : dcirc.warnings) out.warnings.push_back(w);
    InstructionSchedule sched = compile_instructions(dcirc, topo, opt);
    add_reports(sched, pr.output, &alloc);
    CompiledProgram cp;
    cp.program_index = static_cast<int>(i);
    cp.schedule = std::move(sched);
    cp.output = pr.output;
    cp.repetitions = pr.repetitions;

    ExecutionResult res = execute({cp}, topo, rng, opt);
    out.outcomes[i] = std::move(res.outcomes[0]);

    RoundReport rr;
    rr.round = static_cast<int>(i);
    rr.qpu_programs.push_back({static_cast<int>(i) + 1});
    rr.ticks_elapsed = res.ticks_elapsed;
    rr.resources = count_distributed(dcirc, opt.accounting);
    rr.resources.ticks_elapsed = res.ticks_elapsed;
    out.totals += rr.resources;
    out.rounds.push_back(std::move(rr));
    out.traces.push_back(std::move(res.trace));
  }

  if (!opt.deferred_measurement) out.merged = merge(merge_spec, out.outcomes);
  return out;
}

}  // namespace dqs
