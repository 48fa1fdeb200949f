#include "dqs/metrics.hpp"

#include <cmath>

#include "dqs/algorithms.hpp"
#include "dqs/error.hpp"

namespace dqs {

double AccountingProfile::block_overhead() const {
  return epr_generation + epr_transmission + entangle_cnot + entangle_measure + entangle_send +
         entangle_recv + entangle_correction + disentangle_h + disentangle_measure +
         disentangle_send + disentangle_recv + disentangle_correction + ancilla_reset;
}

ResourceReport& ResourceReport::operator+=(const ResourceReport& o) {
  prep_count += o.prep_count;
  gate_count += o.gate_count;
  measure_count += o.measure_count;
  epr_pairs += o.epr_pairs;
  classical_messages += o.classical_messages;
  correction_count += o.correction_count;
  reset_count += o.reset_count;
  total_ops += o.total_ops;
  ticks_elapsed += o.ticks_elapsed;
  return *this;
}

namespace {

// Program-level tallies; block protocol operations enter through `blocks`.
struct RawCounts {
  long prep = 0;
  long gate = 0;
  long meas = 0;
  long cond = 0;
  long reset = 0;
  long blocks = 0;

  void data_gate(const Gate& g) {
    switch (g.kind) {
      case GateKind::PREPARE: ++prep; break;
      case GateKind::MEASURE: ++meas; break;
      case GateKind::COND_X:
      case GateKind::COND_Z: ++cond; break;
      case GateKind::RESET: ++reset; break;
      default: ++gate; break;
    }
  }
};

ResourceReport finish(const RawCounts& rc, const AccountingProfile& p) {
  ResourceReport r;
  r.prep_count = rc.prep;
  r.gate_count = rc.gate;
  r.measure_count = rc.meas;
  r.epr_pairs = rc.blocks;
  r.classical_messages = 2 * rc.blocks;
  r.correction_count = rc.cond + 2 * rc.blocks;
  r.reset_count = rc.reset + 2 * rc.blocks;
  double total = static_cast<double>(rc.prep) * p.prep +
                 static_cast<double>(rc.gate + rc.cond + rc.reset) * p.gate +
                 static_cast<double>(rc.meas) * p.measure +
                 static_cast<double>(rc.blocks) * p.block_overhead();
  r.total_ops = std::lround(total);
  return r;
}

}  // namespace

ResourceReport count_monolithic(const Circuit& c, const AccountingProfile& profile) {
  RawCounts rc;
  for (const Gate& g : c.gates) rc.data_gate(g);
  return finish(rc, profile);
}

ResourceReport count_distributed(const DistributedCircuit& dc, const AccountingProfile& profile) {
  RawCounts rc;
  rc.blocks = static_cast<long>(dc.blocks.size());
  for (size_t i = 0; i < dc.circuit.gates.size(); ++i)
    if (dc.roles[i] == GateRole::Data || dc.roles[i] == GateRole::Serve)
      rc.data_gate(dc.circuit.gates[i]);
  return finish(rc, profile);
}

ResourceReport count_distributed(const Trace& trace, const AccountingProfile& profile) {
  RawCounts rc;
  long last_tick = -1;
  for (const TraceEvent& e : trace) {
    last_tick = std::max(last_tick, e.tick);
    const bool data = e.role == GateRole::Data || e.role == GateRole::Serve;
    switch (e.kind) {
      case InstrKind::PREPARE:
        if (data) ++rc.prep;
        break;
      case InstrKind::SINGLE_GATE:
      case InstrKind::TWO_QUBIT_GATE:
        if (data) ++rc.gate;
        break;
      case InstrKind::MEASURE:
        if (data) ++rc.meas;
        break;
      case InstrKind::COND_CORRECTION:
        if (data) ++rc.cond;
        break;
      case InstrKind::RESET:
        if (data) ++rc.reset;
        break;
      case InstrKind::EPR_SEND:
        if (e.role == GateRole::Entangle) ++rc.blocks;
        else ++rc.gate;  // bare pair generation outside a block
        break;
      default:
        break;  // receives, classical traffic and reports are block-rated
    }
  }
  ResourceReport r = finish(rc, profile);
  r.ticks_elapsed = last_tick + 1;
  return r;
}

std::vector<QpeSweepRow> sweep_qpe(int n_from, int n_to, const AccountingProfile& profile) {
  if (n_from < 1 || n_to < n_from) throw Error("invalid program: bad sweep range");
  std::vector<QpeSweepRow> rows;
  for (int n = n_from; n <= n_to; ++n) {
    QpeProgram qp = qpe_program(n, phase_unitary(1.0 / 3.0));
    Topology topo = qpe_two_qpu_topology(n);
    Allocation alloc = qpe_split_allocation(topo, n);
    DistributedCircuit dc = remap(qp.circuit, alloc, topo, RemapOptions{});
    QpeSweepRow row;
    row.n = n;
    row.monolithic = count_monolithic(qp.circuit, profile).total_ops;
    row.distributed = count_distributed(dc, profile).total_ops;
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_csv(const std::vector<QpeSweepRow>& rows) {
  std::string s = "n,monolithic,distributed\n";
  for (const QpeSweepRow& r : rows)
    s += std::to_string(r.n) + "," + std::to_string(r.monolithic) + "," +
         std::to_string(r.distributed) + "\n";
  return s;
}

}  // namespace dqs
