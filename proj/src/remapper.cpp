#include "dqs/remapper.hpp"

#include <algorithm>
#include <map>

#include "dqs/error.hpp"

namespace dqs {

const char* role_name(GateRole r) {
  switch (r) {
    case GateRole::Data:
      return "data";
    case GateRole::Entangle:
      return "entangle";
    case GateRole::Serve:
      return "serve";
    case GateRole::Disentangle:
      return "disentangle";
  }
  return "?";
}

namespace {

QubitRef placed(const QubitRef& q, const Allocation& alloc) {
  if (!q.is_abstract()) return q;
  if (q.index < 0 || q.index >= static_cast<int>(alloc.slots.size()))
    throw Error("allocation missing abstract qubit q" + std::to_string(q.index));
  return alloc.slots[q.index];
}

}  // namespace

AncillaPool::AncillaPool(const Topology& topo, const std::vector<const Allocation*>& reserved) {
  for (const auto& qpu : topo.qpus) {
    capacity_[qpu.id] = qpu.num_qubits;
    next_overflow_[qpu.id] = 0;
    auto& slots = free_[qpu.id];
    for (int i = 0; i < qpu.num_qubits; ++i) slots.insert(i);
  }
  for (const Allocation* a : reserved) {
    if (!a) continue;
    for (const auto& s : a->slots) {
      auto it = free_.find(s.node);
      if (it != free_.end()) it->second.erase(s.index);
    }
  }
}

QubitRef AncillaPool::acquire(const std::string& node, bool strict) {
  auto it = free_.find(node);
  if (it == free_.end()) throw Error("unknown node " + node);
  if (!it->second.empty()) {
    const int idx = *it->second.begin();
    it->second.erase(it->second.begin());
    return QubitRef{node, idx};
  }
  if (strict)
    throw Error("no ancilla available on " + node + " (strict ancilla mode)");
  const int idx = capacity_[node] + next_overflow_[node]++;
  warnings_.push_back("capacity exceeded on " + node + ": ancilla slot " + std::to_string(idx) +
                      " lies past the declared " + std::to_string(capacity_[node]) + " qubits");
  return QubitRef{node, idx};
}

void AncillaPool::release(const QubitRef& slot) { free_[slot.node].insert(slot.index); }

std::vector<int> find_nonlocal(const Circuit& c, const Allocation& alloc) {
  std::vector<int> out;
  for (size_t gi = 0; gi < c.gates.size(); ++gi) {
    const Gate& g = c.gates[gi];
    if (g.arity() != 2) continue;
    const QubitRef a = placed(g.operands[0], alloc);
    const QubitRef b = placed(g.operands[1], alloc);
    if (a.node == b.node) continue;
    if (!g.is_controlled())
      throw Error("unsupported non-local kind " + std::string(kind_name(g.kind)) + " at gate " +
                  std::to_string(gi));
    out.push_back(static_cast<int>(gi));
  }
  return out;
}

namespace {

// Shared walk: builds the block structure. Slots released when a block
// closes go to a walk-local pool so later blocks of the same program can
// reuse them; the shared AncillaPool only ever hands slots out.
std::vector<CatBlock> build_blocks(const Circuit& c, const Allocation& alloc,
                                   AncillaPool& pool, const RemapOptions& opt) {
  find_nonlocal(c, alloc);  // reject unsupported spanning kinds up front

  std::vector<CatBlock> blocks;
  std::map<QubitRef, int> open;                 // control -> open block id
  std::map<std::string, std::set<int>> reuse;   // node -> released slots

  auto acquire = [&](const std::string& node) {
    auto it = reuse.find(node);
    if (it != reuse.end() && !it->second.empty()) {
      const int idx = *it->second.begin();
      it->second.erase(it->second.begin());
      return QubitRef{node, idx};
    }
    return pool.acquire(node, opt.strict_ancilla);
  };
  auto close = [&](int bid, int gi) {
    blocks[bid].close_at = gi;
    reuse[blocks[bid].ancilla_local.node].insert(blocks[bid].ancilla_local.index);
    reuse[blocks[bid].ancilla_remote.node].insert(blocks[bid].ancilla_remote.index);
  };

  for (size_t gi = 0; gi < c.gates.size(); ++gi) {
    const Gate& g = c.gates[gi];
    std::vector<QubitRef> ops;
    ops.reserve(g.operands.size());
    for (const auto& q : g.operands) ops.push_back(placed(q, alloc));

    const bool qualifying =
        g.is_controlled() && ops.size() == 2 && ops[0].node != ops[1].node;
    int member = -1;
    if (qualifying) {
      auto it = open.find(ops[0]);
      if (it != open.end() && blocks[it->second].remote_node == ops[1].node) member = it->second;
    }
    // Any other touch of an open block's control ends that block here.
    for (const auto& q : ops) {
      auto it = open.find(q);
      if (it != open.end() && it->second != member) {
        close(it->second, static_cast<int>(gi));
        open.erase(it);
      }
    }
    if (qualifying && member < 0) {
      CatBlock b;
      b.control = ops[0];
      b.remote_node = ops[1].node;
      b.open_at = static_cast<int>(gi);
      b.ancilla_local = acquire(ops[0].node);
      b.ancilla_remote = acquire(ops[1].node);
      const int bid = static_cast<int>(blocks.size());
      b.bit_m1 = "cat" + std::to_string(bid) + ".m1";
      b.bit_m2 = "cat" + std::to_string(bid) + ".m2";
      blocks.push_back(std::move(b));
      open[ops[0]] = bid;
      member = bid;
    }
    if (member >= 0) blocks[member].gate_indices.push_back(static_cast<int>(gi));
  }
  for (auto& [control, bid] : open) close(bid, static_cast<int>(c.gates.size()));
  return blocks;
}

}  // namespace

std::vector<CatBlock> group_blocks(const Circuit& c, const Allocation& alloc,
                                   const Topology& topo, AncillaPool& pool,
                                   const RemapOptions& opt) {
  (void)topo;
  return build_blocks(c, alloc, pool, opt);
}

DistributedCircuit remap(const Circuit& c, const Allocation& alloc, const Topology& topo,
                         AncillaPool& pool, const RemapOptions& opt) {
  (void)topo;
  const size_t pool_warnings_before = pool.warnings().size();
  DistributedCircuit out;
  out.blocks = build_blocks(c, alloc, pool, opt);

  std::map<int, std::vector<int>> closes;  // monolithic index -> block ids
  std::map<int, int> opens;
  std::vector<int> block_of(c.gates.size(), -1);
  for (size_t bid = 0; bid < out.blocks.size(); ++bid) {
    const CatBlock& b = out.blocks[bid];
    closes[b.close_at].push_back(static_cast<int>(bid));
    opens[b.open_at] = static_cast<int>(bid);
    for (int gi : b.gate_indices) block_of[gi] = static_cast<int>(bid);
  }
  for (auto& [gi, bids] : closes) std::sort(bids.begin(), bids.end());

  auto emit = [&out](Gate g, GateRole role, int origin, int bid) {
    out.circuit.append(std::move(g));
    out.roles.push_back(role);
    out.origins.push_back(origin);
    out.block_ids.push_back(bid);
  };
  auto emit_entangler = [&](int bid) {
    const CatBlock& b = out.blocks[bid];
    emit(Gate::epr_gen(b.ancilla_local, b.ancilla_remote), GateRole::Entangle, -1, bid);
    emit(Gate::cnot(b.control, b.ancilla_local), GateRole::Entangle, -1, bid);
    emit(Gate::measure(b.ancilla_local, b.bit_m1), GateRole::Entangle, -1, bid);
    emit(Gate::cond_x(b.ancilla_remote, b.bit_m1), GateRole::Entangle, -1, bid);
  };
  auto emit_disentangler = [&](int bid) {
    const CatBlock& b = out.blocks[bid];
    emit(Gate::single(GateKind::H, b.ancilla_remote), GateRole::Disentangle, -1, bid);
    emit(Gate::measure(b.ancilla_remote, b.bit_m2), GateRole::Disentangle, -1, bid);
    emit(Gate::cond_z(b.control, b.bit_m2), GateRole::Disentangle, -1, bid);
    emit(Gate::reset(b.ancilla_local), GateRole::Disentangle, -1, bid);
    emit(Gate::reset(b.ancilla_remote), GateRole::Disentangle, -1, bid);
  };

  for (size_t gi = 0; gi <= c.gates.size(); ++gi) {
    auto ct = closes.find(static_cast<int>(gi));
    if (ct != closes.end())
      for (int bid : ct->second) emit_disentangler(bid);
    if (gi == c.gates.size()) break;
    auto ot = opens.find(static_cast<int>(gi));
    if (ot != opens.end()) emit_entangler(ot->second);

    Gate g = c.gates[gi];
    for (auto& q : g.operands) q = placed(q, alloc);
    if (block_of[gi] >= 0) {
      g.operands[0] = out.blocks[block_of[gi]].ancilla_remote;
      emit(std::move(g), GateRole::Serve, static_cast<int>(gi), block_of[gi]);
    } else {
      emit(std::move(g), GateRole::Data, static_cast<int>(gi), -1);
    }
  }

  out.warnings.assign(pool.warnings().begin() + pool_warnings_before, pool.warnings().end());
  return out;
}

DistributedCircuit remap(const Circuit& c, const Allocation& alloc, const Topology& topo,
                         const RemapOptions& opt) {
  AncillaPool pool(topo, {&alloc});
  return remap(c, alloc, topo, pool, opt);
}

}  // namespace dqs
