#include "dqs/scheduler.hpp"

#include <algorithm>
#include <memory>

#include "dqs/error.hpp"

namespace dqs {

std::set<std::string> Allocation::nodes() const {
  std::set<std::string> out;
  for (const auto& s : slots) out.insert(s.node);
  return out;
}

FreeSlots FreeSlots::full(const Topology& topo) {
  FreeSlots f;
  for (const auto& qpu : topo.qpus) {
    std::set<int> slots;
    for (int i = 0; i < qpu.num_qubits; ++i) slots.insert(i);
    f.per_qpu.emplace_back(qpu.id, std::move(slots));
  }
  return f;
}

int FreeSlots::total_free() const {
  int n = 0;
  for (const auto& [id, slots] : per_qpu) n += static_cast<int>(slots.size());
  return n;
}

void FreeSlots::take(const QubitRef& slot) {
  for (auto& [id, slots] : per_qpu) {
    if (id == slot.node) {
      slots.erase(slot.index);
      return;
    }
  }
}

std::optional<Allocation> allocate_greedy(FreeSlots& free, int width) {
  if (width > free.total_free()) return std::nullopt;
  Allocation a;
  for (auto& [id, slots] : free.per_qpu) {
    while (!slots.empty() && static_cast<int>(a.slots.size()) < width) {
      const int idx = *slots.begin();
      slots.erase(slots.begin());
      a.slots.push_back(QubitRef{id, idx});
    }
    if (static_cast<int>(a.slots.size()) == width) break;
  }
  return a;
}

std::optional<Allocation> allocate_random(FreeSlots& free, int width, SplitMix64& rng) {
  if (width > free.total_free()) return std::nullopt;
  std::vector<QubitRef> pool;
  for (const auto& [id, slots] : free.per_qpu)
    for (int idx : slots) pool.push_back(QubitRef{id, idx});
  // Partial Fisher-Yates over the canonical slot order.
  Allocation a;
  for (int i = 0; i < width; ++i) {
    const auto j = i + static_cast<size_t>(rng.next_below(pool.size() - i));
    std::swap(pool[i], pool[j]);
    a.slots.push_back(pool[i]);
    free.take(pool[i]);
  }
  return a;
}

Allocator greedy_allocator() {
  return [](FreeSlots& free, int width) { return allocate_greedy(free, width); };
}

Allocator random_allocator(uint64_t seed) {
  auto rng = std::make_shared<SplitMix64>(seed);
  return [rng](FreeSlots& free, int width) { return allocate_random(free, width, *rng); };
}

ParallelProgram build_parallel_program(const Topology& topo, std::vector<Program> programs,
                                       const Allocator& allocate, MergeSpec merge_spec) {
  ParallelProgram pp;
  pp.merge_spec = std::move(merge_spec);
  pp.programs = std::move(programs);
  pp.allocations.resize(pp.programs.size());

  const int cluster = topo.total_qubits();
  const int k = static_cast<int>(topo.qpus.size());
  FreeSlots free = FreeSlots::full(topo);
  std::vector<std::set<int>> round(k);
  bool round_used = false;

  auto close_round = [&]() {
    pp.schedule.rounds.push_back(round);
    round.assign(k, {});
    free = FreeSlots::full(topo);
    round_used = false;
  };

  for (size_t ci = 0; ci < pp.programs.size(); ++ci) {
    Program& prog = pp.programs[ci];
    const bool preplaced =
        !prog.circuit.qubits.empty() && !prog.circuit.qubits.front().is_abstract();

    std::optional<Allocation> alloc;
    if (preplaced) {
      // Concrete circuits keep their declared placement; their slots are
      // consumed from the round's capacity like any other program.
      Allocation a;
      a.slots = prog.circuit.qubits;
      bool fits = true;
      for (const auto& s : a.slots) {
        bool found = false;
        for (auto& [id, slots] : free.per_qpu)
          if (id == s.node && slots.count(s.index)) found = true;
        if (!found) fits = false;
      }
      if (fits) {
        for (const auto& s : a.slots) free.take(s);
        alloc = std::move(a);
      }
    } else {
      if (prog.width() > cluster)
        throw Error("unschedulable: program " + std::to_string(ci + 1) + " needs " +
                    std::to_string(prog.width()) + " qubits, cluster has " +
                    std::to_string(cluster));
      alloc = allocate(free, prog.width());
    }

    if (!alloc) {
      if (!round_used)
        throw Error("unschedulable: program " + std::to_string(ci + 1) +
                    " does not fit an empty cluster");
      close_round();
      if (preplaced) {
        Allocation a;
        a.slots = prog.circuit.qubits;
        for (const auto& s : a.slots) {
          bool found = false;
          for (auto& [id, slots] : free.per_qpu)
            if (id == s.node && slots.count(s.index)) found = true;
          if (!found)
            throw Error("unschedulable: program " + std::to_string(ci + 1) + " slot " + s.str() +
                        " unavailable on an empty cluster");
          free.take(s);
        }
        alloc = std::move(a);
      } else {
        alloc = allocate(free, prog.width());
      }
      if (!alloc)
        throw Error("unschedulable: program " + std::to_string(ci + 1) +
                    " does not fit an empty cluster");
    }

    for (const auto& s : alloc->slots) {
      const int qi = topo.index_of(s.node);
      if (qi < 0) throw Error("unknown node " + s.node);
      round[qi].insert(static_cast<int>(ci));
    }
    pp.allocations[ci] = std::move(*alloc);
    round_used = true;
    if (ci + 1 == pp.programs.size()) close_round();
  }
  return pp;
}

}  // namespace dqs
