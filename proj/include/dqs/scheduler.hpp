#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dqs/circuit.hpp"
#include "dqs/merge.hpp"
#include "dqs/rng.hpp"
#include "dqs/topology.hpp"

namespace dqs {

// One schedulable unit: a circuit over abstract qubits 0..w-1 (or concrete,
// pre-placed refs), its repetition count and output contract.
struct Program {
  Circuit circuit;
  long repetitions = 1;
  OutputSpec output;

  int width() const { return circuit.width(); }
};

// Abstract qubit i -> slots[i]. Identity placements (circuits already
// written against concrete refs) are represented the same way.
struct Allocation {
  std::vector<QubitRef> slots;

  std::set<std::string> nodes() const;
  bool distributed() const { return nodes().size() > 1; }
};

// Free qubit slots per QPU, in topology order. Greedy consumes the lowest
// local index first; the random allocator draws uniformly from what's left.
struct FreeSlots {
  std::vector<std::pair<std::string, std::set<int>>> per_qpu;

  static FreeSlots full(const Topology& topo);
  int total_free() const;
  void take(const QubitRef& slot);
};

std::optional<Allocation> allocate_greedy(FreeSlots& free, int width);
std::optional<Allocation> allocate_random(FreeSlots& free, int width, SplitMix64& rng);

// Stateful allocation policy used by build_parallel_program.
using Allocator = std::function<std::optional<Allocation>(FreeSlots&, int)>;
Allocator greedy_allocator();
Allocator random_allocator(uint64_t seed);

// rounds[i][k] = 0-based indices of programs whose allocation touches QPU k
// during round i. Reports print them 1-based.
struct Schedule {
  std::vector<std::vector<std::set<int>>> rounds;
  int round_count() const { return static_cast<int>(rounds.size()); }
};

struct ParallelProgram {
  std::vector<Program> programs;
  std::vector<Allocation> allocations;
  Schedule schedule;
  MergeSpec merge_spec;
};

// Packs programs into rounds in arrival order: allocate while capacity
// lasts; when a program does not fit, close the round, restore all
// capacity and retry it on the fresh cluster. A program wider than the
// whole cluster is unschedulable.
ParallelProgram build_parallel_program(const Topology& topo, std::vector<Program> programs,
                                       const Allocator& allocate, MergeSpec merge_spec);

}  // namespace dqs
