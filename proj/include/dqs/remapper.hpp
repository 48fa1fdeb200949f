#pragma once

#include <map>
#include <string>
#include <vector>

#include "dqs/circuit.hpp"
#include "dqs/scheduler.hpp"
#include "dqs/topology.hpp"

namespace dqs {

// A maximal run of non-local controlled gates sharing (control qubit,
// remote node), with no intervening non-member gate on the control. One
// EPR pair and two classical messages serve the whole run: the entangler
// copies the control's basis info onto ancilla_remote, every served gate
// re-controls from it, the disentangler folds the phase back.
struct CatBlock {
  QubitRef control;
  std::string remote_node;
  std::vector<int> gate_indices;  // positions in the monolithic gate list
  QubitRef ancilla_local;         // EPR half on the control's node
  QubitRef ancilla_remote;        // EPR half on the remote node
  std::string bit_m1;             // entangler measurement
  std::string bit_m2;             // disentangler measurement
  int open_at = 0;   // monolithic index of the first served gate
  int close_at = 0;  // monolithic index before which the disentangler lands
};

enum class GateRole { Data, Entangle, Serve, Disentangle };
const char* role_name(GateRole r);

// The remapped circuit plus per-gate provenance. roles/origins/block_ids
// run parallel to circuit.gates; origin is the monolithic gate index for
// Data/Serve gates and -1 for protocol gates.
struct DistributedCircuit {
  Circuit circuit;
  std::vector<GateRole> roles;
  std::vector<int> origins;
  std::vector<int> block_ids;  // -1 outside blocks
  std::vector<CatBlock> blocks;
  std::vector<std::string> warnings;
};

struct RemapOptions {
  // With strict_ancilla, running out of declared slots for EPR halves is an
  // error; otherwise overflow ancillas get indices past the QPU capacity
  // and a warning is recorded.
  bool strict_ancilla = false;
};

// Hands out ancilla slots for EPR halves: declared-but-unallocated slots
// first, then overflow indices past the capacity. Slots released at block
// close are reused by later blocks of the same pool only; callers sharing
// one topology across concurrently running programs must share one pool.
class AncillaPool {
 public:
  AncillaPool(const Topology& topo, const std::vector<const Allocation*>& reserved);

  QubitRef acquire(const std::string& node, bool strict);
  void release(const QubitRef& slot);
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::map<std::string, std::set<int>> free_;
  std::map<std::string, int> capacity_;
  std::map<std::string, int> next_overflow_;
  std::vector<std::string> warnings_;
};

// Indices of gates whose operands span two nodes under the allocation.
// Throws "unsupported non-local kind" if such a gate is not controlled.
std::vector<int> find_nonlocal(const Circuit& c, const Allocation& alloc);

std::vector<CatBlock> group_blocks(const Circuit& c, const Allocation& alloc,
                                   const Topology& topo, AncillaPool& pool,
                                   const RemapOptions& opt = {});

DistributedCircuit remap(const Circuit& c, const Allocation& alloc, const Topology& topo,
                         AncillaPool& pool, const RemapOptions& opt = {});
// Convenience form owning a fresh pool that reserves only this allocation.
DistributedCircuit remap(const Circuit& c, const Allocation& alloc, const Topology& topo,
                         const RemapOptions& opt = {});

}  // namespace dqs
