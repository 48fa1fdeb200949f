#pragma once

#include <map>
#include <string>
#include <vector>

namespace dqs {

// One simulated QPU: qubit capacity plus optional per-gate-kind durations
// in ticks (default 1 for kinds not listed).
struct QpuSpec {
  std::string id;
  int num_qubits = 0;
  std::map<std::string, int> gate_times;
};

struct Topology {
  std::vector<QpuSpec> qpus;

  const QpuSpec* find(const std::string& node) const;
  // Position in declaration order; -1 if unknown. Declaration order is the
  // canonical node order used for tick-level tie breaking everywhere.
  int index_of(const std::string& node) const;
  int total_qubits() const;
  int gate_time(const std::string& node, const std::string& kind) const;
};

}  // namespace dqs
