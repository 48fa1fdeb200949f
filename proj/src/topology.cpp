#include "dqs/topology.hpp"

namespace dqs {

const QpuSpec* Topology::find(const std::string& node) const {
  for (const auto& q : qpus)
    if (q.id == node) return &q;
  return nullptr;
}

int Topology::index_of(const std::string& node) const {
  for (size_t k = 0; k < qpus.size(); ++k)
    if (qpus[k].id == node) return static_cast<int>(k);
  return -1;
}

int Topology::total_qubits() const {
  int n = 0;
  for (const auto& q : qpus) n += q.num_qubits;
  return n;
}

int Topology::gate_time(const std::string& node, const std::string& kind) const {
  const QpuSpec* spec = find(node);
  if (!spec) return 1;
  auto it = spec->gate_times.find(kind);
  return it == spec->gate_times.end() ? 1 : it->second;
}

}  // namespace dqs
