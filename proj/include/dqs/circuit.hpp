#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace dqs {

struct Topology;

// A qubit slot. `node` is empty for abstract program qubits that have not
// been placed yet; allocation rewrites them to concrete (node, index) slots.
struct QubitRef {
  std::string node;
  int index = 0;

  auto operator<=>(const QubitRef&) const = default;

  static QubitRef abstract(int i) { return QubitRef{"", i}; }
  bool is_abstract() const { return node.empty(); }
  std::string str() const;
};

enum class GateKind {
  PREPARE,
  X,
  Y,
  Z,
  H,
  S,
  T,
  RX,
  RY,
  RZ,
  PHASE,
  CNOT,
  CZ,
  CPHASE,
  CUSTOM_SINGLE,
  CUSTOM_CONTROLLED,
  MEASURE,
  COND_X,
  COND_Z,
  RESET,
  // Produced by the remapper only: joint Bell-pair creation across two nodes.
  EPR_GEN,
};

const char* kind_name(GateKind k);
bool kind_from_name(const std::string& name, GateKind* out);

using cplx = std::complex<double>;
// Row-major 2x2 unitary payload for CUSTOM_SINGLE / CUSTOM_CONTROLLED.
using Mat2 = std::array<cplx, 4>;

// One circuit element. Controlled kinds list the control first. Classical
// payload (`bit`) names a node-scoped register for MEASURE / COND_X / COND_Z.
struct Gate {
  GateKind kind = GateKind::X;
  std::vector<QubitRef> operands;
  double angle = 0.0;
  Mat2 matrix{};
  std::string bit;
  int basis = 0;  // PREPARE target basis state

  static Gate prepare(QubitRef q, int basis = 0);
  static Gate single(GateKind k, QubitRef q);
  static Gate rotation(GateKind k, QubitRef q, double angle);
  static Gate custom_single(QubitRef q, const Mat2& u);
  static Gate cnot(QubitRef control, QubitRef target);
  static Gate cz(QubitRef control, QubitRef target);
  static Gate cphase(QubitRef control, QubitRef target, double angle);
  static Gate custom_controlled(QubitRef control, QubitRef target, const Mat2& u);
  static Gate measure(QubitRef q, std::string bit);
  static Gate cond_x(QubitRef q, std::string bit);
  static Gate cond_z(QubitRef q, std::string bit);
  static Gate reset(QubitRef q);
  static Gate epr_gen(QubitRef a, QubitRef b);

  int arity() const { return static_cast<int>(operands.size()); }
  bool is_two_qubit() const { return operands.size() == 2; }
  // True for kinds whose two-qubit form is control+target; only these may
  // span nodes in a distributed circuit.
  bool is_controlled() const;
  // True for kinds that apply a unitary (everything except PREPARE, MEASURE,
  // RESET; conditional corrections count as unitary-when-applied).
  bool is_unitary() const;
};

// The 2x2 matrix a single-qubit (or controlled) gate applies to its target.
Mat2 gate_matrix(const Gate& g);
bool is_unitary_mat2(const Mat2& u, double tol = 1e-10);

// Gate list in program order plus the ordered qubit set it acts on.
// Qubit order is first-use order and defines simulator bit significance.
struct Circuit {
  std::vector<QubitRef> qubits;
  std::vector<Gate> gates;

  void add_qubit(const QubitRef& q);
  Circuit& append(Gate g);
  int width() const { return static_cast<int>(qubits.size()); }
  bool has_qubit(const QubitRef& q) const;
  int qubit_order(const QubitRef& q) const;  // -1 if absent
};

// Parallel layers of gate indices. Gates within a layer touch disjoint
// qubits; concatenating layers reproduces a valid order (per-qubit gate
// order is preserved).
struct LayeredCircuit {
  std::vector<std::vector<int>> layers;
  int layer_count() const { return static_cast<int>(layers.size()); }
};

// Greedy earliest-layer assignment; dependencies are qubit overlap.
LayeredCircuit layer_decompose(const Circuit& c);

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Structural checks against a topology: operand indices in range, known
// node ids, pairwise-distinct operands, unitary custom matrices, classical
// bits named where required. Violations are data, not exceptions.
ValidationReport validate(const Circuit& c, const Topology& topo);

}  // namespace dqs

template <>
struct std::hash<dqs::QubitRef> {
  size_t operator()(const dqs::QubitRef& q) const noexcept {
    return std::hash<std::string>()(q.node) * 1000003u ^ std::hash<int>()(q.index);
  }
};
