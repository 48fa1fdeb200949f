#include "dqs/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "dqs/error.hpp"
#include "dqs/topology.hpp"

namespace dqs {

std::string QubitRef::str() const {
  if (is_abstract()) return "q" + std::to_string(index);
  return node + "[" + std::to_string(index) + "]";
}

namespace {

struct KindEntry {
  GateKind kind;
  const char* name;
};

constexpr KindEntry kKinds[] = {
    {GateKind::PREPARE, "PREPARE"},
    {GateKind::X, "X"},
    {GateKind::Y, "Y"},
    {GateKind::Z, "Z"},
    {GateKind::H, "H"},
    {GateKind::S, "S"},
    {GateKind::T, "T"},
    {GateKind::RX, "RX"},
    {GateKind::RY, "RY"},
    {GateKind::RZ, "RZ"},
    {GateKind::PHASE, "PHASE"},
    {GateKind::CNOT, "CNOT"},
    {GateKind::CZ, "CZ"},
    {GateKind::CPHASE, "CPHASE"},
    {GateKind::CUSTOM_SINGLE, "CUSTOM_SINGLE"},
    {GateKind::CUSTOM_CONTROLLED, "CUSTOM_CONTROLLED"},
    {GateKind::MEASURE, "MEASURE"},
    {GateKind::COND_X, "COND_X"},
    {GateKind::COND_Z, "COND_Z"},
    {GateKind::RESET, "RESET"},
    {GateKind::EPR_GEN, "EPR_GEN"},
};

}  // namespace

const char* kind_name(GateKind k) {
  for (const auto& e : kKinds)
    if (e.kind == k) return e.name;
  return "?";
}

bool kind_from_name(const std::string& name, GateKind* out) {
  for (const auto& e : kKinds) {
    if (name == e.name) {
      *out = e.kind;
      return true;
    }
  }
  return false;
}

Gate Gate::prepare(QubitRef q, int basis) {
  Gate g;
  g.kind = GateKind::PREPARE;
  g.operands = {std::move(q)};
  g.basis = basis;
  return g;
}

Gate Gate::single(GateKind k, QubitRef q) {
  Gate g;
  g.kind = k;
  g.operands = {std::move(q)};
  return g;
}

Gate Gate::rotation(GateKind k, QubitRef q, double angle) {
  Gate g;
  g.kind = k;
  g.operands = {std::move(q)};
  g.angle = angle;
  return g;
}

Gate Gate::custom_single(QubitRef q, const Mat2& u) {
  Gate g;
  g.kind = GateKind::CUSTOM_SINGLE;
  g.operands = {std::move(q)};
  g.matrix = u;
  return g;
}

Gate Gate::cnot(QubitRef control, QubitRef target) {
  Gate g;
  g.kind = GateKind::CNOT;
  g.operands = {std::move(control), std::move(target)};
  return g;
}

Gate Gate::cz(QubitRef control, QubitRef target) {
  Gate g;
  g.kind = GateKind::CZ;
  g.operands = {std::move(control), std::move(target)};
  return g;
}

Gate Gate::cphase(QubitRef control, QubitRef target, double angle) {
  Gate g;
  g.kind = GateKind::CPHASE;
  g.operands = {std::move(control), std::move(target)};
  g.angle = angle;
  return g;
}

Gate Gate::custom_controlled(QubitRef control, QubitRef target, const Mat2& u) {
  Gate g;
  g.kind = GateKind::CUSTOM_CONTROLLED;
  g.operands = {std::move(control), std::move(target)};
  g.matrix = u;
  return g;
}

Gate Gate::measure(QubitRef q, std::string bit) {
  Gate g;
  g.kind = GateKind::MEASURE;
  g.operands = {std::move(q)};
  g.bit = std::move(bit);
  return g;
}

Gate Gate::cond_x(QubitRef q, std::string bit) {
  Gate g;
  g.kind = GateKind::COND_X;
  g.operands = {std::move(q)};
  g.bit = std::move(bit);
  return g;
}

Gate Gate::cond_z(QubitRef q, std::string bit) {
  Gate g;
  g.kind = GateKind::COND_Z;
  g.operands = {std::move(q)};
  g.bit = std::move(bit);
  return g;
}

Gate Gate::reset(QubitRef q) {
  Gate g;
  g.kind = GateKind::RESET;
  g.operands = {std::move(q)};
  return g;
}

Gate Gate::epr_gen(QubitRef a, QubitRef b) {
  Gate g;
  g.kind = GateKind::EPR_GEN;
  g.operands = {std::move(a), std::move(b)};
  return g;
}

bool Gate::is_controlled() const {
  switch (kind) {
    case GateKind::CNOT:
    case GateKind::CZ:
    case GateKind::CPHASE:
    case GateKind::CUSTOM_CONTROLLED:
      return true;
    default:
      return false;
  }
}

bool Gate::is_unitary() const {
  switch (kind) {
    case GateKind::PREPARE:
    case GateKind::MEASURE:
    case GateKind::RESET:
    case GateKind::EPR_GEN:
      return false;
    default:
      return true;
  }
}

Mat2 gate_matrix(const Gate& g) {
  const double c = std::cos(g.angle / 2.0);
  const double s = std::sin(g.angle / 2.0);
  const cplx i(0.0, 1.0);
  switch (g.kind) {
    case GateKind::X:
    case GateKind::COND_X:
    case GateKind::CNOT:
      return {0, 1, 1, 0};
    case GateKind::Y:
      return {0, -i, i, 0};
    case GateKind::Z:
    case GateKind::COND_Z:
    case GateKind::CZ:
      return {1, 0, 0, -1};
    case GateKind::H:
      return {M_SQRT1_2, M_SQRT1_2, M_SQRT1_2, -M_SQRT1_2};
    case GateKind::S:
      return {1, 0, 0, i};
    case GateKind::T:
      return {1, 0, 0, std::exp(i * (M_PI / 4.0))};
    case GateKind::RX:
      return {c, -i * s, -i * s, c};
    case GateKind::RY:
      return {c, -s, s, c};
    case GateKind::RZ:
      return {std::exp(-i * (g.angle / 2.0)), 0, 0, std::exp(i * (g.angle / 2.0))};
    case GateKind::PHASE:
    case GateKind::CPHASE:
      return {1, 0, 0, std::exp(i * g.angle)};
    case GateKind::CUSTOM_SINGLE:
    case GateKind::CUSTOM_CONTROLLED:
      return g.matrix;
    default:
      throw Error("internal: gate_matrix on non-unitary kind " + std::string(kind_name(g.kind)));
  }
}

bool is_unitary_mat2(const Mat2& u, double tol) {
  // U U^dagger == I
  const cplx a = u[0] * std::conj(u[0]) + u[1] * std::conj(u[1]);
  const cplx b = u[0] * std::conj(u[2]) + u[1] * std::conj(u[3]);
  const cplx c = u[2] * std::conj(u[0]) + u[3] * std::conj(u[1]);
  const cplx d = u[2] * std::conj(u[2]) + u[3] * std::conj(u[3]);
  return std::abs(a - 1.0) < tol && std::abs(b) < tol && std::abs(c) < tol && std::abs(d - 1.0) < tol;
}

void Circuit::add_qubit(const QubitRef& q) {
  if (!has_qubit(q)) qubits.push_back(q);
}

Circuit& Circuit::append(Gate g) {
  for (const auto& q : g.operands) add_qubit(q);
  gates.push_back(std::move(g));
  return *this;
}

bool Circuit::has_qubit(const QubitRef& q) const {
  return qubit_order(q) >= 0;
}

int Circuit::qubit_order(const QubitRef& q) const {
  for (size_t k = 0; k < qubits.size(); ++k)
    if (qubits[k] == q) return static_cast<int>(k);
  return -1;
}

LayeredCircuit layer_decompose(const Circuit& c) {
  LayeredCircuit out;
  std::unordered_map<QubitRef, int> next_layer;
  for (size_t gi = 0; gi < c.gates.size(); ++gi) {
    int layer = 0;
    for (const auto& q : c.gates[gi].operands) {
      auto it = next_layer.find(q);
      if (it != next_layer.end()) layer = std::max(layer, it->second);
    }
    if (layer == static_cast<int>(out.layers.size())) out.layers.emplace_back();
    out.layers[layer].push_back(static_cast<int>(gi));
    for (const auto& q : c.gates[gi].operands) next_layer[q] = layer + 1;
  }
  return out;
}

ValidationReport validate(const Circuit& c, const Topology& topo) {
  ValidationReport rep;
  auto complain = [&rep](int gi, const std::string& msg) {
    rep.violations.push_back("gate " + std::to_string(gi) + ": " + msg);
  };

  for (const auto& q : c.qubits) {
    if (q.is_abstract()) continue;
    const QpuSpec* spec = topo.find(q.node);
    if (!spec)
      rep.violations.push_back("qubit " + q.str() + ": unknown node");
    else if (q.index < 0 || q.index >= spec->num_qubits)
      rep.violations.push_back("qubit " + q.str() + ": index out of range (capacity " +
                               std::to_string(spec->num_qubits) + ")");
  }

  for (size_t gi = 0; gi < c.gates.size(); ++gi) {
    const Gate& g = c.gates[gi];
    const int want = (g.is_two_qubit() || g.kind == GateKind::CNOT || g.kind == GateKind::CZ ||
                      g.kind == GateKind::CPHASE || g.kind == GateKind::CUSTOM_CONTROLLED ||
                      g.kind == GateKind::EPR_GEN)
                         ? 2
                         : 1;
    if (g.arity() != want) {
      complain(static_cast<int>(gi), std::string(kind_name(g.kind)) + ": arity mismatch");
      continue;
    }
    if (g.arity() == 2 && g.operands[0] == g.operands[1])
      complain(static_cast<int>(gi), "duplicate operands");
    for (const auto& q : g.operands) {
      if (!c.has_qubit(q)) complain(static_cast<int>(gi), "operand " + q.str() + " not declared");
      if (!q.is_abstract()) {
        const QpuSpec* spec = topo.find(q.node);
        if (!spec)
          complain(static_cast<int>(gi), "operand " + q.str() + ": unknown node");
        else if (q.index < 0 || q.index >= spec->num_qubits)
          complain(static_cast<int>(gi), "operand " + q.str() + ": index out of range");
      }
    }
    if ((g.kind == GateKind::CUSTOM_SINGLE || g.kind == GateKind::CUSTOM_CONTROLLED) &&
        !is_unitary_mat2(g.matrix))
      complain(static_cast<int>(gi), "non-unitary matrix");
    if ((g.kind == GateKind::MEASURE || g.kind == GateKind::COND_X || g.kind == GateKind::COND_Z) &&
        g.bit.empty())
      complain(static_cast<int>(gi), "missing classical bit name");
  }
  return rep;
}

}  // namespace dqs
