#include "dqs/statevector.hpp"

#include <cmath>
#include <map>

#include "dqs/error.hpp"
#include "dqs/kernels.hpp"

namespace dqs {

namespace k = kernels;

PauliString PauliString::from_label(const std::string& label,
                                    const std::function<QubitRef(int)>& qubit) {
  PauliString p;
  for (size_t i = 0; i < label.size(); ++i) {
    const char c = label[i];
    if (c == 'I' || c == 'i') continue;
    if (c != 'X' && c != 'Y' && c != 'Z')
      throw Error("bad pauli label '" + label + "'");
    p.factors[qubit(static_cast<int>(i))] = c;
  }
  return p;
}

std::string PauliString::str() const {
  std::string s;
  for (const auto& [q, c] : factors) {
    if (!s.empty()) s += " ";
    s += c;
    s += "(" + q.str() + ")";
  }
  return s.empty() ? "I" : s;
}

StateVector::StateVector(KernelMode mode) : mode_(mode) {}

int StateVector::register_qubit(const QubitRef& q) {
  auto it = pos_.find(q);
  if (it != pos_.end()) return it->second;
  if (num_qubits() >= kMaxQubits)
    throw Error("width cap exceeded: cannot register " + q.str() + " beyond " +
                std::to_string(kMaxQubits) + " qubits");
  const int p = num_qubits();
  order_.push_back(q);
  pos_[q] = p;
  if (amps_.empty()) {
    amps_ = {cplx(1.0, 0.0), cplx(0.0, 0.0)};
  } else if (mode_ == KernelMode::Serial) {
    k::serial::grow(amps_);
  } else {
    k::parallel::grow(amps_);
  }
  return p;
}

bool StateVector::registered(const QubitRef& q) const { return pos_.count(q) > 0; }

int StateVector::position(const QubitRef& q) const {
  auto it = pos_.find(q);
  return it == pos_.end() ? -1 : it->second;
}

int StateVector::bitpos(const QubitRef& q) const {
  auto it = pos_.find(q);
  if (it == pos_.end()) throw Error("unregistered qubit " + q.str());
  return num_qubits() - 1 - it->second;
}

void StateVector::apply(const Gate& g) {
  if (g.kind == GateKind::PREPARE) {
    const int t = bitpos(g.operands[0]);
    const double p0 = mode_ == KernelMode::Serial ? k::serial::probability_zero(amps_, t)
                                                  : k::parallel::probability_zero(amps_, t);
    int current;
    if (p0 > 1.0 - 1e-9)
      current = 0;
    else if (p0 < 1e-9)
      current = 1;
    else
      throw Error("prepare on superposed qubit " + g.operands[0].str());
    if (current != (g.basis ? 1 : 0)) apply(Gate::single(GateKind::X, g.operands[0]));
    return;
  }
  if (!g.is_unitary())
    throw Error("internal: apply() on kind " + std::string(kind_name(g.kind)));

  const Mat2 u = gate_matrix(g);
  if (g.arity() == 1) {
    const int t = bitpos(g.operands[0]);
    if (mode_ == KernelMode::Serial)
      k::serial::apply_single(amps_, t, u);
    else
      k::parallel::apply_single(amps_, t, u);
  } else {
    const int c = bitpos(g.operands[0]);
    const int t = bitpos(g.operands[1]);
    if (c == t) throw Error("duplicate operands on " + std::string(kind_name(g.kind)));
    if (mode_ == KernelMode::Serial)
      k::serial::apply_controlled(amps_, c, t, u);
    else
      k::parallel::apply_controlled(amps_, c, t, u);
  }
}

void StateVector::gen_epr(const QubitRef& a, const QubitRef& b) {
  register_qubit(a);
  register_qubit(b);
  if (probability_zero(a) < 1.0 - 1e-9 || probability_zero(b) < 1.0 - 1e-9)
    throw Error("ancilla not reset: EPR_GEN(" + a.str() + ", " + b.str() + ") needs |0>|0>");
  apply(Gate::single(GateKind::H, a));
  apply(Gate::cnot(a, b));
}

int StateVector::measure(const QubitRef& q, CounterRng& rng) {
  const int t = bitpos(q);
  const double p0 = mode_ == KernelMode::Serial ? k::serial::probability_zero(amps_, t)
                                                : k::parallel::probability_zero(amps_, t);
  const double u = rng.next_double();
  const int outcome = u < p0 ? 0 : 1;
  const double p = outcome == 0 ? p0 : 1.0 - p0;
  const double scale = p > 0.0 ? 1.0 / std::sqrt(p) : 0.0;
  if (mode_ == KernelMode::Serial)
    k::serial::project(amps_, t, outcome, scale);
  else
    k::parallel::project(amps_, t, outcome, scale);
  return outcome;
}

void StateVector::reset(const QubitRef& q, CounterRng& rng) {
  const double p0 = probability_zero(q);
  if (p0 > 1.0 - 1e-12) return;
  if (p0 < 1e-12) {
    apply(Gate::single(GateKind::X, q));
    return;
  }
  if (measure(q, rng) == 1) apply(Gate::single(GateKind::X, q));
}

void StateVector::reset_deferred(const QubitRef& q) {
  const int t = bitpos(q);
  const std::size_t stride = std::size_t(1) << t;
  double n0 = 0.0, n1 = 0.0;
  cplx overlap(0.0, 0.0);
  for (std::size_t base = 0; base < amps_.size(); base += 2 * stride)
    for (std::size_t i = base; i < base + stride; ++i) {
      n0 += std::norm(amps_[i]);
      n1 += std::norm(amps_[i + stride]);
      overlap += std::conj(amps_[i]) * amps_[i + stride];
    }
  // Separable iff the |q=0> and |q=1> slices are parallel (Cauchy-Schwarz
  // saturates). Norms are O(1) so the tolerance is absolute.
  if (n0 * n1 - std::norm(overlap) > 1e-9)
    throw Error("reset on entangled qubit " + q.str() + " in deferred mode");
  const bool from_zero = n0 >= n1;
  const double scale = 1.0 / std::sqrt(from_zero ? n0 : n1);
  for (std::size_t base = 0; base < amps_.size(); base += 2 * stride)
    for (std::size_t i = base; i < base + stride; ++i) {
      amps_[i] = (from_zero ? amps_[i] : amps_[i + stride]) * scale;
      amps_[i + stride] = cplx(0.0, 0.0);
    }
}

double StateVector::probability_zero(const QubitRef& q) const {
  const int t = bitpos(q);
  return mode_ == KernelMode::Serial ? k::serial::probability_zero(amps_, t)
                                     : k::parallel::probability_zero(amps_, t);
}

double StateVector::exact_expectation(const PauliString& p) const {
  // <empty|I|empty> on a state with no registered qubits.
  if (amps_.empty() && p.factors.empty()) return 1.0;
  uint64_t x_mask = 0, zy_mask = 0;
  int y_count = 0;
  for (const auto& [q, c] : p.factors) {
    const uint64_t bit = uint64_t(1) << bitpos(q);
    if (c == 'X' || c == 'Y') x_mask |= bit;
    if (c == 'Z' || c == 'Y') zy_mask |= bit;
    if (c == 'Y') ++y_count;
  }
  const cplx v = mode_ == KernelMode::Serial
                     ? k::serial::pauli_expectation(amps_, x_mask, zy_mask, y_count)
                     : k::parallel::pauli_expectation(amps_, x_mask, zy_mask, y_count);
  if (std::abs(v.imag()) > 1e-10)
    throw Error("internal: expectation has imaginary part " + std::to_string(v.imag()));
  return v.real();
}

double StateVector::norm() const {
  if (amps_.empty()) return 1.0;
  return std::sqrt(mode_ == KernelMode::Serial ? k::serial::norm_sq(amps_)
                                               : k::parallel::norm_sq(amps_));
}

double subspace_fidelity(const StateVector& full, const std::vector<QubitRef>& subset,
                         const std::vector<cplx>& reference) {
  const int m = full.num_qubits();
  const int s = static_cast<int>(subset.size());
  if (reference.size() != (std::size_t(1) << s))
    throw Error("arity mismatch: reference dimension vs subset size");

  std::vector<int> sub_bit(s);
  std::vector<bool> in_subset(m, false);
  for (int j = 0; j < s; ++j) {
    const int p = full.position(subset[j]);
    if (p < 0) throw Error("unregistered qubit " + subset[j].str());
    sub_bit[j] = m - 1 - p;
    in_subset[sub_bit[j]] = true;
  }
  std::vector<int> rest_bit;
  for (int b = 0; b < m; ++b)
    if (!in_subset[b]) rest_bit.push_back(b);

  // <ref|slice(anc)> accumulated per complement configuration.
  std::vector<cplx> inner(std::size_t(1) << rest_bit.size(), cplx(0.0, 0.0));
  const auto& amps = full.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    std::size_t di = 0, ri = 0;
    // Reference qubit j is the most significant reference bit for j = 0,
    // matching first-registered-most-significant.
    for (int j = 0; j < s; ++j) di = (di << 1) | ((i >> sub_bit[j]) & 1);
    for (size_t j = 0; j < rest_bit.size(); ++j) ri = (ri << 1) | ((i >> rest_bit[j]) & 1);
    inner[ri] += std::conj(reference[di]) * amps[i];
  }
  double f = 0.0;
  for (const cplx& v : inner) f += std::norm(v);
  return f;
}

StateVector simulate_circuit(const Circuit& c, KernelMode mode, CounterRng* rng) {
  StateVector sv(mode);
  for (const auto& q : c.qubits) sv.register_qubit(q);
  std::map<std::string, int> bits;
  std::map<std::string, QubitRef> bit_source;
  for (const Gate& g : c.gates) {
    switch (g.kind) {
      case GateKind::MEASURE:
        if (rng)
          bits[g.bit] = sv.measure(g.operands[0], *rng);
        else
          bit_source.insert({g.bit, g.operands[0]});
        break;
      case GateKind::RESET:
        if (rng)
          sv.reset(g.operands[0], *rng);
        else
          sv.reset_deferred(g.operands[0]);
        break;
      case GateKind::EPR_GEN:
        sv.gen_epr(g.operands[0], g.operands[1]);
        break;
      case GateKind::COND_X:
      case GateKind::COND_Z: {
        const GateKind pauli = g.kind == GateKind::COND_X ? GateKind::X : GateKind::Z;
        if (rng) {
          auto it = bits.find(g.bit);
          if (it == bits.end()) throw Error("message never arrives: bit '" + g.bit + "' unset");
          if (it->second) sv.apply(Gate::single(pauli, g.operands[0]));
        } else {
          auto it = bit_source.find(g.bit);
          if (it == bit_source.end())
            throw Error("message never arrives: bit '" + g.bit + "' has no measurement");
          sv.apply(pauli == GateKind::X ? Gate::cnot(it->second, g.operands[0])
                                        : Gate::cz(it->second, g.operands[0]));
        }
        break;
      }
      default:
        sv.apply(g);
    }
  }
  return sv;
}

}  // namespace dqs
