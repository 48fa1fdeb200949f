#pragma once

#include <complex>
#include <optional>
#include <unordered_map>
#include <vector>

#include "dqs/circuit.hpp"
#include "dqs/pauli.hpp"
#include "dqs/rng.hpp"

namespace dqs {

enum class KernelMode { Serial, Parallel };

// Dense statevector over dynamically registered qubits. The first qubit
// registered is the most significant bit of the amplitude index; freshly
// registered qubits join in |0>. Hard cap of 24 qubits (256 MiB of
// amplitudes) guards against runaway ancilla growth.
class StateVector {
 public:
  static constexpr int kMaxQubits = 24;

  explicit StateVector(KernelMode mode = KernelMode::Parallel);

  int register_qubit(const QubitRef& q);
  bool registered(const QubitRef& q) const;
  // Registration position (0 = first registered / most significant).
  int position(const QubitRef& q) const;
  int num_qubits() const { return static_cast<int>(order_.size()); }
  const std::vector<QubitRef>& registered_qubits() const { return order_; }

  // Applies unitary kinds plus PREPARE. MEASURE / RESET / EPR_GEN have
  // dedicated entry points. COND_X / COND_Z apply unconditionally here;
  // the engine owns the classical guard.
  void apply(const Gate& g);
  void gen_epr(const QubitRef& a, const QubitRef& b);
  int measure(const QubitRef& q, CounterRng& rng);
  // Collapse to |0>. Consumes randomness only if the qubit is still in
  // superposition; a freshly measured qubit resets deterministically.
  void reset(const QubitRef& q, CounterRng& rng);
  // Measurement-free reset for deferred-measurement runs: requires the
  // qubit to be unentangled with the rest of the state and rotates it to
  // |0> (global phase not preserved). The cat protocol guarantees both
  // ancillas are separable at block close, so a failure here means the
  // disentangler algebra is broken, not the caller.
  void reset_deferred(const QubitRef& q);

  double probability_zero(const QubitRef& q) const;
  // Exact <psi|P|psi>; throws if the imaginary part exceeds 1e-10.
  double exact_expectation(const PauliString& p) const;
  double norm() const;

  const std::vector<cplx>& amplitudes() const { return amps_; }
  KernelMode mode() const { return mode_; }

 private:
  int bitpos(const QubitRef& q) const;  // throws "unregistered qubit"

  KernelMode mode_;
  std::vector<QubitRef> order_;
  std::unordered_map<QubitRef, int> pos_;
  std::vector<cplx> amps_;
};

// Fidelity of the `reference` pure state against the reduced state of
// `full` on `subset` (given in reference qubit order): sums |<ref|slice>|^2
// over configurations of the complement. Equals 1 - epsilon iff the subset
// carries `reference` up to global phase and is unentangled with the rest.
double subspace_fidelity(const StateVector& full, const std::vector<QubitRef>& subset,
                         const std::vector<cplx>& reference);

// Reference runner: registers circuit qubits in declaration order, then
// applies gates in program order, tracking classical bits for conditional
// corrections. With `rng == nullptr` the run is deferred-measurement:
// MEASURE and RESET are skipped and each COND_X / COND_Z becomes a CNOT /
// CZ controlled by the qubit its bit was measured from.
StateVector simulate_circuit(const Circuit& c, KernelMode mode, CounterRng* rng);

}  // namespace dqs
