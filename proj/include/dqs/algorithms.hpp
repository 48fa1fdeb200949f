#pragma once

#include <string>
#include <vector>

#include "dqs/circuit.hpp"
#include "dqs/merge.hpp"
#include "dqs/scheduler.hpp"
#include "dqs/topology.hpp"

namespace dqs {

// ---------------------------------------------------------------- QPE ----

// n measurement qubits (abstract 0..n-1) plus a phase qubit (abstract n)
// flipped to |1>, controlled powers of `u`, then the inverse QFT. Bits land
// in m0..m{n-1}; the merge reverses them, reads binary, divides by 2^n.
struct QpeProgram {
  Circuit circuit;
  int n = 0;
  std::vector<std::string> bit_names;
  OutputSpec output;
  MergeSpec merge;
};

Mat2 phase_unitary(double phi);  // diag(1, e^{2 pi i phi})
QpeProgram qpe_program(int n, const Mat2& u);

// Control side / target side split across two QPUs: measurement qubits fill
// the second QPU in index order, the phase qubit sits in slot 0 of the
// first. Every controlled power then crosses the link.
Topology qpe_two_qpu_topology(int n);
Allocation qpe_split_allocation(const Topology& topo, int n);

// ---------------------------------------------------------------- VQE ----

struct HamiltonianTerm {
  double coefficient = 0.0;
  std::string pauli;  // "ZZ", "IX", ...; position i acts on abstract qubit i
};

struct VqeOptions {
  bool exact = true;
  long shots = 1;  // per term, sampled mode
};

struct ProgramSet {
  std::vector<Program> programs;
  MergeSpec merge;
};

// One program per Hamiltonian term over a shared ansatz, merged as the
// coefficient-weighted sum. Exact mode reports each term expectation
// analytically in a single shot; sampled mode appends the basis rotations
// (X -> H, Y -> S-dagger then H), measures the support and uses the parity
// estimate.
ProgramSet vqe_programs(const std::vector<HamiltonianTerm>& terms, const Circuit& ansatz,
                        const VqeOptions& opt = {});

// ------------------------------------------------- amplitude estimation ----

struct PlaeConfig {
  double beta = 1.0;   // schedule exponent, in (0, 1]
  int terms = 5;       // K
  long shots = 100;    // per query count, split across duplicates
  int duplicates = 1;  // identical program copies per query count
  int grid_resolution = 10000;
};

// m_k = floor(k^((1 - beta) / (2 beta))), k = 1..K.
std::vector<int> plae_queries(const PlaeConfig& cfg);

// Program k applies A then m_k Grover iterates Q and measures the flag
// (abstract qubit 0, bit "amp"); the merge is a grid MLE over all counts.
// Duplicated query counts appear as consecutive programs.
ProgramSet plae_programs(const Circuit& a_oracle, const Circuit& q_iterate,
                         const PlaeConfig& cfg);

// Single-qubit family hitting a target amplitude a = P(flag = 1):
// A = RY(2 asin sqrt(a)), Q = RY(4 asin sqrt(a)).
Circuit plae_rotation_oracle(double amplitude);
Circuit plae_rotation_iterate(double amplitude);

// ----------------------------------------------- swap test / clustering ----

// Unit-norm feature vector padded with zeros to a power-of-two dimension.
struct FeatureVector {
  std::vector<double> values;

  static FeatureVector from_values(std::vector<double> raw);
  int qubit_count() const;
};

// Appends gates preparing sum_i x_i |i> on `reg`, reg[0] being the most
// significant index bit, via uniformly controlled Y rotations (Gray-code
// CNOT ladder). `x` must have length 2^reg.size() and unit norm.
void append_amplitude_encoding(Circuit& c, const std::vector<QubitRef>& reg,
                               const std::vector<double>& x);

// Textbook decompositions into the native gate set; appended in place.
void append_toffoli(Circuit& c, const QubitRef& a, const QubitRef& b, const QubitRef& t);
void append_cswap(Circuit& c, const QubitRef& ctrl, const QubitRef& x, const QubitRef& y);

struct SwapTestOptions {
  bool exact = false;
  long shots = 1;
};

// Ancilla (abstract 0) swap test between the encodings of `a` and `b`:
// P(anc = 0) = (1 + <a|b>^2) / 2. Sampled mode measures the ancilla into
// bit "anc"; exact mode reports <Z_anc> = 2 P(0) - 1 instead.
Program swap_test_program(const FeatureVector& a, const FeatureVector& b,
                          const SwapTestOptions& opt = {});

// Point-major swap tests of every point against every centroid, merged to
// per-point nearest-centroid assignments.
ProgramSet kmeans_round(const std::vector<FeatureVector>& points,
                        const std::vector<FeatureVector>& centroids,
                        const SwapTestOptions& opt = {});

struct KmeansResult {
  std::vector<int> assignments;
  std::vector<FeatureVector> centroids;
  int iterations_run = 0;
};

// Lloyd iterations whose assignment step is one scheduled batch of swap
// tests per round. Centroids start at the first k points; an empty cluster
// keeps its previous centroid; stops early once assignments are stable.
KmeansResult kmeans_cluster(const std::vector<FeatureVector>& points, int k, int max_iterations,
                            const Topology& topo, uint64_t seed,
                            const SwapTestOptions& opt = {});

}  // namespace dqs
