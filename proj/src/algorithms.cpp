#include "dqs/algorithms.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "dqs/engine.hpp"
#include "dqs/error.hpp"

namespace dqs {

Mat2 phase_unitary(double phi) {
  return Mat2{cplx(1.0, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0),
              std::exp(cplx(0.0, 2.0 * std::numbers::pi * phi))};
}

QpeProgram qpe_program(int n, const Mat2& u) {
  if (n < 1 || n > 20)
    throw Error("invalid program: phase estimation supports 1..20 counting qubits");
  if (!is_unitary_mat2(u)) throw Error("invalid program: input gate is not unitary");

  QpeProgram qp;
  qp.n = n;
  Circuit& c = qp.circuit;
  std::vector<QubitRef> meas;
  for (int i = 0; i < n; ++i) meas.push_back(QubitRef::abstract(i));
  QubitRef phase = QubitRef::abstract(n);

  for (int i = 0; i < n; ++i) c.append(Gate::prepare(meas[i]));
  c.append(Gate::prepare(phase));
  c.append(Gate::single(GateKind::X, phase));
  for (int i = 0; i < n; ++i) c.append(Gate::single(GateKind::H, meas[i]));
  for (int i = 0; i < n; ++i)
    for (long r = 0; r < (1L << i); ++r) c.append(Gate::custom_controlled(meas[i], phase, u));

  // Inverse Fourier transform over the reversed counting register.
  std::vector<QubitRef> rev(meas.rbegin(), meas.rend());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j)
      c.append(Gate::cphase(rev[j], rev[i],
                            -std::numbers::pi * static_cast<double>(1L << j) /
                                static_cast<double>(1L << i)));
    c.append(Gate::single(GateKind::H, rev[i]));
  }
  for (int i = 0; i < n; ++i) qp.bit_names.push_back("m" + std::to_string(i));
  for (int i = n - 1; i >= 0; --i) c.append(Gate::measure(meas[i], qp.bit_names[i]));

  qp.output.mode = OutputSpec::Mode::Bits;
  qp.output.bits = qp.bit_names;
  qp.output.label = "phase bits";
  BitAssembly ba;
  ba.bit_order = qp.bit_names;
  ba.n_bits = n;
  qp.merge = ba;
  return qp;
}

Topology qpe_two_qpu_topology(int n) {
  // Slot 0 of QPU_0 is the phase qubit; the rest of both QPUs is ancilla
  // headroom for the n simultaneously open blocks.
  Topology topo;
  topo.qpus.push_back({"QPU_0", n + 1, {}});
  topo.qpus.push_back({"QPU_1", 2 * n, {}});
  return topo;
}

Allocation qpe_split_allocation(const Topology& topo, int n) {
  if (topo.qpus.size() < 2) throw Error("invalid program: the split placement needs two QPUs");
  Allocation alloc;
  for (int i = 0; i < n; ++i) alloc.slots.push_back({topo.qpus[1].id, i});
  alloc.slots.push_back({topo.qpus[0].id, 0});
  return alloc;
}

ProgramSet vqe_programs(const std::vector<HamiltonianTerm>& terms, const Circuit& ansatz,
                        const VqeOptions& opt) {
  if (terms.empty()) throw Error("invalid program: empty Hamiltonian");
  for (const QubitRef& q : ansatz.qubits)
    if (!q.is_abstract()) throw Error("invalid program: the ansatz must use abstract qubits");

  ProgramSet ps;
  WeightedSum ws;
  const int w = ansatz.width();
  for (const HamiltonianTerm& t : terms) {
    if (static_cast<int>(t.pauli.size()) > w)
      throw Error("invalid program: term '" + t.pauli + "' is wider than the ansatz");
    Program pr;
    pr.circuit = ansatz;
    pr.output.label = t.pauli;
    PauliString p =
        PauliString::from_label(t.pauli, [](int i) { return QubitRef::abstract(i); });
    if (opt.exact) {
      pr.repetitions = 1;
      pr.output.mode = OutputSpec::Mode::Exact;
      pr.output.pauli = std::move(p);
    } else {
      if (opt.shots < 1) throw Error("invalid program: sampled mode needs shots >= 1");
      pr.repetitions = opt.shots;
      pr.output.mode = OutputSpec::Mode::Parity;
      int k = 0;
      for (const auto& [q, axis] : p.factors) {
        if (axis == 'X') {
          pr.circuit.append(Gate::single(GateKind::H, q));
        } else if (axis == 'Y') {
          pr.circuit.append(Gate::rotation(GateKind::PHASE, q, -std::numbers::pi / 2.0));
          pr.circuit.append(Gate::single(GateKind::H, q));
        }
        std::string bit = "t" + std::to_string(k++);
        pr.circuit.append(Gate::measure(q, bit));
        pr.output.bits.push_back(std::move(bit));
      }
    }
    ps.programs.push_back(std::move(pr));
    ws.coefficients.push_back(t.coefficient);
  }
  ps.merge = std::move(ws);
  return ps;
}

std::vector<int> plae_queries(const PlaeConfig& cfg) {
  if (!(cfg.beta > 0.0) || cfg.beta > 1.0)
    throw Error("invalid program: beta must lie in (0, 1]");
  if (cfg.terms < 1) throw Error("invalid program: the schedule needs at least one term");
  const double e = (1.0 - cfg.beta) / (2.0 * cfg.beta);
  std::vector<int> m;
  m.reserve(cfg.terms);
  for (int k = 1; k <= cfg.terms; ++k)
    m.push_back(static_cast<int>(std::floor(std::pow(static_cast<double>(k), e) + 1e-9)));
  return m;
}

ProgramSet plae_programs(const Circuit& a_oracle, const Circuit& q_iterate,
                         const PlaeConfig& cfg) {
  std::vector<int> m = plae_queries(cfg);
  if (cfg.duplicates < 1) throw Error("invalid program: duplicates must be at least 1");
  if (cfg.shots < cfg.duplicates || cfg.shots % cfg.duplicates != 0)
    throw Error("invalid program: shots must split evenly across duplicates");
  for (const QubitRef& q : a_oracle.qubits)
    if (!q.is_abstract()) throw Error("invalid program: the oracle must use abstract qubits");
  for (const QubitRef& q : q_iterate.qubits)
    if (!a_oracle.has_qubit(q))
      throw Error("invalid program: the iterate touches qubits outside the oracle");

  ProgramSet ps;
  MaxLikelihoodPhase ml;
  ml.grid_resolution = cfg.grid_resolution;
  const long per = cfg.shots / cfg.duplicates;
  for (int k = 0; k < cfg.terms; ++k)
    for (int d = 0; d < cfg.duplicates; ++d) {
      Program pr;
      pr.circuit = a_oracle;
      for (int r = 0; r < m[k]; ++r)
        for (const Gate& g : q_iterate.gates) pr.circuit.append(g);
      pr.circuit.append(Gate::measure(QubitRef::abstract(0), "amp"));
      pr.repetitions = per;
      pr.output.mode = OutputSpec::Mode::Bits;
      pr.output.bits = {"amp"};
      pr.output.label = "m=" + std::to_string(m[k]);
      ps.programs.push_back(std::move(pr));
      ml.queries.push_back(m[k]);
    }
  ps.merge = std::move(ml);
  return ps;
}

Circuit plae_rotation_oracle(double amplitude) {
  if (!(amplitude >= 0.0 && amplitude <= 1.0))
    throw Error("invalid program: amplitude must lie in [0, 1]");
  Circuit c;
  QubitRef q = QubitRef::abstract(0);
  c.append(Gate::prepare(q));
  c.append(Gate::rotation(GateKind::RY, q, 2.0 * std::asin(std::sqrt(amplitude))));
  return c;
}

Circuit plae_rotation_iterate(double amplitude) {
  if (!(amplitude >= 0.0 && amplitude <= 1.0))
    throw Error("invalid program: amplitude must lie in [0, 1]");
  Circuit c;
  c.append(Gate::rotation(GateKind::RY, QubitRef::abstract(0),
                          4.0 * std::asin(std::sqrt(amplitude))));
  return c;
}

FeatureVector FeatureVector::from_values(std::vector<double> raw) {
  if (raw.empty()) throw Error("invalid program: empty feature vector");
  double n2 = 0.0;
  for (double v : raw) n2 += v * v;
  if (!(n2 > 0.0)) throw Error("invalid program: zero feature vector");
  size_t dim = 2;
  while (dim < raw.size()) dim <<= 1;
  raw.resize(dim, 0.0);
  const double inv = 1.0 / std::sqrt(n2);
  for (double& v : raw) v *= inv;
  return FeatureVector{std::move(raw)};
}

int FeatureVector::qubit_count() const {
  int n = 0;
  while ((size_t{1} << n) < values.size()) ++n;
  return n;
}

void append_amplitude_encoding(Circuit& c, const std::vector<QubitRef>& reg,
                               const std::vector<double>& x) {
  const int n = static_cast<int>(reg.size());
  if (n < 1 || (size_t{1} << n) != x.size())
    throw Error("invalid program: encoding needs 2^(register size) amplitudes");
  double n2 = 0.0;
  for (double v : x) n2 += v * v;
  if (std::abs(n2 - 1.0) > 1e-9)
    throw Error("invalid program: encoded amplitudes must have unit norm");

  // Subtree values: level n holds the signed amplitudes, inner levels the
  // non-negative child norms. The rotation at node (l, j) steers +norm
  // into the (possibly signed) child pair, so signs are fixed at the leaf
  // level alone.
  std::vector<std::vector<double>> tree(n + 1);
  tree[n].assign(x.begin(), x.end());
  for (int d = n - 1; d >= 0; --d) {
    tree[d].resize(size_t{1} << d);
    for (size_t j = 0; j < tree[d].size(); ++j)
      tree[d][j] = std::hypot(tree[d + 1][2 * j], tree[d + 1][2 * j + 1]);
  }

  for (int l = 0; l < n; ++l) {
    const size_t K = size_t{1} << l;
    std::vector<double> theta(K);
    for (size_t j = 0; j < K; ++j) {
      double c0 = tree[l + 1][2 * j];
      double c1 = tree[l + 1][2 * j + 1];
      theta[j] = (c0 == 0.0 && c1 == 0.0) ? 0.0 : 2.0 * std::atan2(c1, c0);
    }
    if (l == 0) {
      if (theta[0] != 0.0) c.append(Gate::rotation(GateKind::RY, reg[0], theta[0]));
      continue;
    }
    // Gray-code ladder: phi_k = 2^-l sum_j (-1)^popcount(gray(k) & j)
    // theta_j, each CNOT toggling the bit where gray(k) and gray(k+1)
    // differ. Angle index bit b addresses control reg[l-1-b].
    for (size_t k = 0; k < K; ++k) {
      const size_t gk = k ^ (k >> 1);
      double phi = 0.0;
      for (size_t j = 0; j < K; ++j)
        phi += (std::popcount(gk & j) & 1) ? -theta[j] : theta[j];
      phi /= static_cast<double>(K);
      if (phi != 0.0) c.append(Gate::rotation(GateKind::RY, reg[l], phi));
      const int b = (k + 1 < K) ? std::countr_zero(k + 1) : l - 1;
      c.append(Gate::cnot(reg[l - 1 - b], reg[l]));
    }
  }
}

void append_toffoli(Circuit& c, const QubitRef& a, const QubitRef& b, const QubitRef& t) {
  const double tdg = -std::numbers::pi / 4.0;
  c.append(Gate::single(GateKind::H, t));
  c.append(Gate::cnot(b, t));
  c.append(Gate::rotation(GateKind::PHASE, t, tdg));
  c.append(Gate::cnot(a, t));
  c.append(Gate::single(GateKind::T, t));
  c.append(Gate::cnot(b, t));
  c.append(Gate::rotation(GateKind::PHASE, t, tdg));
  c.append(Gate::cnot(a, t));
  c.append(Gate::single(GateKind::T, b));
  c.append(Gate::single(GateKind::T, t));
  c.append(Gate::single(GateKind::H, t));
  c.append(Gate::cnot(a, b));
  c.append(Gate::single(GateKind::T, a));
  c.append(Gate::rotation(GateKind::PHASE, b, tdg));
  c.append(Gate::cnot(a, b));
}

void append_cswap(Circuit& c, const QubitRef& ctrl, const QubitRef& x, const QubitRef& y) {
  c.append(Gate::cnot(y, x));
  append_toffoli(c, ctrl, x, y);
  c.append(Gate::cnot(y, x));
}

Program swap_test_program(const FeatureVector& a, const FeatureVector& b,
                          const SwapTestOptions& opt) {
  const int nq = std::max(a.qubit_count(), b.qubit_count());
  std::vector<double> av = a.values;
  std::vector<double> bv = b.values;
  av.resize(size_t{1} << nq, 0.0);
  bv.resize(size_t{1} << nq, 0.0);

  Program pr;
  Circuit& c = pr.circuit;
  QubitRef anc = QubitRef::abstract(0);
  std::vector<QubitRef> ra;
  std::vector<QubitRef> rb;
  for (int i = 0; i < nq; ++i) ra.push_back(QubitRef::abstract(1 + i));
  for (int i = 0; i < nq; ++i) rb.push_back(QubitRef::abstract(1 + nq + i));

  c.append(Gate::prepare(anc));
  for (const QubitRef& q : ra) c.append(Gate::prepare(q));
  for (const QubitRef& q : rb) c.append(Gate::prepare(q));
  append_amplitude_encoding(c, ra, av);
  append_amplitude_encoding(c, rb, bv);
  c.append(Gate::single(GateKind::H, anc));
  for (int i = 0; i < nq; ++i) append_cswap(c, anc, ra[i], rb[i]);
  c.append(Gate::single(GateKind::H, anc));

  pr.output.label = "swap";
  if (opt.exact) {
    pr.repetitions = 1;
    pr.output.mode = OutputSpec::Mode::Exact;
    PauliString z;
    z.factors[anc] = 'Z';
    pr.output.pauli = std::move(z);
  } else {
    if (opt.shots < 1) throw Error("invalid program: sampled mode needs shots >= 1");
    c.append(Gate::measure(anc, "anc"));
    pr.repetitions = opt.shots;
    pr.output.mode = OutputSpec::Mode::Bits;
    pr.output.bits = {"anc"};
  }
  return pr;
}

ProgramSet kmeans_round(const std::vector<FeatureVector>& points,
                        const std::vector<FeatureVector>& centroids,
                        const SwapTestOptions& opt) {
  if (points.empty() || centroids.empty())
    throw Error("invalid program: clustering needs points and centroids");
  ProgramSet ps;
  for (const FeatureVector& p : points)
    for (const FeatureVector& c : centroids) ps.programs.push_back(swap_test_program(p, c, opt));
  NearestCentroid nc;
  nc.k = static_cast<int>(centroids.size());
  ps.merge = nc;
  return ps;
}

KmeansResult kmeans_cluster(const std::vector<FeatureVector>& points, int k, int max_iterations,
                            const Topology& topo, uint64_t seed, const SwapTestOptions& opt) {
  if (k < 1 || static_cast<size_t>(k) > points.size())
    throw Error("invalid program: need at least k points");
  if (max_iterations < 1) throw Error("invalid program: need at least one iteration");

  size_t dim = 2;
  for (const FeatureVector& p : points) dim = std::max(dim, p.values.size());
  std::vector<FeatureVector> pts = points;
  for (FeatureVector& p : pts) p.values.resize(dim, 0.0);

  KmeansResult res;
  res.centroids.assign(pts.begin(), pts.begin() + k);
  res.assignments.assign(pts.size(), -1);
  SplitMix64 seeder(seed);

  for (int it = 0; it < max_iterations; ++it) {
    ProgramSet ps = kmeans_round(pts, res.centroids, opt);
    ParallelProgram pp = build_parallel_program(topo, ps.programs, greedy_allocator(), ps.merge);
    ParallelRunResult rr = run_parallel(pp, topo, seeder.next());
    std::vector<int> an = std::get<std::vector<int>>(rr.merged);
    res.iterations_run = it + 1;
    if (an == res.assignments) break;
    res.assignments = std::move(an);

    for (int j = 0; j < k; ++j) {
      std::vector<double> mean(dim, 0.0);
      long members = 0;
      for (size_t i = 0; i < pts.size(); ++i) {
        if (res.assignments[i] != j) continue;
        ++members;
        for (size_t d = 0; d < dim; ++d) mean[d] += pts[i].values[d];
      }
      if (members == 0) continue;  // empty cluster keeps its centroid
      for (double& v : mean) v /= static_cast<double>(members);
      double n2 = 0.0;
      for (double v : mean) n2 += v * v;
      if (n2 > 0.0) res.centroids[j] = FeatureVector::from_values(std::move(mean));
    }
  }
  return res;
}

}  // namespace dqs
