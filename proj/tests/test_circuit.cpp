#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "dqs/circuit.hpp"
#include "dqs/error.hpp"
#include "dqs/rng.hpp"
#include "dqs/scheduler.hpp"
#include "dqs/topology.hpp"
#include "oracle.hpp"

using namespace dqs;

namespace {

QubitRef q(int i) { return QubitRef::abstract(i); }

bool mat2_close(const Mat2& a, const oracle::Mat& b, double tol = 1e-12) {
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      if (std::abs(a[r * 2 + c] - b.at(r, c)) > tol) return false;
  return true;
}

// Rewrites abstract operands through an allocation.
Circuit place(const Circuit& c, const Allocation& alloc) {
  Circuit out;
  for (Gate g : c.gates) {
    for (QubitRef& op : g.operands)
      if (op.is_abstract()) op = alloc.slots[op.index];
    out.append(std::move(g));
  }
  return out;
}

}  // namespace

TEST_SUITE("circuit") {
  TEST_CASE("gate kind names round-trip") {
    const GateKind kinds[] = {
        GateKind::PREPARE, GateKind::X,       GateKind::Y,
        GateKind::Z,       GateKind::H,       GateKind::S,
        GateKind::T,       GateKind::RX,      GateKind::RY,
        GateKind::RZ,      GateKind::PHASE,   GateKind::CNOT,
        GateKind::CZ,      GateKind::CPHASE,  GateKind::CUSTOM_SINGLE,
        GateKind::CUSTOM_CONTROLLED,          GateKind::MEASURE,
        GateKind::COND_X,  GateKind::COND_Z,  GateKind::RESET,
        GateKind::EPR_GEN};
    for (GateKind k : kinds) {
      GateKind back;
      REQUIRE(kind_from_name(kind_name(k), &back));
      CHECK(back == k);
    }
    GateKind dummy;
    CHECK_FALSE(kind_from_name("SWAPPITY", &dummy));
  }

  TEST_CASE("gate matrices match the dense oracle") {
    SplitMix64 rng(11);
    auto check = [](const Gate& g) {
      CAPTURE(kind_name(g.kind));
      CHECK(mat2_close(gate_matrix(g), oracle::gate2x2(g)));
      CHECK(is_unitary_mat2(gate_matrix(g)));
    };
    for (GateKind k : {GateKind::X, GateKind::Y, GateKind::Z, GateKind::H, GateKind::S,
                       GateKind::T})
      check(Gate::single(k, q(0)));
    for (int i = 0; i < 20; ++i) {
      const double a = 2.0 * std::numbers::pi * rng.next_double() - std::numbers::pi;
      for (GateKind k : {GateKind::RX, GateKind::RY, GateKind::RZ, GateKind::PHASE})
        check(Gate::rotation(k, q(0), a));
      check(Gate::cphase(q(0), q(1), a));
      check(Gate::custom_single(q(0), oracle::random_unitary2(rng)));
    }
    check(Gate::cnot(q(0), q(1)));
    check(Gate::cz(q(0), q(1)));
  }

  TEST_CASE("unitarity predicate") {
    SplitMix64 rng(5);
    for (int i = 0; i < 10; ++i) CHECK(is_unitary_mat2(oracle::random_unitary2(rng)));
    CHECK_FALSE(is_unitary_mat2(Mat2{1, 0, 0, 2}));
    CHECK_FALSE(is_unitary_mat2(Mat2{1, 1, 0, 1}));
    CHECK_FALSE(is_unitary_mat2(Mat2{0, 0, 0, 0}));
  }

  TEST_CASE("gate classification") {
    CHECK(Gate::cnot(q(0), q(1)).is_controlled());
    CHECK(Gate::cz(q(0), q(1)).is_controlled());
    CHECK(Gate::cphase(q(0), q(1), 0.5).is_controlled());
    CHECK(Gate::custom_controlled(q(0), q(1), gate_matrix(Gate::single(GateKind::H, q(0))))
              .is_controlled());
    CHECK_FALSE(Gate::single(GateKind::H, q(0)).is_controlled());
    CHECK_FALSE(Gate::epr_gen(q(0), q(1)).is_controlled());

    CHECK(Gate::single(GateKind::H, q(0)).is_unitary());
    CHECK(Gate::cond_x(q(0), "m").is_unitary());
    CHECK_FALSE(Gate::measure(q(0), "m").is_unitary());
    CHECK_FALSE(Gate::prepare(q(0)).is_unitary());
    CHECK_FALSE(Gate::reset(q(0)).is_unitary());
  }

  TEST_CASE("circuit registers qubits in first-use order") {
    Circuit c;
    c.append(Gate::single(GateKind::H, q(2)));
    c.append(Gate::cnot(q(2), q(0)));
    c.append(Gate::single(GateKind::X, q(1)));
    CHECK(c.width() == 3);
    CHECK(c.qubit_order(q(2)) == 0);
    CHECK(c.qubit_order(q(0)) == 1);
    CHECK(c.qubit_order(q(1)) == 2);
    CHECK(c.qubit_order(q(7)) == -1);
    CHECK(c.has_qubit(q(0)));
    CHECK_FALSE(c.has_qubit(q(7)));
  }

  TEST_CASE("layer_decompose pinned examples") {
    Circuit chain;
    chain.append(Gate::single(GateKind::H, q(0)));
    chain.append(Gate::cnot(q(0), q(1)));
    chain.append(Gate::single(GateKind::X, q(1)));
    LayeredCircuit lc = layer_decompose(chain);
    REQUIRE(lc.layer_count() == 3);
    CHECK(lc.layers[0] == std::vector<int>{0});
    CHECK(lc.layers[1] == std::vector<int>{1});
    CHECK(lc.layers[2] == std::vector<int>{2});

    Circuit par;
    par.append(Gate::single(GateKind::H, q(0)));
    par.append(Gate::single(GateKind::H, q(1)));
    CHECK(layer_decompose(par).layer_count() == 1);

    CHECK(layer_decompose(Circuit{}).layer_count() == 0);
  }

  TEST_CASE("layering is an order-preserving permutation with disjoint layers") {
    SplitMix64 rng(23);
    for (int trial = 0; trial < 30; ++trial) {
      const int width = 2 + static_cast<int>(rng.next_below(7));
      const int gates = 1 + static_cast<int>(rng.next_below(50));
      Circuit full = oracle::random_circuit(rng, width, gates);
      Circuit c;  // gates only; PREPARE would add per-qubit chain links
      for (const QubitRef& qq : full.qubits) c.add_qubit(qq);
      for (const Gate& g : full.gates)
        if (g.kind != GateKind::PREPARE) c.append(g);

      LayeredCircuit lc = layer_decompose(c);

      std::vector<int> flat;
      for (const auto& layer : lc.layers) {
        std::set<QubitRef> touched;
        for (int gi : layer) {
          for (const QubitRef& op : c.gates[gi].operands) {
            CHECK_FALSE(touched.count(op));  // within-layer disjointness
            touched.insert(op);
          }
          flat.push_back(gi);
        }
      }
      std::vector<int> sorted = flat;
      std::sort(sorted.begin(), sorted.end());
      for (size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == static_cast<int>(i));

      // Per-qubit relative order must survive flattening.
      std::map<QubitRef, std::vector<int>> orig, flat_order;
      for (size_t gi = 0; gi < c.gates.size(); ++gi)
        for (const QubitRef& op : c.gates[gi].operands) orig[op].push_back(static_cast<int>(gi));
      for (int gi : flat)
        for (const QubitRef& op : c.gates[gi].operands) flat_order[op].push_back(gi);
      CHECK(orig == flat_order);

      // Greedy can never beat the longest per-qubit chain.
      size_t max_chain = 0;
      for (const auto& [qq, v] : orig) max_chain = std::max(max_chain, v.size());
      CHECK(static_cast<size_t>(lc.layer_count()) >= max_chain);
    }
  }

  TEST_CASE("layer count equals the per-qubit chain for single-qubit circuits") {
    SplitMix64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
      const int width = 1 + static_cast<int>(rng.next_below(6));
      Circuit c;
      std::map<int, int> per_qubit;
      const int gates = 1 + static_cast<int>(rng.next_below(40));
      for (int i = 0; i < gates; ++i) {
        const int qq = static_cast<int>(rng.next_below(width));
        c.append(Gate::single(GateKind::H, q(qq)));
        ++per_qubit[qq];
      }
      int max_chain = 0;
      for (const auto& [qq, n] : per_qubit) max_chain = std::max(max_chain, n);
      CHECK(layer_decompose(c).layer_count() == max_chain);
    }
  }

  TEST_CASE("validate accepts the split phase-estimation demo on 3+3 qubits") {
    // Counting qubits on the second QPU, the phase qubit on the first --
    // the exact placement the n=3 demo uses.
    Topology topo{{{"QPU_0", 3, {}}, {"QPU_1", 3, {}}}};
    Allocation alloc;
    alloc.slots = {QubitRef{"QPU_1", 0}, QubitRef{"QPU_1", 1}, QubitRef{"QPU_1", 2},
                   QubitRef{"QPU_0", 0}};

    Circuit qpe;  // the controlled-power skeleton is enough for validation
    for (int i = 0; i < 4; ++i) qpe.append(Gate::prepare(q(i)));
    qpe.append(Gate::single(GateKind::X, q(3)));
    for (int i = 0; i < 3; ++i) qpe.append(Gate::single(GateKind::H, q(i)));
    const Mat2 u = gate_matrix(Gate::rotation(GateKind::PHASE, q(0), 2.0 * std::numbers::pi / 3.0));
    for (int i = 0; i < 3; ++i)
      for (int r = 0; r < (1 << i); ++r) qpe.append(Gate::custom_controlled(q(i), q(3), u));
    for (int i = 0; i < 3; ++i) qpe.append(Gate::measure(q(i), "m" + std::to_string(i)));

    CHECK(validate(place(qpe, alloc), topo).ok());
  }

  TEST_CASE("validate reports violations as data") {
    Topology topo{{{"QPU_0", 3, {}}}};

    Circuit oob;
    oob.append(Gate::single(GateKind::H, QubitRef{"QPU_0", 5}));
    auto rep = validate(oob, topo);
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.violations[0].find("index out of range") != std::string::npos);

    Circuit ghost;
    ghost.append(Gate::single(GateKind::H, QubitRef{"QPU_9", 0}));
    rep = validate(ghost, topo);
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.violations[0].find("unknown node") != std::string::npos);

    Circuit skew;
    skew.append(Gate::custom_controlled(QubitRef{"QPU_0", 0}, QubitRef{"QPU_0", 1},
                                        Mat2{1, 0, 0, 2}));
    rep = validate(skew, topo);
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.violations[0].find("non-unitary") != std::string::npos);

    Circuit dup;
    Gate g = Gate::cnot(QubitRef{"QPU_0", 0}, QubitRef{"QPU_0", 1});
    g.operands[1] = g.operands[0];
    dup.add_qubit(QubitRef{"QPU_0", 0});
    dup.gates.push_back(g);
    rep = validate(dup, topo);
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.violations[0].find("duplicate operands") != std::string::npos);

    Circuit unnamed;
    Gate m = Gate::measure(QubitRef{"QPU_0", 0}, "");
    unnamed.add_qubit(QubitRef{"QPU_0", 0});
    unnamed.gates.push_back(m);
    rep = validate(unnamed, topo);
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.violations[0].find("classical bit") != std::string::npos);
  }
}
