#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dqs/error.hpp"
#include "dqs/statevector.hpp"
#include "oracle.hpp"

using namespace dqs;

namespace {

QubitRef q(int i) { return QubitRef::abstract(i); }

PauliString pauli_on(std::initializer_list<std::pair<int, char>> factors) {
  PauliString p;
  for (auto [i, a] : factors) p.factors[q(i)] = a;
  return p;
}

StateVector bell(KernelMode mode = KernelMode::Parallel) {
  StateVector sv(mode);
  sv.register_qubit(q(0));
  sv.register_qubit(q(1));
  sv.apply(Gate::single(GateKind::H, q(0)));
  sv.apply(Gate::cnot(q(0), q(1)));
  return sv;
}

}  // namespace

TEST_SUITE("statevector") {
  TEST_CASE("registration order defines bit significance") {
    StateVector sv;
    sv.register_qubit(q(0));
    sv.register_qubit(q(1));
    CHECK(sv.position(q(0)) == 0);
    CHECK(sv.position(q(1)) == 1);
    sv.apply(Gate::single(GateKind::X, q(0)));
    // First registered = most significant: |10> lives at index 2.
    CHECK(std::abs(sv.amplitudes()[2] - cplx(1.0, 0.0)) < 1e-15);
    sv.apply(Gate::single(GateKind::X, q(1)));
    CHECK(std::abs(sv.amplitudes()[3] - cplx(1.0, 0.0)) < 1e-15);
  }

  TEST_CASE("H creates an even superposition") {
    StateVector sv;
    sv.register_qubit(q(0));
    sv.apply(Gate::single(GateKind::H, q(0)));
    CHECK(std::abs(sv.amplitudes()[0] - cplx(std::numbers::sqrt2 / 2.0, 0)) < 1e-12);
    CHECK(std::abs(sv.amplitudes()[1] - cplx(std::numbers::sqrt2 / 2.0, 0)) < 1e-12);
  }

  TEST_CASE("controlled phase kicks only the |11> amplitude") {
    const double phi = 2.0 * std::numbers::pi / 3.0;
    StateVector sv;
    sv.register_qubit(q(0));
    sv.register_qubit(q(1));
    sv.apply(Gate::single(GateKind::X, q(0)));
    sv.apply(Gate::single(GateKind::X, q(1)));
    Mat2 u{1, 0, 0, std::exp(cplx(0, phi))};
    sv.apply(Gate::custom_controlled(q(0), q(1), u));
    CHECK(std::abs(sv.amplitudes()[3] - std::exp(cplx(0, phi))) < 1e-12);
  }

  TEST_CASE("X twice is the identity") {
    StateVector sv;
    sv.register_qubit(q(0));
    sv.apply(Gate::single(GateKind::H, q(0)));
    const auto before = sv.amplitudes();
    sv.apply(Gate::single(GateKind::X, q(0)));
    sv.apply(Gate::single(GateKind::X, q(0)));
    CHECK(oracle::fidelity(before, sv.amplitudes()) > 1.0 - 1e-12);
  }

  TEST_CASE("random circuit followed by its inverse returns to |0...0>") {
    SplitMix64 gen(71);
    for (int trial = 0; trial < 15; ++trial) {
      const int width = 1 + static_cast<int>(gen.next_below(5));
      Circuit c = oracle::random_circuit(gen, width, 20);
      Circuit both = c;
      for (const Gate& g : oracle::inverse_circuit(c).gates) both.append(g);
      StateVector sv = simulate_circuit(both, KernelMode::Parallel, nullptr);
      CHECK(std::norm(sv.amplitudes()[0]) > 1.0 - 1e-10);
    }
  }

  TEST_CASE("norm drifts less than 1e-10 over a thousand gates") {
    SplitMix64 gen(72);
    Circuit c = oracle::random_circuit(gen, 6, 1000);
    StateVector sv = simulate_circuit(c, KernelMode::Parallel, nullptr);
    CHECK(std::abs(sv.norm() - 1.0) < 1e-10);
  }

  TEST_CASE("statevector agrees with the dense oracle on random circuits") {
    SplitMix64 gen(73);
    for (int trial = 0; trial < 10; ++trial) {
      const int width = 1 + static_cast<int>(gen.next_below(5));
      Circuit c = oracle::random_circuit(gen, width, 25);
      StateVector sv = simulate_circuit(c, KernelMode::Parallel, nullptr);
      CHECK(oracle::fidelity(oracle::run_circuit(c), sv.amplitudes()) > 1.0 - 1e-10);
    }
  }

  TEST_CASE("prepare") {
    StateVector sv;
    sv.register_qubit(q(0));
    sv.apply(Gate::prepare(q(0), 1));
    CHECK(sv.probability_zero(q(0)) < 1e-12);
    sv.apply(Gate::prepare(q(0), 0));
    CHECK(sv.probability_zero(q(0)) > 1.0 - 1e-12);
    sv.apply(Gate::single(GateKind::H, q(0)));
    CHECK_THROWS_WITH_AS(sv.apply(Gate::prepare(q(0), 0)),
                         doctest::Contains("prepare on superposed qubit"), Error);
  }

  TEST_CASE("EPR generation") {
    StateVector sv;
    sv.register_qubit(q(0));
    sv.register_qubit(q(1));
    sv.gen_epr(q(0), q(1));
    CHECK(sv.exact_expectation(pauli_on({{0, 'Z'}, {1, 'Z'}})) == doctest::Approx(1.0));
    CHECK(sv.exact_expectation(pauli_on({{0, 'X'}, {1, 'X'}})) == doctest::Approx(1.0));

    // Both halves always agree under measurement.
    CounterRng rng(3);
    for (int shot = 0; shot < 50; ++shot) {
      StateVector pair;
      pair.gen_epr(q(0), q(1));
      CHECK(pair.measure(q(0), rng) == pair.measure(q(1), rng));
    }

    StateVector dirty;
    dirty.register_qubit(q(0));
    dirty.register_qubit(q(1));
    dirty.apply(Gate::single(GateKind::X, q(0)));
    CHECK_THROWS_WITH_AS(dirty.gen_epr(q(0), q(1)), doctest::Contains("ancilla not reset"),
                         Error);
  }

  TEST_CASE("measurement statistics and collapse") {
    StateVector zero;
    zero.register_qubit(q(0));
    CounterRng rng(9);
    for (int i = 0; i < 20; ++i) CHECK(zero.measure(q(0), rng) == 0);

    // |+> over 10^4 shots: P(0) within 4 sigma of 1/2 (sigma = 0.005).
    long zeros = 0;
    const int shots = 10000;
    CounterRng srng(10);
    for (int i = 0; i < shots; ++i) {
      StateVector sv;
      sv.register_qubit(q(0));
      sv.apply(Gate::single(GateKind::H, q(0)));
      zeros += sv.measure(q(0), srng) == 0 ? 1 : 0;
    }
    CHECK(std::abs(zeros / double(shots) - 0.5) < 4.0 * 0.005);

    // Collapse: measuring again repeats the outcome.
    StateVector sv;
    sv.register_qubit(q(0));
    sv.apply(Gate::single(GateKind::H, q(0)));
    const int first = sv.measure(q(0), srng);
    for (int i = 0; i < 5; ++i) CHECK(sv.measure(q(0), srng) == first);
  }

  TEST_CASE("exact expectations") {
    StateVector zero;
    zero.register_qubit(q(0));
    CHECK(zero.exact_expectation(pauli_on({{0, 'Z'}})) == doctest::Approx(1.0));

    StateVector plus;
    plus.register_qubit(q(0));
    plus.apply(Gate::single(GateKind::H, q(0)));
    CHECK(plus.exact_expectation(pauli_on({{0, 'X'}})) == doctest::Approx(1.0));

    StateVector b = bell();
    CHECK(b.exact_expectation(pauli_on({{0, 'X'}, {1, 'X'}})) == doctest::Approx(1.0));
    CHECK(b.exact_expectation(pauli_on({{0, 'Z'}, {1, 'Y'}})) == doctest::Approx(0.0));

    CHECK_THROWS_WITH_AS(b.exact_expectation(pauli_on({{7, 'Z'}})),
                         doctest::Contains("unregistered qubit"), Error);
  }

  TEST_CASE("exact expectation matches sampled frequencies at 5 sigma") {
    // P(q1 = 0) on an entangled 2-qubit state, estimated two ways.
    auto make = [] {
      StateVector sv;
      sv.register_qubit(q(0));
      sv.register_qubit(q(1));
      sv.apply(Gate::rotation(GateKind::RY, q(0), 1.1));
      sv.apply(Gate::cnot(q(0), q(1)));
      sv.apply(Gate::rotation(GateKind::RX, q(1), 0.4));
      return sv;
    };
    StateVector sv = make();
    const double p0 = (1.0 + sv.exact_expectation(pauli_on({{1, 'Z'}}))) / 2.0;

    const int shots = 10000;
    CounterRng rng(77);
    long zeros = 0;
    for (int i = 0; i < shots; ++i) {
      StateVector s = make();
      zeros += s.measure(q(1), rng) == 0 ? 1 : 0;
    }
    const double sigma = std::sqrt(p0 * (1.0 - p0) / shots);
    CHECK(std::abs(zeros / double(shots) - p0) < 5.0 * sigma);
  }

  TEST_CASE("same seed replays the same outcome sequence") {
    auto run = [](uint64_t seed) {
      CounterRng rng(seed);
      std::vector<int> bits;
      for (int i = 0; i < 64; ++i) {
        StateVector sv;
        sv.register_qubit(q(0));
        sv.apply(Gate::single(GateKind::H, q(0)));
        bits.push_back(sv.measure(q(0), rng));
      }
      return bits;
    };
    CHECK(run(123) == run(123));
    CHECK(run(123) != run(124));  // astronomically unlikely to collide
  }

  TEST_CASE("serial and parallel modes produce identical amplitudes") {
    SplitMix64 gen(74);
    Circuit c = oracle::random_circuit(gen, 5, 30);
    StateVector a = simulate_circuit(c, KernelMode::Serial, nullptr);
    StateVector b = simulate_circuit(c, KernelMode::Parallel, nullptr);
    REQUIRE(a.amplitudes().size() == b.amplitudes().size());
    for (size_t i = 0; i < a.amplitudes().size(); ++i)
      CHECK(a.amplitudes()[i] == b.amplitudes()[i]);
  }

  TEST_CASE("reset") {
    CounterRng rng(5);
    StateVector sv;
    sv.register_qubit(q(0));
    sv.apply(Gate::single(GateKind::H, q(0)));
    sv.reset(q(0), rng);
    CHECK(sv.probability_zero(q(0)) > 1.0 - 1e-12);

    StateVector one;
    one.register_qubit(q(0));
    one.apply(Gate::single(GateKind::X, q(0)));
    one.reset(q(0), rng);
    CHECK(one.probability_zero(q(0)) > 1.0 - 1e-12);
  }

  TEST_CASE("deferred reset rotates a separable qubit to |0>") {
    StateVector sv;
    sv.register_qubit(q(0));
    sv.register_qubit(q(1));
    sv.apply(Gate::single(GateKind::H, q(0)));
    sv.apply(Gate::rotation(GateKind::RY, q(1), 0.9));
    const double keep = sv.exact_expectation(pauli_on({{1, 'Z'}}));
    sv.reset_deferred(q(0));
    CHECK(sv.probability_zero(q(0)) > 1.0 - 1e-12);
    CHECK(sv.norm() == doctest::Approx(1.0).epsilon(1e-12));
    // The spectator's state survives untouched.
    CHECK(sv.exact_expectation(pauli_on({{1, 'Z'}})) == doctest::Approx(keep).epsilon(1e-12));

    StateVector b = bell();
    CHECK_THROWS_WITH_AS(b.reset_deferred(q(0)), doctest::Contains("reset on entangled qubit"),
                         Error);
  }

  TEST_CASE("width cap is enforced with a clear message") {
    StateVector sv;
    for (int i = 0; i < StateVector::kMaxQubits; ++i) sv.register_qubit(q(i));
    CHECK_THROWS_WITH_AS(sv.register_qubit(q(99)), doctest::Contains("width cap exceeded"),
                         Error);
  }

  TEST_CASE("subspace fidelity isolates unentangled subsets") {
    StateVector sv;
    sv.register_qubit(q(0));
    sv.register_qubit(q(1));
    sv.apply(Gate::rotation(GateKind::RY, q(0), 0.7));
    sv.apply(Gate::single(GateKind::H, q(1)));

    const oracle::cvec ref = {std::cos(0.35), std::sin(0.35)};
    CHECK(subspace_fidelity(sv, {q(0)}, ref) == doctest::Approx(1.0).epsilon(1e-12));

    // Half of an EPR pair holds no pure state: fidelity caps at 1/2.
    StateVector b = bell();
    const oracle::cvec zero = {1.0, 0.0};
    CHECK(subspace_fidelity(b, {q(0)}, zero) == doctest::Approx(0.5).epsilon(1e-9));
  }
}
