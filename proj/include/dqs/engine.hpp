#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dqs/circuit.hpp"
#include "dqs/merge.hpp"
#include "dqs/metrics.hpp"
#include "dqs/remapper.hpp"
#include "dqs/scheduler.hpp"
#include "dqs/statevector.hpp"
#include "dqs/topology.hpp"
#include "dqs/trace.hpp"

namespace dqs {

// Singleton logical clock for a run. Every node finishes tick t before any
// node starts t+1; messages sent at t are readable at t+1 or later.
struct Clock {
  long tick = 0;
  void advance() { ++tick; }
};

struct Instruction {
  long tick = 0;
  InstrKind kind = InstrKind::SINGLE_GATE;
  // Gate payload for PREPARE / SINGLE_GATE / TWO_QUBIT_GATE / MEASURE /
  // COND_CORRECTION / RESET; EPR_SEND keeps both halves in gate.operands.
  Gate gate;
  std::string bit;
  std::string peer;  // counterpart node for EPR / classical transfers
  GateRole role = GateRole::Data;
  int block = -1;
  int origin = -1;
  int program = 0;
  // REPORT payload: bit names to hand to the controller, or a Pauli whose
  // exact expectation is evaluated on the pre-measurement state.
  std::vector<std::string> report_bits;
  std::optional<PauliString> report_pauli;
};

struct InstructionSchedule {
  std::vector<std::string> nodes;  // topology order
  std::vector<std::vector<Instruction>> per_node;
  long horizon = 0;  // last occupied tick
  std::map<std::string, std::string> bit_home;

  int node_index(const std::string& node) const;
};

struct EngineOptions {
  int message_latency = 1;
  KernelMode kernels = KernelMode::Parallel;
  // Deferred-measurement mode: measurements and resets are skipped and each
  // conditional correction becomes a unitary controlled by the qubit its
  // bit would have been measured from. Used for statevector comparisons.
  bool deferred_measurement = false;
  // Reject schedules that touch ancilla slots past a QPU's declared size.
  bool strict_ancilla = false;
  bool capture_final_state = false;
  bool record_trace = true;
  AccountingProfile accounting{};
};

// Lowers a distributed circuit onto per-node timestamped instruction lists.
// Plain gates schedule as soon as their operands are free (same-layer gates
// under uniform durations share a tick); cat blocks expand to the fixed
// pattern (t) EPR, (t+1) CNOT+MEASURE, (t+2) SEND, (t+3) RECV+COND_X, the
// served gates, then H+MEASURE / SEND / RECV+COND_Z and the ancilla resets.
// Tick advances use the per-node gate_times lookup (default 1).
InstructionSchedule compile_instructions(const DistributedCircuit& dc, const Topology& topo,
                                         const EngineOptions& opt = {});

// Appends end-of-program REPORT instructions delivering `output` to the
// controller; `alloc` resolves abstract Pauli supports for exact mode.
void add_reports(InstructionSchedule& sched, const OutputSpec& output,
                 const Allocation* alloc = nullptr);

struct CompiledProgram {
  int program_index = 0;
  InstructionSchedule schedule;
  OutputSpec output;
  long repetitions = 1;
};

struct ExecutionResult {
  std::vector<Outcome> outcomes;
  Trace trace;  // shot 0 instruction stream
  std::optional<StateVector> final_state;
  long ticks_elapsed = 0;
};

// Lock-step execution of one round. Programs interleave on the shared
// clock; the statevector spans every qubit the round touches. Outcomes
// accumulate per program over its own repetition count.
ExecutionResult execute(const std::vector<CompiledProgram>& programs, const Topology& topo,
                        CounterRng& rng, const EngineOptions& opt = {});
ExecutionResult execute(const InstructionSchedule& sched, const Topology& topo, long repetitions,
                        uint64_t seed, const OutputSpec& output = {}, const EngineOptions& opt = {});

struct RoundReport {
  int round = 0;
  // 1-based program indices per QPU, topology order (Example 1 shape).
  std::vector<std::vector<int>> qpu_programs;
  long ticks_elapsed = 0;
  ResourceReport resources;
};

struct ParallelRunResult {
  MergedValue merged;
  std::vector<Outcome> outcomes;   // program order
  std::vector<RoundReport> rounds;
  std::vector<Trace> traces;       // one per round
  ResourceReport totals;
  std::vector<std::string> warnings;
};

// Remaps, compiles and executes every round of a scheduled batch, then
// folds the per-program outputs through the merge spec.
ParallelRunResult run_parallel(const ParallelProgram& pp, const Topology& topo, uint64_t seed,
                               const EngineOptions& opt = {});

// Comparison baseline: runs each program alone on a fresh single-QPU
// cluster wide enough for it, then merges identically.
ParallelRunResult run_sequential(const std::vector<Program>& programs, const MergeSpec& merge_spec,
                                 uint64_t seed, const EngineOptions& opt = {});

}  // namespace dqs
