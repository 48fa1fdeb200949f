#pragma once

#include <string>
#include <vector>

#include "dqs/circuit.hpp"
#include "dqs/remapper.hpp"

namespace dqs {

enum class InstrKind {
  PREPARE,
  SINGLE_GATE,
  TWO_QUBIT_GATE,
  MEASURE,
  EPR_SEND,
  EPR_RECV,
  CLASSICAL_SEND,
  CLASSICAL_RECV,
  COND_CORRECTION,
  RESET,
  REPORT,
};

const char* instr_kind_name(InstrKind k);

// One executed instruction. Events are appended in execution order, which
// is exactly (tick, node index, per-node sequence).
struct TraceEvent {
  long tick = 0;
  int node_index = 0;
  std::string node;
  int seq = 0;
  InstrKind kind = InstrKind::SINGLE_GATE;
  GateKind gate_kind = GateKind::X;
  std::vector<QubitRef> qubits;
  std::string bit;
  std::string peer;
  int program = 0;
  GateRole role = GateRole::Data;
  int block = -1;
  // Measured / transmitted bit, or for COND_CORRECTION whether it fired;
  // -1 when not applicable (including deferred mode).
  int value = -1;
};

using Trace = std::vector<TraceEvent>;

// Causality and ordering checks over a finished trace; returns one message
// per violation, empty when clean.
std::vector<std::string> validate_trace(const Trace& trace);

}  // namespace dqs
