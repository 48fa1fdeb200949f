#pragma once

#include <map>
#include <string>

#include "dqs/circuit.hpp"

namespace dqs {

// Tensor product of single-qubit Paulis; identity factors are implicit.
struct PauliString {
  // qubit -> 'X' | 'Y' | 'Z'
  std::map<QubitRef, char> factors;

  bool empty() const { return factors.empty(); }

  // Parse "ZIXX" style labels, character i acting on qubit(i). Identity
  // characters ('I') are dropped.
  static PauliString from_label(const std::string& label,
                                const std::function<QubitRef(int)>& qubit);
  std::string str() const;
};

}  // namespace dqs
