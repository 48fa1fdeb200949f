#pragma once

#include <stdexcept>
#include <string>

namespace dqs {

// All recoverable failures surface as Error; the message begins with a stable
// tag ("unschedulable", "unregistered qubit", ...) so callers and tests can
// match on it without parsing prose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dqs
