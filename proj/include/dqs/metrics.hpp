#pragma once

#include <string>
#include <vector>

#include "dqs/circuit.hpp"
#include "dqs/remapper.hpp"
#include "dqs/trace.hpp"

namespace dqs {

// Weights for the operation census. Monolithic circuits use the first three
// categories (one unit per preparation, gate, measurement). Each cat block
// additionally contributes the itemized entangler + disentangler overhead,
// which sums to 12 under the defaults: EPR generation and transmission, the
// local CNOT, two protocol measurements, two classical sends, two receives,
// the remote-side H, the conditional-Z correction and one ancilla reset.
// The entangler's conditional-X and the second reset carry weight 0 by
// convention so the default block cost stays at 12 operations.
struct AccountingProfile {
  double prep = 1;
  double gate = 1;
  double measure = 1;
  double epr_generation = 1;
  double epr_transmission = 1;
  double entangle_cnot = 1;
  double entangle_measure = 1;
  double entangle_send = 1;
  double entangle_recv = 1;
  double entangle_correction = 0;
  double disentangle_h = 1;
  double disentangle_measure = 1;
  double disentangle_send = 1;
  double disentangle_recv = 1;
  double disentangle_correction = 1;
  double ancilla_reset = 1;

  double block_overhead() const;
};

// Raw counts are profile-independent; total_ops applies the active profile.
// epr_pairs counts Bell pairs (one per block), classical_messages counts
// logical messages (send+receive as one), correction_count and reset_count
// are the raw conditional-correction and reset tallies.
struct ResourceReport {
  long prep_count = 0;
  long gate_count = 0;
  long measure_count = 0;
  long epr_pairs = 0;
  long classical_messages = 0;
  long correction_count = 0;
  long reset_count = 0;
  long total_ops = 0;
  long ticks_elapsed = 0;

  ResourceReport& operator+=(const ResourceReport& o);
};

ResourceReport count_monolithic(const Circuit& c, const AccountingProfile& profile = {});
ResourceReport count_distributed(const DistributedCircuit& dc,
                                 const AccountingProfile& profile = {});
ResourceReport count_distributed(const Trace& trace, const AccountingProfile& profile = {});

struct QpeSweepRow {
  int n = 0;
  long monolithic = 0;
  long distributed = 0;
};

// Operation census of the phase-estimation family split control-side /
// target-side across two QPUs, for n_from..n_to measurement qubits.
std::vector<QpeSweepRow> sweep_qpe(int n_from, int n_to, const AccountingProfile& profile = {});
std::string sweep_csv(const std::vector<QpeSweepRow>& rows);

}  // namespace dqs
