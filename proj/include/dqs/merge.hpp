#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dqs/pauli.hpp"

namespace dqs {

// What a program reports back to the controller at the end of each shot.
struct OutputSpec {
  enum class Mode {
    Bits,    // counts over the named bits, in listed order
    Parity,  // counts plus a (-1)^popcount parity estimate in `value`
    Exact,   // exact <pauli> on the pre-measurement state, single shot
  };
  Mode mode = Mode::Bits;
  std::vector<std::string> bits;
  std::optional<PauliString> pauli;
  std::string label;
};

// Accumulated result of one program across its repetitions.
struct Outcome {
  int program_index = 0;
  long repetitions = 0;
  // bitstring (OutputSpec order) -> occurrences
  std::map<std::string, long> counts;
  std::vector<std::string> bit_names;  // position -> bit name, OutputSpec order
  // scalar output gamma_i: parity estimate or exact expectation
  std::optional<double> value;
  std::string last_bits;
  std::string label;

  std::string modal_bits() const;  // most frequent bitstring, ties to lexicographically smallest
  double scalar() const;           // `value` if set, else parity estimate from counts
};

struct IdentityMerge {};

struct WeightedSum {
  std::vector<double> coefficients;
};

// Reverse the per-qubit bit list, read as binary, divide by 2^n_bits.
struct BitAssembly {
  std::vector<std::string> bit_order;
  int n_bits = 0;
};

// Per point, pick the centroid with the maximal similarity estimate
// (swap-test P(0)); outcomes arrive grouped point-major. Ties go to the
// lowest centroid index.
struct NearestCentroid {
  int k = 1;
};

// Maximum-likelihood amplitude search over a uniform grid of candidate
// amplitudes; outcome k contributes Binomial(reps, sin^2((2 m_k + 1)
// asin sqrt(a))) likelihood with m_k = queries[k].
struct MaxLikelihoodPhase {
  int grid_resolution = 10000;
  std::vector<int> queries;
};

using MergeSpec =
    std::variant<IdentityMerge, WeightedSum, BitAssembly, NearestCentroid, MaxLikelihoodPhase>;

using MergedValue = std::variant<double, std::vector<double>, std::vector<int>>;

const char* merge_kind_name(const MergeSpec& spec);
MergedValue merge(const MergeSpec& spec, const std::vector<Outcome>& outcomes);

// Classical MLE core shared with the test oracle path: successes[k] of
// shots[k] trials at query count queries[k].
double mle_amplitude(const std::vector<int>& queries, const std::vector<long>& successes,
                     const std::vector<long>& shots, int grid_resolution);

}  // namespace dqs
