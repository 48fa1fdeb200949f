#include "dqs/merge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dqs/error.hpp"

namespace dqs {

std::string Outcome::modal_bits() const {
  if (counts.empty()) throw Error("no samples: outcome has no recorded counts");
  // std::map iterates keys in lexicographic order, so keeping strict
  // greater-than resolves ties toward the smallest bitstring.
  const std::string* best = nullptr;
  long best_n = -1;
  for (const auto& [bs, n] : counts)
    if (n > best_n) {
      best = &bs;
      best_n = n;
    }
  return *best;
}

double Outcome::scalar() const {
  if (value) return *value;
  long acc = 0;
  long tot = 0;
  for (const auto& [bs, n] : counts) {
    long ones = std::count(bs.begin(), bs.end(), '1');
    acc += (ones % 2 == 0) ? n : -n;
    tot += n;
  }
  if (tot == 0) throw Error("no samples: outcome has neither a value nor counts");
  return static_cast<double>(acc) / static_cast<double>(tot);
}

const char* merge_kind_name(const MergeSpec& spec) {
  struct Visitor {
    const char* operator()(const IdentityMerge&) const { return "identity"; }
    const char* operator()(const WeightedSum&) const { return "weighted_sum"; }
    const char* operator()(const BitAssembly&) const { return "bit_assembly"; }
    const char* operator()(const NearestCentroid&) const { return "nearest_centroid"; }
    const char* operator()(const MaxLikelihoodPhase&) const { return "max_likelihood"; }
  };
  return std::visit(Visitor{}, spec);
}

double mle_amplitude(const std::vector<int>& queries, const std::vector<long>& successes,
                     const std::vector<long>& shots, int grid_resolution) {
  if (queries.size() != successes.size() || queries.size() != shots.size())
    throw Error("arity mismatch: queries, successes and shots must align");
  if (queries.empty()) throw Error("no samples: empty likelihood input");
  if (grid_resolution < 2) throw Error("invalid merge: grid resolution must be at least 2");

  double best_a = 0.0;
  double best_ll = -std::numeric_limits<double>::infinity();
  // Half-open grid [0, 1): a = 1 satisfies every query's likelihood cap
  // whenever all shots succeed, so including it would shadow the true
  // amplitude in the degenerate all-success case.
  for (int j = 0; j < grid_resolution; ++j) {
    double a = static_cast<double>(j) / grid_resolution;
    double theta = std::asin(std::sqrt(std::min(1.0, std::max(0.0, a))));
    double ll = 0.0;
    for (size_t k = 0; k < queries.size(); ++k) {
      double s = std::sin((2.0 * queries[k] + 1.0) * theta);
      double p = std::min(1.0 - 1e-12, std::max(1e-12, s * s));
      ll += successes[k] * std::log(p) + (shots[k] - successes[k]) * std::log1p(-p);
    }
    if (ll > best_ll) {  // ties resolve to the smallest grid amplitude
      best_ll = ll;
      best_a = a;
    }
  }
  return best_a;
}

namespace {

struct MergeVisitor {
  const std::vector<Outcome>& outcomes;

  MergedValue operator()(const IdentityMerge&) const {
    if (outcomes.size() == 1) return outcomes[0].scalar();
    std::vector<double> vals;
    vals.reserve(outcomes.size());
    for (const Outcome& oc : outcomes) vals.push_back(oc.scalar());
    return vals;
  }

  MergedValue operator()(const WeightedSum& ws) const {
    if (ws.coefficients.size() != outcomes.size())
      throw Error("arity mismatch: weighted sum expects " +
                  std::to_string(ws.coefficients.size()) + " outcomes, got " +
                  std::to_string(outcomes.size()));
    double acc = 0.0;
    for (size_t i = 0; i < outcomes.size(); ++i) acc += ws.coefficients[i] * outcomes[i].scalar();
    return acc;
  }

  MergedValue operator()(const BitAssembly& ba) const {
    if (outcomes.size() != 1)
      throw Error("arity mismatch: bit assembly merges exactly one outcome");
    const Outcome& oc = outcomes[0];
    std::string modal = oc.modal_bits();
    auto bit_at = [&](const std::string& name) -> int {
      for (size_t i = 0; i < oc.bit_names.size(); ++i)
        if (oc.bit_names[i] == name) return modal[i] - '0';
      throw Error("arity mismatch: bit '" + name + "' missing from the outcome");
    };
    std::vector<int> bits;
    bits.reserve(ba.bit_order.size());
    for (const std::string& name : ba.bit_order) bits.push_back(bit_at(name));
    std::reverse(bits.begin(), bits.end());
    long decimal = 0;
    for (size_t i = 0; i < bits.size(); ++i) decimal += static_cast<long>(bits[i]) << i;
    return static_cast<double>(decimal) / static_cast<double>(1L << ba.n_bits);
  }

  MergedValue operator()(const NearestCentroid& nc) const {
    if (nc.k < 1 || outcomes.size() % static_cast<size_t>(nc.k) != 0)
      throw Error("arity mismatch: outcome count is not a multiple of k");
    std::vector<int> assign;
    for (size_t base = 0; base < outcomes.size(); base += nc.k) {
      int best = 0;
      double best_sim = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < nc.k; ++j) {
        double sim = outcomes[base + j].scalar();
        if (sim > best_sim) {  // ties keep the lowest centroid index
          best_sim = sim;
          best = j;
        }
      }
      assign.push_back(best);
    }
    return assign;
  }

  MergedValue operator()(const MaxLikelihoodPhase& ml) const {
    if (ml.queries.size() != outcomes.size())
      throw Error("arity mismatch: query schedule expects " + std::to_string(ml.queries.size()) +
                  " outcomes, got " + std::to_string(outcomes.size()));
    std::vector<long> successes;
    std::vector<long> shots;
    for (const Outcome& oc : outcomes) {
      long s = 0;
      long n = 0;
      for (const auto& [bs, k] : oc.counts) {
        if (!bs.empty() && bs[0] == '1') s += k;
        n += k;
      }
      if (n == 0) throw Error("no samples: likelihood outcome has no counts");
      successes.push_back(s);
      shots.push_back(n);
    }
    return mle_amplitude(ml.queries, successes, shots, ml.grid_resolution);
  }
};

}  // namespace

MergedValue merge(const MergeSpec& spec, const std::vector<Outcome>& outcomes) {
  if (outcomes.empty()) throw Error("no samples: nothing to merge");
  return std::visit(MergeVisitor{outcomes}, spec);
}

}  // namespace dqs
