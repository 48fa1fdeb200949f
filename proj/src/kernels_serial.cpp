#include <algorithm>
#include <bit>

#include "dqs/kernels.hpp"

// Reference kernels: straightforward loops, no threading. Reductions
// accumulate kChunk partials in index order, the same association the
// OpenMP variants use, so the two modes agree bitwise.

namespace dqs::kernels::serial {

void apply_single(cvec& amps, int target, const Mat2& u) {
  const std::size_t n = amps.size();
  const std::size_t bit = std::size_t(1) << target;
  const std::size_t low_mask = bit - 1;
  for (std::size_t k = 0; k < n / 2; ++k) {
    const std::size_t i0 = ((k & ~low_mask) << 1) | (k & low_mask);
    const std::size_t i1 = i0 | bit;
    const cplx a0 = amps[i0];
    const cplx a1 = amps[i1];
    amps[i0] = u[0] * a0 + u[1] * a1;
    amps[i1] = u[2] * a0 + u[3] * a1;
  }
}

void apply_controlled(cvec& amps, int control, int target, const Mat2& u) {
  const std::size_t n = amps.size();
  const std::size_t bit = std::size_t(1) << target;
  const std::size_t cbit = std::size_t(1) << control;
  const std::size_t low_mask = bit - 1;
  for (std::size_t k = 0; k < n / 2; ++k) {
    const std::size_t i0 = ((k & ~low_mask) << 1) | (k & low_mask);
    if (!(i0 & cbit)) continue;
    const std::size_t i1 = i0 | bit;
    const cplx a0 = amps[i0];
    const cplx a1 = amps[i1];
    amps[i0] = u[0] * a0 + u[1] * a1;
    amps[i1] = u[2] * a0 + u[3] * a1;
  }
}

double probability_zero(const cvec& amps, int target) {
  const std::size_t bit = std::size_t(1) << target;
  double total = 0.0;
  for (std::size_t lo = 0; lo < amps.size(); lo += kChunk) {
    const std::size_t hi = std::min(lo + kChunk, amps.size());
    double p = 0.0;
    for (std::size_t i = lo; i < hi; ++i)
      if (!(i & bit)) p += std::norm(amps[i]);
    total += p;
  }
  return total;
}

void project(cvec& amps, int target, int outcome, double scale) {
  const std::size_t bit = std::size_t(1) << target;
  const std::size_t want = outcome ? bit : 0;
  for (std::size_t i = 0; i < amps.size(); ++i)
    amps[i] = (i & bit) == want ? amps[i] * scale : cplx(0.0, 0.0);
}

double norm_sq(const cvec& amps) {
  double total = 0.0;
  for (std::size_t lo = 0; lo < amps.size(); lo += kChunk) {
    const std::size_t hi = std::min(lo + kChunk, amps.size());
    double p = 0.0;
    for (std::size_t i = lo; i < hi; ++i) p += std::norm(amps[i]);
    total += p;
  }
  return total;
}

cplx pauli_expectation(const cvec& amps, uint64_t x_mask, uint64_t zy_mask, int y_count) {
  // P|b> = i^y * (-1)^{popcount(b & zy_mask)} |b ^ x_mask>
  static const cplx kPhase[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const cplx base = kPhase[y_count & 3];
  // Complex addition is componentwise, so per-chunk complex accumulation
  // matches the parallel kernel's separate re/im partial sums exactly.
  cplx total(0.0, 0.0);
  for (std::size_t lo = 0; lo < amps.size(); lo += kChunk) {
    const std::size_t hi = std::min(lo + kChunk, amps.size());
    cplx acc(0.0, 0.0);
    for (std::size_t b = lo; b < hi; ++b) {
      const int sign = std::popcount(b & zy_mask) & 1 ? -1 : 1;
      acc += std::conj(amps[b ^ x_mask]) * (base * static_cast<double>(sign)) * amps[b];
    }
    total += acc;
  }
  return total;
}

void grow(cvec& amps) {
  const std::size_t n = amps.size();
  cvec next(2 * n, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < n; ++i) next[2 * i] = amps[i];
  amps.swap(next);
}

}  // namespace dqs::kernels::serial
