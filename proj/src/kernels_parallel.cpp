#include <bit>

#include "dqs/kernels.hpp"

// OpenMP kernels. Elementwise updates are embarrassingly parallel; the
// reductions accumulate fixed-size chunk partials that are combined in
// index order, so results do not depend on the thread count. Small states
// take the plain path to dodge fork/join overhead.

namespace dqs::kernels::parallel {

namespace {

// Chunk partials in index order; identical combination order regardless of
// how chunks were distributed over threads.
template <typename F>
double chunked_sum(std::size_t n, F&& partial) {
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> parts(chunks, 0.0);
  if (n >= kParallelCutoff) {
#pragma omp parallel for schedule(static)
    for (long long c = 0; c < static_cast<long long>(chunks); ++c) {
      const std::size_t lo = static_cast<std::size_t>(c) * kChunk;
      parts[c] = partial(lo, std::min(lo + kChunk, n));
    }
  } else {
    for (std::size_t c = 0; c < chunks; ++c) {
      const std::size_t lo = c * kChunk;
      parts[c] = partial(lo, std::min(lo + kChunk, n));
    }
  }
  double total = 0.0;
  for (double p : parts) total += p;
  return total;
}

}  // namespace

void apply_single(cvec& amps, int target, const Mat2& u) {
  const std::size_t pairs = amps.size() / 2;
  const std::size_t bit = std::size_t(1) << target;
  const std::size_t low_mask = bit - 1;
#pragma omp parallel for schedule(static) if (amps.size() >= kParallelCutoff)
  for (long long k = 0; k < static_cast<long long>(pairs); ++k) {
    const std::size_t kk = static_cast<std::size_t>(k);
    const std::size_t i0 = ((kk & ~low_mask) << 1) | (kk & low_mask);
    const std::size_t i1 = i0 | bit;
    const cplx a0 = amps[i0];
    const cplx a1 = amps[i1];
    amps[i0] = u[0] * a0 + u[1] * a1;
    amps[i1] = u[2] * a0 + u[3] * a1;
  }
}

void apply_controlled(cvec& amps, int control, int target, const Mat2& u) {
  const std::size_t pairs = amps.size() / 2;
  const std::size_t bit = std::size_t(1) << target;
  const std::size_t cbit = std::size_t(1) << control;
  const std::size_t low_mask = bit - 1;
#pragma omp parallel for schedule(static) if (amps.size() >= kParallelCutoff)
  for (long long k = 0; k < static_cast<long long>(pairs); ++k) {
    const std::size_t kk = static_cast<std::size_t>(k);
    const std::size_t i0 = ((kk & ~low_mask) << 1) | (kk & low_mask);
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
  return chunked_sum(amps.size(), [&](std::size_t lo, std::size_t hi) {
    double p = 0.0;
    for (std::size_t i = lo; i < hi; ++i)
      if (!(i & bit)) p += std::norm(amps[i]);
    return p;
  });
}

void project(cvec& amps, int target, int outcome, double scale) {
  const std::size_t bit = std::size_t(1) << target;
  const std::size_t want = outcome ? bit : 0;
#pragma omp parallel for schedule(static) if (amps.size() >= kParallelCutoff)
  for (long long i = 0; i < static_cast<long long>(amps.size()); ++i) {
    const std::size_t ii = static_cast<std::size_t>(i);
    amps[ii] = (ii & bit) == want ? amps[ii] * scale : cplx(0.0, 0.0);
  }
}

double norm_sq(const cvec& amps) {
  return chunked_sum(amps.size(), [&](std::size_t lo, std::size_t hi) {
    double p = 0.0;
    for (std::size_t i = lo; i < hi; ++i) p += std::norm(amps[i]);
    return p;
  });
}

cplx pauli_expectation(const cvec& amps, uint64_t x_mask, uint64_t zy_mask, int y_count) {
  static const cplx kPhase[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const cplx base = kPhase[y_count & 3];
  const double re = chunked_sum(amps.size(), [&](std::size_t lo, std::size_t hi) {
    double acc = 0.0;
    for (std::size_t b = lo; b < hi; ++b) {
      const int sign = std::popcount(b & zy_mask) & 1 ? -1 : 1;
      acc += (std::conj(amps[b ^ x_mask]) * (base * static_cast<double>(sign)) * amps[b]).real();
    }
    return acc;
  });
  const double im = chunked_sum(amps.size(), [&](std::size_t lo, std::size_t hi) {
    double acc = 0.0;
    for (std::size_t b = lo; b < hi; ++b) {
      const int sign = std::popcount(b & zy_mask) & 1 ? -1 : 1;
      acc += (std::conj(amps[b ^ x_mask]) * (base * static_cast<double>(sign)) * amps[b]).imag();
    }
    return acc;
  });
  return {re, im};
}

void grow(cvec& amps) {
  const std::size_t n = amps.size();
  cvec next(2 * n, cplx(0.0, 0.0));
#pragma omp parallel for schedule(static) if (n >= kParallelCutoff)
  for (long long i = 0; i < static_cast<long long>(n); ++i)
    next[2 * i] = amps[i];
  amps.swap(next);
}

}  // namespace dqs::kernels::parallel
