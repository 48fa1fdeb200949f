#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "dqs/circuit.hpp"

// Amplitude-level kernels. Two interchangeable implementations share every
// signature: kernels::serial is the plain reference, kernels::parallel adds
// OpenMP over the amplitude index. Reductions in both run over fixed 4096-
// element chunks combined in index order, so the two variants (and any
// thread count) produce bit-identical results.
//
// Bit positions are counted from the least significant bit of the amplitude
// index. Callers own the registration-order-to-bit-position mapping.

namespace dqs::kernels {

using cvec = std::vector<cplx>;

constexpr std::size_t kChunk = 4096;
// Below this state size the parallel variant falls back to plain loops;
// fork/join overhead dominates tiny states.
constexpr std::size_t kParallelCutoff = std::size_t(1) << 14;

namespace serial {

void apply_single(cvec& amps, int target, const Mat2& u);
void apply_controlled(cvec& amps, int control, int target, const Mat2& u);
double probability_zero(const cvec& amps, int target);
// Zero the mismatching half and rescale the kept one by `scale`.
void project(cvec& amps, int target, int outcome, double scale);
double norm_sq(const cvec& amps);
// <psi| P |psi> for a Pauli with X support `x_mask`, Z-or-Y support
// `zy_mask` and `y_count` Y factors.
cplx pauli_expectation(const cvec& amps, uint64_t x_mask, uint64_t zy_mask, int y_count);
// Tensor a fresh |0> qubit onto the low end: amps[i] -> amps[2i].
void grow(cvec& amps);

}  // namespace serial

namespace parallel {

void apply_single(cvec& amps, int target, const Mat2& u);
void apply_controlled(cvec& amps, int control, int target, const Mat2& u);
double probability_zero(const cvec& amps, int target);
void project(cvec& amps, int target, int outcome, double scale);
double norm_sq(const cvec& amps);
cplx pauli_expectation(const cvec& amps, uint64_t x_mask, uint64_t zy_mask, int y_count);
void grow(cvec& amps);

}  // namespace parallel

}  // namespace dqs::kernels
