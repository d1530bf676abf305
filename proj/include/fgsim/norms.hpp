#pragma once

#include <cstdint>

#include "fgsim/sparsify.hpp"
#include "fgsim/types.hpp"

namespace fgsim {

// Squared norm <Psi|Psi> of a k-term Gaussian superposition, evaluated as
// the full Hermitian double sum of pairwise overlaps (k^2 of them).  The
// imaginary residue must stay below 1e-9; the real part is clamped at 0.
double exact_norm(const SparseSuperposition& sup);

struct NormEstimate {
  double value = 0.0;   // estimated squared norm, >= 0
  double epsilon = 0.0;
  double p_fail = 0.0;
  std::int64_t samples_used = 0;
  // True when the (1 +- epsilon) multiplicative contract applies; false when
  // the estimate landed below the caller's norm floor, where only the
  // additive reading is meaningful.
  bool multiplicative = true;
};

// Median-of-means Monte Carlo estimator of the squared norm.
//
// Single samples draw a term a with probability |c_a| / ||c||_1 and evaluate
//   y = ||c||_1 Re[(conj(c_a)/|c_a|) <g_a|Psi>],
// which is unbiased: E[y] = <Psi|Psi>.  Batch means are sized by Chebyshev
// against the variance proxy V = ||c||_1^2 max_a |<g_a|Psi>|^2 at the
// caller's norm floor, batch = ceil(V / (3 epsilon^2 floor^2)), and
// ceil(8 ln(1/p_fail)) batch means are reduced by a median.  With
// probability at least 1 - p_fail the result is within (1 +- epsilon) of
// exact_norm provided <Psi|Psi> >= norm_floor.
//
// The row products <g_a|Psi> are cached, so a run costs k^2 overlaps plus
// O(1) per sample.  Budgets above 2^27 total samples are refused
// (ResourceLimit): they signal a floor far below the scale of the state.
// A single-term superposition is returned exactly with samples_used = 1.
NormEstimate fast_norm(const SparseSuperposition& sup, double epsilon,
                       double p_fail, std::uint64_t seed,
                       double norm_floor = 1e-6);

}  // namespace fgsim
