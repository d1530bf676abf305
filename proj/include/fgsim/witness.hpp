#pragma once

// Numeric certificates for fermionic magic monotones.
//
// A state-extent witness is a vector omega with |<omega|phi>| <= 1 for every
// pure Gaussian phi; |<omega|psi>|^2 then lower-bounds the extent of psi.  A
// dyadic-negativity witness is a Hermitian W whose Gaussian matrix elements
// are bounded by one in magnitude; tr[W rho] lower-bounds the dyadic
// negativity.  This module evaluates such certificates numerically: witness
// validity is checked against sampled random Gaussian states (evidence, not
// proof — the Gaussian set is continuous), while the certified values
// themselves are computed exactly on dense representations.

#include <cstdint>
#include <string>
#include <utility>

#include "fgsim/channels.hpp"
#include "fgsim/dense.hpp"
#include "fgsim/gaussian.hpp"
#include "fgsim/types.hpp"

namespace fgsim {

struct WitnessReport {
  std::string witness_id;
  // True iff every sampled Gaussian overlap satisfied |<omega|phi>| <= 1+1e-9.
  bool validity = false;
  double achieved_value = 0.0;  // |<omega|target>|^2
  double claimed_bound = 0.0;   // caller-declared reference value
  int samples = 0;
  double worst_overlap = 0.0;  // largest sampled |<omega|phi>|
};

// Checks the witness constraint on `gaussian_samples` random Gaussian states
// (random generator circuits of depth 10n applied to |0...0>) and evaluates
// the certified extent lower bound |<omega|target>|^2.  Requires n <= 10.
WitnessReport extent_witness_check(const DenseState& omega,
                                   const DenseState& target,
                                   int gaussian_samples, std::uint64_t seed,
                                   double claimed_bound = 0.0);

// tr[W rho] for a Hermitian witness W; the imaginary residue must vanish.
double dyadic_witness_value(const CMat& w, const CMat& rho);

struct SandwichBounds {
  double lower = 0.0;  // best certified value over the built-in witness set
  double upper = 0.0;  // decomposition cost of the channel
};

// Two-sided bounds on the convex-decomposition cost of a channel: the upper
// end is the decomposition's own weighted cost, the lower end the best
// dyadic-witness value on the channel output E(|g><g|).  The witness set
// contains every normalized dyad (Cauchy-Schwarz makes those valid), the
// single-qubit interference family (|0> + e^{i b} |1>)_q (x) |x> maximized
// over the phase b — valid because Gaussian states have definite parity —
// and, on four qubits, the two pair-interference vectors
// (|0000> + |1111> +- i(|0011> + |1100>))/sqrt(2), which are matchgate
// rotations of the doubled-pair state and inherit its Gaussian fidelity 1/2.
// Throws InvalidState if the certified lower end exceeds the upper end
// beyond tolerance, since that would disprove one of the two sides.
SandwichBounds sandwich_bounds(const ChannelDecomposition& channel,
                               const PhasedGaussianState& g);

struct TwirlReport {
  bool is_diagonal = false;
  double twirled_trace_defect = 0.0;
};

// Probes whether conjugation by U survives averaging over all Z-strings as a
// trace-preserving map.  The transfer matrix U (x) conj(U) is twirled over
// every Z-string on the doubled register (which zeroes all off-diagonal
// transfer entries); the defect is ||T'*(I) - I||_max, zero exactly when
// every diagonal entry of U has unit modulus, i.e. when U is diagonal.
// Requires a unitary on at most three qubits.
TwirlReport z_twirl_trace_check(const CMat& u);

}  // namespace fgsim
