#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fgsim/types.hpp"

namespace fgsim {

// Majorana mode index, 0 <= j < 2n; qubit q owns modes 2q (X-type) and
// 2q+1 (Y-type) under the usual parity-string encoding, so the single-mode
// operators are c_{2q} = Z_0..Z_{q-1} X_q and c_{2q+1} = Z_0..Z_{q-1} Y_q.
using MajoranaIndex = int;

// Real antisymmetric 2n x 2n second-moment matrix with the sign convention
// Gamma_{jk} = i <c_k c_j> for j != k and zero diagonal.  With the encoding
// above this makes <Z_q> = Gamma_{2q,2q+1}, so a qubit measurement sees
// outcome m with probability (1 + (-1)^m Gamma_{2q,2q+1}) / 2.  Pure states
// satisfy Gamma Gamma^T = I.
using CovarianceMatrix = Mat;

// A Gaussian state with its global phase and scale tracked through one
// reference amplitude: `pivot` is a computational configuration (bit q of
// the mask = value of qubit q) and `pivot_amp` = <pivot|v> for the tracked,
// generally sub-normalized, vector v.  The representation keeps the pivot
// "healthy" (its probability under gamma stays above an n-dependent floor)
// by re-anchoring when evolution or projection makes it decay.
//
// pivot_amp == 0 is the annihilated sentinel: the tracked vector is exactly
// zero (e.g. after projecting onto a zero-probability outcome).  Evolving or
// projecting an annihilated state keeps it annihilated; overlaps with it are
// zero; measuring it is an error.
struct PhasedGaussianState {
  int n = 0;
  CovarianceMatrix gamma;
  std::uint64_t pivot = 0;
  Complex pivot_amp = Complex(0.0, 0.0);
  // Maintained squared norm of the tracked vector (|pivot_amp|^2 / p(pivot)
  // kept incrementally): unitaries preserve it, projections scale it by the
  // outcome probability.  Used for O(1) pivot-health checks; norm_squared()
  // recomputes it from scratch.
  double norm_sq = 0.0;

  bool annihilated() const { return pivot_amp == Complex(0.0, 0.0); }
};

// One free-fermion evolution primitive:
//  - TwoMajoranaRotation: exp((theta/2) c_j c_k), j != k;
//  - SingleMajorana: the Hermitian reflection c_j itself (parity-odd);
//  - NamedMatchgate: a member of the named matchgate vocabulary {rz, x, y,
//    z, rxx_nn, ryy_nn, rxy_nn, fswap} acting on `targets`, expanded
//    internally into the two primitive kinds plus a scalar phase.
struct GaussianGenerator {
  enum class Kind { TwoMajoranaRotation, SingleMajorana, NamedMatchgate };

  Kind kind = Kind::TwoMajoranaRotation;
  MajoranaIndex j = 0;
  MajoranaIndex k = 0;
  double theta = 0.0;
  std::string id;
  std::vector<int> targets;
  std::vector<double> params;

  static GaussianGenerator rotation(MajoranaIndex j, MajoranaIndex k,
                                    double theta);
  static GaussianGenerator majorana(MajoranaIndex j);
  static GaussianGenerator named(std::string id, std::vector<int> targets,
                                 std::vector<double> params = {});
};

// A sequence of generators applied left to right (gates[0] acts first),
// times an overall scalar.  Scalars arise when non-matchgate unitaries are
// decomposed into weighted Gaussian words, so they are first-class here.
struct GaussianCircuit {
  int n = 0;
  Complex phase = Complex(1.0, 0.0);
  std::vector<GaussianGenerator> gates;
};

// --- construction ---

PhasedGaussianState prepare_basis_state(int n, std::uint64_t bits);
// Bits as a string over {'0','1'}, qubit 0 first; empty raises
// InvalidArgument.
PhasedGaussianState prepare_basis_state(const std::string& bits);

// --- evolution ---

// Applies one generator; O(n) covariance work for a rotation plus O(n^3)
// when the anchor needs attention.  Named matchgates expand to their
// primitive sequence and scalar phase.
PhasedGaussianState evolve(const PhasedGaussianState& s,
                           const GaussianGenerator& g);

// Applies circuit.gates in order, then multiplies by circuit.phase.
PhasedGaussianState evolve_circuit_state(const PhasedGaussianState& s,
                                         const GaussianCircuit& c);

// Expansion of a named matchgate into primitives (application order) and its
// scalar phase.  Unknown ids raise InvalidArgument.
GaussianCircuit expand_named_matchgate(int n, const std::string& id,
                                       const std::vector<int>& targets,
                                       const std::vector<double>& params);

// --- measurement ---

// Probability of outcome m for qubit q: (1 + (-1)^m Gamma_{2q,2q+1}) / 2,
// clamped to [0, 1].  Relative to the tracked vector's own norm.
double measure_probability(const PhasedGaussianState& s, int qubit,
                           int outcome);

// Applies the outcome projector |m><m|_q without renormalizing: the result's
// tracked vector is P|v>.  Zero-probability outcomes annihilate (no error).
// O(n^2) when the pivot already agrees with the outcome, O(n^3) otherwise.
PhasedGaussianState project(const PhasedGaussianState& s, int qubit,
                            int outcome);

// --- scalar queries ---

// <u|v> of the tracked vectors in O(n^3); exact 0 on parity mismatch.
Complex overlap(const PhasedGaussianState& u, const PhasedGaussianState& v);

// Amplitude <config|v> of one configuration (bit q of mask = qubit q).
Complex amplitude_at(const PhasedGaussianState& s, std::uint64_t config);

// All 2^n configuration amplitudes, indexed by configuration mask, sharing
// one anchor context; exponential, leashed by max_n (ResourceLimit above).
CVec all_config_amplitudes(const PhasedGaussianState& s, int max_n = 14);

// Squared norm of the tracked vector: |pivot_amp|^2 / p(pivot).
double norm_squared(const PhasedGaussianState& s);

// Canonical global amplitude: the tracked vector's amplitude at the
// deterministic greedy anchor divided by the square root of that anchor's
// probability.  Two states describe the same vector iff their covariances,
// parities and canonical amplitudes agree.
Complex canonical_amplitude(const PhasedGaussianState& s);

// Deterministic greedy configuration: sweeps qubits in order, picking the
// likelier outcome each time; the result has probability >= 2^-n.
std::uint64_t greedy_configuration(const CovarianceMatrix& gamma);

// Rotation-only generator sequence whose composite mode rotation maps the
// given covariance to a direct sum of 2x2 blocks, i.e. evolving a state with
// this covariance by the chain turns it into a (phase times a) basis state.
// Used as a conditioning rescue when two states share no likely
// configuration; applying the same chain to both leaves overlaps unchanged.
std::vector<GaussianGenerator> covariance_alignment_chain(
    const CovarianceMatrix& gamma);

// Probability of a full configuration under gamma (chained conditionals).
double configuration_probability(const CovarianceMatrix& gamma,
                                 std::uint64_t config);

// --- compiled form ---

// The 2n x 2n orthogonal matrix R with U^+ c_j U = sum_k R_{jk} c_k for the
// circuit's unitary part (scalar phase not represented; det R = -1 for
// parity-odd circuits).  Pure function of the circuit; named gates are
// expanded first.
Mat compile_gaussian_circuit(const GaussianCircuit& c);

// R for a single generator (identity-sized helper for tests/compilation).
Mat generator_rotation_matrix(int n, const GaussianGenerator& g);

// --- low-level utilities shared by the fast modules ---

// Parity (popcount mod 2) of a configuration mask.
int config_parity(std::uint64_t config);

// Dense-backend index of a configuration mask (qubit 0 = most significant).
std::uint64_t dense_index_of_config(int n, std::uint64_t config);

}  // namespace fgsim
