#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fgsim/channels.hpp"
#include "fgsim/decompose.hpp"
#include "fgsim/gaussian.hpp"
#include "fgsim/types.hpp"

namespace fgsim {

// Random sparsification: replaces a high-rank superposition (or a circuit of
// decomposed gates) by a k-term Monte Carlo surrogate whose expectation is
// the exact object.  All draws are keyed by (seed, sample index, step index),
// so parallel and sequential sampling produce identical output.

struct SparseSuperposition {
  int n = 0;
  int k = 0;
  // Every coefficient has magnitude l1/k; the drawn term's unit phase is
  // folded in.
  std::vector<StateTerm> terms;
};

// k i.i.d. draws from the decomposition, term j with probability
// |c_j| / ||c||_1, each contributing (||c||_1 / k) (c_j/|c_j|) |state_j>.
SparseSuperposition sparsify_state(const StateDecomposition& decomp, int k,
                                   std::uint64_t seed);

struct SparsifiedCircuitSet {
  int n = 0;
  // k sampled words; each concatenates one drawn term per gate with the
  // drawn coefficients' unit phases folded into the word's scalar phase.
  std::vector<GaussianCircuit> circuits;
  // (prod_t ||c_t||_1) / k, common to all samples.
  double scale = 0.0;
};

// Per sample and per gate, draws term j with probability |c_tj| / ||c_t||_1
// and appends its word.  Runtime O(k T).
SparsifiedCircuitSet sparsify_circuit(
    const std::vector<UnitaryDecomposition>& decomps, int k,
    std::uint64_t seed);

// One step of an adaptive circuit: either a decomposed unitary gate or a
// projective Kraus pair with feedforward.
struct AdaptiveCircuitStep {
  enum class Kind { Unitary, Adaptive };
  Kind kind = Kind::Unitary;
  UnitaryDecomposition unitary;   // meaningful when kind == Unitary
  AdaptiveBranch adaptive;        // meaningful when kind == Adaptive

  static AdaptiveCircuitStep make_unitary(UnitaryDecomposition u);
  static AdaptiveCircuitStep make_adaptive(AdaptiveBranch a);
};

struct GateChoice {
  int term = 0;
  // Unit phase c_j / |c_j| of the drawn coefficient.  The term circuit's own
  // scalar phase is applied when the word is materialized.
  Complex phase{1.0, 0.0};
};

// The k x T gate pattern for an adaptive circuit, sampled once and shared
// across every measurement trajectory, so storage is O(k T) regardless of
// how many trajectories are later evolved.
struct SparsifiedKrausPattern {
  int n = 0;
  int k = 0;
  // gate_choices[i][t]: sample i's draw for the t-th *unitary* step.
  std::vector<std::vector<GateChoice>> gate_choices;
  // (prod over unitary steps of ||c_t||_1) / k.
  double global_scale = 0.0;
  // Non-owning view of the step list the pattern indexes into.
  const std::vector<AdaptiveCircuitStep>* skeleton = nullptr;
};

// Draws the shared gate pattern.  Unitary steps are keyed by their ordinal
// among unitary steps, so a circuit with no adaptive steps reproduces
// sparsify_circuit's draws exactly.
SparsifiedKrausPattern sparsify_adaptive(
    const std::vector<AdaptiveCircuitStep>& steps, int k, std::uint64_t seed);

// Gaussian-rank interference statistic
//   C~ = ||c||_1 sum_j |c_j| |<psi|phi_j>|^2
// with |psi> the decomposition's own superposition; equals 1 for orthogonal
// equal-weight decompositions and governs the critical sparsification
// precision.
double c_tilde(const StateDecomposition& decomp);

// Same statistic from precomputed trajectory-summed overlaps
// s_w = sum_m <psi_m | phi_{m,w}> (the adaptive-circuit form).
double c_tilde_from_overlaps(const std::vector<double>& coeff_mags,
                             const std::vector<Complex>& summed_overlaps);

// Sparsification rank for target 1-norm precision delta.  Default is
// ceil(4 E / delta); when the interference statistic is supplied and delta
// does not exceed the critical precision 8 (C~ - 1) / ||c||_1^2, the finer
//   k = 4 ||c||_1^2 ((C~ - 1) / (delta ||c||_1^2) + 1 / delta) + 1
// applies.
std::int64_t choose_rank(double e_cost, double delta,
                         std::optional<double> c_tilde_value, double l1sq);

}  // namespace fgsim
