#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fgsim/channels.hpp"
#include "fgsim/decompose.hpp"
#include "fgsim/gaussian.hpp"
#include "fgsim/sparsify.hpp"
#include "fgsim/types.hpp"

namespace fgsim {

// One element of a circuit program.  Programs are ordered lists of free
// Gaussian gates, decomposable non-Gaussian gates, noisy channels (convex
// mixtures of decomposable unitaries), adaptive channels (with
// measurement-and-feedforward branches), and at most one terminal
// measurement, which must come last.
struct ProgramElement {
  enum class Kind { Gaussian, NonGaussian, Noisy, Adaptive, Measure };
  Kind kind = Kind::Gaussian;

  GaussianGenerator gate;       // Gaussian
  std::string id;               // NonGaussian: catalog gate id
  std::optional<double> theta;  // NonGaussian: angle, when the gate takes one
  std::vector<double> params;   // NonGaussian: custom_u4 matrix entries
  std::vector<int> targets;     // NonGaussian
  ChannelDescriptor channel;    // Noisy / Adaptive
  std::vector<int> measured;    // Measure

  static ProgramElement gaussian(GaussianGenerator g);
  static ProgramElement non_gaussian(std::string id, std::optional<double> theta,
                                     std::vector<int> targets);
  // Parity-preserving two-qubit gate given as 16 row-major (re, im) pairs.
  static ProgramElement custom_u4(std::vector<double> params,
                                  std::vector<int> targets);
  static ProgramElement noisy(ChannelDescriptor d);
  static ProgramElement adaptive_channel(ChannelDescriptor d);
  static ProgramElement measure(std::vector<int> qubits);
};

struct CircuitProgram {
  int n = 0;
  std::vector<ProgramElement> elements;
};

// One emitted sample with its bookkeeping.  Bit i of `bitstring` is the
// outcome of measured_qubits[i].
struct SampleReport {
  std::uint64_t bitstring = 0;
  std::vector<int> measured_qubits;
  // Conditional probability of each emitted bit, in measurement order.
  std::vector<double> bit_probabilities;
  // Outcome probability of each adaptive Kraus step taken, in program order.
  std::vector<double> adaptive_probabilities;
  std::int64_t k_used = 0;  // sparsification sample count; 0 on the exact path
  double cost = 1.0;        // product of drawn-branch squared 1-norms
  std::uint64_t seed = 0;
  double elapsed_seconds = 0.0;
};

struct SamplerOptions {
  // Hard cap on the number of simultaneously tracked Gaussian terms;
  // exceeding it raises ResourceLimit before the terms are materialized.
  std::int64_t term_budget = std::int64_t(1) << 16;
  // Adaptive Kraus-outcome probabilities use the exact quadratic norm up to
  // this rank and the Monte Carlo estimator beyond it.
  std::int64_t exact_norm_rank_limit = 4096;
};

// Free-word decomposition of one non-Gaussian gate element: catalog gates go
// through their closed-form optimal decompositions, custom matrices through
// the canonical two-qubit split.
UnitaryDecomposition decompose_gate_element(const ProgramElement& el, int n);

// Full outer-product evolution: applies each decomposition in order to every
// branch, multiplying coefficients, so the output rank is the product of the
// per-gate term counts.  Refuses ranks above term_budget before allocating.
SparseSuperposition evolve_circuit(
    const std::vector<UnitaryDecomposition>& decomps,
    const PhasedGaussianState& initial,
    std::int64_t term_budget = std::int64_t(1) << 16);

// Exact sampler: draws one unitary trajectory from the channel oracle,
// evolves it exactly (rank = product of term counts), and samples each
// measured bit from exact norm ratios, projecting and renormalizing as it
// goes.  The program must not contain adaptive channels.  w is the number of
// measured qubits: it must equal the terminal measurement's width when one
// is present, and defaults to qubits 0..w-1 otherwise.
SampleReport sample_exact(const CircuitProgram& circuit, int w,
                          std::uint64_t seed, const SamplerOptions& opts = {});

// Approximate sampler: draws a trajectory, accumulates its extent product E,
// sparsifies the gate sequence with k = ceil(4 E / delta) shared samples
// (duplicate gate words are merged before evolution), and samples each bit
// from Monte Carlo norm estimates with the complement rule -- when the
// estimated probability exceeds 1/2, the opposite projection is estimated
// instead so the multiplicative error rides on the smaller mass.
SampleReport sample_approx(const CircuitProgram& circuit, int w, double delta,
                           double epsilon, double p_fail, std::uint64_t seed,
                           const SamplerOptions& opts = {});

// Single-budget form of sample_approx: splits delta_prime into
// delta = delta_prime / 3 and epsilon = 2 delta_prime / 3.
SampleReport sample_approx_budget(const CircuitProgram& circuit, int w,
                                  double delta_prime, double p_fail,
                                  std::uint64_t seed,
                                  const SamplerOptions& opts = {});

// Adaptive-channel sampler: like sample_approx, but drawn adaptive branches
// interleave Kraus steps with the unitary evolution.  At each Kraus step the
// outcome norms are computed (exactly below the rank limit), an outcome is
// drawn, and the superposition is projected, fed forward and renormalized.
SampleReport sample_adaptive(const CircuitProgram& circuit, int w,
                             double delta, double epsilon, double p_fail,
                             std::uint64_t seed,
                             const SamplerOptions& opts = {});

}  // namespace fgsim
