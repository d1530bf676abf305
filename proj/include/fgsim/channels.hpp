#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fgsim/decompose.hpp"
#include "fgsim/gaussian.hpp"
#include "fgsim/types.hpp"

namespace fgsim {

// Decompositions of noisy channels into free Gaussian pieces: convex
// mixtures of weighted Gaussian words, plus measure-and-feedforward branches
// where adaptivity buys a lower cost.

// One Kraus arm of an adaptive branch: project a qubit onto a computational
// outcome, then run a Gaussian circuit on the post-measurement state.
struct ProjectorSpec {
  int qubit = 0;
  int outcome = 0;
};

struct AdaptiveKraus {
  ProjectorSpec projector;
  GaussianCircuit then_circuit;
};

// Measurement-and-feedforward branch.  Projecting and conditioning are free
// Gaussian operations, so the branch contributes cost factor 1: only its
// weight enters the augmented cost accounting.
struct AdaptiveBranch {
  double weight = 0.0;
  std::vector<AdaptiveKraus> kraus;
};

struct UnitaryBranch {
  double probability = 0.0;
  UnitaryDecomposition decomposition;
};

enum class ChannelFlag { ExtentOptimal, AugmentedFeasible, Feasible };

struct ChannelBranch {
  enum class Kind { Unitary, Adaptive };
  Kind kind = Kind::Unitary;
  UnitaryBranch unitary;    // meaningful when kind == Unitary
  AdaptiveBranch adaptive;  // meaningful when kind == Adaptive

  double weight() const {
    return kind == Kind::Unitary ? unitary.probability : adaptive.weight;
  }
  static ChannelBranch make_unitary(double probability,
                                    UnitaryDecomposition d);
  static ChannelBranch make_adaptive(AdaptiveBranch b);
};

struct ChannelDecomposition {
  int n = 0;
  std::vector<ChannelBranch> branches;
  // Weighted cost: sum over unitary branches of prob * l1^2 plus the total
  // adaptive weight.
  double cost = 0.0;
  // All unitary branches share the same l1 norm, making per-run (not just
  // expected) sampling cost deterministic.
  bool equimagical = false;
  ChannelFlag optimal_flag = ChannelFlag::Feasible;
};

// Pauli rotation followed by dephasing along the same axis,
//   (1-p) R(theta) rho R(theta)^+  +  p P R(theta) rho R(theta)^+ P,
// rewritten as the equal-extent mixture s R(phi) + (1-s) R(pi-phi) with
// phi = arcsin[(1-2p) sin theta] and s = (1 + (1-2p) cos theta / cos phi)/2.
// Cost 1 + (1-2p)|sin theta|; provably cheapest convex-unitary form for
// axis y and nearest-neighbour zz.  Axis is one of "x", "y", "zz".
// Empty targets default to the leading qubit(s); n == 0 defaults to the
// gate arity.  Requires p in [0, 1/2].
ChannelDecomposition equimagical_noisy_rotation(const std::string& axis,
                                                double theta, double p,
                                                std::vector<int> targets = {},
                                                int n = 0);

enum class NoisyQubit { First, Second };

// ZZ rotation with single-qubit Z noise, split as
//   (1-2p) R_ZZ(theta) + 2p (measure the noisy qubit, rotate the other by
//   +-theta conditioned on the outcome),
// for augmented cost 1 + (1-2p)|sin theta|, beating every convex-unitary
// form of this channel.
ChannelDecomposition adaptive_nzz_single_z(double theta, double p,
                                           NoisyQubit noisy_qubit,
                                           std::vector<int> targets = {},
                                           int n = 0);

// Same channel without adaptivity: the plain mixture
// (1-p) R_ZZ(theta) + p Z_i R_ZZ(theta), cost 1 + |sin theta|.
ChannelDecomposition naive_single_z_rzz(double theta, double p,
                                        NoisyQubit noisy_qubit,
                                        std::vector<int> targets = {},
                                        int n = 0);

// ZZ rotation under the symmetric dephasing mixture
//   (1-p) I + (p/3)(Z_1 + Z_2 + Z_1 Z_2),
// decomposed as the 1/3-mixture of the three single-component channels.
// Without adaptive branches the cost is 1 + (1 - 2p/3)|sin theta|; allowing
// measure-and-feedforward on the single-qubit components improves it to
// 1 + (1-2p)|sin theta|.
ChannelDecomposition general_dephasing_decomposition(
    double theta, double p, bool allow_adaptive,
    std::vector<int> targets = {}, int n = 0);

// Reverses a Gaussian word: adjoint of each generator in reverse order,
// conjugated scalar phase.
GaussianCircuit adjoint_gaussian_circuit(const GaussianCircuit& c);

// One dyad of a quasiprobability expansion: rho -> q * left rho right,
// with `right` applied as written (it is already an adjoint word).
struct FnlTerm {
  double q = 0.0;
  GaussianCircuit left;
  GaussianCircuit right;
};

struct FnlDecomposition {
  int n = 0;
  std::vector<FnlTerm> terms;
  double l1 = 0.0;
};

// Expands the unitary channel of a decomposed gate U = sum_j c_j G_j into
// real-weighted Gaussian dyads q_jk (G_j rho G_k^+) with the coefficient
// phases folded into the words, so l1 = (sum_j |c_j|)^2.
FnlDecomposition fnl_decomposition(const UnitaryDecomposition& u_decomp);

// --- decomposition oracle ---

// Closed channel vocabulary:
//   kind "unitary":   gate_id + optional theta (free matchgates cost 1).
//   kind "noisy_rot": axis in {x, y, zz}, theta, p.
//   kind "noisy_rzz": noise in {zz, z1, z2, general}, theta, p, adaptive.
// Empty targets default to the leading qubits.
struct ChannelDescriptor {
  std::string kind;
  std::string gate_id;
  std::string axis;
  std::string noise;
  std::optional<double> theta;
  double p = 0.0;
  bool adaptive = false;
  std::vector<int> targets;
};

// Resolves a descriptor against the vocabulary above; unknown kinds or
// out-of-range parameters raise InvalidArgument.
ChannelDecomposition resolve_channel(const ChannelDescriptor& d, int n);

// Registry of per-step channel decompositions with deterministic branch
// sampling: a draw depends only on (seed, step key, draw index), so
// concurrent trajectories reproduce bit-identically under any scheduling.
class DecompositionOracle {
 public:
  DecompositionOracle(int n, std::uint64_t seed);

  // Registers a channel and returns its step key.
  int register_channel(const ChannelDescriptor& d);

  int size() const { return static_cast<int>(table_.size()); }
  const ChannelDecomposition& channel(int key) const;

  // Weighted cost sum_j p_j (sum_k |c_jk|)^2 of the stored decomposition.
  double cost(int key) const;

  // Product of the costs of all registered channels.
  double total_cost() const;

  // Branch drawn with its declared probability, deterministic per
  // (seed, key, draw_index).
  const ChannelBranch& sample(int key, std::uint64_t draw_index) const;

 private:
  int n_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<ChannelDecomposition> table_;
};

}  // namespace fgsim
