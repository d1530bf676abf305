#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fgsim/types.hpp"

namespace fgsim {

struct PhasedGaussianState;  // see gaussian.hpp
struct GaussianCircuit;      // see gaussian.hpp

// Brute-force state-vector / superoperator reference backend.  Everything
// here is exponential in qubit count and exists to pin down conventions and
// to verify the fast backends; sizes are leashed accordingly.
//
// Basis ordering: the computational basis index is read big-endian with
// qubit 0 first, i.e. |q0 q1 ... q_{n-1}> has index sum_q q_j * 2^(n-1-j).
// So for n=2, |01> (qubit 0 in state 0, qubit 1 in state 1) is index 1.
struct DenseState {
  int n = 0;
  CVec amps;
};

using DenseOperator = CMat;

// A channel branch carries a weight and the Kraus operators of a CPTP (or
// sub-normalized) map; the channel is rho -> sum_branch w * sum_i K rho K^+.
// A unitary branch is simply {w, {U}}.
struct DenseChannelBranch {
  double weight = 1.0;
  std::vector<CMat> kraus;
};
using DenseChannel = std::vector<DenseChannelBranch>;

DenseState dense_basis_state(int n, std::uint64_t bits);
// Bits given as a string over {'0','1'}, qubit 0 first.
DenseState dense_basis_state(const std::string& bits);

Complex dense_inner(const DenseState& a, const DenseState& b);

// Gate matrices for the closed circuit vocabulary.  Angles in radians.
//   1-qubit: rz, rx, ry, h, x, y, z
//   2-qubit: rxx_nn, ryy_nn, rxy_nn, fswap, rzz, cphase, swap
//   custom_u4 takes 32 params: 16 row-major (re, im) pairs.
// Unknown ids raise InvalidArgument.
CMat gate_matrix(const std::string& id, const std::vector<double>& params);

// Number of qubits the gate acts on (1 or 2).
int gate_arity(const std::string& id);
// True if the gate is free for the fast backend (a matchgate with trivial
// one-term decomposition).
bool gate_is_gaussian(const std::string& id);

// Applies a 2^k x 2^k operator to the given k distinct target qubits.  The
// operator's own index ordering lists the first target as the most
// significant bit.
DenseState dense_apply(const DenseState& s, const CMat& op,
                       const std::vector<int>& targets);
DenseState dense_apply_gate(const DenseState& s, const std::string& id,
                            const std::vector<double>& params,
                            const std::vector<int>& targets);

// Lifts a k-qubit operator to the full 2^n x 2^n matrix.
CMat dense_lift(int n, const CMat& op, const std::vector<int>& targets);

// Dense matrix of the Majorana operator with index j (0 <= j < 2n):
// even j = 2q is the X-type string Z_0..Z_{q-1} X_q, odd j = 2q+1 the Y-type.
CMat majorana_dense(int n, int j);

// Converts a phase-tracked Gaussian state to its dense vector by evaluating
// every configuration amplitude.  Annihilated states give the zero vector.
// Sizes above max_n raise ResourceLimit.
DenseState dense_state_from_gaussian(const PhasedGaussianState& s,
                                     int max_n = 14);

// Applies a Gaussian circuit generator by generator (named gates, two-mode
// rotations exp((theta/2) c_j c_k), single Majorana reflections) and then
// the circuit's scalar phase.  Reference implementation of
// evolve_circuit_state.
DenseState dense_apply_circuit(const DenseState& s, const GaussianCircuit& c);

// Full 2^n x 2^n matrix of a Gaussian circuit, phase included.  Leashed at
// 10 qubits (each generator costs a dense matrix product).
CMat dense_circuit_unitary(const GaussianCircuit& c);

// Transfer matrix of a channel on nq qubits (nq <= 3): the 4^nq x 4^nq matrix
// T with vec_row(E(rho)) = T vec_row(rho), i.e. T = sum_j w_j sum_i K x
// conj(K) in the row-major vec convention.
CMat channel_transfer_matrix(int nq, const DenseChannel& channel);

// Transfer matrix of the unitary channel rho -> U rho U^+.
CMat unitary_transfer_matrix(const CMat& u);

// Choi state of a two-qubit channel in the paired-halves convention: prepare
// |g> = |phi+>_{01} x |phi+>_{23} and apply the channel to the middle qubits
// (1, 2).  Returns the 16x16 density matrix (trace 1 for CPTP input).
CMat channel_choi_state(const DenseChannel& channel);

// Reorders the paired-halves Choi state to the textbook convention
// (E x Id)(|Phi><Phi|) with system qubits first: qubit permutation
// [1,2,0,3] -> [s0,s1,a0,a1].
CMat choi_reorder_to_textbook(const CMat& sandwich_choi);

// Schatten-1 distance: sum of singular values of (rho - sigma).  Orthogonal
// pure states give 2.  Non-Hermitian inputs raise InvalidArgument.
double trace_distance(const CMat& rho, const CMat& sigma);

// Dual map applied to the identity, computed from a row-major transfer
// matrix: unvec(T^+ vec(I)).  Equals I exactly when the channel is
// trace-preserving.
CMat transfer_dual_identity(const CMat& transfer);

// Permutes qubits of a 2^n-dimensional state/operator: qubit q of the result
// is qubit perm[q] of the input.
CVec permute_qubits_vec(const CVec& v, const std::vector<int>& perm);
CMat permute_qubits_mat(const CMat& m, const std::vector<int>& perm);

// Kronecker product helper (a x b).
CMat kron(const CMat& a, const CMat& b);

}  // namespace fgsim
