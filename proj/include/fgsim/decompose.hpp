#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fgsim/dense.hpp"
#include "fgsim/gaussian.hpp"
#include "fgsim/types.hpp"

namespace fgsim {

// One weighted free word of a linear gate decomposition U = sum_j c_j K_j,
// where every K_j is a Gaussian circuit (matchgate word times a phase).
struct DecompositionTerm {
  Complex coeff;
  GaussianCircuit circuit;
};

// Linear decomposition of a (generally non-matchgate) unitary into free
// words.  l1_norm caches sum |coeff|; extent_claim, when present, is the
// squared L1 norm and equals the gate's extent exactly when `optimal` is
// true, otherwise it is only an upper bound achieved by this decomposition.
struct UnitaryDecomposition {
  int n = 0;
  std::vector<DecompositionTerm> terms;
  double l1_norm = 0.0;
  std::optional<double> extent_claim;
  bool optimal = false;
};

// Canonical-form angles of a parity-preserving two-qubit unitary,
//   U = e^{i phase} (RZ(t1) x RZ(t2)) RXX(a) RYY(b) RZZ(c)
//       (RZ(t3) x RZ(t4)),
// with RP(x) = exp(-i x P / 2).  All angles are radians in (-2pi, 2pi];
// c is normalized into (-pi/2, pi/2] by shifting the odd-parity block's
// phase by pi when needed, and blocks with no X-component put their whole
// Z-angle into the leading RZ factor (the trailing angle is zero), which
// minimizes sum |t_i| among the degenerate Euler families.
struct TwoQubitFermionicParams {
  double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0;
  double a = 0.0, b = 0.0, c = 0.0;
  double phase = 0.0;
};

// One weighted normalized Gaussian state of a state decomposition
// |psi> = sum_j coeff_j |state_j>.
struct StateTerm {
  Complex coeff;
  PhasedGaussianState state;
};

// Linear decomposition of a pure state into normalized Gaussian states.
struct StateDecomposition {
  int n = 0;
  std::vector<StateTerm> terms;
  double l1_norm = 0.0;
  double extent = 1.0;
};

// One slot of a product-state preparation pattern: a fixed computational
// bit, or the equal-weight superposition (|0> + e^{i delta}|1>)/sqrt(2).
struct SlotInit {
  enum class Kind { Zero, One, Plus };
  Kind kind = Kind::Zero;
  double delta = 0.0;  // phase of the |1> component; Plus slots only

  static SlotInit zero() { return SlotInit{Kind::Zero, 0.0}; }
  static SlotInit one() { return SlotInit{Kind::One, 0.0}; }
  static SlotInit plus(double delta = 0.0) {
    return SlotInit{Kind::Plus, delta};
  }
};

// Result of pushing an operator through the teleportation gadget
//   A (I x |v> x I),  A = 4 (<psi+| x I x <psi+|),
// where |v> = (I x V x I)|psi+>^{x2} is the operator's resource state on
// four qubits (V acting on the middle pair).  The gadget is an exact
// identity: reading the amplitudes of |v> back as a matrix recovers V.
struct LiftReport {
  CMat target;            // the 4x4 operator V
  CVec gadget_state;      // |v>, sixteen amplitudes
  CMat recovered;         // 2 * reshaped gadget amplitudes
  double recovery_error;  // max |recovered - target|
  // Present when a decomposition of V was supplied: the same coefficients
  // re-emitted after verifying that each term's gadget state lifts back to
  // that term's operator.
  std::optional<UnitaryDecomposition> lifted;
  double term_lift_error = 0.0;  // max over terms of the per-term defect
};

// Catalog of closed-form optimal decompositions.  gate_id is one of
// {rzz, cphase, swap_nn, hadamard, ry, rx}; theta is required for the
// rotation-angle gates and must be absent for swap_nn and hadamard.
// Diagonal gates (rzz, cphase) are optimal on any ascending qubit pair;
// swap_nn is optimal only on an adjacent pair and otherwise falls back to
// the feasible eight-term product decomposition with optimal = false.
UnitaryDecomposition optimal_unitary_decomposition(
    const std::string& gate_id, std::optional<double> theta,
    const std::vector<int>& qubits, int n);

// Canonical-form angles for a 4x4 unitary commuting with Z x Z.  Inputs
// failing the unitarity check (1e-10) or the parity check (parity_tol on
// the commutator with Z x Z) raise InvalidArgument.
TwoQubitFermionicParams kak_fermionic(const CMat& u, double parity_tol = 1e-10);

// Dense 4x4 product of the canonical form; inverse of kak_fermionic up to
// roundoff.
CMat kak_reconstruct(const TwoQubitFermionicParams& p);

// Decomposition of an arbitrary parity-preserving two-qubit unitary acting
// on ascending `targets` within an n-qubit register.  Diagonal gates and
// adjacent targets give the two-term form with extent 1 + |sin c| and
// optimal = true; non-adjacent non-diagonal gates give the feasible
// product form with extent (1+|sin a|)(1+|sin b|)(1+|sin c|) and
// optimal = false.
UnitaryDecomposition decompose_two_qubit_fermionic(
    const CMat& u, int n, const std::vector<int>& targets,
    double parity_tol = 1e-10);

// Two orthogonal Gaussian terms for the four-qubit resource state
//   |m_theta> = (|0000> + |0011> + |1100> + e^{i theta}|1111>)/2,
// built by evolving |psi+>^{x2}; extent 1 + |sin(theta/2)|.  theta = 0
// degenerates to a single Gaussian term.
StateDecomposition magic_state_decomposition(double theta);

// Decomposition of a product state over the given pattern.  With no Plus
// slot the state is a basis state (one term, extent 1); otherwise exactly
// two terms of coefficient 1/sqrt(2) -- the even- and odd-occupation halves
// of the superposition slots -- independent of how many Plus slots appear,
// giving extent 2.
StateDecomposition plus_state_decomposition(
    const std::vector<SlotInit>& pattern);

// Gadget identity check for a parity-preserving 4x4 operator (dense path).
LiftReport lift_gadget(const CMat& v);

// Gadget identity check for a two-qubit decomposition (n must be 2): also
// verifies termwise that lifting each term's gadget state recovers the
// term's operator, and re-emits the decomposition unchanged as `lifted`.
LiftReport lift_gadget(const UnitaryDecomposition& v_decomp);

// Dense sum of coeff * dense(circuit) over all terms; the matrix the
// decomposition claims to equal.
CMat decomposition_dense_sum(const UnitaryDecomposition& d);

}  // namespace fgsim
