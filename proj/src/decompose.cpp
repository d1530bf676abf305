#include "fgsim/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>

namespace fgsim {

namespace {

const Complex kI(0.0, 1.0);
// Terms whose coefficient magnitude falls below this are exact zeros up to
// roundoff of the closed-form trigonometry and are dropped.
constexpr double kDropCoeff = 1e-14;

using GG = GaussianGenerator;

GG rz_gate(int q, double t) { return GG::named("rz", {q}, {t}); }
GG pauli_gate(const char* id, int q) { return GG::named(id, {q}); }

void append(std::vector<GG>& dst, const std::vector<GG>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

void finalize(UnitaryDecomposition& d) {
  std::vector<DecompositionTerm> kept;
  kept.reserve(d.terms.size());
  double l1 = 0.0;
  for (auto& t : d.terms) {
    const double a = std::abs(t.coeff);
    if (a <= kDropCoeff) continue;
    l1 += a;
    kept.push_back(std::move(t));
  }
  d.terms = std::move(kept);
  d.l1_norm = l1;
}

// ZXZ Euler split of a special-unitary 2x2 block:
//   w = RZ(alpha) RX(beta) RZ(gamma),
// so w00 = cos(beta/2) e^{-i(alpha+gamma)/2} and
//    w01 = -i sin(beta/2) e^{-i(alpha-gamma)/2}.
// Blocks with a (numerically) absent X component put the whole Z angle into
// alpha, which keeps the derived t3/t4 at zero for diagonal gates.
struct BlockAngles {
  double phi = 0.0;
  double alpha = 0.0, beta = 0.0, gamma = 0.0;
};

BlockAngles euler_zxz(const Eigen::Matrix2cd& w, double phi) {
  BlockAngles e;
  e.phi = phi;
  const Complex w00 = w(0, 0), w01 = w(0, 1);
  const double aw = std::abs(w00), az = std::abs(w01);
  e.beta = 2.0 * std::atan2(az, aw);
  if (az < 1e-12) {
    e.alpha = -2.0 * std::arg(w00);
    e.gamma = 0.0;
  } else if (aw < 1e-12) {
    e.alpha = -kPi - 2.0 * std::arg(w01);
    e.gamma = 0.0;
  } else {
    const double sum = -2.0 * std::arg(w00);        // alpha + gamma
    const double diff = -kPi - 2.0 * std::arg(w01);  // alpha - gamma
    e.alpha = (sum + diff) / 2.0;
    e.gamma = (sum - diff) / 2.0;
  }
  return e;
}

// Largest magnitude among entries that connect the even and odd parity
// sectors; zero exactly when the operator commutes with Z x Z.
double parity_mixing(const CMat& u) {
  static const double zz[4] = {1.0, -1.0, -1.0, 1.0};
  double mix = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (zz[i] != zz[j]) mix = std::max(mix, std::abs(u(i, j)));
    }
  }
  return mix;
}

void check_two_qubit_operator(const CMat& u, const char* who,
                              double parity_tol) {
  if (u.rows() != 4 || u.cols() != 4) {
    throw InvalidArgument(std::string(who) + ": expected a 4x4 operator");
  }
  const double unit_err =
      (u.adjoint() * u - CMat::Identity(4, 4)).cwiseAbs().maxCoeff();
  if (unit_err > 1e-10) {
    throw InvalidArgument(std::string(who) + ": operator is not unitary");
  }
  if (2.0 * parity_mixing(u) > parity_tol) {
    throw InvalidArgument(std::string(who) +
                          ": operator does not preserve parity");
  }
}

// |psi+> x |psi+> on four qubits (pairs (0,1) and (2,3)), big-endian.
CVec gadget_input_state() {
  CVec g = CVec::Zero(16);
  g[0] = g[3] = g[12] = g[15] = Complex(0.5, 0.0);
  return g;
}

// Reads a two-qubit operator off its gadget resource state: contracting the
// outer Bell pairs against an input |ab> selects amplitude index a,c,d,b
// with weight 1/2, so V[(c,d),(a,b)] = 2 v[acdb].
CMat lift_from_amplitudes(const CVec& v) {
  CMat m(4, 4);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      for (int c = 0; c < 2; ++c) {
        for (int d = 0; d < 2; ++d) {
          m(c * 2 + d, a * 2 + b) = 2.0 * v[a * 8 + c * 4 + d * 2 + b];
        }
      }
    }
  }
  return m;
}

}  // namespace

TwoQubitFermionicParams kak_fermionic(const CMat& u, double parity_tol) {
  check_two_qubit_operator(u, "kak_fermionic", parity_tol);

  Eigen::Matrix2cd ue, uo;
  ue << u(0, 0), u(0, 3), u(3, 0), u(3, 3);
  uo << u(1, 1), u(1, 2), u(2, 1), u(2, 2);

  auto strip_phase = [](Eigen::Matrix2cd& m) {
    const Complex det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const double phi = std::arg(det) / 2.0;
    m *= std::exp(Complex(0.0, -phi)) / std::sqrt(std::abs(det));
    return phi;
  };
  double phi_e = strip_phase(ue);
  double phi_o = strip_phase(uo);

  // Normalize c = phi_o - phi_e into (-pi/2, pi/2] by shifting the odd
  // block's phase by pi and negating its special-unitary part.
  double c = phi_o - phi_e;
  if (c > kPi / 2.0) {
    phi_o -= kPi;
    uo = -uo;
    c -= kPi;
  } else if (c <= -kPi / 2.0) {
    phi_o += kPi;
    uo = -uo;
    c += kPi;
  }

  const BlockAngles e = euler_zxz(ue, phi_e);
  const BlockAngles o = euler_zxz(uo, phi_o);

  TwoQubitFermionicParams p;
  p.a = (o.beta + e.beta) / 2.0;
  p.b = (o.beta - e.beta) / 2.0;
  p.c = c;
  p.t1 = (e.alpha + o.alpha) / 2.0;
  p.t2 = (e.alpha - o.alpha) / 2.0;
  p.t3 = (e.gamma + o.gamma) / 2.0;
  p.t4 = (e.gamma - o.gamma) / 2.0;
  p.phase = (e.phi + o.phi) / 2.0;

  // Fold angles into (-2pi, 2pi]; each 2pi shift of one factor flips the
  // product's sign, compensated through the global phase.
  for (double* x : {&p.t1, &p.t2, &p.t3, &p.t4, &p.a, &p.b, &p.c}) {
    while (*x > 2.0 * kPi) {
      *x -= 2.0 * kPi;
      p.phase += kPi;
    }
    while (*x <= -2.0 * kPi) {
      *x += 2.0 * kPi;
      p.phase += kPi;
    }
  }
  while (p.phase > kPi) p.phase -= 2.0 * kPi;
  while (p.phase <= -kPi) p.phase += 2.0 * kPi;
  return p;
}

CMat kak_reconstruct(const TwoQubitFermionicParams& p) {
  const CMat i4 = CMat::Identity(4, 4);
  auto pair_rot = [&](char axis, double t) {
    const CMat pp = gate_matrix(std::string(1, axis), {});
    return CMat(std::cos(t / 2.0) * i4 -
                kI * std::sin(t / 2.0) * kron(pp, pp));
  };
  auto rz = [](double t) { return gate_matrix("rz", {t}); };
  CMat u = kron(rz(p.t1), rz(p.t2)) * pair_rot('x', p.a) *
           pair_rot('y', p.b) * pair_rot('z', p.c) *
           kron(rz(p.t3), rz(p.t4));
  return CMat(std::exp(Complex(0.0, p.phase)) * u);
}

UnitaryDecomposition decompose_two_qubit_fermionic(
    const CMat& u, int n, const std::vector<int>& targets,
    double parity_tol) {
  if (targets.size() != 2) {
    throw InvalidArgument(
        "decompose_two_qubit_fermionic: expected two targets");
  }
  const int j = targets[0], k = targets[1];
  if (j < 0 || k >= n || j >= k) {
    throw InvalidArgument(
        "decompose_two_qubit_fermionic: targets must be ascending and in "
        "range");
  }
  const TwoQubitFermionicParams p = kak_fermionic(u, parity_tol);
  const Complex g = std::exp(Complex(0.0, p.phase));

  double offdiag = 0.0;
  for (int r = 0; r < 4; ++r) {
    for (int s = 0; s < 4; ++s) {
      if (r != s) offdiag = std::max(offdiag, std::abs(u(r, s)));
    }
  }
  const bool diagonal = offdiag <= 1e-12;
  const bool adjacent = (k == j + 1);

  const std::vector<GG> leading = {rz_gate(j, p.t3), rz_gate(k, p.t4)};
  const std::vector<GG> trailing = {rz_gate(j, p.t1), rz_gate(k, p.t2)};

  UnitaryDecomposition d;
  d.n = n;
  if (diagonal || adjacent) {
    // Two terms: only the ZZ factor is non-free; the XX/YY factors (absent
    // for diagonal gates) are nearest-neighbour matchgates.
    std::vector<GG> mid;
    if (!diagonal) {
      mid = {GG::named("ryy_nn", {j, k}, {p.b}),
             GG::named("rxx_nn", {j, k}, {p.a})};
    }
    std::vector<GG> gs_cos = leading;
    append(gs_cos, mid);
    append(gs_cos, trailing);
    d.terms.push_back(
        {g * std::cos(p.c / 2.0), GaussianCircuit{n, Complex(1.0, 0.0), gs_cos}});

    std::vector<GG> gs_sin = leading;
    gs_sin.push_back(pauli_gate("z", j));
    gs_sin.push_back(pauli_gate("z", k));
    append(gs_sin, mid);
    append(gs_sin, trailing);
    d.terms.push_back({g * (-kI) * std::sin(p.c / 2.0),
                       GaussianCircuit{n, Complex(1.0, 0.0), gs_sin}});

    d.extent_claim = 1.0 + std::abs(std::sin(p.c));
    d.optimal = true;
  } else {
    // Feasible product form: expand each pair rotation into identity and
    // Pauli-pair halves (application order ZZ, YY, XX).
    struct Factor {
      Complex keep, flip;
      const char* id;
    };
    const Factor fs[3] = {
        {std::cos(p.c / 2.0), -kI * std::sin(p.c / 2.0), "z"},
        {std::cos(p.b / 2.0), -kI * std::sin(p.b / 2.0), "y"},
        {std::cos(p.a / 2.0), -kI * std::sin(p.a / 2.0), "x"},
    };
    for (int m = 0; m < 8; ++m) {
      Complex coeff = g;
      std::vector<GG> gs = leading;
      for (int f = 0; f < 3; ++f) {
        if (m & (1 << f)) {
          coeff *= fs[f].flip;
          gs.push_back(pauli_gate(fs[f].id, j));
          gs.push_back(pauli_gate(fs[f].id, k));
        } else {
          coeff *= fs[f].keep;
        }
      }
      append(gs, trailing);
      d.terms.push_back({coeff, GaussianCircuit{n, Complex(1.0, 0.0), gs}});
    }
    d.extent_claim = (1.0 + std::abs(std::sin(p.a))) *
                     (1.0 + std::abs(std::sin(p.b))) *
                     (1.0 + std::abs(std::sin(p.c)));
    d.optimal = false;
  }
  finalize(d);
  return d;
}

UnitaryDecomposition optimal_unitary_decomposition(
    const std::string& gate_id, std::optional<double> theta,
    const std::vector<int>& qubits, int n) {
  const bool needs_theta = gate_id == "rzz" || gate_id == "cphase" ||
                           gate_id == "ry" || gate_id == "rx";
  if (!needs_theta && gate_id != "swap_nn" && gate_id != "hadamard") {
    throw InvalidArgument("optimal_unitary_decomposition: unknown gate '" +
                          gate_id + "'");
  }
  if (needs_theta && !theta.has_value()) {
    throw InvalidArgument("gate '" + gate_id + "' requires theta");
  }
  if (!needs_theta && theta.has_value()) {
    throw InvalidArgument("gate '" + gate_id + "' takes no theta");
  }
  const int arity =
      (gate_id == "hadamard" || gate_id == "ry" || gate_id == "rx") ? 1 : 2;
  if (static_cast<int>(qubits.size()) != arity) {
    throw InvalidArgument("gate '" + gate_id + "' expects " +
                          std::to_string(arity) + " target(s)");
  }
  for (int q : qubits) {
    if (q < 0 || q >= n) throw InvalidArgument("gate target out of range");
  }
  if (arity == 2 && qubits[1] <= qubits[0]) {
    throw InvalidArgument("two-qubit targets must be ascending");
  }

  UnitaryDecomposition d;
  d.n = n;
  d.optimal = true;
  const auto circ = [&](std::vector<GG> gates) {
    return GaussianCircuit{n, Complex(1.0, 0.0), std::move(gates)};
  };

  if (gate_id == "rzz") {
    const double t = *theta;
    const int j = qubits[0], k = qubits[1];
    d.terms.push_back({Complex(std::cos(t / 2.0), 0.0), circ({})});
    d.terms.push_back({-kI * std::sin(t / 2.0),
                       circ({pauli_gate("z", j), pauli_gate("z", k)})});
    d.extent_claim = 1.0 + std::abs(std::sin(t));
  } else if (gate_id == "ry" || gate_id == "rx") {
    const double t = *theta;
    const char* axis = (gate_id == "ry") ? "y" : "x";
    d.terms.push_back({Complex(std::cos(t / 2.0), 0.0), circ({})});
    d.terms.push_back(
        {-kI * std::sin(t / 2.0), circ({pauli_gate(axis, qubits[0])})});
    d.extent_claim = 1.0 + std::abs(std::sin(t));
  } else if (gate_id == "hadamard") {
    const double r = 1.0 / std::sqrt(2.0);
    d.terms.push_back({Complex(r, 0.0), circ({pauli_gate("z", qubits[0])})});
    d.terms.push_back({Complex(r, 0.0), circ({pauli_gate("x", qubits[0])})});
    d.extent_claim = 2.0;
  } else if (gate_id == "cphase") {
    const double t = *theta;
    const int j = qubits[0], k = qubits[1];
    const Complex front = std::exp(kI * (t / 4.0));
    const std::vector<GG> halves = {rz_gate(j, t / 2.0), rz_gate(k, t / 2.0)};
    std::vector<GG> with_zz = halves;
    with_zz.push_back(pauli_gate("z", j));
    with_zz.push_back(pauli_gate("z", k));
    d.terms.push_back({front * std::cos(t / 4.0), circ(halves)});
    d.terms.push_back({front * kI * std::sin(t / 4.0), circ(with_zz)});
    d.extent_claim = 1.0 + std::abs(std::sin(t / 2.0));
  } else {  // swap_nn
    const int j = qubits[0], k = qubits[1];
    if (k != j + 1) {
      // Feasible fallback on a non-adjacent pair; optimality is open there.
      return decompose_two_qubit_fermionic(gate_matrix("swap", {}), n,
                                           qubits);
    }
    const Complex front = std::exp(kI * (kPi / 4.0)) / std::sqrt(2.0);
    const std::vector<GG> halves = {rz_gate(j, kPi / 2.0),
                                    rz_gate(k, kPi / 2.0)};
    std::vector<GG> plain = halves;
    plain.push_back(GG::named("fswap", {j, k}));
    std::vector<GG> with_zz = halves;
    with_zz.push_back(pauli_gate("z", j));
    with_zz.push_back(pauli_gate("z", k));
    with_zz.push_back(GG::named("fswap", {j, k}));
    d.terms.push_back({front, circ(plain)});
    d.terms.push_back({front * kI, circ(with_zz)});
    d.extent_claim = 2.0;
  }
  finalize(d);
  return d;
}

StateDecomposition magic_state_decomposition(double theta) {
  // Resource pair |psi+> x |psi+>, then the controlled-phase split on the
  // middle pair: front phase times (cos half, i sin half with Z1 Z2).
  PhasedGaussianState bell2 = prepare_basis_state(4, 0);
  bell2 = evolve(bell2, GG::named("rxy_nn", {0, 1}, {kPi / 2.0}));
  bell2 = evolve(bell2, GG::named("rxy_nn", {2, 3}, {kPi / 2.0}));

  PhasedGaussianState first = evolve(bell2, rz_gate(1, theta / 2.0));
  first = evolve(first, rz_gate(2, theta / 2.0));
  PhasedGaussianState second = evolve(first, pauli_gate("z", 1));
  second = evolve(second, pauli_gate("z", 2));

  const Complex front = std::exp(kI * (theta / 4.0));
  const Complex c1 = front * std::cos(theta / 4.0);
  const Complex c2 = front * kI * std::sin(theta / 4.0);

  StateDecomposition d;
  d.n = 4;
  if (std::abs(c1) > kDropCoeff) d.terms.push_back({c1, std::move(first)});
  if (std::abs(c2) > kDropCoeff) d.terms.push_back({c2, std::move(second)});
  d.l1_norm = 0.0;
  for (const auto& t : d.terms) d.l1_norm += std::abs(t.coeff);
  d.extent = 1.0 + std::abs(std::sin(theta / 2.0));
  return d;
}

StateDecomposition plus_state_decomposition(
    const std::vector<SlotInit>& pattern) {
  const int n = static_cast<int>(pattern.size());
  if (n == 0) {
    throw InvalidArgument("plus_state_decomposition: empty pattern");
  }
  if (n > 63) {
    throw ResourceLimit("plus_state_decomposition: pattern too long");
  }
  std::uint64_t fixed = 0;
  std::vector<int> plus_at;
  double delta_sum = 0.0;
  for (int q = 0; q < n; ++q) {
    switch (pattern[q].kind) {
      case SlotInit::Kind::Zero:
        break;
      case SlotInit::Kind::One:
        fixed |= (std::uint64_t{1} << q);
        break;
      case SlotInit::Kind::Plus:
        plus_at.push_back(q);
        delta_sum += pattern[q].delta;
        break;
    }
  }

  StateDecomposition d;
  d.n = n;
  PhasedGaussianState base = prepare_basis_state(n, fixed);
  if (plus_at.empty()) {
    d.terms.push_back({Complex(1.0, 0.0), std::move(base)});
    d.l1_norm = 1.0;
    d.extent = 1.0;
    return d;
  }

  // Ladder between consecutive superposition slots.  The generating
  // quadratic acts as X at the left slot and Y at the right slot with a Z
  // string across everything between; fixed ones under that string flip the
  // rotation's effective sign, so the angle compensates their parity.
  for (std::size_t i = 0; i + 1 < plus_at.size(); ++i) {
    const int p = plus_at[i], r = plus_at[i + 1];
    int ones_between = 0;
    for (int q = p + 1; q < r; ++q) {
      ones_between ^= static_cast<int>((fixed >> q) & 1ull);
    }
    const double sign = ones_between ? -1.0 : 1.0;
    base = evolve(base, GG::rotation(2 * p + 1, 2 * r + 1, -sign * kPi / 2.0));
  }

  PhasedGaussianState even = base;
  PhasedGaussianState odd = evolve(base, pauli_gate("x", plus_at.front()));

  // Component phases: |0> + e^{i delta}|1> at each superposition slot via
  // an RZ(delta) and a compensating global half-phase.
  GaussianCircuit phases;
  phases.n = n;
  phases.phase = std::exp(kI * (delta_sum / 2.0));
  for (int q : plus_at) phases.gates.push_back(rz_gate(q, pattern[q].delta));
  even = evolve_circuit_state(even, phases);
  odd = evolve_circuit_state(odd, phases);

  const double r = 1.0 / std::sqrt(2.0);
  d.terms.push_back({Complex(r, 0.0), std::move(even)});
  d.terms.push_back({Complex(r, 0.0), std::move(odd)});
  d.l1_norm = std::sqrt(2.0);
  d.extent = 2.0;
  return d;
}

LiftReport lift_gadget(const CMat& v) {
  if (v.rows() != 4 || v.cols() != 4) {
    throw InvalidArgument("lift_gadget: expected a 4x4 operator");
  }
  if (parity_mixing(v) > 1e-10) {
    throw InvalidArgument("lift_gadget: operator does not preserve parity");
  }
  LiftReport rep;
  rep.target = v;
  const CMat big = dense_lift(4, v, {1, 2});
  rep.gadget_state = big * gadget_input_state();
  rep.recovered = lift_from_amplitudes(rep.gadget_state);
  rep.recovery_error = (rep.recovered - v).cwiseAbs().maxCoeff();
  return rep;
}

LiftReport lift_gadget(const UnitaryDecomposition& v_decomp) {
  if (v_decomp.n != 2) {
    throw InvalidArgument("lift_gadget: decomposition must live on two qubits");
  }
  if (v_decomp.terms.empty()) {
    throw InvalidArgument("lift_gadget: empty decomposition");
  }
  LiftReport rep = lift_gadget(decomposition_dense_sum(v_decomp));

  double worst = 0.0;
  for (const auto& t : v_decomp.terms) {
    // Embed the term's word on the gadget's middle pair.  Named gates are
    // position-embedded qubit matrices, so retargeting is a plain shift.
    GaussianCircuit shifted;
    shifted.n = 4;
    shifted.phase = t.circuit.phase;
    for (const auto& gate : t.circuit.gates) {
      if (gate.kind != GG::Kind::NamedMatchgate) {
        throw InvalidArgument(
            "lift_gadget: decomposition terms must be named-gate words");
      }
      GG g2 = gate;
      for (int& q : g2.targets) q += 1;
      shifted.gates.push_back(std::move(g2));
    }
    DenseState gs;
    gs.n = 4;
    gs.amps = gadget_input_state();
    gs = dense_apply_circuit(gs, shifted);
    const CMat lifted_term = lift_from_amplitudes(gs.amps);
    const CMat direct = dense_circuit_unitary(t.circuit);
    worst = std::max(worst, (lifted_term - direct).cwiseAbs().maxCoeff());
  }
  rep.term_lift_error = worst;
  rep.lifted = v_decomp;
  return rep;
}

CMat decomposition_dense_sum(const UnitaryDecomposition& d) {
  if (d.n <= 0) {
    throw InvalidArgument("decomposition_dense_sum: empty decomposition");
  }
  const Eigen::Index dim = Eigen::Index(1) << d.n;
  CMat sum = CMat::Zero(dim, dim);
  for (const auto& t : d.terms) {
    sum += t.coeff * dense_circuit_unitary(t.circuit);
  }
  return sum;
}

}  // namespace fgsim
