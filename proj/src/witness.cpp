#include "fgsim/witness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "fgsim/rng.hpp"

namespace fgsim {

namespace {

constexpr std::uint64_t kWitnessStream = 0x77697473ULL;
constexpr double kValidityTol = 1e-9;

// A Haar-ish random pure Gaussian state: a depth-10n circuit of uniformly
// random two-Majorana rotations (with an occasional single-Majorana
// reflection so both parity sectors are exercised) applied to the vacuum.
PhasedGaussianState random_gaussian_state(int n, std::uint64_t seed,
                                          std::uint64_t index) {
  GaussianCircuit c;
  c.n = n;
  const int depth = 10 * n;
  c.gates.reserve(static_cast<std::size_t>(depth));
  for (int g = 0; g < depth; ++g) {
    CounterRng rng(seed, index, static_cast<std::uint64_t>(g), kWitnessStream);
    if (rng.uniform() < 0.1) {
      c.gates.push_back(GaussianGenerator::majorana(
          static_cast<MajoranaIndex>(rng.uniform_below(2 * n))));
      continue;
    }
    auto j = static_cast<MajoranaIndex>(rng.uniform_below(2 * n));
    auto k = static_cast<MajoranaIndex>(rng.uniform_below(2 * n));
    while (k == j) k = static_cast<MajoranaIndex>(rng.uniform_below(2 * n));
    if (j > k) std::swap(j, k);
    c.gates.push_back(
        GaussianGenerator::rotation(j, k, 2.0 * kPi * rng.uniform()));
  }
  return evolve_circuit_state(prepare_basis_state(n, 0), c);
}

void check_dense_state(const DenseState& s, const char* what) {
  if (s.n < 1 || s.n > 10) {
    throw InvalidArgument(std::string(what) +
                          ": qubit count must be between 1 and 10");
  }
  if (s.amps.size() != (std::int64_t(1) << s.n)) {
    throw InvalidArgument(std::string(what) +
                          ": amplitude vector does not match qubit count");
  }
}

// Full-width unitary of one branch, sum_j c_j K_j over its free words.
CMat branch_unitary(const UnitaryDecomposition& d) {
  const std::int64_t dim = std::int64_t(1) << d.n;
  CMat u = CMat::Zero(dim, dim);
  for (const DecompositionTerm& term : d.terms) {
    u += term.coeff * dense_circuit_unitary(term.circuit);
  }
  return u;
}

CMat qubit_projector(int n, int qubit, int outcome) {
  const std::int64_t dim = std::int64_t(1) << n;
  CMat p = CMat::Zero(dim, dim);
  const std::int64_t mask = std::int64_t(1) << (n - 1 - qubit);
  for (std::int64_t x = 0; x < dim; ++x) {
    if (((x & mask) != 0) == (outcome != 0)) p(x, x) = Complex(1.0, 0.0);
  }
  return p;
}

// E(|g><g|) evaluated densely, branch by branch.
CMat channel_output(const ChannelDecomposition& channel, const CVec& g) {
  const std::int64_t dim = g.size();
  CMat rho_in = g * g.adjoint();
  rho_in /= rho_in.trace().real();
  CMat out = CMat::Zero(dim, dim);
  for (const ChannelBranch& branch : channel.branches) {
    if (branch.kind == ChannelBranch::Kind::Unitary) {
      const CMat u = branch_unitary(branch.unitary.decomposition);
      out += branch.unitary.probability * u * rho_in * u.adjoint();
      continue;
    }
    for (const AdaptiveKraus& k : branch.adaptive.kraus) {
      const CMat op =
          dense_circuit_unitary(k.then_circuit) *
          qubit_projector(channel.n, k.projector.qubit, k.projector.outcome);
      out += branch.adaptive.weight * op * rho_in * op.adjoint();
    }
  }
  return out;
}

// max_b tr[(|0> + e^{ib}|1>)(<0| + e^{-ib}<1|)_q (x) |x><x| rho] for one
// qubit q, maximized over the basis configuration x of the other qubits.
// Valid for every phase b: pure Gaussian states have definite parity, so at
// most one of the two paired amplitudes is nonzero and the overlap with the
// unnormalized witness never exceeds one.
double best_single_qubit_interference(const CMat& rho, int n) {
  const std::int64_t dim = std::int64_t(1) << n;
  double best = 0.0;
  for (int q = 0; q < n; ++q) {
    const std::int64_t mask = std::int64_t(1) << (n - 1 - q);
    for (std::int64_t x0 = 0; x0 < dim; ++x0) {
      if ((x0 & mask) != 0) continue;
      const std::int64_t x1 = x0 | mask;
      const double value = rho(x0, x0).real() + rho(x1, x1).real() +
                           2.0 * std::abs(rho(x0, x1));
      best = std::max(best, value);
    }
  }
  return best;
}

// The two four-qubit pair-interference witnesses
// (|0000> + |1111> +- i (|0011> + |1100>)) / sqrt(2).  Only the +-i phases
// are matchgate rotations of (|0000> + |1111>)/sqrt(2), whose best Gaussian
// overlap squared is 1/2, so exactly these two scalings are valid.
double best_pair_interference(const CMat& rho) {
  double best = 0.0;
  for (const double sign : {1.0, -1.0}) {
    CVec w = CVec::Zero(16);
    const double a = 1.0 / std::sqrt(2.0);
    w[0b0000] = Complex(a, 0.0);
    w[0b1111] = Complex(a, 0.0);
    w[0b0011] = Complex(0.0, sign * a);
    w[0b1100] = Complex(0.0, sign * a);
    best = std::max(best, (w.adjoint() * rho * w)(0, 0).real());
  }
  return best;
}

}  // namespace

WitnessReport extent_witness_check(const DenseState& omega,
                                   const DenseState& target,
                                   int gaussian_samples, std::uint64_t seed,
                                   double claimed_bound) {
  check_dense_state(omega, "extent_witness_check");
  check_dense_state(target, "extent_witness_check");
  if (omega.n != target.n) {
    throw InvalidArgument("extent_witness_check: qubit counts differ");
  }
  if (gaussian_samples < 0) {
    throw InvalidArgument("extent_witness_check: negative sample count");
  }

  WitnessReport report;
  report.witness_id =
      "extent-witness(n=" + std::to_string(omega.n) + ")";
  report.claimed_bound = claimed_bound;
  report.samples = gaussian_samples;
  report.achieved_value = std::norm(dense_inner(omega, target));

  double worst = 0.0;
  for (int i = 0; i < gaussian_samples; ++i) {
    const DenseState phi = dense_state_from_gaussian(
        random_gaussian_state(omega.n, seed, static_cast<std::uint64_t>(i)));
    worst = std::max(worst, std::abs(dense_inner(omega, phi)));
  }
  report.worst_overlap = worst;
  report.validity = worst <= 1.0 + kValidityTol;
  return report;
}

double dyadic_witness_value(const CMat& w, const CMat& rho) {
  if (w.rows() != w.cols() || rho.rows() != rho.cols() ||
      w.rows() != rho.rows()) {
    throw InvalidArgument("dyadic_witness_value: dimension mismatch");
  }
  const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  if ((w - w.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw InvalidArgument("dyadic_witness_value: witness is not Hermitian");
  }
  const Complex value = (w * rho).trace();
  if (std::abs(value.imag()) > 1e-8 * std::max(1.0, std::abs(value.real()))) {
    throw InvalidState("dyadic_witness_value: trace has an imaginary residue");
  }
  return value.real();
}

SandwichBounds sandwich_bounds(const ChannelDecomposition& channel,
                               const PhasedGaussianState& g) {
  if (channel.n != g.n) {
    throw InvalidArgument("sandwich_bounds: qubit counts differ");
  }
  if (channel.n < 1 || channel.n > 10) {
    throw InvalidArgument("sandwich_bounds: qubit count must be 1..10");
  }
  if (channel.branches.empty()) {
    throw InvalidArgument("sandwich_bounds: channel has no branches");
  }

  const DenseState in = dense_state_from_gaussian(g);
  const CMat rho = channel_output(channel, in.amps);

  // Largest eigenvalue = best normalized dyad; any unit vector is a valid
  // witness by Cauchy-Schwarz.
  Eigen::SelfAdjointEigenSolver<CMat> eig((rho + rho.adjoint()) / 2.0);
  double lower = eig.eigenvalues().maxCoeff();
  lower = std::max(lower, best_single_qubit_interference(rho, channel.n));
  if (channel.n == 4) lower = std::max(lower, best_pair_interference(rho));

  SandwichBounds bounds;
  bounds.lower = lower;
  bounds.upper = channel.cost;
  if (bounds.lower > bounds.upper + 1e-9) {
    throw InvalidState(
        "sandwich_bounds: certified lower bound exceeds the decomposition "
        "cost");
  }
  return bounds;
}

TwirlReport z_twirl_trace_check(const CMat& u) {
  if (u.rows() != u.cols()) {
    throw InvalidArgument("z_twirl_trace_check: matrix is not square");
  }
  const std::int64_t dim = u.rows();
  if (dim < 2 || dim > 8 || (dim & (dim - 1)) != 0) {
    throw InvalidArgument(
        "z_twirl_trace_check: dimension must be 2, 4, or 8");
  }
  const CMat gram = u.adjoint() * u;
  if ((gram - CMat::Identity(dim, dim)).cwiseAbs().maxCoeff() > 1e-9) {
    throw InvalidArgument("z_twirl_trace_check: matrix is not unitary");
  }

  // Literal twirl of the transfer matrix over every Z-string on the doubled
  // register: M' = (1/4^n) sum_z S_z M S_z with S_z the +-1 sign diagonal.
  const CMat m = unitary_transfer_matrix(u);
  const std::int64_t big = m.rows();
  CMat twirled = CMat::Zero(big, big);
  CVec signs(big);
  for (std::int64_t z = 0; z < big; ++z) {
    for (std::int64_t a = 0; a < big; ++a) {
      const int parity = std::popcount(static_cast<std::uint64_t>(z & a)) & 1;
      signs[a] = Complex(parity ? -1.0 : 1.0, 0.0);
    }
    twirled += signs.asDiagonal() * m * signs.asDiagonal();
  }
  twirled /= static_cast<double>(big);

  TwirlReport report;
  const CMat dual_id = transfer_dual_identity(twirled);
  report.twirled_trace_defect =
      (dual_id - CMat::Identity(dim, dim)).cwiseAbs().maxCoeff();

  double off = 0.0;
  for (std::int64_t r = 0; r < dim; ++r) {
    for (std::int64_t c = 0; c < dim; ++c) {
      if (r != c) off = std::max(off, std::abs(u(r, c)));
    }
  }
  report.is_diagonal = off <= 1e-10;
  return report;
}

}  // namespace fgsim
