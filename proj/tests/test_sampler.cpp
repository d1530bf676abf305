#include "fgsim/sampler.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "fgsim/channels.hpp"
#include "fgsim/dense.hpp"
#include "fgsim/gaussian.hpp"
#include "fgsim/types.hpp"

namespace fgsim {
namespace {

GaussianGenerator named(const std::string& id, std::vector<int> targets,
                        std::vector<double> params = {}) {
  return GaussianGenerator::named(id, std::move(targets), std::move(params));
}

// Dense density-matrix walk of a program; channels are applied as the
// physical rotation-plus-dephasing map they define, independent of how the
// sampler decomposes them.
CMat density_of_program(const CircuitProgram& p) {
  const int dim = 1 << p.n;
  CVec psi = CVec::Zero(dim);
  psi(0) = Complex(1.0, 0.0);
  CMat rho = psi * psi.adjoint();
  const auto conjugate = [&rho](const CMat& u) { rho = u * rho * u.adjoint(); };
  for (const ProgramElement& el : p.elements) {
    switch (el.kind) {
      case ProgramElement::Kind::Gaussian: {
        GaussianCircuit c;
        c.n = p.n;
        c.gates.push_back(el.gate);
        conjugate(dense_circuit_unitary(c));
        break;
      }
      case ProgramElement::Kind::NonGaussian: {
        std::vector<double> params;
        if (el.theta.has_value()) params.push_back(*el.theta);
        conjugate(dense_lift(p.n, gate_matrix(el.id, params), el.targets));
        break;
      }
      case ProgramElement::Kind::Noisy:
      case ProgramElement::Kind::Adaptive: {
        const ChannelDescriptor& d = el.channel;
        const CMat u =
            dense_lift(p.n, gate_matrix("rzz", {d.theta.value()}), d.targets);
        const int noisy = d.noise == "z1" ? d.targets[0] : d.targets[1];
        const CMat z = dense_lift(p.n, gate_matrix("z", {}), {noisy});
        rho = (1.0 - d.p) * u * rho * u.adjoint() +
              d.p * z * u * rho * u.adjoint() * z;
        break;
      }
      case ProgramElement::Kind::Measure:
        break;
    }
  }
  return rho;
}

// Born distribution of the measured qubits; slot b of the outcome index is
// the outcome of measured[b], matching SampleReport::bitstring.
std::vector<double> dense_distribution(const CMat& rho, int n,
                                       const std::vector<int>& measured) {
  std::vector<double> out(std::size_t(1) << measured.size(), 0.0);
  for (int x = 0; x < rho.rows(); ++x) {
    std::uint64_t s = 0;
    for (std::size_t b = 0; b < measured.size(); ++b) {
      const int bit = (x >> (n - 1 - measured[b])) & 1;
      s |= std::uint64_t(bit) << b;
    }
    out[s] += rho(x, x).real();
  }
  return out;
}

double tvd(const std::vector<double>& empirical,
           const std::vector<double>& exact) {
  double acc = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i)
    acc += std::abs(empirical[i] - exact[i]);
  return 0.5 * acc;
}

// Shared magic-gate benchmark: two rzz(pi/3) interleaved with matchgates.
CircuitProgram magic_benchmark() {
  CircuitProgram p;
  p.n = 4;
  p.elements.push_back(
      ProgramElement::gaussian(named("rxy_nn", {0, 1}, {0.7})));
  p.elements.push_back(ProgramElement::gaussian(named("rz", {1}, {0.4})));
  p.elements.push_back(
      ProgramElement::non_gaussian("rzz", kPi / 3.0, {1, 2}));
  p.elements.push_back(
      ProgramElement::gaussian(named("rxy_nn", {2, 3}, {1.1})));
  p.elements.push_back(
      ProgramElement::non_gaussian("rzz", kPi / 3.0, {0, 1}));
  p.elements.push_back(
      ProgramElement::gaussian(named("rxx_nn", {1, 2}, {0.5})));
  return p;
}

CircuitProgram gaussian_benchmark() {
  CircuitProgram p;
  p.n = 3;
  p.elements.push_back(
      ProgramElement::gaussian(named("rxy_nn", {0, 1}, {0.9})));
  p.elements.push_back(ProgramElement::gaussian(named("rz", {0}, {0.3})));
  p.elements.push_back(
      ProgramElement::gaussian(named("ryy_nn", {1, 2}, {1.3})));
  p.elements.push_back(ProgramElement::gaussian(named("fswap", {0, 1})));
  p.elements.push_back(
      ProgramElement::gaussian(named("rxx_nn", {1, 2}, {0.55})));
  return p;
}

ChannelDescriptor noisy_rzz(double theta, double p, bool adaptive,
                            std::vector<int> targets) {
  ChannelDescriptor d;
  d.kind = "noisy_rzz";
  d.noise = "z1";
  d.theta = theta;
  d.p = p;
  d.adaptive = adaptive;
  d.targets = std::move(targets);
  return d;
}

CircuitProgram noisy_benchmark(double p, bool adaptive) {
  CircuitProgram prog;
  prog.n = 2;
  prog.elements.push_back(
      ProgramElement::gaussian(named("rxy_nn", {0, 1}, {0.8})));
  prog.elements.push_back(ProgramElement::gaussian(named("rz", {0}, {0.3})));
  ChannelDescriptor d = noisy_rzz(1.1, p, adaptive, {0, 1});
  prog.elements.push_back(adaptive ? ProgramElement::adaptive_channel(d)
                                   : ProgramElement::noisy(d));
  return prog;
}

TEST(EvolveCircuit, SingleTermChainMatchesSequentialEvolution) {
  const CircuitProgram prog = gaussian_benchmark();
  std::vector<UnitaryDecomposition> decomps;
  PhasedGaussianState reference = prepare_basis_state(3, 0);
  for (const ProgramElement& el : prog.elements) {
    GaussianCircuit c;
    c.n = 3;
    c.gates.push_back(el.gate);
    UnitaryDecomposition d;
    d.n = 3;
    d.terms.push_back({Complex(1.0, 0.0), c});
    d.l1_norm = 1.0;
    decomps.push_back(d);
    reference = evolve_circuit_state(reference, c);
  }
  const SparseSuperposition sup =
      evolve_circuit(decomps, prepare_basis_state(3, 0));
  ASSERT_EQ(sup.terms.size(), 1u);
  EXPECT_NEAR(std::abs(overlap(sup.terms[0].state, reference)), 1.0, 1e-10);
  EXPECT_NEAR(std::abs(sup.terms[0].coeff - Complex(1.0, 0.0)), 0.0, 1e-12);
}

TEST(EvolveCircuit, TwoRotationExpansionMatchesDense) {
  const auto d = optimal_unitary_decomposition("rzz", kPi / 2.0, {0, 1}, 2);
  const SparseSuperposition sup =
      evolve_circuit({d, d}, prepare_basis_state(2, 0));
  ASSERT_EQ(sup.terms.size(), 4u);

  CVec total = CVec::Zero(4);
  for (const StateTerm& t : sup.terms)
    total += t.coeff * dense_state_from_gaussian(t.state).amps;

  GaussianCircuit empty;
  empty.n = 2;
  DenseState ref = dense_apply_circuit(dense_basis_state(2, 0), empty);
  const CMat u = dense_lift(2, gate_matrix("rzz", {kPi / 2.0}), {0, 1});
  ref.amps = u * (u * ref.amps);
  EXPECT_LT((total - ref.amps).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(EvolveCircuit, RefusesOversizedExpansionsBeforeAllocating) {
  const auto d = optimal_unitary_decomposition("rzz", kPi / 2.0, {0, 1}, 2);
  try {
    evolve_circuit({d, d}, prepare_basis_state(2, 0), 3);
    FAIL() << "expected a resource-limit refusal";
  } catch (const ResourceLimit& e) {
    EXPECT_NE(std::string(e.what()).find('4'), std::string::npos);
  }
}

TEST(SampleExact, GaussianCircuitTracksTheBornDistribution) {
  const CircuitProgram prog = gaussian_benchmark();
  const std::vector<double> exact =
      dense_distribution(density_of_program(prog), 3, {0, 1, 2});

  const int shots = 4000;
  std::vector<double> freq(8, 0.0);
  for (int s = 0; s < shots; ++s) {
    const SampleReport r = sample_exact(prog, 3, 1000 + s);
    freq[r.bitstring] += 1.0 / shots;
    EXPECT_EQ(r.k_used, 0);
    ASSERT_EQ(r.bit_probabilities.size(), 3u);
    // Conditional-probability chaining: the recorded bit probabilities
    // multiply to the joint probability of the emitted string.
    double joint = 1.0;
    for (double p : r.bit_probabilities) joint *= p;
    EXPECT_NEAR(joint, exact[r.bitstring], 1e-9);
  }
  EXPECT_LE(tvd(freq, exact), 0.04);
}

TEST(SampleExact, MagicInterferenceMatchesTheDenseDistribution) {
  const CircuitProgram prog = magic_benchmark();
  const std::vector<double> exact =
      dense_distribution(density_of_program(prog), 4, {0, 1, 2, 3});

  const double l1 = std::cos(kPi / 6.0) + std::sin(kPi / 6.0);
  const double expected_cost = l1 * l1 * l1 * l1;

  const int shots = 3000;
  std::vector<double> freq(16, 0.0);
  for (int s = 0; s < shots; ++s) {
    const SampleReport r = sample_exact(prog, 4, 77000 + s);
    freq[r.bitstring] += 1.0 / shots;
    EXPECT_NEAR(r.cost, expected_cost, 1e-12);
  }
  EXPECT_LE(tvd(freq, exact), 0.05);
}

TEST(SampleExact, StochasticChannelMixturesTrackTheDenseChannel) {
  const CircuitProgram prog = noisy_benchmark(0.3, /*adaptive=*/false);
  const std::vector<double> exact =
      dense_distribution(density_of_program(prog), 2, {0, 1});

  const int shots = 4000;
  std::vector<double> freq(4, 0.0);
  for (int s = 0; s < shots; ++s) {
    const SampleReport r = sample_exact(prog, 2, 5000 + s);
    freq[r.bitstring] += 1.0 / shots;
  }
  EXPECT_LE(tvd(freq, exact), 0.04);
}

TEST(SampleExact, NoiselessChannelEqualsTheBareGate) {
  CircuitProgram bare;
  bare.n = 2;
  bare.elements.push_back(
      ProgramElement::gaussian(named("rxy_nn", {0, 1}, {0.8})));
  bare.elements.push_back(ProgramElement::non_gaussian("rzz", 0.7, {0, 1}));

  CircuitProgram chan = bare;
  chan.elements.back() = ProgramElement::noisy(noisy_rzz(0.7, 0.0, false, {0, 1}));

  for (std::uint64_t seed : {11u, 12u, 13u, 14u}) {
    const SampleReport a = sample_exact(bare, 2, seed);
    const SampleReport b = sample_exact(chan, 2, seed);
    EXPECT_EQ(a.bitstring, b.bitstring);
    EXPECT_NEAR(a.cost, b.cost, 1e-12);
    ASSERT_EQ(a.bit_probabilities.size(), b.bit_probabilities.size());
    for (std::size_t i = 0; i < a.bit_probabilities.size(); ++i)
      EXPECT_NEAR(a.bit_probabilities[i], b.bit_probabilities[i], 1e-12);
  }
}

TEST(SampleExact, HonoursExplicitMeasurementOrder) {
  CircuitProgram prog;
  prog.n = 3;
  prog.elements.push_back(ProgramElement::gaussian(named("x", {1})));
  prog.elements.push_back(ProgramElement::gaussian(named("x", {2})));
  prog.elements.push_back(ProgramElement::measure({2, 0}));

  const SampleReport r = sample_exact(prog, 2, 9);
  ASSERT_EQ(r.measured_qubits, (std::vector<int>{2, 0}));
  // Qubit 2 is |1> (slot 0), qubit 0 is |0> (slot 1).
  EXPECT_EQ(r.bitstring, 1u);
  EXPECT_NEAR(r.bit_probabilities[0], 1.0, 1e-12);
  EXPECT_NEAR(r.bit_probabilities[1], 1.0, 1e-12);

  // Without a terminal measurement the first w qubits are read.
  CircuitProgram bare = prog;
  bare.elements.pop_back();
  const SampleReport s = sample_exact(bare, 2, 9);
  EXPECT_EQ(s.measured_qubits, (std::vector<int>{0, 1}));
  EXPECT_EQ(s.bitstring, 2u);  // qubit 1 carries the excitation
}

TEST(SampleApprox, GaussianOnlyProgramsAreExactPerShot) {
  const CircuitProgram prog = gaussian_benchmark();
  const std::vector<double> exact =
      dense_distribution(density_of_program(prog), 3, {0, 1, 2});

  const int shots = 2000;
  std::vector<double> freq(8, 0.0);
  for (int s = 0; s < shots; ++s) {
    const SampleReport r = sample_approx(prog, 3, 0.5, 0.5, 0.5, 40000 + s);
    freq[r.bitstring] += 1.0 / shots;
    EXPECT_EQ(r.k_used, 8);  // ceil(4 * 1 / 0.5)
    EXPECT_NEAR(r.cost, 1.0, 1e-12);
    // Rank-1 superpositions make every norm estimate exact, so the recorded
    // probabilities chain to the dense joint even on the sampling path.
    double joint = 1.0;
    for (double p : r.bit_probabilities) joint *= p;
    EXPECT_NEAR(joint, exact[r.bitstring], 1e-9);
  }
  EXPECT_LE(tvd(freq, exact), 0.05);
}

TEST(SampleApprox, MagicCircuitStaysWithinTheErrorBudget) {
  const CircuitProgram prog = magic_benchmark();
  const std::vector<double> exact =
      dense_distribution(density_of_program(prog), 4, {0, 1, 2, 3});

  const double l1 = std::cos(kPi / 6.0) + std::sin(kPi / 6.0);
  const double cost = l1 * l1 * l1 * l1;
  const double delta_prime = 0.1;
  const std::int64_t expected_k = static_cast<std::int64_t>(
      std::ceil(4.0 * cost / (delta_prime / 3.0)));

  const int shots = 3000;
  std::vector<double> freq(16, 0.0);
  for (int s = 0; s < shots; ++s) {
    const SampleReport r =
        sample_approx_budget(prog, 4, delta_prime, 0.1, 90000 + s);
    freq[r.bitstring] += 1.0 / shots;
    EXPECT_EQ(r.k_used, expected_k);
    EXPECT_NEAR(r.cost, cost, 1e-9);
    for (double p : r.bit_probabilities) {
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
    }
  }
  EXPECT_LE(tvd(freq, exact), 0.12);
}

TEST(SampleApprox, DeterministicPerSeed) {
  const CircuitProgram prog = magic_benchmark();
  const SampleReport a = sample_approx(prog, 4, 0.2, 0.3, 0.2, 123);
  const SampleReport b = sample_approx(prog, 4, 0.2, 0.3, 0.2, 123);
  EXPECT_EQ(a.bitstring, b.bitstring);
  EXPECT_EQ(a.k_used, b.k_used);
  EXPECT_EQ(a.bit_probabilities, b.bit_probabilities);
  EXPECT_EQ(a.seed, 123u);
}

TEST(SampleApprox, RejectsBadInput) {
  const CircuitProgram prog = magic_benchmark();
  EXPECT_THROW(sample_approx(prog, 0, 0.1, 0.1, 0.1, 1), InvalidArgument);
  EXPECT_THROW(sample_approx(prog, 5, 0.1, 0.1, 0.1, 1), InvalidArgument);
  EXPECT_THROW(sample_approx(prog, 4, 0.0, 0.1, 0.1, 1), InvalidArgument);
  EXPECT_THROW(sample_approx(prog, 4, 0.1, 1.0, 0.1, 1), InvalidArgument);
  EXPECT_THROW(sample_approx(prog, 4, 0.1, 0.1, 0.0, 1), InvalidArgument);

  // Adaptive branches are only legal under sample_adaptive.
  const CircuitProgram adaptive = noisy_benchmark(0.5, /*adaptive=*/true);
  EXPECT_THROW(sample_approx(adaptive, 2, 0.1, 0.1, 0.1, 1), InvalidArgument);
  EXPECT_THROW(sample_exact(adaptive, 2, 1), InvalidArgument);

  // Terminal measurement constraints.
  CircuitProgram early = magic_benchmark();
  early.elements.insert(early.elements.begin(),
                        ProgramElement::measure({0}));
  EXPECT_THROW(sample_exact(early, 1, 1), InvalidArgument);
  CircuitProgram tail = magic_benchmark();
  tail.elements.push_back(ProgramElement::measure({0, 3}));
  EXPECT_THROW(sample_exact(tail, 3, 1), InvalidArgument);
  EXPECT_EQ(sample_exact(tail, 2, 1).measured_qubits,
            (std::vector<int>{0, 3}));

  // Distinct sampled words beyond the term budget are refused up front.
  SamplerOptions tight;
  tight.term_budget = 2;
  EXPECT_THROW(sample_approx(prog, 4, 0.05, 0.1, 0.1, 1, tight),
               ResourceLimit);
}

TEST(SampleAdaptive, AlwaysKrausChannelMatchesTheDenseChannel) {
  const CircuitProgram prog = noisy_benchmark(0.5, /*adaptive=*/true);
  const std::vector<double> exact =
      dense_distribution(density_of_program(prog), 2, {0, 1});

  const int shots = 4000;
  std::vector<double> freq(4, 0.0);
  for (int s = 0; s < shots; ++s) {
    const SampleReport r = sample_adaptive(prog, 2, 0.1, 0.3, 0.25, 60000 + s);
    freq[r.bitstring] += 1.0 / shots;
    // The p = 1/2 channel always takes the measurement branch.
    ASSERT_EQ(r.adaptive_probabilities.size(), 1u);
    EXPECT_GE(r.adaptive_probabilities[0], 0.0);
    EXPECT_LE(r.adaptive_probabilities[0], 1.0);
    EXPECT_NEAR(r.cost, 1.0, 1e-12);
  }
  EXPECT_LE(tvd(freq, exact), 0.04);
}

TEST(SampleAdaptive, ZeroNoiseNeverTakesTheAdaptiveBranch) {
  const CircuitProgram prog = noisy_benchmark(0.0, /*adaptive=*/true);
  const std::vector<double> exact =
      dense_distribution(density_of_program(prog), 2, {0, 1});

  std::vector<double> freq(4, 0.0);
  const int shots = 2000;
  for (int s = 0; s < shots; ++s) {
    const SampleReport r = sample_adaptive(prog, 2, 0.2, 0.4, 0.25, 3000 + s);
    freq[r.bitstring] += 1.0 / shots;
    EXPECT_TRUE(r.adaptive_probabilities.empty());
  }
  EXPECT_LE(tvd(freq, exact), 0.07);
}

TEST(SampleAdaptive, MixedBranchesReproduceTheDenseChannel) {
  const CircuitProgram prog = noisy_benchmark(0.25, /*adaptive=*/true);
  const std::vector<double> exact =
      dense_distribution(density_of_program(prog), 2, {0, 1});

  const double l1 = std::cos(0.55) + std::sin(0.55);
  const int shots = 3000;
  std::vector<double> freq(4, 0.0);
  int kraus_shots = 0;
  for (int s = 0; s < shots; ++s) {
    const SampleReport r = sample_adaptive(prog, 2, 0.15, 0.42, 0.25, 7000 + s);
    freq[r.bitstring] += 1.0 / shots;
    if (r.adaptive_probabilities.empty()) {
      EXPECT_NEAR(r.cost, l1 * l1, 1e-12);
    } else {
      EXPECT_NEAR(r.cost, 1.0, 1e-12);
      ++kraus_shots;
    }
  }
  // Branch weights are 1-2p = 1/2 each.
  EXPECT_NEAR(static_cast<double>(kraus_shots) / shots, 0.5, 0.05);
  EXPECT_LE(tvd(freq, exact), 0.1);
}

TEST(Sampler, EmptyProgramMeasuresTheVacuum) {
  CircuitProgram prog;
  prog.n = 2;
  const SampleReport r = sample_exact(prog, 2, 5);
  EXPECT_EQ(r.bitstring, 0u);
  EXPECT_NEAR(r.bit_probabilities[0], 1.0, 1e-12);
  EXPECT_NEAR(r.bit_probabilities[1], 1.0, 1e-12);
  const SampleReport s = sample_approx(prog, 2, 0.5, 0.5, 0.5, 5);
  EXPECT_EQ(s.bitstring, 0u);
}

}  // namespace
}  // namespace fgsim
