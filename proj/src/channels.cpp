#include "fgsim/channels.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "fgsim/rng.hpp"

namespace fgsim {

namespace {

using GG = GaussianGenerator;

// Branches whose probability falls below this are exact zeros of the
// closed-form trigonometry (noiseless or maximally-noisy limits).
constexpr double kDropProb = 1e-15;
// Stream tag separating oracle branch draws from other consumers of the
// same seed.
constexpr std::uint64_t kOracleStream = 0x6F7261636CULL;

void check_probability(double p) {
  if (!(p >= 0.0 && p <= 0.5)) {
    throw InvalidArgument(
        "noise probability must lie in [0, 1/2]; stronger noise reduces to "
        "this range by composing with a deterministic Pauli");
  }
}

void default_targets(std::vector<int>& targets, int& n, int arity) {
  if (targets.empty()) {
    targets.resize(arity);
    for (int i = 0; i < arity; ++i) targets[i] = i;
  }
  if (static_cast<int>(targets.size()) != arity) {
    throw InvalidArgument("channel target count does not match its arity");
  }
  if (n == 0) n = targets.back() + 1;
}

double accounted_cost(const ChannelDecomposition& d) {
  double c = 0.0;
  for (const auto& b : d.branches) {
    if (b.kind == ChannelBranch::Kind::Unitary) {
      c += b.unitary.probability * b.unitary.decomposition.l1_norm *
           b.unitary.decomposition.l1_norm;
    } else {
      c += b.adaptive.weight;
    }
  }
  return c;
}

UnitaryDecomposition with_pauli_z_after(UnitaryDecomposition d, int qubit) {
  for (auto& t : d.terms) {
    t.circuit.gates.push_back(GG::named("z", {qubit}));
  }
  return d;
}

}  // namespace

ChannelBranch ChannelBranch::make_unitary(double probability,
                                          UnitaryDecomposition d) {
  ChannelBranch b;
  b.kind = Kind::Unitary;
  b.unitary.probability = probability;
  b.unitary.decomposition = std::move(d);
  return b;
}

ChannelBranch ChannelBranch::make_adaptive(AdaptiveBranch a) {
  ChannelBranch b;
  b.kind = Kind::Adaptive;
  b.adaptive = std::move(a);
  return b;
}

ChannelDecomposition equimagical_noisy_rotation(const std::string& axis,
                                                double theta, double p,
                                                std::vector<int> targets,
                                                int n) {
  check_probability(p);
  std::string gate_id;
  int arity = 1;
  if (axis == "x") {
    gate_id = "rx";
  } else if (axis == "y") {
    gate_id = "ry";
  } else if (axis == "zz") {
    gate_id = "rzz";
    arity = 2;
  } else {
    throw InvalidArgument("unknown rotation axis '" + axis + "'");
  }
  default_targets(targets, n, arity);

  const double phi = std::asin((1.0 - 2.0 * p) * std::sin(theta));
  const double cos_phi = std::cos(phi);
  // cos(phi) vanishes only at p = 0, theta = +-pi/2, where the two branch
  // rotations coincide and the split is arbitrary.
  double s = std::abs(cos_phi) < 1e-12
                 ? 0.5
                 : 0.5 * (1.0 + (1.0 - 2.0 * p) * std::cos(theta) / cos_phi);
  s = std::clamp(s, 0.0, 1.0);

  ChannelDecomposition out;
  out.n = n;
  if (s > kDropProb) {
    out.branches.push_back(ChannelBranch::make_unitary(
        s, optimal_unitary_decomposition(gate_id, phi, targets, n)));
  }
  if (1.0 - s > kDropProb) {
    out.branches.push_back(ChannelBranch::make_unitary(
        1.0 - s, optimal_unitary_decomposition(gate_id, kPi - phi, targets, n)));
  }
  out.equimagical = true;
  out.optimal_flag =
      (axis == "y" || (axis == "zz" && targets[1] == targets[0] + 1))
          ? ChannelFlag::ExtentOptimal
          : ChannelFlag::Feasible;
  out.cost = accounted_cost(out);
  return out;
}

ChannelDecomposition adaptive_nzz_single_z(double theta, double p,
                                           NoisyQubit noisy_qubit,
                                           std::vector<int> targets, int n) {
  check_probability(p);
  default_targets(targets, n, 2);
  if (targets[0] < 0 || targets[1] >= n || targets[0] >= targets[1]) {
    throw InvalidArgument("channel targets must be ascending and in range");
  }
  const int measured =
      noisy_qubit == NoisyQubit::First ? targets[0] : targets[1];
  const int rotated =
      noisy_qubit == NoisyQubit::First ? targets[1] : targets[0];

  ChannelDecomposition out;
  out.n = n;
  if (1.0 - 2.0 * p > kDropProb) {
    out.branches.push_back(ChannelBranch::make_unitary(
        1.0 - 2.0 * p,
        optimal_unitary_decomposition("rzz", theta, targets, n)));
  }
  if (2.0 * p > kDropProb) {
    AdaptiveBranch adaptive;
    adaptive.weight = 2.0 * p;
    for (int outcome = 0; outcome < 2; ++outcome) {
      AdaptiveKraus k;
      k.projector = {measured, outcome};
      k.then_circuit.n = n;
      k.then_circuit.gates.push_back(
          GG::named("rz", {rotated}, {outcome == 0 ? theta : -theta}));
      adaptive.kraus.push_back(std::move(k));
    }
    out.branches.push_back(ChannelBranch::make_adaptive(std::move(adaptive)));
  }
  out.equimagical = false;
  out.optimal_flag = ChannelFlag::AugmentedFeasible;
  out.cost = accounted_cost(out);
  return out;
}

ChannelDecomposition naive_single_z_rzz(double theta, double p,
                                        NoisyQubit noisy_qubit,
                                        std::vector<int> targets, int n) {
  check_probability(p);
  default_targets(targets, n, 2);
  const int noisy =
      noisy_qubit == NoisyQubit::First ? targets[0] : targets[1];

  ChannelDecomposition out;
  out.n = n;
  UnitaryDecomposition base =
      optimal_unitary_decomposition("rzz", theta, targets, n);
  if (p < 1.0 - kDropProb) {
    out.branches.push_back(ChannelBranch::make_unitary(1.0 - p, base));
  }
  if (p > kDropProb) {
    out.branches.push_back(ChannelBranch::make_unitary(
        p, with_pauli_z_after(std::move(base), noisy)));
  }
  // Both branches carry the extent of the underlying rotation: composing
  // with a free Pauli does not change the l1 norm.
  out.equimagical = true;
  out.optimal_flag = ChannelFlag::Feasible;
  out.cost = accounted_cost(out);
  return out;
}

ChannelDecomposition general_dephasing_decomposition(double theta, double p,
                                                     bool allow_adaptive,
                                                     std::vector<int> targets,
                                                     int n) {
  check_probability(p);
  default_targets(targets, n, 2);

  const ChannelDecomposition first =
      allow_adaptive ? adaptive_nzz_single_z(theta, p, NoisyQubit::First,
                                             targets, n)
                     : naive_single_z_rzz(theta, p, NoisyQubit::First,
                                          targets, n);
  const ChannelDecomposition second =
      allow_adaptive ? adaptive_nzz_single_z(theta, p, NoisyQubit::Second,
                                             targets, n)
                     : naive_single_z_rzz(theta, p, NoisyQubit::Second,
                                          targets, n);
  const ChannelDecomposition both =
      equimagical_noisy_rotation("zz", theta, p, targets, n);

  ChannelDecomposition out;
  out.n = n;
  for (const ChannelDecomposition* comp : {&first, &second, &both}) {
    for (ChannelBranch b : comp->branches) {
      if (b.kind == ChannelBranch::Kind::Unitary) {
        b.unitary.probability /= 3.0;
      } else {
        b.adaptive.weight /= 3.0;
      }
      out.branches.push_back(std::move(b));
    }
  }
  out.equimagical = false;
  out.optimal_flag =
      allow_adaptive ? ChannelFlag::AugmentedFeasible : ChannelFlag::Feasible;
  out.cost = accounted_cost(out);
  return out;
}

GaussianCircuit adjoint_gaussian_circuit(const GaussianCircuit& c) {
  GaussianCircuit out;
  out.n = c.n;
  out.phase = std::conj(c.phase);
  out.gates.reserve(c.gates.size());
  for (auto it = c.gates.rbegin(); it != c.gates.rend(); ++it) {
    GG g = *it;
    switch (g.kind) {
      case GG::Kind::TwoMajoranaRotation:
        g.theta = -g.theta;
        break;
      case GG::Kind::SingleMajorana:
        break;  // Hermitian and unitary
      case GG::Kind::NamedMatchgate:
        if (g.params.size() == 1) {
          g.params[0] = -g.params[0];
        } else if (!g.params.empty()) {
          throw InvalidArgument(
              "adjoint_gaussian_circuit: unsupported multi-parameter gate");
        }
        // parameterless named gates (x, y, z, h, fswap) are self-adjoint
        break;
    }
    out.gates.push_back(std::move(g));
  }
  return out;
}

FnlDecomposition fnl_decomposition(const UnitaryDecomposition& u_decomp) {
  if (u_decomp.terms.empty()) {
    throw InvalidArgument("fnl_decomposition: empty decomposition");
  }
  // Fold each coefficient's phase into its word so the dyad weights are the
  // positive products of magnitudes.
  std::vector<GaussianCircuit> words;
  std::vector<double> mags;
  words.reserve(u_decomp.terms.size());
  for (const auto& t : u_decomp.terms) {
    const double m = std::abs(t.coeff);
    if (m <= 1e-14) continue;
    GaussianCircuit w = t.circuit;
    w.phase *= t.coeff / m;
    words.push_back(std::move(w));
    mags.push_back(m);
  }

  FnlDecomposition out;
  out.n = u_decomp.n;
  out.l1 = 0.0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    for (std::size_t j = 0; j < words.size(); ++j) {
      FnlTerm term;
      term.q = mags[i] * mags[j];
      term.left = words[i];
      term.right = adjoint_gaussian_circuit(words[j]);
      out.l1 += term.q;
      out.terms.push_back(std::move(term));
    }
  }
  return out;
}

ChannelDecomposition resolve_channel(const ChannelDescriptor& d, int n) {
  if (d.kind == "unitary") {
    const int arity =
        (d.gate_id == "hadamard" || d.gate_id == "ry" || d.gate_id == "rx")
            ? 1
            : 2;
    std::vector<int> targets = d.targets;
    int width = n;
    default_targets(targets, width, arity);
    ChannelDecomposition out;
    out.n = width;
    UnitaryDecomposition u =
        optimal_unitary_decomposition(d.gate_id, d.theta, targets, width);
    out.equimagical = true;
    out.optimal_flag =
        u.optimal ? ChannelFlag::ExtentOptimal : ChannelFlag::Feasible;
    out.cost = u.l1_norm * u.l1_norm;
    out.branches.push_back(ChannelBranch::make_unitary(1.0, std::move(u)));
    return out;
  }
  if (d.kind == "noisy_rot") {
    if (!d.theta.has_value()) {
      throw InvalidArgument("noisy_rot requires theta");
    }
    return equimagical_noisy_rotation(d.axis, *d.theta, d.p, d.targets, n);
  }
  if (d.kind == "noisy_rzz") {
    if (!d.theta.has_value()) {
      throw InvalidArgument("noisy_rzz requires theta");
    }
    if (d.noise == "zz") {
      return equimagical_noisy_rotation("zz", *d.theta, d.p, d.targets, n);
    }
    if (d.noise == "z1" || d.noise == "z2") {
      const NoisyQubit q =
          d.noise == "z1" ? NoisyQubit::First : NoisyQubit::Second;
      return d.adaptive
                 ? adaptive_nzz_single_z(*d.theta, d.p, q, d.targets, n)
                 : naive_single_z_rzz(*d.theta, d.p, q, d.targets, n);
    }
    if (d.noise == "general") {
      return general_dephasing_decomposition(*d.theta, d.p, d.adaptive,
                                             d.targets, n);
    }
    throw InvalidArgument("unknown noise kind '" + d.noise + "'");
  }
  throw InvalidArgument("unknown channel kind '" + d.kind + "'");
}

DecompositionOracle::DecompositionOracle(int n, std::uint64_t seed)
    : n_(n), seed_(seed) {}

int DecompositionOracle::register_channel(const ChannelDescriptor& d) {
  table_.push_back(resolve_channel(d, n_));
  return static_cast<int>(table_.size()) - 1;
}

const ChannelDecomposition& DecompositionOracle::channel(int key) const {
  if (key < 0 || key >= size()) {
    throw InvalidArgument("unregistered channel key");
  }
  return table_[static_cast<std::size_t>(key)];
}

double DecompositionOracle::cost(int key) const { return channel(key).cost; }

double DecompositionOracle::total_cost() const {
  double prod = 1.0;
  for (const auto& c : table_) prod *= c.cost;
  return prod;
}

const ChannelBranch& DecompositionOracle::sample(
    int key, std::uint64_t draw_index) const {
  const ChannelDecomposition& c = channel(key);
  if (c.branches.empty()) {
    throw InvalidState("channel has no branches");
  }
  if (c.branches.size() == 1) return c.branches.front();
  CounterRng rng(seed_, draw_index, static_cast<std::uint64_t>(key),
                 kOracleStream);
  std::vector<double> weights;
  weights.reserve(c.branches.size());
  for (const auto& b : c.branches) weights.push_back(b.weight());
  return c.branches[rng.pick_weighted(weights)];
}

}  // namespace fgsim
