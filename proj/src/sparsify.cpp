#include "fgsim/sparsify.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "fgsim/rng.hpp"

namespace fgsim {

namespace {

constexpr std::uint64_t kSparsifyStream = 0x73707273ULL;

std::vector<double> coefficient_weights(const std::vector<StateTerm>& terms) {
  std::vector<double> w(terms.size());
  for (std::size_t j = 0; j < terms.size(); ++j) w[j] = std::abs(terms[j].coeff);
  return w;
}

std::vector<double> coefficient_weights(
    const std::vector<DecompositionTerm>& terms) {
  std::vector<double> w(terms.size());
  for (std::size_t j = 0; j < terms.size(); ++j) w[j] = std::abs(terms[j].coeff);
  return w;
}

Complex unit_phase(Complex c) {
  const double mag = std::abs(c);
  if (mag <= 0.0) throw InvalidState("cannot take the phase of a zero coefficient");
  return c / mag;
}

void check_rank(int k) {
  if (k < 1) throw InvalidArgument("sample count k must be at least 1, got " +
                                   std::to_string(k));
}

}  // namespace

SparseSuperposition sparsify_state(const StateDecomposition& decomp, int k,
                                   std::uint64_t seed) {
  check_rank(k);
  if (decomp.terms.empty()) throw InvalidArgument("cannot sparsify an empty decomposition");

  const std::vector<double> weights = coefficient_weights(decomp.terms);
  double l1 = 0.0;
  for (double w : weights) l1 += w;
  if (l1 <= 0.0) throw InvalidArgument("decomposition has zero total weight");

  SparseSuperposition out;
  out.n = decomp.n;
  out.k = k;
  out.terms.reserve(static_cast<std::size_t>(k));
  const double amp = l1 / static_cast<double>(k);
  for (int m = 0; m < k; ++m) {
    CounterRng rng(seed, static_cast<std::uint64_t>(m), 0, kSparsifyStream);
    const std::size_t j = rng.pick_weighted(weights);
    StateTerm term;
    term.coeff = amp * unit_phase(decomp.terms[j].coeff);
    term.state = decomp.terms[j].state;
    out.terms.push_back(std::move(term));
  }
  return out;
}

SparsifiedCircuitSet sparsify_circuit(
    const std::vector<UnitaryDecomposition>& decomps, int k,
    std::uint64_t seed) {
  check_rank(k);
  if (decomps.empty()) throw InvalidArgument("circuit has no decomposed gates");
  const int n = decomps.front().n;
  double l1_product = 1.0;
  std::vector<std::vector<double>> weights(decomps.size());
  for (std::size_t t = 0; t < decomps.size(); ++t) {
    if (decomps[t].n != n)
      throw InvalidArgument("decomposed gates act on inconsistent register sizes");
    if (decomps[t].terms.empty())
      throw InvalidArgument("gate " + std::to_string(t) + " has an empty decomposition");
    weights[t] = coefficient_weights(decomps[t].terms);
    l1_product *= decomps[t].l1_norm;
  }
  if (l1_product <= 0.0) throw InvalidArgument("decomposition has zero total weight");

  SparsifiedCircuitSet out;
  out.n = n;
  out.scale = l1_product / static_cast<double>(k);
  out.circuits.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    GaussianCircuit word;
    word.n = n;
    for (std::size_t t = 0; t < decomps.size(); ++t) {
      CounterRng rng(seed, static_cast<std::uint64_t>(i),
                     static_cast<std::uint64_t>(t), kSparsifyStream);
      const std::size_t j = rng.pick_weighted(weights[t]);
      const DecompositionTerm& term = decomps[t].terms[j];
      word.phase *= unit_phase(term.coeff) * term.circuit.phase;
      word.gates.insert(word.gates.end(), term.circuit.gates.begin(),
                        term.circuit.gates.end());
    }
    out.circuits.push_back(std::move(word));
  }
  return out;
}

AdaptiveCircuitStep AdaptiveCircuitStep::make_unitary(UnitaryDecomposition u) {
  AdaptiveCircuitStep step;
  step.kind = Kind::Unitary;
  step.unitary = std::move(u);
  return step;
}

AdaptiveCircuitStep AdaptiveCircuitStep::make_adaptive(AdaptiveBranch a) {
  AdaptiveCircuitStep step;
  step.kind = Kind::Adaptive;
  step.adaptive = std::move(a);
  return step;
}

SparsifiedKrausPattern sparsify_adaptive(
    const std::vector<AdaptiveCircuitStep>& steps, int k, std::uint64_t seed) {
  check_rank(k);
  if (steps.empty()) throw InvalidArgument("adaptive circuit has no steps");

  int n = 0;
  double l1_product = 1.0;
  std::vector<const UnitaryDecomposition*> unitary_steps;
  for (const AdaptiveCircuitStep& step : steps) {
    if (step.kind == AdaptiveCircuitStep::Kind::Unitary) {
      if (step.unitary.terms.empty())
        throw InvalidArgument("unitary step has an empty decomposition");
      if (n == 0) n = step.unitary.n;
      if (step.unitary.n != n)
        throw InvalidArgument("steps act on inconsistent register sizes");
      unitary_steps.push_back(&step.unitary);
      l1_product *= step.unitary.l1_norm;
    } else {
      if (step.adaptive.kraus.empty())
        throw InvalidArgument("adaptive step has no Kraus operators");
    }
  }
  if (l1_product <= 0.0) throw InvalidArgument("decomposition has zero total weight");

  SparsifiedKrausPattern out;
  out.n = n;
  out.k = k;
  out.global_scale = l1_product / static_cast<double>(k);
  out.skeleton = &steps;
  std::vector<std::vector<double>> weights(unitary_steps.size());
  for (std::size_t t = 0; t < unitary_steps.size(); ++t)
    weights[t] = coefficient_weights(unitary_steps[t]->terms);

  out.gate_choices.assign(static_cast<std::size_t>(k),
                          std::vector<GateChoice>(unitary_steps.size()));
  for (int i = 0; i < k; ++i) {
    for (std::size_t t = 0; t < unitary_steps.size(); ++t) {
      CounterRng rng(seed, static_cast<std::uint64_t>(i),
                     static_cast<std::uint64_t>(t), kSparsifyStream);
      const std::size_t j = rng.pick_weighted(weights[t]);
      GateChoice& choice = out.gate_choices[static_cast<std::size_t>(i)][t];
      choice.term = static_cast<int>(j);
      choice.phase = unit_phase(unitary_steps[t]->terms[j].coeff);
    }
  }
  return out;
}

double c_tilde_from_overlaps(const std::vector<double>& coeff_mags,
                             const std::vector<Complex>& summed_overlaps) {
  if (coeff_mags.size() != summed_overlaps.size())
    throw InvalidArgument("coefficient and overlap lists differ in length");
  if (coeff_mags.empty()) throw InvalidArgument("empty decomposition");
  double l1 = 0.0;
  for (double w : coeff_mags) l1 += w;
  double acc = 0.0;
  for (std::size_t w = 0; w < coeff_mags.size(); ++w)
    acc += coeff_mags[w] * std::norm(summed_overlaps[w]);
  return l1 * acc;
}

double c_tilde(const StateDecomposition& decomp) {
  const std::size_t r = decomp.terms.size();
  if (r == 0) throw InvalidArgument("empty decomposition");
  std::vector<double> mags(r);
  std::vector<Complex> summed(r, Complex(0.0, 0.0));
  for (std::size_t j = 0; j < r; ++j) {
    mags[j] = std::abs(decomp.terms[j].coeff);
    for (std::size_t i = 0; i < r; ++i) {
      // <psi|phi_j> with |psi> = sum_i c_i |phi_i>.
      summed[j] += std::conj(decomp.terms[i].coeff) *
                   overlap(decomp.terms[i].state, decomp.terms[j].state);
    }
  }
  return c_tilde_from_overlaps(mags, summed);
}

std::int64_t choose_rank(double e_cost, double delta,
                         std::optional<double> c_tilde_value, double l1sq) {
  if (!(delta > 0.0)) throw InvalidArgument("target precision must be positive");
  if (c_tilde_value.has_value()) {
    if (!(l1sq > 0.0)) throw InvalidArgument("squared 1-norm must be positive");
    const double excess = *c_tilde_value - 1.0;
    const double critical = 8.0 * excess / l1sq;
    if (delta <= critical) {
      const double base = 4.0 * l1sq * (excess / (delta * l1sq) + 1.0 / delta);
      return static_cast<std::int64_t>(std::ceil(base)) + 1;
    }
  }
  if (!(e_cost > 0.0)) throw InvalidArgument("extent budget must be positive");
  return static_cast<std::int64_t>(std::ceil(4.0 * e_cost / delta));
}

}  // namespace fgsim
