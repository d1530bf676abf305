#include "fgsim/norms.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fgsim/gaussian.hpp"
#include "fgsim/rng.hpp"

namespace fgsim {

namespace {

constexpr std::uint64_t kFastNormStream = 0x666E6F726DULL;
constexpr std::int64_t kMaxTotalSamples = std::int64_t(1) << 27;

// Vose alias table: O(k) build, one uniform and O(1) work per draw.  The
// sampling loop is the hot path, so a linear scan per draw is not an option.
struct AliasTable {
  std::vector<double> threshold;
  std::vector<std::size_t> alias;

  AliasTable(const std::vector<double>& w, double total) {
    const std::size_t k = w.size();
    threshold.assign(k, 1.0);
    alias.resize(k);
    std::vector<double> scaled(k);
    std::vector<std::size_t> small, large;
    for (std::size_t i = 0; i < k; ++i) {
      alias[i] = i;
      scaled[i] = w[i] * static_cast<double>(k) / total;
      (scaled[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
      const std::size_t s = small.back();
      const std::size_t l = large.back();
      small.pop_back();
      threshold[s] = scaled[s];
      alias[s] = l;
      scaled[l] -= 1.0 - scaled[s];
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
  }

  std::size_t draw(CounterRng& rng) const {
    const double x = rng.uniform() * static_cast<double>(threshold.size());
    std::size_t i = static_cast<std::size_t>(x);
    if (i >= threshold.size()) i = threshold.size() - 1;
    return (x - static_cast<double>(i)) < threshold[i] ? i : alias[i];
  }
};

// Row products s_a = <g_a|Psi> = sum_b c_b <g_a|g_b>; k^2 overlaps.
std::vector<Complex> row_products(const SparseSuperposition& sup) {
  const std::size_t k = sup.terms.size();
  std::vector<Complex> s(k, Complex(0.0, 0.0));
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      s[a] += sup.terms[b].coeff *
              overlap(sup.terms[a].state, sup.terms[b].state);
    }
  }
  return s;
}

}  // namespace

double exact_norm(const SparseSuperposition& sup) {
  if (sup.terms.empty())
    throw InvalidArgument("cannot take the norm of an empty superposition");
  const std::vector<Complex> s = row_products(sup);
  Complex total(0.0, 0.0);
  for (std::size_t a = 0; a < sup.terms.size(); ++a)
    total += std::conj(sup.terms[a].coeff) * s[a];
  if (std::abs(total.imag()) > 1e-9)
    throw InvalidState("squared norm has non-real residue " +
                       std::to_string(total.imag()));
  return std::max(0.0, total.real());
}

NormEstimate fast_norm(const SparseSuperposition& sup, double epsilon,
                       double p_fail, std::uint64_t seed, double norm_floor) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    throw InvalidArgument("epsilon must lie in (0, 1)");
  if (!(p_fail > 0.0) || !(p_fail < 1.0))
    throw InvalidArgument("failure probability must lie in (0, 1)");
  if (!(norm_floor > 0.0))
    throw InvalidArgument("norm floor must be positive");
  if (sup.terms.empty())
    throw InvalidArgument("cannot take the norm of an empty superposition");

  NormEstimate out;
  out.epsilon = epsilon;
  out.p_fail = p_fail;

  if (sup.terms.size() == 1) {
    // Zero-variance estimator: a single term is its own norm.
    out.value = exact_norm(sup);
    out.samples_used = 1;
    out.multiplicative = out.value >= norm_floor;
    return out;
  }

  std::vector<double> weights(sup.terms.size());
  double l1 = 0.0;
  for (std::size_t a = 0; a < sup.terms.size(); ++a) {
    weights[a] = std::abs(sup.terms[a].coeff);
    l1 += weights[a];
  }
  if (l1 <= 0.0) throw InvalidArgument("superposition has zero total weight");

  const std::vector<Complex> s = row_products(sup);
  double max_row = 0.0;
  for (const Complex& v : s) max_row = std::max(max_row, std::norm(v));
  const double variance_proxy = l1 * l1 * max_row;

  const double batch_real =
      variance_proxy / (3.0 * epsilon * epsilon * norm_floor * norm_floor);
  const std::int64_t batch =
      std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(batch_real)));
  const std::int64_t medians = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::ceil(8.0 * std::log(1.0 / p_fail))));
  if (batch_real > static_cast<double>(kMaxTotalSamples) ||
      medians * batch > kMaxTotalSamples) {
    throw ResourceLimit(
        "fast_norm sample budget exceeds 2^27; the norm floor is far below "
        "the state's scale");
  }

  // Per-term single-sample values y_a; drawing a term then costs O(1).
  std::vector<double> y(sup.terms.size());
  for (std::size_t a = 0; a < sup.terms.size(); ++a) {
    if (weights[a] == 0.0) {
      y[a] = 0.0;  // never drawn
      continue;
    }
    const Complex phase = std::conj(sup.terms[a].coeff) / weights[a];
    y[a] = l1 * (phase * s[a]).real();
  }

  const AliasTable table(weights, l1);
  std::vector<double> means(static_cast<std::size_t>(medians), 0.0);
  std::int64_t index = 0;
  for (std::int64_t b = 0; b < medians; ++b) {
    double acc = 0.0;
    for (std::int64_t i = 0; i < batch; ++i, ++index) {
      CounterRng rng(seed, static_cast<std::uint64_t>(index), 0,
                     kFastNormStream);
      acc += y[table.draw(rng)];
    }
    means[static_cast<std::size_t>(b)] = acc / static_cast<double>(batch);
  }
  std::sort(means.begin(), means.end());
  const std::size_t mid = means.size() / 2;
  const double median = (means.size() % 2 == 1)
                            ? means[mid]
                            : 0.5 * (means[mid - 1] + means[mid]);

  out.value = std::max(0.0, median);
  out.samples_used = medians * batch;
  out.multiplicative = out.value >= norm_floor;
  return out;
}

}  // namespace fgsim
