#include "fgsim/gaussian.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <bit>
#include <cmath>
#include <utility>
#include <vector>

#include "fgsim/pfaffian.hpp"

namespace fgsim {
namespace {

constexpr Complex kI(0.0, 1.0);
using RowVec = Eigen::RowVectorXd;

// Minimum allowed pivot probability before re-anchoring.  The greedy anchor
// always reaches 2^-n, so keeping an 8x slack below that avoids thrashing
// while bounding the conditioning of the pinned linear solves.
double pivot_health_floor(int n) {
  return std::max(std::ldexp(1.0, -n) * 0.125, 1e-12);
}

// Probabilities below this are treated as an exactly impossible outcome.
constexpr double kZeroProbability = 1e-14;

inline int bit_of(std::uint64_t mask, int q) {
  return static_cast<int>((mask >> q) & 1ULL);
}

void check_state(const PhasedGaussianState& s) {
  if (s.n < 1 || s.n > 64) {
    throw InvalidArgument("gaussian state: qubit count out of range");
  }
  if (s.gamma.rows() != 2 * s.n || s.gamma.cols() != 2 * s.n) {
    throw InvalidArgument("gaussian state: covariance has wrong shape");
  }
}

void check_qubit(const PhasedGaussianState& s, int q) {
  if (q < 0 || q >= s.n) throw InvalidArgument("qubit index out of range");
}

PhasedGaussianState annihilated_state(const PhasedGaussianState& like) {
  PhasedGaussianState out = like;
  out.pivot_amp = Complex(0.0, 0.0);
  out.norm_sq = 0.0;
  return out;
}

// In-place covariance update for projecting qubit q onto outcome m with
// probability p > 0; afterwards the measured pair is pinned at (-1)^m and
// decoupled from every other mode.
void projection_update_inplace(Mat& g, int q, int m, double p) {
  const int a = 2 * q, b = 2 * q + 1;
  const double eps = (m == 0) ? 1.0 : -1.0;
  const Vec u = g.col(a);
  const Vec v = g.col(b);
  g.noalias() += (eps / (2.0 * p)) * (v * u.transpose() - u * v.transpose());
  g.row(a).setZero();
  g.row(b).setZero();
  g.col(a).setZero();
  g.col(b).setZero();
  g(a, b) = eps;
  g(b, a) = -eps;
}

// Shared sweep for greedy anchoring and configuration probabilities.
// When `forced` is null the likelier outcome is taken at each qubit.
double conditional_sweep(const CovarianceMatrix& gamma, int n,
                         const std::uint64_t* forced, std::uint64_t* chosen) {
  Mat g = gamma;
  double prob = 1.0;
  std::uint64_t mask = 0;
  for (int q = 0; q < n; ++q) {
    const double gz = std::clamp(g(2 * q, 2 * q + 1), -1.0, 1.0);
    const int m = (forced != nullptr) ? bit_of(*forced, q) : (gz >= 0.0 ? 0 : 1);
    const double eps = (m == 0) ? 1.0 : -1.0;
    const double p = std::clamp((1.0 + eps * gz) / 2.0, 0.0, 1.0);
    prob *= p;
    if (p <= 0.0) return 0.0;
    mask |= static_cast<std::uint64_t>(m) << q;
    projection_update_inplace(g, q, m, p);
  }
  if (chosen != nullptr) *chosen = mask;
  return prob;
}

// ---------------------------------------------------------------------------
// Anchored (pinned) machinery.
//
// With pivot configuration x, define mode operators b_q that annihilate |x>:
// b_q = a_q for x_q = 0 and b_q = a_q^+ for x_q = 1, where
// a_q = (c_{2q} + i c_{2q+1}) / 2.  Any Gaussian vector v with <x|v> != 0 is
//   v = <x|v> * exp((1/2) sum_{pq} G_{pq} b_p^+ b_q^+) |x>
// for an antisymmetric n x n matrix G.  From the annihilation condition
// (b_p - sum_q G_{pq} b_q^+) v = 0 and the state's second moments
// <c_j c_k> = delta_{jk} + i Gamma_{jk} one gets
//   G = -S1 S2^{-T},  S1_{pq} = <b_p b_q>,  S2_{pq} = <b_p b_q^+>.
// The anchored pair matrix W_{jk} = <x| c_j c_k |v> / <x|v> (j != k) follows
// linearly from G, and anchored values of longer Majorana words are
// Pfaffians of sub-blocks of W.
// ---------------------------------------------------------------------------

struct PinnedAnchor {
  int n = 0;
  std::uint64_t x = 0;
  Complex alpha;  // <x|v>
  CMat w;         // anchored pair matrix, 2n x 2n, antisymmetric
};

// b-mode coordinate change: beta = xi * c with beta = (b, b^+).
CMat pinned_xi(int n, std::uint64_t x) {
  CMat xi = CMat::Zero(2 * n, 2 * n);
  for (int q = 0; q < n; ++q) {
    const double s = bit_of(x, q) ? -1.0 : 1.0;
    xi(q, 2 * q) = 0.5;
    xi(q, 2 * q + 1) = 0.5 * s * kI;
    xi(n + q, 2 * q) = 0.5;
    xi(n + q, 2 * q + 1) = -0.5 * s * kI;
  }
  return xi;
}

// Inverse coordinate change: c = omega * beta.
CMat pinned_omega(int n, std::uint64_t x) {
  CMat om = CMat::Zero(2 * n, 2 * n);
  for (int q = 0; q < n; ++q) {
    const double s = bit_of(x, q) ? -1.0 : 1.0;
    om(2 * q, q) = 1.0;
    om(2 * q, n + q) = 1.0;
    om(2 * q + 1, q) = -s * kI;
    om(2 * q + 1, n + q) = s * kI;
  }
  return om;
}

// Thouless matrix of the state relative to configuration x.
CMat pinned_thouless(const CovarianceMatrix& gamma, int n, std::uint64_t x) {
  const CMat xi = pinned_xi(n, x);
  CMat c = kI * gamma.cast<Complex>();
  c.diagonal().array() += Complex(1.0, 0.0);
  const CMat b = xi * c * xi.transpose();
  const CMat s1 = b.topLeftCorner(n, n);
  const CMat s2 = b.topRightCorner(n, n);
  Eigen::FullPivLU<CMat> lu(s2);
  if (!lu.isInvertible()) {
    throw InvalidState("anchor configuration is degenerate for this state");
  }
  CMat g = lu.solve(s1).transpose();
  g = (0.5 * (g - g.transpose())).eval();
  return g;
}

PinnedAnchor make_anchor(const PhasedGaussianState& s) {
  PinnedAnchor a;
  a.n = s.n;
  a.x = s.pivot;
  a.alpha = s.pivot_amp;
  const CMat g = pinned_thouless(s.gamma, s.n, s.pivot);
  const CMat om = pinned_omega(s.n, s.pivot);
  CMat p = CMat::Zero(2 * s.n, 2 * s.n);
  p.topLeftCorner(s.n, s.n) = -g;
  p.topRightCorner(s.n, s.n) = CMat::Identity(s.n, s.n);
  CMat w = om * p * om.transpose();
  w = (0.5 * (w - w.transpose())).eval();
  w.diagonal().setZero();
  a.w = std::move(w);
  return a;
}

// Canonical ordering of a Majorana word: sorts indices, tracking the sign of
// adjacent transpositions and cancelling equal neighbours (c^2 = 1).
std::pair<int, std::vector<int>> reduce_word(const std::vector<int>& word) {
  int sign = 1;
  std::vector<int> out;
  out.reserve(word.size());
  for (int v : word) {
    out.push_back(v);
    std::size_t pos = out.size() - 1;
    while (pos > 0 && out[pos - 1] > out[pos]) {
      std::swap(out[pos - 1], out[pos]);
      sign = -sign;
      --pos;
    }
    if (pos > 0 && out[pos - 1] == out[pos]) {
      out.erase(out.begin() + static_cast<std::ptrdiff_t>(pos) - 1,
                out.begin() + static_cast<std::ptrdiff_t>(pos) + 1);
    }
  }
  return {sign, out};
}

// Applies the Majorana word (operator order, so the last entry acts first)
// to basis configuration z, returning the scalar it produces; z is updated
// to the image configuration.
Complex apply_word_to_config(const std::vector<int>& word, std::uint64_t* z) {
  Complex phase(1.0, 0.0);
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    const int q = *it / 2;
    const std::uint64_t low = *z & ((1ULL << q) - 1ULL);
    const double string_sign = (std::popcount(low) & 1) ? -1.0 : 1.0;
    if (*it % 2 == 0) {
      phase *= string_sign;
    } else {
      phase *= string_sign * (bit_of(*z, q) ? -kI : kI);
    }
    *z ^= 1ULL << q;
  }
  return phase;
}

// <y| c_{L1} ... c_{Lm} |v> computed from the anchor.
Complex anchored_matrix_element(const PinnedAnchor& a, std::uint64_t y,
                                const std::vector<int>& word) {
  const std::uint64_t diff = y ^ a.x;
  std::vector<int> connector;
  for (int q = 0; q < a.n; ++q) {
    if (bit_of(diff, q)) connector.push_back(2 * q);
  }
  // |y> = N|x> / nu with N the ascending connector word.
  std::uint64_t z = a.x;
  const Complex nu = apply_word_to_config(connector, &z);
  if (z != y) throw InvalidState("anchored element: connector mismatch");
  // <y|M|v> = (1/conj(nu)) <x| N^+ M |v>; N^+ is the descending connector.
  std::vector<int> full(connector.rbegin(), connector.rend());
  full.insert(full.end(), word.begin(), word.end());
  const auto [sign, sorted] = reduce_word(full);
  if (sorted.size() % 2 != 0) return Complex(0.0, 0.0);
  Complex pf(1.0, 0.0);
  if (!sorted.empty()) {
    const auto k = static_cast<Eigen::Index>(sorted.size());
    CMat sub(k, k);
    for (Eigen::Index r = 0; r < k; ++r)
      for (Eigen::Index c = 0; c < k; ++c)
        sub(r, c) = a.w(sorted[static_cast<std::size_t>(r)],
                        sorted[static_cast<std::size_t>(c)]);
    pf = pfaffian(sub);
  }
  return static_cast<double>(sign) * a.alpha * pf / std::conj(nu);
}

// Covariance update for the rotation exp((theta/2) c_j c_k).
void rotate_covariance_inplace(Mat& g, int j, int k, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  const RowVec rj = g.row(j), rk = g.row(k);
  g.row(j) = c * rj + s * rk;
  g.row(k) = -s * rj + c * rk;
  const Vec cj = g.col(j), ck = g.col(k);
  g.col(j) = c * cj + s * ck;
  g.col(k) = -s * cj + c * ck;
  g(j, j) = 0.0;
  g(k, k) = 0.0;
  g(k, j) = -g(j, k);
}

PhasedGaussianState evolve_rotation(const PhasedGaussianState& s, int j, int k,
                                    double theta) {
  PhasedGaussianState out = s;
  rotate_covariance_inplace(out.gamma, j, k, theta);
  const double ch = std::cos(theta / 2), sh = std::sin(theta / 2);
  const PinnedAnchor a = make_anchor(s);
  const Complex alpha_new = s.pivot_amp * (ch + sh * a.w(j, k));
  if (std::norm(alpha_new) >=
      pivot_health_floor(s.n) * std::max(out.norm_sq, 1e-300)) {
    out.pivot_amp = alpha_new;
    return out;
  }
  std::uint64_t y = 0;
  conditional_sweep(out.gamma, out.n, nullptr, &y);
  out.pivot = y;
  out.pivot_amp = ch * anchored_matrix_element(a, y, {}) +
                  sh * anchored_matrix_element(a, y, {j, k});
  return out;
}

PhasedGaussianState evolve_majorana(const PhasedGaussianState& s, int m) {
  PhasedGaussianState out = s;
  // Conjugation by c_m negates every mode but m, so only entries coupling
  // m to the rest change sign.
  out.gamma.row(m) *= -1.0;
  out.gamma.col(m) *= -1.0;
  const PinnedAnchor a = make_anchor(s);
  const std::uint64_t y0 = s.pivot ^ (1ULL << (m / 2));
  const Complex alpha0 = anchored_matrix_element(a, y0, {m});
  if (std::norm(alpha0) >=
      pivot_health_floor(s.n) * std::max(out.norm_sq, 1e-300)) {
    out.pivot = y0;
    out.pivot_amp = alpha0;
    return out;
  }
  std::uint64_t y = 0;
  conditional_sweep(out.gamma, out.n, nullptr, &y);
  out.pivot = y;
  out.pivot_amp = anchored_matrix_element(a, y, {m});
  return out;
}

}  // namespace

GaussianGenerator GaussianGenerator::rotation(MajoranaIndex j, MajoranaIndex k,
                                              double theta) {
  GaussianGenerator g;
  g.kind = Kind::TwoMajoranaRotation;
  g.j = j;
  g.k = k;
  g.theta = theta;
  return g;
}

GaussianGenerator GaussianGenerator::majorana(MajoranaIndex j) {
  GaussianGenerator g;
  g.kind = Kind::SingleMajorana;
  g.j = j;
  return g;
}

GaussianGenerator GaussianGenerator::named(std::string id,
                                           std::vector<int> targets,
                                           std::vector<double> params) {
  GaussianGenerator g;
  g.kind = Kind::NamedMatchgate;
  g.id = std::move(id);
  g.targets = std::move(targets);
  g.params = std::move(params);
  return g;
}

PhasedGaussianState prepare_basis_state(int n, std::uint64_t bits) {
  if (n < 1 || n > 64) {
    throw InvalidArgument("prepare_basis_state: qubit count out of range");
  }
  PhasedGaussianState s;
  s.n = n;
  s.gamma = Mat::Zero(2 * n, 2 * n);
  for (int q = 0; q < n; ++q) {
    const double z = bit_of(bits, q) ? -1.0 : 1.0;
    s.gamma(2 * q, 2 * q + 1) = z;
    s.gamma(2 * q + 1, 2 * q) = -z;
  }
  s.pivot = (n == 64) ? bits : (bits & ((1ULL << n) - 1ULL));
  s.pivot_amp = Complex(1.0, 0.0);
  s.norm_sq = 1.0;
  return s;
}

PhasedGaussianState prepare_basis_state(const std::string& bits) {
  if (bits.empty()) {
    throw InvalidArgument("prepare_basis_state: empty bit string");
  }
  std::uint64_t mask = 0;
  for (std::size_t q = 0; q < bits.size(); ++q) {
    if (bits[q] == '1') {
      mask |= 1ULL << q;
    } else if (bits[q] != '0') {
      throw InvalidArgument("prepare_basis_state: bits must be over {0,1}");
    }
  }
  return prepare_basis_state(static_cast<int>(bits.size()), mask);
}

GaussianCircuit expand_named_matchgate(int n, const std::string& id,
                                       const std::vector<int>& targets,
                                       const std::vector<double>& params) {
  GaussianCircuit c;
  c.n = n;
  auto one_target = [&]() {
    if (targets.size() != 1) {
      throw InvalidArgument("gate '" + id + "' expects one target");
    }
    const int q = targets[0];
    if (q < 0 || q >= n) throw InvalidArgument("gate target out of range");
    return q;
  };
  auto nn_pair = [&]() {
    if (targets.size() != 2) {
      throw InvalidArgument("gate '" + id + "' expects two targets");
    }
    const int q = targets[0];
    if (q < 0 || q + 1 >= n || targets[1] != q + 1) {
      throw InvalidArgument("gate '" + id +
                            "' acts on an ascending nearest-neighbour pair");
    }
    return q;
  };
  auto one_param = [&]() {
    if (params.size() != 1 || !std::isfinite(params[0])) {
      throw InvalidArgument("gate '" + id + "' expects one finite parameter");
    }
    return params[0];
  };
  auto no_params = [&]() {
    if (!params.empty()) {
      throw InvalidArgument("gate '" + id + "' takes no parameters");
    }
  };
  using GG = GaussianGenerator;
  if (id == "rz") {
    const double t = one_param();
    const int q = one_target();
    c.gates = {GG::rotation(2 * q, 2 * q + 1, -t)};
    return c;
  }
  if (id == "z") {
    no_params();
    const int q = one_target();
    c.gates = {GG::rotation(2 * q, 2 * q + 1, kPi)};
    c.phase = -kI;
    return c;
  }
  if (id == "x" || id == "y") {
    no_params();
    const int q = one_target();
    c.gates.push_back(GG::majorana(id == "x" ? 2 * q : 2 * q + 1));
    Complex phase(1.0, 0.0);
    for (int l = 0; l < q; ++l) {
      c.gates.push_back(GG::rotation(2 * l, 2 * l + 1, kPi));
      phase *= -kI;
    }
    c.phase = phase;
    return c;
  }
  if (id == "rxx_nn") {
    const double t = one_param();
    const int q = nn_pair();
    c.gates = {GG::rotation(2 * q + 1, 2 * q + 2, -t)};
    return c;
  }
  if (id == "ryy_nn") {
    const double t = one_param();
    const int q = nn_pair();
    c.gates = {GG::rotation(2 * q, 2 * q + 3, t)};
    return c;
  }
  if (id == "rxy_nn") {
    const double t = one_param();
    const int q = nn_pair();
    c.gates = {GG::rotation(2 * q + 1, 2 * q + 3, -t)};
    return c;
  }
  if (id == "fswap") {
    no_params();
    const int q = nn_pair();
    c.gates = {GG::rotation(2 * q, 2 * q + 1, kPi),
               GG::rotation(2 * q + 2, 2 * q + 3, kPi),
               GG::rotation(2 * q, 2 * q + 2, kPi / 2),
               GG::rotation(2 * q + 1, 2 * q + 3, kPi / 2),
               GG::rotation(2 * q, 2 * q + 1, kPi)};
    c.phase = kI;
    return c;
  }
  throw InvalidArgument("gate '" + id + "' is not a named matchgate");
}

PhasedGaussianState evolve(const PhasedGaussianState& s,
                           const GaussianGenerator& g) {
  check_state(s);
  if (s.annihilated()) return s;
  switch (g.kind) {
    case GaussianGenerator::Kind::TwoMajoranaRotation: {
      if (g.j < 0 || g.j >= 2 * s.n || g.k < 0 || g.k >= 2 * s.n ||
          g.j == g.k) {
        throw InvalidArgument("rotation: bad Majorana index pair");
      }
      if (!std::isfinite(g.theta)) throw InvalidArgument("rotation: bad angle");
      return evolve_rotation(s, g.j, g.k, g.theta);
    }
    case GaussianGenerator::Kind::SingleMajorana: {
      if (g.j < 0 || g.j >= 2 * s.n) {
        throw InvalidArgument("single Majorana: index out of range");
      }
      return evolve_majorana(s, g.j);
    }
    case GaussianGenerator::Kind::NamedMatchgate: {
      const GaussianCircuit c =
          expand_named_matchgate(s.n, g.id, g.targets, g.params);
      return evolve_circuit_state(s, c);
    }
  }
  throw InvalidArgument("evolve: unknown generator kind");
}

PhasedGaussianState evolve_circuit_state(const PhasedGaussianState& s,
                                         const GaussianCircuit& c) {
  check_state(s);
  if (c.n != s.n) throw InvalidArgument("circuit and state sizes differ");
  PhasedGaussianState out = s;
  for (const auto& g : c.gates) out = evolve(out, g);
  if (!out.annihilated()) {
    out.pivot_amp *= c.phase;
    out.norm_sq *= std::norm(c.phase);
  }
  return out;
}

double measure_probability(const PhasedGaussianState& s, int qubit,
                           int outcome) {
  check_state(s);
  check_qubit(s, qubit);
  if (outcome != 0 && outcome != 1) {
    throw InvalidArgument("measurement outcome must be 0 or 1");
  }
  if (s.annihilated()) {
    throw InvalidState("cannot measure an annihilated state");
  }
  const double gz = std::clamp(s.gamma(2 * qubit, 2 * qubit + 1), -1.0, 1.0);
  const double eps = (outcome == 0) ? 1.0 : -1.0;
  return std::clamp((1.0 + eps * gz) / 2.0, 0.0, 1.0);
}

PhasedGaussianState project(const PhasedGaussianState& s, int qubit,
                            int outcome) {
  check_state(s);
  check_qubit(s, qubit);
  if (outcome != 0 && outcome != 1) {
    throw InvalidArgument("measurement outcome must be 0 or 1");
  }
  if (s.annihilated()) return s;
  const double p = measure_probability(s, qubit, outcome);
  if (p <= kZeroProbability) return annihilated_state(s);
  PhasedGaussianState out = s;
  projection_update_inplace(out.gamma, qubit, outcome, p);
  out.norm_sq = s.norm_sq * p;
  if (bit_of(s.pivot, qubit) == outcome) {
    return out;  // anchor amplitude is untouched by a compatible projector
  }
  const PinnedAnchor a = make_anchor(s);
  std::uint64_t y = 0;
  conditional_sweep(out.gamma, out.n, nullptr, &y);
  out.pivot = y;
  out.pivot_amp = anchored_matrix_element(a, y, {});
  return out;
}

Complex amplitude_at(const PhasedGaussianState& s, std::uint64_t config) {
  check_state(s);
  if (s.annihilated()) return Complex(0.0, 0.0);
  if (config_parity(config ^ s.pivot) != 0) return Complex(0.0, 0.0);
  if (config == s.pivot) return s.pivot_amp;
  const PinnedAnchor a = make_anchor(s);
  return anchored_matrix_element(a, config, {});
}

CVec all_config_amplitudes(const PhasedGaussianState& s, int max_n) {
  check_state(s);
  if (s.n > max_n) {
    throw ResourceLimit("all_config_amplitudes: " + std::to_string(s.n) +
                        " qubits exceeds the dense limit of " +
                        std::to_string(max_n));
  }
  const std::int64_t dim = std::int64_t(1) << s.n;
  CVec out = CVec::Zero(dim);
  if (s.annihilated()) return out;
  const PinnedAnchor a = make_anchor(s);
  for (std::int64_t mask = 0; mask < dim; ++mask) {
    const auto cfg = static_cast<std::uint64_t>(mask);
    if (config_parity(cfg ^ s.pivot) != 0) continue;
    out[mask] = anchored_matrix_element(a, cfg, {});
  }
  return out;
}

double norm_squared(const PhasedGaussianState& s) {
  check_state(s);
  if (s.annihilated()) return 0.0;
  const double p = configuration_probability(s.gamma, s.pivot);
  if (p <= 0.0) throw InvalidState("norm_squared: pivot has zero probability");
  return std::norm(s.pivot_amp) / p;
}

Complex canonical_amplitude(const PhasedGaussianState& s) {
  check_state(s);
  if (s.annihilated()) return Complex(0.0, 0.0);
  std::uint64_t y = 0;
  const double p = conditional_sweep(s.gamma, s.n, nullptr, &y);
  return amplitude_at(s, y) / std::sqrt(p);
}

std::uint64_t greedy_configuration(const CovarianceMatrix& gamma) {
  const int n = static_cast<int>(gamma.rows() / 2);
  std::uint64_t y = 0;
  conditional_sweep(gamma, n, nullptr, &y);
  return y;
}

double configuration_probability(const CovarianceMatrix& gamma,
                                 std::uint64_t config) {
  const int n = static_cast<int>(gamma.rows() / 2);
  return conditional_sweep(gamma, n, &config, nullptr);
}

int config_parity(std::uint64_t config) { return std::popcount(config) & 1; }

std::uint64_t dense_index_of_config(int n, std::uint64_t config) {
  std::uint64_t idx = 0;
  for (int q = 0; q < n; ++q) {
    idx |= static_cast<std::uint64_t>(bit_of(config, q)) << (n - 1 - q);
  }
  return idx;
}

namespace {

// Applies one generator to a mode-rotation matrix from the left.
void accumulate_rotation(Mat& r, const GaussianGenerator& g, int n) {
  switch (g.kind) {
    case GaussianGenerator::Kind::TwoMajoranaRotation: {
      if (g.j < 0 || g.j >= 2 * n || g.k < 0 || g.k >= 2 * n || g.j == g.k) {
        throw InvalidArgument("rotation: bad Majorana index pair");
      }
      const double c = std::cos(g.theta), s = std::sin(g.theta);
      const RowVec rj = r.row(g.j), rk = r.row(g.k);
      r.row(g.j) = c * rj + s * rk;
      r.row(g.k) = -s * rj + c * rk;
      return;
    }
    case GaussianGenerator::Kind::SingleMajorana: {
      if (g.j < 0 || g.j >= 2 * n) {
        throw InvalidArgument("single Majorana: index out of range");
      }
      r *= -1.0;
      r.row(g.j) *= -1.0;
      return;
    }
    case GaussianGenerator::Kind::NamedMatchgate: {
      const GaussianCircuit c =
          expand_named_matchgate(n, g.id, g.targets, g.params);
      for (const auto& inner : c.gates) accumulate_rotation(r, inner, n);
      return;
    }
  }
  throw InvalidArgument("unknown generator kind");
}

}  // namespace

Mat compile_gaussian_circuit(const GaussianCircuit& c) {
  if (c.n < 1 || c.n > 64) {
    throw InvalidArgument("compile_gaussian_circuit: qubit count out of range");
  }
  Mat r = Mat::Identity(2 * c.n, 2 * c.n);
  for (const auto& g : c.gates) accumulate_rotation(r, g, c.n);
  return r;
}

Mat generator_rotation_matrix(int n, const GaussianGenerator& g) {
  if (n < 1 || n > 64) {
    throw InvalidArgument("generator_rotation_matrix: qubit count out of range");
  }
  Mat r = Mat::Identity(2 * n, 2 * n);
  accumulate_rotation(r, g, n);
  return r;
}

// ---------------------------------------------------------------------------
// Overlaps.
// ---------------------------------------------------------------------------

namespace {

// Jointly likely configuration for two covariances (product rule, with a
// forced choice when one side pins the qubit).
std::uint64_t joint_greedy(const CovarianceMatrix& ga,
                           const CovarianceMatrix& gb, int n) {
  Mat a = ga, b = gb;
  std::uint64_t mask = 0;
  for (int q = 0; q < n; ++q) {
    const double za = std::clamp(a(2 * q, 2 * q + 1), -1.0, 1.0);
    const double zb = std::clamp(b(2 * q, 2 * q + 1), -1.0, 1.0);
    const double s0 = (1 + za) * (1 + zb), s1 = (1 - za) * (1 - zb);
    const int m = (s1 > s0) ? 1 : 0;
    mask |= static_cast<std::uint64_t>(m) << q;
    const double pa = std::clamp((1.0 + (m ? -za : za)) / 2.0, 0.0, 1.0);
    const double pb = std::clamp((1.0 + (m ? -zb : zb)) / 2.0, 0.0, 1.0);
    if (pa > 0.0) projection_update_inplace(a, q, m, pa);
    if (pb > 0.0) projection_update_inplace(b, q, m, pb);
  }
  return mask;
}

}  // namespace

std::vector<GaussianGenerator> covariance_alignment_chain(
    const CovarianceMatrix& gamma) {
  const Eigen::Index m = gamma.rows();
  Eigen::RealSchur<Mat> schur(gamma);
  Mat q = schur.matrixU().transpose();  // q * gamma * q^T is block-diagonal
  if (q.determinant() < 0) {
    q.row(0).swap(q.row(1));  // stay inside the rotation group
  }
  // Givens-reduce q to a diagonal of signs: (G_k ... G_1) q = D.
  std::vector<GaussianGenerator> raw;
  Mat a = q;
  for (Eigen::Index c = 0; c < m - 1; ++c) {
    for (Eigen::Index r = m - 1; r > c; --r) {
      const double x = a(r - 1, c), y = a(r, c);
      if (std::abs(y) < 1e-15 * std::max(1.0, std::abs(x))) continue;
      const double theta = std::atan2(y, x);
      raw.push_back(GaussianGenerator::rotation(static_cast<int>(r - 1),
                                                static_cast<int>(r), theta));
      const RowVec r1 = a.row(r - 1), r2 = a.row(r);
      a.row(r - 1) = std::cos(theta) * r1 + std::sin(theta) * r2;
      a.row(r) = -std::sin(theta) * r1 + std::cos(theta) * r2;
    }
  }
  // q = G_1^T ... G_k^T D with D = diag(+-1), det(D) = +1.  A state must see
  // D first (sign pairs folded into half-turn rotations), then the reversed
  // transposed Givens chain, so that the composite rotation equals q.
  std::vector<GaussianGenerator> chain;
  std::vector<int> minus;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (a(i, i) < 0) minus.push_back(static_cast<int>(i));
  }
  for (std::size_t i = 0; i + 1 < minus.size(); i += 2) {
    chain.push_back(GaussianGenerator::rotation(minus[i], minus[i + 1], kPi));
  }
  for (auto it = raw.rbegin(); it != raw.rend(); ++it) {
    chain.push_back(GaussianGenerator::rotation(it->j, it->k, -it->theta));
  }
  return chain;
}

namespace {

Complex overlap_at_anchor(const PhasedGaussianState& u,
                          const PhasedGaussianState& v, std::uint64_t y) {
  const Complex au = amplitude_at(u, y);
  const Complex av = amplitude_at(v, y);
  if (au == Complex(0.0, 0.0) || av == Complex(0.0, 0.0)) {
    return Complex(0.0, 0.0);
  }
  const int n = u.n;
  const CMat gu = pinned_thouless(u.gamma, n, y);
  const CMat gv = pinned_thouless(v.gamma, n, y);
  // <u|v> = conj(a_u) a_v <y| exp(S_u)^+ exp(S_v) |y>; the matrix element is
  // the Pfaffian of the paired block matrix, normalized by the G = 0 case.
  CMat big = CMat::Zero(2 * n, 2 * n);
  big.topLeftCorner(n, n) = -gu.conjugate();
  big.topRightCorner(n, n) = -CMat::Identity(n, n);
  big.bottomLeftCorner(n, n) = CMat::Identity(n, n);
  big.bottomRightCorner(n, n) = gv;
  CMat ref = CMat::Zero(2 * n, 2 * n);
  ref.topRightCorner(n, n) = -CMat::Identity(n, n);
  ref.bottomLeftCorner(n, n) = CMat::Identity(n, n);
  return std::conj(au) * av * pfaffian(big) / pfaffian(ref);
}

}  // namespace

Complex overlap(const PhasedGaussianState& u, const PhasedGaussianState& v) {
  check_state(u);
  check_state(v);
  if (u.n != v.n) throw InvalidArgument("overlap: qubit counts differ");
  if (u.annihilated() || v.annihilated()) return Complex(0.0, 0.0);
  if (config_parity(u.pivot) != config_parity(v.pivot)) {
    return Complex(0.0, 0.0);
  }
  const int n = u.n;
  // Anchor both states at one jointly healthy configuration.
  const std::uint64_t candidates[5] = {
      u.pivot, v.pivot, joint_greedy(u.gamma, v.gamma, n),
      greedy_configuration(u.gamma), greedy_configuration(v.gamma)};
  std::uint64_t best = candidates[0];
  double best_score = -1.0;
  for (std::uint64_t y : candidates) {
    const double pu = configuration_probability(u.gamma, y);
    if (pu <= 0.0) continue;
    const double pv = configuration_probability(v.gamma, y);
    const double score = std::min(pu, pv);
    if (score > best_score) {
      best_score = score;
      best = y;
    }
  }
  if (best_score > 1e-7) {
    return overlap_at_anchor(u, v, best);
  }
  // No configuration carries comfortable weight in both states at once.
  // Rotate the pair by the Gaussian unitary that turns u into a basis state
  // (overlaps are invariant under a joint unitary); u's anchor then has
  // probability one, its Thouless matrix vanishes, and the matrix element
  // collapses to a single amplitude of the rotated v.
  const auto chain = covariance_alignment_chain(u.gamma);
  PhasedGaussianState ua = u, va = v;
  for (const auto& g : chain) {
    ua = evolve(ua, g);
    va = evolve(va, g);
  }
  if (ua.annihilated() || va.annihilated()) return Complex(0.0, 0.0);
  return std::conj(ua.pivot_amp) * amplitude_at(va, ua.pivot);
}

}  // namespace fgsim
