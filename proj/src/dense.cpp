#include "fgsim/dense.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

#include "fgsim/gaussian.hpp"

namespace fgsim {

namespace {

constexpr Complex kI(0.0, 1.0);

void check_qubit_count(int n, int max_n, const char* what) {
  if (n < 1) throw InvalidArgument(std::string(what) + ": need at least one qubit");
  if (n > max_n) {
    throw ResourceLimit(std::string(what) + ": " + std::to_string(n) +
                        " qubits exceeds the dense limit of " +
                        std::to_string(max_n));
  }
}

// Value of qubit q in a big-endian basis index.
inline int index_bit(std::uint64_t index, int n, int q) {
  return static_cast<int>((index >> (n - 1 - q)) & 1ULL);
}

CMat pauli(char p) {
  CMat m(2, 2);
  switch (p) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -kI, kI, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: throw InvalidArgument("unknown Pauli label");
  }
  return m;
}

void check_param_count(const std::string& id, const std::vector<double>& params,
                       std::size_t want) {
  if (params.size() != want) {
    throw InvalidArgument("gate '" + id + "' expects " + std::to_string(want) +
                          " parameter(s), got " + std::to_string(params.size()));
  }
}

}  // namespace

DenseState dense_basis_state(int n, std::uint64_t bits) {
  check_qubit_count(n, 20, "dense_basis_state");
  DenseState s;
  s.n = n;
  s.amps = CVec::Zero(std::int64_t(1) << n);
  std::uint64_t index = 0;
  for (int q = 0; q < n; ++q) index |= ((bits >> q) & 1ULL) << (n - 1 - q);
  s.amps[static_cast<std::int64_t>(index)] = Complex(1.0, 0.0);
  return s;
}

DenseState dense_basis_state(const std::string& bits) {
  if (bits.empty()) throw InvalidArgument("dense_basis_state: empty bit string");
  std::uint64_t mask = 0;
  for (std::size_t q = 0; q < bits.size(); ++q) {
    if (bits[q] == '1') {
      mask |= 1ULL << q;
    } else if (bits[q] != '0') {
      throw InvalidArgument("dense_basis_state: bit string must be over {0,1}");
    }
  }
  return dense_basis_state(static_cast<int>(bits.size()), mask);
}

Complex dense_inner(const DenseState& a, const DenseState& b) {
  if (a.n != b.n) throw InvalidArgument("dense_inner: qubit counts differ");
  return a.amps.dot(b.amps);  // Eigen's dot conjugates the left argument
}

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

int gate_arity(const std::string& id) {
  if (id == "rz" || id == "rx" || id == "ry" || id == "h" || id == "x" ||
      id == "y" || id == "z") {
    return 1;
  }
  if (id == "rxx_nn" || id == "ryy_nn" || id == "rxy_nn" || id == "fswap" ||
      id == "rzz" || id == "cphase" || id == "swap" || id == "custom_u4") {
    return 2;
  }
  throw InvalidArgument("unknown gate id '" + id + "'");
}

bool gate_is_gaussian(const std::string& id) {
  (void)gate_arity(id);  // validates the id
  return id == "rz" || id == "x" || id == "y" || id == "z" || id == "rxx_nn" ||
         id == "ryy_nn" || id == "rxy_nn" || id == "fswap";
}

CMat gate_matrix(const std::string& id, const std::vector<double>& params) {
  const Complex i = kI;
  if (id == "rz" || id == "rx" || id == "ry") {
    check_param_count(id, params, 1);
    const double c = std::cos(params[0] / 2), s = std::sin(params[0] / 2);
    CMat m(2, 2);
    if (id == "rz") m << std::exp(-i * Complex(params[0] / 2)), 0, 0,
                         std::exp(i * Complex(params[0] / 2));
    if (id == "rx") m << c, -i * s, -i * s, c;
    if (id == "ry") m << c, -s, s, c;
    return m;
  }
  if (id == "h") {
    check_param_count(id, params, 0);
    CMat m(2, 2);
    const double r = 1.0 / std::sqrt(2.0);
    m << r, r, r, -r;
    return m;
  }
  if (id == "x" || id == "y" || id == "z") {
    check_param_count(id, params, 0);
    return pauli(static_cast<char>(std::toupper(id[0])));
  }
  if (id == "rxx_nn" || id == "ryy_nn" || id == "rxy_nn") {
    check_param_count(id, params, 1);
    const CMat a = pauli(id[1] == 'x' ? 'X' : 'Y');
    const CMat b = pauli(id[2] == 'x' ? 'X' : 'Y');
    const CMat p2 = kron(a, b);
    return std::cos(params[0] / 2) * CMat::Identity(4, 4) -
           i * std::sin(params[0] / 2) * p2;
  }
  if (id == "fswap") {
    check_param_count(id, params, 0);
    CMat m = CMat::Zero(4, 4);
    m(0, 0) = 1;
    m(1, 2) = 1;
    m(2, 1) = 1;
    m(3, 3) = -1;
    return m;
  }
  if (id == "rzz") {
    check_param_count(id, params, 1);
    const Complex e = std::exp(-i * Complex(params[0] / 2));
    CMat m = CMat::Zero(4, 4);
    m(0, 0) = e;
    m(1, 1) = std::conj(e);
    m(2, 2) = std::conj(e);
    m(3, 3) = e;
    return m;
  }
  if (id == "cphase") {
    check_param_count(id, params, 1);
    CMat m = CMat::Identity(4, 4);
    m(3, 3) = std::exp(i * Complex(params[0]));
    return m;
  }
  if (id == "swap") {
    check_param_count(id, params, 0);
    CMat m = CMat::Zero(4, 4);
    m(0, 0) = 1;
    m(1, 2) = 1;
    m(2, 1) = 1;
    m(3, 3) = 1;
    return m;
  }
  if (id == "custom_u4") {
    check_param_count(id, params, 32);
    CMat m(4, 4);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c)
        m(r, c) = Complex(params[2 * (4 * r + c)], params[2 * (4 * r + c) + 1]);
    return m;
  }
  throw InvalidArgument("unknown gate id '" + id + "'");
}

DenseState dense_apply(const DenseState& s, const CMat& op,
                       const std::vector<int>& targets) {
  const int n = s.n;
  const int k = static_cast<int>(targets.size());
  if (op.rows() != op.cols() || op.rows() != (std::int64_t(1) << k)) {
    throw InvalidArgument("dense_apply: operator size does not match targets");
  }
  std::uint64_t tmask = 0;
  for (int t : targets) {
    if (t < 0 || t >= n) throw InvalidArgument("dense_apply: target out of range");
    const std::uint64_t bit = 1ULL << (n - 1 - t);
    if (tmask & bit) throw InvalidArgument("dense_apply: duplicate target");
    tmask |= bit;
  }
  const std::int64_t dim = std::int64_t(1) << n;
  DenseState out;
  out.n = n;
  out.amps = CVec::Zero(dim);
  for (std::int64_t idx = 0; idx < dim; ++idx) {
    const Complex a = s.amps[idx];
    if (a == Complex(0.0, 0.0)) continue;
    int sub = 0;
    for (int j = 0; j < k; ++j)
      sub |= index_bit(static_cast<std::uint64_t>(idx), n, targets[j]) << (k - 1 - j);
    const std::uint64_t base = static_cast<std::uint64_t>(idx) & ~tmask;
    for (int sub2 = 0; sub2 < (1 << k); ++sub2) {
      const Complex w = op(sub2, sub);
      if (w == Complex(0.0, 0.0)) continue;
      std::uint64_t idx2 = base;
      for (int j = 0; j < k; ++j)
        if ((sub2 >> (k - 1 - j)) & 1) idx2 |= 1ULL << (n - 1 - targets[j]);
      out.amps[static_cast<std::int64_t>(idx2)] += w * a;
    }
  }
  return out;
}

DenseState dense_apply_gate(const DenseState& s, const std::string& id,
                            const std::vector<double>& params,
                            const std::vector<int>& targets) {
  if (static_cast<int>(targets.size()) != gate_arity(id)) {
    throw InvalidArgument("gate '" + id + "' expects " +
                          std::to_string(gate_arity(id)) + " target(s)");
  }
  return dense_apply(s, gate_matrix(id, params), targets);
}

CMat dense_lift(int n, const CMat& op, const std::vector<int>& targets) {
  check_qubit_count(n, 14, "dense_lift");
  const std::int64_t dim = std::int64_t(1) << n;
  CMat out(dim, dim);
  DenseState basis;
  basis.n = n;
  for (std::int64_t c = 0; c < dim; ++c) {
    basis.amps = CVec::Zero(dim);
    basis.amps[c] = Complex(1.0, 0.0);
    out.col(c) = dense_apply(basis, op, targets).amps;
  }
  return out;
}

CMat majorana_dense(int n, int j) {
  check_qubit_count(n, 14, "majorana_dense");
  if (j < 0 || j >= 2 * n) throw InvalidArgument("majorana_dense: index out of range");
  const int q = j / 2;
  CMat out = CMat::Identity(1, 1);
  for (int l = 0; l < n; ++l) {
    char p = 'I';
    if (l < q) p = 'Z';
    if (l == q) p = (j % 2 == 0) ? 'X' : 'Y';
    out = kron(out, pauli(p));
  }
  return out;
}

DenseState dense_state_from_gaussian(const PhasedGaussianState& s, int max_n) {
  check_qubit_count(s.n, max_n, "dense_state_from_gaussian");
  DenseState out;
  out.n = s.n;
  const std::int64_t dim = std::int64_t(1) << s.n;
  out.amps = CVec::Zero(dim);
  if (s.annihilated()) return out;
  const CVec by_config = all_config_amplitudes(s, max_n);
  for (std::int64_t mask = 0; mask < dim; ++mask) {
    const std::uint64_t idx =
        dense_index_of_config(s.n, static_cast<std::uint64_t>(mask));
    out.amps[static_cast<std::int64_t>(idx)] = by_config[mask];
  }
  return out;
}

DenseState dense_apply_circuit(const DenseState& s, const GaussianCircuit& c) {
  if (c.n != s.n) throw InvalidArgument("dense_apply_circuit: size mismatch");
  check_qubit_count(s.n, 14, "dense_apply_circuit");
  DenseState out = s;
  for (const auto& g : c.gates) {
    switch (g.kind) {
      case GaussianGenerator::Kind::NamedMatchgate:
        out = dense_apply_gate(out, g.id, g.params, g.targets);
        break;
      case GaussianGenerator::Kind::TwoMajoranaRotation: {
        const CVec w = majorana_dense(s.n, g.k) * out.amps;
        out.amps = std::cos(g.theta / 2.0) * out.amps +
                   std::sin(g.theta / 2.0) * (majorana_dense(s.n, g.j) * w);
        break;
      }
      case GaussianGenerator::Kind::SingleMajorana:
        out.amps = majorana_dense(s.n, g.j) * out.amps;
        break;
    }
  }
  out.amps *= c.phase;
  return out;
}

CMat dense_circuit_unitary(const GaussianCircuit& c) {
  check_qubit_count(c.n, 10, "dense_circuit_unitary");
  const Eigen::Index dim = Eigen::Index(1) << c.n;
  CMat u = CMat::Identity(dim, dim);
  for (const auto& g : c.gates) {
    switch (g.kind) {
      case GaussianGenerator::Kind::NamedMatchgate:
        u = dense_lift(c.n, gate_matrix(g.id, g.params), g.targets) * u;
        break;
      case GaussianGenerator::Kind::TwoMajoranaRotation: {
        const CMat rot =
            std::cos(g.theta / 2.0) * CMat::Identity(dim, dim) +
            std::sin(g.theta / 2.0) *
                (majorana_dense(c.n, g.j) * majorana_dense(c.n, g.k));
        u = rot * u;
        break;
      }
      case GaussianGenerator::Kind::SingleMajorana:
        u = majorana_dense(c.n, g.j) * u;
        break;
    }
  }
  return c.phase * u;
}

CMat channel_transfer_matrix(int nq, const DenseChannel& channel) {
  check_qubit_count(nq, 3, "channel_transfer_matrix");
  const std::int64_t d = std::int64_t(1) << nq;
  CMat t = CMat::Zero(d * d, d * d);
  for (const auto& branch : channel) {
    for (const CMat& k : branch.kraus) {
      if (k.rows() != d || k.cols() != d) {
        throw InvalidArgument("channel_transfer_matrix: Kraus size mismatch");
      }
      t += branch.weight * kron(k, k.conjugate());
    }
  }
  return t;
}

CMat unitary_transfer_matrix(const CMat& u) {
  return kron(u, u.conjugate());
}

CMat channel_choi_state(const DenseChannel& channel) {
  // |g> = |phi+>_{01} x |phi+>_{23}, channel on qubits (1, 2).
  CVec g = CVec::Zero(16);
  g[0] = g[3] = g[12] = g[15] = Complex(0.5, 0.0);
  const CMat rho0 = g * g.adjoint();
  CMat rho = CMat::Zero(16, 16);
  for (const auto& branch : channel) {
    for (const CMat& k : branch.kraus) {
      if (k.rows() != 4 || k.cols() != 4) {
        throw InvalidArgument("channel_choi_state: expected two-qubit Kraus");
      }
      const CMat l = dense_lift(4, k, {1, 2});
      rho += branch.weight * (l * rho0 * l.adjoint());
    }
  }
  return rho;
}

CMat choi_reorder_to_textbook(const CMat& sandwich_choi) {
  if (sandwich_choi.rows() != 16 || sandwich_choi.cols() != 16) {
    throw InvalidArgument("choi_reorder_to_textbook: expected 16x16");
  }
  return permute_qubits_mat(sandwich_choi, {1, 2, 0, 3});
}

double trace_distance(const CMat& rho, const CMat& sigma) {
  if (rho.rows() != rho.cols() || sigma.rows() != sigma.cols() ||
      rho.rows() != sigma.rows()) {
    throw InvalidArgument("trace_distance: shape mismatch");
  }
  const double scale = std::max(1.0, std::max(rho.cwiseAbs().maxCoeff(),
                                              sigma.cwiseAbs().maxCoeff()));
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-9 * scale ||
      (sigma - sigma.adjoint()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw InvalidArgument("trace_distance: inputs must be Hermitian");
  }
  Eigen::JacobiSVD<CMat> svd(rho - sigma);
  return svd.singularValues().sum();
}

CMat transfer_dual_identity(const CMat& transfer) {
  const auto d2 = transfer.rows();
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(double(d2))));
  if (d * d != d2 || transfer.cols() != d2) {
    throw InvalidArgument("transfer_dual_identity: not a d^2 x d^2 matrix");
  }
  CVec vec_id = CVec::Zero(d2);
  for (Eigen::Index r = 0; r < d; ++r) vec_id[r * d + r] = Complex(1.0, 0.0);
  const CVec w = transfer.adjoint() * vec_id;
  CMat out(d, d);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) out(r, c) = w[r * d + c];
  return out;
}

namespace {

std::vector<std::int64_t> permutation_index_map(int n,
                                                const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != n) {
    throw InvalidArgument("qubit permutation has wrong length");
  }
  std::vector<bool> seen(n, false);
  for (int p : perm) {
    if (p < 0 || p >= n || seen[p]) throw InvalidArgument("invalid qubit permutation");
    seen[p] = true;
  }
  const std::int64_t dim = std::int64_t(1) << n;
  std::vector<std::int64_t> src(dim);
  for (std::int64_t o = 0; o < dim; ++o) {
    std::uint64_t i = 0;
    for (int q = 0; q < n; ++q) {
      if (index_bit(static_cast<std::uint64_t>(o), n, q))
        i |= 1ULL << (n - 1 - perm[q]);
    }
    src[o] = static_cast<std::int64_t>(i);
  }
  return src;
}

int qubits_of_dim(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index(1) << n) < dim) ++n;
  if ((Eigen::Index(1) << n) != dim) {
    throw InvalidArgument("dimension is not a power of two");
  }
  return n;
}

}  // namespace

CVec permute_qubits_vec(const CVec& v, const std::vector<int>& perm) {
  const int n = qubits_of_dim(v.size());
  const auto src = permutation_index_map(n, perm);
  CVec out(v.size());
  for (Eigen::Index o = 0; o < v.size(); ++o) out[o] = v[src[o]];
  return out;
}

CMat permute_qubits_mat(const CMat& m, const std::vector<int>& perm) {
  if (m.rows() != m.cols()) throw InvalidArgument("permute_qubits_mat: not square");
  const int n = qubits_of_dim(m.rows());
  const auto src = permutation_index_map(n, perm);
  CMat out(m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out(r, c) = m(src[r], src[c]);
  return out;
}

}  // namespace fgsim
