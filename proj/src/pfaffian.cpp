#include "fgsim/pfaffian.hpp"

#include <cmath>

namespace fgsim {

namespace {

// Shared elimination for real or complex scalars.
template <typename Scalar, typename Matrix>
Scalar pfaffian_impl(Matrix a, double antisym_tol) {
  const Eigen::Index m = a.rows();
  if (a.cols() != m) throw InvalidArgument("pfaffian: matrix must be square");
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i; j < m; ++j) {
      const double mag =
          std::max(std::abs(a(i, j)), std::abs(a(j, i)));
      if (std::abs(a(i, j) + a(j, i)) > antisym_tol * std::max(1.0, mag)) {
        throw InvalidArgument("pfaffian: matrix is not skew-symmetric");
      }
    }
  }
  if (m % 2 != 0) return Scalar(0);
  if (m == 0) return Scalar(1);

  Scalar pf(1);
  for (Eigen::Index k = 0; k + 1 < m; k += 2) {
    // Pivot: bring the largest entry of row k (columns > k) next to the
    // diagonal.  A transposition of rows+columns flips the Pfaffian's sign.
    Eigen::Index p = k + 1;
    double best = std::abs(a(k, k + 1));
    for (Eigen::Index i = k + 2; i < m; ++i) {
      if (std::abs(a(k, i)) > best) {
        best = std::abs(a(k, i));
        p = i;
      }
    }
    if (best == 0.0) return Scalar(0);
    if (p != k + 1) {
      a.row(p).swap(a.row(k + 1));
      a.col(p).swap(a.col(k + 1));
      pf = -pf;
    }
    const Scalar pivot = a(k, k + 1);
    pf *= pivot;
    if (k + 2 >= m) break;
    // Congruence update zeroing a(k, j) for j > k+1.  With
    // t_j = a(k, j) / pivot the trailing block transforms as
    //   a(i, j) <- a(i, j) - t_i a(k+1, j) + t_j a(k+1, i),
    // which preserves skew-symmetry and leaves the Pfaffian unchanged.
    for (Eigen::Index i = k + 2; i < m; ++i) {
      const Scalar ti = a(k, i) / pivot;
      for (Eigen::Index j = k + 2; j < m; ++j) {
        const Scalar tj = a(k, j) / pivot;
        a(i, j) += -ti * a(k + 1, j) + tj * a(k + 1, i);
      }
    }
  }
  return pf;
}

}  // namespace

Complex pfaffian(const CMat& a, double antisym_tol) {
  return pfaffian_impl<Complex, CMat>(a, antisym_tol);
}

double pfaffian_real(const Mat& a, double antisym_tol) {
  return pfaffian_impl<double, Mat>(a, antisym_tol);
}

}  // namespace fgsim
