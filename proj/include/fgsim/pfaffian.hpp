#pragma once

#include "fgsim/types.hpp"

namespace fgsim {

// Pfaffian of a skew-symmetric matrix (complex or real), including its sign.
//
// Uses Parlett-Reid elimination with partial pivoting: congruence row/column
// operations zero out the top row beyond the (k, k+1) entry, the Pfaffian
// picks up that entry as a factor, and each row/column transposition flips
// the sign.  O(m^3) for an m x m input.  Odd dimension gives 0.
//
// The input is checked for skew-symmetry up to `antisym_tol` on the larger of
// the two mirrored entries; violations raise InvalidArgument.
Complex pfaffian(const CMat& a, double antisym_tol = 1e-9);
double pfaffian_real(const Mat& a, double antisym_tol = 1e-9);

}  // namespace fgsim
