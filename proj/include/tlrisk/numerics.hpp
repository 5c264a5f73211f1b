#pragma once

#include "tlrisk/matrix.hpp"

namespace tlrisk {

// Cyclic Jacobi rotations, iterated until the off-diagonal Frobenius mass
// drops below 1e-12 of the total.  Good to ~1e-13 relative reconstruction on
// the sizes used here.
EigDecomp eigen_decompose(const SymMatrix& m);

// m^power for power in {+1/2, -1/2} of a (near-)PSD matrix.  Eigenvalues
// below 1e-10 * lambda_max are treated as zero: dropped from the root and
// excluded from the inverse root (pseudo-inverse behaviour on the range).
// Throws SingularMatrix when power = -1/2 finds no usable eigenvalue.
Matrix psd_power(const SymMatrix& m, double power);

// Largest singular value, computed through the eigenvalues of the smaller of
// m m^T and m^T m.
double operator_norm(const Matrix& m);

// Smallest of the min(rows, cols) singular values.
double min_singular_value(const Matrix& m);

// Minimum-Frobenius-norm W with W * gram = rhs (rhs is k x d, gram d x d,
// PSD).  Singular directions of gram are handled by the same eigenvalue
// clamp as psd_power.
Matrix weighted_normal_solve(const SymMatrix& gram, const Matrix& rhs);

// Count of eigenvalues above the relative clamp; 0 for the null matrix.
std::size_t psd_rank(const SymMatrix& m);

} // namespace tlrisk
