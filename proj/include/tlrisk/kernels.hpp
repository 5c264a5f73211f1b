#pragma once

#include <span>

#include "tlrisk/matrix.hpp"

namespace tlrisk {

// E[relu(a.x) relu(b.x)] for x standard normal.  Closed form in the norms and
// the angle between a and b; returns 0 when either vector is null.
double relu_cross_moment(std::span<const double> a, std::span<const double> b);

// E[(relu(a.x) - relu(b.x))^2] for x standard normal.  Always at least
// |a - b|^2 / 4.
double relu_discrepancy(std::span<const double> a, std::span<const double> b);

// Second-moment matrix of relu(W x) with x ~ N(0, cov): entry (i, j) is the
// cross moment of rows i and j of W cov^{1/2}.  Those rows are kept alongside
// the matrix because downstream risk formulas reuse them.
struct ArcCosCovariance {
    SymMatrix matrix;
    Matrix row_vectors; // rows of W cov^{1/2}
};

ArcCosCovariance arccos_covariance(const Matrix& weights, const SymMatrix& cov);

} // namespace tlrisk
