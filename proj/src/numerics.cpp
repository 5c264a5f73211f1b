#include "tlrisk/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tlrisk/errors.hpp"

namespace tlrisk {

namespace {

constexpr double kOffDiagTarget = 1e-12;
constexpr double kEigenClampRel = 1e-10;
constexpr int kMaxSweeps = 100;

double off_diagonal_norm(const Matrix& a) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j)
            sum += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(sum);
}

// Eigenvalues kept by the relative clamp, paired with their column index.
std::vector<std::pair<double, std::size_t>> clamped_spectrum(const EigDecomp& eig) {
    double lambda_max = eig.values.empty() ? 0.0 : eig.values.front();
    std::vector<std::pair<double, std::size_t>> kept;
    if (lambda_max <= 0.0)
        return kept;
    double tau = kEigenClampRel * lambda_max;
    for (std::size_t i = 0; i < eig.values.size(); ++i)
        if (eig.values[i] >= tau)
            kept.emplace_back(eig.values[i], i);
    return kept;
}

} // namespace

EigDecomp eigen_decompose(const SymMatrix& m) {
    if (!m.full().all_finite())
        throw InvalidMatrix("eigendecomposition requires finite entries");

    const std::size_t n = m.order();
    Matrix a = m.full();
    Matrix u = Matrix::identity(n);
    const double total = a.frobenius_norm();

    if (total > 0.0) {
        bool converged = false;
        for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
            if (off_diagonal_norm(a) <= kOffDiagTarget * total) {
                converged = true;
                break;
            }
            for (std::size_t p = 0; p + 1 < n; ++p) {
                for (std::size_t q = p + 1; q < n; ++q) {
                    double apq = a(p, q);
                    if (apq == 0.0)
                        continue;
                    double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                    double t = (theta >= 0.0 ? 1.0 : -1.0) /
                               (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                    double c = 1.0 / std::sqrt(1.0 + t * t);
                    double s = t * c;

                    double app = a(p, p), aqq = a(q, q);
                    a(p, p) = app - t * apq;
                    a(q, q) = aqq + t * apq;
                    a(p, q) = 0.0;
                    a(q, p) = 0.0;
                    for (std::size_t i = 0; i < n; ++i) {
                        if (i == p || i == q)
                            continue;
                        double aip = a(i, p), aiq = a(i, q);
                        a(i, p) = c * aip - s * aiq;
                        a(p, i) = a(i, p);
                        a(i, q) = s * aip + c * aiq;
                        a(q, i) = a(i, q);
                    }
                    for (std::size_t i = 0; i < n; ++i) {
                        double uip = u(i, p), uiq = u(i, q);
                        u(i, p) = c * uip - s * uiq;
                        u(i, q) = s * uip + c * uiq;
                    }
                }
            }
        }
        if (!converged && off_diagonal_norm(a) > kOffDiagTarget * total)
            throw InvalidMatrix("eigendecomposition failed to converge");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&a](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    EigDecomp out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i)
            out.vectors(i, k) = u(i, order[k]);
    }
    return out;
}

Matrix psd_power(const SymMatrix& m, double power) {
    if (power != 0.5 && power != -0.5)
        throw InvalidInput("psd_power supports only +1/2 and -1/2");
    EigDecomp eig = eigen_decompose(m);
    auto kept = clamped_spectrum(eig);

    if (kept.empty()) {
        if (power < 0.0)
            throw SingularMatrix("inverse root of a null matrix");
        return Matrix(m.order(), m.order());
    }

    const std::size_t n = m.order();
    Matrix out(n, n);
    for (const auto& [value, col] : kept) {
        double w = power > 0.0 ? std::sqrt(value) : 1.0 / std::sqrt(value);
        for (std::size_t i = 0; i < n; ++i) {
            double ui = eig.vectors(i, col);
            if (ui == 0.0)
                continue;
            for (std::size_t j = i; j < n; ++j)
                out(i, j) += w * ui * eig.vectors(j, col);
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j)
            out(i, j) = out(j, i);
    return out;
}

namespace {

// Eigenvalues of the smaller Gram matrix of m, descending.
std::vector<double> gram_eigenvalues(const Matrix& m) {
    if (m.empty())
        throw InvalidMatrix("singular values of an empty matrix");
    if (!m.all_finite())
        throw InvalidMatrix("singular values require finite entries");
    Matrix g = m.rows() <= m.cols() ? gram(m.transposed()) : gram(m);
    return eigen_decompose(SymMatrix(g)).values;
}

} // namespace

double operator_norm(const Matrix& m) {
    std::vector<double> values = gram_eigenvalues(m);
    return std::sqrt(std::max(values.front(), 0.0));
}

double min_singular_value(const Matrix& m) {
    std::vector<double> values = gram_eigenvalues(m);
    return std::sqrt(std::max(values.back(), 0.0));
}

Matrix weighted_normal_solve(const SymMatrix& gram_matrix, const Matrix& rhs) {
    if (rhs.cols() != gram_matrix.order())
        throw ShapeError("normal-equation solve dimension mismatch");
    EigDecomp eig = eigen_decompose(gram_matrix);
    auto kept = clamped_spectrum(eig);
    if (kept.empty())
        throw SingularMatrix("normal-equation solve with a null gram matrix");

    // W = rhs * pinv(gram); expanding over the kept eigenpairs keeps the
    // minimum-norm property on singular directions.
    const std::size_t n = gram_matrix.order();
    Matrix pinv(n, n);
    for (const auto& [value, col] : kept) {
        double w = 1.0 / value;
        for (std::size_t i = 0; i < n; ++i) {
            double ui = eig.vectors(i, col);
            if (ui == 0.0)
                continue;
            for (std::size_t j = i; j < n; ++j)
                pinv(i, j) += w * ui * eig.vectors(j, col);
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j)
            pinv(i, j) = pinv(j, i);
    return rhs * pinv;
}

std::size_t psd_rank(const SymMatrix& m) {
    EigDecomp eig = eigen_decompose(m);
    return clamped_spectrum(eig).size();
}

} // namespace tlrisk
