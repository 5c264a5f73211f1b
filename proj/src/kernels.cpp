#include "tlrisk/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tlrisk/errors.hpp"
#include "tlrisk/numerics.hpp"

namespace tlrisk {

namespace {

struct NormsAndCosine {
    double norm_a;
    double norm_b;
    double cosine; // clamped to [-1, 1]; 0 when either norm is 0
};

NormsAndCosine norms_and_cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw ShapeError("cross moment requires vectors of equal length");
    double aa = 0.0, bb = 0.0, ab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!std::isfinite(a[i]) || !std::isfinite(b[i]))
            throw InvalidInput("cross moment requires finite vectors");
        aa += a[i] * a[i];
        bb += b[i] * b[i];
        ab += a[i] * b[i];
    }
    NormsAndCosine out{std::sqrt(aa), std::sqrt(bb), 0.0};
    if (out.norm_a > 0.0 && out.norm_b > 0.0)
        out.cosine = std::clamp(ab / (out.norm_a * out.norm_b), -1.0, 1.0);
    return out;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

} // namespace

double relu_cross_moment(std::span<const double> a, std::span<const double> b) {
    auto [na, nb, g] = norms_and_cosine(a, b);
    if (na == 0.0 || nb == 0.0)
        return 0.0;
    double pi = std::numbers::pi;
    return 0.5 * na * nb * (std::sqrt(1.0 - g * g) + (pi - std::acos(g)) * g) / pi;
}

double relu_discrepancy(std::span<const double> a, std::span<const double> b) {
    auto [na, nb, g] = norms_and_cosine(a, b);
    double base = 0.5 * squared_distance(a, b);
    if (na == 0.0 || nb == 0.0)
        return base; // one side is identically zero, so the moment is direct
    double pi = std::numbers::pi;
    double correction = na * nb * (std::sqrt(1.0 - g * g) - g * std::acos(g)) / pi;
    return base - correction;
}

ArcCosCovariance arccos_covariance(const Matrix& weights, const SymMatrix& cov) {
    if (weights.empty())
        throw ShapeError("covariance of an empty weight matrix");
    if (weights.cols() != cov.order())
        throw ShapeError("weight columns must match covariance order");
    if (!weights.all_finite())
        throw InvalidMatrix("weights have non-finite entries");

    Matrix rows = weights * psd_power(cov, 0.5);
    const std::size_t m = rows.rows();
    Matrix second_moment(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) {
            double v = relu_cross_moment(rows.row(i), rows.row(j));
            second_moment(i, j) = v;
            second_moment(j, i) = v;
        }
    return ArcCosCovariance{SymMatrix(second_moment), std::move(rows)};
}

} // namespace tlrisk
