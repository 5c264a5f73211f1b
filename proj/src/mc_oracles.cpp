#include "tlrisk/mc_oracles.hpp"

#include <cmath>

#include "tlrisk/errors.hpp"
#include "tlrisk/numerics.hpp"
#include "tlrisk/rng.hpp"

namespace tlrisk {

Matrix mc_arccos_covariance(const Matrix& weights, const SymMatrix& cov, std::size_t n,
                            std::uint64_t seed) {
    if (n == 0)
        throw InvalidInput("sampling estimator requires n >= 1");
    if (weights.cols() != cov.order())
        throw ShapeError("weight columns must match covariance order");

    Matrix root = psd_power(cov, 0.5);
    Matrix effective = weights * root; // relu(W x) = relu((W cov^{1/2}) z)
    const std::size_t m = weights.rows();

    Rng rng(seed);
    std::vector<double> z(effective.cols());
    std::vector<double> act(m);
    Matrix acc(m, m);
    for (std::size_t s = 0; s < n; ++s) {
        for (double& v : z)
            v = rng.next_gaussian();
        for (std::size_t i = 0; i < m; ++i) {
            double dot = 0.0;
            auto row = effective.row(i);
            for (std::size_t j = 0; j < row.size(); ++j)
                dot += row[j] * z[j];
            act[i] = dot > 0.0 ? dot : 0.0;
        }
        for (std::size_t i = 0; i < m; ++i) {
            if (act[i] == 0.0)
                continue;
            for (std::size_t j = i; j < m; ++j)
                acc(i, j) += act[i] * act[j];
        }
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) {
            acc(i, j) /= static_cast<double>(n);
            acc(j, i) = acc(i, j);
        }
    return acc;
}

double mc_relu_discrepancy(std::span<const double> a, std::span<const double> b, std::size_t n,
                           std::uint64_t seed) {
    if (n == 0)
        throw InvalidInput("sampling estimator requires n >= 1");
    if (a.size() != b.size())
        throw ShapeError("vectors must have equal length");

    Rng rng(seed);
    std::vector<double> z(a.size());
    double acc = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        double da = 0.0, db = 0.0;
        for (std::size_t j = 0; j < z.size(); ++j) {
            z[j] = rng.next_gaussian();
            da += a[j] * z[j];
            db += b[j] * z[j];
        }
        double diff = (da > 0.0 ? da : 0.0) - (db > 0.0 ? db : 0.0);
        acc += diff * diff;
    }
    return acc / static_cast<double>(n);
}

double mc_kl_divergence(const ModelSpec& spec, const TaskParams& first,
                        const TaskParams& second, CovSide side, std::size_t n,
                        std::uint64_t seed) {
    if (n == 0)
        throw InvalidInput("sampling estimator requires n >= 1");

    // Under a Gaussian noise model the log ratio at (x, y) reduces to the
    // difference of squared residuals.
    Matrix root = psd_power(spec.cov(side), 0.5);
    const double sigma = spec.noise_stddev;

    Rng rng(seed);
    std::vector<double> z(spec.input_dim);
    double acc = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        for (double& v : z)
            v = rng.next_gaussian();
        std::vector<double> x = matvec(root, z);
        std::vector<double> mean_first = forward(spec, first, x);
        std::vector<double> mean_second = forward(spec, second, x);
        double sum = 0.0;
        for (std::size_t j = 0; j < spec.output_dim; ++j) {
            double noise = sigma * rng.next_gaussian();
            double r2 = mean_first[j] + noise - mean_second[j];
            sum += r2 * r2 - noise * noise;
        }
        acc += sum / (2.0 * sigma * sigma);
    }
    return acc / static_cast<double>(n);
}

} // namespace tlrisk
