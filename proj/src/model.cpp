#include "tlrisk/model.hpp"

#include <cmath>
#include <string>

#include "tlrisk/errors.hpp"
#include "tlrisk/numerics.hpp"
#include "tlrisk/rng.hpp"

namespace tlrisk {

namespace {

void check_covariance(const SymMatrix& cov, std::size_t input_dim, const char* label) {
    if (cov.order() != input_dim)
        throw ShapeError(std::string(label) + " covariance order does not match input_dim");
    if (!cov.full().all_finite())
        throw InvalidMatrix(std::string(label) + " covariance has non-finite entries");
    EigDecomp eig = eigen_decompose(cov);
    double lambda_max = eig.values.front();
    double floor = -1e-10 * std::max(lambda_max, 0.0);
    for (double v : eig.values)
        if (v < floor)
            throw InvalidMatrix(std::string(label) + " covariance is not positive semidefinite");
}

void check_common(const ModelSpec& spec) {
    if (spec.input_dim == 0 || spec.output_dim == 0)
        throw InvalidInput("model dimensions must be positive");
    if (!(spec.noise_stddev > 0.0) || !std::isfinite(spec.noise_stddev))
        throw InvalidInput("noise_stddev must be positive and finite");
    check_covariance(spec.cov_source, spec.input_dim, "source");
    check_covariance(spec.cov_target, spec.input_dim, "target");
}

double relu(double v) { return v > 0.0 ? v : 0.0; }

} // namespace

ModelSpec make_linear_spec(std::size_t input_dim, std::size_t output_dim,
                           double noise_stddev, SymMatrix cov_source, SymMatrix cov_target) {
    ModelSpec spec{ModelKind::Linear, input_dim, output_dim, 0, noise_stddev,
                   std::move(cov_source), std::move(cov_target), std::nullopt};
    check_common(spec);
    return spec;
}

ModelSpec make_fixed_output_spec(std::size_t input_dim, std::size_t output_dim,
                                 std::size_t hidden_width, double noise_stddev,
                                 SymMatrix cov_source, SymMatrix cov_target, Matrix output_map) {
    ModelSpec spec{ModelKind::NetFixedOutput, input_dim, output_dim, hidden_width,
                   noise_stddev, std::move(cov_source), std::move(cov_target),
                   std::move(output_map)};
    if (spec.hidden_width == 0)
        throw InvalidInput("hidden_width must be positive");
    if (spec.fixed_matrix->rows() != spec.output_dim ||
        spec.fixed_matrix->cols() != spec.hidden_width)
        throw ShapeError("fixed output map must be output_dim x hidden_width");
    if (!spec.fixed_matrix->all_finite())
        throw InvalidMatrix("fixed output map has non-finite entries");
    check_common(spec);
    return spec;
}

ModelSpec make_fixed_input_spec(std::size_t input_dim, std::size_t output_dim,
                                std::size_t hidden_width, double noise_stddev,
                                SymMatrix cov_source, SymMatrix cov_target, Matrix feature_map) {
    ModelSpec spec{ModelKind::NetFixedInput, input_dim, output_dim, hidden_width,
                   noise_stddev, std::move(cov_source), std::move(cov_target),
                   std::move(feature_map)};
    if (spec.hidden_width == 0)
        throw InvalidInput("hidden_width must be positive");
    if (spec.fixed_matrix->rows() != spec.hidden_width ||
        spec.fixed_matrix->cols() != spec.input_dim)
        throw ShapeError("fixed feature map must be hidden_width x input_dim");
    if (!spec.fixed_matrix->all_finite())
        throw InvalidMatrix("fixed feature map has non-finite entries");
    check_common(spec);
    return spec;
}

std::size_t trainable_rows(const ModelSpec& spec) {
    switch (spec.kind) {
        case ModelKind::Linear: return spec.output_dim;
        case ModelKind::NetFixedOutput: return spec.hidden_width;
        case ModelKind::NetFixedInput: return spec.output_dim;
    }
    return 0;
}

std::size_t trainable_cols(const ModelSpec& spec) {
    switch (spec.kind) {
        case ModelKind::Linear: return spec.input_dim;
        case ModelKind::NetFixedOutput: return spec.input_dim;
        case ModelKind::NetFixedInput: return spec.hidden_width;
    }
    return 0;
}

std::vector<double> forward(const ModelSpec& spec, const TaskParams& params,
                            std::span<const double> x) {
    if (params.matrix.rows() != trainable_rows(spec) ||
        params.matrix.cols() != trainable_cols(spec))
        throw ShapeError("task parameters have the wrong shape for this model");
    if (x.size() != spec.input_dim)
        throw ShapeError("feature vector has the wrong length");

    switch (spec.kind) {
        case ModelKind::Linear:
            return matvec(params.matrix, x);
        case ModelKind::NetFixedOutput: {
            std::vector<double> hidden = matvec(params.matrix, x);
            for (double& v : hidden)
                v = relu(v);
            return matvec(*spec.fixed_matrix, hidden);
        }
        case ModelKind::NetFixedInput: {
            std::vector<double> hidden = matvec(*spec.fixed_matrix, x);
            for (double& v : hidden)
                v = relu(v);
            return matvec(params.matrix, hidden);
        }
    }
    throw InvalidInput("unknown model kind");
}

Dataset sample_dataset(const ModelSpec& spec, const TaskParams& params, std::size_t n,
                       CovSide side, std::uint64_t seed) {
    if (n == 0)
        throw InvalidInput("sample_dataset requires n >= 1");
    Matrix root = psd_power(spec.cov(side), 0.5);

    Dataset out;
    out.features = Matrix(n, spec.input_dim);
    out.labels = Matrix(n, spec.output_dim);
    out.role = side == CovSide::Source ? DataRole::Source : DataRole::Target;
    out.seed = seed;

    Rng rng(seed);
    std::vector<double> z(spec.input_dim);
    for (std::size_t s = 0; s < n; ++s) {
        for (double& v : z)
            v = rng.next_gaussian();
        std::vector<double> x = matvec(root, z);
        for (std::size_t j = 0; j < spec.input_dim; ++j)
            out.features(s, j) = x[j];
        std::vector<double> y = forward(spec, params, x);
        for (std::size_t j = 0; j < spec.output_dim; ++j)
            out.labels(s, j) = y[j] + spec.noise_stddev * rng.next_gaussian();
    }
    return out;
}

TaskPair make_synthetic_pair(const ModelSpec& spec, const PairRecipe& recipe) {
    if (recipe.entry_variance < 0.0 || recipe.perturbation_variance < 0.0)
        throw InvalidInput("recipe variances must be nonnegative");
    if (!std::isfinite(recipe.scale))
        throw InvalidInput("recipe scale must be finite");

    const std::size_t rows = trainable_rows(spec);
    const std::size_t cols = trainable_cols(spec);
    const double base_sd = std::sqrt(recipe.entry_variance);
    const double pert_sd = std::sqrt(recipe.perturbation_variance);

    Rng rng(recipe.base_seed);
    Matrix base(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            base(i, j) = base_sd * rng.next_gaussian();
    Matrix counterpart = base;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            counterpart(i, j) += recipe.scale * pert_sd * rng.next_gaussian();

    if (recipe.base_role == CovSide::Source)
        return TaskPair{TaskParams{std::move(base)}, TaskParams{std::move(counterpart)}};
    return TaskPair{TaskParams{std::move(counterpart)}, TaskParams{std::move(base)}};
}

} // namespace tlrisk
