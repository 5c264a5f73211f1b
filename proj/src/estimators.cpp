#include "tlrisk/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tlrisk/errors.hpp"
#include "tlrisk/kernels.hpp"
#include "tlrisk/numerics.hpp"
#include "tlrisk/rng.hpp"

namespace tlrisk {

namespace {

void check_dataset(const ModelSpec& spec, const Dataset& data, const char* label) {
    if (data.features.cols() != spec.input_dim || data.labels.cols() != spec.output_dim ||
        data.features.rows() != data.labels.rows())
        throw ShapeError(std::string(label) + " dataset shape does not match the model");
    if (!data.features.all_finite() || !data.labels.all_finite())
        throw InvalidInput(std::string(label) + " dataset has non-finite entries");
}

// Regression design for the exactly solvable families: raw features for
// Linear, relu-mapped hidden activations for NetFixedInput.
Matrix design_matrix(const ModelSpec& spec, const Matrix& features) {
    if (spec.kind == ModelKind::Linear)
        return features;
    Matrix hidden(features.rows(), spec.hidden_width);
    for (std::size_t s = 0; s < features.rows(); ++s) {
        std::vector<double> h = matvec(*spec.fixed_matrix, features.row(s));
        for (std::size_t j = 0; j < h.size(); ++j)
            hidden(s, j) = h[j] > 0.0 ? h[j] : 0.0;
    }
    return hidden;
}

FitResult fit_quadratic(const ModelSpec& spec, const Dataset& source, const Dataset& target,
                        const ErmConfig& config) {
    Matrix design_t = design_matrix(spec, target.features);
    Matrix gram_acc = gram(design_t).scaled(1.0 / static_cast<double>(target.size()));
    Matrix rhs = (target.labels.transposed() * design_t)
                     .scaled(1.0 / static_cast<double>(target.size()));

    if (config.source_weight > 0.0) {
        Matrix design_s = design_matrix(spec, source.features);
        double w = config.source_weight / static_cast<double>(source.size());
        gram_acc.add_scaled(gram(design_s), w);
        rhs.add_scaled(source.labels.transposed() * design_s, w);
    }

    FitResult out;
    out.params = TaskParams{weighted_normal_solve(SymMatrix(gram_acc), rhs)};
    out.source_weight_used = config.source_weight;
    return out;
}

FitResult fit_descent(const ModelSpec& spec, const Dataset& source, const Dataset& target,
                      const ErmConfig& config) {
    const std::size_t rows = trainable_rows(spec);
    const std::size_t cols = trainable_cols(spec);
    const double lambda = config.source_weight;

    Rng rng(derive_stream(config.gd.init_seed, {0x64657363656e74ull}));
    const double init_sd = std::sqrt(1.0 / static_cast<double>(spec.input_dim));
    TaskParams params{Matrix(rows, cols)};
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            params.matrix(i, j) = init_sd * rng.next_gaussian();

    double objective = weighted_objective(spec, params, source, target, lambda);
    if (!std::isfinite(objective))
        throw DivergedOptimization("objective is non-finite at the initial point");

    std::vector<double> trace;
    trace.reserve(config.gd.max_iters + 1);
    trace.push_back(objective);

    // Fixed-step descent; on an objective increase the step is halved and the
    // iteration retried, which keeps the trace nonincreasing.
    double step = config.gd.step_size;
    bool converged = false;
    for (std::size_t iter = 0; iter < config.gd.max_iters; ++iter) {
        Matrix grad = weighted_gradient(spec, params, source, target, lambda);
        if (!grad.all_finite())
            throw DivergedOptimization("gradient is non-finite");

        TaskParams trial = params;
        double next = std::numeric_limits<double>::infinity();
        bool accepted = false;
        while (step > 1e-18) {
            trial.matrix = params.matrix;
            trial.matrix.add_scaled(grad, -step);
            next = weighted_objective(spec, trial, source, target, lambda);
            if (std::isfinite(next) && next <= objective) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            converged = true; // no descent direction at numeric resolution
            break;
        }
        params = std::move(trial);
        trace.push_back(next);
        double drop = objective - next;
        objective = next;
        if (drop <= config.gd.rel_tol * std::max(std::abs(objective), 1e-300)) {
            converged = true;
            break;
        }
    }

    FitResult out;
    out.params = std::move(params);
    out.source_weight_used = lambda;
    out.converged = converged;
    out.objective_trace = std::move(trace);
    return out;
}

} // namespace

double weighted_objective(const ModelSpec& spec, const TaskParams& params,
                          const Dataset& source, const Dataset& target, double source_weight) {
    auto mean_sq = [&](const Dataset& data) {
        double sum = 0.0;
        for (std::size_t s = 0; s < data.size(); ++s) {
            std::vector<double> pred = forward(spec, params, data.features.row(s));
            auto y = data.labels.row(s);
            for (std::size_t j = 0; j < pred.size(); ++j) {
                double r = pred[j] - y[j];
                sum += r * r;
            }
        }
        return sum / (2.0 * static_cast<double>(data.size()));
    };
    double value = mean_sq(target);
    if (source_weight > 0.0)
        value += source_weight * mean_sq(source);
    return value;
}

Matrix weighted_gradient(const ModelSpec& spec, const TaskParams& params,
                         const Dataset& source, const Dataset& target, double source_weight) {
    if (spec.kind != ModelKind::NetFixedOutput)
        throw InvalidInput("descent gradient is defined for NetFixedOutput only");
    const Matrix& v = *spec.fixed_matrix;

    Matrix grad(trainable_rows(spec), trainable_cols(spec));
    auto accumulate = [&](const Dataset& data, double weight) {
        double w = weight / static_cast<double>(data.size());
        std::vector<double> pre(spec.hidden_width);
        for (std::size_t s = 0; s < data.size(); ++s) {
            auto x = data.features.row(s);
            std::vector<double> raw = matvec(params.matrix, x);
            for (std::size_t j = 0; j < raw.size(); ++j)
                pre[j] = raw[j] > 0.0 ? raw[j] : 0.0;
            std::vector<double> residual = matvec(v, pre);
            auto y = data.labels.row(s);
            for (std::size_t j = 0; j < residual.size(); ++j)
                residual[j] -= y[j];
            // back through the fixed map, gated by the active units
            for (std::size_t h = 0; h < spec.hidden_width; ++h) {
                if (raw[h] <= 0.0)
                    continue;
                double back = 0.0;
                for (std::size_t j = 0; j < spec.output_dim; ++j)
                    back += v(j, h) * residual[j];
                back *= w;
                for (std::size_t c = 0; c < spec.input_dim; ++c)
                    grad(h, c) += back * x[c];
            }
        }
    };
    accumulate(target, 1.0);
    if (source_weight > 0.0)
        accumulate(source, source_weight);
    return grad;
}

FitResult fit_weighted_erm(const ModelSpec& spec, const Dataset& source,
                           const Dataset& target, const ErmConfig& config) {
    if (target.empty())
        throw EmptyDataset("fit requires a nonempty target dataset");
    check_dataset(spec, target, "target");
    if (config.source_weight < 0.0 || !std::isfinite(config.source_weight))
        throw InvalidInput("source weight must be nonnegative and finite");
    if (config.source_weight > 0.0) {
        if (source.empty())
            throw EmptyDataset("positive source weight requires source data");
        check_dataset(spec, source, "source");
    }

    if (spec.kind == ModelKind::NetFixedOutput)
        return fit_descent(spec, source, target, config);
    return fit_quadratic(spec, source, target, config);
}

FitResult select_lambda(const ModelSpec& spec, const Dataset& source, const Dataset& target,
                        const Dataset& validation, const std::vector<double>& grid,
                        const GdConfig& gd) {
    if (grid.empty())
        throw InvalidInput("candidate weight grid is empty");
    if (validation.empty())
        throw EmptyDataset("selection requires validation data");
    check_dataset(spec, validation, "validation");

    std::vector<double> candidates = grid;
    std::sort(candidates.begin(), candidates.end());
    if (std::adjacent_find(candidates.begin(), candidates.end()) != candidates.end())
        throw InvalidInput("candidate weights must be distinct");

    std::optional<FitResult> best;
    double best_loss = std::numeric_limits<double>::infinity();
    for (double weight : candidates) {
        FitResult fit = fit_weighted_erm(spec, source, target, ErmConfig{weight, gd});
        double loss = validation_loss(spec, fit.params, validation);
        // strict improvement required, so equal losses keep the smaller weight
        if (loss < best_loss) {
            best_loss = loss;
            best = std::move(fit);
        }
    }
    return *best;
}

double validation_loss(const ModelSpec& spec, const TaskParams& params, const Dataset& data) {
    if (data.empty())
        throw EmptyDataset("loss of an empty dataset");
    double sum = 0.0;
    for (std::size_t s = 0; s < data.size(); ++s) {
        std::vector<double> pred = forward(spec, params, data.features.row(s));
        auto y = data.labels.row(s);
        for (std::size_t j = 0; j < pred.size(); ++j) {
            double r = pred[j] - y[j];
            sum += r * r;
        }
    }
    return sum / static_cast<double>(data.size());
}

double closed_form_risk(const ModelSpec& spec, const TaskParams& estimate,
                        const TaskParams& truth) {
    if (estimate.matrix.rows() != trainable_rows(spec) ||
        estimate.matrix.cols() != trainable_cols(spec) ||
        truth.matrix.rows() != trainable_rows(spec) ||
        truth.matrix.cols() != trainable_cols(spec))
        throw ShapeError("risk parameters have the wrong shape");

    double sigma2 = spec.noise_stddev * spec.noise_stddev;
    double noise_term = static_cast<double>(spec.output_dim) * sigma2;

    switch (spec.kind) {
        case ModelKind::Linear: {
            Matrix prod = (estimate.matrix - truth.matrix) * psd_power(spec.cov_target, 0.5);
            double f = prod.frobenius_norm();
            return f * f + noise_term;
        }
        case ModelKind::NetFixedInput: {
            SymMatrix metric = arccos_covariance(*spec.fixed_matrix, spec.cov_target).matrix;
            Matrix prod = (estimate.matrix - truth.matrix) * psd_power(metric, 0.5);
            double f = prod.frobenius_norm();
            return f * f + noise_term;
        }
        case ModelKind::NetFixedOutput: {
            // E|V relu(A z) - V relu(B z)|^2 expands into pairwise relu cross
            // moments of the rows of A and B.
            const Matrix& v = *spec.fixed_matrix;
            Matrix root = psd_power(spec.cov_target, 0.5);
            Matrix a = estimate.matrix * root;
            Matrix b = truth.matrix * root;
            Matrix vtv = gram(v);
            double sum = 0.0;
            for (std::size_t i = 0; i < spec.hidden_width; ++i) {
                for (std::size_t j = 0; j < spec.hidden_width; ++j) {
                    double coeff = vtv(i, j);
                    if (coeff == 0.0)
                        continue;
                    sum += coeff * (relu_cross_moment(a.row(i), a.row(j)) +
                                    relu_cross_moment(b.row(i), b.row(j)) -
                                    relu_cross_moment(a.row(i), b.row(j)) -
                                    relu_cross_moment(a.row(j), b.row(i)));
                }
            }
            return sum + noise_term;
        }
    }
    throw InvalidInput("unknown model kind");
}

double fixed_output_risk_lower_bound(const ModelSpec& spec, const TaskParams& estimate,
                                     const TaskParams& truth) {
    if (spec.kind != ModelKind::NetFixedOutput)
        throw InvalidInput("lower bound applies to NetFixedOutput only");
    // the constant is inf ||V z|| / ||z|| over the whole hidden space, which
    // vanishes whenever the output map has a null space
    double v_min = spec.fixed_matrix->cols() > spec.fixed_matrix->rows()
                       ? 0.0
                       : min_singular_value(*spec.fixed_matrix);
    Matrix prod = (estimate.matrix - truth.matrix) * psd_power(spec.cov_target, 0.5);
    double f = prod.frobenius_norm();
    double sigma2 = spec.noise_stddev * spec.noise_stddev;
    return 0.25 * v_min * v_min * f * f + static_cast<double>(spec.output_dim) * sigma2;
}

double mc_risk(const ModelSpec& spec, const TaskParams& estimate, const TaskParams& truth,
               std::size_t n_test, std::uint64_t seed) {
    if (n_test == 0)
        throw InvalidInput("mc_risk requires n_test >= 1");
    Dataset test = sample_dataset(spec, truth, n_test, CovSide::Target, seed);
    return validation_loss(spec, estimate, test);
}

} // namespace tlrisk
