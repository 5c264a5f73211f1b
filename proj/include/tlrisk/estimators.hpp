#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tlrisk/model.hpp"

namespace tlrisk {

// Gradient-descent settings for the NetFixedOutput fit; the other model
// families solve their normal equations exactly and ignore this.
struct GdConfig {
    double step_size = 1e-3;
    std::size_t max_iters = 5000;
    double rel_tol = 1e-8;
    std::uint64_t init_seed = 0;
};

struct ErmConfig {
    double source_weight = 0.0; // weight of the source term in the objective
    GdConfig gd;
};

struct FitResult {
    TaskParams params;
    double source_weight_used = 0.0;
    bool converged = true;
    // Objective value per accepted iteration; present only for descent fits.
    std::optional<std::vector<double>> objective_trace;
};

// Weighted empirical risk:
//   J(W) = 1/(2 n_target) sum_target |f(W;x) - y|^2
//        + source_weight/(2 n_source) sum_source |f(W;x) - y|^2
// Linear and NetFixedInput minimize J exactly (minimum-norm solution when the
// normal equations are singular); NetFixedOutput runs full-batch gradient
// descent from a Gaussian init with per-entry variance 1/input_dim.
FitResult fit_weighted_erm(const ModelSpec& spec, const Dataset& source,
                           const Dataset& target, const ErmConfig& config);

// J and dJ/dW at the given parameters.  Exposed so the descent direction can
// be checked against finite differences.
double weighted_objective(const ModelSpec& spec, const TaskParams& params,
                          const Dataset& source, const Dataset& target, double source_weight);
Matrix weighted_gradient(const ModelSpec& spec, const TaskParams& params,
                         const Dataset& source, const Dataset& target, double source_weight);

// Fits once per candidate weight and returns the fit with the smallest mean
// per-sample squared validation loss; ties go to the smaller weight.
FitResult select_lambda(const ModelSpec& spec, const Dataset& source, const Dataset& target,
                        const Dataset& validation, const std::vector<double>& grid,
                        const GdConfig& gd = {});

// Exact expected squared prediction error on fresh target samples, noise
// term included.
double closed_form_risk(const ModelSpec& spec, const TaskParams& estimate,
                        const TaskParams& truth);

// Companion lower bound for NetFixedOutput: the parameter error scaled by
// inf ||V z|| / ||z|| never exceeds the true risk. The scale is zero for a
// wide output map, where the bound degrades to the noise term.
double fixed_output_risk_lower_bound(const ModelSpec& spec, const TaskParams& estimate,
                                     const TaskParams& truth);

// Monte-Carlo estimate of the same risk from n_test fresh target samples.
double mc_risk(const ModelSpec& spec, const TaskParams& estimate, const TaskParams& truth,
               std::size_t n_test, std::uint64_t seed);

// Mean per-sample squared error of the fitted map on a dataset.
double validation_loss(const ModelSpec& spec, const TaskParams& params, const Dataset& data);

} // namespace tlrisk
