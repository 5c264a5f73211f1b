#pragma once

#include <optional>

#include "tlrisk/model.hpp"

namespace tlrisk {

// rho is the target-covariance-weighted Frobenius distance between the two
// tasks' trainable parameters; for NetFixedInput the weighting runs through
// the relu second-moment matrix of the fixed feature map.
struct DistanceReport {
    double rho = 0.0;
    std::optional<double> class_budget; // set when a membership check was requested

    bool within_class() const { return class_budget && rho <= *class_budget; }
};

DistanceReport transfer_distance(const ModelSpec& spec, const TaskPair& pair,
                                 std::optional<double> class_budget = std::nullopt);

// Parameter count of the hardest direction family: (usable rank of the
// target covariance) * (trainable output rows) - 1.
std::size_t effective_dimension(const ModelSpec& spec);

// Per-sample information weights of the two data sources relative to the
// target geometry.  r_target is 1 except for NetFixedOutput, where both
// coefficients carry the squared operator norm of the fixed output map.
struct TransferCoefficients {
    double r_source = 0.0;
    double r_target = 0.0;
};

TransferCoefficients transfer_coefficients(const ModelSpec& spec);

// KL divergence between the joint feature/label distributions of two tasks
// sharing a spec, with features drawn from the chosen covariance side.
// Exact for Linear and NetFixedInput; an upper bound for NetFixedOutput.
struct KlDivergence {
    double value = 0.0;
    bool is_upper_bound = false;
};

KlDivergence kl_divergence(const ModelSpec& spec, const TaskParams& first,
                           const TaskParams& second, CovSide side);

} // namespace tlrisk
