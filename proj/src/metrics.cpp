#include "tlrisk/metrics.hpp"

#include <cmath>

#include "tlrisk/errors.hpp"
#include "tlrisk/kernels.hpp"
#include "tlrisk/numerics.hpp"

namespace tlrisk {

namespace {

void check_params(const ModelSpec& spec, const TaskParams& params, const char* label) {
    if (params.matrix.rows() != trainable_rows(spec) ||
        params.matrix.cols() != trainable_cols(spec))
        throw ShapeError(std::string(label) + " parameters have the wrong shape");
    if (!params.matrix.all_finite())
        throw InvalidMatrix(std::string(label) + " parameters have non-finite entries");
}

// The metric that weights parameter differences: the target covariance for
// models trained in feature space, its relu second moment for NetFixedInput.
SymMatrix parameter_metric(const ModelSpec& spec, CovSide side) {
    if (spec.kind == ModelKind::NetFixedInput)
        return arccos_covariance(*spec.fixed_matrix, spec.cov(side)).matrix;
    return spec.cov(side);
}

double weighted_frobenius(const Matrix& diff, const SymMatrix& metric) {
    // |metric^{1/2} diff^T|_F = |diff metric^{1/2}|_F
    Matrix prod = diff * psd_power(metric, 0.5);
    return prod.frobenius_norm();
}

} // namespace

DistanceReport transfer_distance(const ModelSpec& spec, const TaskPair& pair,
                                 std::optional<double> class_budget) {
    check_params(spec, pair.source, "source");
    check_params(spec, pair.target, "target");
    if (class_budget && (*class_budget < 0.0 || !std::isfinite(*class_budget)))
        throw InvalidInput("class budget must be a nonnegative finite value");

    Matrix diff = pair.source.matrix - pair.target.matrix;
    DistanceReport report;
    report.rho = weighted_frobenius(diff, parameter_metric(spec, CovSide::Target));
    report.class_budget = class_budget;
    return report;
}

std::size_t effective_dimension(const ModelSpec& spec) {
    SymMatrix metric = parameter_metric(spec, CovSide::Target);
    std::size_t rank = psd_rank(metric);
    if (rank == 0)
        throw DegenerateModel("target covariance carries no signal direction");
    std::size_t rows = spec.kind == ModelKind::NetFixedOutput ? spec.hidden_width
                                                              : spec.output_dim;
    return rank * rows - 1;
}

TransferCoefficients transfer_coefficients(const ModelSpec& spec) {
    SymMatrix source_metric = parameter_metric(spec, CovSide::Source);
    SymMatrix target_metric = parameter_metric(spec, CovSide::Target);

    Matrix ratio = psd_power(source_metric, 0.5) * psd_power(target_metric, -0.5);
    double geometry = operator_norm(ratio);

    TransferCoefficients out;
    out.r_source = geometry * geometry;
    out.r_target = 1.0;
    if (spec.kind == ModelKind::NetFixedOutput) {
        double v_norm = operator_norm(*spec.fixed_matrix);
        out.r_source *= v_norm * v_norm;
        out.r_target = v_norm * v_norm;
    }
    return out;
}

KlDivergence kl_divergence(const ModelSpec& spec, const TaskParams& first,
                           const TaskParams& second, CovSide side) {
    check_params(spec, first, "first");
    check_params(spec, second, "second");

    Matrix diff = first.matrix - second.matrix;
    double sigma2 = spec.noise_stddev * spec.noise_stddev;

    KlDivergence out;
    double dist = weighted_frobenius(diff, parameter_metric(spec, side));
    out.value = dist * dist / (2.0 * sigma2);
    if (spec.kind == ModelKind::NetFixedOutput) {
        // The relu map is 1-Lipschitz, so the feature-space distance scaled by
        // the output map's operator norm dominates the true divergence.
        double v_norm = operator_norm(*spec.fixed_matrix);
        out.value *= v_norm * v_norm;
        out.is_upper_bound = true;
    }
    return out;
}

} // namespace tlrisk
