#include "tlrisk/bounds.hpp"

#include <cmath>
#include <sstream>

#include "tlrisk/errors.hpp"
#include "tlrisk/metrics.hpp"
#include "tlrisk/numerics.hpp"

namespace tlrisk {

namespace {

void check_input(const BoundInput& in) {
    if (in.effective_dim < 20)
        throw PreconditionViolated("floor formulas require effective_dim >= 20");
    if (in.n_target < 1)
        throw PreconditionViolated("floor formulas require n_target >= 1");
    if (!(in.r_target > 0.0))
        throw PreconditionViolated("r_target must be positive");
    if (in.r_source < 0.0)
        throw PreconditionViolated("r_source must be nonnegative");
    if (!(in.noise_stddev > 0.0))
        throw PreconditionViolated("noise_stddev must be positive");
    if (in.distance_budget < 0.0 || !std::isfinite(in.distance_budget))
        throw PreconditionViolated("distance_budget must be nonnegative and finite");
}

double noise_var(const BoundInput& in) { return in.noise_stddev * in.noise_stddev; }

double combined_weight(const BoundInput& in) {
    return in.r_source * static_cast<double>(in.n_source) +
           in.r_target * static_cast<double>(in.n_target);
}

} // namespace

const char* regime_name(Regime regime) {
    switch (regime) {
        case Regime::SmallDistance: return "SmallDistance";
        case Regime::ModerateDistance: return "ModerateDistance";
        case Regime::LargeDistance: return "LargeDistance";
    }
    return "?";
}

double threshold_small(const BoundInput& in) {
    check_input(in);
    double d = static_cast<double>(in.effective_dim);
    return std::sqrt(noise_var(in) * d / combined_weight(in)) / 45.0;
}

double threshold_large(const BoundInput& in) {
    check_input(in);
    double d = static_cast<double>(in.effective_dim);
    return std::sqrt(noise_var(in) * d * std::log(2.0) /
                     (in.r_target * static_cast<double>(in.n_target)));
}

Regime classify_regime(const BoundInput& in) {
    check_input(in);
    if (in.distance_budget >= threshold_large(in))
        return Regime::LargeDistance;
    if (in.distance_budget < threshold_small(in))
        return Regime::SmallDistance;
    return Regime::ModerateDistance;
}

double bound_B(const BoundInput& in) {
    Regime regime = classify_regime(in);
    double d = static_cast<double>(in.effective_dim);
    double delta = in.distance_budget;
    switch (regime) {
        case Regime::LargeDistance:
            return noise_var(in) * d / (256.0 * in.r_target * static_cast<double>(in.n_target));
        case Regime::ModerateDistance:
            return delta * delta / 100.0 *
                   (1.0 - 0.8 * in.r_target * static_cast<double>(in.n_target) * delta * delta /
                              (noise_var(in) * d));
        case Regime::SmallDistance:
            return delta * delta / 1000.0 +
                   (6.0 / 1000.0) * d * noise_var(in) / combined_weight(in);
    }
    throw InvalidInput("unknown regime");
}

BoundReport minimax_floor(const ModelSpec& spec, const BoundInput& in) {
    BoundReport report;
    report.regime = classify_regime(in);
    report.bound = bound_B(in);
    report.t_small = threshold_small(in);
    report.t_large = threshold_large(in);

    double noise_term = static_cast<double>(spec.output_dim) * noise_var(in);
    if (spec.kind == ModelKind::NetFixedOutput) {
        double v_min = min_singular_value(*spec.fixed_matrix);
        report.degenerate_output_map = v_min == 0.0;
        report.risk_floor = 0.25 * v_min * v_min * report.bound + noise_term;
    } else {
        report.risk_floor = report.bound + noise_term;
    }
    return report;
}

BoundInput bound_input_from_spec(const ModelSpec& spec, double distance_budget,
                                 std::size_t n_source, std::size_t n_target) {
    TransferCoefficients coeff = transfer_coefficients(spec);
    BoundInput in;
    in.distance_budget = distance_budget;
    in.effective_dim = effective_dimension(spec);
    in.r_source = coeff.r_source;
    in.r_target = coeff.r_target;
    in.n_source = n_source;
    in.n_target = n_target;
    in.noise_stddev = spec.noise_stddev;
    return in;
}

std::string format_report(const BoundReport& report, const BoundInput& in) {
    std::ostringstream out;
    out << "regime=" << regime_name(report.regime) << '\n'
        << "bound=" << report.bound << '\n'
        << "risk_floor=" << report.risk_floor << '\n'
        << "t_small=" << report.t_small << '\n'
        << "t_large=" << report.t_large << '\n'
        << "effective_dim=" << in.effective_dim << '\n'
        << "r_source=" << in.r_source << '\n'
        << "r_target=" << in.r_target << '\n'
        << "n_source=" << in.n_source << '\n'
        << "n_target=" << in.n_target << '\n'
        << "distance_budget=" << in.distance_budget << '\n'
        << "noise_stddev=" << in.noise_stddev << '\n';
    if (report.degenerate_output_map)
        out << "degenerate_output_map=1\n";
    return out.str();
}

} // namespace tlrisk
