#pragma once

#include <cstddef>
#include <string>

#include "tlrisk/model.hpp"

namespace tlrisk {

// Everything the minimax floor depends on.  effective_dim must be at least 20
// for the floor formulas to be valid; smaller values are rejected.
struct BoundInput {
    double distance_budget = 0.0; // class radius, >= 0
    std::size_t effective_dim = 0;
    double r_source = 0.0;
    double r_target = 1.0;
    std::size_t n_source = 0; // 0 means no source data
    std::size_t n_target = 1;
    double noise_stddev = 1.0;
};

enum class Regime { SmallDistance, ModerateDistance, LargeDistance };

const char* regime_name(Regime regime);

struct BoundReport {
    Regime regime = Regime::SmallDistance;
    double bound = 0.0;      // the regime-specific parameter-error floor
    double risk_floor = 0.0; // bound mapped into prediction risk, noise included
    double t_small = 0.0;
    double t_large = 0.0;
    bool degenerate_output_map = false; // rank-deficient fixed V: floor collapses to noise
};

// Distance thresholds that separate the three regimes.
double threshold_small(const BoundInput& in);
double threshold_large(const BoundInput& in);

// Large at budget >= t_large, Small below t_small, Moderate between
// (both boundaries resolve upward: t_small itself is Moderate).
Regime classify_regime(const BoundInput& in);

// The parameter-error floor for the classified regime.
double bound_B(const BoundInput& in);

// Full report for a model: converts the parameter floor into prediction risk
// (adding the irreducible noise term, and scaling by the fixed output map's
// smallest singular value for NetFixedOutput).
BoundReport minimax_floor(const ModelSpec& spec, const BoundInput& in);

// Derives effective_dim and the transfer coefficients from the spec.
BoundInput bound_input_from_spec(const ModelSpec& spec, double distance_budget,
                                 std::size_t n_source, std::size_t n_target);

// Flat key=value lines, one per field, for CLI output.
std::string format_report(const BoundReport& report, const BoundInput& in);

} // namespace tlrisk
