#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tlrisk/estimators.hpp"
#include "tlrisk/model.hpp"

namespace tlrisk {

enum class SweepAxis { NSource, NTarget, DeltaScale };

// Stream roles behind every random draw a sweep cell makes.  Cell seeds are
// derive_stream(master_seed, {role, trial}): the axis value never enters, so
// trials share their draws across axis values (paired comparisons), and
// permuting or subsetting axis_values cannot change any cell.  Part of the
// output contract; renumbering breaks byte-for-byte reproducibility.
namespace seed_role {
inline constexpr std::uint64_t kPair = 1;
inline constexpr std::uint64_t kSource = 2;
inline constexpr std::uint64_t kTarget = 3;
inline constexpr std::uint64_t kValidation = 4;
inline constexpr std::uint64_t kTest = 5;
inline constexpr std::uint64_t kGdInit = 6;
} // namespace seed_role

// Fixed source weight, or selection over a grid using a held-out validation
// set drawn from the target distribution.
struct LambdaPolicy {
    bool use_grid = false;
    double fixed_weight = 0.0;
    std::vector<double> grid;
    std::size_t n_validation = 0;
};

struct SweepConfig {
    ModelSpec spec;
    PairRecipe recipe; // base_seed is ignored; cell seeds come from master_seed
    SweepAxis axis = SweepAxis::NSource;
    std::vector<double> axis_values;
    std::size_t fixed_n_source = 0;
    std::size_t fixed_n_target = 0;
    LambdaPolicy lambda_policy;
    std::size_t trials = 1;
    std::size_t n_test = 200;
    std::uint64_t master_seed = 0;
    std::string output_path;
    GdConfig gd;
};

struct SweepPoint {
    double x = 0.0;
    double mean_error = 0.0; // Monte-Carlo generalization error, trial-averaged
    double std_error = 0.0;  // sample standard deviation across trials
    double mean_closed_form = 0.0;
    double mean_distance = 0.0; // trial-averaged task distance at this cell
    double risk_floor = 0.0;    // minimax floor evaluated at mean_distance
    std::size_t n_source = 0;
    std::size_t n_target = 0;
    std::size_t failed_trials = 0;
};

struct SweepSeries {
    std::vector<SweepPoint> points;
    std::string metadata_json; // resolved configuration echo
    std::vector<std::string> failures;
};

// One fit per (axis value, trial) cell.  Task pairs and datasets draw from
// streams derived from (master_seed, trial, role); the axis value enters the
// cell deterministically, so permuting or subsetting axis_values never
// changes a cell, and cells may be computed on any number of threads with
// identical results.
SweepSeries run_sweep(const SweepConfig& config, std::size_t threads = 1);

// Plot table: "x y" per line, 6 significant digits, plus a .meta companion
// holding the resolved config.  Rerunning an identical sweep rewrites both
// files byte for byte.
void emit_dat(const SweepSeries& series, const std::string& path);

// x,mean,std,floor rows for spreadsheet use.
void emit_csv(const SweepSeries& series, const std::string& path);

// Resolves a relative output path against the directory named by the
// TLRISK_OUTPUT_DIR environment variable, when set.
std::string resolve_output_path(const std::string& path);

} // namespace tlrisk
