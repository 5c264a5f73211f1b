#pragma once

#include <string>

#include "tlrisk/harness.hpp"

namespace tlrisk {

// Single fit described the same way a sweep cell is.
struct SimulateConfig {
    ModelSpec spec;
    PairRecipe recipe;
    std::size_t n_source = 0;
    std::size_t n_target = 1;
    LambdaPolicy lambda_policy;
    std::size_t n_test = 200;
    std::uint64_t seed = 0;
    GdConfig gd;
};

// JSON mirrors of the config structs.  Matrix-valued fields accept nested
// arrays, {"file": path} (resolved against base_dir), {"scaled_identity": v},
// or {"fill": v}.  Malformed input raises ConfigError.
SweepConfig parse_sweep_config(const std::string& json_text, const std::string& base_dir);
SimulateConfig parse_simulate_config(const std::string& json_text, const std::string& base_dir);

SweepConfig load_sweep_config(const std::string& path);
SimulateConfig load_simulate_config(const std::string& path);

ModelSpec parse_model_spec_json(const std::string& json_text, const std::string& base_dir);
ModelSpec load_model_spec(const std::string& path);

// Canonical echo of a fully resolved sweep config; stable across reruns, so
// it is what lands in the .meta companion file.
std::string resolved_sweep_json(const SweepConfig& config);

} // namespace tlrisk
