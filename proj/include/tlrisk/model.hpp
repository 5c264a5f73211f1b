#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tlrisk/matrix.hpp"

namespace tlrisk {

// Three regression families sharing the interface y = f(params; x) + noise
// with x ~ N(0, cov) and isotropic Gaussian label noise:
//   Linear          f = W x            trainable W  (output_dim x input_dim)
//   NetFixedOutput  f = V relu(W x)    trainable W  (hidden_width x input_dim), V fixed
//   NetFixedInput   f = V relu(W x)    trainable V  (output_dim x hidden_width), W fixed
enum class ModelKind { Linear, NetFixedOutput, NetFixedInput };

enum class CovSide { Source, Target };

struct ModelSpec {
    ModelKind kind = ModelKind::Linear;
    std::size_t input_dim = 0;
    std::size_t output_dim = 0;
    std::size_t hidden_width = 0; // unused for Linear
    double noise_stddev = 1.0;
    SymMatrix cov_source;
    SymMatrix cov_target;
    std::optional<Matrix> fixed_matrix; // V or W of the net variants

    const SymMatrix& cov(CovSide side) const {
        return side == CovSide::Source ? cov_source : cov_target;
    }
};

ModelSpec make_linear_spec(std::size_t input_dim, std::size_t output_dim,
                           double noise_stddev, SymMatrix cov_source, SymMatrix cov_target);
ModelSpec make_fixed_output_spec(std::size_t input_dim, std::size_t output_dim,
                                 std::size_t hidden_width, double noise_stddev,
                                 SymMatrix cov_source, SymMatrix cov_target, Matrix output_map);
ModelSpec make_fixed_input_spec(std::size_t input_dim, std::size_t output_dim,
                                std::size_t hidden_width, double noise_stddev,
                                SymMatrix cov_source, SymMatrix cov_target, Matrix feature_map);

// Shape of the trainable parameter matrix for this model family.
std::size_t trainable_rows(const ModelSpec& spec);
std::size_t trainable_cols(const ModelSpec& spec);

struct TaskParams {
    Matrix matrix;
};

struct TaskPair {
    TaskParams source;
    TaskParams target;
};

// Provenance tag only; no computation reads it.
enum class DataRole { Source, Target, Validation, Test };

struct Dataset {
    Matrix features; // n x input_dim
    Matrix labels;   // n x output_dim
    DataRole role = DataRole::Target;
    std::uint64_t seed = 0;
    std::size_t size() const { return features.rows(); }
    bool empty() const { return features.rows() == 0; }
};

std::vector<double> forward(const ModelSpec& spec, const TaskParams& params,
                            std::span<const double> x);

// n i.i.d. samples: features x ~ N(0, cov(side)), labels f(params; x) plus
// N(0, noise_stddev^2) per output coordinate.  Deterministic in `seed`; the
// first min(n, m) samples of two calls with the same seed coincide.
Dataset sample_dataset(const ModelSpec& spec, const TaskParams& params, std::size_t n,
                       CovSide side, std::uint64_t seed);

// Recipe for a synthetic task pair: a base parameter matrix with i.i.d.
// N(0, entry_variance) entries, and a counterpart displaced by scale * M with
// M i.i.d. N(0, perturbation_variance).  base_role says which of the two
// tasks is the base.  Variances are variances, not standard deviations.
struct PairRecipe {
    std::uint64_t base_seed = 0;
    double entry_variance = 1.0;
    double perturbation_variance = 0.0;
    double scale = 1.0;
    CovSide base_role = CovSide::Source;
};

TaskPair make_synthetic_pair(const ModelSpec& spec, const PairRecipe& recipe);

} // namespace tlrisk
