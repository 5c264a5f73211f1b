#pragma once

#include <cstdint>
#include <span>

#include "tlrisk/model.hpp"

namespace tlrisk {

// Sampling estimators for quantities the library computes in closed form.
// They share nothing with the closed-form code paths beyond the covariance
// root, so they serve as independent checks in `verify` and in tests.

// E[relu(W x) relu(W x)^T] with x ~ N(0, cov), from n samples.
Matrix mc_arccos_covariance(const Matrix& weights, const SymMatrix& cov, std::size_t n,
                            std::uint64_t seed);

// E[(relu(a.z) - relu(b.z))^2] with z standard normal, from n samples.
double mc_relu_discrepancy(std::span<const double> a, std::span<const double> b, std::size_t n,
                           std::uint64_t seed);

// KL divergence between the joint (x, y) laws of two tasks, estimated as the
// average log-likelihood ratio over n draws from the first task.
double mc_kl_divergence(const ModelSpec& spec, const TaskParams& first,
                        const TaskParams& second, CovSide side, std::size_t n,
                        std::uint64_t seed);

} // namespace tlrisk
