#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "con360/tensor.hpp"

namespace con360::metrics {

// Sum in a fixed pairwise tree so reductions do not depend on chunking.
double pairwise_sum(std::span<const double> values);

struct ProbMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;  // sums to 1
};

// (v + eps) / sum(v + eps). Throws kDomain for negative or non-finite values,
// kParameter for eps <= 0.
ProbMap to_prob_map(std::span<const float> values, std::size_t height, std::size_t width,
                    double eps);

// sum p * ln(p / q) with 0 * ln(0 / q) = 0. Throws kShape on mismatched dims,
// kDomain when q has a zero where p does not.
double kl_divergence(const ProbMap& p, const ProbMap& q);

inline constexpr double kDefaultEps = 1e-8;

// Mean over frames of KL(Sal(generated_t) || Sal(target_t)) for (T, H, W)
// tensors. Throws kShape on mismatched shapes or T == 0.
double s_kl(const TensorF& generated, const TensorF& target, double eps = kDefaultEps);

// Per-frame terms, in frame order.
std::vector<double> s_kl_terms(const TensorF& generated, const TensorF& target, double eps);

struct EmbeddingSet {
  Eigen::MatrixXd vectors;  // N x D
  std::string source;
};

// From an (N, D) tensor.
EmbeddingSet embeddings_from_tensor(const TensorD& t, std::string source = {});

struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

enum class CovarianceEstimator { kUnbiased, kMaximumLikelihood };

// Sample mean and covariance, symmetrized as (C + C^T) / 2. Throws
// kInsufficientSamples for N < 2.
GaussianStats gaussian_fit(const EmbeddingSet& e,
                           CovarianceEstimator estimator = CovarianceEstimator::kUnbiased);

// Symmetric eigendecomposition with eigenvalues clamped at 0. Throws kDomain
// when |m - m^T| exceeds 1e-9 (scaled by max(1, max|m|)).
Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& m);

// |mu_a - mu_b|^2 + tr(S_a + S_b - 2 sqrt(S_a^1/2 S_b S_a^1/2)), clamped at 0.
double frechet_distance(const GaussianStats& a, const GaussianStats& b);

}  // namespace con360::metrics
