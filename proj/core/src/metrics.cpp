#include "con360/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "con360/error.hpp"
#include "con360/parallel.hpp"

namespace con360::metrics {

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

ProbMap to_prob_map(std::span<const float> values, std::size_t height, std::size_t width,
                    double eps) {
  if (!(eps > 0.0)) raise(ErrorKind::kParameter, "smoothing eps must be > 0");
  if (values.size() != height * width) raise(ErrorKind::kShape, "map size does not match dims");
  ProbMap p{height, width, std::vector<double>(values.size())};
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (!std::isfinite(v) || v < 0.0) {
      raise(ErrorKind::kDomain, "saliency values must be finite and >= 0");
    }
    p.values[i] = v + eps;
  }
  const double total = pairwise_sum(p.values);
  for (double& v : p.values) v /= total;
  return p;
}

double kl_divergence(const ProbMap& p, const ProbMap& q) {
  if (p.height != q.height || p.width != q.width || p.values.size() != q.values.size()) {
    raise(ErrorKind::kShape, "KL inputs have different dimensions");
  }
  std::vector<double> terms(p.values.size(), 0.0);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const double pi = p.values[i];
    if (pi == 0.0) continue;
    if (!(q.values[i] > 0.0)) raise(ErrorKind::kDomain, "KL reference has a zero bin");
    terms[i] = pi * std::log(pi / q.values[i]);
  }
  return pairwise_sum(terms);
}

std::vector<double> s_kl_terms(const TensorF& generated, const TensorF& target, double eps) {
  if (generated.rank() != 3 || generated.shape() != target.shape()) {
    raise(ErrorKind::kShape, "S_KL inputs must share one (T, H, W) shape, got " +
                                 shape_to_string(generated.shape()) + " and " +
                                 shape_to_string(target.shape()));
  }
  const std::size_t frames = generated.dim(0);
  if (frames == 0) raise(ErrorKind::kShape, "S_KL needs at least one frame");
  const std::size_t h = generated.dim(1);
  const std::size_t w = generated.dim(2);
  std::vector<double> terms(frames);
  parallel_for(frames, [&](std::size_t t) {
    terms[t] = kl_divergence(to_prob_map(generated.slab(t), h, w, eps),
                             to_prob_map(target.slab(t), h, w, eps));
  });
  return terms;
}

double s_kl(const TensorF& generated, const TensorF& target, double eps) {
  const auto terms = s_kl_terms(generated, target, eps);
  return pairwise_sum(terms) / static_cast<double>(terms.size());
}

EmbeddingSet embeddings_from_tensor(const TensorD& t, std::string source) {
  if (t.rank() != 2) {
    raise(ErrorKind::kShape, "embeddings must be (N, D), got " + shape_to_string(t.shape()));
  }
  EmbeddingSet e;
  e.source = std::move(source);
  e.vectors.resize(static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.dim(1)));
  for (std::size_t i = 0; i < t.dim(0); ++i) {
    for (std::size_t j = 0; j < t.dim(1); ++j) {
      e.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t[i * t.dim(1) + j];
    }
  }
  return e;
}

GaussianStats gaussian_fit(const EmbeddingSet& e, CovarianceEstimator estimator) {
  const Eigen::Index n = e.vectors.rows();
  if (n < 2) raise(ErrorKind::kInsufficientSamples, "covariance needs at least 2 samples");
  if (e.vectors.cols() < 1) raise(ErrorKind::kShape, "embeddings need at least one dimension");
  if (!e.vectors.allFinite()) raise(ErrorKind::kInvalidData, "embeddings contain NaN or infinity");
  GaussianStats stats;
  stats.mean = e.vectors.colwise().mean().transpose();
  const Eigen::MatrixXd centered = e.vectors.rowwise() - stats.mean.transpose();
  const double divisor =
      estimator == CovarianceEstimator::kUnbiased ? static_cast<double>(n - 1) : static_cast<double>(n);
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / divisor;
  stats.cov = (cov + cov.transpose()) / 2.0;
  return stats;
}

Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) raise(ErrorKind::kShape, "matrix sqrt needs a square matrix");
  if (m.size() == 0) return m;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    raise(ErrorKind::kDomain, "matrix sqrt input is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) raise(ErrorKind::kDomain, "eigendecomposition failed");
  const Eigen::VectorXd roots = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * roots.asDiagonal() * solver.eigenvectors().transpose();
}

double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
  if (a.mean.size() != b.mean.size() || a.cov.rows() != b.cov.rows() ||
      a.cov.rows() != a.mean.size()) {
    raise(ErrorKind::kShape, "Frechet inputs have different dimensions");
  }
  const Eigen::MatrixXd root_a = matrix_sqrt_psd(a.cov);
  Eigen::MatrixXd inner = root_a * b.cov * root_a;
  inner = (inner + inner.transpose()) / 2.0;
  const double cross = matrix_sqrt_psd(inner).trace();
  const double value =
      (a.mean - b.mean).squaredNorm() + a.cov.trace() + b.cov.trace() - 2.0 * cross;
  return std::max(value, 0.0);
}

}  // namespace con360::metrics
