#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "con360/metrics.hpp"

namespace met = con360::metrics;
using con360::ErrorKind;
using con360::TensorF;

namespace {

template <typename Fn>
ErrorKind kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const con360::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::kParse;
}

met::GaussianStats gaussian(std::vector<double> mean, std::vector<double> cov_rows) {
  const auto d = static_cast<Eigen::Index>(mean.size());
  met::GaussianStats g;
  g.mean = Eigen::Map<Eigen::VectorXd>(mean.data(), d);
  g.cov = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      cov_rows.data(), d, d);
  return g;
}

Eigen::MatrixXd random_psd(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Eigen::MatrixXd a(d, d);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = n(rng);
  return a * a.transpose();
}

met::EmbeddingSet sample(std::size_t n, Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  met::EmbeddingSet e;
  e.vectors.resize(static_cast<Eigen::Index>(n), d);
  for (Eigen::Index i = 0; i < e.vectors.size(); ++i) e.vectors.data()[i] = g(rng);
  return e;
}

}  // namespace

TEST(ProbMap, Examples) {
  const std::vector<float> zeros(6, 0.0f);
  for (double v : met::to_prob_map(zeros, 2, 3, 1e-8).values) EXPECT_DOUBLE_EQ(v, 1.0 / 6.0);
  const std::vector<float> two = {1.0f, 3.0f};
  const auto p = met::to_prob_map(two, 1, 2, 1e-12);
  EXPECT_NEAR(p.values[0], 0.25, 1e-12);
  EXPECT_NEAR(p.values[1], 0.75, 1e-12);
  const std::vector<float> neg = {1.0f, -1.0f};
  EXPECT_EQ(kind_of([&] { met::to_prob_map(neg, 1, 2, 1e-8); }), ErrorKind::kDomain);
  EXPECT_EQ(kind_of([&] { met::to_prob_map(two, 1, 2, 0.0); }), ErrorKind::kParameter);
  EXPECT_EQ(kind_of([&] { met::to_prob_map(two, 2, 2, 1e-8); }), ErrorKind::kShape);
}

TEST(ProbMap, SumsToOne) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> d(0.0f, 5.0f);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<float> v(16 * 32);
    for (auto& x : v) x = d(rng);
    const auto p = met::to_prob_map(v, 16, 32, 1e-8);
    EXPECT_NEAR(std::accumulate(p.values.begin(), p.values.end(), 0.0), 1.0, 1e-12);
  }
}

TEST(Kl, SelfIsExactlyZero) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<float> d(0.0f, 1.0f);
  std::vector<float> v(64);
  for (auto& x : v) x = d(rng);
  const auto p = met::to_prob_map(v, 8, 8, 1e-8);
  EXPECT_EQ(met::kl_divergence(p, p), 0.0);
}

TEST(Kl, DeltaVersusUniformIsLnFour) {
  const std::vector<float> delta = {1, 0, 0, 0};
  const std::vector<float> flat = {1, 1, 1, 1};
  const double kl = met::kl_divergence(met::to_prob_map(delta, 2, 2, 1e-8),
                                       met::to_prob_map(flat, 2, 2, 1e-8));
  EXPECT_NEAR(kl, std::log(4.0), 1e-5);
}

TEST(Kl, GibbsInequality) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> d(0.0f, 1.0f);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<float> a(12), b(12);
    for (auto& x : a) x = d(rng);
    for (auto& x : b) x = d(rng);
    EXPECT_GE(met::kl_divergence(met::to_prob_map(a, 3, 4, 1e-8), met::to_prob_map(b, 3, 4, 1e-8)),
              -1e-12);
  }
}

TEST(Kl, ErrorsAndZeroMass) {
  met::ProbMap p{1, 2, {0.0, 1.0}};
  met::ProbMap q{1, 2, {0.5, 0.5}};
  EXPECT_NEAR(met::kl_divergence(p, q), std::log(2.0), 1e-15);
  met::ProbMap z{1, 2, {1.0, 0.0}};
  EXPECT_EQ(kind_of([&] { met::kl_divergence(p, z); }), ErrorKind::kDomain);
  met::ProbMap r{2, 1, {0.5, 0.5}};
  EXPECT_EQ(kind_of([&] { met::kl_divergence(p, r); }), ErrorKind::kShape);
}

TEST(Skl, MeanOfFrameTerms) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<float> d(0.0f, 1.0f);
  TensorF a({2, 4, 8}), b({2, 4, 8});
  for (auto& x : a.data()) x = d(rng);
  for (auto& x : b.data()) x = d(rng);
  EXPECT_EQ(met::s_kl(a, a), 0.0);
  const auto terms = met::s_kl_terms(a, b, 1e-8);
  ASSERT_EQ(terms.size(), 2u);
  auto k = [&](std::size_t t) {
    return met::kl_divergence(met::to_prob_map(a.slab(t), 4, 8, 1e-8),
                              met::to_prob_map(b.slab(t), 4, 8, 1e-8));
  };
  EXPECT_EQ(terms[0], k(0));
  EXPECT_EQ(terms[1], k(1));
  EXPECT_DOUBLE_EQ(met::s_kl(a, b), (k(0) + k(1)) / 2);
  // Generated is the first argument.
  EXPECT_NE(met::s_kl(a, b), met::s_kl(b, a));

  TensorF a2(a.shape()), b2(b.shape());
  std::ranges::copy(a.slab(1), a2.slab(0).begin());
  std::ranges::copy(a.slab(0), a2.slab(1).begin());
  std::ranges::copy(b.slab(1), b2.slab(0).begin());
  std::ranges::copy(b.slab(0), b2.slab(1).begin());
  EXPECT_NEAR(met::s_kl(a2, b2), met::s_kl(a, b), 1e-15);

  EXPECT_EQ(kind_of([&] { met::s_kl(a, TensorF({3, 4, 8})); }), ErrorKind::kShape);
  EXPECT_EQ(kind_of([&] { met::s_kl(TensorF({0, 4, 8}), TensorF({0, 4, 8})); }),
            ErrorKind::kShape);
}

TEST(PairwiseSum, MatchesAccumulateAndIsExactOnIntegers) {
  std::vector<double> v(1001);
  std::iota(v.begin(), v.end(), 0.0);
  EXPECT_EQ(met::pairwise_sum(v), 500500.0);
  EXPECT_EQ(met::pairwise_sum({}), 0.0);
}

TEST(GaussianFit, Examples) {
  met::EmbeddingSet e;
  e.vectors = Eigen::MatrixXd(2, 1);
  e.vectors << 0.0, 2.0;
  const auto g = met::gaussian_fit(e);
  EXPECT_DOUBLE_EQ(g.mean(0), 1.0);
  EXPECT_DOUBLE_EQ(g.cov(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(met::gaussian_fit(e, met::CovarianceEstimator::kMaximumLikelihood).cov(0, 0),
                   1.0);

  met::EmbeddingSet same;
  same.vectors = Eigen::MatrixXd::Constant(5, 3, 1.5);
  EXPECT_TRUE(met::gaussian_fit(same).cov.isZero(0.0));

  std::mt19937_64 rng(5);
  const auto s = met::gaussian_fit(sample(40, 6, rng));
  EXPECT_TRUE(s.cov == s.cov.transpose());

  met::EmbeddingSet one;
  one.vectors = Eigen::MatrixXd::Zero(1, 3);
  EXPECT_EQ(kind_of([&] { met::gaussian_fit(one); }), ErrorKind::kInsufficientSamples);
}

TEST(SqrtPsd, Examples) {
  EXPECT_TRUE(met::matrix_sqrt_psd(Eigen::MatrixXd::Identity(3, 3))
                  .isApprox(Eigen::MatrixXd::Identity(3, 3), 1e-14));
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 4;
  d(1, 1) = 9;
  const auto r = met::matrix_sqrt_psd(d);
  EXPECT_NEAR(r(0, 0), 2.0, 1e-14);
  EXPECT_NEAR(r(1, 1), 3.0, 1e-14);
  EXPECT_NEAR(r(0, 1), 0.0, 1e-14);
  Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(2, 2);
  asym(0, 1) = 1e-3;
  EXPECT_EQ(kind_of([&] { met::matrix_sqrt_psd(asym); }), ErrorKind::kDomain);
}

TEST(SqrtPsd, SquareReproducesInput) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = random_psd(5, rng);
    const auto r = met::matrix_sqrt_psd(m);
    EXPECT_LT((r * r - m).norm(), 1e-8);
  }
}

TEST(Frechet, ClosedFormOneDimensional) {
  EXPECT_NEAR(met::frechet_distance(gaussian({0}, {1}), gaussian({1}, {1})), 1.0, 1e-9);
  EXPECT_NEAR(met::frechet_distance(gaussian({0}, {1}), gaussian({0}, {4})), 1.0, 1e-9);
  EXPECT_NEAR(met::frechet_distance(gaussian({2}, {9}), gaussian({-1}, {1})), 9.0 + 4.0, 1e-9);
  const auto g = gaussian({1, 2}, {2, 0.5, 0.5, 1});
  EXPECT_NEAR(met::frechet_distance(g, g), 0.0, 1e-12);
  EXPECT_EQ(kind_of([&] { met::frechet_distance(g, gaussian({0}, {1})); }), ErrorKind::kShape);
}

TEST(Frechet, CommutingCovariancesClosedForm) {
  // Diagonal covariances commute: tr term reduces to sum (sqrt a - sqrt b)^2.
  const auto a = gaussian({0, 1, 2}, {1, 0, 0, 0, 4, 0, 0, 0, 9});
  const auto b = gaussian({1, 1, 0}, {4, 0, 0, 0, 1, 0, 0, 0, 16});
  const double expected = (1 + 0 + 4) + (1 + 1 + 1);
  EXPECT_NEAR(met::frechet_distance(a, b), expected, 1e-9);
}

TEST(Frechet, SymmetricAndNonNegative) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 30; ++trial) {
    met::GaussianStats a{Eigen::VectorXd::NullaryExpr(4, [&] { return n(rng); }),
                         random_psd(4, rng)};
    met::GaussianStats b{Eigen::VectorXd::NullaryExpr(4, [&] { return n(rng); }),
                         random_psd(4, rng)};
    const double ab = met::frechet_distance(a, b);
    EXPECT_GE(ab, 0.0);
    EXPECT_NEAR(ab, met::frechet_distance(b, a), 1e-8 * std::max(1.0, ab));
  }
}

TEST(Frechet, SampledHalvesShrinkWithN) {
  std::mt19937_64 rng(8);
  std::vector<double> dist;
  for (std::size_t n : {100u, 1000u, 10000u}) {
    const auto a = met::gaussian_fit(sample(n / 2, 8, rng));
    const auto b = met::gaussian_fit(sample(n / 2, 8, rng));
    dist.push_back(met::frechet_distance(a, b));
  }
  EXPECT_GT(dist[0], dist[1]);
  EXPECT_GT(dist[1], dist[2]);
}

TEST(Embeddings, FromTensor) {
  con360::TensorD t({3, 2}, {1, 2, 3, 4, 5, 6});
  const auto e = met::embeddings_from_tensor(t, "clap");
  EXPECT_EQ(e.vectors.rows(), 3);
  EXPECT_EQ(e.vectors(2, 1), 6.0);
  EXPECT_EQ(e.source, "clap");
  EXPECT_EQ(kind_of([] { met::embeddings_from_tensor(con360::TensorD({6})); }), ErrorKind::kShape);
}
