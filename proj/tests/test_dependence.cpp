#include "wtineq/dependence.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace wtineq;

namespace {

Matrix two_state(double a, double b) {
  Matrix t(2, 2);
  t << 1 - a, a, b, 1 - b;
  return t;
}

Matrix random_stochastic(std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  std::gamma_distribution<double> g(1.0);
  Matrix t(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (Eigen::Index r = 0; r < t.rows(); ++r) {
    for (Eigen::Index c = 0; c < t.cols(); ++c) t(r, c) = g(rng) + 1e-3;
    t.row(r) /= t.row(r).sum();
  }
  return t;
}

}  // namespace

TEST(Gamma, TwoStateChainDecaysLikeSqrtPowers) {
  const Matrix t = two_state(0.3, 0.3);
  const auto pm = markov_chain(t, 0, 5);
  const auto gamma = gamma_from_kernel(pm, 2.0, MetricSpec::hamming(), MetricSpec::hamming());
  Matrix power = Matrix::Identity(2, 2);
  for (std::size_t lag = 1; lag < 5; ++lag) {
    power = power * t;
    const double tv = 0.5 * (power.row(0) - power.row(1)).cwiseAbs().sum();
    for (std::size_t i = 0; i + lag < 5; ++i) {
      EXPECT_NEAR(gamma(i + lag, i), std::sqrt(tv), 1e-12);
      EXPECT_NEAR(gamma(i + lag, i), std::pow(0.4, lag / 2.0), 1e-12);
    }
  }
  EXPECT_NEAR(gamma(1, 0), 0.632455532034, 1e-10);
  EXPECT_EQ(gamma.diagonal, 1.0);
}

TEST(Gamma, IndependentCoordinatesGiveDiagonal) {
  auto base = DiscreteSpace::indexed(3);
  const auto pm = path_measure(base, {0.2, 0.3, 0.5}, {Kernel::iid({0.6, 0.1, 0.3})}, 4);
  const auto gamma = gamma_from_kernel(pm, 2.0, MetricSpec::hamming(), MetricSpec::hamming());
  EXPECT_TRUE(gamma.values.isApprox(Matrix::Identity(4, 4)));
  EXPECT_NEAR(theorem_constant(1.0, gamma, 2.0, 4), 1.0, 1e-12);
  EXPECT_NEAR(theorem_constant(1.0, gamma, 1.0, 4), 4.0, 1e-12);
}

TEST(Gamma, TotalVariationFormMatchesHammingGamma) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto pm = markov_chain(random_stochastic(3, seed), 0, 4);
    for (double p : {1.0, 1.5, 2.0}) {
      const auto a = gamma_from_kernel(pm, p, MetricSpec::hamming(), MetricSpec::hamming());
      const auto b = tv_gamma(pm, p);
      EXPECT_LT((a.values - b.values).cwiseAbs().maxCoeff(), 1e-10) << "seed " << seed << " p " << p;
    }
  }
}

TEST(Gamma, HistoryDependentKernel) {
  // X_j copies X_{j-2} with probability 0.8, so coordinate j+1 ignores x_j given the rest.
  auto base = DiscreteSpace::indexed(2);
  auto rule = [](std::span<const std::size_t> h) {
    if (h.size() < 2) return std::vector<double>{0.5, 0.5};
    std::vector<double> r(2, 0.2);
    r[h[h.size() - 2]] = 0.8;
    return r;
  };
  const auto pm = path_measure(base, {0.5, 0.5}, {Kernel::general(rule)}, 3);
  const auto gamma = tv_gamma(pm, 1.0);
  EXPECT_NEAR(gamma(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(gamma(2, 0), 0.6, 1e-12);
  EXPECT_NEAR(gamma(2, 1), 0.0, 1e-12);
}

TEST(Gamma, EuclideanMetricUsesDominationConstant) {
  auto base = DiscreteSpace::real_line({0.0, 1.0, 3.0});
  const auto pm = path_measure(base, {0.3, 0.3, 0.4}, {Kernel::markov(random_stochastic(3, 77))}, 3);
  const auto gamma = gamma_from_kernel(pm, 1.0, MetricSpec::euclidean(), MetricSpec::hamming());
  EXPECT_DOUBLE_EQ(gamma.diagonal, 3.0);
  // W_1 under |x-y| is bounded by 3 TV, so each entry is at most 3 times the TV entry.
  const auto tv = tv_gamma(pm, 1.0);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < k; ++i) EXPECT_LE(gamma(k, i), 3.0 * tv(k, i) + 1e-12);
}

TEST(Gamma, RejectsDegenerateSecondMetric) {
  auto base = DiscreteSpace::indexed(2);
  Matrix zero = Matrix::Zero(2, 2);
  const auto pm = path_measure(base, {0.5, 0.5}, {Kernel::markov(two_state(0.3, 0.3))}, 2);
  EXPECT_THROW(gamma_from_kernel(pm, 2.0, MetricSpec::hamming(), MetricSpec::from_table(zero)), DomainError);
}

TEST(Gamma, UniformMixingDominatesTotalVariationGamma) {
  for (std::uint64_t seed = 20; seed < 30; ++seed) {
    const auto pm = markov_chain(random_stochastic(3, seed), 1, 5);
    for (double p : {1.0, 2.0}) {
      const auto g = tv_gamma(pm, p);
      for (std::size_t k = 0; k < 5; ++k)
        for (std::size_t i = 0; i < k; ++i)
          EXPECT_LE(std::pow(g(k, i), p), 2.0 * phi_mixing(pm, k - i) + 1e-12);
    }
  }
}

TEST(Norms, GoldenRatioExample) {
  Matrix a(2, 2);
  a << 1, 0, 1, 1;
  EXPECT_NEAR(subordinated_norm(a, 2.0), 1.618034, 1e-6);
  EXPECT_NEAR(subordinated_norm(a, 2.0), (1.0 + std::sqrt(5.0)) / 2.0, 1e-10);
  EXPECT_DOUBLE_EQ(subordinated_norm(a, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(subordinated_norm(a, kInfinityNorm), 2.0);
}

TEST(Norms, PowerIterationMatchesDenseEigenSolver) {
  Rng rng(2024);
  std::uniform_int_distribution<int> size(1, 64);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = size(rng);
    Matrix a = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k) {
      a(k, k) = 1.0;
      for (int i = 0; i < k; ++i) a(k, i) = unit(rng) * unit(rng);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a.transpose() * a);
    const double oracle = std::sqrt(eig.eigenvalues().maxCoeff());
    EXPECT_NEAR(subordinated_norm(a, 2.0), oracle, 1e-8 * oracle) << "trial " << trial << " n " << n;
  }
}

TEST(Norms, InterpolationBound) {
  Rng rng(9);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix a = Matrix::Identity(6, 6);
    for (int k = 0; k < 6; ++k)
      for (int i = 0; i < k; ++i) a(k, i) = unit(rng);
    const double two = subordinated_norm(a, 2.0);
    EXPECT_LE(two, std::sqrt(subordinated_norm(a, 1.0) * subordinated_norm(a, kInfinityNorm)) + 1e-12);
  }
}

TEST(Norms, StationaryBound) {
  Rng rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> size(2, 30);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::size_t>(size(rng));
    const double m = 0.5 + unit(rng);
    std::vector<double> g(n - 1);
    for (double& v : g) v = unit(rng) * std::pow(unit(rng), 2);
    const auto gamma = GammaMatrix::stationary(n, m, g);
    const double bound = m + std::accumulate(g.begin(), g.end(), 0.0);
    for (double p : {1.0, 2.0, kInfinityNorm}) EXPECT_LE(subordinated_norm(gamma, p), bound + 1e-10);
  }
}

TEST(Norms, ValidationRejectsBadShapes) {
  GammaMatrix g = GammaMatrix::identity(3);
  g.values(0, 2) = 0.1;
  EXPECT_THROW(g.validate(), DomainError);
  g = GammaMatrix::identity(3);
  g.values(2, 0) = -0.1;
  EXPECT_THROW(g.validate(), DomainError);
  EXPECT_THROW(subordinated_norm(Matrix::Identity(2, 2), 3.0), DomainError);
}

TEST(Wti, TwoStateChainPasses) {
  const auto pm = markov_chain(two_state(0.3, 0.3), 0, 3);
  WtiOptions opt;
  opt.workers = 4;
  const auto rep = verify_wti(pm, 2.0, MetricSpec::hamming(), MetricSpec::hamming(), 1.0, 40, 5, opt);
  EXPECT_EQ(rep.verdict, Verdict::Pass);
  ASSERT_TRUE(rep.left && rep.right);
  EXPECT_LE(*rep.left, *rep.right + 1e-6);
}

TEST(Wti, ResultDoesNotDependOnWorkerCount) {
  const auto pm = markov_chain(two_state(0.2, 0.4), 1, 2);
  WtiOptions one, many;
  many.workers = 3;
  const auto a = verify_wti(pm, 2.0, MetricSpec::hamming(), MetricSpec::hamming(), 1.0, 12, 99, one);
  const auto b = verify_wti(pm, 2.0, MetricSpec::hamming(), MetricSpec::hamming(), 1.0, 12, 99, many);
  EXPECT_EQ(a.left, b.left);
  EXPECT_EQ(a.right, b.right);
}

TEST(Wti, TinyConstantIsCaught) {
  const auto pm = markov_chain(two_state(0.3, 0.3), 0, 2);
  WtiOptions opt;
  opt.constant_scale = 0.01;
  const auto rep = verify_wti(pm, 2.0, MetricSpec::hamming(), MetricSpec::hamming(), 1.0, 30, 3, opt);
  EXPECT_EQ(rep.verdict, Verdict::Fail);
}
