#include "wtineq/transport.hpp"

#include <gtest/gtest.h>

using namespace wtineq;

namespace {

SpacePtr binary() { return DiscreteSpace::indexed(2); }

// Markov coupling of P and Q: a mixture of the independent sequential coupling
// and an optimal coupling for a random cost.
Coupling random_markov_coupling(const DiscreteMeasure& p, const DiscreteMeasure& q, std::uint64_t seed) {
  const auto& s = p.space();
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  Matrix alpha(static_cast<Eigen::Index>(s.length()), static_cast<Eigen::Index>(s.size()));
  for (Eigen::Index i = 0; i < alpha.size(); ++i) alpha.data()[i] = u(rng);
  const auto vertex = weak_cost_fixed_alpha(p, q, {alpha}, MetricSpec::hamming(), true).coupling.joint;
  // The independent coupling P x Q is sequential: its steps are products of
  // the one-step conditionals.
  const Vector pv = Eigen::Map<const Vector>(p.weights().data(), static_cast<Eigen::Index>(p.size()));
  const Vector qv = Eigen::Map<const Vector>(q.weights().data(), static_cast<Eigen::Index>(q.size()));
  const Matrix indep = pv * qv.transpose();
  const double w = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return Coupling{p.space_ptr(), w * vertex + (1.0 - w) * indep};
}

double dot(const std::vector<double>& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b(static_cast<Eigen::Index>(i));
  return s;
}

}  // namespace

TEST(TransportLp, DualCertificateOnRandomProblems) {
  Rng rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = 1 + trial % 6, k = 1 + (trial / 6) % 7;
    auto a = random_measure(DiscreteSpace::indexed(m), 10 + trial, 0.5).weights();
    auto b = random_measure(DiscreteSpace::indexed(k), 20000 + trial, 0.5).weights();
    if (trial % 5 == 0 && m > 1) a[0] = 0.0, a = DiscreteMeasure::normalized(DiscreteSpace::indexed(m), a).weights();
    Matrix c(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = trial % 3 == 0 ? std::floor(3 * u(rng)) : u(rng);
    const auto plan = solve_transport(a, b, c);
    for (std::size_t i = 0; i < m; ++i) EXPECT_NEAR(plan.plan.row(static_cast<Eigen::Index>(i)).sum(), a[i], 1e-12);
    for (std::size_t j = 0; j < k; ++j) EXPECT_NEAR(plan.plan.col(static_cast<Eigen::Index>(j)).sum(), b[j], 1e-12);
    EXPECT_GE(plan.plan.minCoeff(), 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < k; ++j)
        EXPECT_LE(plan.row_potential(static_cast<Eigen::Index>(i)) + plan.col_potential(static_cast<Eigen::Index>(j)),
                  c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) + 1e-11);
    EXPECT_NEAR(dot(a, plan.row_potential) + dot(b, plan.col_potential), plan.cost, 1e-11);
  }
}

TEST(TransportLp, DegenerateEqualMarginals) {
  const std::vector<double> a{0.25, 0.25, 0.25, 0.25};
  Matrix c = Matrix::Ones(4, 4) - Matrix::Identity(4, 4);
  const auto plan = solve_transport(a, a, c);
  EXPECT_NEAR(plan.cost, 0.0, 1e-15);
  const auto again = solve_transport(a, a, c);
  EXPECT_EQ(plan.plan, again.plan);
}

TEST(TransportLp, RejectsUnbalancedMarginals) {
  const std::vector<double> a{0.5, 0.5}, b{0.5, 0.4};
  EXPECT_THROW(solve_transport(a, b, Matrix::Zero(2, 2)), NumericError);
}

TEST(Wasserstein, IdentityIsZero) {
  auto e = DiscreteSpace::indexed(4);
  const auto p = random_measure(e, 3, 1.0);
  EXPECT_NEAR(wasserstein(p, p, 1.0, MetricSpec::hamming()).value, 0.0, 1e-15);
  EXPECT_NEAR(wasserstein(p, p, 2.0, MetricSpec::hamming()).value, 0.0, 1e-15);
}

TEST(Wasserstein, HammingEqualsTotalVariationByBruteForce) {
  // One-parameter coupling family for two points: pi(0,0) = t.
  DiscreteMeasure p(binary(), {0.5, 0.5}), q(binary(), {1.0, 0.0});
  double brute = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 1000; ++i) {
    const double t = i / 1000.0;
    const double p01 = 0.5 - t, p10 = 1.0 - t, p11 = t - 0.5;
    if (p01 < -1e-15 || p11 < -1e-15 || p10 < -1e-15) continue;
    brute = std::min(brute, p01 + p10);
  }
  EXPECT_NEAR(wasserstein(p, q, 1.0, MetricSpec::hamming()).value, 0.5, 1e-15);
  EXPECT_NEAR(brute, 0.5, 1e-12);
}

TEST(Wasserstein, PointMassesOnTheLine) {
  auto e = DiscreteSpace::real_line({0.0, 1.0});
  for (double p : {1.0, 1.5, 2.0}) {
    EXPECT_NEAR(wasserstein(DiscreteMeasure::dirac(e, 0), DiscreteMeasure::dirac(e, 1), p, MetricSpec::euclidean()).value,
                1.0, 1e-15);
  }
}

TEST(Wasserstein, OneDimensionalCdfFormula) {
  auto e = DiscreteSpace::real_line({-1.0, 0.0, 0.5, 2.0, 3.5});
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto p = random_measure(e, s, 0.8);
    const auto q = random_measure(e, 500 + s, 0.8);
    const double xs[] = {-1.0, 0.0, 0.5, 2.0, 3.5};
    double fp = 0.0, fq = 0.0, oracle = 0.0;
    for (int i = 0; i < 4; ++i) {
      fp += p[static_cast<std::size_t>(i)];
      fq += q[static_cast<std::size_t>(i)];
      oracle += std::abs(fp - fq) * (xs[i + 1] - xs[i]);
    }
    const auto w = wasserstein(p, q, 1.0, MetricSpec::euclidean());
    EXPECT_NEAR(w.value, oracle, 1e-12);
    EXPECT_LE(w.coupling.margin_error(p, q), 1e-12);
  }
}

TEST(WeakCostFixedAlpha, ZeroAlphaCostsNothing) {
  auto e = DiscreteSpace::indexed(3);
  const auto p = random_measure(e, 1, 1.0), q = random_measure(e, 2, 1.0);
  EXPECT_EQ(weak_cost_fixed_alpha(p, q, AlphaWeights::constant(1, 3, 0.0), MetricSpec::hamming()).value, 0.0);
}

TEST(WeakCostFixedAlpha, UnitAlphaIsW1) {
  auto e = DiscreteSpace::real_line({0.0, 1.0, 4.0});
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto p = random_measure(e, s, 1.0), q = random_measure(e, 100 + s, 1.0);
    EXPECT_NEAR(weak_cost_fixed_alpha(p, q, AlphaWeights::constant(1, 3, 1.0), MetricSpec::euclidean()).value,
                wasserstein(p, q, 1.0, MetricSpec::euclidean()).value, 1e-12);
  }
}

TEST(WeakCostFixedAlpha, NegativeAlphaRejected) {
  auto e = DiscreteSpace::indexed(2);
  DiscreteMeasure p(e, {0.5, 0.5});
  EXPECT_THROW(weak_cost_fixed_alpha(p, p, AlphaWeights::constant(1, 2, -1.0), MetricSpec::hamming()), DomainError);
}

TEST(WeakCostFixedAlpha, MarkovChainAgainstCouplingGrid) {
  // n = 2 binary: a Markov coupling is a step-1 coupling (one parameter) and
  // one conditional coupling per (x1, y1) (one parameter each). The objective
  // is linear in each parameter, so a grid that contains the endpoints is exact.
  Matrix t(2, 2);
  t << 0.7, 0.3, 0.3, 0.7;
  const auto chain = markov_chain(t, 0, 2);
  const std::vector<double> mu{0.5, 0.5};
  const auto prod = path_measure(binary(), mu, {Kernel::iid(mu)}, 2);
  const auto& p = chain.joint();
  const auto& q = prod.joint();

  auto coupling2 = [](double a0, double b0, double t) {  // pi(0,0)=t for marginals (a0, 1-a0), (b0, 1-b0)
    Matrix c(2, 2);
    c << t, a0 - t, b0 - t, 1 - a0 - b0 + t;
    return c;
  };
  auto grid_min = [&](double a0, double b0, const std::function<double(const Matrix&)>& cost) {
    const double lo = std::max(0.0, a0 + b0 - 1.0), hi = std::min(a0, b0);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 200; ++i) best = std::min(best, cost(coupling2(a0, b0, lo + (hi - lo) * i / 200.0)));
    return best;
  };
  double h[2][2];
  for (int x1 = 0; x1 < 2; ++x1) {
    for (int y1 = 0; y1 < 2; ++y1) {
      const double a0 = t(x1, 0), b0 = 0.5;
      h[x1][y1] = grid_min(a0, b0, [&](const Matrix& c) {
        return (c(0, 1) + c(1, 0)) + (x1 != y1 ? 1.0 : 0.0);
      });
    }
  }
  const double oracle = grid_min(0.7, 0.5, [&](const Matrix& c) {
    return c(0, 0) * h[0][0] + c(0, 1) * h[0][1] + c(1, 0) * h[1][0] + c(1, 1) * h[1][1];
  });
  const auto r = weak_cost_fixed_alpha(p, q, AlphaWeights::constant(2, 4, 1.0), MetricSpec::hamming(), true);
  EXPECT_NEAR(r.value, oracle, 1e-6);
  EXPECT_TRUE(is_markov_coupling(r.coupling, p, q));
  const auto unrestricted =
      weak_cost_fixed_alpha(p, q, AlphaWeights::constant(2, 4, 1.0), MetricSpec::hamming(), false);
  EXPECT_LE(unrestricted.value, r.value + 1e-12);
}

TEST(WeakTransport, IdentityIsZero) {
  auto e = DiscreteSpace::indexed(3);
  const auto p = random_measure(e, 9, 1.0);
  const auto c = weak_transport_cost(p, p, 2.0, MetricSpec::hamming());
  EXPECT_NEAR(c.lower, 0.0, 1e-12);
  EXPECT_NEAR(c.upper, 0.0, 1e-12);
}

TEST(WeakTransport, ForcedCouplingExample) {
  DiscreteMeasure p(binary(), {1.0, 0.0}), q(binary(), {0.5, 0.5});
  const auto c = weak_transport_cost(p, q, 2.0, MetricSpec::hamming());
  EXPECT_NEAR(c.lower, std::sqrt(0.5), 1e-9);
  EXPECT_NEAR(c.upper, std::sqrt(0.5), 1e-9);
  EXPECT_NEAR(c.alpha(0, 0), 0.0, 1e-9);
  EXPECT_NEAR(c.alpha(0, 1), std::sqrt(2.0), 1e-9);
}

TEST(WeakTransport, PointMassTarget) {
  DiscreteMeasure p(binary(), {0.5, 0.5}), q(binary(), {1.0, 0.0});
  const auto c = weak_transport_cost(p, q, 2.0, MetricSpec::hamming());
  EXPECT_NEAR(c.lower, 0.5, 1e-9);
  EXPECT_NEAR(c.upper, 0.5, 1e-9);
}

TEST(WeakTransport, TwoPointUpperMatchesCouplingGrid) {
  // For two points the coupling family is one-dimensional; minimize the primal
  // objective by a fine grid and golden refinement.
  for (std::uint64_t s = 0; s < 40; ++s) {
    const auto p = random_measure(binary(), s, 1.0), q = random_measure(binary(), 77 + s, 1.0);
    auto objective = [&](double t) {
      Matrix c(2, 2);
      c << t, p[0] - t, q[0] - t, 1 - p[0] - q[0] + t;
      const double g0 = c(1, 0), g1 = c(0, 1);
      return std::sqrt(g0 * g0 / q[0] + g1 * g1 / q[1]);
    };
    const double lo = std::max(0.0, p[0] + q[0] - 1.0), hi = std::min(p[0], q[0]);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 20000; ++i) best = std::min(best, objective(lo + (hi - lo) * i / 20000.0));
    const auto c = weak_transport_cost(p, q, 2.0, MetricSpec::hamming());
    EXPECT_NEAR(c.upper, best, 1e-6);
    EXPECT_LE(c.gap(), 1e-8);
  }
}

TEST(WeakTransport, MinimaxGapClosesOnThreePoints) {
  auto e = DiscreteSpace::real_line({0.0, 1.0, 3.0});
  for (std::uint64_t s = 0; s < 60; ++s) {
    const auto p = random_measure(e, s, 0.7), q = random_measure(e, 1000 + s, 0.7);
    const auto metric = s % 2 ? MetricSpec::hamming() : MetricSpec::euclidean();
    const auto c = weak_transport_cost(p, q, 2.0, metric);
    EXPECT_LE(c.lower, c.upper + 1e-9);
    EXPECT_LE(c.gap(), 1e-4);
    EXPECT_TRUE(c.converged);
    EXPECT_LE(c.coupling.margin_error(p, q), 1e-9);
    EXPECT_NEAR(alpha_norm(c.alpha, q, 2.0), 1.0, 1e-9);
  }
}

TEST(WeakTransport, HolderDomination) {
  auto e = DiscreteSpace::real_line({0.0, 0.5, 2.0, 2.5});
  for (std::uint64_t s = 0; s < 60; ++s) {
    const auto p = random_measure(e, s, 1.0), q = random_measure(e, 300 + s, 1.0);
    const auto metric = s % 2 ? MetricSpec::hamming() : MetricSpec::euclidean();
    EXPECT_LE(weak_transport_cost(p, q, 2.0, metric).upper, wasserstein(p, q, 2.0, metric).value + 1e-6);
  }
}

TEST(WeakTransport, PEqualsOneCollapsesToW1) {
  auto e = DiscreteSpace::real_line({0.0, 1.0, 1.5, 4.0});
  for (std::uint64_t s = 0; s < 40; ++s) {
    const auto p = random_measure(e, s, 1.0), q = random_measure(e, 900 + s, 1.0);
    const auto c = weak_transport_cost(p, q, 1.0, MetricSpec::euclidean());
    const double w1 = wasserstein(p, q, 1.0, MetricSpec::euclidean()).value;
    EXPECT_EQ(c.lower, c.upper);
    EXPECT_NEAR(c.upper, w1, 1e-12);
  }
}

TEST(WeakTransport, IntermediateExponentBracketsAndIsMonotone) {
  auto e = DiscreteSpace::indexed(3);
  for (std::uint64_t s = 0; s < 15; ++s) {
    const auto p = random_measure(e, s, 1.0), q = random_measure(e, 50 + s, 1.0);
    const auto c15 = weak_transport_cost(p, q, 1.5, MetricSpec::hamming());
    const auto c2 = weak_transport_cost(p, q, 2.0, MetricSpec::hamming());
    const auto c1 = weak_transport_cost(p, q, 1.0, MetricSpec::hamming());
    EXPECT_LE(c15.lower, c15.upper + 1e-9);
    EXPECT_LE(c15.gap(), 1e-3);
    // Jensen: the cost is nondecreasing in p.
    EXPECT_LE(c1.lower, c15.upper + 1e-6);
    EXPECT_LE(c15.lower, c2.upper + 1e-6);
  }
}

TEST(WeakTransport, MarkovCostOnPathSpace) {
  Matrix t(2, 2);
  t << 0.7, 0.3, 0.3, 0.7;
  const auto chain = markov_chain(t, 0, 2);
  auto s = chain.joint().space_ptr();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto q = random_measure(s, seed, 1.0);
    const auto markov = weak_transport_cost(chain.joint(), q, 2.0, MetricSpec::hamming());
    WeakTransportOptions free;
    free.markov = false;
    const auto unrestricted = weak_transport_cost(chain.joint(), q, 2.0, MetricSpec::hamming(), free);
    EXPECT_LE(markov.gap(), 1e-6);
    EXPECT_TRUE(is_markov_coupling(markov.coupling, chain.joint(), q, 1e-9));
    EXPECT_LE(unrestricted.lower, markov.upper + 1e-9);
  }
}

TEST(WeakTransport, TriangleInequality) {
  auto e = DiscreteSpace::real_line({0.0, 1.0, 2.5});
  for (std::uint64_t s = 0; s < 40; ++s) {
    const auto p = random_measure(e, 3 * s, 1.0), q = random_measure(e, 3 * s + 1, 1.0),
               r = random_measure(e, 3 * s + 2, 1.0);
    const auto metric = s % 2 ? MetricSpec::hamming() : MetricSpec::euclidean();
    const double pr = weak_transport_cost(p, r, 2.0, metric).lower;
    const double pq = weak_transport_cost(p, q, 2.0, metric).upper;
    const double qr = weak_transport_cost(q, r, 2.0, metric).upper;
    EXPECT_LE(pr, pq + qr + 1e-6);
  }
}

TEST(WeakTransport, FixedAlphaTriangleWithTransportedWeights) {
  for (std::size_t n : {1u, 2u}) {
    auto s = DiscreteSpace::power(DiscreteSpace::indexed(2), n);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto p = random_measure(s, 10 * seed, 1.0), q = random_measure(s, 10 * seed + 1, 1.0),
                 r = random_measure(s, 10 * seed + 2, 1.0);
      Rng rng(seed);
      std::uniform_real_distribution<double> u(0.0, 2.0);
      Matrix alpha(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(s->size()));
      for (Eigen::Index i = 0; i < alpha.size(); ++i) alpha.data()[i] = u(rng);
      const auto qr = weak_cost_fixed_alpha(q, r, {alpha}, MetricSpec::hamming(), true);
      const Matrix tilde = conditional_alpha(alpha, qr.coupling);
      for (Eigen::Index j = 0; j < alpha.rows(); ++j) {
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t y = 0; y < s->size(); ++y) {
          lhs += q[y] * tilde(j, static_cast<Eigen::Index>(y)) * tilde(j, static_cast<Eigen::Index>(y));
          rhs += r[y] * alpha(j, static_cast<Eigen::Index>(y)) * alpha(j, static_cast<Eigen::Index>(y));
        }
        EXPECT_LE(lhs, rhs + 1e-12);
      }
      const double left = weak_cost_fixed_alpha(p, r, {alpha}, MetricSpec::hamming(), true).value;
      const double right = weak_cost_fixed_alpha(p, q, {tilde}, MetricSpec::hamming(), true).value + qr.value;
      EXPECT_LE(left, right + 1e-9);
    }
  }
}

TEST(Glue, IndependentCouplingsGiveTripleProduct) {
  auto e = DiscreteSpace::indexed(3);
  const auto p = random_measure(e, 1, 1.0), q = random_measure(e, 2, 1.0), r = random_measure(e, 3, 1.0);
  auto product = [&](const DiscreteMeasure& a, const DiscreteMeasure& b) {
    Matrix m(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(j)];
    return Coupling{e, m};
  };
  const auto g = glue_markov(product(p, q), product(q, r));
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t y = 0; y < 3; ++y)
      for (std::size_t z = 0; z < 3; ++z) EXPECT_NEAR(g(x, y, z), p[x] * q[y] * r[z], 1e-15);
}

TEST(Glue, DiagonalCouplingIdentifiesCoordinates) {
  auto s = DiscreteSpace::power(binary(), 2);
  const auto q = random_measure(s, 5, 1.0), r = random_measure(s, 6, 1.0);
  Matrix diag = Matrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) diag(i, i) = q[static_cast<std::size_t>(i)];
  const auto yz = random_markov_coupling(q, r, 11);
  const auto g = glue_markov(Coupling{s, diag}, yz);
  EXPECT_LE((g.margin_xz() - yz.joint).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Glue, RandomBinaryMarkovCouplings) {
  auto s = DiscreteSpace::power(binary(), 2);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto p = random_measure(s, 3 * seed, 1.0), q = random_measure(s, 3 * seed + 1, 1.0),
               r = random_measure(s, 3 * seed + 2, 1.0);
    const auto xy = random_markov_coupling(p, q, seed);
    const auto yz = random_markov_coupling(q, r, seed + 1000);
    ASSERT_TRUE(is_markov_coupling(xy, p, q));
    const auto g = glue_markov(xy, yz);
    EXPECT_LE((g.margin_xy() - xy.joint).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((g.margin_yz() - yz.joint).cwiseAbs().maxCoeff(), 1e-9);
    for (std::size_t y = 0; y < 4; ++y) {
      if (q[y] <= 0.0) continue;
      for (std::size_t x = 0; x < 4; ++x)
        for (std::size_t z = 0; z < 4; ++z) {
          const double lhs = g(x, y, z) / q[y];
          const double rhs = (xy.joint(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) / q[y]) *
                             (yz.joint(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(z)) / q[y]);
          EXPECT_NEAR(lhs, rhs, 1e-9);
        }
    }
    EXPECT_TRUE(is_markov_coupling(Coupling{s, g.margin_xz()}, p, r));
  }
}

TEST(Glue, MismatchedMiddleMarginsRejected) {
  auto e = DiscreteSpace::indexed(2);
  Matrix a(2, 2), b(2, 2);
  a << 0.5, 0.0, 0.0, 0.5;
  b << 0.9, 0.0, 0.0, 0.1;
  EXPECT_THROW(glue_markov(Coupling{e, a}, Coupling{e, b}), DomainError);
}

TEST(InfConvolution, Examples) {
  auto e = DiscreteSpace::indexed(2);
  const std::vector<double> f{0.0, 1.0};
  EXPECT_EQ(inf_convolution(f, std::vector<double>{0.0, 0.0}, MetricSpec::hamming(), *e), (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(inf_convolution(f, std::vector<double>{0.5, 0.5}, MetricSpec::hamming(), *e), (std::vector<double>{0.0, 0.5}));
  EXPECT_EQ(inf_convolution(f, std::vector<double>{5.0, 5.0}, MetricSpec::hamming(), *e), f);
}

TEST(DualForm, ConstantFunctionPasses) {
  auto e = DiscreteSpace::indexed(3);
  const auto p = random_measure(e, 4, 1.0);
  const std::vector<double> f{2.0, 2.0, 2.0}, alpha{0.3, 1.0, 2.0};
  for (bool inv : {false, true}) {
    const auto rep = dual_form_check(p, 1.0, 2.0, MetricSpec::hamming(), f, alpha, 0.7, inv);
    EXPECT_TRUE(rep.passed());
    EXPECT_LE(*rep.left, 1.0);
  }
}

TEST(DualForm, SmallLambdaTendsToOne) {
  DiscreteMeasure p(binary(), {0.5, 0.5});
  const std::vector<double> f{0.0, 1.0}, alpha{1.0, 1.0};
  const auto rep = dual_form_check(p, 1.0, 2.0, MetricSpec::hamming(), f, alpha, 1e-6, false);
  EXPECT_NEAR(*rep.left, 1.0, 1e-5);
  EXPECT_TRUE(rep.passed());
}

TEST(DualForm, HammingUniformGridPasses) {
  DiscreteMeasure p(binary(), {0.5, 0.5});
  const std::vector<double> f{0.0, 1.0};
  for (int i = 1; i <= 40; ++i) {
    for (int a0 = 0; a0 <= 20; ++a0) {
      for (int a1 = 0; a1 <= 20; ++a1) {
        const std::vector<double> alpha{0.1 * a0, 0.1 * a1};
        for (bool inv : {false, true}) {
          EXPECT_TRUE(dual_form_check(p, 1.0, 2.0, MetricSpec::hamming(), f, alpha, 0.25 * i, inv).passed());
        }
      }
    }
  }
}

TEST(DualForm, UndersizedConstantFails) {
  DiscreteMeasure p(binary(), {0.5, 0.5});
  const std::vector<double> f{0.0, 1.0}, alpha{1.0, 1.0};
  const auto rep = dual_form_check(p, 0.01, 2.0, MetricSpec::hamming(), f, alpha, 2.0, false);
  EXPECT_FALSE(rep.passed());
  EXPECT_THROW(dual_form_check(p, 1.0, 2.0, MetricSpec::hamming(), f, alpha, 0.0, false), DomainError);
}
