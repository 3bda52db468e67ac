#include "wtineq/measures.hpp"

#include <gtest/gtest.h>

using namespace wtineq;

namespace {

Matrix two_state(double a, double b) {
  Matrix t(2, 2);
  t << 1 - a, a, b, 1 - b;
  return t;
}

std::vector<std::size_t> path(std::initializer_list<std::size_t> xs) { return xs; }

}  // namespace

TEST(KlDivergence, IdentityIsZero) {
  auto e = DiscreteSpace::indexed(3);
  DiscreteMeasure p(e, {0.2, 0.3, 0.5});
  EXPECT_EQ(kl_divergence(p, p), 0.0);
}

TEST(KlDivergence, PointMassAgainstUniform) {
  auto e = DiscreteSpace::indexed(2);
  EXPECT_NEAR(kl_divergence(DiscreteMeasure(e, {1.0, 0.0}), DiscreteMeasure(e, {0.5, 0.5})), std::log(2.0), 1e-15);
}

TEST(KlDivergence, SupportViolationIsInfinite) {
  auto e = DiscreteSpace::indexed(2);
  EXPECT_TRUE(std::isinf(kl_divergence(DiscreteMeasure(e, {0.5, 0.5}), DiscreteMeasure(e, {1.0, 0.0}))));
}

TEST(KlDivergence, MismatchedSpacesRejected) {
  DiscreteMeasure p(DiscreteSpace::indexed(2), {0.5, 0.5});
  DiscreteMeasure q(DiscreteSpace::indexed(3), {0.2, 0.3, 0.5});
  EXPECT_THROW(kl_divergence(p, q), DomainError);
}

TEST(KlDivergence, NonnegativeWithEqualityOnlyAtIdentity) {
  auto e = DiscreteSpace::indexed(4);
  for (std::uint64_t s = 0; s < 300; ++s) {
    const auto p = random_measure(e, 2 * s, 1.0);
    const auto q = random_measure(e, 2 * s + 1, 1.0);
    const double k = kl_divergence(q, p);
    EXPECT_GE(k, 0.0);
    if (total_variation(p.weights(), q.weights()) > 1e-6) {
      EXPECT_GT(k, 0.0);
    }
  }
}

TEST(Measure, RejectsDriftBeyondTolerance) {
  auto e = DiscreteSpace::indexed(2);
  EXPECT_THROW(DiscreteMeasure(e, {0.5, 0.5 + 1e-10}), DomainError);
  EXPECT_THROW(DiscreteMeasure(e, {1.5, -0.5}), DomainError);
  EXPECT_NO_THROW(DiscreteMeasure(e, {0.5, 0.5 + 1e-13}));
}

TEST(Space, RejectsDuplicateIdsAndRaggedEmbeddings) {
  EXPECT_THROW(DiscreteSpace::make({"a", "a"}), DomainError);
  EXPECT_THROW(DiscreteSpace::make({"a", "b"}, DiscreteSpace::Embedding{{0.0}, {0.0, 1.0}}), DomainError);
}

TEST(Space, PrefixEncodingIsContiguous) {
  auto s = DiscreteSpace::power(DiscreteSpace::indexed(3), 3);
  EXPECT_EQ(s->size(), 27u);
  for (std::size_t i = 0; i < s->size(); ++i) {
    const auto c = s->decode(i);
    EXPECT_EQ(s->encode(c), i);
    EXPECT_EQ(c[0], i / 9);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(s->coordinate(i, j), c[j]);
  }
}

TEST(Metric, TableValidation) {
  Matrix asym(2, 2);
  asym << 0, 1, 2, 0;
  EXPECT_THROW(MetricSpec::from_table(asym), DomainError);
  Matrix diag(2, 2);
  diag << 1, 1, 1, 0;
  EXPECT_THROW(MetricSpec::from_table(diag), DomainError);
  EXPECT_THROW(coordinate_distances(*DiscreteSpace::indexed(2), MetricSpec::euclidean()), DomainError);
}

TEST(Metric, PathMetricCombinesInLp) {
  auto e = DiscreteSpace::real_line({0.0, 3.0});
  auto s = DiscreteSpace::power(e, 2);
  const Matrix d2 = path_distances(*s, MetricSpec::euclidean(), 2.0);
  EXPECT_NEAR(d2(0, 3), std::sqrt(18.0), 1e-14);
  const Matrix d1 = path_distances(*s, MetricSpec::euclidean(), 1.0);
  EXPECT_NEAR(d1(0, 3), 6.0, 1e-14);
  const Matrix h = path_distances(*s, MetricSpec::hamming(), 1.0);
  EXPECT_EQ(h(1, 2), 2.0);
}

TEST(Metric, DominationConstant) {
  auto e = DiscreteSpace::real_line({0.0, 0.5, 2.0});
  EXPECT_NEAR(domination_constant(*e, MetricSpec::euclidean(), MetricSpec::hamming()), 2.0, 1e-15);
  EXPECT_NEAR(domination_constant(*e, MetricSpec::hamming(), MetricSpec::hamming()), 1.0, 0.0);
}

TEST(PathMeasure, IidKernelGivesProductMeasure) {
  const std::vector<double> mu{0.2, 0.5, 0.3};
  auto e = DiscreteSpace::indexed(3);
  const auto pm = path_measure(e, mu, {Kernel::iid(mu)}, 2);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) EXPECT_NEAR(pm.joint()[a * 3 + b], mu[a] * mu[b], 1e-16);
}

TEST(PathMeasure, TwoStateChainPathWeight) {
  const auto pm = markov_chain(two_state(0.3, 0.3), 0, 2);
  EXPECT_NEAR(pm.joint()[pm.joint().space().encode(path({0, 1}))], 0.21, 1e-15);
  EXPECT_EQ(pm.initial(), (std::vector<double>{0.7, 0.3}));
}

TEST(PathMeasure, PermutationKernelIsPointMass) {
  Matrix perm(3, 3);
  perm << 0, 1, 0, 0, 0, 1, 1, 0, 0;
  const auto pm = path_measure(DiscreteSpace::indexed(3), {1.0, 0.0, 0.0}, {Kernel::markov(perm)}, 3);
  const std::size_t hit = pm.joint().space().encode(path({0, 1, 2}));
  for (std::size_t i = 0; i < pm.joint().size(); ++i) EXPECT_EQ(pm.joint()[i], i == hit ? 1.0 : 0.0);
}

TEST(PathMeasure, NonStochasticKernelRejected) {
  Matrix bad(2, 2);
  bad << 0.5, 0.6, 0.5, 0.5;
  EXPECT_THROW(Kernel::markov(bad), DomainError);
  auto rule = Kernel::general([](std::span<const std::size_t>) { return std::vector<double>{0.4, 0.4}; });
  EXPECT_THROW(path_measure(DiscreteSpace::indexed(2), {0.5, 0.5}, {rule}, 2), DomainError);
}

TEST(PathMeasure, HistoryDependentKernel) {
  // X_j = 1 with probability 0.9 when the history contains a 1, else 0.5.
  auto rule = Kernel::general([](std::span<const std::size_t> h) {
    const bool seen = std::find(h.begin(), h.end(), 1u) != h.end();
    return seen ? std::vector<double>{0.1, 0.9} : std::vector<double>{0.5, 0.5};
  });
  const auto pm = path_measure(DiscreteSpace::indexed(2), {0.5, 0.5}, {rule}, 3);
  const auto& s = pm.joint().space();
  EXPECT_NEAR(pm.joint()[s.encode(path({1, 0, 1}))], 0.5 * 0.1 * 0.9, 1e-16);
  EXPECT_NEAR(pm.joint()[s.encode(path({0, 0, 1}))], 0.125, 1e-16);
  EXPECT_FALSE(pm.is_markov());
}

TEST(Conditional, KernelRowReadout) {
  const auto pm = markov_chain(two_state(0.3, 0.3), 0, 2);
  const auto c = pm.conditional(path({1}));
  EXPECT_NEAR(c[0], 0.3, 1e-15);
  EXPECT_NEAR(c[1], 0.7, 1e-15);
}

TEST(Conditional, MarkovPropertyDependsOnLastState) {
  Matrix t(3, 3);
  t << 0.2, 0.5, 0.3, 0.6, 0.1, 0.3, 0.25, 0.25, 0.5;
  const auto pm = markov_chain(t, 1, 3);
  for (std::size_t last = 0; last < 3; ++last) {
    const auto ref = pm.coordinate_law(path({0, last}), 2);
    for (std::size_t first = 1; first < 3; ++first) {
      const auto other = pm.coordinate_law(path({first, last}), 2);
      for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(other[c], ref[c], 1e-14);
    }
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(ref[c], t(last, c), 1e-14);
  }
}

TEST(Conditional, IidTailEqualsUnconditional) {
  const std::vector<double> mu{0.1, 0.6, 0.3};
  const auto pm = path_measure(DiscreteSpace::indexed(3), mu, {Kernel::iid(mu)}, 3);
  const auto tail = pm.conditional(path({2}));
  const auto two = path_measure(DiscreteSpace::indexed(3), mu, {Kernel::iid(mu)}, 2);
  for (std::size_t i = 0; i < tail.size(); ++i) EXPECT_NEAR(tail[i], two.joint()[i], 1e-15);
}

TEST(Conditional, ZeroProbabilityPrefixRejected) {
  Matrix t(2, 2);
  t << 1.0, 0.0, 0.0, 1.0;
  const auto pm = markov_chain(t, 0, 2);
  EXPECT_THROW(pm.conditional(path({1})), DomainError);
}

TEST(Conditional, RemultiplicationReproducesJoint) {
  Matrix t(3, 3);
  t << 0.2, 0.5, 0.3, 0.6, 0.1, 0.3, 0.25, 0.25, 0.5;
  const auto pm = markov_chain(t, 2, 3);
  const auto& s = pm.joint().space();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto x = s.decode(i);
    const double head = pm.prefix_probability(std::span<const std::size_t>(x.data(), 1));
    const auto tail = pm.conditional(std::span<const std::size_t>(x.data(), 1));
    const double rebuilt = head * tail[i % 9];
    EXPECT_NEAR(rebuilt, pm.joint()[i], 1e-12);
  }
}

TEST(KlDivergence, ChainRuleOnPathSpaces) {
  for (std::size_t n = 2; n <= 3; ++n) {
    for (std::size_t k = 2; k <= 3; ++k) {
      auto s = DiscreteSpace::power(DiscreteSpace::indexed(k), n);
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto p = random_measure(s, 1000 + seed, 1.0);
        const auto q = random_measure(s, 2000 + seed, 0.7);
        double sum = 0.0;
        std::vector<std::size_t> prefix;
        for (std::size_t j = 0; j < n; ++j) {
          std::size_t count = 1;
          for (std::size_t i = 0; i < j; ++i) count *= k;
          for (std::size_t h = 0; h < count; ++h) {
            prefix.assign(j, 0);
            std::size_t rest = h;
            for (std::size_t i = j; i-- > 0;) {
              prefix[i] = rest % k;
              rest /= k;
            }
            const double mass = prefix_mass(q, prefix);
            if (mass <= 0.0) continue;
            DiscreteMeasure qj(DiscreteSpace::indexed(k), coordinate_conditional(q, prefix, j));
            DiscreteMeasure pj(DiscreteSpace::indexed(k), coordinate_conditional(p, prefix, j));
            sum += mass * kl_divergence(qj, pj);
          }
        }
        EXPECT_NEAR(sum, kl_divergence(q, p), 1e-12);
      }
    }
  }
}

TEST(RandomMeasure, Deterministic) {
  auto e = DiscreteSpace::indexed(5);
  EXPECT_EQ(random_measure(e, 42, 1.0).weights(), random_measure(e, 42, 1.0).weights());
}

TEST(RandomMeasure, LargeConcentrationIsNearUniform) {
  auto e = DiscreteSpace::indexed(5);
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto m = random_measure(e, s, 100.0);
    EXPECT_LE(*std::max_element(m.weights().begin(), m.weights().end()), 2.0 / 5.0);
    for (double w : m.weights()) EXPECT_GT(w, 0.0);
  }
}

TEST(RandomMeasure, DistinctSeedsDiffer) {
  auto e = DiscreteSpace::indexed(4);
  for (std::uint64_t s = 0; s < 200; ++s) {
    EXPECT_GT(total_variation(random_measure(e, s, 1.0).weights(), random_measure(e, s + 1, 1.0).weights()), 0.0);
  }
  EXPECT_THROW(random_measure(e, 1, 0.0), DomainError);
}
