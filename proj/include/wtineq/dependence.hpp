#pragma once

// Coupling coefficients gamma_{k,i}(p) of path measures, the matrix Gamma(p)
// they form, its operator norms, and an end-to-end check of the weak
// transport inequality for dependent sequences.

#include "wtineq/transport.hpp"

#include <Eigen/Eigenvalues>

#include <sstream>

namespace wtineq {

/// Lower-triangular n x n matrix with constant diagonal M and entries
/// gamma_{k,i}(p) >= 0 below it (0-based indices here: row k, column i).
struct GammaMatrix {
  double exponent = 2.0;
  double diagonal = 1.0;
  Matrix values;

  std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
  double operator()(std::size_t k, std::size_t i) const {
    return values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
  }

  static GammaMatrix identity(std::size_t n, double m = 1.0, double p = 2.0) {
    return {p, m, m * Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
  }

  /// Stationary form gamma_{k,i} = g[k - i - 1] for k > i.
  static GammaMatrix stationary(std::size_t n, double m, const std::vector<double>& g, double p = 2.0) {
    GammaMatrix out = identity(n, m, p);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < k; ++i)
        out.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = k - i - 1 < g.size() ? g[k - i - 1] : 0.0;
    out.validate();
    return out;
  }

  void validate() const {
    require(values.rows() == values.cols() && values.rows() > 0, "GammaMatrix: must be square and nonempty");
    require(diagonal > 0.0, "GammaMatrix: diagonal M must be positive");
    for (Eigen::Index k = 0; k < values.rows(); ++k) {
      require(values(k, k) == diagonal, "GammaMatrix: diagonal must be constant M");
      for (Eigen::Index i = 0; i < values.cols(); ++i) {
        require(std::isfinite(values(k, i)) && values(k, i) >= 0.0, "GammaMatrix: entries must be nonnegative");
        if (i > k) require(values(k, i) == 0.0, "GammaMatrix: must be lower triangular");
      }
    }
  }
};

namespace detail {

// Conditional laws are ratios of sums, so equal laws can differ by a few ulps;
// the 1/p root would turn that into a visible entry.
inline constexpr double kConditionalRoundoff = 1e-13;

struct HistoryPair {
  std::vector<std::size_t> x;  // (x_1, ..., x_i)
  std::size_t y = 0;           // y_i
};

// Enumerates all positive-probability prefixes x^(i) together with y_i != x_i
// such that (x^(i-1), y_i) also has positive probability.
inline void for_each_history_pair(const PathMeasure& pm, std::size_t i,
                                  const std::function<void(const HistoryPair&)>& body) {
  const std::size_t k = pm.base_space()->size();
  std::size_t count = 1;
  for (std::size_t j = 0; j < i; ++j) count *= k;
  std::vector<std::size_t> x(i), alt(i);
  for (std::size_t h = 0; h < count; ++h) {
    std::size_t rest = h;
    for (std::size_t j = i; j-- > 0;) {
      x[j] = rest % k;
      rest /= k;
    }
    if (pm.prefix_probability(x) <= 0.0) continue;
    alt = x;
    for (std::size_t y = 0; y < k; ++y) {
      if (y == x[i - 1]) continue;
      alt[i - 1] = y;
      if (pm.prefix_probability(alt) <= 0.0) continue;
      body({x, y});
    }
  }
}

}  // namespace detail

/// gamma_{k,i}(p) = max over realized (x^(i), y_i) of
/// W_{p,d}(law of X_k | x^(i), law of X_k | x^(i-1), y_i) / d'(x_i, y_i).
inline GammaMatrix gamma_from_kernel(const PathMeasure& pm, double p, const MetricSpec& d, const MetricSpec& d_prime) {
  const std::size_t n = pm.horizon();
  const auto& base = *pm.base_space();
  require(p >= 1.0 && p <= 2.0, "gamma_from_kernel: p must lie in [1, 2]");
  const Matrix dist = coordinate_distances(base, d);
  const Matrix dist_prime = coordinate_distances(base, d_prime);
  GammaMatrix out = GammaMatrix::identity(n, domination_constant(base, d, d_prime), p);
  for (std::size_t i = 1; i < n; ++i) {  // perturbed coordinate (1-based i)
    detail::for_each_history_pair(pm, i, [&](const detail::HistoryPair& h) {
      std::vector<std::size_t> alt = h.x;
      alt[i - 1] = h.y;
      const double sep = dist_prime(static_cast<Eigen::Index>(h.x[i - 1]), static_cast<Eigen::Index>(h.y));
      for (std::size_t k = i + 1; k <= n; ++k) {
        const auto a = pm.coordinate_law(h.x, k - 1);
        const auto b = pm.coordinate_law(alt, k - 1);
        const double w = total_variation(a, b) <= detail::kConditionalRoundoff ? 0.0 : wasserstein(a, b, dist, p);
        if (sep == 0.0) {
          require(w == 0.0, "gamma_from_kernel: d' vanishes on a pair with distinct conditionals");
          continue;
        }
        double& entry = out.values(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(i - 1));
        entry = std::max(entry, w / sep);
      }
    });
  }
  return out;
}

/// gamma~_{k,i}(p) = max over realized (x^(i), y_i) of the total variation
/// between the laws of X_k given x^(i) and given (x^(i-1), y_i), to the power 1/p.
inline GammaMatrix tv_gamma(const PathMeasure& pm, double p) {
  const std::size_t n = pm.horizon();
  require(p >= 1.0, "tv_gamma: p must be >= 1");
  GammaMatrix out = GammaMatrix::identity(n, 1.0, p);
  for (std::size_t i = 1; i < n; ++i) {
    detail::for_each_history_pair(pm, i, [&](const detail::HistoryPair& h) {
      std::vector<std::size_t> alt = h.x;
      alt[i - 1] = h.y;
      for (std::size_t k = i + 1; k <= n; ++k) {
        double tv = total_variation(pm.coordinate_law(h.x, k - 1), pm.coordinate_law(alt, k - 1));
        if (tv <= detail::kConditionalRoundoff) tv = 0.0;
        double& entry = out.values(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(i - 1));
        entry = std::max(entry, std::pow(tv, 1.0 / p));
      }
    });
  }
  return out;
}

/// Uniform mixing coefficient at the given lag: the largest total variation
/// between the law of (X_{i+lag}, ..., X_n) given a realized prefix x^(i) and
/// its unconditional law, over i.
inline double phi_mixing(const PathMeasure& pm, std::size_t lag) {
  const std::size_t n = pm.horizon();
  require(lag >= 1, "phi_mixing: lag must be >= 1");
  const auto& joint = pm.joint();
  const std::size_t k = pm.base_space()->size();
  double phi = 0.0;
  for (std::size_t i = 1; i + lag <= n; ++i) {
    const std::size_t start = i + lag - 1;  // 0-based first future coordinate
    const std::size_t future = n - start;
    std::size_t fsize = 1;
    for (std::size_t j = 0; j < future; ++j) fsize *= k;
    std::vector<double> uncond(fsize, 0.0);
    for (std::size_t idx = 0; idx < joint.size(); ++idx) uncond[idx % fsize] += joint[idx];
    std::size_t count = 1;
    for (std::size_t j = 0; j < i; ++j) count *= k;
    std::size_t block = joint.size() / count;
    for (std::size_t h = 0; h < count; ++h) {
      std::vector<double> cond(fsize, 0.0);
      double mass = 0.0;
      for (std::size_t idx = h * block; idx < (h + 1) * block; ++idx) {
        cond[idx % fsize] += joint[idx];
        mass += joint[idx];
      }
      if (mass <= 0.0) continue;
      for (double& c : cond) c /= mass;
      phi = std::max(phi, total_variation(cond, uncond));
    }
  }
  return phi;
}

// ---------------------------------------------------------------------------
// Norms and constants.

inline constexpr double kInfinityNorm = std::numeric_limits<double>::infinity();

/// Operator norm of `a` on l^p for p in {1, 2, infinity}. The l^2 norm is the
/// largest singular value, found by power iteration on a^T a from the all-ones
/// vector and two seeded random starts.
inline double subordinated_norm(const Matrix& a, double p) {
  require(a.rows() > 0 && a.cols() > 0, "subordinated_norm: empty matrix");
  if (p == 1.0) return a.cwiseAbs().colwise().sum().maxCoeff();
  if (std::isinf(p)) return a.cwiseAbs().rowwise().sum().maxCoeff();
  require(p == 2.0, "subordinated_norm: p must be 1, 2 or infinity");
  const Matrix g = a.transpose() * a;
  auto power = [&g](Vector v) {
    double lambda = 0.0;
    if (v.norm() == 0.0) return 0.0;
    v.normalize();
    for (int it = 0; it < 200000; ++it) {
      Vector w = g * v;
      const double next = v.dot(w);
      const double nw = w.norm();
      if (nw == 0.0) return 0.0;
      v = w / nw;
      if (std::abs(next - lambda) <= 1e-10 * std::abs(next)) {
        lambda = next;
        break;
      }
      lambda = next;
    }
    return lambda;
  };
  double best = power(Vector::Ones(g.rows()));
  Rng rng(0x5eedULL);
  std::normal_distribution<double> normal;
  for (int restart = 0; restart < 2; ++restart) {
    Vector v(g.rows());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
    best = std::max(best, power(v));
  }
  return std::sqrt(std::max(best, 0.0));
}

inline double subordinated_norm(const GammaMatrix& gamma, double p) { return subordinated_norm(gamma.values, p); }

/// C |Gamma(p)|_p^2 n^(2/p - 1).
inline double theorem_constant(double c, const GammaMatrix& gamma, double p, std::size_t n) {
  require(c > 0.0, "theorem_constant: C must be positive");
  const double norm = subordinated_norm(gamma, p);
  return c * norm * norm * std::pow(static_cast<double>(n), 2.0 / p - 1.0);
}

// ---------------------------------------------------------------------------
// End-to-end verification.

struct WtiOptions {
  double tolerance = 1e-6;
  double constant_scale = 1.0;       // multiplies the theorem constant (e.g. 0.5 for adversarial runs)
  std::size_t refine_rounds = 0;     // hill-climbing steps from the worst sampled Q
  unsigned workers = 1;
  bool markov = true;
};

namespace detail {

// Q from P by an exponential tilt, a near point mass, or a coordinate tilt;
// always absolutely continuous with respect to P.
inline DiscreteMeasure sample_tilted(const DiscreteMeasure& p, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal;
  const std::size_t m = p.size();
  std::vector<double> w(m, 0.0);
  const int kind = static_cast<int>(unit(rng) * 3.0);
  if (kind == 0) {
    const double beta = std::exp(std::log(0.01) + unit(rng) * (std::log(5.0) - std::log(0.01)));
    for (std::size_t i = 0; i < m; ++i) w[i] = p[i] * std::exp(beta * normal(rng));
  } else if (kind == 1) {
    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < m; ++i)
      if (p[i] > 0.0) support.push_back(i);
    const std::size_t atom = support[static_cast<std::size_t>(unit(rng) * static_cast<double>(support.size())) % support.size()];
    const double eps = std::exp(std::log(1e-3) + unit(rng) * (-std::log(1e-3)));
    for (std::size_t i = 0; i < m; ++i) w[i] = eps * p[i] + (i == atom ? 1.0 - eps : 0.0);
  } else {
    const auto& s = p.space();
    const std::size_t n = s.length();
    const std::size_t k = s.base().size();
    std::vector<double> c(n * k);
    const double beta = std::exp(std::log(0.05) + unit(rng) * (std::log(4.0) - std::log(0.05)));
    for (double& v : c) v = beta * normal(rng);
    for (std::size_t i = 0; i < m; ++i) {
      if (p[i] <= 0.0) continue;
      double e = 0.0;
      for (std::size_t j = 0; j < n; ++j) e += c[j * k + s.coordinate(i, j)];
      w[i] = p[i] * std::exp(e);
    }
  }
  return DiscreteMeasure::normalized(p.space_ptr(), std::move(w));
}

}  // namespace detail

struct WtiTrial {
  double kl = 0.0;
  CertifiedValue cost;
  double bound = 0.0;
  std::vector<double> q;
};

/// Samples Q around P and checks upper(W~_{p,d_p}(P,Q)) <= sqrt(2 C' K(Q|P)) with
/// C' = base_C |Gamma(p)|^2 n^(2/p-1) for Gamma computed from the kernel with (d, d').
/// A certified violation needs lower(W~) above the bound.
inline ExperimentReport verify_wti(const PathMeasure& pm, double p, const MetricSpec& d, const MetricSpec& d_prime,
                                   double base_c, std::size_t trials, std::uint64_t seed,
                                   const WtiOptions& options = {}) {
  Stopwatch clock;
  const std::size_t n = pm.horizon();
  const auto& joint = pm.joint();
  const auto gamma = gamma_from_kernel(pm, p, d, d_prime);
  const double constant = options.constant_scale * theorem_constant(base_c, gamma, p, n);
  WeakTransportOptions wopt;
  wopt.markov = options.markov;

  auto evaluate = [&](const DiscreteMeasure& q) {
    WtiTrial t;
    t.kl = kl_divergence(q, joint);
    t.cost = weak_transport_cost(joint, q, p, d, wopt);
    t.bound = std::sqrt(2.0 * constant * t.kl);
    t.q = q.weights();
    return t;
  };
  auto ratio = [](const WtiTrial& t) { return t.kl > 0.0 ? t.cost.upper * t.cost.upper / (2.0 * t.kl) : 0.0; };

  std::vector<WtiTrial> results(trials);
  parallel_for(trials, options.workers, [&](std::size_t t) {
    results[t] = evaluate(detail::sample_tilted(joint, derive_seed(seed, t)));
  });

  if (options.refine_rounds > 0 && !results.empty()) {
    // Multiplicative random-walk search on the weights of Q, maximizing W~^2 / 2K.
    std::size_t worst = 0;
    for (std::size_t t = 1; t < results.size(); ++t)
      if (ratio(results[t]) > ratio(results[worst])) worst = t;
    WtiTrial current = results[worst];
    Rng rng(derive_seed(seed, 0xADu));
    std::normal_distribution<double> normal;
    double step = 0.5;
    for (std::size_t r = 0; r < options.refine_rounds; ++r) {
      std::vector<double> w = current.q;
      for (std::size_t i = 0; i < w.size(); ++i)
        if (joint[i] > 0.0) w[i] = std::max(w[i], 1e-12) * std::exp(step * normal(rng));
      auto cand = evaluate(DiscreteMeasure::normalized(joint.space_ptr(), std::move(w)));
      if (ratio(cand) > ratio(current)) {
        current = std::move(cand);
      } else {
        step = std::max(0.02, step * 0.995);
      }
    }
    results.push_back(std::move(current));
  }

  ExperimentReport rep("verify-wti", "weak-transport-dependent");
  rep.seed = seed;
  rep.input("p", p);
  rep.input("n", static_cast<double>(n));
  rep.input("base_C", base_c);
  rep.input("constant_scale", options.constant_scale);
  rep.input("trials", static_cast<double>(trials));
  rep.metric("gamma_norm", subordinated_norm(gamma, p));
  rep.metric("constant", constant);

  std::size_t violations = 0, certified = 0, worst = 0;
  double worst_margin = -std::numeric_limits<double>::infinity(), max_ratio = 0.0, max_gap = 0.0;
  for (std::size_t t = 0; t < results.size(); ++t) {
    const auto& r = results[t];
    const double margin = r.cost.upper - r.bound;
    if (margin > worst_margin) {
      worst_margin = margin;
      worst = t;
    }
    if (r.cost.upper > r.bound + options.tolerance) ++violations;
    if (r.cost.lower > r.bound + options.tolerance) ++certified;
    max_ratio = std::max(max_ratio, ratio(r));
    max_gap = std::max(max_gap, r.cost.gap());
  }
  rep.metric("violations", static_cast<double>(violations));
  rep.metric("certified_violations", static_cast<double>(certified));
  rep.metric("worst_margin", worst_margin);
  rep.metric("max_effective_constant", max_ratio);
  rep.metric("max_certificate_gap", max_gap);
  if (!results.empty()) {
    rep.set_left(results[worst].cost.upper);
    rep.set_right(results[worst].bound);
    rep.lower = results[worst].cost.lower;
    rep.upper = results[worst].cost.upper;
    std::ostringstream os;
    os.precision(17);
    os << "worst Q:";
    for (double w : results[worst].q) os << ' ' << w;
    rep.notes.push_back(os.str());
  }
  if (violations == 0) {
    rep.verdict = Verdict::Pass;
  } else {
    rep.verdict = certified > 0 ? Verdict::Fail : Verdict::Inconclusive;
  }
  rep.wall_seconds = clock.seconds();
  return rep;
}

}  // namespace wtineq
