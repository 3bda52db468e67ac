#pragma once

// Numeric and Monte-Carlo checks of the exponential concentration
// inequalities implied by weak transport: Hoeffding-type dual bounds,
// Tsirel'son and its concave mirror, sub-gaussianity, the convex Poincare
// inequality, and the two convex-distance inequalities of Talagrand type.

#include "wtineq/measures.hpp"
#include "wtineq/min_norm.hpp"
#include "wtineq/processes.hpp"
#include "wtineq/report.hpp"

#include <numeric>
#include <set>
#include <sstream>

namespace wtineq {

// ---------------------------------------------------------------------------
// Samplers.

using Sampler = std::function<Vector(Rng&)>;

inline Sampler gaussian_sampler(std::size_t n) {
  return [n](Rng& rng) {
    std::normal_distribution<double> normal;
    Vector x(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
    return x;
  };
}

inline Sampler uniform_cube_sampler(std::size_t n) {
  return [n](Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vector x(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = unit(rng);
    return x;
  };
}

inline Sampler rademacher_sampler(std::size_t n) {
  return [n](Rng& rng) {
    Vector x(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = (rng() & 1u) ? 1.0 : -1.0;
    return x;
  };
}

/// Flattened path (X_1, ..., X_n) of a process started at x0.
inline Sampler process_sampler(ProcessSpec spec, std::size_t n, Vector x0) {
  spec.validate();
  return [spec = std::move(spec), n, x0 = std::move(x0)](Rng& rng) {
    const auto path = simulate(spec, n, x0, rng());
    Vector x(static_cast<Eigen::Index>(n * spec.dim));
    for (std::size_t t = 0; t < n; ++t) x.segment(static_cast<Eigen::Index>(t * spec.dim), static_cast<Eigen::Index>(spec.dim)) = path[t];
    return x;
  };
}

// ---------------------------------------------------------------------------
// Convex distances.

struct HullDistance {
  double distance = 0.0;  // |x - nearest|
  double lower = 0.0;     // certified lower bound
  Vector nearest;
  std::vector<double> weights;  // convex combination of the input points giving `nearest`
  bool converged = false;
};

/// Euclidean distance from x to conv(points), by the min-norm-point algorithm
/// on the shifted points.
inline HullDistance distance_to_convex_hull(const Vector& x, const std::vector<Vector>& points,
                                            double tolerance = 1e-10) {
  require(!points.empty(), "distance_to_convex_hull: empty point list");
  std::vector<Vector> shifted;
  shifted.reserve(points.size());
  for (const auto& p : points) {
    require(p.size() == x.size(), "distance_to_convex_hull: dimension mismatch");
    shifted.push_back(p - x);
  }
  const auto r = min_norm_point(shifted, {tolerance, 20000});
  HullDistance out;
  out.distance = r.upper;
  out.lower = r.lower;
  out.nearest = x + r.point;
  out.weights.assign(points.size(), 0.0);
  for (std::size_t i = 0; i < r.atoms.size(); ++i) out.weights[r.atoms[i]] += r.weights[i];
  out.converged = r.converged;
  return out;
}

/// d_T(x, A) = sup_{|c| <= 1} inf_{y in A} sum_j c_j 1{x_j != y_j}, computed as
/// the distance from the origin to the hull of the disagreement indicators.
inline double convex_distance_dT(const Vector& x, const std::vector<Vector>& a) {
  require(!a.empty(), "convex_distance_dT: A must be nonempty");
  std::vector<Vector> indicators;
  indicators.reserve(a.size());
  for (const auto& y : a) {
    require(y.size() == x.size(), "convex_distance_dT: dimension mismatch");
    Vector u = (x.array() != y.array()).cast<double>();
    if (u.isZero()) return 0.0;
    indicators.push_back(std::move(u));
  }
  return distance_to_convex_hull(Vector::Zero(x.size()), indicators).distance;
}

// ---------------------------------------------------------------------------
// Test functions.

struct TestFunction {
  enum class Shape { SeparatelyConvex, SeparatelyConcave, Lipschitz, SelfBoundingHamming };

  std::string name;
  Shape shape = Shape::SeparatelyConvex;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;  // optional; central differences otherwise
  double lipschitz = 0.0;

  double operator()(const Vector& x) const { return value(x); }

  Vector grad(const Vector& x) const {
    if (gradient) return gradient(x);
    return central_difference(x);
  }

  Vector central_difference(const Vector& x) const {
    Vector g(x.size());
    Vector y = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(x(j)));
      y(j) = x(j) + h;
      const double up = value(y);
      y(j) = x(j) - h;
      const double down = value(y);
      y(j) = x(j);
      g(j) = (up - down) / (2.0 * h);
    }
    return g;
  }

  static TestFunction linear(Vector a, double b = 0.0) {
    TestFunction f;
    f.name = "linear";
    f.value = [a, b](const Vector& x) { return a.dot(x) + b; };
    f.gradient = [a](const Vector&) { return a; };
    f.lipschitz = a.norm();
    return f;
  }
  static TestFunction constant(double c) {
    TestFunction f;
    f.name = "constant";
    f.value = [c](const Vector&) { return c; };
    f.gradient = [](const Vector& x) { return Vector(Vector::Zero(x.size())); };
    return f;
  }
  static TestFunction max_coordinate(double scale = 1.0) {
    TestFunction f;
    f.name = "max";
    f.value = [scale](const Vector& x) { return scale * x.maxCoeff(); };
    f.gradient = [scale](const Vector& x) {
      Eigen::Index arg = 0;
      x.maxCoeff(&arg);
      Vector g = Vector::Zero(x.size());
      g(arg) = scale;
      return g;
    };
    f.lipschitz = std::abs(scale);
    return f;
  }
  static TestFunction euclidean_norm() {
    TestFunction f;
    f.name = "l2-norm";
    f.value = [](const Vector& x) { return x.norm(); };
    f.gradient = [](const Vector& x) {
      const double n = x.norm();
      return n > 0.0 ? Vector(x / n) : Vector(Vector::Zero(x.size()));
    };
    f.lipschitz = 1.0;
    return f;
  }
  static TestFunction l1_norm() {
    TestFunction f;
    f.name = "l1-norm";
    f.value = [](const Vector& x) { return x.cwiseAbs().sum(); };
    f.gradient = [](const Vector& x) { return Vector(x.array().sign()); };
    return f;
  }
  static TestFunction linf_norm() {
    TestFunction f;
    f.name = "linf-norm";
    f.value = [](const Vector& x) { return x.cwiseAbs().maxCoeff(); };
    f.gradient = [](const Vector& x) {
      Eigen::Index arg = 0;
      x.cwiseAbs().maxCoeff(&arg);
      Vector g = Vector::Zero(x.size());
      g(arg) = x(arg) >= 0.0 ? 1.0 : -1.0;
      return g;
    };
    f.lipschitz = 1.0;
    return f;
  }
  /// max_r (<a_r, x> + b_r): convex and piecewise linear.
  static TestFunction max_affine(Matrix a, Vector b) {
    require(a.rows() == b.size() && a.rows() > 0, "max_affine: shape mismatch");
    TestFunction f;
    f.name = "max-affine";
    f.value = [a, b](const Vector& x) { return (a * x + b).maxCoeff(); };
    f.gradient = [a, b](const Vector& x) {
      Eigen::Index arg = 0;
      (a * x + b).maxCoeff(&arg);
      return Vector(a.row(arg).transpose());
    };
    f.lipschitz = a.rowwise().norm().maxCoeff();
    return f;
  }
  /// sum_j |x_j - c_j|: convex, separately and jointly.
  static TestFunction shifted_l1(Vector c) {
    TestFunction f;
    f.name = "shifted-l1";
    f.value = [c](const Vector& x) { return (x - c).cwiseAbs().sum(); };
    f.gradient = [c](const Vector& x) { return Vector((x - c).array().sign()); };
    return f;
  }
  /// Product x_1 x_2 ... is separately linear, hence separately convex, but not convex.
  static TestFunction pair_products() {
    TestFunction f;
    f.name = "pair-products";
    f.value = [](const Vector& x) {
      double s = 0.0;
      for (Eigen::Index j = 0; j + 1 < x.size(); j += 2) s += x(j) * x(j + 1);
      return s;
    };
    f.gradient = [](const Vector& x) {
      Vector g = Vector::Zero(x.size());
      for (Eigen::Index j = 0; j + 1 < x.size(); j += 2) {
        g(j) = x(j + 1);
        g(j + 1) = x(j);
      }
      return g;
    };
    return f;
  }
  static TestFunction negated(const TestFunction& g) {
    TestFunction f;
    f.name = "neg-" + g.name;
    f.value = [v = g.value](const Vector& x) { return -v(x); };
    if (g.gradient) f.gradient = [d = g.gradient](const Vector& x) { return Vector(-d(x)); };
    f.lipschitz = g.lipschitz;
    if (g.shape == Shape::SeparatelyConvex) f.shape = Shape::SeparatelyConcave;
    else if (g.shape == Shape::SeparatelyConcave) f.shape = Shape::SeparatelyConvex;
    else f.shape = g.shape;
    return f;
  }
  static TestFunction scaled(const TestFunction& g, double s) {
    require(s >= 0.0, "scaled: factor must be nonnegative");
    TestFunction f = g;
    f.name = g.name + "*" + std::to_string(s);
    f.value = [v = g.value, s](const Vector& x) { return s * v(x); };
    if (g.gradient) f.gradient = [d = g.gradient, s](const Vector& x) { return Vector(s * d(x)); };
    f.lipschitz = s * g.lipschitz;
    return f;
  }
};

/// Spot checks of the claimed shape at `points` sampled locations: midpoint
/// convexity (or concavity) along each coordinate, the Lipschitz bound, and the
/// supplied gradient against central differences. Throws DomainError on the
/// first violation.
inline void spot_check(const TestFunction& g, const Sampler& sampler, std::uint64_t seed, std::size_t points = 100) {
  require(static_cast<bool>(g.value), "spot_check: test function has no value callback");
  Rng rng(seed);
  for (std::size_t i = 0; i < points; ++i) {
    const Vector x = sampler(rng);
    const Vector y = sampler(rng);
    const double fx = g(x);
    if (!std::isfinite(fx)) throw DomainError("spot_check: " + g.name + " is not finite at a sampled point");
    const double slack = 1e-9 * (1.0 + std::abs(fx));
    if (g.shape == TestFunction::Shape::SeparatelyConvex || g.shape == TestFunction::Shape::SeparatelyConcave) {
      const double sign = g.shape == TestFunction::Shape::SeparatelyConvex ? 1.0 : -1.0;
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        Vector a = x, b = x, m = x;
        b(j) = y(j);
        m(j) = 0.5 * (x(j) + y(j));
        if (sign * (g(m) - 0.5 * (g(a) + g(b))) > slack)
          throw DomainError("spot_check: " + g.name + " fails midpoint " +
                            (sign > 0 ? "convexity" : "concavity") + " in coordinate " + std::to_string(j));
      }
    }
    if (g.lipschitz > 0.0 && std::abs(fx - g(y)) > g.lipschitz * (x - y).norm() * (1.0 + 1e-12) + 1e-12)
      throw DomainError("spot_check: " + g.name + " exceeds its Lipschitz constant");
    if (g.gradient) {
      const Vector analytic = g.gradient(x);
      const Vector numeric = g.central_difference(x);
      if (analytic.size() != x.size()) throw DomainError("spot_check: gradient of " + g.name + " has wrong size");
      if ((analytic - numeric).norm() > 1e-5 * std::max(1.0, numeric.norm()))
        throw DomainError("spot_check: gradient of " + g.name + " disagrees with finite differences");
    }
  }
}

// ---------------------------------------------------------------------------
// Monte-Carlo expectation of exponentials.

struct MCEstimate {
  double mean = 0.0;
  double se = 0.0;
  double log_mean = 0.0;
  double log_se = 0.0;  // se / mean, the delta-method SE of log(mean)
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

/// exp(sign (g(x) - m) - penalty(x)) with m = P[g] estimated on an independent batch.
struct ExponentialIntegrand {
  std::function<double(const Vector&)> statistic;
  std::function<double(const Vector&)> penalty;  // may be empty
  double sign = 1.0;
  bool average_penalty = false;  // use P[penalty] from the centering batch instead of penalty(x)
};

struct McOptions {
  double sigmas = 3.0;
  unsigned workers = 1;
  std::size_t min_samples = 10000;
};

struct ExponentialCheck {
  MCEstimate estimate;
  double centering = 0.0;
  double penalty_mean = 0.0;
  bool passed = false;
};

namespace detail {

inline void draw_batch(const Sampler& sampler, std::size_t n, std::uint64_t seed, unsigned workers,
                       const std::function<void(std::size_t, const Vector&)>& body) {
  parallel_for(n, workers, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    body(i, sampler(rng));
  });
}

inline std::pair<double, double> mean_and_sd(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0};
}

}  // namespace detail

/// Estimates P[exp(integrand)] and passes iff the estimate is at most
/// 1 + sigmas * SE. The SE combines the sampling error of the main batch with
/// the error of the centering (and averaged penalty) from the first batch.
inline ExponentialCheck mc_exponential_check(const Sampler& sampler, const ExponentialIntegrand& integrand,
                                             std::size_t n, std::uint64_t seed, const McOptions& options = {}) {
  require(static_cast<bool>(integrand.statistic), "mc_exponential_check: statistic required");
  require(n >= options.min_samples, "mc_exponential_check: too few samples");
  const std::uint64_t center_seed = derive_seed(seed, 0xC0FFEEu);
  const std::uint64_t main_seed = derive_seed(seed, 0xBEEFu);

  std::vector<double> g1(n), p1(n, 0.0);
  detail::draw_batch(sampler, n, center_seed, options.workers, [&](std::size_t i, const Vector& x) {
    g1[i] = integrand.statistic(x);
    if (integrand.average_penalty && integrand.penalty) p1[i] = integrand.penalty(x);
  });
  const auto [center, g_sd] = detail::mean_and_sd(g1);
  const auto [pen_mean, pen_sd] = detail::mean_and_sd(p1);

  std::vector<double> e(n);
  detail::draw_batch(sampler, n, main_seed, options.workers, [&](std::size_t i, const Vector& x) {
    double pen = 0.0;
    if (integrand.penalty) pen = integrand.average_penalty ? pen_mean : integrand.penalty(x);
    e[i] = integrand.sign * (integrand.statistic(x) - center) - pen;
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(e[i])) {
      std::ostringstream os;
      os << "mc_exponential_check: non-finite exponent " << e[i] << " at sample " << i << " (centering " << center
         << ")";
      throw NumericError(os.str());
    }
  }
  const double top = *std::max_element(e.begin(), e.end());
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(e[i] - top);
  const auto [w_mean, w_sd] = detail::mean_and_sd(w);

  ExponentialCheck out;
  out.centering = center;
  out.penalty_mean = pen_mean;
  auto& est = out.estimate;
  est.n = n;
  est.seed = seed;
  est.log_mean = top + std::log(w_mean);
  est.mean = std::exp(est.log_mean);
  const double rn = std::sqrt(static_cast<double>(n));
  const double sampling = std::exp(top) * w_sd / rn;
  const double centering = est.mean * g_sd / rn;
  const double averaging = integrand.average_penalty ? est.mean * pen_sd / rn : 0.0;
  est.se = std::sqrt(sampling * sampling + centering * centering + averaging * averaging);
  est.log_se = est.mean > 0.0 ? est.se / est.mean : 0.0;
  out.passed = est.mean <= 1.0 + options.sigmas * est.se;
  return out;
}

namespace detail {

inline ExperimentReport exponential_report(std::string id, std::string inequality, const ExponentialCheck& c) {
  ExperimentReport rep(std::move(id), std::move(inequality));
  rep.seed = c.estimate.seed;
  rep.set_left(c.estimate.mean);
  rep.left_se = c.estimate.se;
  rep.set_right(1.0);
  rep.metric("log_mean", c.estimate.log_mean);
  rep.metric("log_se", c.estimate.log_se);
  rep.metric("centering", c.centering);
  rep.input("samples", static_cast<double>(c.estimate.n));
  rep.verdict = c.passed ? Verdict::Pass : Verdict::Fail;
  return rep;
}

}  // namespace detail

/// Tsirel'son-type check: P[exp(g - P g - C|grad g|^2/2)] <= 1 for separately
/// convex g, and the version with P[|grad g|^2] for separately concave g.
inline ExperimentReport tsirelson_check(const Sampler& sampler, const TestFunction& g, double c, std::size_t n,
                                        std::uint64_t seed, const McOptions& options = {}) {
  Stopwatch clock;
  require(c > 0.0, "tsirelson_check: C must be positive");
  require(g.shape == TestFunction::Shape::SeparatelyConvex || g.shape == TestFunction::Shape::SeparatelyConcave,
          "tsirelson_check: g must be separately convex or concave");
  spot_check(g, sampler, derive_seed(seed, 0x5907u));
  ExponentialIntegrand in;
  in.statistic = g.value;
  in.penalty = [g, c](const Vector& x) { return 0.5 * c * g.grad(x).squaredNorm(); };
  in.average_penalty = g.shape == TestFunction::Shape::SeparatelyConcave;
  const auto check = mc_exponential_check(sampler, in, n, seed, options);
  auto rep = detail::exponential_report("tsirelson-check", in.average_penalty ? "tsirelson-concave" : "tsirelson", check);
  rep.input("C", c);
  rep.notes.push_back("g = " + g.name);
  if (in.average_penalty) rep.metric("mean_penalty", check.penalty_mean);
  rep.wall_seconds = clock.seconds();
  return rep;
}

/// log P[exp(lambda(<a,X> - P<a,X>))] <= C lambda^2 |a|^2 / 2 on a grid of lambda.
inline ExperimentReport subgaussian_check(const Sampler& sampler, const Vector& a, double c,
                                          const std::vector<double>& lambdas, std::size_t n, std::uint64_t seed,
                                          const McOptions& options = {}) {
  Stopwatch clock;
  require(!lambdas.empty(), "subgaussian_check: empty lambda grid");
  ExperimentReport rep("subgaussian-check", "subgaussian");
  rep.seed = seed;
  rep.input("C", c);
  rep.verdict = Verdict::Pass;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    const double lambda = lambdas[k];
    ExponentialIntegrand in;
    in.statistic = [a, lambda](const Vector& x) { return lambda * a.dot(x); };
    const auto check = mc_exponential_check(sampler, in, n, derive_seed(seed, k), options);
    const double bound = 0.5 * c * lambda * lambda * a.squaredNorm();
    const double margin = check.estimate.log_mean - bound - options.sigmas * check.estimate.log_se;
    rep.metric("log_mgf[" + std::to_string(lambda) + "]", check.estimate.log_mean);
    if (margin > worst) {
      worst = margin;
      rep.set_left(check.estimate.log_mean);
      rep.left_se = check.estimate.log_se;
      rep.set_right(bound);
    }
    if (margin > 0.0) rep.verdict = Verdict::Fail;
  }
  rep.wall_seconds = clock.seconds();
  return rep;
}

/// P[exp(lambda (f - P f) - C lambda^2 sum_j alpha_j^2 / 2)] <= 1, or with
/// inverted = true, P[exp(lambda (P f - f) - C lambda^2 sum_j P[alpha_j^2] / 2)] <= 1,
/// for f(x) - f(y) <= sum_j alpha_j(x) 1{x_j != y_j}.
inline ExperimentReport hoeffding_check(const Sampler& sampler, const std::function<double(const Vector&)>& f,
                                        const std::function<Vector(const Vector&)>& alpha, double c, double lambda,
                                        std::size_t n, std::uint64_t seed, bool inverted,
                                        const McOptions& options = {}) {
  Stopwatch clock;
  require(lambda > 0.0 && c > 0.0, "hoeffding_check: lambda and C must be positive");
  ExponentialIntegrand in;
  in.statistic = [f, lambda](const Vector& x) { return lambda * f(x); };
  in.penalty = [alpha, c, lambda](const Vector& x) { return 0.5 * c * lambda * lambda * alpha(x).squaredNorm(); };
  in.sign = inverted ? -1.0 : 1.0;
  in.average_penalty = inverted;
  const auto check = mc_exponential_check(sampler, in, n, seed, options);
  auto rep = detail::exponential_report("hoeffding-check", inverted ? "hoeffding-inverted" : "hoeffding", check);
  rep.input("C", c);
  rep.input("lambda", lambda);
  rep.wall_seconds = clock.seconds();
  return rep;
}

/// Var(g) <= C P[|grad g|^2] for separately convex g. Passes iff the empirical
/// variance is at most C times the empirical gradient energy plus `sigmas`
/// combined standard errors.
inline ExperimentReport convex_poincare_check(const Sampler& sampler, const TestFunction& g, double c, std::size_t n,
                                              std::uint64_t seed, const McOptions& options = {}) {
  Stopwatch clock;
  require(n >= options.min_samples, "convex_poincare_check: too few samples");
  require(g.shape == TestFunction::Shape::SeparatelyConvex || g.shape == TestFunction::Shape::SeparatelyConcave,
          "convex_poincare_check: g must be separately convex or concave");
  spot_check(g, sampler, derive_seed(seed, 0x5907u));
  std::vector<double> v(n), e(n);
  detail::draw_batch(sampler, n, seed, options.workers, [&](std::size_t i, const Vector& x) {
    v[i] = g(x);
    e[i] = g.grad(x).squaredNorm();
  });
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(v[i]) || !std::isfinite(e[i]))
      throw NumericError("convex_poincare_check: non-finite sample at index " + std::to_string(i));
  const auto [mean, sd] = detail::mean_and_sd(v);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
  const auto [variance, sq_sd] = detail::mean_and_sd(sq);
  const auto [energy, energy_sd] = detail::mean_and_sd(e);
  const double rn = std::sqrt(static_cast<double>(n));
  const double var_se = sq_sd / rn, energy_se = c * energy_sd / rn;
  const double combined = std::sqrt(var_se * var_se + energy_se * energy_se);

  ExperimentReport rep("poincare-check", "convex-poincare");
  rep.seed = seed;
  rep.input("C", c);
  rep.input("samples", static_cast<double>(n));
  rep.set_left(variance);
  rep.left_se = var_se;
  rep.set_right(c * energy);
  rep.right_se = energy_se;
  rep.metric("combined_se", combined);
  rep.notes.push_back("g = " + g.name);
  rep.verdict = variance <= c * energy + options.sigmas * combined ? Verdict::Pass : Verdict::Fail;
  rep.wall_seconds = clock.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// Convex-distance inequalities.

enum class TalagrandVariant { HammingDT, EuclideanDN };

struct TalagrandOptions {
  std::size_t hull_cap = 200;
  double sigmas = 3.0;
  unsigned workers = 1;
};

namespace detail {

inline std::string talagrand_id(TalagrandVariant v) {
  return v == TalagrandVariant::HammingDT ? "talagrand-hamming" : "talagrand-euclidean";
}

}  // namespace detail

/// Monte-Carlo check of P[exp(d(X,A)^2 / 4C)] <= 1/P(A). P(A) and the point set
/// representing A (at most hull_cap distinct sampled members) come from a first
/// batch; the left side is averaged over an independent second batch. Members
/// of A are at distance 0; other points use the hull of the representatives,
/// which can only overstate the distance.
inline ExperimentReport talagrand_check(const Sampler& sampler, const std::function<bool(const Vector&)>& in_a,
                                        std::size_t n, double c, TalagrandVariant variant, std::size_t samples,
                                        std::uint64_t seed, const TalagrandOptions& options = {}) {
  Stopwatch clock;
  require(c > 0.0, "talagrand_check: C must be positive");
  require(samples >= 100, "talagrand_check: too few samples");
  std::vector<Vector> first(samples);
  std::vector<char> member(samples, 0);
  detail::draw_batch(sampler, samples, derive_seed(seed, 0xA5u), options.workers, [&](std::size_t i, const Vector& x) {
    require(x.size() == static_cast<Eigen::Index>(n), "talagrand_check: sampler dimension mismatch");
    first[i] = x;
    member[i] = in_a(x) ? 1 : 0;
  });
  const auto hits = static_cast<std::size_t>(std::count(member.begin(), member.end(), 1));
  if (hits == 0) throw NumericError("talagrand_check: no sampled point falls in A");
  const double p_a = static_cast<double>(hits) / static_cast<double>(samples);
  require(p_a >= 0.01, "talagrand_check: estimated P(A) below 0.01");

  std::vector<Vector> reps;
  std::set<std::vector<double>> seen;
  for (std::size_t i = 0; i < samples && reps.size() < options.hull_cap; ++i) {
    if (!member[i]) continue;
    std::vector<double> key(first[i].data(), first[i].data() + first[i].size());
    if (seen.insert(key).second) reps.push_back(first[i]);
  }

  std::vector<double> left(samples);
  detail::draw_batch(sampler, samples, derive_seed(seed, 0x5Au), options.workers, [&](std::size_t i, const Vector& x) {
    double d = 0.0;
    if (!in_a(x)) {
      d = variant == TalagrandVariant::HammingDT ? convex_distance_dT(x, reps)
                                                 : distance_to_convex_hull(x, reps).distance;
    }
    left[i] = std::exp(d * d / (4.0 * c));
  });
  const auto [mean, sd] = detail::mean_and_sd(left);
  const double rn = std::sqrt(static_cast<double>(samples));
  const double rel_left = mean > 0.0 ? sd / rn / mean : 0.0;
  const double rel_right = std::sqrt((1.0 - p_a) / (static_cast<double>(samples) * p_a));
  const double right = 1.0 / p_a;

  ExperimentReport rep("talagrand-check", detail::talagrand_id(variant));
  rep.seed = seed;
  rep.input("n", static_cast<double>(n));
  rep.input("C", c);
  rep.input("samples", static_cast<double>(samples));
  rep.set_left(mean);
  rep.left_se = sd / rn;
  rep.set_right(right);
  rep.right_se = right * rel_right;
  rep.metric("P(A)", p_a);
  rep.metric("representatives", static_cast<double>(reps.size()));
  const double slack = options.sigmas * std::sqrt(rel_left * rel_left + rel_right * rel_right);
  rep.verdict = mean <= right * (1.0 + slack) ? Verdict::Pass : Verdict::Fail;
  rep.wall_seconds = clock.seconds();
  return rep;
}

/// Exact Hamming version on a finite product space: every support point of P
/// is enumerated, A is the set of support points accepted by `in_a`.
inline ExperimentReport talagrand_exact(const DiscreteMeasure& p,
                                        const std::function<bool(const std::vector<std::size_t>&)>& in_a, double c) {
  Stopwatch clock;
  require(c > 0.0, "talagrand_exact: C must be positive");
  const auto& space = p.space();
  std::vector<Vector> a;
  double p_a = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    const auto coords = space.decode(i);
    if (!in_a(coords)) continue;
    p_a += p[i];
    Vector v(static_cast<Eigen::Index>(coords.size()));
    for (std::size_t j = 0; j < coords.size(); ++j) v(static_cast<Eigen::Index>(j)) = static_cast<double>(coords[j]);
    a.push_back(std::move(v));
  }
  require(p_a > 0.0, "talagrand_exact: A has zero probability");
  double left = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    const auto coords = space.decode(i);
    Vector x(static_cast<Eigen::Index>(coords.size()));
    for (std::size_t j = 0; j < coords.size(); ++j) x(static_cast<Eigen::Index>(j)) = static_cast<double>(coords[j]);
    const double d = convex_distance_dT(x, a);
    worst = std::max(worst, d);
    left += p[i] * std::exp(d * d / (4.0 * c));
  }
  ExperimentReport rep("talagrand-exact", "talagrand-hamming");
  rep.input("n", static_cast<double>(space.length()));
  rep.input("C", c);
  rep.set_left(left);
  rep.set_right(1.0 / p_a);
  rep.metric("P(A)", p_a);
  rep.metric("max_distance", worst);
  rep.verdict = left <= 1.0 / p_a * (1.0 + 1e-12) ? Verdict::Pass : Verdict::Fail;
  rep.wall_seconds = clock.seconds();
  return rep;
}

}  // namespace wtineq
