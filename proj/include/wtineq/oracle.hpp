#pragma once

// Ordinary least squares on simulated dependent regression data, the
// nonexact and exact oracle bounds on its excess risk, and the replication
// experiments that test their confidence levels.

#include "wtineq/core.hpp"
#include "wtineq/report.hpp"

#include <Eigen/Eigenvalues>

#include <numeric>
#include <optional>
#include <sstream>

namespace wtineq {

struct RegressionData {
  Vector y;  // n responses
  Matrix z;  // n x d design

  std::size_t size() const { return static_cast<std::size_t>(y.size()); }
  std::size_t dim() const { return static_cast<std::size_t>(z.cols()); }

  /// n^{-1} sum_i |Z_i|^2
  double design_norm2() const { return z.rowwise().squaredNorm().mean(); }

  /// r(theta) = n^{-1} sum_i (Y_i - Z_i theta)^2
  double empirical_risk(const Vector& theta) const { return (y - z * theta).squaredNorm() / static_cast<double>(size()); }

  void validate() const {
    require(z.rows() == y.size(), "RegressionData: design and response lengths differ");
    require(z.cols() >= 1, "RegressionData: empty design");
    require(size() > dim(), "RegressionData: need more observations than regressors");
    require(y.allFinite() && z.allFinite(), "RegressionData: non-finite entries");
  }
};

/// Finite law of one design row Z_i (rows are identically distributed).
struct DesignLaw {
  std::vector<Vector> support;
  std::vector<double> probabilities;
};

/// Linear-Gaussian and bounded generators with stationary designs, so the
/// population Gram matrix is the same for every observation.
struct RegressionGenerator {
  enum class Design { IidGaussian, Ar1Coordinates, Autoregression, Rademacher };

  Design design = Design::IidGaussian;
  std::size_t d = 1;
  Vector theta_star;
  double noise_sd = 1.0;
  double phi = 0.0;

  /// Z_i ~ N(0, I_d) iid, Y_i = Z_i theta* + sigma xi_i.
  static RegressionGenerator iid_gaussian(Vector theta_star, double noise_sd = 1.0) {
    RegressionGenerator g;
    g.design = Design::IidGaussian;
    g.d = static_cast<std::size_t>(theta_star.size());
    g.theta_star = std::move(theta_star);
    g.noise_sd = noise_sd;
    g.validate();
    return g;
  }
  /// Each design coordinate is a stationary unit-variance Gaussian AR(1) with coefficient phi.
  static RegressionGenerator ar1_design(Vector theta_star, double phi, double noise_sd = 1.0) {
    RegressionGenerator g = iid_gaussian(std::move(theta_star), noise_sd);
    g.design = Design::Ar1Coordinates;
    g.phi = phi;
    g.validate();
    return g;
  }
  /// Y is a stationary AR(1) with coefficient phi and innovation sd sigma; Z_i = (Y_{i-1}, ..., Y_{i-d}).
  static RegressionGenerator autoregression(std::size_t d, double phi, double noise_sd = 1.0) {
    RegressionGenerator g;
    g.design = Design::Autoregression;
    g.d = d;
    g.theta_star = Vector::Zero(static_cast<Eigen::Index>(d));
    if (d > 0) g.theta_star(0) = phi;
    g.noise_sd = noise_sd;
    g.phi = phi;
    g.validate();
    return g;
  }
  /// Rademacher design coordinates, uniform noise with standard deviation sigma.
  static RegressionGenerator rademacher(Vector theta_star, double noise_sd = 1.0) {
    RegressionGenerator g = iid_gaussian(std::move(theta_star), noise_sd);
    g.design = Design::Rademacher;
    return g;
  }

  std::string name() const {
    switch (design) {
      case Design::IidGaussian:
        return "iid-gaussian";
      case Design::Ar1Coordinates:
        return "ar1-design";
      case Design::Autoregression:
        return "autoregression";
      case Design::Rademacher:
        return "rademacher";
    }
    return "unknown";
  }

  void validate() const {
    require(d >= 1, "RegressionGenerator: d must be >= 1");
    require(theta_star.size() == static_cast<Eigen::Index>(d), "RegressionGenerator: theta* has wrong dimension");
    require(theta_star.allFinite(), "RegressionGenerator: theta* must be finite");
    require(std::isfinite(noise_sd) && noise_sd >= 0.0, "RegressionGenerator: noise sd must be >= 0");
    require(std::abs(phi) < 1.0, "RegressionGenerator: |phi| must be < 1");
    if (design == Design::Autoregression) require(noise_sd > 0.0, "RegressionGenerator: autoregression needs noise");
  }

  RegressionData generate(std::size_t n, std::uint64_t seed) const {
    validate();
    require(n > d, "generate: need n > d");
    Rng rng(seed);
    std::normal_distribution<double> normal;
    const auto rows = static_cast<Eigen::Index>(n), cols = static_cast<Eigen::Index>(d);
    RegressionData data{Vector(rows), Matrix(rows, cols)};
    if (design == Design::Autoregression) {
      const double sd0 = noise_sd / std::sqrt(1.0 - phi * phi);
      Vector series(rows + cols);
      series(0) = sd0 * normal(rng);
      for (Eigen::Index t = 1; t < series.size(); ++t) series(t) = phi * series(t - 1) + noise_sd * normal(rng);
      for (Eigen::Index i = 0; i < rows; ++i) {
        data.y(i) = series(i + cols);
        for (Eigen::Index j = 0; j < cols; ++j) data.z(i, j) = series(i + cols - 1 - j);
      }
      return data;
    }
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double innovation = std::sqrt(1.0 - phi * phi);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        switch (design) {
          case Design::IidGaussian:
            data.z(i, j) = normal(rng);
            break;
          case Design::Ar1Coordinates:
            data.z(i, j) = i == 0 ? normal(rng) : phi * data.z(i - 1, j) + innovation * normal(rng);
            break;
          case Design::Rademacher:
            data.z(i, j) = (rng() & 1u) ? 1.0 : -1.0;
            break;
          case Design::Autoregression:
            break;
        }
      }
      const double eps = design == Design::Rademacher ? std::sqrt(3.0) * unit(rng) : normal(rng);
      data.y(i) = data.z.row(i).dot(theta_star) + noise_sd * eps;
    }
    return data;
  }

  /// Law of one design row; only finite for the Rademacher design.
  DesignLaw design_law() const {
    require(design == Design::Rademacher, "design_law: only the Rademacher design has finite support");
    DesignLaw law;
    const std::size_t count = std::size_t{1} << d;
    for (std::size_t mask = 0; mask < count; ++mask) {
      Vector z(static_cast<Eigen::Index>(d));
      for (std::size_t j = 0; j < d; ++j) z(static_cast<Eigen::Index>(j)) = (mask >> j) & 1u ? 1.0 : -1.0;
      law.support.push_back(std::move(z));
      law.probabilities.push_back(1.0 / static_cast<double>(count));
    }
    return law;
  }
};

/// Population quadratic risk R(theta) = theta' G theta - 2 b' theta + c for one
/// observation, its minimiser and rho = max(1, spectral radius of G^{-1}).
struct RiskOracle {
  Matrix gram;
  Vector cross;
  double response_second_moment = 0.0;
  Vector theta_bar;
  double risk_bar = 0.0;
  double rho = 1.0;
  bool exact = true;
  // Monte-Carlo oracles keep per-batch moments to report standard errors.
  std::vector<Matrix> batch_gram;
  std::vector<Vector> batch_cross;
  std::vector<double> batch_c;

  double risk(const Vector& theta) const {
    return theta.dot(gram * theta) - 2.0 * cross.dot(theta) + response_second_moment;
  }
  double excess_risk(const Vector& theta) const { return risk(theta) - risk_bar; }

  /// Standard error of risk(theta); zero for closed-form oracles.
  double risk_se(const Vector& theta) const {
    if (exact || batch_c.size() < 2) return 0.0;
    std::vector<double> r(batch_c.size());
    for (std::size_t k = 0; k < r.size(); ++k)
      r[k] = theta.dot(batch_gram[k] * theta) - 2.0 * batch_cross[k].dot(theta) + batch_c[k];
    const double m = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
    double ss = 0.0;
    for (double v : r) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(r.size() - 1) / static_cast<double>(r.size()));
  }

  void finalize() {
    require(gram.rows() == gram.cols() && gram.rows() == cross.size(), "RiskOracle: shape mismatch");
    require(gram.allFinite() && cross.allFinite() && std::isfinite(response_second_moment),
            "RiskOracle: non-finite moments");
    require((gram - gram.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + gram.cwiseAbs().maxCoeff()),
            "RiskOracle: Gram matrix must be symmetric");
    Eigen::LLT<Matrix> llt(gram);
    require(llt.info() == Eigen::Success, "RiskOracle: Gram matrix must be positive definite");
    theta_bar = llt.solve(cross);
    risk_bar = response_second_moment - cross.dot(theta_bar);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    const double smallest = eig.eigenvalues().minCoeff();
    require(smallest > 0.0, "RiskOracle: Gram matrix must be positive definite");
    rho = std::max(1.0, 1.0 / smallest);
  }

  /// R(theta-bar) <= R(theta) at random probes around theta-bar.
  void validate(std::uint64_t seed = 1, std::size_t probes = 100) const {
    Rng rng(seed);
    std::normal_distribution<double> normal;
    for (std::size_t k = 0; k < probes; ++k) {
      Vector t = theta_bar;
      for (Eigen::Index j = 0; j < t.size(); ++j) t(j) += normal(rng);
      if (risk(t) < risk_bar - 1e-10 * (1.0 + std::abs(risk_bar)))
        throw DomainError("RiskOracle: theta-bar does not minimise the risk");
    }
  }

  static RiskOracle closed_form(const RegressionGenerator& g) {
    g.validate();
    RiskOracle o;
    const auto d = static_cast<Eigen::Index>(g.d);
    if (g.design == RegressionGenerator::Design::Autoregression) {
      const double var = g.noise_sd * g.noise_sd / (1.0 - g.phi * g.phi);
      auto acov = [&](Eigen::Index h) { return var * std::pow(g.phi, static_cast<double>(h)); };
      o.gram.resize(d, d);
      o.cross.resize(d);
      for (Eigen::Index j = 0; j < d; ++j) {
        o.cross(j) = acov(j + 1);
        for (Eigen::Index k = 0; k < d; ++k) o.gram(j, k) = acov(std::abs(j - k));
      }
      o.response_second_moment = var;
    } else {
      // Every other design has unit-variance uncorrelated coordinates per row.
      o.gram = Matrix::Identity(d, d);
      o.cross = g.theta_star;
      o.response_second_moment = g.theta_star.squaredNorm() + g.noise_sd * g.noise_sd;
    }
    o.exact = true;
    o.finalize();
    return o;
  }

  /// Moments estimated from one long simulated sample (>= 1e5 observations),
  /// with standard errors from `batches` contiguous batch means.
  static RiskOracle monte_carlo(const RegressionGenerator& g, std::size_t samples, std::uint64_t seed,
                                std::size_t batches = 100) {
    require(samples >= 100000, "RiskOracle::monte_carlo: need at least 1e5 samples");
    require(batches >= 2 && samples / batches > g.d, "RiskOracle::monte_carlo: bad batch count");
    const auto data = g.generate(samples, seed);
    RiskOracle o;
    o.exact = false;
    const std::size_t per = samples / batches;
    const auto d = static_cast<Eigen::Index>(g.d);
    o.gram = Matrix::Zero(d, d);
    o.cross = Vector::Zero(d);
    for (std::size_t b = 0; b < batches; ++b) {
      const auto start = static_cast<Eigen::Index>(b * per), len = static_cast<Eigen::Index>(per);
      const auto zb = data.z.middleRows(start, len);
      const auto yb = data.y.segment(start, len);
      o.batch_gram.push_back(zb.transpose() * zb / static_cast<double>(per));
      o.batch_cross.push_back(zb.transpose() * yb / static_cast<double>(per));
      o.batch_c.push_back(yb.squaredNorm() / static_cast<double>(per));
      o.gram += o.batch_gram.back();
      o.cross += o.batch_cross.back();
      o.response_second_moment += o.batch_c.back();
    }
    o.gram /= static_cast<double>(batches);
    o.gram = 0.5 * (o.gram + o.gram.transpose()).eval();
    o.cross /= static_cast<double>(batches);
    o.response_second_moment /= static_cast<double>(batches);
    o.finalize();
    return o;
  }
};

/// Minimiser of the empirical risk via the normal equations.
inline Vector ols_fit(const RegressionData& data) {
  data.validate();
  const Matrix gram = data.z.transpose() * data.z;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  const Vector& ev = eig.eigenvalues();
  const double top = ev.maxCoeff();
  if (!(top > 0.0) || ev.minCoeff() < 1e-12 * top) {
    std::ostringstream os;
    os << "ols_fit: singular design; null directions:";
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
      if (ev(k) >= 1e-12 * std::max(top, 1e-300)) continue;
      os << " [";
      for (Eigen::Index j = 0; j < ev.size(); ++j) os << (j ? ", " : "") << eig.eigenvectors()(j, k);
      os << "]";
    }
    throw DomainError(os.str());
  }
  Eigen::LLT<Matrix> llt(gram);
  const Vector theta = llt.solve(data.z.transpose() * data.y);
  if (!theta.allFinite()) throw NumericError("ols_fit: non-finite solution");
  return theta;
}

struct Risks {
  double population = 0.0;         // R(theta)
  double empirical = 0.0;          // r(theta)
  double population_excess = 0.0;  // R(theta) - R(theta-bar)
  double empirical_excess = 0.0;   // r(theta) - r(theta-bar)
};

inline Risks risks(const Vector& theta, const RiskOracle& oracle, const RegressionData& data) {
  require(theta.size() == oracle.gram.rows() && data.dim() == static_cast<std::size_t>(theta.size()),
          "risks: dimension mismatch");
  Risks r;
  r.population = oracle.risk(theta);
  r.empirical = data.empirical_risk(theta);
  r.population_excess = r.population - oracle.risk_bar;
  r.empirical_excess = r.empirical - data.empirical_risk(oracle.theta_bar);
  return r;
}

struct OracleParams {
  double eta = 0.1;
  double epsilon = 0.05;
  double c = 1.0;
  double beta = 1.0;
  double m = 1.0;  // truncation level of the exact bound
  double b = 0.0;  // Bernstein constant
  std::optional<double> log_tail;  // log P(r(theta-bar) > M); estimated when empty
};

struct NonexactBound {
  double b1 = 0.0, b2 = 0.0, b3 = 0.0;
  double concentration = 0.0;  // 16 rho C log(1/eps) / (n eta)
  double additive = 0.0;       // everything except (1 + B1 eta) R(theta-bar)
  double total = 0.0;          // the full right-hand side at the oracle's R(theta-bar)
};

inline NonexactBound nonexact_bound(const OracleParams& params, double theta_bar_norm2, double risk_bar, double rho,
                                    std::size_t d, std::size_t n) {
  const double nd = static_cast<double>(n), dd = static_cast<double>(d);
  require(n > 0 && d > 0, "nonexact_bound: n and d must be positive");
  require(params.eta > (dd + 2.0) / nd && params.eta < 1.0, "nonexact_bound: eta must lie in ((d+2)/n, 1)");
  require(params.epsilon > 0.0 && params.epsilon < 1.0, "nonexact_bound: epsilon must lie in (0, 1)");
  require(params.c > 0.0 && rho >= 1.0 && theta_bar_norm2 >= 0.0 && risk_bar >= 0.0,
          "nonexact_bound: C > 0, rho >= 1 and nonnegative norms required");
  const double eta = params.eta;
  NonexactBound out;
  out.b1 = 2.0 * (3.0 + 2.0 * theta_bar_norm2 + eta / nd);
  out.b2 = 2.0 * (5.0 + theta_bar_norm2);
  out.b3 = 2.0 * (dd * (dd - 1.0) + dd / nd);
  out.concentration = 16.0 * rho * params.c * std::log(1.0 / params.epsilon) / (nd * eta);
  out.additive = out.b2 * dd / (nd * eta) + out.concentration + out.b3 / ((nd * eta) * (nd * eta));
  out.total = (1.0 + out.b1 * eta) * risk_bar + out.additive;
  return out;
}

inline NonexactBound nonexact_bound(const OracleParams& params, const RiskOracle& oracle, std::size_t d,
                                    std::size_t n) {
  return nonexact_bound(params, oracle.theta_bar.squaredNorm(), oracle.risk_bar, oracle.rho, d, n);
}

/// Additive term of the exact bound; the bound itself is R(theta-bar) plus this.
inline double exact_bound_term(const OracleParams& params, double risk_bar, double rho, std::size_t d, std::size_t n,
                               double b, double m, double log_tail) {
  require(b >= 0.0 && m > 0.0, "exact_bound: B >= 0 and M > 0 required");
  require(log_tail <= 0.0, "exact_bound: log_tail is the log of a probability");
  require(params.epsilon > 0.0 && params.epsilon < 1.0 && params.c > 0.0, "exact_bound: bad epsilon or C");
  const double nd = static_cast<double>(n), dd = static_cast<double>(d);
  const double inner = b * dd + 8.0 * rho * params.c * (std::log(1.0 / params.epsilon) - log_tail) +
                       dd * (risk_bar + m) / (10.0 * b + 40.0 * m) + 8.0 * (b * dd) * (b * dd) / nd;
  return 160.0 * (b * b + 4.0 * b * m) / nd * inner;
}

inline double exact_bound(const OracleParams& params, const RiskOracle& oracle, std::size_t d, std::size_t n, double b,
                          double m, double log_tail) {
  return oracle.risk_bar + exact_bound_term(params, oracle.risk_bar, oracle.rho, d, n, b, m, log_tail);
}

struct TailEstimate {
  double log_tail = 0.0;
  bool clipped = false;  // no exceedance observed; clipped at log(1/(N+1))
  std::size_t exceedances = 0;
  std::size_t samples = 0;
};

/// Monte-Carlo estimate of log P(r(theta-bar) > M) over fresh datasets of size n.
inline TailEstimate estimate_log_tail(const RegressionGenerator& g, const RiskOracle& oracle, std::size_t n, double m,
                                      std::size_t samples, std::uint64_t seed, unsigned workers = 1) {
  require(samples >= 1, "estimate_log_tail: need samples");
  std::vector<char> hit(samples, 0);
  parallel_for(samples, workers, [&](std::size_t i) {
    hit[i] = g.generate(n, derive_seed(seed, i)).empirical_risk(oracle.theta_bar) > m ? 1 : 0;
  });
  TailEstimate t;
  t.samples = samples;
  t.exceedances = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
  if (t.exceedances == 0) {
    t.clipped = true;
    t.log_tail = -std::log(static_cast<double>(samples) + 1.0);
  } else {
    t.log_tail = std::log(static_cast<double>(t.exceedances) / static_cast<double>(samples));
  }
  return t;
}

/// Set of parameters over which the Bernstein ratio is maximised.
struct ThetaSet {
  enum class Kind { BallComplement, Grid };
  Kind kind = Kind::BallComplement;
  double radius = 1.0;      // {|theta| >= radius}
  std::vector<Vector> grid;

  static ThetaSet ball_complement(double radius) { return {Kind::BallComplement, radius, {}}; }
  static ThetaSet finite(std::vector<Vector> grid) { return {Kind::Grid, 0.0, std::move(grid)}; }
};

namespace detail {

// ess sup |Z theta| / P[(Z theta)^2] for a stationary design law.
inline double bernstein_ratio(const DesignLaw& law, const Vector& theta) {
  double sup = 0.0, second = 0.0;
  for (std::size_t k = 0; k < law.support.size(); ++k) {
    if (law.probabilities[k] <= 0.0) continue;
    const double v = law.support[k].dot(theta);
    sup = std::max(sup, std::abs(v));
    second += law.probabilities[k] * v * v;
  }
  if (second <= 0.0) return std::numeric_limits<double>::infinity();
  return sup / second;
}

}  // namespace detail

/// B = sup_theta sum_i ess sup |Z_i theta| / sum_i P[(Z_i theta)^2] for identically
/// distributed design rows, so the sums over i cancel. For {|theta| >= r} the
/// ratio is homogeneous of degree -1 and the sup sits on the sphere of radius r:
/// exact for d = 1, an angular grid with refinement for d = 2, and a random
/// multistart search with shrinking steps otherwise.
inline double bernstein_B(const DesignLaw& law, const ThetaSet& theta_set, std::uint64_t seed = 1) {
  require(!law.support.empty() && law.support.size() == law.probabilities.size(), "bernstein_B: bad design law");
  const auto d = law.support.front().size();
  if (theta_set.kind == ThetaSet::Kind::Grid) {
    require(!theta_set.grid.empty(), "bernstein_B: empty grid");
    double best = 0.0;
    for (const auto& t : theta_set.grid) {
      require(t.size() == d, "bernstein_B: grid dimension mismatch");
      best = std::max(best, detail::bernstein_ratio(law, t));
    }
    return best;
  }
  require(theta_set.radius > 0.0, "bernstein_B: radius must be positive");
  auto on_sphere = [&](const Vector& u) { return detail::bernstein_ratio(law, theta_set.radius * u.normalized()); };
  if (d == 1) return on_sphere(Vector::Ones(1));
  if (d == 2) {
    auto direction = [](double a) {
      Vector u(2);
      u << std::cos(a), std::sin(a);
      return u;
    };
    const int steps = 3600;
    double best = 0.0, best_angle = 0.0;
    for (int k = 0; k < steps; ++k) {
      const double a = M_PI * k / steps;  // u and -u give the same ratio
      const double v = on_sphere(direction(a));
      if (v > best) best = v, best_angle = a;
    }
    for (double h = M_PI / steps; h > 1e-12; h /= 2.0) {
      for (double a : {best_angle - h, best_angle + h}) {
        const double v = on_sphere(direction(a));
        if (v > best) best = v, best_angle = a;
      }
    }
    return best;
  }
  Rng rng(seed);
  std::normal_distribution<double> normal;
  double best = 0.0;
  for (int start = 0; start < 200; ++start) {
    Vector u(d);
    for (Eigen::Index j = 0; j < d; ++j) u(j) = normal(rng);
    double value = on_sphere(u);
    for (double h = 0.5; h > 1e-9; h *= 0.5) {
      for (int step = 0; step < 40; ++step) {
        Vector v = u;
        for (Eigen::Index j = 0; j < d; ++j) v(j) += h * normal(rng);
        const double candidate = on_sphere(v);
        if (candidate > value) value = candidate, u = v.normalized();
      }
    }
    best = std::max(best, value);
  }
  return best;
}

/// C = base (M + S)^2 for a Lipschitz recursion driven by innovations whose law
/// has constant `base`, with coupling sum S and M = 1 when d = d'.
inline double linear_model_constant(double base, double s, double m = 1.0) {
  require(base > 0.0 && s >= 0.0 && m > 0.0, "linear_model_constant: bad inputs");
  return base * (m + s) * (m + s);
}

/// Dependence coefficient of the regression vector X_k = (Y_k, Y_{k-1}, ..., Y_{k-l})
/// bounded by the coefficient of Y at lag ceil(k / l). gamma_y[t] is the lag-t
/// coefficient of Y (gamma_y[0] the diagonal).
inline double lagged_design_gamma(const std::vector<double>& gamma_y, std::size_t ell, std::size_t k) {
  require(ell >= 1, "lagged_design_gamma: delay order must be >= 1");
  const std::size_t lag = (k + ell - 1) / ell;
  require(lag < gamma_y.size(), "lagged_design_gamma: gamma_y too short");
  return gamma_y[lag];
}

/// Population-level check with Q = P:
/// E[Rbar(theta^)] <= E|Z|_n^2 / beta + 4 sqrt(rho C E[K] beta E[Rbar(theta^)] / (2n)).
inline ExperimentReport theorem_io_residual(const RegressionGenerator& g, const RiskOracle& oracle,
                                            const OracleParams& params, std::size_t n, std::size_t replications,
                                            std::uint64_t seed, unsigned workers = 1) {
  Stopwatch clock;
  require(replications >= 1000, "theorem_io_residual: need at least 1000 replications");
  require(params.beta > 0.0 && params.c > 0.0, "theorem_io_residual: beta and C must be positive");
  std::vector<double> excess(replications), znorm(replications), rbar(replications);
  parallel_for(replications, workers, [&](std::size_t i) {
    const auto data = g.generate(n, derive_seed(seed, i));
    const Vector theta = ols_fit(data);
    excess[i] = oracle.excess_risk(theta);
    znorm[i] = data.design_norm2();
    rbar[i] = data.empirical_risk(oracle.theta_bar);
  });
  auto moments = [&](const std::vector<double>& v) {
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::pair{m, std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()))};
  };
  const auto [left, left_se] = moments(excess);
  const auto [z2, z2_se] = moments(znorm);
  const auto [r0, r0_se] = moments(rbar);
  const double beta = params.beta, dd = static_cast<double>(g.d), nd = static_cast<double>(n);
  const double t2 = oracle.theta_bar.squaredNorm();
  const double k_mean = 4.0 * dd / beta + (1.0 + t2 + (dd + 2.0) / beta) * oracle.risk_bar +
                        (t2 + dd / beta) * (dd - 1.0) / beta + (1.0 + t2) * r0;
  const double root_arg = oracle.rho * params.c * k_mean * beta * std::max(left, 0.0) / (2.0 * nd);
  const double right = z2 / beta + 4.0 * std::sqrt(root_arg);
  // Delta method on left - right, treating the three means as independent.
  const double root = std::sqrt(root_arg);
  const double d_left = root > 0.0 ? 1.0 - 2.0 * root / std::max(left, 1e-300) : 1.0;
  const double d_k = root > 0.0 ? 2.0 * root / k_mean : 0.0;
  const double se = std::sqrt(std::pow(d_left * left_se, 2) + std::pow(z2_se / beta, 2) +
                              std::pow(d_k * (1.0 + t2) * r0_se, 2));

  ExperimentReport rep("oracle-residual", "oracle-conditional");
  rep.seed = seed;
  rep.input("n", nd);
  rep.input("d", dd);
  rep.input("beta", beta);
  rep.input("C", params.c);
  rep.input("replications", static_cast<double>(replications));
  rep.set_left(left);
  rep.left_se = left_se;
  rep.set_right(right);
  rep.metric("combined_se", se);
  rep.metric("E[K]", k_mean);
  rep.metric("rho", oracle.rho);
  rep.notes.push_back("generator = " + g.name());
  rep.verdict = left <= right + 3.0 * se ? Verdict::Pass : Verdict::Fail;
  rep.wall_seconds = clock.seconds();
  return rep;
}

enum class OracleBound { Nonexact, Exact };

struct CoverageRow {
  std::uint64_t seed = 0;
  double risk = 0.0;   // R(theta^)
  double bound = 0.0;
  bool hit = false;
};

struct CoverageResult {
  ExperimentReport report;
  std::vector<CoverageRow> rows;
};

struct CoverageOptions {
  unsigned workers = 1;
  std::size_t tail_samples = 10000;
  ThetaSet theta_set = ThetaSet::ball_complement(1.0);
};

/// Fraction of replications in which R(theta^) stays below the chosen bound.
/// PASS iff coverage >= 1 - eps - 2 sqrt(eps (1 - eps) / replications). For the
/// exact bound, B defaults to bernstein_B of the design law when params.b == 0
/// and log P(r(theta-bar) > M) is estimated when not supplied.
inline CoverageResult coverage_experiment(const RegressionGenerator& g, const RiskOracle& oracle,
                                          const OracleParams& params, OracleBound kind, std::size_t n,
                                          std::size_t replications, std::uint64_t seed,
                                          const CoverageOptions& options = {}) {
  Stopwatch clock;
  require(replications >= 500, "coverage_experiment: need at least 500 replications");
  CoverageResult out;
  auto& rep = out.report;
  rep = ExperimentReport("oracle-coverage", kind == OracleBound::Nonexact ? "oracle-nonexact" : "oracle-exact");
  rep.seed = seed;
  rep.input("n", static_cast<double>(n));
  rep.input("d", static_cast<double>(g.d));
  rep.input("epsilon", params.epsilon);
  rep.input("C", params.c);
  rep.input("replications", static_cast<double>(replications));
  rep.notes.push_back("generator = " + g.name());

  double bound = 0.0;
  if (kind == OracleBound::Nonexact) {
    const auto nb = nonexact_bound(params, oracle, g.d, n);
    rep.input("eta", params.eta);
    rep.metric("B1", nb.b1);
    rep.metric("B2", nb.b2);
    rep.metric("B3", nb.b3);
    bound = nb.total;
  } else {
    double b = params.b;
    if (b <= 0.0) b = bernstein_B(g.design_law(), options.theta_set, seed);
    double log_tail = 0.0;
    if (params.log_tail) {
      log_tail = *params.log_tail;
    } else {
      const auto tail = estimate_log_tail(g, oracle, n, params.m, options.tail_samples, derive_seed(seed, 0x7A11u),
                                          options.workers);
      log_tail = tail.log_tail;
      if (tail.clipped) rep.notes.push_back("log tail clipped at log(1/(N+1)): no exceedance of M observed");
    }
    rep.input("M", params.m);
    rep.metric("B", b);
    rep.metric("log_tail", log_tail);
    bound = exact_bound(params, oracle, g.d, n, b, params.m, log_tail);
  }
  rep.metric("bound", bound);
  rep.metric("R(theta-bar)", oracle.risk_bar);

  out.rows.resize(replications);
  parallel_for(replications, options.workers, [&](std::size_t i) {
    auto& row = out.rows[i];
    row.seed = derive_seed(seed, i);
    row.risk = oracle.risk(ols_fit(g.generate(n, row.seed)));
    row.bound = bound;
    row.hit = row.risk <= bound;
  });
  const auto hits = std::count_if(out.rows.begin(), out.rows.end(), [](const CoverageRow& r) { return r.hit; });
  const double reps = static_cast<double>(replications);
  const double coverage = static_cast<double>(hits) / reps;
  const double eps = params.epsilon;
  const double threshold = 1.0 - eps - 2.0 * std::sqrt(eps * (1.0 - eps) / reps);
  rep.set_left(coverage);
  rep.left_se = std::sqrt(coverage * (1.0 - coverage) / reps);
  rep.set_right(threshold);
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& r : out.rows) worst = std::max(worst, r.risk);
  rep.metric("max_risk", worst);
  rep.verdict = coverage >= threshold ? Verdict::Pass : Verdict::Fail;
  rep.wall_seconds = clock.seconds();
  return out;
}

}  // namespace wtineq
