#pragma once

// Simulators for contractive recursions X_{t+1} = psi_{t+1}(X_t) driven by iid
// innovations, their shared-innovation coupling, and Monte-Carlo estimates of
// the coupling coefficients gamma_{k,0}(p) along that coupling.

#include "wtineq/core.hpp"

#include <Eigen/Eigenvalues>

#include <deque>
#include <numeric>
#include <string>
#include <variant>

namespace wtineq {

// ---------------------------------------------------------------------------
// Innovations.

enum class PathMetric { Euclidean, Hamming };

struct InnovationLaw {
  enum class Kind { Gaussian, Uniform, Rademacher, TruncatedGaussian };
  Kind kind = Kind::Gaussian;
  double truncation = 3.0;  // |xi| <= truncation for TruncatedGaussian

  static InnovationLaw gaussian() { return {}; }
  static InnovationLaw uniform() { return {Kind::Uniform, 1.0}; }
  static InnovationLaw rademacher() { return {Kind::Rademacher, 1.0}; }
  static InnovationLaw truncated_gaussian(double c) {
    require(c > 0.0 && std::isfinite(c), "truncated_gaussian: bound must be positive");
    return {Kind::TruncatedGaussian, c};
  }

  double sample(Rng& rng) const {
    switch (kind) {
      case Kind::Gaussian:
        return std::normal_distribution<double>()(rng);
      case Kind::Uniform:
        return std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
      case Kind::Rademacher:
        return (rng() & 1u) ? 1.0 : -1.0;
      case Kind::TruncatedGaussian: {
        std::normal_distribution<double> normal;
        for (;;) {
          const double x = normal(rng);
          if (std::abs(x) <= truncation) return x;
        }
      }
    }
    return 0.0;
  }

  bool bounded() const { return kind != Kind::Gaussian; }

  /// Constant C of the transport inequality the law satisfies on the real line:
  /// Gaussian and truncated Gaussian are 1-log-concave (Euclidean C = 1); a law
  /// on an interval of length L gets C = L^2; every law gets C = 1 for Hamming.
  double base_constant(PathMetric metric) const {
    if (metric == PathMetric::Hamming) return 1.0;
    switch (kind) {
      case Kind::Gaussian:
      case Kind::TruncatedGaussian:
        return 1.0;
      case Kind::Uniform:
      case Kind::Rademacher:
        return 4.0;
    }
    return 1.0;
  }

  std::string name() const {
    switch (kind) {
      case Kind::Gaussian: return "gaussian";
      case Kind::Uniform: return "uniform";
      case Kind::Rademacher: return "rademacher";
      case Kind::TruncatedGaussian: return "truncated_gaussian";
    }
    return "unknown";
  }
};

// ---------------------------------------------------------------------------
// Models.

/// X_{t+1} = A X_t + B xi_{t+1}; B defaults to the identity.
struct Arma {
  Matrix a;
  Matrix b;
};

/// X_{t+1} = f(X_t) + M(X_t) xi_{t+1} with |M(x)| <= volatility_bound.
struct Affine {
  std::function<Vector(const Vector&)> drift;
  std::function<Matrix(const Vector&)> volatility;
  double volatility_bound = 1.0;
};

/// X_t = F((X_{t-1}, X_{t-2}, ...), xi_t) with the past truncated to
/// `truncation` states and zero padded. F is expected to be Lipschitz with
/// weights a_i in lag i.
struct InfiniteMemory {
  std::function<Vector(const std::deque<Vector>&, const Vector&)> update;
  std::vector<double> weights;
  std::size_t truncation = 512;
};

/// Scalar X_t = sum_i a_i X_{t-i} + xi_t.
struct ArInfinity {
  std::vector<double> coefficients;
  std::size_t truncation = 512;
};

/// Finite-state chain on {0..k-1}: X_{t+1} is the inverse CDF of row X_t of the
/// transition matrix evaluated at U = (xi + 1)/2, xi uniform on [-1, 1].
struct FiniteChain {
  Matrix transition;
};

struct ProcessSpec {
  std::variant<Arma, Affine, InfiniteMemory, ArInfinity, FiniteChain> model;
  InnovationLaw innovation;
  std::size_t dim = 1;
  Vector center;  // stationary mean used by the default pair sampler

  static ProcessSpec arma(Matrix a, InnovationLaw law = InnovationLaw::gaussian(), Matrix b = Matrix()) {
    const auto k = static_cast<std::size_t>(a.rows());
    if (b.size() == 0) b = Matrix::Identity(a.rows(), a.rows());
    ProcessSpec s{Arma{std::move(a), std::move(b)}, law, k, Vector::Zero(static_cast<Eigen::Index>(k))};
    s.validate();
    return s;
  }
  static ProcessSpec ar1(double phi, InnovationLaw law = InnovationLaw::gaussian()) {
    return arma(Matrix::Constant(1, 1, phi), law);
  }
  static ProcessSpec affine(std::size_t k, std::function<Vector(const Vector&)> f,
                            std::function<Matrix(const Vector&)> m, double bound,
                            InnovationLaw law = InnovationLaw::gaussian()) {
    ProcessSpec s{Affine{std::move(f), std::move(m), bound}, law, k, Vector::Zero(static_cast<Eigen::Index>(k))};
    s.validate();
    return s;
  }
  static ProcessSpec infinite_memory(std::size_t k, std::function<Vector(const std::deque<Vector>&, const Vector&)> f,
                                     std::vector<double> weights, std::size_t truncation = 512,
                                     InnovationLaw law = InnovationLaw::gaussian()) {
    ProcessSpec s{InfiniteMemory{std::move(f), std::move(weights), truncation}, law, k,
                  Vector::Zero(static_cast<Eigen::Index>(k))};
    s.validate();
    return s;
  }
  /// Scalar chain X_t = sum_i a_i tanh(X_{t-i}) + xi_t.
  static ProcessSpec tanh_memory(std::vector<double> weights, std::size_t truncation = 512,
                                 InnovationLaw law = InnovationLaw::gaussian()) {
    auto w = weights;
    auto f = [w](const std::deque<Vector>& past, const Vector& xi) {
      double s = xi(0);
      const std::size_t lags = std::min(w.size(), past.size());
      for (std::size_t i = 0; i < lags; ++i) s += w[i] * std::tanh(past[i](0));
      return Vector(Vector::Constant(1, s));
    };
    return infinite_memory(1, f, std::move(weights), truncation, law);
  }
  static ProcessSpec ar_infinity(std::vector<double> a, std::size_t truncation = 512,
                                 InnovationLaw law = InnovationLaw::gaussian()) {
    ProcessSpec s{ArInfinity{std::move(a), truncation}, law, 1, Vector::Zero(1)};
    s.validate();
    return s;
  }
  static ProcessSpec finite_chain(Matrix transition) {
    ProcessSpec s{FiniteChain{std::move(transition)}, InnovationLaw::uniform(), 1, Vector::Zero(1)};
    s.validate();
    return s;
  }

  /// Number of scalar innovations consumed per step.
  std::size_t noise_dim() const {
    if (const auto* m = std::get_if<Arma>(&model)) return static_cast<std::size_t>(m->b.cols());
    if (std::holds_alternative<ArInfinity>(model) || std::holds_alternative<FiniteChain>(model)) return 1;
    return dim;
  }

  std::string variant_name() const {
    static const char* names[] = {"arma", "affine", "infinite_memory", "ar_infinity", "finite_chain"};
    return names[model.index()];
  }

  void validate() const {
    require(dim >= 1, "process: state dimension must be >= 1");
    require(center.size() == static_cast<Eigen::Index>(dim), "process: center has wrong dimension");
    auto check_weights = [](const std::vector<double>& a, const char* what) {
      double sum = 0.0, log_moment = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        require(std::isfinite(a[i]), std::string(what) + ": weights must be finite");
        sum += std::abs(a[i]);
        const double lag = static_cast<double>(i + 1);
        log_moment += lag * std::log(lag) * std::abs(a[i]);
      }
      require(sum < 1.0, std::string(what) + ": weights must sum to less than 1");
      require(std::isfinite(log_moment), std::string(what) + ": sum i log(i) a_i must be finite");
    };
    if (const auto* m = std::get_if<Arma>(&model)) {
      require(m->a.rows() == m->a.cols() && m->a.rows() == static_cast<Eigen::Index>(dim), "arma: A must be k x k");
      require(m->b.rows() == m->a.rows() && m->b.cols() >= 1, "arma: B must have k rows");
      require(m->a.allFinite() && m->b.allFinite(), "arma: non-finite coefficients");
    } else if (const auto* f = std::get_if<Affine>(&model)) {
      require(static_cast<bool>(f->drift) && static_cast<bool>(f->volatility), "affine: drift and volatility required");
      require(f->volatility_bound > 0.0 && std::isfinite(f->volatility_bound), "affine: volatility bound must be positive");
    } else if (const auto* im = std::get_if<InfiniteMemory>(&model)) {
      require(static_cast<bool>(im->update), "infinite_memory: update function required");
      require(im->truncation >= 1, "infinite_memory: truncation must be >= 1");
      for (double w : im->weights) require(w >= 0.0, "infinite_memory: weights must be nonnegative");
      check_weights(im->weights, "infinite_memory");
    } else if (const auto* ar = std::get_if<ArInfinity>(&model)) {
      require(dim == 1, "ar_infinity: scalar process");
      require(ar->truncation >= 1, "ar_infinity: truncation must be >= 1");
      check_weights(ar->coefficients, "ar_infinity");
    } else if (const auto* fc = std::get_if<FiniteChain>(&model)) {
      require(dim == 1, "finite_chain: scalar state");
      const Matrix& t = fc->transition;
      require(t.rows() == t.cols() && t.rows() >= 1, "finite_chain: transition must be square");
      for (Eigen::Index r = 0; r < t.rows(); ++r) {
        require((t.row(r).array() >= 0.0).all(), "finite_chain: negative transition probability");
        require(std::abs(t.row(r).sum() - 1.0) <= 1e-12, "finite_chain: rows must sum to 1");
      }
    }
  }
};

/// Mass of the lag weights cut off by the truncation horizon.
inline double truncation_tail(const ProcessSpec& spec) {
  auto tail = [](const std::vector<double>& a, std::size_t h) {
    double s = 0.0;
    for (std::size_t i = h; i < a.size(); ++i) s += std::abs(a[i]);
    return s;
  };
  if (const auto* im = std::get_if<InfiniteMemory>(&spec.model)) return tail(im->weights, im->truncation);
  if (const auto* ar = std::get_if<ArInfinity>(&spec.model)) return tail(ar->coefficients, ar->truncation);
  return 0.0;
}

// ---------------------------------------------------------------------------
// Simulation.

using Path = std::vector<Vector>;

namespace detail {

inline Matrix draw_innovations(const ProcessSpec& spec, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const auto m = static_cast<Eigen::Index>(spec.noise_dim());
  Matrix xi(static_cast<Eigen::Index>(n), m);
  for (Eigen::Index t = 0; t < xi.rows(); ++t)
    for (Eigen::Index j = 0; j < m; ++j) xi(t, j) = spec.innovation.sample(rng);
  return xi;
}

inline void check_state(const Vector& x, std::size_t step) {
  if (!x.allFinite()) throw NumericError("simulate: non-finite state at step " + std::to_string(step));
}

inline Path run(const ProcessSpec& spec, const Vector& x0, const Matrix& xi) {
  require(x0.size() == static_cast<Eigen::Index>(spec.dim), "simulate: initial state has wrong dimension");
  const auto n = static_cast<std::size_t>(xi.rows());
  Path path;
  path.reserve(n);
  if (const auto* m = std::get_if<Arma>(&spec.model)) {
    Vector x = x0;
    for (std::size_t t = 0; t < n; ++t) {
      x = m->a * x + m->b * xi.row(static_cast<Eigen::Index>(t)).transpose();
      check_state(x, t + 1);
      path.push_back(x);
    }
  } else if (const auto* f = std::get_if<Affine>(&spec.model)) {
    Vector x = x0;
    for (std::size_t t = 0; t < n; ++t) {
      x = f->drift(x) + f->volatility(x) * xi.row(static_cast<Eigen::Index>(t)).transpose();
      check_state(x, t + 1);
      path.push_back(x);
    }
  } else if (const auto* im = std::get_if<InfiniteMemory>(&spec.model)) {
    std::deque<Vector> past(im->truncation, Vector::Zero(static_cast<Eigen::Index>(spec.dim)));
    past.front() = x0;
    for (std::size_t t = 0; t < n; ++t) {
      Vector x = im->update(past, xi.row(static_cast<Eigen::Index>(t)).transpose());
      check_state(x, t + 1);
      past.push_front(x);
      past.pop_back();
      path.push_back(std::move(x));
    }
  } else if (const auto* ar = std::get_if<ArInfinity>(&spec.model)) {
    const std::size_t lags = std::max<std::size_t>(1, std::min(ar->coefficients.size(), ar->truncation));
    std::deque<double> past(lags, 0.0);
    past.front() = x0(0);
    for (std::size_t t = 0; t < n; ++t) {
      double s = 0.0;
      for (std::size_t i = 0; i < std::min(lags, ar->coefficients.size()); ++i) s += ar->coefficients[i] * past[i];
      s += xi(static_cast<Eigen::Index>(t), 0);
      Vector x = Vector::Constant(1, s);
      check_state(x, t + 1);
      past.push_front(s);
      past.pop_back();
      path.push_back(std::move(x));
    }
  } else if (const auto* fc = std::get_if<FiniteChain>(&spec.model)) {
    const Matrix& tr = fc->transition;
    auto state = static_cast<Eigen::Index>(x0(0));
    require(x0(0) == static_cast<double>(state) && state >= 0 && state < tr.rows(),
            "finite_chain: initial state must be a state index");
    for (std::size_t t = 0; t < n; ++t) {
      const double u = 0.5 * (xi(static_cast<Eigen::Index>(t), 0) + 1.0);
      double cdf = 0.0;
      Eigen::Index next = tr.cols() - 1;
      for (Eigen::Index j = 0; j < tr.cols(); ++j) {
        cdf += tr(state, j);
        if (u < cdf) {
          next = j;
          break;
        }
      }
      state = next;
      path.push_back(Vector::Constant(1, static_cast<double>(state)));
    }
  }
  return path;
}

}  // namespace detail

/// Path (X_1, ..., X_n) started from X_0 = x0.
inline Path simulate(const ProcessSpec& spec, std::size_t n, const Vector& x0, std::uint64_t seed) {
  spec.validate();
  return detail::run(spec, x0, detail::draw_innovations(spec, n, seed));
}

struct CoupledPath {
  Path first, second;
  std::vector<double> distances;  // d(X_t, X'_t), t = 1..n
};

inline double state_distance(const Vector& x, const Vector& y, PathMetric metric) {
  if (metric == PathMetric::Hamming) return x == y ? 0.0 : 1.0;
  return (x - y).norm();
}

/// Two paths from x and x' driven by one innovation stream.
inline CoupledPath coupled_pair(const ProcessSpec& spec, const Vector& x, const Vector& x_prime, std::size_t n,
                                std::uint64_t seed, PathMetric metric = PathMetric::Euclidean) {
  spec.validate();
  const Matrix xi = detail::draw_innovations(spec, n, seed);
  CoupledPath out{detail::run(spec, x, xi), detail::run(spec, x_prime, xi), {}};
  out.distances.reserve(n);
  if (const auto* m = std::get_if<Arma>(&spec.model); m && metric == PathMetric::Euclidean) {
    // The shared noise cancels: X_t - X'_t = A^t (x - x'). Propagating the
    // difference avoids cancellation error from subtracting the two paths.
    Vector delta = x - x_prime;
    for (std::size_t t = 0; t < n; ++t) {
      delta = m->a * delta;
      out.distances.push_back(delta.norm());
    }
    return out;
  }
  for (std::size_t t = 0; t < n; ++t) out.distances.push_back(state_distance(out.first[t], out.second[t], metric));
  return out;
}

// ---------------------------------------------------------------------------
// Coupling coefficients along the shared-innovation coupling.

using PairSampler = std::function<std::vector<std::pair<Vector, Vector>>(const ProcessSpec&)>;

/// Pairs center +- (r/2) e_j over coordinate directions e_j and radii r.
inline PairSampler sphere_pairs(std::vector<double> radii = {0.1, 1.0, 10.0}) {
  return [radii](const ProcessSpec& spec) {
    std::vector<std::pair<Vector, Vector>> pairs;
    for (double r : radii) {
      for (std::size_t j = 0; j < spec.dim; ++j) {
        Vector e = Vector::Zero(static_cast<Eigen::Index>(spec.dim));
        e(static_cast<Eigen::Index>(j)) = 0.5 * r;
        pairs.emplace_back(spec.center + e, spec.center - e);
      }
    }
    return pairs;
  };
}

/// All ordered pairs of distinct states of a finite chain.
inline PairSampler state_pairs() {
  return [](const ProcessSpec& spec) {
    const auto* fc = std::get_if<FiniteChain>(&spec.model);
    require(fc != nullptr, "state_pairs: finite chains only");
    std::vector<std::pair<Vector, Vector>> pairs;
    for (Eigen::Index a = 0; a < fc->transition.rows(); ++a)
      for (Eigen::Index b = 0; b < fc->transition.rows(); ++b)
        if (a != b) pairs.emplace_back(Vector::Constant(1, double(a)), Vector::Constant(1, double(b)));
    return pairs;
  };
}

struct GammaEstimate {
  std::vector<double> gamma;  // gamma_{k,0}(p), k = 1..horizon
  std::vector<double> se;     // bootstrap standard errors
  double s = 0.0;             // sum_k gamma_{k,0}(p)
  std::size_t pairs = 0;
  std::size_t replicates = 0;
};

struct GammaEstimateOptions {
  PathMetric metric = PathMetric::Euclidean;
  PairSampler sampler;  // empty: state_pairs for finite chains, sphere_pairs otherwise
  std::size_t bootstrap = 200;
  unsigned workers = 1;
};

/// gamma_{k,0}(p) = max over sampled pairs of (mean d^p(X_k, X'_k))^(1/p) / d'(x, x'),
/// with d' = d on initial states. Standard errors bootstrap the replicates of
/// the maximizing pair.
inline GammaEstimate estimate_gamma(const ProcessSpec& spec, double p, std::size_t horizon, std::size_t replicates,
                                    std::uint64_t seed, const GammaEstimateOptions& options = {}) {
  spec.validate();
  require(p >= 1.0, "estimate_gamma: p must be >= 1");
  require(horizon >= 1, "estimate_gamma: horizon must be >= 1");
  require(replicates >= 1000, "estimate_gamma: at least 1000 replicates required");
  PairSampler sampler = options.sampler;
  if (!sampler) sampler = std::holds_alternative<FiniteChain>(spec.model) ? state_pairs() : sphere_pairs();
  std::vector<std::pair<Vector, Vector>> pairs;
  for (auto& pr : sampler(spec))
    if (state_distance(pr.first, pr.second, options.metric) > 0.0) pairs.push_back(std::move(pr));
  require(!pairs.empty(), "estimate_gamma: every sampled pair is degenerate");

  const auto h = static_cast<Eigen::Index>(horizon);
  // powered[pair] is replicates x horizon of d^p(X_k, X'_k) / d'(x, x')^p.
  std::vector<Matrix> powered(pairs.size(), Matrix(static_cast<Eigen::Index>(replicates), h));
  parallel_for(replicates, options.workers, [&](std::size_t r) {
    for (std::size_t q = 0; q < pairs.size(); ++q) {
      const auto c = coupled_pair(spec, pairs[q].first, pairs[q].second, horizon, derive_seed(seed, r), options.metric);
      const double sep = state_distance(pairs[q].first, pairs[q].second, options.metric);
      for (Eigen::Index k = 0; k < h; ++k)
        powered[q](static_cast<Eigen::Index>(r), k) = std::pow(c.distances[static_cast<std::size_t>(k)] / sep, p);
    }
  });

  GammaEstimate out;
  out.pairs = pairs.size();
  out.replicates = replicates;
  out.gamma.assign(horizon, 0.0);
  out.se.assign(horizon, 0.0);
  std::vector<std::size_t> argmax(horizon, 0);
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    const Vector mean = powered[q].colwise().mean().transpose();
    for (std::size_t k = 0; k < horizon; ++k) {
      const double g = std::pow(mean(static_cast<Eigen::Index>(k)), 1.0 / p);
      if (g > out.gamma[k]) {
        out.gamma[k] = g;
        argmax[k] = q;
      }
    }
  }
  if (options.bootstrap > 1) {
    Rng rng(derive_seed(seed, 0xB007u));
    std::uniform_int_distribution<std::size_t> pick(0, replicates - 1);
    std::vector<std::vector<double>> draws(horizon);
    std::vector<std::size_t> idx(replicates);
    for (std::size_t b = 0; b < options.bootstrap; ++b) {
      for (auto& i : idx) i = pick(rng);
      for (std::size_t k = 0; k < horizon; ++k) {
        const Matrix& m = powered[argmax[k]];
        double s = 0.0;
        for (std::size_t i : idx) s += m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
        draws[k].push_back(std::pow(s / static_cast<double>(replicates), 1.0 / p));
      }
    }
    for (std::size_t k = 0; k < horizon; ++k) {
      const double mu = std::accumulate(draws[k].begin(), draws[k].end(), 0.0) / static_cast<double>(draws[k].size());
      double v = 0.0;
      for (double d : draws[k]) v += (d - mu) * (d - mu);
      out.se[k] = std::sqrt(v / static_cast<double>(draws[k].size() - 1));
    }
  }
  out.s = std::accumulate(out.gamma.begin(), out.gamma.end(), 0.0);
  return out;
}

/// Least-squares slope of log gamma_k against k over [first, last] (1-based),
/// returned as the geometric rate exp(slope).
inline double fitted_decay_rate(const std::vector<double>& gamma, std::size_t first, std::size_t last) {
  require(first >= 1 && first < last && last <= gamma.size(), "fitted_decay_rate: bad range");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  double count = 0.0;
  for (std::size_t k = first; k <= last; ++k) {
    require(gamma[k - 1] > 0.0, "fitted_decay_rate: nonpositive coefficient");
    const double x = static_cast<double>(k), y = std::log(gamma[k - 1]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    count += 1.0;
  }
  return std::exp((count * sxy - sx * sy) / (count * sxx - sx * sx));
}

// ---------------------------------------------------------------------------
// Closed forms.

inline double spectral_radius(const Matrix& a) {
  require(a.rows() == a.cols() && a.rows() > 0, "spectral_radius: matrix must be square");
  Eigen::EigenSolver<Matrix> solver(a, false);
  require(solver.info() == Eigen::Success, "spectral_radius: eigenvalue iteration failed");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

/// gamma_{1,0} * min_{1<=p<=t} (a^(t/p) + sum_{j>=p} a_j) for t = 1..horizon,
/// with a = sum_j a_j.
inline std::vector<double> infinite_memory_gamma_bound(const std::vector<double>& weights, double gamma_10,
                                                       std::size_t horizon) {
  double a = 0.0;
  for (double w : weights) {
    require(w >= 0.0 && std::isfinite(w), "infinite_memory_gamma_bound: weights must be nonnegative");
    a += w;
  }
  require(a < 1.0, "infinite_memory_gamma_bound: weights must sum to less than 1");
  require(gamma_10 >= 0.0, "infinite_memory_gamma_bound: gamma_{1,0} must be nonnegative");
  // tail[p] = sum_{j >= p} a_j with 1-based j.
  std::vector<double> tail(weights.size() + 2, 0.0);
  for (std::size_t j = weights.size(); j >= 1; --j) tail[j] = tail[j + 1] + weights[j - 1];
  std::vector<double> out(horizon);
  for (std::size_t t = 1; t <= horizon; ++t) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t p = 1; p <= t; ++p) {
      const double rest = p < tail.size() ? tail[p] : 0.0;
      best = std::min(best, std::pow(a, static_cast<double>(t) / static_cast<double>(p)) + rest);
    }
    out[t - 1] = gamma_10 * best;
  }
  return out;
}

/// Renewal bound g_t = sum_{j=1}^t a_j g_{t-j}, g_0 = 1, for the coupled
/// distance of a chain whose update is Lipschitz with lag weights a_j.
/// Returns g_1..g_horizon (per unit of initial separation).
inline std::vector<double> infinite_memory_renewal_bound(const std::vector<double>& weights, std::size_t horizon) {
  for (double w : weights) require(w >= 0.0 && std::isfinite(w), "infinite_memory_renewal_bound: weights must be nonnegative");
  std::vector<double> g(horizon + 1, 0.0);
  g[0] = 1.0;
  for (std::size_t t = 1; t <= horizon; ++t)
    for (std::size_t j = 1; j <= std::min(t, weights.size()); ++j) g[t] += weights[j - 1] * g[t - j];
  return {g.begin() + 1, g.end()};
}

}  // namespace wtineq
