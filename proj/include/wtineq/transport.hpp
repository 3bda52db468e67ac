#pragma once

// Classical and weak transport costs between measures on E^n.
//
// The weak cost is
//
//   W~_{p,d}(P,Q) = sup_alpha inf_pi sum_j pi[alpha_j(Y) d(X_j,Y_j)] / (sum_j Q[alpha_j^q])^(1/q).
//
// Writing g_j(y) = sum_x pi(x,y) d(x_j,y_j) and Phi(pi)_{j,y} = g_j(y) Q(y)^(1/p-1),
// the inner ratio is <alpha Q^(1-1/p), Phi(pi)> / |alpha Q^(1-1/p)|_q, so by
// minimax W~_{p,d}(P,Q) = min_pi |Phi(pi)|_p. Phi is linear and the coupling
// set is a polytope (also with the Markov restriction), hence for p = 2 the
// cost is the minimum norm of a polytope whose linear minimization oracle is
// the fixed-alpha cost. Both bounds come out of one run of Wolfe's algorithm.

#include "wtineq/lp.hpp"
#include "wtineq/measures.hpp"
#include "wtineq/min_norm.hpp"
#include "wtineq/report.hpp"

namespace wtineq {

inline constexpr double kMarginTolerance = 1e-9;

/// Joint law of (X, Y) with X on the first and Y on the second measure's space.
struct Coupling {
  SpacePtr space;
  Matrix joint;

  std::vector<double> first_marginal() const {
    std::vector<double> out(static_cast<std::size_t>(joint.rows()));
    for (Eigen::Index i = 0; i < joint.rows(); ++i) out[static_cast<std::size_t>(i)] = joint.row(i).sum();
    return out;
  }
  std::vector<double> second_marginal() const {
    std::vector<double> out(static_cast<std::size_t>(joint.cols()));
    for (Eigen::Index j = 0; j < joint.cols(); ++j) out[static_cast<std::size_t>(j)] = joint.col(j).sum();
    return out;
  }
  /// Largest deviation of the margins from (P, Q).
  double margin_error(const DiscreteMeasure& p, const DiscreteMeasure& q) const {
    const auto a = first_marginal();
    const auto b = second_marginal();
    double err = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, std::abs(a[i] - p[i]));
    for (std::size_t j = 0; j < b.size(); ++j) err = std::max(err, std::abs(b[j] - q[j]));
    return err;
  }
};

/// Markov (sequential) form of a coupling on E^n x E^n:
/// steps[j][xh * k^j + yh] is the law of (X_{j+1}, Y_{j+1}) given the
/// histories (xh, yh) of length j. Zero-probability history pairs carry a
/// zero matrix.
struct MarkovCoupling {
  SpacePtr base;
  std::size_t horizon = 1;
  std::vector<std::vector<Matrix>> steps;

  Matrix joint() const {
    const std::size_t k = base->size();
    std::size_t m = 1;
    for (std::size_t j = 0; j < horizon; ++j) m *= k;
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    const auto space = DiscreteSpace::power(base, horizon);
    for (std::size_t x = 0; x < m; ++x) {
      const auto xs = space->decode(x);
      for (std::size_t y = 0; y < m; ++y) {
        const auto ys = space->decode(y);
        double prob = 1.0;
        std::size_t xh = 0, yh = 0, width = 1;
        for (std::size_t j = 0; j < horizon && prob > 0.0; ++j) {
          const Matrix& c = steps[j][xh * width + yh];
          prob *= c(static_cast<Eigen::Index>(xs[j]), static_cast<Eigen::Index>(ys[j]));
          xh = xh * k + xs[j];
          yh = yh * k + ys[j];
          width *= k;
        }
        out(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = prob;
      }
    }
    return out;
  }
};

namespace detail {

inline std::size_t ipow(std::size_t base, std::size_t e) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < e; ++i) r *= base;
  return r;
}

// Mass of each pair of length-j prefixes: out(xh, yh).
inline Matrix prefix_pair_mass(const Matrix& joint, std::size_t k, std::size_t n, std::size_t j) {
  const std::size_t width = ipow(k, j);
  const std::size_t block = ipow(k, n - j);
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(width));
  for (Eigen::Index x = 0; x < joint.rows(); ++x) {
    for (Eigen::Index y = 0; y < joint.cols(); ++y) {
      out(static_cast<Eigen::Index>(static_cast<std::size_t>(x) / block),
          static_cast<Eigen::Index>(static_cast<std::size_t>(y) / block)) += joint(x, y);
    }
  }
  return out;
}

// Mass of each length-j prefix of a measure on E^n.
inline std::vector<double> prefix_masses(const DiscreteMeasure& m, std::size_t j) {
  const auto& s = m.space();
  const std::size_t k = s.base().size();
  const std::size_t block = ipow(k, s.length() - j);
  std::vector<double> out(ipow(k, j), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) out[i / block] += m[i];
  return out;
}

// Law of coordinate j (0-based) given each length-j prefix; rows indexed by prefix.
inline Matrix next_coordinate_laws(const DiscreteMeasure& m, std::size_t j) {
  const auto& s = m.space();
  const std::size_t k = s.base().size();
  const std::size_t block = ipow(k, s.length() - j - 1);
  const std::size_t width = ipow(k, j);
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < m.size(); ++i) {
    const std::size_t ext = i / block;  // prefix of length j+1
    out(static_cast<Eigen::Index>(ext / k), static_cast<Eigen::Index>(ext % k)) += m[i];
  }
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double total = out.row(r).sum();
    if (total > 0.0) out.row(r) /= total;
  }
  return out;
}

inline void require_same_space(const DiscreteMeasure& p, const DiscreteMeasure& q, const char* op) {
  require(p.space().same_as(q.space()), std::string(op) + ": measures live on different spaces");
}

inline std::vector<double> row_vector(const Matrix& m, Eigen::Index r) {
  std::vector<double> out(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) out[static_cast<std::size_t>(c)] = m(r, c);
  return out;
}

}  // namespace detail

/// Sequential factorization of a coupling of two measures on E^n.
inline MarkovCoupling markov_factorization(const Coupling& c) {
  const auto& s = *c.space;
  const std::size_t k = s.base().size();
  const std::size_t n = s.length();
  MarkovCoupling out;
  out.base = s.is_product() ? s.base_ptr() : c.space;
  out.horizon = n;
  for (std::size_t j = 0; j < n; ++j) {
    const Matrix mass = detail::prefix_pair_mass(c.joint, k, n, j);
    const Matrix next = detail::prefix_pair_mass(c.joint, k, n, j + 1);
    const std::size_t width = detail::ipow(k, j);
    std::vector<Matrix> step(width * width, Matrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)));
    for (std::size_t xh = 0; xh < width; ++xh) {
      for (std::size_t yh = 0; yh < width; ++yh) {
        const double w = mass(static_cast<Eigen::Index>(xh), static_cast<Eigen::Index>(yh));
        if (w <= 0.0) continue;
        Matrix& cond = step[xh * width + yh];
        for (std::size_t a = 0; a < k; ++a) {
          for (std::size_t b = 0; b < k; ++b) {
            cond(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                next(static_cast<Eigen::Index>(xh * k + a), static_cast<Eigen::Index>(yh * k + b)) / w;
          }
        }
      }
    }
    out.steps.push_back(std::move(step));
  }
  return out;
}

/// True when every conditional step of `c` couples the one-step conditional
/// laws of P and Q given the respective histories (within `tol`).
inline bool is_markov_coupling(const Coupling& c, const DiscreteMeasure& p, const DiscreteMeasure& q,
                               double tol = kMarginTolerance) {
  if (c.margin_error(p, q) > tol) return false;
  const auto& s = p.space();
  const std::size_t k = s.base().size();
  const std::size_t n = s.length();
  const auto factors = markov_factorization(c);
  for (std::size_t j = 0; j < n; ++j) {
    const Matrix plaw = detail::next_coordinate_laws(p, j);
    const Matrix qlaw = detail::next_coordinate_laws(q, j);
    const Matrix mass = detail::prefix_pair_mass(c.joint, k, n, j);
    const std::size_t width = detail::ipow(k, j);
    for (std::size_t xh = 0; xh < width; ++xh) {
      for (std::size_t yh = 0; yh < width; ++yh) {
        if (mass(static_cast<Eigen::Index>(xh), static_cast<Eigen::Index>(yh)) <= tol) continue;
        const Matrix& cond = factors.steps[j][xh * width + yh];
        for (std::size_t a = 0; a < k; ++a) {
          if (std::abs(cond.row(static_cast<Eigen::Index>(a)).sum() -
                       plaw(static_cast<Eigen::Index>(xh), static_cast<Eigen::Index>(a))) > tol)
            return false;
          if (std::abs(cond.col(static_cast<Eigen::Index>(a)).sum() -
                       qlaw(static_cast<Eigen::Index>(yh), static_cast<Eigen::Index>(a))) > tol)
            return false;
        }
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Classical Wasserstein cost.

struct WassersteinResult {
  double value = 0.0;
  Coupling coupling;
};

/// W_p between weight vectors for a given distance matrix.
inline double wasserstein(std::span<const double> p, std::span<const double> q, const Matrix& distance,
                          double exponent) {
  require(exponent >= 1.0, "wasserstein: p must be >= 1");
  const Matrix cost = distance.array().pow(exponent).matrix();
  const auto plan = solve_transport(p, q, cost);
  return std::pow(std::max(plan.cost, 0.0), 1.0 / exponent);
}

/// W_{p,d}(P,Q) with d_p the l^p-combined metric on E^n.
inline WassersteinResult wasserstein(const DiscreteMeasure& p, const DiscreteMeasure& q, double exponent,
                                     const MetricSpec& metric) {
  detail::require_same_space(p, q, "wasserstein");
  require(exponent >= 1.0 && exponent <= 2.0, "wasserstein: p must lie in [1, 2]");
  const Matrix cost = path_distances(p.space(), metric, exponent).array().pow(exponent).matrix();
  const auto plan = solve_transport(p.weights(), q.weights(), cost);
  return {std::pow(std::max(plan.cost, 0.0), 1.0 / exponent), Coupling{p.space_ptr(), plan.plan}};
}

// ---------------------------------------------------------------------------
// Fixed-alpha weak cost.

/// alpha_j(y) for coordinates j (rows) and points y of the second measure's
/// space (columns).
struct AlphaWeights {
  Matrix values;

  static AlphaWeights constant(std::size_t n, std::size_t points, double v) {
    return {Matrix::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(points), v)};
  }
};

/// (sum_j Q[alpha_j^q])^(1/q); q = infinity gives the max over the support of Q.
inline double alpha_norm(const Matrix& alpha, const DiscreteMeasure& q, double exponent_q) {
  if (std::isinf(exponent_q)) {
    double m = 0.0;
    for (Eigen::Index y = 0; y < alpha.cols(); ++y) {
      if (q[static_cast<std::size_t>(y)] > 0.0) m = std::max(m, alpha.col(y).maxCoeff());
    }
    return m;
  }
  double s = 0.0;
  for (Eigen::Index j = 0; j < alpha.rows(); ++j) {
    for (Eigen::Index y = 0; y < alpha.cols(); ++y) {
      const double w = q[static_cast<std::size_t>(y)];
      if (w > 0.0) s += w * std::pow(alpha(j, y), exponent_q);
    }
  }
  return std::pow(s, 1.0 / exponent_q);
}

inline double conjugate_exponent(double p) {
  require(p >= 1.0, "exponent must be >= 1");
  return p == 1.0 ? std::numeric_limits<double>::infinity() : p / (p - 1.0);
}

struct WeakCostResult {
  double value = 0.0;
  Coupling coupling;
};

namespace detail {

// c(x, y) = sum_j alpha_j(y) d(x_j, y_j) on E^n x E^n.
inline Matrix weighted_cost(const DiscreteSpace& space, const Matrix& d, const Matrix& alpha) {
  const std::size_t m = space.size();
  const std::size_t n = space.length();
  std::vector<std::vector<std::size_t>> coords(m);
  for (std::size_t i = 0; i < m; ++i) coords[i] = space.decode(i);
  Matrix c(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t y = 0; y < m; ++y) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double a = alpha(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(y));
        if (a != 0.0) s += a * d(static_cast<Eigen::Index>(coords[x][j]), static_cast<Eigen::Index>(coords[y][j]));
      }
      c(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = s;
    }
  }
  return c;
}

// Backward induction over pairs of histories: h_n = cost, and
// h_j(xh, yh) = min over couplings of the next-step conditionals of the
// expected h_{j+1}. Returns the optimal Markov coupling.
inline WeakCostResult markov_backward_induction(const DiscreteMeasure& p, const DiscreteMeasure& q,
                                                const Matrix& cost) {
  const auto& s = p.space();
  const std::size_t k = s.base().size();
  const std::size_t n = s.length();
  std::vector<Matrix> plaw(n), qlaw(n);
  std::vector<std::vector<double>> pmass(n), qmass(n);
  for (std::size_t j = 0; j < n; ++j) {
    plaw[j] = next_coordinate_laws(p, j);
    qlaw[j] = next_coordinate_laws(q, j);
    pmass[j] = prefix_masses(p, j);
    qmass[j] = prefix_masses(q, j);
  }

  MarkovCoupling factors;
  factors.base = s.is_product() ? s.base_ptr() : p.space_ptr();
  factors.horizon = n;
  factors.steps.resize(n);
  Matrix h = cost;  // h_{j+1} indexed by (x prefix of length j+1, y prefix of length j+1)
  for (std::size_t j = n; j-- > 0;) {
    const std::size_t width = ipow(k, j);
    Matrix next_h = Matrix::Zero(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(width));
    auto& step = factors.steps[j];
    step.assign(width * width, Matrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)));
    Matrix local(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (std::size_t xh = 0; xh < width; ++xh) {
      if (pmass[j][xh] <= 0.0) continue;
      const auto a = row_vector(plaw[j], static_cast<Eigen::Index>(xh));
      for (std::size_t yh = 0; yh < width; ++yh) {
        if (qmass[j][yh] <= 0.0) continue;
        const auto b = row_vector(qlaw[j], static_cast<Eigen::Index>(yh));
        for (std::size_t u = 0; u < k; ++u)
          for (std::size_t v = 0; v < k; ++v)
            local(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) =
                h(static_cast<Eigen::Index>(xh * k + u), static_cast<Eigen::Index>(yh * k + v));
        const auto plan = solve_transport(a, b, local);
        next_h(static_cast<Eigen::Index>(xh), static_cast<Eigen::Index>(yh)) = plan.cost;
        step[xh * width + yh] = plan.plan;
      }
    }
    h = std::move(next_h);
  }
  WeakCostResult out;
  out.coupling = Coupling{p.space_ptr(), factors.joint()};
  out.value = (out.coupling.joint.array() * cost.array()).sum();
  return out;
}

}  // namespace detail

/// W~_{alpha,d}(P,Q) = inf_pi sum_j pi[alpha_j(Y) d(X_j, Y_j)]. With `markov`
/// the infimum runs over Markov couplings and is solved exactly by backward
/// induction; otherwise over all couplings of the joint laws (one LP).
inline WeakCostResult weak_cost_fixed_alpha(const DiscreteMeasure& p, const DiscreteMeasure& q,
                                            const AlphaWeights& alpha, const MetricSpec& metric,
                                            bool markov = true) {
  detail::require_same_space(p, q, "weak_cost_fixed_alpha");
  const auto& s = p.space();
  require(alpha.values.rows() == static_cast<Eigen::Index>(s.length()) &&
              alpha.values.cols() == static_cast<Eigen::Index>(s.size()),
          "weak_cost_fixed_alpha: alpha must have one row per coordinate and one column per point");
  for (Eigen::Index i = 0; i < alpha.values.size(); ++i) {
    const double a = alpha.values.data()[i];
    require(std::isfinite(a) && a >= 0.0, "weak_cost_fixed_alpha: alpha must be finite and nonnegative");
  }
  const Matrix d = coordinate_distances(s, metric);
  const Matrix cost = detail::weighted_cost(s, d, alpha.values);
  if (!markov || s.length() == 1) {
    const auto plan = solve_transport(p.weights(), q.weights(), cost);
    return {plan.cost, Coupling{p.space_ptr(), plan.plan}};
  }
  return detail::markov_backward_induction(p, q, cost);
}

// ---------------------------------------------------------------------------
// Full weak transport cost with a certificate.

struct WeakTransportOptions {
  bool markov = true;
  double gap_tolerance = 1e-4;     // a wider certified interval is flagged as not converged
  double solver_tolerance = 1e-10; // target of the inner min-norm iteration
  std::size_t max_iterations = 2000;
};

struct CertifiedValue {
  double lower = 0.0;
  double upper = 0.0;
  Matrix alpha;        // witness of `lower`, normalized to unit q-norm under Q
  Coupling coupling;   // witness of `upper`
  std::size_t iterations = 0;
  bool converged = false;

  double gap() const { return upper - lower; }
};

namespace detail {

// Phi(pi)_{j,y} = g_j(y) Q(y)^(1/p - 1), stacked as j * m + y.
inline Vector weak_feature(const DiscreteSpace& s, const Matrix& d, const Matrix& joint, const DiscreteMeasure& q,
                           double p) {
  const std::size_t m = s.size();
  const std::size_t n = s.length();
  Vector phi = Vector::Zero(static_cast<Eigen::Index>(n * m));
  std::vector<std::vector<std::size_t>> coords(m);
  for (std::size_t i = 0; i < m; ++i) coords[i] = s.decode(i);
  for (std::size_t y = 0; y < m; ++y) {
    const double qy = q[y];
    if (qy <= 0.0) continue;
    const double scale = std::pow(qy, 1.0 / p - 1.0);
    for (std::size_t x = 0; x < m; ++x) {
      const double w = joint(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
      if (w == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        phi(static_cast<Eigen::Index>(j * m + y)) +=
            w * d(static_cast<Eigen::Index>(coords[x][j]), static_cast<Eigen::Index>(coords[y][j])) * scale;
      }
    }
  }
  return phi;
}

// alpha_j(y) = w_{j,y} Q(y)^(1/p - 1), zero off the support of Q.
inline Matrix alpha_from_dual(const Vector& w, const DiscreteMeasure& q, std::size_t n, double p) {
  const std::size_t m = q.size();
  Matrix alpha = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t y = 0; y < m; ++y) {
      if (q[y] <= 0.0) continue;
      alpha(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(y)) =
          std::max(0.0, w(static_cast<Eigen::Index>(j * m + y))) * std::pow(q[y], 1.0 / p - 1.0);
    }
  }
  return alpha;
}

inline double lp_norm(const Vector& v, double p) {
  if (p == 2.0) return v.norm();
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::pow(std::abs(v(i)), p);
  return std::pow(s, 1.0 / p);
}

}  // namespace detail

/// sum_j Q[(E_pi[d(X_j, y_j) | Y = y])^p]^(1/p): the primal objective of the
/// weak cost at a given coupling, an upper bound on W~_{p,d}(P,Q).
inline double weak_cost_upper(const Coupling& c, const DiscreteMeasure& q, double p, const MetricSpec& metric) {
  const Matrix d = coordinate_distances(q.space(), metric);
  return detail::lp_norm(detail::weak_feature(q.space(), d, c.joint, q, p), p);
}

/// W~_{alpha,d}(P,Q) / (sum_j Q[alpha_j^q])^(1/q): the dual objective at a
/// given alpha, a lower bound on W~_{p,d}(P,Q).
inline double weak_cost_lower(const DiscreteMeasure& p, const DiscreteMeasure& q, const Matrix& alpha,
                              double exponent, const MetricSpec& metric, bool markov = true) {
  const double norm = alpha_norm(alpha, q, conjugate_exponent(exponent));
  if (norm <= 0.0) return 0.0;
  return weak_cost_fixed_alpha(p, q, {alpha}, metric, markov).value / norm;
}

/// W~_{p,d}(P,Q) for p in [1, 2] as a certified interval [lower, upper].
inline CertifiedValue weak_transport_cost(const DiscreteMeasure& p, const DiscreteMeasure& q, double exponent,
                                          const MetricSpec& metric, const WeakTransportOptions& options = {}) {
  detail::require_same_space(p, q, "weak_transport_cost");
  require(exponent >= 1.0 && exponent <= 2.0, "weak_transport_cost: p must lie in [1, 2]");
  const auto& s = p.space();
  const std::size_t n = s.length();
  const std::size_t m = s.size();
  const Matrix d = coordinate_distances(s, metric);

  CertifiedValue out;
  if (exponent == 1.0) {
    // q = infinity: alpha = 1 is optimal and the cost is W_1 for the summed metric.
    const auto ones = AlphaWeights::constant(n, m, 1.0);
    const auto r = weak_cost_fixed_alpha(p, q, ones, metric, options.markov);
    out.lower = out.upper = r.value;
    out.alpha = ones.values;
    out.coupling = r.coupling;
    out.iterations = 1;
    out.converged = true;
    return out;
  }

  auto lmo = [&](const Vector& w) {
    return weak_cost_fixed_alpha(p, q, {detail::alpha_from_dual(w, q, n, exponent)}, metric, options.markov);
  };
  const auto ones = AlphaWeights::constant(n, m, 1.0);
  const auto first = weak_cost_fixed_alpha(p, q, ones, metric, options.markov);

  Vector dual_direction;
  if (exponent == 2.0) {
    std::vector<Matrix> plans{first.coupling.joint};
    auto oracle = [&](const Vector& x) {
      auto r = lmo(x);
      plans.push_back(r.coupling.joint);
      return std::make_pair(detail::weak_feature(s, d, r.coupling.joint, q, 2.0), plans.size() - 1);
    };
    MinNormOptions mn;
    mn.tolerance = options.solver_tolerance;
    mn.max_iterations = options.max_iterations;
    const auto res = min_norm_point(oracle, {detail::weak_feature(s, d, first.coupling.joint, q, 2.0), 0}, mn);
    Matrix joint = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < res.atoms.size(); ++i) joint += res.weights[i] * plans[res.atoms[i]];
    out.coupling = Coupling{p.space_ptr(), joint};
    out.iterations = res.iterations;
    dual_direction = res.lower_direction;
  } else {
    // Frank-Wolfe with exact line search on F(pi) = |Phi(pi)|_p.
    Matrix joint = first.coupling.joint;
    Vector phi = detail::weak_feature(s, d, joint, q, exponent);
    double best_lower = 0.0;
    dual_direction = phi;
    std::size_t iter = 0;
    for (; iter < options.max_iterations; ++iter) {
      const double f = detail::lp_norm(phi, exponent);
      if (f <= options.solver_tolerance) break;
      Vector w(phi.size());
      for (Eigen::Index i = 0; i < phi.size(); ++i) w(i) = std::pow(phi(i) / f, exponent - 1.0);
      const auto r = lmo(w);
      const Vector phi_v = detail::weak_feature(s, d, r.coupling.joint, q, exponent);
      const double lower = w.dot(phi_v);  // alpha has unit q-norm by construction
      if (lower > best_lower) {
        best_lower = lower;
        dual_direction = phi;
      }
      if (f - best_lower <= options.solver_tolerance) break;
      double lo = 0.0, hi = 1.0;
      const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
      auto value = [&](double t) { return detail::lp_norm(phi + t * (phi_v - phi), exponent); };
      double t1 = hi - golden * (hi - lo), t2 = lo + golden * (hi - lo);
      double f1 = value(t1), f2 = value(t2);
      for (int it = 0; it < 80; ++it) {
        if (f1 <= f2) {
          hi = t2;
          t2 = t1;
          f2 = f1;
          t1 = hi - golden * (hi - lo);
          f1 = value(t1);
        } else {
          lo = t1;
          t1 = t2;
          f1 = f2;
          t2 = lo + golden * (hi - lo);
          f2 = value(t2);
        }
      }
      double t = 0.5 * (lo + hi);
      if (value(1.0) < value(t)) t = 1.0;
      if (value(t) >= f) break;
      joint = (1.0 - t) * joint + t * r.coupling.joint;
      phi = detail::weak_feature(s, d, joint, q, exponent);
    }
    out.coupling = Coupling{p.space_ptr(), joint};
    out.iterations = iter + 1;
  }

  out.upper = weak_cost_upper(out.coupling, q, exponent, metric);
  const double dn = detail::lp_norm(dual_direction, exponent);
  if (out.upper <= options.solver_tolerance || dn <= 0.0) {
    out.alpha = AlphaWeights::constant(n, m, 1.0).values;
    out.alpha /= alpha_norm(out.alpha, q, conjugate_exponent(exponent));
    out.lower = weak_cost_lower(p, q, out.alpha, exponent, metric, options.markov);
  } else {
    Vector w(dual_direction.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = std::pow(std::max(dual_direction(i), 0.0) / dn, exponent - 1.0);
    out.alpha = detail::alpha_from_dual(w, q, n, exponent);
    const double an = alpha_norm(out.alpha, q, conjugate_exponent(exponent));
    if (an > 0.0) out.alpha /= an;
    out.lower = weak_cost_lower(p, q, out.alpha, exponent, metric, options.markov);
  }
  out.converged = out.upper - out.lower <= options.gap_tolerance;
  return out;
}

/// alpha~_j(y) = E[alpha_j(Z) | Y = y] under a coupling of (Q, R); zero where
/// Q vanishes.
inline Matrix conditional_alpha(const Matrix& alpha, const Coupling& yz) {
  Matrix out = Matrix::Zero(alpha.rows(), yz.joint.rows());
  for (Eigen::Index y = 0; y < yz.joint.rows(); ++y) {
    const double qy = yz.joint.row(y).sum();
    if (qy <= 0.0) continue;
    for (Eigen::Index j = 0; j < alpha.rows(); ++j) {
      out(j, y) = yz.joint.row(y).dot(alpha.row(j)) / qy;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gluing.

/// Three-way coupling of (X, Y, Z) on (E^n)^3, stored as weights[(x*m + y)*m + z].
struct GluedCoupling {
  SpacePtr space;
  std::size_t m = 0;
  std::vector<double> weights;

  double operator()(std::size_t x, std::size_t y, std::size_t z) const { return weights[(x * m + y) * m + z]; }

  Matrix margin_xy() const { return margin(0); }
  Matrix margin_yz() const { return margin(1); }
  Matrix margin_xz() const { return margin(2); }

 private:
  Matrix margin(int which) const {
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t x = 0; x < m; ++x)
      for (std::size_t y = 0; y < m; ++y)
        for (std::size_t z = 0; z < m; ++z) {
          const double w = (*this)(x, y, z);
          if (which == 0) out(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) += w;
          if (which == 1) out(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(z)) += w;
          if (which == 2) out(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(z)) += w;
        }
    return out;
  }
};

/// Glues two Markov couplings sharing the middle law Q step by step:
///   pi(x_j, y_j, z_j | past) = pi(x_j | x^(j-1), y^(j)) pi(z_j | y^(j), z^(j-1)) Q(y_j | y^(j-1)).
inline GluedCoupling glue_markov(const Coupling& xy, const Coupling& yz) {
  require(xy.space && yz.space && xy.space->same_as(*yz.space), "glue_markov: couplings live on different spaces");
  const auto& s = *xy.space;
  const std::size_t m = s.size();
  const std::size_t n = s.length();
  const std::size_t k = s.base().size();
  const auto q_left = xy.second_marginal();
  const auto q_right = yz.first_marginal();
  for (std::size_t y = 0; y < m; ++y) {
    require(std::abs(q_left[y] - q_right[y]) <= kMarginTolerance, "glue_markov: middle margins disagree");
  }
  const auto p = DiscreteMeasure::normalized(xy.space, xy.first_marginal());
  const auto q = DiscreteMeasure::normalized(xy.space, q_left);
  const auto r = DiscreteMeasure::normalized(xy.space, yz.second_marginal());
  require(is_markov_coupling(xy, p, q), "glue_markov: first coupling is not a Markov coupling");
  require(is_markov_coupling(yz, q, r), "glue_markov: second coupling is not a Markov coupling");

  const auto fxy = markov_factorization(xy);
  const auto fyz = markov_factorization(yz);
  std::vector<Matrix> qlaw(n);
  for (std::size_t j = 0; j < n; ++j) qlaw[j] = detail::next_coordinate_laws(q, j);

  GluedCoupling out{xy.space, m, std::vector<double>(m * m * m, 0.0)};
  std::vector<std::vector<std::size_t>> coords(m);
  for (std::size_t i = 0; i < m; ++i) coords[i] = s.decode(i);
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t y = 0; y < m; ++y) {
      for (std::size_t z = 0; z < m; ++z) {
        double prob = 1.0;
        std::size_t xh = 0, yh = 0, zh = 0, width = 1;
        for (std::size_t j = 0; j < n && prob > 0.0; ++j) {
          const auto a = static_cast<Eigen::Index>(coords[x][j]);
          const auto b = static_cast<Eigen::Index>(coords[y][j]);
          const auto c = static_cast<Eigen::Index>(coords[z][j]);
          const double qb = qlaw[j](static_cast<Eigen::Index>(yh), b);
          if (qb <= 0.0) {
            prob = 0.0;
            break;
          }
          const double pxy = fxy.steps[j][xh * width + yh](a, b);
          const double pyz = fyz.steps[j][yh * width + zh](b, c);
          prob *= pxy * pyz / qb;
          xh = xh * k + static_cast<std::size_t>(a);
          yh = yh * k + static_cast<std::size_t>(b);
          zh = zh * k + static_cast<std::size_t>(c);
          width *= k;
        }
        out.weights[(x * m + y) * m + z] = prob;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dual forms.

/// f_{alpha,d}(y) = min_x { alpha(y) d(x, y) + f(x) } on a coordinate space.
inline std::vector<double> inf_convolution(std::span<const double> f, std::span<const double> alpha,
                                           const MetricSpec& metric, const DiscreteSpace& space) {
  require(f.size() == space.size() && alpha.size() == space.size(), "inf_convolution: size mismatch");
  const std::size_t k = space.size();
  std::vector<double> out(k);
  for (std::size_t y = 0; y < k; ++y) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < k; ++x) {
      require(std::isfinite(f[x]), "inf_convolution: f must be finite");
      const double dist = metric(space, x, y);
      const double term = (dist == 0.0 ? 0.0 : alpha[y] * dist) + f[x];
      best = std::min(best, term);
    }
    out[y] = best;
  }
  return out;
}

namespace detail {

// (a^q - 1)/q + 1/2, with the q = infinity limit (1/2 if a <= 1, else +inf).
inline double dual_penalty(double a, double p) {
  if (p == 1.0) return a <= 1.0 ? 0.5 : std::numeric_limits<double>::infinity();
  const double q = conjugate_exponent(p);
  return (std::pow(a, q) - 1.0) / q + 0.5;
}

}  // namespace detail

/// Exact evaluation of the exponential dual form on a finite coordinate space.
/// Forward:  P[exp(lambda (f_alpha - P f) - C lambda^2 ((alpha^q - 1)/q + 1/2))] <= 1.
/// Inverted: P[exp(lambda (P f_alpha - f) - C lambda^2 ((P alpha^q - 1)/q + 1/2))] <= 1.
inline ExperimentReport dual_form_check(const DiscreteMeasure& p, double c, double exponent, const MetricSpec& metric,
                                        std::span<const double> f, std::span<const double> alpha, double lambda,
                                        bool inverted) {
  require(lambda > 0.0, "dual_form_check: lambda must be positive");
  require(c > 0.0, "dual_form_check: C must be positive");
  require(!p.space().is_product(), "dual_form_check: expects a coordinate space");
  for (double a : alpha) require(std::isfinite(a) && a >= 0.0, "dual_form_check: alpha must be nonnegative");
  Stopwatch clock;
  const auto& space = p.space();
  const auto falpha = inf_convolution(f, alpha, metric, space);
  const double pf = p.expectation(f);
  std::vector<double> terms;
  if (!inverted) {
    for (std::size_t y = 0; y < p.size(); ++y) {
      if (p[y] <= 0.0) continue;
      terms.push_back(std::log(p[y]) + lambda * (falpha[y] - pf) - c * lambda * lambda * detail::dual_penalty(alpha[y], exponent));
    }
  } else {
    const double pfa = p.expectation(falpha);
    double penalty;
    if (exponent == 1.0) {
      double sup = 0.0;
      for (std::size_t y = 0; y < p.size(); ++y)
        if (p[y] > 0.0) sup = std::max(sup, alpha[y]);
      penalty = detail::dual_penalty(sup, 1.0);
    } else {
      const double q = conjugate_exponent(exponent);
      double moment = 0.0;
      for (std::size_t y = 0; y < p.size(); ++y)
        if (p[y] > 0.0) moment += p[y] * std::pow(alpha[y], q);
      penalty = (moment - 1.0) / q + 0.5;
    }
    for (std::size_t x = 0; x < p.size(); ++x) {
      if (p[x] <= 0.0) continue;
      terms.push_back(std::log(p[x]) + lambda * (pfa - f[x]) - c * lambda * lambda * penalty);
    }
  }
  const double log_value = log_sum_exp(terms);
  if (std::isnan(log_value)) throw NumericError("dual_form_check: non-finite exponent");
  const double value = std::exp(log_value);

  ExperimentReport rep("dual-form-check", inverted ? "dual-form-inverted" : "dual-form");
  rep.input("C", c);
  rep.input("p", exponent);
  rep.input("lambda", lambda);
  rep.set_left(value);
  rep.set_right(1.0);
  rep.metric("log_left", log_value);
  rep.verdict = value <= 1.0 + 1e-9 ? Verdict::Pass : Verdict::Fail;
  rep.wall_seconds = clock.seconds();
  return rep;
}

}  // namespace wtineq
