#pragma once

// Wolfe's minimum-norm-point algorithm over a polytope given by a linear
// minimization oracle. Every iterate x comes with the bound
//
//   min_{y in K} |y| >= <x, v> / |x|,   v = argmin_{y in K} <x, y>,
//
// so the solver returns a certified interval [lower, |x|] for the minimum
// norm, and the convex weights of the active atoms as a witness.

#include "wtineq/core.hpp"

#include <utility>

namespace wtineq {

struct MinNormOptions {
  double tolerance = 1e-10;   // absolute, on the norm
  std::size_t max_iterations = 2000;
};

struct MinNormResult {
  Vector point;
  std::vector<std::size_t> atoms;   // caller-supplied tags of the active vertices
  std::vector<double> weights;      // convex weights of the active vertices
  double upper = 0.0;               // |point|
  double lower = 0.0;               // certified lower bound on the minimum norm
  Vector lower_direction;           // iterate that produced `lower`
  std::size_t iterations = 0;
  bool converged = false;
};

namespace detail {

// Barycentric coordinates of the min-norm point of the affine hull of `atoms`.
inline Vector affine_min_norm(const std::vector<Vector>& atoms) {
  const Eigen::Index m = static_cast<Eigen::Index>(atoms.size());
  Vector mu(m);
  if (m == 1) {
    mu(0) = 1.0;
    return mu;
  }
  const Eigen::Index dim = atoms.front().size();
  Matrix b(dim, m - 1);
  for (Eigen::Index i = 1; i < m; ++i) b.col(i - 1) = atoms[static_cast<std::size_t>(i)] - atoms.front();
  const Vector c = b.completeOrthogonalDecomposition().solve(-atoms.front());
  mu(0) = 1.0 - c.sum();
  mu.tail(m - 1) = c;
  return mu;
}

inline Vector combine(const std::vector<Vector>& atoms, const std::vector<double>& w) {
  Vector x = Vector::Zero(atoms.front().size());
  for (std::size_t i = 0; i < atoms.size(); ++i) x.noalias() += w[i] * atoms[i];
  return x;
}

}  // namespace detail

/// `oracle(direction)` must return a pair (vertex, tag) with the vertex
/// minimizing <direction, .> over the polytope. `start` is any vertex.
template <class Oracle>
MinNormResult min_norm_point(Oracle&& oracle, std::pair<Vector, std::size_t> start,
                             const MinNormOptions& options = {}) {
  constexpr double kDrop = 1e-14;
  std::vector<Vector> atoms{std::move(start.first)};
  std::vector<std::size_t> tags{start.second};
  std::vector<double> lambda{1.0};
  Vector x = atoms.front();

  MinNormResult out;
  out.lower = 0.0;
  out.lower_direction = x;
  double scale = std::max(1.0, x.norm());

  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    out.iterations = iter + 1;
    const double xnorm = x.norm();
    if (xnorm <= options.tolerance) {
      out.converged = true;
      break;
    }
    auto [v, tag] = oracle(x);
    if (v.size() != x.size()) throw NumericError("min_norm_point: oracle returned a vertex of wrong dimension");
    if (!v.allFinite()) throw NumericError("min_norm_point: oracle returned a non-finite vertex");
    scale = std::max(scale, v.norm());
    const double bound = x.dot(v) / xnorm;
    if (bound > out.lower) {
      out.lower = bound;
      out.lower_direction = x;
    }
    if (xnorm - out.lower <= options.tolerance) {
      out.converged = true;
      break;
    }
    bool repeated = false;
    for (const auto& a : atoms) {
      if ((a - v).norm() <= 1e-13 * scale) {
        repeated = true;
        break;
      }
    }
    if (repeated) break;  // stalled at working precision

    atoms.push_back(std::move(v));
    tags.push_back(tag);
    lambda.push_back(0.0);

    for (;;) {
      const Vector mu = detail::affine_min_norm(atoms);
      bool interior = true;
      for (Eigen::Index i = 0; i < mu.size(); ++i) interior = interior && mu(i) > kDrop;
      if (interior) {
        for (std::size_t i = 0; i < lambda.size(); ++i) lambda[i] = mu(static_cast<Eigen::Index>(i));
        break;
      }
      double theta = 1.0;
      for (std::size_t i = 0; i < lambda.size(); ++i) {
        const double m = mu(static_cast<Eigen::Index>(i));
        if (m <= kDrop && lambda[i] - m > 0.0) theta = std::min(theta, lambda[i] / (lambda[i] - m));
      }
      for (std::size_t i = 0; i < lambda.size(); ++i) {
        lambda[i] = (1.0 - theta) * lambda[i] + theta * mu(static_cast<Eigen::Index>(i));
      }
      std::vector<Vector> keep_atoms;
      std::vector<std::size_t> keep_tags;
      std::vector<double> keep_lambda;
      for (std::size_t i = 0; i < lambda.size(); ++i) {
        if (lambda[i] > kDrop) {
          keep_atoms.push_back(std::move(atoms[i]));
          keep_tags.push_back(tags[i]);
          keep_lambda.push_back(lambda[i]);
        }
      }
      if (keep_atoms.empty()) throw NumericError("min_norm_point: active set collapsed");
      atoms = std::move(keep_atoms);
      tags = std::move(keep_tags);
      lambda = std::move(keep_lambda);
      double total = 0.0;
      for (double l : lambda) total += l;
      for (double& l : lambda) l /= total;
    }
    x = detail::combine(atoms, lambda);
  }

  out.point = x;
  out.upper = x.norm();
  out.lower = std::min(std::max(out.lower, 0.0), out.upper);
  if (out.upper - out.lower <= options.tolerance) out.converged = true;
  out.atoms = std::move(tags);
  out.weights = std::move(lambda);
  return out;
}

/// Minimum-norm point of conv(points).
inline MinNormResult min_norm_point(const std::vector<Vector>& points, const MinNormOptions& options = {}) {
  require(!points.empty(), "min_norm_point: empty point list");
  std::size_t best = 0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].squaredNorm() < points[best].squaredNorm()) best = i;
  }
  auto oracle = [&points](const Vector& direction) {
    std::size_t arg = 0;
    double value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double s = direction.dot(points[i]);
      if (s < value) {
        value = s;
        arg = i;
      }
    }
    return std::make_pair(points[arg], arg);
  };
  return min_norm_point(oracle, {points[best], best}, options);
}

}  // namespace wtineq
