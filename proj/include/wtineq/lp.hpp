#pragma once

// Exact solver for the discrete transportation problem
//
//   min sum_ij c_ij x_ij   s.t.  sum_j x_ij = a_i,  sum_i x_ij = b_j,  x >= 0,
//
// by the transportation simplex (u-v potentials) started from the north-west
// corner basis. Entering and leaving cells follow Bland's lowest-index rule, so
// the method terminates on degenerate problems and ties resolve the same way
// on every run.

#include "wtineq/core.hpp"

#include <deque>
#include <optional>
#include <span>

namespace wtineq {

struct TransportPlan {
  double cost = 0.0;
  Matrix plan;   // rows follow supply, columns follow demand
  Vector row_potential;
  Vector col_potential;
  std::size_t pivots = 0;
};

namespace detail {

class TransportSimplex {
 public:
  TransportSimplex(std::span<const double> supply, std::span<const double> demand, const Matrix& cost)
      : m_(supply.size()), k_(demand.size()), cost_(cost) {
    require(m_ > 0 && k_ > 0, "transport: empty marginals");
    require(cost.rows() == static_cast<Eigen::Index>(m_) && cost.cols() == static_cast<Eigen::Index>(k_),
            "transport: cost matrix shape does not match marginals");
    double sa = 0.0, sb = 0.0;
    for (double v : supply) {
      require(std::isfinite(v) && v >= 0.0, "transport: supplies must be nonnegative");
      sa += v;
    }
    for (double v : demand) {
      require(std::isfinite(v) && v >= 0.0, "transport: demands must be nonnegative");
      sb += v;
    }
    require(sa > 0.0, "transport: zero total mass");
    if (std::abs(sa - sb) > 1e-9 * std::max(1.0, sa)) {
      throw NumericError("transport: marginals carry different total mass");
    }
    for (Eigen::Index i = 0; i < cost.size(); ++i) {
      require(std::isfinite(cost.data()[i]), "transport: non-finite cost");
    }
    scale_ = std::max(1.0, cost.cwiseAbs().maxCoeff());
    a_.assign(supply.begin(), supply.end());
    b_.assign(demand.begin(), demand.end());
    x_ = Matrix::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(k_));
    basic_.assign(m_ * k_, false);
  }

  TransportPlan solve() {
    north_west();
    TransportPlan out;
    const std::size_t max_pivots = 50 * (m_ + k_) * (m_ + k_) + 1000;
    for (;;) {
      compute_potentials();
      const auto entering = find_entering();
      if (!entering) break;
      pivot(entering->first, entering->second);
      if (++out.pivots > max_pivots) throw NumericError("transport: pivot limit exceeded");
    }
    out.plan = x_;
    out.cost = (cost_.array() * x_.array()).sum();
    out.row_potential = u_;
    out.col_potential = v_;
    return out;
  }

 private:
  std::size_t cell(std::size_t i, std::size_t j) const { return i * k_ + j; }

  void north_west() {
    std::vector<double> ra = a_, rb = b_;
    std::size_t i = 0, j = 0;
    for (;;) {
      const double q = std::min(ra[i], rb[j]);
      x_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = q;
      basic_[cell(i, j)] = true;
      if (i == m_ - 1 && j == k_ - 1) break;
      const bool row_done = ra[i] <= rb[j];
      ra[i] -= q;
      rb[j] -= q;
      if (i == m_ - 1) {
        ++j;
      } else if (j == k_ - 1) {
        ++i;
      } else if (row_done) {
        rb[j] = std::max(rb[j], 0.0);
        ++i;
      } else {
        ra[i] = std::max(ra[i], 0.0);
        ++j;
      }
    }
    // Absorb rounding so the final cell closes both marginals.
    x_(static_cast<Eigen::Index>(m_ - 1), static_cast<Eigen::Index>(k_ - 1)) =
        std::max(0.0, x_(static_cast<Eigen::Index>(m_ - 1), static_cast<Eigen::Index>(k_ - 1)));
  }

  void compute_potentials() {
    u_ = Vector::Constant(static_cast<Eigen::Index>(m_), std::numeric_limits<double>::quiet_NaN());
    v_ = Vector::Constant(static_cast<Eigen::Index>(k_), std::numeric_limits<double>::quiet_NaN());
    u_(0) = 0.0;
    std::deque<std::size_t> queue{0};  // nodes: rows 0..m-1, columns m..m+k-1
    while (!queue.empty()) {
      const std::size_t node = queue.front();
      queue.pop_front();
      if (node < m_) {
        const std::size_t i = node;
        for (std::size_t j = 0; j < k_; ++j) {
          if (basic_[cell(i, j)] && std::isnan(v_(static_cast<Eigen::Index>(j)))) {
            v_(static_cast<Eigen::Index>(j)) = c(i, j) - u_(static_cast<Eigen::Index>(i));
            queue.push_back(m_ + j);
          }
        }
      } else {
        const std::size_t j = node - m_;
        for (std::size_t i = 0; i < m_; ++i) {
          if (basic_[cell(i, j)] && std::isnan(u_(static_cast<Eigen::Index>(i)))) {
            u_(static_cast<Eigen::Index>(i)) = c(i, j) - v_(static_cast<Eigen::Index>(j));
            queue.push_back(i);
          }
        }
      }
    }
    for (Eigen::Index i = 0; i < u_.size(); ++i) {
      if (std::isnan(u_(i))) throw NumericError("transport: basis is not a spanning tree");
    }
    for (Eigen::Index j = 0; j < v_.size(); ++j) {
      if (std::isnan(v_(j))) throw NumericError("transport: basis is not a spanning tree");
    }
  }

  std::optional<std::pair<std::size_t, std::size_t>> find_entering() const {
    const double tol = 1e-12 * scale_;
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < k_; ++j) {
        if (basic_[cell(i, j)]) continue;
        const double reduced = c(i, j) - u_(static_cast<Eigen::Index>(i)) - v_(static_cast<Eigen::Index>(j));
        if (reduced < -tol) return std::make_pair(i, j);
      }
    }
    return std::nullopt;
  }

  // Path in the basis tree from row node `ei` to column node `ej`, as the
  // list of cells visited (alternating row/column moves).
  std::vector<std::pair<std::size_t, std::size_t>> tree_path(std::size_t ei, std::size_t ej) const {
    const std::size_t nodes = m_ + k_;
    std::vector<std::size_t> parent(nodes, nodes);
    std::vector<bool> seen(nodes, false);
    std::deque<std::size_t> queue{ei};
    seen[ei] = true;
    while (!queue.empty()) {
      const std::size_t node = queue.front();
      queue.pop_front();
      if (node == m_ + ej) break;
      if (node < m_) {
        for (std::size_t j = 0; j < k_; ++j) {
          if (basic_[cell(node, j)] && !seen[m_ + j]) {
            seen[m_ + j] = true;
            parent[m_ + j] = node;
            queue.push_back(m_ + j);
          }
        }
      } else {
        const std::size_t j = node - m_;
        for (std::size_t i = 0; i < m_; ++i) {
          if (basic_[cell(i, j)] && !seen[i]) {
            seen[i] = true;
            parent[i] = node;
            queue.push_back(i);
          }
        }
      }
    }
    if (!seen[m_ + ej]) throw NumericError("transport: entering cell does not close a cycle");
    std::vector<std::pair<std::size_t, std::size_t>> cells;
    std::size_t node = m_ + ej;
    while (node != ei) {
      const std::size_t p = parent[node];
      if (node >= m_) {
        cells.emplace_back(p, node - m_);
      } else {
        cells.emplace_back(node, p - m_);
      }
      node = p;
    }
    return cells;  // from the column end back to the row end
  }

  void pivot(std::size_t ei, std::size_t ej) {
    // Cycle: entering (+), then the tree path from column ej back to row ei,
    // alternating signs starting with (-).
    const auto path = tree_path(ei, ej);
    std::vector<std::pair<std::size_t, std::size_t>> minus, plus;
    for (std::size_t s = 0; s < path.size(); ++s) (s % 2 == 0 ? minus : plus).push_back(path[s]);
    double theta = std::numeric_limits<double>::infinity();
    for (const auto& [i, j] : minus) theta = std::min(theta, x(i, j));
    std::size_t leave_i = m_, leave_j = k_;
    std::size_t leave_cell = m_ * k_;
    for (const auto& [i, j] : minus) {
      if (x(i, j) <= theta && cell(i, j) < leave_cell) {
        leave_i = i;
        leave_j = j;
        leave_cell = cell(i, j);
      }
    }
    theta = std::max(theta, 0.0);
    x(ei, ej) += theta;
    for (const auto& [i, j] : plus) x(i, j) += theta;
    for (const auto& [i, j] : minus) x(i, j) = std::max(0.0, x(i, j) - theta);
    x(leave_i, leave_j) = 0.0;
    basic_[cell(leave_i, leave_j)] = false;
    basic_[cell(ei, ej)] = true;
  }

  double c(std::size_t i, std::size_t j) const {
    return cost_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  double& x(std::size_t i, std::size_t j) {
    return x_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  std::size_t m_, k_;
  const Matrix& cost_;
  double scale_ = 1.0;
  std::vector<double> a_, b_;
  Matrix x_;
  std::vector<bool> basic_;
  Vector u_, v_;
};

}  // namespace detail

/// Optimal transport plan between `supply` and `demand` for `cost`.
inline TransportPlan solve_transport(std::span<const double> supply, std::span<const double> demand,
                                     const Matrix& cost) {
  return detail::TransportSimplex(supply, demand, cost).solve();
}

}  // namespace wtineq
