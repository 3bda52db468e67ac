#pragma once

// Finite probability spaces, metrics, relative entropy and path measures
// built from (possibly history-dependent) kernels.

#include "wtineq/core.hpp"

#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>

namespace wtineq {

inline constexpr double kNormalizationTolerance = 1e-12;

class DiscreteSpace;
using SpacePtr = std::shared_ptr<const DiscreteSpace>;

/// A finite set of labelled points, optionally embedded in R^k. A space of
/// length n > 1 is the product E^n of a base space E; its points are encoded
/// with the first coordinate most significant, so every prefix occupies a
/// contiguous block of indices.
class DiscreteSpace {
 public:
  using Embedding = std::vector<std::vector<double>>;

  static SpacePtr make(std::vector<std::string> ids,
                       std::optional<Embedding> embedding = std::nullopt) {
    return SpacePtr(new DiscreteSpace(std::move(ids), std::move(embedding)));
  }

  /// Points "0", "1", ..., "k-1".
  static SpacePtr indexed(std::size_t k) {
    std::vector<std::string> ids(k);
    for (std::size_t i = 0; i < k; ++i) ids[i] = std::to_string(i);
    return make(std::move(ids));
  }

  /// Points of the real line (embedding dimension 1).
  static SpacePtr real_line(const std::vector<double>& values) {
    std::vector<std::string> ids;
    Embedding emb;
    for (double v : values) {
      std::ostringstream os;
      os << v;
      ids.push_back(os.str());
      emb.push_back({v});
    }
    return make(std::move(ids), std::move(emb));
  }

  static SpacePtr power(const SpacePtr& base, std::size_t n) {
    require(base != nullptr, "power: null base space");
    require(base->length() == 1, "power: base space must not itself be a product");
    require(n >= 1, "power: n must be >= 1");
    if (n == 1) return base;
    return SpacePtr(new DiscreteSpace(base, n));
  }

  std::size_t size() const { return size_; }
  std::size_t length() const { return length_; }
  bool is_product() const { return length_ > 1; }

  /// The coordinate space E (this space itself when length() == 1).
  const DiscreteSpace& base() const { return base_ ? *base_ : *this; }
  SpacePtr base_ptr() const { return base_; }

  std::string id(std::size_t i) const {
    if (!base_) return ids_.at(i);
    std::string out;
    for (std::size_t c : decode(i)) {
      if (!out.empty()) out += ',';
      out += base_->id(c);
    }
    return out;
  }

  bool has_embedding() const { return base().embedding_.has_value(); }
  std::size_t embedding_dim() const {
    return has_embedding() ? base().embedding_->front().size() : 0;
  }
  const std::vector<double>& embedding(std::size_t base_point) const {
    require(has_embedding(), "space has no embedding");
    return base().embedding_->at(base_point);
  }

  std::vector<std::size_t> decode(std::size_t index) const {
    std::vector<std::size_t> coords(length_);
    const std::size_t k = base().size();
    for (std::size_t j = length_; j-- > 0;) {
      coords[j] = index % k;
      index /= k;
    }
    return coords;
  }

  std::size_t encode(std::span<const std::size_t> coords) const {
    require(coords.size() == length_, "encode: wrong number of coordinates");
    const std::size_t k = base().size();
    std::size_t index = 0;
    for (std::size_t c : coords) {
      require(c < k, "encode: coordinate out of range");
      index = index * k + c;
    }
    return index;
  }

  std::size_t coordinate(std::size_t index, std::size_t j) const {
    const std::size_t k = base().size();
    for (std::size_t s = length_ - 1; s > j; --s) index /= k;
    return index % k;
  }

  /// Structural equality: same base labels and same length.
  bool same_as(const DiscreteSpace& other) const {
    if (this == &other) return true;
    if (length_ != other.length_ || size_ != other.size_) return false;
    const auto& a = base();
    const auto& b = other.base();
    return a.ids_ == b.ids_ && a.embedding_ == b.embedding_;
  }

 private:
  DiscreteSpace(std::vector<std::string> ids, std::optional<Embedding> embedding)
      : ids_(std::move(ids)), embedding_(std::move(embedding)), size_(ids_.size()) {
    require(!ids_.empty(), "space must have at least one point");
    std::vector<std::string> sorted = ids_;
    std::sort(sorted.begin(), sorted.end());
    require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
            "point ids must be unique");
    if (embedding_) {
      require(embedding_->size() == ids_.size(), "embedding must cover every point");
      const std::size_t dim = embedding_->front().size();
      require(dim > 0, "embedding vectors must be nonempty");
      for (const auto& v : *embedding_) {
        require(v.size() == dim, "embedding vectors must have equal dimension");
      }
    }
  }

  DiscreteSpace(SpacePtr base, std::size_t n) : base_(std::move(base)), length_(n) {
    size_ = 1;
    for (std::size_t j = 0; j < n; ++j) size_ *= base_->size();
  }

  std::vector<std::string> ids_;
  std::optional<Embedding> embedding_;
  SpacePtr base_;
  std::size_t length_ = 1;
  std::size_t size_ = 0;
};

/// A probability vector over a DiscreteSpace. Zero-weight points are kept.
class DiscreteMeasure {
 public:
  DiscreteMeasure(SpacePtr space, std::vector<double> weights)
      : space_(std::move(space)), weights_(std::move(weights)) {
    require(space_ != nullptr, "measure: null space");
    require(weights_.size() == space_->size(), "measure: weight count does not match space size");
    double total = 0.0;
    for (double w : weights_) {
      require(std::isfinite(w) && w >= 0.0, "measure: weights must be finite and nonnegative");
      total += w;
    }
    if (std::abs(total - 1.0) > kNormalizationTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "measure: weights sum to " << total << ", not 1";
      throw DomainError(os.str());
    }
  }

  /// Point mass at `index`.
  static DiscreteMeasure dirac(SpacePtr space, std::size_t index) {
    std::vector<double> w(space->size(), 0.0);
    w.at(index) = 1.0;
    return {std::move(space), std::move(w)};
  }

  static DiscreteMeasure uniform(SpacePtr space) {
    const std::size_t k = space->size();
    return {std::move(space), std::vector<double>(k, 1.0 / static_cast<double>(k))};
  }

  /// Rescales nonnegative masses to a probability vector.
  static DiscreteMeasure normalized(SpacePtr space, std::vector<double> masses) {
    double total = 0.0;
    for (double m : masses) {
      require(std::isfinite(m) && m >= 0.0, "normalized: masses must be finite and nonnegative");
      total += m;
    }
    require(total > 0.0, "normalized: total mass is zero");
    for (double& m : masses) m /= total;
    return {std::move(space), std::move(masses)};
  }

  const SpacePtr& space_ptr() const { return space_; }
  const DiscreteSpace& space() const { return *space_; }
  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }

  double expectation(std::span<const double> f) const {
    require(f.size() == weights_.size(), "expectation: function size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (weights_[i] > 0.0) s += weights_[i] * f[i];
    }
    return s;
  }

 private:
  SpacePtr space_;
  std::vector<double> weights_;
};

/// Distance on the coordinate space E.
struct MetricSpec {
  enum class Kind { Hamming, Euclidean, Table };

  Kind kind = Kind::Hamming;
  Matrix table;

  static MetricSpec hamming() { return {}; }
  static MetricSpec euclidean() { return {Kind::Euclidean, {}}; }
  static MetricSpec from_table(Matrix cost) {
    const Eigen::Index k = cost.rows();
    require(cost.cols() == k, "metric table must be square");
    for (Eigen::Index i = 0; i < k; ++i) {
      require(cost(i, i) == 0.0, "metric table must have zero diagonal");
      for (Eigen::Index j = 0; j < k; ++j) {
        require(cost(i, j) >= 0.0 && std::isfinite(cost(i, j)), "metric table must be nonnegative");
        require(cost(i, j) == cost(j, i), "metric table must be symmetric");
      }
    }
    return {Kind::Table, std::move(cost)};
  }

  /// d(x, y) for points x, y of the coordinate space.
  double operator()(const DiscreteSpace& base, std::size_t x, std::size_t y) const {
    switch (kind) {
      case Kind::Hamming:
        return x == y ? 0.0 : 1.0;
      case Kind::Euclidean: {
        require(base.has_embedding(), "Euclidean metric requires an embedding");
        const auto& a = base.embedding(x);
        const auto& b = base.embedding(y);
        double s = 0.0;
        for (std::size_t c = 0; c < a.size(); ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
        return std::sqrt(s);
      }
      case Kind::Table:
        require(static_cast<Eigen::Index>(base.size()) == table.rows(),
                "metric table size does not match space");
        return table(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
    }
    return 0.0;
  }

  void validate(const DiscreteSpace& space) const {
    if (kind == Kind::Euclidean) require(space.has_embedding(), "Euclidean metric requires an embedding");
    if (kind == Kind::Table) {
      require(static_cast<Eigen::Index>(space.base().size()) == table.rows(),
              "metric table size does not match space");
    }
  }
};

/// Per-coordinate distance matrix on E: D(x, y) = d(x, y).
inline Matrix coordinate_distances(const DiscreteSpace& space, const MetricSpec& metric) {
  metric.validate(space);
  const auto& base = space.base();
  const std::size_t k = base.size();
  Matrix d(k, k);
  for (std::size_t x = 0; x < k; ++x)
    for (std::size_t y = 0; y < k; ++y) d(x, y) = metric(base, x, y);
  return d;
}

/// Distance on E^n combining coordinates in l^exponent:
/// d_p(x, y) = (sum_j d(x_j, y_j)^p)^(1/p).
inline Matrix path_distances(const DiscreteSpace& space, const MetricSpec& metric, double exponent) {
  require(exponent >= 1.0, "path metric exponent must be >= 1");
  const Matrix d = coordinate_distances(space, metric);
  const std::size_t m = space.size();
  Matrix out(m, m);
  for (std::size_t a = 0; a < m; ++a) {
    const auto xa = space.decode(a);
    for (std::size_t b = 0; b < m; ++b) {
      const auto yb = space.decode(b);
      double s = 0.0;
      for (std::size_t j = 0; j < xa.size(); ++j) s += std::pow(d(xa[j], yb[j]), exponent);
      out(a, b) = std::pow(s, 1.0 / exponent);
    }
  }
  return out;
}

/// Smallest M with d <= M d' on E (over distinct pairs).
inline double domination_constant(const DiscreteSpace& space, const MetricSpec& d,
                                  const MetricSpec& d_prime) {
  const Matrix a = coordinate_distances(space, d);
  const Matrix b = coordinate_distances(space, d_prime);
  double m = 0.0;
  for (Eigen::Index x = 0; x < a.rows(); ++x) {
    for (Eigen::Index y = 0; y < a.cols(); ++y) {
      if (x == y) continue;
      if (b(x, y) == 0.0) {
        require(a(x, y) == 0.0, "d' vanishes where d does not: no domination constant");
        continue;
      }
      m = std::max(m, a(x, y) / b(x, y));
    }
  }
  return m > 0.0 ? m : 1.0;
}

/// Relative entropy K(Q|P) = sum_x Q(x) log(Q(x)/P(x)) in nats; +inf when Q is
/// not absolutely continuous with respect to P.
inline double kl_divergence(const DiscreteMeasure& q, const DiscreteMeasure& p) {
  require(q.space().same_as(p.space()), "kl_divergence: measures live on different spaces");
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] <= 0.0) continue;
    if (p[i] <= 0.0) return std::numeric_limits<double>::infinity();
    s += q[i] * std::log(q[i] / p[i]);
  }
  return std::max(s, 0.0);
}

/// Total variation sup_A |P(A) - Q(A)|.
inline double total_variation(std::span<const double> p, std::span<const double> q) {
  require(p.size() == q.size(), "total_variation: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

/// Dirichlet(concentration, ..., concentration) draw; strictly positive weights.
inline DiscreteMeasure random_measure(const SpacePtr& space, std::uint64_t seed, double concentration) {
  require(concentration > 0.0, "random_measure: concentration must be positive");
  Rng rng(mix_seed(seed));
  std::gamma_distribution<double> gamma(concentration, 1.0);
  std::vector<double> g(space->size());
  for (double& v : g) v = std::max(gamma(rng), 1e-300);
  return DiscreteMeasure::normalized(space, std::move(g));
}

// ---------------------------------------------------------------------------
// Prefix algebra on measures over E^n.

/// Probability of the event {(X_1..X_i) = prefix}.
inline double prefix_mass(const DiscreteMeasure& m, std::span<const std::size_t> prefix) {
  const auto& s = m.space();
  require(prefix.size() <= s.length(), "prefix longer than path");
  const std::size_t k = s.base().size();
  std::size_t block = 1;
  for (std::size_t j = prefix.size(); j < s.length(); ++j) block *= k;
  std::size_t start = 0;
  for (std::size_t c : prefix) {
    require(c < k, "prefix coordinate out of range");
    start = start * k + c;
  }
  start *= block;
  double total = 0.0;
  for (std::size_t i = start; i < start + block; ++i) total += m[i];
  return total;
}

/// Law of X_k (0-based coordinate k >= prefix.size()) given the prefix.
/// Returns the weight vector on E.
inline std::vector<double> coordinate_conditional(const DiscreteMeasure& m,
                                                  std::span<const std::size_t> prefix,
                                                  std::size_t k) {
  const auto& s = m.space();
  require(k >= prefix.size() && k < s.length(), "coordinate_conditional: bad coordinate");
  const std::size_t base = s.base().size();
  std::size_t block = 1;
  for (std::size_t j = prefix.size(); j < s.length(); ++j) block *= base;
  std::size_t start = 0;
  for (std::size_t c : prefix) start = start * base + c;
  start *= block;
  std::vector<double> out(base, 0.0);
  double total = 0.0;
  for (std::size_t i = start; i < start + block; ++i) {
    if (m[i] == 0.0) continue;
    out[s.coordinate(i, k)] += m[i];
    total += m[i];
  }
  require(total > 0.0, "conditioning on a zero-probability prefix");
  for (double& v : out) v /= total;
  return out;
}

/// Conditional law of the remaining coordinates given the prefix, as a measure
/// on E^(n - prefix length).
inline DiscreteMeasure conditional(const DiscreteMeasure& m, std::span<const std::size_t> prefix) {
  const auto& s = m.space();
  require(prefix.size() < s.length(), "conditional: prefix must leave at least one coordinate");
  const std::size_t base = s.base().size();
  const std::size_t rest = s.length() - prefix.size();
  std::size_t block = 1;
  for (std::size_t j = 0; j < rest; ++j) block *= base;
  std::size_t start = 0;
  for (std::size_t c : prefix) {
    require(c < base, "prefix coordinate out of range");
    start = start * base + c;
  }
  start *= block;
  double total = 0.0;
  for (std::size_t i = start; i < start + block; ++i) total += m[i];
  require(total > 0.0, "conditioning on a zero-probability prefix");
  std::vector<double> w(block);
  for (std::size_t i = 0; i < block; ++i) w[i] = m[start + i] / total;
  SpacePtr base_ptr = s.is_product() ? s.base_ptr() : m.space_ptr();
  return DiscreteMeasure(DiscreteSpace::power(base_ptr, rest), std::move(w));
}

// ---------------------------------------------------------------------------
// Kernels and path measures.

/// Transition rule for X_j given the history (x_1, ..., x_{j-1}). An empty
/// history means the fixed origin x_0.
class Kernel {
 public:
  using Rule = std::function<std::vector<double>(std::span<const std::size_t>)>;

  /// Time-homogeneous Markov kernel; `origin` is the state used for the first step.
  static Kernel markov(Matrix transition, std::size_t origin = 0) {
    require(transition.rows() == transition.cols(), "transition matrix must be square");
    for (Eigen::Index r = 0; r < transition.rows(); ++r) check_row(transition.row(r).transpose());
    require(static_cast<Eigen::Index>(origin) < transition.rows(), "origin out of range");
    Kernel k;
    k.markov_ = true;
    k.transition_ = std::move(transition);
    k.origin_ = origin;
    return k;
  }

  static Kernel iid(std::vector<double> weights) {
    Vector w = Eigen::Map<const Vector>(weights.data(), static_cast<Eigen::Index>(weights.size()));
    check_row(w);
    Matrix t(w.size(), w.size());
    for (Eigen::Index r = 0; r < t.rows(); ++r) t.row(r) = w.transpose();
    return markov(std::move(t));
  }

  static Kernel general(Rule rule) {
    Kernel k;
    k.rule_ = std::move(rule);
    return k;
  }

  bool is_markov() const { return markov_; }
  const Matrix& transition() const { return transition_; }
  std::size_t origin() const { return origin_; }

  std::vector<double> row(std::span<const std::size_t> history) const {
    if (markov_) {
      const std::size_t state = history.empty() ? origin_ : history.back();
      std::vector<double> out(static_cast<std::size_t>(transition_.cols()));
      for (Eigen::Index c = 0; c < transition_.cols(); ++c) {
        out[static_cast<std::size_t>(c)] = transition_(static_cast<Eigen::Index>(state), c);
      }
      return out;
    }
    auto out = rule_(history);
    check_row(Eigen::Map<const Vector>(out.data(), static_cast<Eigen::Index>(out.size())));
    return out;
  }

 private:
  static void check_row(const Vector& r) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      require(std::isfinite(r(i)) && r(i) >= 0.0, "kernel row has a negative or non-finite entry");
      total += r(i);
    }
    require(std::abs(total - 1.0) <= kNormalizationTolerance, "kernel row is not stochastic");
  }

  bool markov_ = false;
  Matrix transition_;
  std::size_t origin_ = 0;
  Rule rule_;
};

/// Law of (X_1, ..., X_n) on E^n with X_1 ~ initial and X_j ~ kernel(history).
class PathMeasure {
 public:
  PathMeasure(SpacePtr base, std::vector<double> initial, std::vector<Kernel> kernels, std::size_t n)
      : base_(std::move(base)), initial_(std::move(initial)), kernels_(std::move(kernels)), n_(n),
        joint_(build()) {}

  std::size_t horizon() const { return n_; }
  const SpacePtr& base_space() const { return base_; }
  const DiscreteMeasure& joint() const { return joint_; }
  const std::vector<double>& initial() const { return initial_; }
  bool is_markov() const {
    return std::all_of(kernels_.begin(), kernels_.end(), [](const Kernel& k) { return k.is_markov(); });
  }

  /// Kernel driving step j (1-based, j >= 2).
  const Kernel& kernel(std::size_t j) const {
    require(j >= 2 && j <= n_, "kernel: step out of range");
    return kernels_.size() == 1 ? kernels_.front() : kernels_.at(j - 2);
  }

  DiscreteMeasure conditional(std::span<const std::size_t> prefix) const {
    return wtineq::conditional(joint_, prefix);
  }
  std::vector<double> coordinate_law(std::span<const std::size_t> prefix, std::size_t k) const {
    return coordinate_conditional(joint_, prefix, k);
  }
  double prefix_probability(std::span<const std::size_t> prefix) const {
    return prefix_mass(joint_, prefix);
  }

 private:
  DiscreteMeasure build() const {
    require(base_ != nullptr && !base_->is_product(), "path_measure: base must be a coordinate space");
    require(n_ >= 1, "path_measure: horizon must be >= 1");
    const std::size_t k = base_->size();
    require(initial_.size() == k, "path_measure: initial measure has wrong size");
    (void)DiscreteMeasure(base_, initial_);
    require(n_ == 1 || !kernels_.empty(), "path_measure: kernels required for n >= 2");
    require(kernels_.size() <= 1 || kernels_.size() == n_ - 1,
            "path_measure: provide one kernel or one per step");
    auto space = DiscreteSpace::power(base_, n_);
    std::vector<double> w(space->size(), 0.0);
    std::vector<std::size_t> path(n_);
    for (std::size_t idx = 0; idx < space->size(); ++idx) {
      path = space->decode(idx);
      double prob = initial_[path[0]];
      for (std::size_t j = 1; j < n_ && prob > 0.0; ++j) {
        const auto r = kernel(j + 1).row(std::span<const std::size_t>(path.data(), j));
        require(r.size() == k, "kernel row has wrong size");
        prob *= r[path[j]];
      }
      w[idx] = prob;
    }
    return DiscreteMeasure(std::move(space), std::move(w));
  }

  SpacePtr base_;
  std::vector<double> initial_;
  std::vector<Kernel> kernels_;
  std::size_t n_;
  DiscreteMeasure joint_;
};

inline PathMeasure path_measure(SpacePtr base, std::vector<double> initial, std::vector<Kernel> kernels,
                                std::size_t n) {
  return PathMeasure(std::move(base), std::move(initial), std::move(kernels), n);
}

/// Markov chain on {0..k-1} started at X_0 = origin: X_1 ~ row(origin).
inline PathMeasure markov_chain(const Matrix& transition, std::size_t origin, std::size_t n) {
  auto base = DiscreteSpace::indexed(static_cast<std::size_t>(transition.rows()));
  std::vector<double> initial(static_cast<std::size_t>(transition.cols()));
  for (Eigen::Index c = 0; c < transition.cols(); ++c) {
    initial[static_cast<std::size_t>(c)] = transition(static_cast<Eigen::Index>(origin), c);
  }
  return PathMeasure(base, std::move(initial), {Kernel::markov(transition, origin)}, n);
}

}  // namespace wtineq
