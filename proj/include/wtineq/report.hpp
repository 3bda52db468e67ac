#pragma once

#include "wtineq/core.hpp"

#include <chrono>
#include <map>
#include <optional>
#include <string_view>
#include <utility>

namespace wtineq {

enum class Verdict { Pass, Fail, Inconclusive };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "PASS";
    case Verdict::Fail:
      return "FAIL";
    case Verdict::Inconclusive:
      return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

/// Stable identifiers of the inequalities the toolkit checks, mapped to the
/// inequality they test written out in plain notation.
inline const std::map<std::string, std::string, std::less<>>& inequality_registry() {
  static const std::map<std::string, std::string, std::less<>> registry{
      {"weak-transport", "W~_{p,d}(P,Q) <= sqrt(2 C K(Q|P))"},
      {"weak-transport-inverted", "W~_{p,d}(Q,P) <= sqrt(2 C K(Q|P))"},
      {"weak-transport-dependent", "W~_{p,d_p}(P,Q) <= sqrt(2 C |Gamma(p)|_p^2 n^(2/p-1) K(Q|P))"},
      {"dual-form", "P[exp(lambda (f_alpha - P f) - C lambda^2 ((alpha^q - 1)/q + 1/2))] <= 1"},
      {"dual-form-inverted", "P[exp(lambda (P f_alpha - f) - C lambda^2 ((P alpha^q - 1)/q + 1/2))] <= 1"},
      {"triangle", "W~_{p,d}(P,R) <= W~_{p,d}(P,Q) + W~_{p,d}(Q,R)"},
      {"triangle-fixed-alpha", "W~_{alpha,d}(P,R) <= W~_{alpha~,d}(P,Q) + W~_{alpha,d}(Q,R), Q[alpha~^q] <= R[alpha^q]"},
      {"gluing", "pi_{x,z|y} = pi_{x|y} pi_{z|y} with margins pi_{x,y}, pi_{y,z}"},
      {"hoeffding",
       "P[exp(lambda (f - P f) - C lambda^2 sum_j alpha_j^2 / 2)] <= 1, f(x) - f(y) <= sum_j alpha_j(x) 1{x_j != y_j}"},
      {"hoeffding-inverted", "P[exp(lambda (P f - f) - C lambda^2 sum_j P[alpha_j^2] / 2)] <= 1"},
      {"tsirelson", "P[exp(g - P g - C |grad g|^2 / 2)] <= 1, g separately convex"},
      {"tsirelson-concave", "P[exp(g - P g - C P[|grad g|^2] / 2)] <= 1, g separately concave"},
      {"subgaussian", "log P[exp(lambda (<a,X> - P<a,X>))] <= C lambda^2 |a|^2 / 2"},
      {"convex-poincare", "P[(g - P g)^2] <= C P[|grad g|^2], g separately convex"},
      {"talagrand-hamming", "P[exp(d_T(X,A)^2 / 4C)] <= 1/P(A)"},
      {"talagrand-euclidean", "P[exp(d_N(X,conv A)^2 / 4C)] <= 1/P(A)"},
      {"oracle-conditional", "Q[Rbar(theta^)] <= Q[|Z|_n^2]/beta + 4 sqrt(rho C Q[K] (K(Q|P) + beta Q[Rbar(theta^)]/2) / n)"},
      {"oracle-nonexact", "R(theta^) <= (1 + B1 eta) R(theta-) + (B2 d + 16 rho C log(1/eps))/(n eta) + B3/(n eta)^2"},
      {"oracle-exact",
       "R(theta^) <= R(theta-) + 160 (B^2 + 4BM)/n (Bd + 8 rho C (log(1/eps) - log P(r > M)) + d(R + M)/(10B + 40M) + 8 (Bd)^2/n)"},
      {"process-coupling", "sum_t P[d^p(X_t(x), X_t(x'))]^(1/p) <= S d'(x, x')"},
  };
  return registry;
}

inline std::string inequality_anchor(std::string_view id) {
  const auto& reg = inequality_registry();
  const auto it = reg.find(id);
  if (it == reg.end()) throw DomainError("unknown inequality id: " + std::string(id));
  return it->second;
}

/// Structured outcome of one inequality check. Numeric fields that could not
/// be computed (or came out non-finite) are left empty.
struct ExperimentReport {
  std::string id;
  std::string inequality;  // registry key
  std::string anchor;
  std::vector<std::pair<std::string, double>> inputs;
  std::optional<double> left, right;
  std::optional<double> left_se, right_se;
  std::optional<double> lower, upper;
  std::vector<std::pair<std::string, std::optional<double>>> metrics;
  Verdict verdict = Verdict::Inconclusive;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> notes;

  ExperimentReport() = default;
  ExperimentReport(std::string experiment_id, std::string inequality_id)
      : id(std::move(experiment_id)), inequality(std::move(inequality_id)), anchor(inequality_anchor(inequality)) {}

  bool passed() const { return verdict == Verdict::Pass; }

  void input(std::string name, double value) { inputs.emplace_back(std::move(name), value); }
  void metric(std::string name, double value) {
    metrics.emplace_back(std::move(name), finite_or_empty(value));
  }
  std::optional<double> metric_value(std::string_view name) const {
    for (const auto& [k, v] : metrics)
      if (k == name) return v;
    return std::nullopt;
  }
  void set_left(double v) { left = finite_or_empty(v); }
  void set_right(double v) { right = finite_or_empty(v); }

  static std::optional<double> finite_or_empty(double v) {
    if (std::isfinite(v)) return v;
    return std::nullopt;
  }
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace wtineq
