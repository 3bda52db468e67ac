#pragma once

// Config-driven runner behind the command-line tool. Each command turns a
// validated JSON config into reports and CSV tables; the executable only adds
// argument parsing, file output and exit codes.

#include "wtineq/concentration.hpp"
#include "wtineq/dependence.hpp"
#include "wtineq/io.hpp"
#include "wtineq/oracle.hpp"
#include "wtineq/processes.hpp"
#include "wtineq/transport.hpp"

namespace wtineq::cli {

using T = Field::Type;

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<double> tolerance;
};

struct RunResult {
  std::string command;
  std::vector<ExperimentReport> reports;
  std::vector<Table> tables;
  Json extra = Json::object();

  bool all_passed() const {
    return std::all_of(reports.begin(), reports.end(), [](const ExperimentReport& r) { return r.passed(); });
  }
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"transport", "gamma", "verify", "oracle", "simulate"};
  return names;
}

// ---------------------------------------------------------------------------
// Schemas.

namespace schema {

inline std::vector<Field> common() {
  return {opt("seed", T::Integer), opt("workers", T::Integer), opt("tolerance", T::Number), opt("out", T::String)};
}

inline std::vector<Field> with_common(std::vector<Field> f) {
  for (auto& c : common()) f.push_back(std::move(c));
  return f;
}

inline std::vector<Field> space() {
  return {opt("size", T::Integer), opt("points", T::Array), opt("embedding", T::Array), opt("length", T::Integer)};
}

inline std::vector<Field> chain() {
  return {req("transition", T::Array), opt("origin", T::Integer), req("length", T::Integer)};
}

inline std::vector<Field> process() {
  return {choice("model", {"ar1", "arma", "ar-infinity", "tanh-memory", "finite-chain"}),
          opt("phi", T::Number),
          opt("a", T::Array),
          opt("b", T::Array),
          opt("coefficients", T::Array),
          opt("weights", T::Array),
          opt("truncation", T::Integer),
          opt("transition", T::Array),
          opt("innovation", T::Any)};
}

inline std::vector<Field> sampler() {
  return {choice("kind", {"gaussian", "uniform-cube", "rademacher", "process"}), opt("dim", T::Integer),
          opt("process", T::Object, process()), opt("n", T::Integer), opt("x0", T::Array)};
}

inline std::vector<Field> function() {
  return {choice("kind", {"linear", "max", "l2-norm", "l1-norm", "linf-norm", "shifted-l1", "pair-products",
                          "constant"}),
          opt("a", T::Array),
          opt("center", T::Array),
          opt("value", T::Number),
          opt("scale", T::Number),
          opt("negate", T::Boolean)};
}

inline std::vector<Field> transport() {
  return with_common({req("space", T::Object, space()), req("P", T::Array), req("Q", T::Array), req("p", T::Number),
                      opt("metric", T::Any), opt("markov", T::Boolean), opt("C", T::Number)});
}

inline std::vector<Field> gamma() {
  return with_common({opt("chain", T::Object, chain()), opt("process", T::Object, process()), req("p", T::Number),
                      opt("metric", T::Any), opt("d_prime", T::Any), opt("base_constant", T::Number),
                      opt("horizon", T::Integer), opt("replicates", T::Integer)});
}

inline std::vector<Field> verify(const std::string& inequality) {
  const Field kind = choice("inequality", {"wti", "dual", "tsirelson", "poincare", "talagrand"});
  if (inequality == "wti")
    return with_common({kind, req("chain", T::Object, chain()), req("p", T::Number), opt("metric", T::Any),
                        opt("d_prime", T::Any), opt("C", T::Number), opt("trials", T::Integer),
                        opt("constant_scale", T::Number), opt("refine_rounds", T::Integer),
                        opt("markov", T::Boolean)});
  if (inequality == "dual")
    return with_common({kind, req("space", T::Object, space()), req("P", T::Array), req("p", T::Number),
                        opt("metric", T::Any), opt("C", T::Number), opt("triples", T::Integer),
                        opt("lambda_max", T::Number)});
  if (inequality == "tsirelson" || inequality == "poincare")
    return with_common({kind, req("sampler", T::Object, sampler()), req("function", T::Object, function()),
                        opt("C", T::Number), opt("samples", T::Integer)});
  if (inequality == "talagrand")
    return with_common({kind, choice("variant", {"hamming", "euclidean"}), opt("exact", T::Boolean),
                        opt("sampler", T::Object, sampler()), opt("cube", T::Integer),
                        req("set", T::Object, {choice("kind", {"sum-below"}), req("threshold", T::Number)}),
                        opt("C", T::Number), opt("samples", T::Integer), opt("hull_cap", T::Integer)});
  return {kind};
}

inline std::vector<Field> generator() {
  return {choice("design", {"iid-gaussian", "ar1-design", "autoregression", "rademacher"}), opt("theta", T::Array),
          opt("d", T::Integer), opt("noise_sd", T::Number), opt("phi", T::Number)};
}

inline std::vector<Field> oracle() {
  return with_common({req("generator", T::Object, generator()), choice("bound", {"nonexact", "exact", "residual"}),
                      req("n", T::Integer), opt("replications", T::Integer), opt("eta", T::Number),
                      opt("epsilon", T::Number), opt("C", T::Number), opt("beta", T::Number), opt("M", T::Number),
                      opt("B", T::Number), opt("log_tail", T::Number), choice("risk", {"closed-form", "monte-carlo"}, false)});
}

inline std::vector<Field> simulate() {
  return with_common({req("process", T::Object, process()), req("n", T::Integer), opt("x0", T::Array),
                      opt("paths", T::Integer)});
}

}  // namespace schema

// ---------------------------------------------------------------------------
// Config parsing into library objects.

namespace parse {

inline MetricSpec metric(const Json& cfg, const std::string& key) {
  if (!cfg.contains(key)) return MetricSpec::hamming();
  const auto& j = cfg.at(key);
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "hamming") return MetricSpec::hamming();
    if (s == "euclidean") return MetricSpec::euclidean();
    throw ConfigError(key, "'" + s + "' is not one of: hamming, euclidean");
  }
  validate_object(j, {req("table", T::Array)}, key);
  try {
    return MetricSpec::from_table(get_matrix(j.at("table"), key + ".table"));
  } catch (const ConfigError&) {
    throw;
  } catch (const DomainError& e) {
    throw ConfigError(key + ".table", e.what());
  }
}

inline PathMetric path_metric(const Json& cfg, const std::string& key) {
  if (!cfg.contains(key)) return PathMetric::Euclidean;
  const auto& j = cfg.at(key);
  if (j == "euclidean") return PathMetric::Euclidean;
  if (j == "hamming") return PathMetric::Hamming;
  throw ConfigError(key, "expected \"euclidean\" or \"hamming\"");
}

inline SpacePtr space(const Json& j, const std::string& path) {
  SpacePtr base;
  if (j.contains("points")) {
    std::vector<std::string> ids;
    for (const auto& p : j.at("points")) {
      if (!p.is_string()) throw ConfigError(path + ".points", "expected strings");
      ids.push_back(p.get<std::string>());
    }
    std::optional<DiscreteSpace::Embedding> emb;
    if (j.contains("embedding")) {
      const Matrix e = get_matrix(j.at("embedding"), path + ".embedding");
      DiscreteSpace::Embedding rows(static_cast<std::size_t>(e.rows()));
      for (Eigen::Index r = 0; r < e.rows(); ++r)
        for (Eigen::Index c = 0; c < e.cols(); ++c) rows[static_cast<std::size_t>(r)].push_back(e(r, c));
      emb = std::move(rows);
    }
    base = DiscreteSpace::make(std::move(ids), std::move(emb));
  } else if (j.contains("size")) {
    if (j.contains("embedding")) throw ConfigError(path + ".embedding", "an embedding needs explicit points");
    base = DiscreteSpace::indexed(get_count(j, "size", 0, path));
  } else {
    throw ConfigError(path, "missing required keys: " + path + ".size or " + path + ".points");
  }
  const std::size_t length = get_count(j, "length", 1, path);
  if (length < 1) throw ConfigError(path + ".length", "must be >= 1");
  return DiscreteSpace::power(base, length);
}

inline DiscreteMeasure measure(const SpacePtr& s, const Json& j, const std::string& path) {
  auto w = get_vector(j, path);
  if (w.size() != s->size())
    throw ConfigError(path, "expected " + std::to_string(s->size()) + " weights, got " + std::to_string(w.size()));
  try {
    return DiscreteMeasure(s, std::move(w));
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
}

inline PathMeasure chain(const Json& j, const std::string& path) {
  const Matrix t = get_matrix(j.at("transition"), path + ".transition");
  try {
    return markov_chain(t, get_count(j, "origin", 0, path), get_count(j, "length", 0, path));
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
}

inline InnovationLaw innovation(const Json& j, const std::string& path) {
  if (!j.contains("innovation")) return InnovationLaw::gaussian();
  const auto& v = j.at("innovation");
  const std::string p = path + ".innovation";
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "gaussian") return InnovationLaw::gaussian();
    if (s == "uniform") return InnovationLaw::uniform();
    if (s == "rademacher") return InnovationLaw::rademacher();
    throw ConfigError(p, "'" + s + "' is not one of: gaussian, uniform, rademacher, {truncated-gaussian: c}");
  }
  validate_object(v, {req("truncated-gaussian", T::Number)}, p);
  return InnovationLaw::truncated_gaussian(v.at("truncated-gaussian").get<double>());
}

inline ProcessSpec process(const Json& j, const std::string& path) {
  const auto model = j.at("model").get<std::string>();
  auto need = [&](const char* key) -> const Json& {
    if (!j.contains(key)) throw ConfigError(path, std::string("missing required keys: ") + join_path(path, key));
    return j.at(key);
  };
  const auto law = innovation(j, path);
  const std::size_t trunc = get_count(j, "truncation", 512, path);
  try {
    if (model == "ar1") return ProcessSpec::ar1(need("phi").get<double>(), law);
    if (model == "arma") {
      const Matrix a = get_matrix(need("a"), path + ".a");
      return ProcessSpec::arma(a, law, j.contains("b") ? get_matrix(j.at("b"), path + ".b") : Matrix());
    }
    if (model == "ar-infinity") return ProcessSpec::ar_infinity(get_vector(need("coefficients"), path + ".coefficients"), trunc, law);
    if (model == "tanh-memory") return ProcessSpec::tanh_memory(get_vector(need("weights"), path + ".weights"), trunc, law);
    return ProcessSpec::finite_chain(get_matrix(need("transition"), path + ".transition"));
  } catch (const ConfigError&) {
    throw;
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
}

inline std::pair<Sampler, std::size_t> sampler(const Json& j, const std::string& path) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "process") {
    if (!j.contains("process") || !j.contains("n"))
      throw ConfigError(path, "missing required keys: " + path + ".process, " + path + ".n");
    auto spec = process(j.at("process"), path + ".process");
    const std::size_t n = get_count(j, "n", 0, path);
    Vector x0 = j.contains("x0") ? to_vector(get_vector(j.at("x0"), path + ".x0")) : spec.center;
    if (x0.size() != static_cast<Eigen::Index>(spec.dim)) throw ConfigError(path + ".x0", "wrong dimension");
    const std::size_t dim = n * spec.dim;
    return {process_sampler(std::move(spec), n, std::move(x0)), dim};
  }
  if (!j.contains("dim")) throw ConfigError(path, "missing required keys: " + path + ".dim");
  const std::size_t dim = get_count(j, "dim", 0, path);
  if (dim == 0) throw ConfigError(path + ".dim", "must be >= 1");
  if (kind == "gaussian") return {gaussian_sampler(dim), dim};
  if (kind == "uniform-cube") return {uniform_cube_sampler(dim), dim};
  return {rademacher_sampler(dim), dim};
}

inline TestFunction function(const Json& j, std::size_t dim, const std::string& path) {
  const auto kind = j.at("kind").get<std::string>();
  auto vec_of = [&](const char* key) {
    if (!j.contains(key)) throw ConfigError(path, std::string("missing required keys: ") + join_path(path, key));
    auto v = to_vector(get_vector(j.at(key), join_path(path, key)));
    if (v.size() != static_cast<Eigen::Index>(dim))
      throw ConfigError(join_path(path, key), "expected " + std::to_string(dim) + " entries");
    return v;
  };
  TestFunction f;
  if (kind == "linear") f = TestFunction::linear(vec_of("a"));
  else if (kind == "max") f = TestFunction::max_coordinate();
  else if (kind == "l2-norm") f = TestFunction::euclidean_norm();
  else if (kind == "l1-norm") f = TestFunction::l1_norm();
  else if (kind == "linf-norm") f = TestFunction::linf_norm();
  else if (kind == "shifted-l1") f = TestFunction::shifted_l1(vec_of("center"));
  else if (kind == "pair-products") f = TestFunction::pair_products();
  else f = TestFunction::constant(get_number(j, "value", 0.0));
  if (j.contains("scale")) {
    const double s = j.at("scale").get<double>();
    if (s < 0.0) throw ConfigError(path + ".scale", "must be >= 0");
    f = TestFunction::scaled(f, s);
  }
  if (j.contains("negate") && j.at("negate").get<bool>()) f = TestFunction::negated(f);
  return f;
}

inline RegressionGenerator generator(const Json& j, const std::string& path) {
  const auto design = j.at("design").get<std::string>();
  const double sd = get_number(j, "noise_sd", 1.0);
  try {
    if (design == "autoregression")
      return RegressionGenerator::autoregression(get_count(j, "d", 1, path), get_number(j, "phi", 0.5), sd);
    if (!j.contains("theta")) throw ConfigError(path, "missing required keys: " + path + ".theta");
    const Vector theta = to_vector(get_vector(j.at("theta"), path + ".theta"));
    if (design == "iid-gaussian") return RegressionGenerator::iid_gaussian(theta, sd);
    if (design == "ar1-design") return RegressionGenerator::ar1_design(theta, get_number(j, "phi", 0.5), sd);
    return RegressionGenerator::rademacher(theta, sd);
  } catch (const ConfigError&) {
    throw;
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
}

}  // namespace parse

// ---------------------------------------------------------------------------
// Commands.

namespace detail {

inline std::uint64_t seed_of(const Json& cfg, const RunOptions& o) {
  if (o.seed) return *o.seed;
  return cfg.contains("seed") ? cfg.at("seed").get<std::uint64_t>() : 1;
}
inline unsigned workers_of(const Json& cfg, const RunOptions& o) {
  if (o.workers) return std::max(1u, *o.workers);
  return cfg.contains("workers") ? std::max(1u, cfg.at("workers").get<unsigned>()) : 1u;
}
inline double tolerance_of(const Json& cfg, const RunOptions& o, double fallback) {
  if (o.tolerance) return *o.tolerance;
  return get_number(cfg, "tolerance", fallback);
}

inline double exponent(const Json& cfg) {
  const double p = cfg.at("p").get<double>();
  if (!(p >= 1.0 && p <= 2.0)) throw ConfigError("p", "must lie in [1, 2]");
  return p;
}

inline Table matrix_table(std::string name, const Matrix& m) {
  Table t;
  t.name = std::move(name);
  t.header.push_back("row");
  for (Eigen::Index c = 0; c < m.cols(); ++c) t.header.push_back("c" + std::to_string(c));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<std::string> row{std::to_string(r)};
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(format_double(m(r, c)));
    t.add(std::move(row));
  }
  return t;
}

}  // namespace detail

inline RunResult run_transport(const Json& cfg, const RunOptions& o) {
  validate_object(cfg, schema::transport());
  Stopwatch clock;
  const auto s = parse::space(cfg.at("space"), "space");
  const auto p = parse::measure(s, cfg.at("P"), "P");
  const auto q = parse::measure(s, cfg.at("Q"), "Q");
  const double exponent = detail::exponent(cfg);
  const auto metric = parse::metric(cfg, "metric");
  WeakTransportOptions opt;
  opt.markov = cfg.value("markov", true);
  opt.gap_tolerance = detail::tolerance_of(cfg, o, 1e-4);
  const auto c = weak_transport_cost(p, q, exponent, metric, opt);
  const auto w = wasserstein(p, q, exponent, metric);
  const double kl = kl_divergence(q, p);

  ExperimentReport rep("transport", "weak-transport");
  rep.seed = detail::seed_of(cfg, o);
  rep.input("p", exponent);
  rep.lower = c.lower;
  rep.upper = c.upper;
  rep.metric("gap", c.gap());
  rep.metric("wasserstein", w.value);
  rep.metric("kl", kl);
  rep.metric("iterations", static_cast<double>(c.iterations));
  rep.set_left(c.upper);
  if (cfg.contains("C")) {
    const double cc = cfg.at("C").get<double>();
    if (!(cc > 0.0)) throw ConfigError("C", "must be positive");
    rep.input("C", cc);
    const double bound = std::sqrt(2.0 * cc * kl);
    rep.set_right(bound);
    if (c.upper <= bound + 1e-6) rep.verdict = Verdict::Pass;
    else if (c.lower > bound + 1e-6) rep.verdict = Verdict::Fail;
    else rep.verdict = Verdict::Inconclusive;
  } else {
    rep.verdict = c.gap() <= opt.gap_tolerance ? Verdict::Pass : Verdict::Inconclusive;
    rep.notes.push_back("no C supplied: verdict reports whether the certificate closed");
  }
  if (!c.converged) rep.notes.push_back("certificate gap above tolerance");
  rep.wall_seconds = clock.seconds();
  RunResult out{"transport", {rep}, {}, Json::object()};
  out.extra["alpha"] = to_json(c.alpha);
  return out;
}

inline RunResult run_gamma(const Json& cfg, const RunOptions& o) {
  if (cfg.is_object() && !cfg.contains("chain") && !cfg.contains("process"))
    throw ConfigError("", std::string("missing required keys: chain or process") + (cfg.contains("p") ? "" : ", p"));
  validate_object(cfg, schema::gamma());
  const bool has_chain = cfg.contains("chain"), has_process = cfg.contains("process");
  if (has_chain == has_process) throw ConfigError("", "exactly one of chain, process is required");
  Stopwatch clock;
  const double p = detail::exponent(cfg);
  RunResult out;
  out.command = "gamma";
  if (has_chain) {
    const auto pm = parse::chain(cfg.at("chain"), "chain");
    const auto d = parse::metric(cfg, "metric");
    const auto dp = cfg.contains("d_prime") ? parse::metric(cfg, "d_prime") : d;
    const auto gamma = gamma_from_kernel(pm, p, d, dp);
    const double base = get_number(cfg, "base_constant", 1.0);
    const std::size_t n = gamma.size();
    ExperimentReport rep("gamma", "weak-transport-dependent");
    rep.seed = detail::seed_of(cfg, o);
    rep.input("p", p);
    rep.input("n", static_cast<double>(n));
    rep.input("base_constant", base);
    rep.metric("diagonal", gamma.diagonal);
    rep.metric("norm_1", subordinated_norm(gamma, 1.0));
    rep.metric("norm_2", subordinated_norm(gamma, 2.0));
    rep.metric("norm_inf", subordinated_norm(gamma, kInfinityNorm));
    rep.metric("theorem_constant", theorem_constant(base, gamma, p, n));
    rep.verdict = Verdict::Pass;
    rep.wall_seconds = clock.seconds();
    out.reports.push_back(rep);
    out.tables.push_back(detail::matrix_table("gamma", gamma.values));
    out.extra["gamma"] = to_json(gamma.values);
    return out;
  }
  const auto spec = parse::process(cfg.at("process"), "process");
  GammaEstimateOptions opt;
  opt.metric = parse::path_metric(cfg, "metric");
  opt.workers = detail::workers_of(cfg, o);
  const std::size_t horizon = get_count(cfg, "horizon", 20);
  const std::size_t replicates = get_count(cfg, "replicates", 10000);
  const auto est = estimate_gamma(spec, p, horizon, replicates, detail::seed_of(cfg, o), opt);
  const double base = get_number(cfg, "base_constant", spec.innovation.base_constant(opt.metric));
  const auto gamma = GammaMatrix::stationary(horizon + 1, 1.0, est.gamma, p);
  ExperimentReport rep("gamma", "process-coupling");
  rep.seed = detail::seed_of(cfg, o);
  rep.input("p", p);
  rep.input("horizon", static_cast<double>(horizon));
  rep.input("replicates", static_cast<double>(replicates));
  rep.metric("S", est.s);
  if (horizon >= 6) rep.metric("decay_rate", fitted_decay_rate(est.gamma, std::min<std::size_t>(5, horizon), horizon));
  rep.metric("norm_2", subordinated_norm(gamma, 2.0));
  rep.metric("theorem_constant", theorem_constant(base, gamma, p, horizon + 1));
  rep.notes.push_back("model = " + spec.variant_name() + ", innovation = " + spec.innovation.name());
  rep.verdict = std::isfinite(est.s) ? Verdict::Pass : Verdict::Fail;
  rep.wall_seconds = clock.seconds();
  out.reports.push_back(rep);
  Table t;
  t.name = "gamma";
  t.header = {"k", "gamma", "se"};
  for (std::size_t k = 0; k < horizon; ++k)
    t.add({std::to_string(k + 1), format_double(est.gamma[k]), format_double(est.se[k])});
  out.tables.push_back(std::move(t));
  return out;
}

inline RunResult run_verify(const Json& cfg, const RunOptions& o) {
  if (!cfg.is_object()) throw ConfigError("", "expected an object");
  if (!cfg.contains("inequality")) {
    // Report every missing key of the smallest verify config.
    validate_object(cfg, {choice("inequality", {"wti", "dual", "tsirelson", "poincare", "talagrand"})});
  }
  if (!cfg.at("inequality").is_string()) throw ConfigError("inequality", "expected string");
  const auto which = cfg.at("inequality").get<std::string>();
  validate_object(cfg, schema::verify(which));
  const std::uint64_t seed = detail::seed_of(cfg, o);
  const unsigned workers = detail::workers_of(cfg, o);
  RunResult out;
  out.command = "verify";
  if (which == "wti") {
    const auto pm = parse::chain(cfg.at("chain"), "chain");
    const auto d = parse::metric(cfg, "metric");
    const auto dp = cfg.contains("d_prime") ? parse::metric(cfg, "d_prime") : d;
    WtiOptions opt;
    opt.tolerance = detail::tolerance_of(cfg, o, 1e-6);
    opt.constant_scale = get_number(cfg, "constant_scale", 1.0);
    opt.refine_rounds = get_count(cfg, "refine_rounds", 0);
    opt.markov = cfg.value("markov", true);
    opt.workers = workers;
    out.reports.push_back(verify_wti(pm, detail::exponent(cfg), d, dp, get_number(cfg, "C", 1.0),
                                     get_count(cfg, "trials", 100), seed, opt));
  } else if (which == "dual") {
    const auto s = parse::space(cfg.at("space"), "space");
    if (s->is_product()) throw ConfigError("space.length", "the dual form is checked on a single coordinate");
    const auto p = parse::measure(s, cfg.at("P"), "P");
    const double exponent = detail::exponent(cfg);
    const auto metric = parse::metric(cfg, "metric");
    const double c = get_number(cfg, "C", 1.0);
    const std::size_t triples = get_count(cfg, "triples", 100);
    const double lambda_max = get_number(cfg, "lambda_max", 3.0);
    Stopwatch clock;
    ExperimentReport rep("dual-form", "dual-form");
    rep.seed = seed;
    rep.input("C", c);
    rep.input("p", exponent);
    rep.input("triples", static_cast<double>(triples));
    double worst = 0.0;
    std::size_t failures = 0;
    for (std::size_t t = 0; t < triples; ++t) {
      Rng rng(derive_seed(seed, t));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      std::vector<double> f(s->size()), alpha(s->size());
      for (auto& v : f) v = 2.0 * unit(rng) - 1.0;
      for (auto& v : alpha) v = exponent == 1.0 ? unit(rng) : 2.0 * unit(rng);
      const double lambda = lambda_max * (unit(rng) + 1e-3);
      for (bool inverted : {false, true}) {
        const auto r = dual_form_check(p, c, exponent, metric, f, alpha, lambda, inverted);
        worst = std::max(worst, r.left.value_or(std::numeric_limits<double>::infinity()));
        if (!r.passed()) ++failures;
      }
    }
    rep.set_left(worst);
    rep.set_right(1.0);
    rep.metric("failures", static_cast<double>(failures));
    rep.verdict = failures == 0 ? Verdict::Pass : Verdict::Fail;
    rep.wall_seconds = clock.seconds();
    out.reports.push_back(rep);
  } else if (which == "tsirelson" || which == "poincare") {
    auto [sampler, dim] = parse::sampler(cfg.at("sampler"), "sampler");
    const auto g = parse::function(cfg.at("function"), dim, "function");
    McOptions opt;
    opt.workers = workers;
    const double c = get_number(cfg, "C", 1.0);
    const std::size_t samples = get_count(cfg, "samples", 100000);
    try {
      out.reports.push_back(which == "tsirelson" ? tsirelson_check(sampler, g, c, samples, seed, opt)
                                                 : convex_poincare_check(sampler, g, c, samples, seed, opt));
    } catch (const NumericError&) {
      throw;
    } catch (const DomainError& e) {
      throw ConfigError("function", e.what());
    }
  } else {
    const bool exact = cfg.value("exact", false);
    const auto variant = cfg.at("variant").get<std::string>();
    const double threshold = cfg.at("set").at("threshold").get<double>();
    const double c = get_number(cfg, "C", 1.0);
    if (exact) {
      if (variant != "hamming") throw ConfigError("variant", "exact enumeration is available for hamming only");
      const std::size_t n = get_count(cfg, "cube", 0);
      if (n < 1 || n > 16) throw ConfigError("cube", "expected a cube dimension in [1, 16]");
      const auto cube = DiscreteSpace::power(DiscreteSpace::indexed(2), n);
      auto in_a = [threshold](const std::vector<std::size_t>& x) {
        return static_cast<double>(std::accumulate(x.begin(), x.end(), std::size_t{0})) <= threshold;
      };
      out.reports.push_back(talagrand_exact(DiscreteMeasure::uniform(cube), in_a, c));
    } else {
      if (!cfg.contains("sampler")) throw ConfigError("", "missing required keys: sampler");
      auto [sampler, dim] = parse::sampler(cfg.at("sampler"), "sampler");
      TalagrandOptions opt;
      opt.workers = workers;
      opt.hull_cap = get_count(cfg, "hull_cap", 200);
      auto in_a = [threshold](const Vector& x) { return x.sum() <= threshold; };
      out.reports.push_back(talagrand_check(sampler, in_a, dim, c,
                                            variant == "hamming" ? TalagrandVariant::HammingDT
                                                                 : TalagrandVariant::EuclideanDN,
                                            get_count(cfg, "samples", 100000), seed, opt));
    }
  }
  return out;
}

inline RunResult run_oracle(const Json& cfg, const RunOptions& o) {
  validate_object(cfg, schema::oracle());
  const auto g = parse::generator(cfg.at("generator"), "generator");
  const std::uint64_t seed = detail::seed_of(cfg, o);
  const unsigned workers = detail::workers_of(cfg, o);
  const std::size_t n = get_count(cfg, "n", 0);
  if (n <= g.d) throw ConfigError("n", "must exceed the design dimension");
  const auto oracle = cfg.value("risk", std::string("closed-form")) == "monte-carlo"
                          ? RiskOracle::monte_carlo(g, 100000, derive_seed(seed, 0x0AC1Eu))
                          : RiskOracle::closed_form(g);
  OracleParams params;
  params.eta = get_number(cfg, "eta", 0.1);
  params.epsilon = get_number(cfg, "epsilon", 0.05);
  params.c = get_number(cfg, "C", 1.0);
  params.beta = get_number(cfg, "beta", static_cast<double>(n) * params.eta);
  params.m = get_number(cfg, "M", 1.0);
  params.b = get_number(cfg, "B", 0.0);
  if (cfg.contains("log_tail")) params.log_tail = cfg.at("log_tail").get<double>();
  const auto bound = cfg.at("bound").get<std::string>();
  RunResult out;
  out.command = "oracle";
  if (bound == "residual") {
    out.reports.push_back(theorem_io_residual(g, oracle, params, n, get_count(cfg, "replications", 1000), seed, workers));
    return out;
  }
  CoverageOptions opt;
  opt.workers = workers;
  auto res = coverage_experiment(g, oracle, params, bound == "exact" ? OracleBound::Exact : OracleBound::Nonexact, n,
                                 get_count(cfg, "replications", 500), seed, opt);
  Table t;
  t.name = "replications";
  t.header = {"replication", "seed", "risk", "bound", "hit"};
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    const auto& r = res.rows[i];
    t.add({std::to_string(i), std::to_string(r.seed), format_double(r.risk), format_double(r.bound), r.hit ? "1" : "0"});
  }
  out.reports.push_back(std::move(res.report));
  out.tables.push_back(std::move(t));
  return out;
}

inline RunResult run_simulate(const Json& cfg, const RunOptions& o) {
  validate_object(cfg, schema::simulate());
  const auto spec = parse::process(cfg.at("process"), "process");
  const std::size_t n = get_count(cfg, "n", 0);
  if (n < 1) throw ConfigError("n", "must be >= 1");
  const std::size_t paths = get_count(cfg, "paths", 1);
  const Vector x0 = cfg.contains("x0") ? to_vector(get_vector(cfg.at("x0"), "x0")) : spec.center;
  if (x0.size() != static_cast<Eigen::Index>(spec.dim)) throw ConfigError("x0", "wrong dimension");
  const std::uint64_t seed = detail::seed_of(cfg, o);
  RunResult out;
  out.command = "simulate";
  Table t;
  t.name = "paths";
  t.header = {"path", "t"};
  for (std::size_t j = 0; j < spec.dim; ++j) t.header.push_back("x" + std::to_string(j));
  for (std::size_t k = 0; k < paths; ++k) {
    const auto path = simulate(spec, n, x0, derive_seed(seed, k));
    for (std::size_t s = 0; s < path.size(); ++s) {
      std::vector<std::string> row{std::to_string(k), std::to_string(s + 1)};
      for (Eigen::Index j = 0; j < path[s].size(); ++j) row.push_back(format_double(path[s](j)));
      t.add(std::move(row));
    }
  }
  out.tables.push_back(std::move(t));
  out.extra["paths"] = paths;
  out.extra["n"] = n;
  return out;
}

inline RunResult run(const std::string& command, const Json& cfg, const RunOptions& options = {}) {
  if (command == "transport") return run_transport(cfg, options);
  if (command == "gamma") return run_gamma(cfg, options);
  if (command == "verify") return run_verify(cfg, options);
  if (command == "oracle") return run_oracle(cfg, options);
  if (command == "simulate") return run_simulate(cfg, options);
  throw ConfigError("", "unknown command '" + command + "'");
}

/// Summary document written as report.json.
inline Json summary(const RunResult& r) {
  Json reports = Json::array();
  for (const auto& rep : r.reports) reports.push_back(to_json(rep));
  Json tables = Json::array();
  for (const auto& t : r.tables) tables.push_back(t.name + ".csv");
  return Json{{"command", r.command},
              {"verdict", r.reports.empty() ? "PASS" : (r.all_passed() ? "PASS" : "FAIL")},
              {"reports", reports},
              {"tables", tables},
              {"extra", r.extra}};
}

}  // namespace wtineq::cli
