#include "wtineq/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace wtineq;

namespace {

enum Exit { kPass = 0, kFail = 1, kConfig = 2, kNumeric = 3 };

Json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw ConfigError("", "cannot write '" + p.string() + "'");
  out << text;
}

void emit(const Json& summary, const std::vector<Table>& tables, const std::string& out_dir) {
  if (out_dir.empty()) {
    std::cout << summary.dump(2) << '\n';
    for (const auto& t : tables) std::cout << "\n# " << t.name << ".csv\n" << t.csv();
    return;
  }
  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "report.json", summary.dump(2) + "\n");
  for (const auto& t : tables) write_file(fs::path(out_dir) / (t.name + ".csv"), t.csv());
}

// On a numeric failure a stub report still records what was attempted.
Json failure_stub(const std::string& command, const std::string& kind, const std::string& message) {
  return Json{{"command", command}, {"verdict", "ERROR"}, {"error", {{"kind", kind}, {"message", message}}}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weak transport and concentration inequality checks"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  double tolerance = 0.0;

  std::vector<CLI::App*> subs;
  const std::vector<std::pair<std::string, std::string>> descriptions{
      {"transport", "certified weak transport cost between two measures"},
      {"gamma", "dependence matrix of a Markov chain or process"},
      {"verify", "check one inequality (wti, dual, tsirelson, poincare, talagrand)"},
      {"oracle", "oracle inequality bounds and coverage"},
      {"simulate", "simulate process paths to CSV"}};
  for (const auto& [name, text] : descriptions) {
    auto* sub = app.add_subcommand(name, text);
    sub->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "output directory for report.json and CSV tables");
    sub->add_option("--tolerance", tolerance, "numeric tolerance (overrides the config)");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfig;
  }

  std::string command;
  cli::RunOptions options;
  for (auto* sub : subs) {
    if (!sub->parsed()) continue;
    command = sub->get_name();
    if (sub->count("--seed")) options.seed = seed;
    if (sub->count("--workers")) options.workers = workers;
    if (sub->count("--tolerance")) options.tolerance = tolerance;
  }

  try {
    const Json config = load_config(config_path);
    if (out_dir.empty() && config.is_object() && config.contains("out") && config.at("out").is_string())
      out_dir = config.at("out").get<std::string>();
    const auto result = cli::run(command, config, options);
    const auto summary = cli::summary(result);
    emit(summary, result.tables, out_dir);
    for (const auto& r : result.reports) std::cerr << to_string(r.verdict) << ' ' << r.id << '\n';
    return result.all_passed() ? kPass : kFail;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    try {
      emit(failure_stub(command, "numeric", e.what()), {}, out_dir);
    } catch (const std::exception&) {
    }
    return kNumeric;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumeric;
  }
}
