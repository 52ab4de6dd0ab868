// wdelab: drive experiments from a config file and run gauge self-tests.
// Exit codes: 0 pass, 1 check failure, 2 usage/config error.

#include <cstdio>
#include <fstream>
#include <string>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "wde/experiment.hpp"

namespace {

int gauge_selftest(const std::string& body_path, int samples, std::uint64_t seed) {
  nlohmann::json bj;
  {
    std::ifstream in(body_path);
    if (!in) {
      std::fprintf(stderr, "gauge-selftest: cannot open %s\n", body_path.c_str());
      return 2;
    }
    try {
      in >> bj;
    } catch (const nlohmann::json::exception& e) {
      std::fprintf(stderr, "gauge-selftest: parse error: %s\n", e.what());
      return 2;
    }
  }
  wde::ConvexBody body = wde::body_from_json(bj);
  const int n = body.dim();
  const double rE = body.inner_radius(), RE = body.outer_radius();
  wde::Rng rng(seed);
  double worst = 0.0;
  std::string worst_name = "none";
  const double delta = 0.3;
  auto note = [&](const char* name, double violation) {
    if (violation > worst) {
      worst = violation;
      worst_name = name;
    }
  };
  for (int i = 0; i < samples; ++i) {
    const Eigen::VectorXd xi = rng.cube(n, 10.0);
    const Eigen::VectorXd eta = rng.cube(n, 10.0);
    const double gx = body.gauge(xi), ge = body.gauge(eta);
    // triangle inequality
    note("triangle", body.gauge(xi + eta) - (gx + ge));
    // Lipschitz
    note("lipschitz", std::abs(gx - ge) - (xi - eta).norm() / rE);
    // comparison with the Euclidean norm
    note("comparison_lower", xi.norm() / RE - gx);
    note("comparison_upper", gx - xi.norm() / rE);
    // normalized difference
    if (gx > 1e-9 && ge > 1e-9)
      note("normalized_difference",
           body.gauge(xi / gx - eta / ge) -
               (RE / rE) * 2.0 / gx * body.gauge(xi - eta));
    // G_delta Lipschitz and the inverse bound for G
    note("gdelta_lipschitz",
         (wde::g_delta(body, delta, xi) - wde::g_delta(body, delta, eta)).norm() -
             3.0 * (RE / rE) * (RE / rE) * (xi - eta).norm());
    if (gx >= 1.0 + delta) {
      const double dG =
          (wde::g_delta(body, 0.0, xi) - wde::g_delta(body, 0.0, eta)).norm();
      note("g_inverse",
           (xi - eta).norm() -
               3.0 * (RE / rE) * (RE / rE) * (1.0 + 1.0 / delta) * dG);
    }
    // homogeneity
    const double lam = rng.uniform(0.1, 10.0);
    note("homogeneity", std::abs(body.gauge(lam * xi) - lam * gx));
  }
  std::printf("gauge-selftest: %d samples, worst violation %.3e (%s)\n", samples,
              worst, worst_name.c_str());
  if (worst > 1e-9) {
    std::printf("FAIL\n");
    return 1;
  }
  std::printf("PASS\n");
  return 0;
}

int run_mode(const std::string& config_path, const std::string& out_override,
             std::uint64_t seed, bool verbose, wde::RunMode mode) {
  wde::ExperimentConfig cfg;
  try {
    cfg = wde::load_config(config_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }
  if (seed) cfg.seed = seed;
  const std::string out = out_override.empty() ? cfg.out : out_override;
  try {
    const wde::RunManifest man = wde::run_experiment(cfg, out, mode, verbose);
    for (const auto& s : man.stages)
      std::printf("%-12s %s (%.1f ms)\n", s.name.c_str(), s.status.c_str(),
                  s.wall_ms);
    std::printf("%s\n", man.checks_ok ? "PASS" : "FAIL");
    return man.checks_ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "run error: %s\n", e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for widely degenerate elliptic problems"};
  app.require_subcommand(1);

  std::string config_path, out_dir, body_path;
  std::uint64_t seed = 0;
  int threads = 0, samples = 10000;
  bool verbose = false;
  app.add_option("--threads", threads, "Eigen thread count (0 = default)");
  app.add_flag("--verbose", verbose, "log stage progress to stderr");

  auto* run = app.add_subcommand("run", "full pipeline from a config file");
  run->fallthrough();  // --threads / --verbose may appear after the subcommand
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "output directory (overrides config)");
  run->add_option("--seed", seed, "seed override");

  auto* solve = app.add_subcommand("solve-only", "stages through the solver only");
  solve->fallthrough();
  solve->add_option("--config", config_path)->required();
  solve->add_option("--out", out_dir);
  solve->add_option("--seed", seed);

  auto* report = app.add_subcommand("report-only",
                                    "harness reports from stored solution files");
  report->fallthrough();
  report->add_option("--config", config_path)->required();
  report->add_option("--out", out_dir, "directory holding solution_eps_*.csv");
  report->add_option("--seed", seed);

  auto* self = app.add_subcommand("gauge-selftest", "gauge inequality property suite");
  self->fallthrough();
  self->add_option("--body", body_path, "body description file (JSON)")->required();
  self->add_option("--samples", samples, "random pair count");
  self->add_option("--seed", seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (threads > 0) Eigen::setNbThreads(threads);

  try {
    if (*self) return gauge_selftest(body_path, samples, seed ? seed : 1234);
    if (*run) return run_mode(config_path, out_dir, seed, verbose, wde::RunMode::Full);
    if (*solve)
      return run_mode(config_path, out_dir, seed, verbose, wde::RunMode::SolveOnly);
    if (*report)
      return run_mode(config_path, out_dir, seed, verbose, wde::RunMode::ReportOnly);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
