#pragma once

// Experiment driver: stages body -> integrand -> regularize -> solve -> harness
// with CSV artifacts and a JSON manifest. Used by the CLI and by tests.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wde/config.hpp"
#include "wde/csv.hpp"
#include "wde/harness.hpp"
#include "wde/solver.hpp"

namespace wde {

struct StageRecord {
  std::string name;
  std::string status;  // "pass", "fail: …", "skipped"
  double wall_ms = 0.0;
};

struct RunManifest {
  std::string config_hash;
  std::vector<StageRecord> stages;
  std::vector<std::string> outputs;
  bool checks_ok = true;

  void save(const std::string& path) const {
    nlohmann::json j;
    j["config_hash"] = config_hash;
    j["checks_ok"] = checks_ok;
    j["stages"] = nlohmann::json::array();
    for (const auto& s : stages)
      j["stages"].push_back({{"name", s.name}, {"status", s.status}, {"wall_ms", s.wall_ms}});
    j["outputs"] = outputs;
    std::ofstream out(path);
    out << j.dump(2) << "\n";
  }
};

enum class RunMode { Full, SolveOnly, ReportOnly };

namespace detail {

class StageTimer {
 public:
  StageTimer() : t0_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

inline Eigen::VectorXd sample_nodes(const Grid& g, const AnalyticField& f) {
  Eigen::VectorXd v(g.node_count());
  for (int i = 0; i < g.node_count(); ++i) v[i] = f.value(g.node_coord(i));
  return v;
}

}  // namespace detail

inline RunManifest run_experiment(const ExperimentConfig& cfg,
                                  const std::string& out_dir,
                                  RunMode mode = RunMode::Full,
                                  bool verbose = false) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  RunManifest man;
  man.config_hash = config_hash(cfg.raw);
  auto log = [&](const std::string& s) {
    if (verbose) std::fprintf(stderr, "[wdelab] %s\n", s.c_str());
  };
  auto record = [&](const std::string& name, const std::string& status, double ms) {
    man.stages.push_back({name, status, ms});
    if (status.rfind("fail", 0) == 0) man.checks_ok = false;
    log(name + ": " + status);
  };
  auto out_path = [&](const std::string& f) {
    man.outputs.push_back(f);
    return (fs::path(out_dir) / f).string();
  };

  // stage: body
  detail::StageTimer t_body;
  const ConvexBody& body = cfg.body;
  record("body", "pass", t_body.ms());

  // stage: integrand
  detail::StageTimer t_int;
  Integrand F = cfg.make_integrand();
  record("integrand", "pass", t_int.ms());

  // stage: regularize (K from the datum's gradient sup plus margin)
  detail::StageTimer t_reg;
  Grid grid = build_grid(cfg.lo, cfg.hi, cfg.h);
  const AnalyticField gfun = cfg.g_field();
  const AnalyticField ffun = cfg.f_field();
  double K = cfg.K_override;
  if (K <= 0.0) {
    double s = 0.0;
    for (int i = 0; i < grid.node_count(); ++i)
      s = std::max(s, gfun.grad(grid.node_coord(i)).norm());
    K = std::max(s, 0.1) * cfg.K_margin;
  }
  std::vector<RegularizedIntegrand> regs;
  for (double eps : cfg.epsilons) regs.push_back(assemble(F, K, eps));
  record("regularize", "pass", t_reg.ms());

  // stage: solve (or read back solutions in report-only mode)
  detail::StageTimer t_solve;
  const Eigen::VectorXd f_nodes = detail::sample_nodes(grid, ffun);
  const Eigen::VectorXd g_nodes = detail::sample_nodes(grid, gfun);
  std::vector<DiscreteSolution> sols;
  std::string solve_status = "pass";
  try {
    for (size_t i = 0; i < cfg.epsilons.size(); ++i) {
      const std::string fname = "solution_eps_" + std::to_string(i) + ".csv";
      if (mode == RunMode::ReportOnly) {
        DiscreteSolution s;
        s.grid = &grid;
        s.epsilon = cfg.epsilons[i];
        s.f = f_nodes;
        s.u = read_solution_values((fs::path(out_dir) / fname).string());
        if (s.u.size() != grid.node_count())
          throw std::runtime_error("report-only: solution file does not match grid");
        sols.push_back(std::move(s));
      } else {
        sols.push_back(solve_dirichlet(regs[i], grid, f_nodes, g_nodes, cfg.tol));
        if (cfg.write_solutions) write_solution(out_path(fname), sols.back());
      }
    }
  } catch (const std::exception& e) {
    record("solve", std::string("fail: ") + e.what(), t_solve.ms());
    man.save((fs::path(out_dir) / "manifest.json").string());
    return man;
  }
  // max-principle check asserted for f == 0 runs
  bool f_zero = true;
  for (int i = 0; i < f_nodes.size(); ++i)
    if (f_nodes[i] != 0.0) f_zero = false;
  if (f_zero) {
    for (const auto& s : sols)
      if (!max_principle_check(s).ok) solve_status = "fail: maximum principle";
  }
  record("solve", solve_status, t_solve.ms());

  // stage: harness
  detail::StageTimer t_h;
  std::string harness_status = "pass";
  const int n = grid.dim();
  Eigen::VectorXd x0 = (cfg.lo + cfg.hi) / 2.0;
  double half = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) half = std::min(half, (cfg.hi[k] - cfg.lo[k]) / 2.0);
  const double rho = half / 2.0;
  const auto dirs = body.dual_boundary_directions(cfg.direction_count);
  const DiscreteSolution& probe = sols.back();  // smallest-eps convention: put
  // the epsilon list in decreasing order in configs

  {  // apriori.csv (always)
    CsvWriter w(out_path("apriori.csv"));
    w.row({"epsilon", "l2_ratio", "hessian_ratio", "sup_ratio"});
    for (const auto& r : apriori_report(sols, g_nodes))
      w.row({fmt_g17(r.epsilon), fmt_g17(r.l2_ratio), fmt_g17(r.hessian_ratio),
             fmt_g17(r.sup_ratio)});
  }

  const bool do_harness = mode != RunMode::SolveOnly;
  if (do_harness && cfg.harness.cascade) {
    BallWindow top(grid, x0, rho);
    {  // regime.csv: nu sensitivity on the top window
      CsvWriter w(out_path("regime.csv"));
      w.row({"delta", "nu", "direction", "ex", "ey", "fraction", "label"});
      for (double delta : cfg.deltas) {
        std::vector<int> cells2;
        double sup2 = 0.0;
        for (int c = 0; c < grid.cell_count(); ++c)
          if ((grid.cell_center(c) - x0).norm() <= 2 * rho)
            sup2 = std::max(sup2, body.gauge(probe.gradient_at(c)));
        const double mu = std::max(sup2 - (1.0 + delta), 1e-6);
        for (double nu : {0.25, 0.125, 0.0625}) {
          const RegimeState st = level_measures(probe, top, delta, mu, nu, dirs);
          for (size_t d = 0; d < dirs.size(); ++d)
            w.row({fmt_g17(delta), fmt_g17(nu), std::to_string(d),
                   fmt_g17(dirs[d][0]), fmt_g17(n > 1 ? dirs[d][1] : 0.0),
                   fmt_g17(st.fractions[d]),
                   st.label == Regime::NonDegenerate ? "nondegenerate" : "degenerate"});
        }
      }
    }
    {  // cascade.csv
      CsvWriter w(out_path("cascade.csv"));
      w.row({"delta", "step", "rho", "mu", "label", "excess", "sup_G", "sup_check",
             "excess_ratio", "min_gauge", "lower_check", "kappa", "alpha_delta",
             "alpha_hat"});
      for (double delta : cfg.deltas) {
        double sup2 = 0.0;
        for (int c = 0; c < grid.cell_count(); ++c)
          if ((grid.cell_center(c) - x0).norm() <= 2 * rho)
            sup2 = std::max(sup2, body.gauge(probe.gradient_at(c)));
        const double mu = std::max(sup2 - (1.0 + delta), 1e-6);
        const CascadeTrace tr = cascade(probe, body, x0, rho, delta, mu, cfg.kappa,
                                        cfg.nu, cfg.cascade_steps, dirs);
        for (size_t i = 0; i < tr.steps.size(); ++i) {
          const auto& st = tr.steps[i];
          if (!st.sup_check || !st.lower_check) harness_status = "fail: cascade check";
          w.row({fmt_g17(delta), std::to_string(i), fmt_g17(st.rho), fmt_g17(st.mu),
                 st.label == Regime::NonDegenerate ? "nondegenerate" : "degenerate",
                 fmt_g17(st.excess_value), fmt_g17(st.sup_G),
                 st.sup_check ? "1" : "0", fmt_g17(st.excess_ratio),
                 fmt_g17(st.min_gauge), st.lower_check ? "1" : "0",
                 fmt_g17(tr.kappa), fmt_g17(tr.alpha_delta), fmt_g17(tr.alpha_hat)});
        }
      }
    }
  }

  if (do_harness && cfg.harness.convergence) {
    CsvWriter w(out_path("convergence.csv"));
    w.row({"delta", "i", "j", "eps_i", "eps_j", "distance"});
    for (double delta : cfg.deltas) {
      const ConvergenceTable t = epsilon_convergence(sols, body, delta);
      for (size_t a = 0; a + 1 < t.consecutive.size(); ++a)
        if (t.consecutive[a + 1] > t.consecutive[a] * 1.05 + 1e-12)
          harness_status = "fail: L2 convergence not Cauchy";
      const int m = static_cast<int>(t.epsilons.size());
      for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
          w.row({fmt_g17(delta), std::to_string(i), std::to_string(j),
                 fmt_g17(t.epsilons[i]), fmt_g17(t.epsilons[j]),
                 fmt_g17(t.distances(i, j))});
    }
  }

  if (do_harness && cfg.harness.continuity) {
    CsvWriter w(out_path("continuity.csv"));
    w.row({"field", "radius", "omega", "alpha_hat", "alpha_band", "C_hat", "flat"});
    Eigen::MatrixXd du(grid.cell_count(), n);
    for (int c = 0; c < grid.cell_count(); ++c)
      du.row(c) = probe.gradient_at(c).transpose();
    std::vector<double> radii;
    for (int i = 0; i < 8; ++i)
      radii.push_back(rho * std::pow(10.0, -1.0 + i / 7.0));
    auto emit = [&](const std::string& name, const Eigen::MatrixXd& field,
                    const std::function<double(const Eigen::VectorXd&)>& Kf) {
      const ContinuityReport rep = continuity_report(grid, field, radii, name, Kf);
      for (size_t i = 0; i < rep.radii.size(); ++i)
        w.row({rep.field_name, fmt_g17(rep.radii[i]), fmt_g17(rep.omega[i]),
               fmt_g17(rep.alpha_hat), fmt_g17(rep.alpha_band), fmt_g17(rep.C_hat),
               rep.flat ? "1" : "0"});
    };
    for (double delta : cfg.deltas) {
      Eigen::MatrixXd gd(grid.cell_count(), n);
      for (int c = 0; c < grid.cell_count(); ++c)
        gd.row(c) = g_delta(body, delta, probe.gradient_at(c)).transpose();
      emit("Gdelta(Du).delta=" + fmt_g17(delta), gd, nullptr);
      // per-cell delta-limit bound |G_delta - G| <= delta / r_E
      double worst = 0.0;
      for (int c = 0; c < grid.cell_count(); ++c)
        worst = std::max(worst, (g_delta(body, delta, probe.gradient_at(c)) -
                                 g_delta(body, 0.0, probe.gradient_at(c)))
                                    .norm());
      if (worst > delta / body.inner_radius() + 1e-12)
        harness_status = "fail: Gdelta limit bound";
    }
    emit("G(Du)", du, [&body](const Eigen::VectorXd& xi) {
      return g_delta(body, 0.0, xi).norm();
    });
    emit("K1(Du)", du, K1(body));
    emit("K2(Du)", du, K2(body));
  }

  if (do_harness && cfg.harness.subsolution) {
    CsvWriter w(out_path("subsolution.csv"));
    w.row({"delta", "k", "tau", "lhs", "rhs1", "measure", "ratio", "empty"});
    BallWindow top(grid, x0, rho);
    for (double delta : cfg.deltas) {
      double vmax = 0.0;
      for (int c : top.cells()) {
        const double t = probe.gradient_at(c).dot(dirs[0]) - (1.0 + delta);
        vmax = std::max(vmax, t > 0 ? t * t : 0.0);
      }
      std::vector<double> ks;
      for (int i = 0; i < 8; ++i) ks.push_back(vmax * i / 8.0);
      for (const auto& r :
           subsolution_energy_check(probe, top, delta, dirs[0], ks, cfg.sigma))
        w.row({fmt_g17(delta), fmt_g17(r.k), fmt_g17(r.tau), fmt_g17(r.lhs),
               fmt_g17(r.rhs1), fmt_g17(r.measure), fmt_g17(r.ratio),
               r.empty ? "1" : "0"});
    }
  }

  record("harness", mode == RunMode::SolveOnly ? "skipped" : harness_status,
         t_h.ms());
  man.save((std::filesystem::path(out_dir) / "manifest.json").string());
  return man;
}

}  // namespace wde
