#pragma once

// Regularity harness: excess, level-set measures, regime classification, the
// cascade over shrinking balls and levels, eps-convergence of G_delta(Du_eps),
// oscillation/continuity reports and the standalone iteration lemmas.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wde/convex_body.hpp"
#include "wde/solver.hpp"

namespace wde {

class BallWindow {
 public:
  // B_{2 rho}(x0) must fit in the grid box and B_{rho/2} must contain >= 8
  // cell centers
  BallWindow(const Grid& grid, Eigen::VectorXd x0, double rho)
      : grid_(&grid), x0_(std::move(x0)), rho_(rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("window: rho must be positive");
    for (int k = 0; k < grid.dim(); ++k)
      if (x0_[k] - 2 * rho < grid.lo()[k] - 1e-12 ||
          x0_[k] + 2 * rho > grid.hi()[k] + 1e-12)
        throw std::invalid_argument("window: B_{2rho} leaves the grid box");
    int inner = 0;
    for (int c = 0; c < grid.cell_count(); ++c) {
      const double d = (grid.cell_center(c) - x0_).norm();
      if (d <= rho) cells_.push_back(c);
      if (d <= rho / 2.0) ++inner;
    }
    if (inner < 8)
      throw std::invalid_argument("window: fewer than 8 cells inside B_{rho/2}");
  }

  const Grid& grid() const { return *grid_; }
  const Eigen::VectorXd& center() const { return x0_; }
  double rho() const { return rho_; }
  const std::vector<int>& cells() const { return cells_; }

 private:
  const Grid* grid_;
  Eigen::VectorXd x0_;
  double rho_;
  std::vector<int> cells_;
};

// mean over contained cells of |Du - (Du)|^2
inline double excess(const DiscreteSolution& sol, const BallWindow& w) {
  if (sol.grid != &w.grid())
    throw std::invalid_argument("excess: window belongs to another grid");
  const int n = sol.grid->dim();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  for (int c : w.cells()) mean += sol.gradient_at(c);
  mean /= static_cast<double>(w.cells().size());
  double s = 0.0;
  for (int c : w.cells()) s += (sol.gradient_at(c) - mean).squaredNorm();
  return s / static_cast<double>(w.cells().size());
}

enum class Regime { NonDegenerate, Degenerate };

struct RegimeState {
  double delta = 0, mu = 0, nu = 0;
  std::vector<double> fractions;  // per direction: |B_rho ∩ {…}| / |B_rho|
  Regime label = Regime::Degenerate;
  int witness_direction = -1;  // a direction certifying NonDegenerate, if any
};

// fraction of the window where the directional derivative exceeds the level
// (1+delta) + (1-nu) mu; ties do NOT exceed (strict inequality).
inline RegimeState level_measures(const DiscreteSolution& sol, const BallWindow& w,
                                  double delta, double mu, double nu,
                                  const std::vector<Eigen::VectorXd>& directions) {
  if (w.cells().empty()) throw std::invalid_argument("level_measures: empty window");
  if (!(nu > 0.0 && nu <= 0.25))
    throw std::invalid_argument("level_measures: nu must lie in (0, 1/4]");
  RegimeState st;
  st.delta = delta;
  st.mu = mu;
  st.nu = nu;
  const double thr = (1.0 + delta) + (1.0 - nu) * mu;
  for (size_t d = 0; d < directions.size(); ++d) {
    int cnt = 0;
    for (int c : w.cells())
      if (sol.gradient_at(c).dot(directions[d]) > thr) ++cnt;
    const double frac = static_cast<double>(cnt) / w.cells().size();
    st.fractions.push_back(frac);
    if (1.0 - frac < nu && st.witness_direction < 0)
      st.witness_direction = static_cast<int>(d);
  }
  st.label = st.witness_direction >= 0 ? Regime::NonDegenerate : Regime::Degenerate;
  return st;
}

inline double sup_gauge(const DiscreteSolution& sol, const ConvexBody& body,
                        const std::vector<int>& cells) {
  double s = 0.0;
  for (int c : cells) s = std::max(s, body.gauge(sol.gradient_at(c)));
  return s;
}

struct CascadeStep {
  double rho = 0, mu = 0;
  Regime label = Regime::Degenerate;
  double excess_value = 0;
  // degenerate branch
  double sup_G = std::numeric_limits<double>::quiet_NaN();
  bool sup_check = true;  // sup |G_delta(Du)|_E on B_{rho_{i+1}} <= kappa mu_i
  // non-degenerate branch
  double excess_ratio = std::numeric_limits<double>::quiet_NaN();  // theta = 1/2
  double min_gauge = std::numeric_limits<double>::quiet_NaN();
  bool lower_check = true;  // min |Du|_E on B_{rho/2} >= 1 + delta + mu/4
};

struct CascadeTrace {
  std::vector<CascadeStep> steps;
  double kappa = 0, delta = 0, alpha_delta = 0;
  double alpha_hat = std::numeric_limits<double>::quiet_NaN();
  bool truncated = false;
  bool switched = false;  // entered excess tracking
};

namespace detail {

inline double ols_slope(const std::vector<double>& lx, const std::vector<double>& ly) {
  const size_t m = lx.size();
  double mx = 0, my = 0;
  for (size_t i = 0; i < m; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  return sxx > 0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

// The shrinking-ball iteration: rho_i = rho / 2^i, mu_i = kappa^i mu. While
// every direction's near-supremum set is small (degenerate), the supremum of
// |G_delta(Du)|_E must drop to kappa mu_i on the next ball; once some
// direction certifies non-degeneracy the trace switches to excess-decay
// tracking (theta = 1/2) plus the gradient lower bound on B_{rho/2}.
inline CascadeTrace cascade(const DiscreteSolution& sol, const ConvexBody& body,
                            const Eigen::VectorXd& x0, double rho, double delta,
                            double mu, double kappa, double nu, int max_steps,
                            const std::vector<Eigen::VectorXd>& directions) {
  if (!(kappa > 0.0 && kappa < 1.0))
    throw std::invalid_argument("cascade: kappa must lie in (0,1)");
  CascadeTrace tr;
  tr.kappa = kappa;
  tr.delta = delta;
  tr.alpha_delta = -std::log(kappa) / std::log(2.0);
  double rho_i = rho, mu_i = mu;
  bool tracking_excess = false;
  for (int i = 0; i < max_steps; ++i) {
    std::optional<BallWindow> w;
    try {
      w.emplace(*sol.grid, x0, rho_i);
    } catch (const std::invalid_argument&) {
      tr.truncated = true;
      break;
    }
    CascadeStep st;
    st.rho = rho_i;
    st.mu = mu_i;
    st.excess_value = excess(sol, *w);
    if (!tracking_excess) {
      const RegimeState rs = level_measures(sol, *w, delta, mu_i, nu, directions);
      st.label = rs.label;
    } else {
      st.label = Regime::NonDegenerate;
    }
    if (st.label == Regime::Degenerate) {
      std::vector<int> half;
      for (int c : w->cells())
        if ((sol.grid->cell_center(c) - x0).norm() <= rho_i / 2.0) half.push_back(c);
      double s = 0.0;
      for (int c : half)
        s = std::max(s, body.gauge(g_delta(body, delta, sol.gradient_at(c))));
      st.sup_G = s;
      st.sup_check = s <= kappa * mu_i + 1e-12;
    } else {
      tr.switched = true;
      tracking_excess = true;
      try {
        BallWindow wh(*sol.grid, x0, rho_i / 2.0);
        st.excess_ratio =
            st.excess_value > 0 ? excess(sol, wh) / st.excess_value
                                : std::numeric_limits<double>::quiet_NaN();
        st.min_gauge = std::numeric_limits<double>::infinity();
        for (int c : wh.cells())
          st.min_gauge = std::min(st.min_gauge, body.gauge(sol.gradient_at(c)));
        st.lower_check = st.min_gauge >= 1.0 + delta + mu_i / 4.0 - 1e-9;
      } catch (const std::invalid_argument&) {
        tr.truncated = true;
        tr.steps.push_back(st);
        break;
      }
    }
    tr.steps.push_back(st);
    rho_i /= 2.0;
    mu_i *= kappa;
  }
  // fitted decay exponent: sup-based while cascading, excess-based afterwards
  std::vector<double> lx, ly;
  for (const auto& st : tr.steps) {
    if (tr.switched) {
      if (st.label == Regime::NonDegenerate && st.excess_value > 1e-300) {
        lx.push_back(std::log(st.rho));
        ly.push_back(0.5 * std::log(st.excess_value));
      }
    } else if (std::isfinite(st.sup_G) && st.sup_G > 1e-300) {
      lx.push_back(std::log(st.rho));
      ly.push_back(std::log(st.sup_G));
    }
  }
  if (lx.size() >= 2) tr.alpha_hat = detail::ols_slope(lx, ly);
  return tr;
}

struct ConvergenceTable {
  std::vector<double> epsilons;
  Eigen::MatrixXd distances;          // pairwise L2 over cells
  std::vector<double> consecutive;    // d(eps_i, eps_{i+1})
};

inline ConvergenceTable epsilon_convergence(
    const std::vector<DiscreteSolution>& sols, const ConvexBody& body,
    double delta) {
  if (sols.empty()) throw std::invalid_argument("epsilon_convergence: no solutions");
  const Grid& g = *sols.front().grid;
  for (const auto& s : sols)
    if (s.grid != &g)
      throw std::invalid_argument("epsilon_convergence: grids must match");
  const int m = static_cast<int>(sols.size());
  const double vol = g.cell_volume();
  std::vector<Eigen::MatrixXd> fields;
  for (const auto& s : sols) {
    Eigen::MatrixXd f(g.cell_count(), g.dim());
    for (int c = 0; c < g.cell_count(); ++c)
      f.row(c) = g_delta(body, delta, s.gradient_at(c)).transpose();
    fields.push_back(std::move(f));
  }
  ConvergenceTable t;
  t.distances.setZero(m, m);
  for (const auto& s : sols) t.epsilons.push_back(s.epsilon);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      const double d = std::sqrt(vol * (fields[i] - fields[j]).squaredNorm());
      t.distances(i, j) = t.distances(j, i) = d;
    }
  for (int i = 0; i + 1 < m; ++i) t.consecutive.push_back(t.distances(i, i + 1));
  return t;
}

struct ContinuityReport {
  std::string field_name;
  std::vector<double> radii;
  std::vector<double> omega;  // max oscillation over sampled windows per radius
  double alpha_hat = std::numeric_limits<double>::quiet_NaN();
  double alpha_band = std::numeric_limits<double>::quiet_NaN();  // +- band
  double C_hat = std::numeric_limits<double>::quiet_NaN();
  bool flat = false;
};

// built-in scalar maps vanishing on E
inline std::function<double(const Eigen::VectorXd&)> K1(const ConvexBody& body) {
  return [&body](const Eigen::VectorXd& xi) {
    return std::max(body.gauge(xi) - 1.0, 0.0);
  };
}
inline std::function<double(const Eigen::VectorXd&)> K2(const ConvexBody& body) {
  return [&body](const Eigen::VectorXd& xi) { return g_delta(body, 0.0, xi).norm(); };
}

// oscillation-vs-radius table with a log-log OLS fit; the same center lattice
// is used for every radius so omega(r) is non-decreasing by construction
inline ContinuityReport continuity_report(
    const Grid& grid, const Eigen::MatrixXd& cell_field,
    const std::vector<double>& radii, const std::string& name,
    const std::function<double(const Eigen::VectorXd&)>& K = nullptr) {
  if (radii.size() < 3)
    throw std::invalid_argument("continuity_report: need at least 3 radii");
  if (cell_field.rows() != grid.cell_count())
    throw std::invalid_argument("continuity_report: field does not match the grid");
  const double rmax = *std::max_element(radii.begin(), radii.end());
  const int n = grid.dim();
  for (int k = 0; k < n; ++k)
    if (grid.hi()[k] - grid.lo()[k] < 2 * rmax + 2 * grid.h())
      throw std::invalid_argument("continuity_report: radius exceeds the grid box");

  Eigen::MatrixXd field = cell_field;
  if (K) {
    field.resize(grid.cell_count(), 1);
    for (int c = 0; c < grid.cell_count(); ++c)
      field(c, 0) = K(cell_field.row(c).transpose());
  }

  // center lattice on the region where the largest window still fits
  std::vector<Eigen::VectorXd> centers;
  const int per_axis = 5;
  std::vector<int> idx(n, 0);
  while (true) {
    Eigen::VectorXd x(n);
    for (int k = 0; k < n; ++k) {
      const double a = grid.lo()[k] + rmax, b = grid.hi()[k] - rmax;
      x[k] = a + (b - a) * idx[k] / (per_axis - 1.0);
    }
    centers.push_back(x);
    int k = 0;
    while (k < n && ++idx[k] == per_axis) idx[k++] = 0;
    if (k == n) break;
  }

  ContinuityReport rep;
  rep.field_name = name;
  std::vector<double> rs = radii;
  std::sort(rs.begin(), rs.end());
  for (double r : rs) {
    double worst = 0.0;
    for (const auto& x : centers) {
      Eigen::VectorXd mx, mn;
      bool first = true;
      for (int c = 0; c < grid.cell_count(); ++c) {
        if ((grid.cell_center(c) - x).norm() > r) continue;
        const Eigen::VectorXd v = field.row(c).transpose();
        if (first) {
          mx = mn = v;
          first = false;
        } else {
          mx = mx.cwiseMax(v);
          mn = mn.cwiseMin(v);
        }
      }
      if (!first) worst = std::max(worst, (mx - mn).norm());
    }
    rep.radii.push_back(r);
    rep.omega.push_back(worst);
  }

  std::vector<double> lx, ly;
  for (size_t i = 0; i < rep.radii.size(); ++i)
    if (rep.omega[i] > 1e-14) {
      lx.push_back(std::log(rep.radii[i]));
      ly.push_back(std::log(rep.omega[i]));
    }
  if (lx.size() < 2) {
    rep.flat = true;
    return rep;
  }
  rep.alpha_hat = detail::ols_slope(lx, ly);
  double mx = 0, my = 0;
  for (size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= lx.size();
  my /= ly.size();
  rep.C_hat = std::exp(my - rep.alpha_hat * mx);
  double ss = 0, sxx = 0;
  for (size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (my + rep.alpha_hat * (lx[i] - mx));
    ss += e * e;
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (lx.size() > 2 && sxx > 0)
    rep.alpha_band = 2.0 * std::sqrt(ss / (lx.size() - 2) / sxx);
  return rep;
}

struct GeometricLemmaResult {
  bool converged = false;
  std::vector<double> trace;
};

// Y_{i+1} = C b^i Y_i^{1+kappa}, iterated in log space to survive blow-up;
// converged when Y_steps < 1e-12. Threshold Y_0 <= C^{-1/kappa} b^{-1/kappa^2}
// guarantees convergence.
inline GeometricLemmaResult geometric_lemma_check(double Y0, double C, double b,
                                                  double kappa, int steps) {
  if (!(C > 0.0 && kappa > 0.0 && b > 1.0))
    throw std::invalid_argument("geometric_lemma_check: need C, kappa > 0 and b > 1");
  GeometricLemmaResult r;
  r.trace.push_back(Y0);
  if (Y0 == 0.0) {
    r.converged = true;
    return r;
  }
  double y = std::log(Y0);
  for (int i = 0; i < steps; ++i) {
    y = std::log(C) + i * std::log(b) + (1.0 + kappa) * y;
    r.trace.push_back(y < 700.0 ? std::exp(y) : std::numeric_limits<double>::infinity());
  }
  r.converged = y < std::log(1e-12);
  return r;
}

struct IterationLemmaResult {
  bool holds = false;         // hypothesis verified on all sample pairs
  double C_tilde = 0.0;       // max observed conclusion ratio
};

// phi sampled at increasing rho values in [R0, R1]; hypothesis
// phi(rho) <= eta phi(r) + A/(r-rho)^alpha + B/(r-rho)^beta + C for rho < r
inline IterationLemmaResult iteration_lemma_check(
    const std::vector<double>& rho, const std::vector<double>& phi, double eta,
    double A, double B, double C, double alpha, double beta) {
  if (!(eta > 0.0 && eta < 1.0))
    throw std::invalid_argument("iteration_lemma_check: eta must lie in (0,1)");
  if (!(alpha >= beta && beta >= 0.0))
    throw std::invalid_argument("iteration_lemma_check: need alpha >= beta >= 0");
  if (rho.size() != phi.size() || rho.size() < 2)
    throw std::invalid_argument("iteration_lemma_check: bad sample arrays");
  for (double v : phi)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("iteration_lemma_check: phi must be non-negative");
  IterationLemmaResult res;
  res.holds = true;
  for (size_t i = 0; i < rho.size(); ++i)
    for (size_t j = i + 1; j < rho.size(); ++j) {
      const double d = rho[j] - rho[i];
      if (!(d > 0.0)) continue;
      const double bound = eta * phi[j] + A / std::pow(d, alpha) +
                           (beta > 0 ? B / std::pow(d, beta) : B) + C;
      if (phi[i] > bound * (1.0 + 1e-12) + 1e-300) res.holds = false;
      if (bound > 0.0) res.C_tilde = std::max(res.C_tilde, phi[i] / bound);
    }
  return res;
}

struct SubsolutionRow {
  double k = 0, tau = 0;
  double lhs = 0, rhs1 = 0, measure = 0, ratio = 0;
  bool empty = false;
};

// De Giorgi-type energy quotients for v = (d_{e*} u - (1+delta))_+^2 over
// truncation levels k and shrink factors tau in {1/2, 3/4}
inline std::vector<SubsolutionRow> subsolution_energy_check(
    const DiscreteSolution& sol, const BallWindow& w, double delta,
    const Eigen::VectorXd& e_star, const std::vector<double>& k_levels,
    double sigma = 1.0) {
  const Grid& g = *sol.grid;
  const int n = g.dim();
  const double vol = g.cell_volume();
  const double beta = sigma / (n + sigma);
  Eigen::VectorXd v(g.cell_count());
  for (int c = 0; c < g.cell_count(); ++c) {
    const double t = sol.gradient_at(c).dot(e_star) - (1.0 + delta);
    v[c] = t > 0 ? t * t : 0.0;
  }
  std::vector<SubsolutionRow> rows;
  for (double k : k_levels)
    for (double tau : {0.5, 0.75}) {
      SubsolutionRow r;
      r.k = k;
      r.tau = tau;
      int above = 0;
      for (int c : w.cells()) {
        const double vk = std::max(v[c] - k, 0.0);
        r.rhs1 += vol * vk * vk;
        if (v[c] > k) ++above;
        if ((g.cell_center(c) - w.center()).norm() <= tau * w.rho()) {
          for (int ax = 0; ax < n; ++ax) {
            const int nb = g.cell_neighbor(c, ax);
            if (nb < 0) continue;
            const double dv = (std::max(v[nb] - k, 0.0) - vk) / g.h();
            r.lhs += vol * dv * dv;
          }
        }
      }
      r.rhs1 /= (1.0 - tau) * w.rho() * (1.0 - tau) * w.rho();
      r.measure = above * vol;
      r.empty = above == 0;
      const double denom =
          r.rhs1 + (r.measure > 0
                        ? std::pow(r.measure, 1.0 - 2.0 / n + 2.0 * beta / n)
                        : 0.0);
      r.ratio = denom > 0 ? r.lhs / denom : 0.0;
      rows.push_back(r);
    }
  return rows;
}

// Lebesgue-representative proxy: mean of G_{2 delta}(Du) over the smallest
// admissible window around x0
inline Eigen::VectorXd lebesgue_proxy(const DiscreteSolution& sol,
                                      const ConvexBody& body,
                                      const Eigen::VectorXd& x0, double delta) {
  const Grid& g = *sol.grid;
  const double r0 = 2.5 * g.h();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(g.dim());
  int cnt = 0;
  for (int c = 0; c < g.cell_count(); ++c)
    if ((g.cell_center(c) - x0).norm() <= r0) {
      mean += g_delta(body, 2.0 * delta, sol.gradient_at(c));
      ++cnt;
    }
  if (cnt == 0) throw std::invalid_argument("lebesgue_proxy: no cells near x0");
  return mean / cnt;
}

}  // namespace wde
