#pragma once

// Uniform grid, discrete energy and the Newton/Armijo Dirichlet solver for
// the regularized problem, plus the a-priori estimate report.

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "wde/csv.hpp"
#include "wde/regularize.hpp"

namespace wde {

class Grid {
 public:
  // h must divide every side length (to 1e-12 relative) with >= 3 nodes/axis
  Grid(Eigen::VectorXd lo, Eigen::VectorXd hi, double h)
      : lo_(std::move(lo)), hi_(std::move(hi)), h_(h) {
    if (lo_.size() != hi_.size() || lo_.size() < 2)
      throw std::invalid_argument("grid: need matching bounds, dimension >= 2");
    if (!(h > 0.0)) throw std::invalid_argument("grid: h must be positive");
    n_ = static_cast<int>(lo_.size());
    for (int k = 0; k < n_; ++k) {
      const double side = hi_[k] - lo_[k];
      if (!(side > 0.0)) throw std::invalid_argument("grid: empty box side");
      const double q = side / h;
      const long m = std::lround(q);
      if (std::abs(q - static_cast<double>(m)) > 1e-12 * q)
        throw std::invalid_argument("grid: h does not divide a side length");
      if (m < 2) throw std::invalid_argument("grid: fewer than 3 nodes on an axis");
      cells_.push_back(static_cast<int>(m));
    }
    node_strides_.assign(n_, 1);
    cell_strides_.assign(n_, 1);
    for (int k = 1; k < n_; ++k) {
      node_strides_[k] = node_strides_[k - 1] * (cells_[k - 1] + 1);
      cell_strides_[k] = cell_strides_[k - 1] * cells_[k - 1];
    }
    node_count_ = node_strides_[n_ - 1] * (cells_[n_ - 1] + 1);
    cell_count_ = cell_strides_[n_ - 1] * cells_[n_ - 1];
    boundary_.assign(node_count_, false);
    for (int i = 0; i < node_count_; ++i) {
      int rem = i;
      for (int k = n_ - 1; k >= 0; --k) {
        const int c = rem / node_strides_[k];
        rem -= c * node_strides_[k];
        if (c == 0 || c == cells_[k]) {
          boundary_[i] = true;
          break;
        }
      }
      if (!boundary_[i]) interior_.push_back(i);
    }
  }

  int dim() const { return n_; }
  double h() const { return h_; }
  const Eigen::VectorXd& lo() const { return lo_; }
  const Eigen::VectorXd& hi() const { return hi_; }
  const std::vector<int>& cells_per_axis() const { return cells_; }
  int node_count() const { return node_count_; }
  int cell_count() const { return cell_count_; }
  bool is_boundary(int node) const { return boundary_[node]; }
  const std::vector<int>& interior_nodes() const { return interior_; }

  Eigen::VectorXd node_coord(int node) const {
    Eigen::VectorXd x(n_);
    int rem = node;
    for (int k = n_ - 1; k >= 0; --k) {
      const int c = rem / node_strides_[k];
      rem -= c * node_strides_[k];
      x[k] = lo_[k] + c * h_;
    }
    return x;
  }

  // node id of the cell's origin corner
  int cell_origin(int cell) const {
    int rem = cell, node = 0;
    for (int k = n_ - 1; k >= 0; --k) {
      const int c = rem / cell_strides_[k];
      rem -= c * cell_strides_[k];
      node += c * node_strides_[k];
    }
    return node;
  }

  Eigen::VectorXd cell_center(int cell) const {
    Eigen::VectorXd x = node_coord(cell_origin(cell));
    for (int k = 0; k < n_; ++k) x[k] += h_ / 2.0;
    return x;
  }

  int node_neighbor(int node, int axis) const { return node + node_strides_[axis]; }

  // forward-difference gradient of a nodal field on one cell
  Eigen::VectorXd cell_gradient(const Eigen::VectorXd& u, int cell) const {
    const int o = cell_origin(cell);
    Eigen::VectorXd g(n_);
    for (int k = 0; k < n_; ++k)
      g[k] = (u[node_neighbor(o, k)] - u[o]) / h_;
    return g;
  }

  // cell id offset by one cell along an axis, -1 if outside
  int cell_neighbor(int cell, int axis) const {
    int rem = cell;
    for (int k = n_ - 1; k >= 0; --k) {
      const int c = rem / cell_strides_[k];
      rem -= c * cell_strides_[k];
      if (k == axis) {
        if (c + 1 >= cells_[k]) return -1;
        return cell + cell_strides_[k];
      }
    }
    return -1;
  }

  double cell_volume() const { return std::pow(h_, n_); }

 private:
  Eigen::VectorXd lo_, hi_;
  double h_;
  int n_ = 0, node_count_ = 0, cell_count_ = 0;
  std::vector<int> cells_, node_strides_, cell_strides_;
  std::vector<bool> boundary_;
  std::vector<int> interior_;
};

inline Grid build_grid(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                       double h) {
  return Grid(lo, hi, h);
}

struct SolverDiagnostics {
  int iterations = 0;
  double final_energy = 0.0;
  double residual = 0.0;
  int line_search_failures = 0;
  bool f_clipped = false;
};

struct DiscreteSolution {
  const Grid* grid = nullptr;
  Eigen::VectorXd u;    // nodal values (boundary nodes hold g exactly)
  Eigen::VectorXd f;    // nodal datum
  double epsilon = 0.0;
  SolverDiagnostics diagnostics;

  Eigen::VectorXd gradient_at(int cell) const { return grid->cell_gradient(u, cell); }
};

struct EnergyReport {
  double energy = 0.0;
  double fhat_part = 0.0;   // Psi(F) + Phi contribution
  double eps_part = 0.0;    // eps/2 |Du|^2 contribution
  double datum_part = 0.0;  // f u contribution
  double grad_sup = 0.0;
  double grad_l2 = 0.0;
};

inline EnergyReport discrete_energy(const RegularizedIntegrand& Fh,
                                    const DiscreteSolution& sol) {
  const Grid& g = *sol.grid;
  if (sol.u.size() != g.node_count() || sol.f.size() != g.node_count())
    throw std::invalid_argument("discrete_energy: field sizes do not match the grid");
  const double vol = g.cell_volume();
  EnergyReport r;
  double l2 = 0.0;
  for (int c = 0; c < g.cell_count(); ++c) {
    const Eigen::VectorXd xc = g.cell_center(c);
    const Eigen::VectorXd du = g.cell_gradient(sol.u, c);
    const double ep = 0.5 * Fh.epsilon() * du.squaredNorm();
    r.eps_part += vol * ep;
    r.fhat_part += vol * (Fh.value(xc, du) - ep);
    r.grad_sup = std::max(r.grad_sup, du.norm());
    l2 += vol * du.squaredNorm();
  }
  for (int i = 0; i < g.node_count(); ++i) r.datum_part += vol * sol.f[i] * sol.u[i];
  r.energy = r.fhat_part + r.eps_part + r.datum_part;
  r.grad_l2 = std::sqrt(l2);
  return r;
}

struct SolveFailure : std::runtime_error {
  SolverDiagnostics diagnostics;
  explicit SolveFailure(const std::string& msg, SolverDiagnostics d)
      : std::runtime_error(msg), diagnostics(d) {}
};

namespace detail {

inline double plain_energy(const RegularizedIntegrand& Fh, const Grid& g,
                           const Eigen::VectorXd& u, const Eigen::VectorXd& f) {
  double e = 0.0;
  const double vol = g.cell_volume();
  for (int c = 0; c < g.cell_count(); ++c)
    e += vol * Fh.value(g.cell_center(c), g.cell_gradient(u, c));
  for (int i = 0; i < g.node_count(); ++i) e += vol * f[i] * u[i];
  return e;
}

}  // namespace detail

// Newton with Armijo backtracking on the discrete energy; the Hessian blocks
// come from the assembled Hessian of Fhat_eps whose eigenvalue floor is eps.
// g_field supplies the datum on boundary nodes and the initial guess inside.
inline DiscreteSolution solve_dirichlet(const RegularizedIntegrand& Fh,
                                        const Grid& grid,
                                        const Eigen::VectorXd& f_field,
                                        const Eigen::VectorXd& g_field,
                                        double tol = 1e-9,
                                        int max_iter = 500) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve_dirichlet: tol must be > 0");
  if (!(Fh.epsilon() > 0.0))
    throw std::invalid_argument("solve_dirichlet: eps = 0 is not uniquely solvable");
  if (f_field.size() != grid.node_count() || g_field.size() != grid.node_count())
    throw std::invalid_argument("solve_dirichlet: field sizes do not match the grid");

  DiscreteSolution sol;
  sol.grid = &grid;
  sol.epsilon = Fh.epsilon();
  sol.f = f_field;
  for (int i = 0; i < grid.node_count(); ++i) {
    if (std::abs(sol.f[i]) > 1e12) {
      sol.f[i] = sol.f[i] > 0 ? 1e12 : -1e12;
      sol.diagnostics.f_clipped = true;
    }
  }
  sol.u = g_field;

  const int n = grid.dim();
  const double vol = grid.cell_volume();
  const double h = grid.h();
  const auto& interior = grid.interior_nodes();
  const int m = static_cast<int>(interior.size());
  std::vector<int> slot(grid.node_count(), -1);
  for (int i = 0; i < m; ++i) slot[interior[i]] = i;

  auto assemble_grad = [&](const Eigen::VectorXd& u, Eigen::VectorXd& grad) {
    grad.setZero(m);
    for (int c = 0; c < grid.cell_count(); ++c) {
      const int o = grid.cell_origin(c);
      const Eigen::VectorXd H = Fh.gradient(grid.cell_center(c), grid.cell_gradient(u, c));
      double osum = 0.0;
      for (int k = 0; k < n; ++k) {
        const int nb = grid.node_neighbor(o, k);
        if (slot[nb] >= 0) grad[slot[nb]] += vol * H[k] / h;
        osum -= H[k] / h;
      }
      if (slot[o] >= 0) grad[slot[o]] += vol * osum;
    }
    for (int i = 0; i < m; ++i) grad[i] += vol * sol.f[interior[i]];
  };

  Eigen::VectorXd grad(m), dir(m);
  double energy = detail::plain_energy(Fh, grid, sol.u, sol.f);
  std::vector<Eigen::Triplet<double>> trips;

  for (int it = 0; it <= max_iter; ++it) {
    assemble_grad(sol.u, grad);
    sol.diagnostics.iterations = it;
    sol.diagnostics.final_energy = energy;
    sol.diagnostics.residual =
        m == 0 ? 0.0 : grad.cwiseAbs().maxCoeff() / vol;
    if (sol.diagnostics.residual <= tol) return sol;
    if (it == max_iter) break;

    trips.clear();
    for (int c = 0; c < grid.cell_count(); ++c) {
      const int o = grid.cell_origin(c);
      Eigen::MatrixXd Hc;
      try {
        Hc = Fh.hessian(grid.cell_center(c), grid.cell_gradient(sol.u, c));
      } catch (const std::domain_error&) {
        Hc = Fh.epsilon() * Eigen::MatrixXd::Identity(n, n);
      }
      // incidence: d(Du)/du maps node increments to gradient increments
      std::vector<int> nodes(n + 1);
      nodes[0] = o;
      for (int k = 0; k < n; ++k) nodes[k + 1] = grid.node_neighbor(o, k);
      for (int a = 0; a <= n; ++a) {
        if (slot[nodes[a]] < 0) continue;
        for (int b = 0; b <= n; ++b) {
          if (slot[nodes[b]] < 0) continue;
          double v = 0.0;
          if (a == 0 && b == 0)
            v = Hc.sum();
          else if (a == 0)
            v = -Hc.row(b - 1).sum();
          else if (b == 0)
            v = -Hc.col(a - 1).sum();
          else
            v = Hc(a - 1, b - 1);
          trips.emplace_back(slot[nodes[a]], slot[nodes[b]], vol * v / (h * h));
        }
      }
    }
    Eigen::SparseMatrix<double> H(m, m);
    H.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(H);
    if (ldlt.info() == Eigen::Success) {
      dir = ldlt.solve(-grad);
      if (ldlt.info() != Eigen::Success || !dir.allFinite()) dir = -grad;
    } else {
      dir = -grad;  // gradient-descent fallback
    }
    const double slope = grad.dot(dir);
    if (slope >= 0.0) dir = -grad;

    double alpha = 1.0;
    const double want = 1e-4 * grad.dot(dir);
    Eigen::VectorXd trial = sol.u;
    bool accepted = false;
    // near the optimum the predicted decrease drops below the energy's own
    // rounding resolution and Armijo can no longer certify progress; accept
    // the full Newton step of the convex model on the residual's authority
    const double resolution =
        64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(energy));
    if (-want <= resolution) {
      for (int i = 0; i < m; ++i) trial[interior[i]] = sol.u[interior[i]] + dir[i];
      const double e2 = detail::plain_energy(Fh, grid, trial, sol.f);
      if (std::isfinite(e2) && e2 <= energy + resolution) {
        sol.u = trial;
        energy = e2;
        accepted = true;
      }
    }
    for (int ls = 0; !accepted && ls < 40; ++ls) {
      for (int i = 0; i < m; ++i) trial[interior[i]] = sol.u[interior[i]] + alpha * dir[i];
      const double e2 = detail::plain_energy(Fh, grid, trial, sol.f);
      if (e2 <= energy + alpha * want) {
        sol.u = trial;
        energy = e2;
        accepted = true;
        break;
      }
      alpha /= 2.0;
    }
    if (!accepted) {
      ++sol.diagnostics.line_search_failures;
      break;  // no descent possible at floating-point resolution
    }
  }
  throw SolveFailure("solve_dirichlet: no convergence within budget", sol.diagnostics);
}

struct MaxPrincipleResult {
  bool ok = false;
  double margin = 0.0;  // bound minus interior sup
};

// max interior |u| <= max boundary |g| + 1e-8 (asserted for f == 0 runs)
inline MaxPrincipleResult max_principle_check(const DiscreteSolution& sol) {
  const Grid& g = *sol.grid;
  double bnd = 0.0, intr = 0.0;
  for (int i = 0; i < g.node_count(); ++i) {
    if (g.is_boundary(i))
      bnd = std::max(bnd, std::abs(sol.u[i]));
    else
      intr = std::max(intr, std::abs(sol.u[i]));
  }
  MaxPrincipleResult r;
  r.margin = bnd + 1e-8 - intr;
  r.ok = r.margin >= 0.0;
  return r;
}

struct AprioriRow {
  double epsilon;
  double l2_ratio;       // |Du_eps|^2_{L2} / int(1+|Dg|^2)
  double hessian_ratio;  // eps^2 rho^2 * inner sum |D2u|^2 / (|Du|^2 + rho^2 int(1+f^2))
  double sup_ratio;      // sup |Du_eps| / (avg + 1)
};

inline std::vector<AprioriRow> apriori_report(
    const std::vector<DiscreteSolution>& sols, const Eigen::VectorXd& g_field) {
  if (sols.empty()) return {};
  const Grid& g = *sols.front().grid;
  for (const auto& s : sols)
    if (s.grid != &g || s.f.size() != sols.front().f.size())
      throw std::invalid_argument("apriori_report: solutions must share the grid");
  const double vol = g.cell_volume();
  const int n = g.dim();
  Eigen::VectorXd x0 = (g.lo() + g.hi()) / 2.0;
  double half = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) half = std::min(half, (g.hi()[k] - g.lo()[k]) / 2.0);
  const double rho = half / 2.0;  // B_{2 rho} fits inside the box

  double denom_g = 0.0;
  for (int c = 0; c < g.cell_count(); ++c)
    denom_g += vol * (1.0 + g.cell_gradient(g_field, c).squaredNorm());

  std::vector<AprioriRow> rows;
  for (const auto& s : sols) {
    AprioriRow r{};
    r.epsilon = s.epsilon;
    double l2 = 0.0, sup_rho = 0.0, l2_2rho = 0.0, f_2rho = 0.0, hess_inner = 0.0;
    int cells_2rho = 0;
    for (int c = 0; c < g.cell_count(); ++c) {
      const Eigen::VectorXd xc = g.cell_center(c);
      const Eigen::VectorXd du = g.cell_gradient(s.u, c);
      l2 += vol * du.squaredNorm();
      const double d = (xc - x0).norm();
      if (d <= rho) sup_rho = std::max(sup_rho, du.norm());
      if (d <= 2 * rho) {
        l2_2rho += vol * du.squaredNorm();
        const double fv = s.f[g.cell_origin(c)];
        f_2rho += vol * (1.0 + fv * fv);
        ++cells_2rho;
      }
      if (d <= rho / 2.0) {
        for (int k = 0; k < n; ++k) {
          const int nb = g.cell_neighbor(c, k);
          if (nb < 0) continue;
          hess_inner +=
              vol * ((g.cell_gradient(s.u, nb) - du) / g.h()).squaredNorm();
        }
      }
    }
    r.l2_ratio = l2 / denom_g;
    r.hessian_ratio = s.epsilon * s.epsilon * rho * rho * hess_inner /
                      (l2_2rho + rho * rho * f_2rho);
    const double avg = cells_2rho ? std::sqrt(l2_2rho / (vol * cells_2rho)) : 0.0;
    r.sup_ratio = sup_rho / (avg + 1.0);
    rows.push_back(r);
  }
  return rows;
}

// solution file: key,value header lines then one node value per line
inline void write_solution(const std::string& path, const DiscreteSolution& sol) {
  CsvWriter w(path);
  const Grid& g = *sol.grid;
  w.row({"n", std::to_string(g.dim())});
  std::vector<std::string> dims{"dims"};
  for (int c : g.cells_per_axis()) dims.push_back(std::to_string(c));
  w.row(dims);
  w.row({"h", fmt_g17(g.h())});
  std::vector<std::string> org{"origin"};
  for (int k = 0; k < g.dim(); ++k) org.push_back(fmt_g17(g.lo()[k]));
  w.row(org);
  w.row({"epsilon", fmt_g17(sol.epsilon)});
  w.row({"values"});
  for (int i = 0; i < g.node_count(); ++i) w.row({fmt_g17(sol.u[i])});
}

inline Eigen::VectorXd read_solution_values(const std::string& path,
                                            double* epsilon_out = nullptr) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("solution file: cannot open " + path);
  std::string line;
  std::vector<double> vals;
  bool in_values = false;
  while (std::getline(in, line)) {
    if (!in_values) {
      if (line.rfind("epsilon,", 0) == 0 && epsilon_out)
        *epsilon_out = std::stod(line.substr(8));
      if (line == "values") in_values = true;
      continue;
    }
    if (!line.empty()) vals.push_back(std::stod(line));
  }
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<long>(vals.size()));
}

}  // namespace wde
