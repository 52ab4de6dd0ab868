#pragma once

// Independent oracles used to freeze expected values: a bisection gauge from a
// membership predicate, central finite differences, and the closed-form 1D
// profile for the regularized p = 2 problem with constant right-hand side.

#include <cmath>
#include <functional>

#include <Eigen/Dense>

namespace oracle {

// |xi|_E by bisection on t with a point-membership predicate for E
inline double gauge_bisection(
    const std::function<bool(const Eigen::VectorXd&)>& member,
    const Eigen::VectorXd& xi, double t_hi = 1e6) {
  if (xi.norm() == 0.0) return 0.0;
  double lo = 0.0, hi = t_hi;
  for (int i = 0; i < 200; ++i) {
    const double mid = (lo + hi) / 2.0;
    if (mid > 0 && member(xi / mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

inline Eigen::VectorXd fd_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2 * h);
  }
  return g;
}

inline Eigen::MatrixXd fd_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h = 1e-5) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd J(f0.size(), x.size());
  for (int i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    J.col(i) = (f(xp) - f(xm)) / (2 * h);
  }
  return J;
}

// Slope of the regularized 1D profile: H_eps(w) = m with
// H_eps(w) = (|w|-1)_+ sign(w) + eps w
inline double profile_slope(double m, double eps) {
  if (m > eps) return (1.0 + m) / (1.0 + eps);
  if (m < -eps) return (m - 1.0) / (1.0 + eps);
  return m / eps;
}

// Exact solution of the discrete 1D Euler-Lagrange system on N cells of width
// h with f = c: H_eps(w_i) = kappa0 + i h c, kappa0 fixed so the slopes sum to
// the boundary increment. Returns the per-cell slopes.
inline std::vector<double> discrete_profile(int N, double h, double c,
                                            double eps, double increment) {
  auto total = [&](double k0) {
    double s = 0.0;
    for (int i = 0; i < N; ++i) s += h * profile_slope(k0 + i * h * c, eps);
    return s;
  };
  double lo = -1e3, hi = 1e3;
  for (int it = 0; it < 200; ++it) {
    const double mid = (lo + hi) / 2.0;
    if (total(mid) < increment)
      lo = mid;
    else
      hi = mid;
  }
  const double k0 = (lo + hi) / 2.0;
  std::vector<double> w(N);
  for (int i = 0; i < N; ++i) w[i] = profile_slope(k0 + i * h * c, eps);
  return w;
}

// I(m) = int_0^m W(t) dt for the piecewise-linear slope map W above
inline double profile_antiderivative(double m, double eps) {
  const double a = std::min(std::abs(m), eps);
  double acc = a * a / (2.0 * eps);
  if (m > eps)
    acc += ((m - eps) + (m * m - eps * eps) / 2.0) / (1.0 + eps);
  else if (m < -eps)
    acc += ((m * m - eps * eps) / 2.0 - (m + eps)) / (1.0 + eps);
  return acc;
}

// datum offset k for the continuum profile on [0,1]: H_eps(w(s)) = k + c s
// with k fixed by the prescribed mean slope (closed-form integral)
inline double continuum_profile_k(double c, double eps, double mean_slope) {
  auto total = [&](double k0) {
    return (profile_antiderivative(k0 + c, eps) - profile_antiderivative(k0, eps)) / c;
  };
  double lo = -1e3, hi = 1e3;
  for (int it = 0; it < 200; ++it) {
    const double mid = (lo + hi) / 2.0;
    if (total(mid) < mean_slope)
      lo = mid;
    else
      hi = mid;
  }
  return (lo + hi) / 2.0;
}

// continuum profile slopes at the given positions
inline std::vector<double> continuum_profile(const std::vector<double>& s,
                                             double c, double eps,
                                             double mean_slope) {
  const double k0 = continuum_profile_k(c, eps, mean_slope);
  std::vector<double> w;
  for (double v : s) w.push_back(profile_slope(k0 + v * c, eps));
  return w;
}

// continuum profile values u(s) = int_0^s W(k + c t) dt
inline double continuum_profile_value(double s, double c, double eps, double k0) {
  return (profile_antiderivative(k0 + c * s, eps) - profile_antiderivative(k0, eps)) / c;
}

}  // namespace oracle
