#pragma once

// Degenerate integrands F(x, xi): prototype a(x)/p (|xi|-1)_+^p plus a
// user-evaluator escape hatch; gradients, Hessians, ellipticity windows and
// the monotonicity bounds for the regularized gradient map H_eps.

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>

#include <Eigen/Dense>

#include "wde/convex_body.hpp"
#include "wde/rng.hpp"

namespace wde {

// coefficient field a(x) with analytically known bounds C1 <= a <= C2 and
// Lipschitz constant A on the given domain
class CoefficientField {
 public:
  static CoefficientField constant(double v) {
    if (!(v > 0.0)) throw std::invalid_argument("coefficient: must be positive");
    CoefficientField f;
    f.eval_ = [v](const Eigen::VectorXd&) { return v; };
    f.C1_ = f.C2_ = v;
    f.A_ = 0.0;
    return f;
  }

  // c0 + <s, x>, bounds over the box [lo, hi]
  static CoefficientField affine(double c0, const Eigen::VectorXd& s,
                                 const Eigen::VectorXd& lo,
                                 const Eigen::VectorXd& hi) {
    CoefficientField f;
    f.eval_ = [c0, s](const Eigen::VectorXd& x) { return c0 + s.dot(x); };
    double mn = c0, mx = c0;
    for (int i = 0; i < s.size(); ++i) {
      mn += std::min(s[i] * lo[i], s[i] * hi[i]);
      mx += std::max(s[i] * lo[i], s[i] * hi[i]);
    }
    if (!(mn > 0.0))
      throw std::invalid_argument("coefficient: affine field not positive on the domain");
    f.C1_ = mn;
    f.C2_ = mx;
    f.A_ = s.norm();
    return f;
  }

  // base + amp * sin(<w, x>)
  static CoefficientField trig(double base, double amp, const Eigen::VectorXd& w) {
    if (!(base - std::abs(amp) > 0.0))
      throw std::invalid_argument("coefficient: trig field not positive");
    CoefficientField f;
    f.eval_ = [base, amp, w](const Eigen::VectorXd& x) {
      return base + amp * std::sin(w.dot(x));
    };
    f.C1_ = base - std::abs(amp);
    f.C2_ = base + std::abs(amp);
    f.A_ = std::abs(amp) * w.norm();
    return f;
  }

  double operator()(const Eigen::VectorXd& x) const { return eval_(x); }
  double C1() const { return C1_; }
  double C2() const { return C2_; }
  double lipschitz() const { return A_; }

 private:
  std::function<double(const Eigen::VectorXd&)> eval_;
  double C1_ = 0, C2_ = 0, A_ = 0;
};

struct Domain {
  Eigen::VectorXd lo, hi;  // axis-aligned box

  bool contains(const Eigen::VectorXd& x) const {
    for (int i = 0; i < lo.size(); ++i)
      if (x[i] < lo[i] - 1e-12 || x[i] > hi[i] + 1e-12) return false;
    return true;
  }
  int dim() const { return static_cast<int>(lo.size()); }
};

struct EllipticityWindow {
  double delta;
  double lambda;   // lower eigenvalue bound on 1+delta <= |xi|_E <= 1/delta
  double Lambda;   // upper bound
  bool empirical;  // true when sampled rather than closed-form
};

class Integrand {
 public:
  using ValueFn = std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;
  using GradFn =
      std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>;
  using HessFn =
      std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

  // the prototype lives on the unit Euclidean ball E
  static Integrand prototype(double p, CoefficientField a, Domain domain) {
    if (!(p > 1.0)) throw std::invalid_argument("integrand: p must exceed 1");
    Integrand F;
    F.body_ = ConvexBody::ball(domain.dim(), 1.0);
    F.domain_ = std::move(domain);
    F.is_prototype_ = true;
    F.p_ = p;
    F.a_ = std::move(a);
    return F;
  }

  static Integrand custom(ConvexBody body, Domain domain, ValueFn v, GradFn g,
                          HessFn h) {
    Integrand F;
    F.body_ = std::move(body);
    F.domain_ = std::move(domain);
    F.is_prototype_ = false;
    F.val_ = std::move(v);
    F.grad_ = std::move(g);
    F.hess_ = std::move(h);
    return F;
  }

  const ConvexBody& body() const { return body_; }
  const Domain& domain() const { return domain_; }
  bool is_prototype() const { return is_prototype_; }
  double p() const { return p_; }
  const CoefficientField& coefficient() const { return a_; }

  double value(const Eigen::VectorXd& x, const Eigen::VectorXd& xi) const {
    check_x(x);
    if (!is_prototype_) return val_(x, xi);
    const double s = xi.norm();
    if (s <= 1.0) return 0.0;
    return a_(x) / p_ * std::pow(s - 1.0, p_);
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& xi) const {
    check_x(x);
    if (!is_prototype_) return grad_(x, xi);
    const double s = xi.norm();
    if (s <= 1.0) return Eigen::VectorXd::Zero(xi.size());
    return (a_(x) * std::pow(s - 1.0, p_ - 1.0) / s) * xi;
  }

  // C^2 may break down at dE; refuses on/inside the degeneracy boundary
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x, const Eigen::VectorXd& xi) const {
    const double s = xi.norm();
    if (is_prototype_ && s <= 1.0 + 1e-12)
      throw std::domain_error("hessian: not twice differentiable on/inside dE");
    return hessian_ext(x, xi);
  }

  // continuous extension by 0 inside E (valid since F vanishes on an open set);
  // still refuses the genuine C^2 breakdown shell for 1 < p < 2
  Eigen::MatrixXd hessian_ext(const Eigen::VectorXd& x, const Eigen::VectorXd& xi) const {
    check_x(x);
    if (!is_prototype_) return hess_(x, xi);
    const int n = static_cast<int>(xi.size());
    const double s = xi.norm();
    if (p_ < 2.0 && std::abs(s - 1.0) <= 1e-12)
      throw std::domain_error("hessian: C^2 breakdown at dE for 1 < p < 2");
    if (s <= 1.0) return Eigen::MatrixXd::Zero(n, n);
    const double av = a_(x);
    const double t1 = std::pow(s - 1.0, p_ - 1.0) / s;
    const double t2 =
        (p_ - 1.0) * std::pow(s - 1.0, p_ - 2.0) / (s * s) - t1 / (s * s);
    return av * (t1 * Eigen::MatrixXd::Identity(n, n) + t2 * xi * xi.transpose());
  }

  // lambda(delta) = C1 delta^p, Lambda(delta) = C2 (p-1)((1-delta)/delta)^{p-2}
  // for the prototype with p >= 2; sampled otherwise
  EllipticityWindow ellipticity_window(double delta) const {
    if (!(delta > 0.0 && delta < 1.0))
      throw std::invalid_argument("ellipticity_window: delta must lie in (0,1)");
    if (is_prototype_ && p_ >= 2.0) {
      const double lam = a_.C1() * std::pow(delta, p_);
      const double Lam =
          a_.C2() * (p_ - 1.0) * std::pow((1.0 - delta) / delta, p_ - 2.0);
      return {delta, lam, Lam, false};
    }
    return empirical_window(delta);
  }

 private:
  EllipticityWindow empirical_window(double delta) const {
    Rng rng(0xe11f);
    const int n = domain_.dim();
    double lam = std::numeric_limits<double>::infinity(), Lam = 0.0;
    int kept = 0;
    while (kept < 2000) {
      Eigen::VectorXd x = rng.box(domain_.lo, domain_.hi);
      Eigen::VectorXd d = rng.cube(n, 1.0);
      if (d.norm() < 1e-6) continue;
      const double gd = body_.gauge(d);
      if (gd <= 0.0) continue;
      const double u = rng.uniform(1.0 + delta, 1.0 / delta);
      Eigen::VectorXd xi = (u / gd) * d;
      try {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hessian_ext(x, xi));
        lam = std::min(lam, es.eigenvalues().minCoeff());
        Lam = std::max(Lam, es.eigenvalues().maxCoeff());
        ++kept;
      } catch (const std::domain_error&) {
      }
    }
    return {delta, lam, Lam, true};
  }

  void check_x(const Eigen::VectorXd& x) const {
    if (!domain_.contains(x))
      throw std::invalid_argument("integrand: x outside the domain");
  }

  ConvexBody body_ = ConvexBody::ball(2, 1.0);
  Domain domain_;
  bool is_prototype_ = true;
  double p_ = 2.0;
  CoefficientField a_ = CoefficientField::constant(1.0);
  ValueFn val_;
  GradFn grad_;
  HessFn hess_;
};

// <H_eps(x, xi2) - H_eps(x, xi), xi2 - xi> with H_eps = grad F + eps id;
// non-negative for every pair by convexity — no precondition.
inline double monotonicity_bracket(const Integrand& F, double eps,
                                   const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& xi,
                                   const Eigen::VectorXd& xi2) {
  const Eigen::VectorXd dH =
      F.gradient(x, xi2) + eps * xi2 - (F.gradient(x, xi) + eps * xi);
  return dH.dot(xi2 - xi);
}

// quantitative gap: bracket minus the lower bound
// (eps + C(delta) r_E (2|xi|_E - (2+delta)) / (2|xi|_E (R_E + r_E))) |xi2-xi|^2
// with C(delta) := lambda(delta/2); requires |xi|_E >= 1 + delta
inline double monotonicity_gap(const Integrand& F, double eps, double delta,
                               const Eigen::VectorXd& x, const Eigen::VectorXd& xi,
                               const Eigen::VectorXd& xi2) {
  if (!(eps >= 0.0 && eps <= 1.0))
    throw std::invalid_argument("monotonicity_gap: eps must lie in [0,1]");
  if (!(delta > 0.0)) throw std::invalid_argument("monotonicity_gap: delta must be > 0");
  const double g = F.body().gauge(xi);
  if (g < 1.0 + delta)
    throw std::invalid_argument("monotonicity_gap: |xi|_E must be >= 1 + delta");
  const double rE = F.body().inner_radius();
  const double RE = F.body().outer_radius();
  const double C = F.ellipticity_window(delta / 2.0).lambda;
  const double lower =
      eps + C * rE * (2.0 * g - (2.0 + delta)) / (2.0 * g * (RE + rE));
  return monotonicity_bracket(F, eps, x, xi, xi2) -
         lower * (xi2 - xi).squaredNorm();
}

}  // namespace wde
