#pragma once

// The regularization pipeline: truncation Psi, convex correction Phi, and the
// assembled integrand Fhat_eps = Psi(F) + Phi + eps/2 |xi|^2 with quadratic
// growth and eps-uniform ellipticity.

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "wde/integrand.hpp"

namespace wde {

// C^2 monotone truncation: identity on [0, K_tilde], constant L = K_tilde + 1
// beyond L, quintic Hermite ramp in between (value/slope/curvature matched at
// both knots). The realized derivative bound C_Psi is measured, not assumed.
class Truncation {
 public:
  explicit Truncation(double K_tilde) : Kt_(K_tilde), L_(K_tilde + 1.0) {
    if (!(K_tilde > 0.0))
      throw std::invalid_argument("truncation: K_tilde must be positive");
    double c = 0.0;
    for (int i = 0; i <= 10000; ++i) {
      const double t = Kt_ + (L_ - Kt_) * i / 10000.0;
      c = std::max(c, std::abs(dpsi(t)) + std::abs(d2psi(t)));
    }
    CPsi_ = std::max(c, 1.0);
  }

  double K_tilde() const { return Kt_; }
  double L() const { return L_; }
  double C_Psi() const { return CPsi_; }

  double psi(double t) const {
    if (t <= Kt_) return t;
    if (t >= L_) return L_;
    const double s = t - Kt_;  // ramp width is 1
    return Kt_ + s + 4 * s * s * s - 7 * s * s * s * s + 3 * s * s * s * s * s;
  }

  double dpsi(double t) const {
    if (t <= Kt_ || t >= L_) return t <= Kt_ ? 1.0 : 0.0;
    const double s = t - Kt_;
    return 1 + 12 * s * s - 28 * s * s * s + 15 * s * s * s * s;
  }

  double d2psi(double t) const {
    if (t <= Kt_ || t >= L_) return 0.0;
    const double s = t - Kt_;
    return 24 * s - 84 * s * s + 60 * s * s * s;
  }

 private:
  double Kt_, L_, CPsi_;
};

// Convex correction Phi(xi) = (C_F + 1) m(|xi|^2): zero on |xi| <= K + R_E,
// Hessian exactly (C_F + 1) I beyond |xi| >= K + 2 R_E, C^2 smoothstep ramp
// in between. The global Hessian bound 2 C_F + 1 is unattainable by any C^2
// convex function meeting the other three conditions when K > 0 (the ramp has
// width R_E but must lift the radial slope to at least K + 2 R_E), so it is
// measured and reported rather than enforced.
class ConvexCorrection {
 public:
  ConvexCorrection(double K, double R_E, double C_F)
      : K_(K), RE_(R_E), CF_(C_F) {
    if (!(K > 0.0 && R_E > 0.0 && C_F > 0.0))
      throw std::invalid_argument("correction: K, R_E, C_F must be positive");
    const double r0 = K + R_E, r1 = K + 2 * R_E;
    u0_ = r0 * r0;
    u1_ = r1 * r1;
    verify();
  }

  double K() const { return K_; }
  double R_E() const { return RE_; }
  double C_F() const { return CF_; }
  double N() const { return K_ + 2 * RE_; }
  // measured sup of |Hessian| and whether it meets the (unattainable) 2C_F+1
  double hessian_sup() const { return hess_sup_; }
  bool hessian_sup_within_bound() const { return hess_sup_ <= 2 * CF_ + 1; }

  double value(const Eigen::VectorXd& xi) const {
    return (CF_ + 1.0) * m(xi.squaredNorm());
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& xi) const {
    return (CF_ + 1.0) * 2.0 * dm(xi.squaredNorm()) * xi;
  }

  Eigen::MatrixXd hessian(const Eigen::VectorXd& xi) const {
    const int n = static_cast<int>(xi.size());
    const double u = xi.squaredNorm();
    return (CF_ + 1.0) * (2.0 * dm(u) * Eigen::MatrixXd::Identity(n, n) +
                          4.0 * d2m(u) * xi * xi.transpose());
  }

 private:
  // m(u): 0 on [0, u0], slope ramps 0 -> 1/2 via quintic smoothstep on
  // [u0, u1], then exactly (u - u1)/2 + du/4
  double m(double u) const {
    if (u <= u0_) return 0.0;
    const double du = u1_ - u0_;
    if (u >= u1_) return du / 4.0 + (u - u1_) / 2.0;
    const double t = (u - u0_) / du;
    const double I = t * t * t * t * (t * t - 3 * t + 2.5);  // int_0^t smoothstep
    return 0.5 * du * I;
  }

  double dm(double u) const {
    if (u <= u0_) return 0.0;
    if (u >= u1_) return 0.5;
    const double t = (u - u0_) / (u1_ - u0_);
    return 0.5 * t * t * t * (6 * t * t - 15 * t + 10);
  }

  double d2m(double u) const {
    if (u <= u0_ || u >= u1_) return 0.0;
    const double t = (u - u0_) / (u1_ - u0_);
    return 0.5 * 30 * t * t * (t - 1) * (t - 1) / (u1_ - u0_);
  }

  // construction-time checks of the zero region, gradient growth and the
  // lower Hessian bound beyond K + 2 R_E; records the realized Hessian sup
  void verify() {
    const double r1 = std::sqrt(u1_);
    hess_sup_ = CF_ + 1.0;  // exact value beyond the ramp
    for (int i = 0; i <= 4000; ++i) {
      const double r = 1e-6 + (r1 + 3.0 * RE_) * i / 4000.0;
      const double u = r * r;
      if (u <= u0_ + 1e-14 && std::abs(m(u)) + std::abs(dm(u)) > 0.0)
        throw std::runtime_error("correction: zero-region condition violated");
      const double gn = (CF_ + 1.0) * 2.0 * dm(u) * r;  // |grad Phi| at radius r
      if (gn > (2 * CF_ + 1.0) * r + 1e-12)
        throw std::runtime_error("correction: gradient growth condition violated");
      const double tang = (CF_ + 1.0) * 2.0 * dm(u);
      const double rad = (CF_ + 1.0) * (2.0 * dm(u) + 4.0 * u * d2m(u));
      if (u >= u1_ - 1e-14 && std::min(tang, rad) < CF_ + 1.0 - 1e-9)
        throw std::runtime_error("correction: lower Hessian bound violated");
      if (rad < -1e-12 || tang < -1e-12)
        throw std::runtime_error("correction: convexity violated");
      hess_sup_ = std::max(hess_sup_, std::max(tang, rad));
    }
  }

  double K_, RE_, CF_;
  double u0_, u1_;
  double hess_sup_ = 0.0;
};

class RegularizedIntegrand {
 public:
  const Integrand& base() const { return base_; }
  const Truncation& truncation() const { return trunc_; }
  const ConvexCorrection& correction() const { return corr_; }
  double epsilon() const { return eps_; }
  double K() const { return K_; }
  double C_F() const { return corr_.C_F(); }
  double N() const { return corr_.N(); }

  double value(const Eigen::VectorXd& x, const Eigen::VectorXd& xi) const {
    return trunc_.psi(base_.value(x, xi)) + corr_.value(xi) +
           0.5 * eps_ * xi.squaredNorm();
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& xi) const {
    const double F = base_.value(x, xi);
    return trunc_.dpsi(F) * base_.gradient(x, xi) + corr_.gradient(xi) + eps_ * xi;
  }

  Eigen::MatrixXd hessian(const Eigen::VectorXd& x, const Eigen::VectorXd& xi) const {
    const int n = static_cast<int>(xi.size());
    const double F = base_.value(x, xi);
    const Eigen::VectorXd dF = base_.gradient(x, xi);
    return trunc_.d2psi(F) * dF * dF.transpose() +
           trunc_.dpsi(F) * base_.hessian_ext(x, xi) + corr_.hessian(xi) +
           eps_ * Eigen::MatrixXd::Identity(n, n);
  }

  // measured constant in |grad Fhat_eps| <= C (1 + |xi|)
  double growth_constant(int samples = 10000, std::uint64_t seed = 41) const {
    Rng rng(seed);
    const auto& dom = base_.domain();
    double c = 0.0;
    for (int i = 0; i < samples; ++i) {
      Eigen::VectorXd x = rng.box(dom.lo, dom.hi);
      Eigen::VectorXd xi = rng.cube(dom.dim(), 1000.0);
      c = std::max(c, gradient(x, xi).norm() / (1.0 + xi.norm()));
    }
    return c;
  }

  friend RegularizedIntegrand assemble(const Integrand&, double, double);

 private:
  RegularizedIntegrand(Integrand base, Truncation t, ConvexCorrection c,
                       double eps, double K)
      : base_(std::move(base)), trunc_(t), corr_(c), eps_(eps), K_(K) {}

  Integrand base_;
  Truncation trunc_;
  ConvexCorrection corr_;
  double eps_, K_;
};

namespace detail {

// K_tilde = sup of F over domain x ball of radius K + 2 R_E; closed form for
// the prototype, lattice sampling otherwise
inline double value_sup(const Integrand& F, double K) {
  const double RE = F.body().outer_radius();
  const double rad = K + 2 * RE;
  if (F.is_prototype()) {
    const double s = std::max(rad - 1.0, 0.0);
    return std::max(F.coefficient().C2() / F.p() * std::pow(s, F.p()), 1e-6);
  }
  Rng rng(0x57);
  double sup = 0.0;
  for (int i = 0; i < 4000; ++i) {
    Eigen::VectorXd x = rng.box(F.domain().lo, F.domain().hi);
    Eigen::VectorXd xi = rng.cube(F.domain().dim(), rad);
    if (xi.norm() > rad) {
      --i;
      continue;
    }
    sup = std::max(sup, F.value(x, xi));
  }
  return std::max(sup, 1e-6);
}

// C_F = max(1, sup |Hessian of Psi(F)| outside the ball of radius K + R_E)
inline double truncated_hessian_sup(const Integrand& F, const Truncation& tr,
                                    double K) {
  const double RE = F.body().outer_radius();
  // beyond s_hi the truncation has plateaued for every x
  const double s_hi = std::max(
      K + 2 * RE + 1.0,
      F.is_prototype()
          ? 1.0 + std::pow(F.p() * tr.L() / F.coefficient().C1(), 1.0 / F.p()) + 1.0
          : K + 2 * RE + 10.0);
  Rng rng(0xcf);
  const int n = F.domain().dim();
  double sup = 0.0;
  for (int i = 0; i < 4000; ++i) {
    Eigen::VectorXd x = rng.box(F.domain().lo, F.domain().hi);
    Eigen::VectorXd d = rng.cube(n, 1.0);
    if (d.norm() < 1e-6) continue;
    d.normalize();
    const Eigen::VectorXd xi = rng.uniform(K + RE, s_hi) * d;
    try {
      const double Fv = F.value(x, xi);
      const Eigen::VectorXd dF = F.gradient(x, xi);
      const Eigen::MatrixXd H = tr.d2psi(Fv) * dF * dF.transpose() +
                                tr.dpsi(Fv) * F.hessian_ext(x, xi);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
      sup = std::max(sup, es.eigenvalues().cwiseAbs().maxCoeff());
    } catch (const std::domain_error&) {
    }
  }
  return std::max(sup, 1.0);
}

}  // namespace detail

inline RegularizedIntegrand assemble(const Integrand& base, double K, double eps) {
  if (!(eps > 0.0 && eps <= 1.0))
    throw std::invalid_argument("assemble: eps must lie in (0,1]");
  if (!(K > 0.0)) throw std::invalid_argument("assemble: K must be positive");
  Truncation tr(detail::value_sup(base, K));
  const double CF = detail::truncated_hessian_sup(base, tr, K);
  ConvexCorrection corr(K, base.body().outer_radius(), CF);
  return RegularizedIntegrand(base, tr, corr, eps, K);
}

}  // namespace wde
