#pragma once

// The degeneracy set E: a bounded convex body with 0 in its interior, with
// its Minkowski gauge, dual gauge, radii and the G_delta maps.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "wde/rng.hpp"

namespace wde {

enum class BodyKind { Ball, Ellipsoid, Polytope };

struct Facet {
  Eigen::VectorXd a;  // outward normal
  double b;           // offset: body side is <a,x> <= b, b > 0
};

class ConvexBody {
 public:
  static ConvexBody ball(int n, double radius) {
    if (n < 2) throw std::invalid_argument("body: dimension must be >= 2");
    if (!(radius > 0.0) || !std::isfinite(radius))
      throw std::invalid_argument("body: ball radius must be positive");
    ConvexBody b;
    b.kind_ = BodyKind::Ball;
    b.n_ = n;
    b.radius_ = radius;
    b.rE_ = b.RE_ = radius;
    return b;
  }

  // E = { x : x^T Q x <= 1 } with Q symmetric positive definite
  static ConvexBody ellipsoid(const Eigen::MatrixXd& Q) {
    if (Q.rows() != Q.cols() || Q.rows() < 2)
      throw std::invalid_argument("body: ellipsoid matrix must be square, n >= 2");
    if (!Q.isApprox(Q.transpose(), 1e-12))
      throw std::invalid_argument("body: ellipsoid matrix must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw std::invalid_argument("body: ellipsoid matrix must be positive definite");
    ConvexBody b;
    b.kind_ = BodyKind::Ellipsoid;
    b.n_ = static_cast<int>(Q.rows());
    b.Q_ = (Q + Q.transpose()) / 2.0;
    b.Qinv_ = b.Q_.inverse();
    b.rE_ = 1.0 / std::sqrt(es.eigenvalues().maxCoeff());
    b.RE_ = 1.0 / std::sqrt(es.eigenvalues().minCoeff());
    return b;
  }

  static ConvexBody polytope(const std::vector<Eigen::VectorXd>& vertices) {
    if (vertices.empty())
      throw std::invalid_argument("body: polytope needs vertices");
    const int n = static_cast<int>(vertices.front().size());
    if (n != 2 && n != 3)
      throw std::invalid_argument("body: polytopes supported in n = 2 or 3 only");
    for (const auto& v : vertices)
      if (v.size() != n || !v.allFinite())
        throw std::invalid_argument("body: inconsistent or non-finite vertex");
    if (affine_rank(vertices) < n)
      throw std::invalid_argument(
          "body: polytope vertices must contain n+1 affinely independent points");
    ConvexBody b;
    b.kind_ = BodyKind::Polytope;
    b.n_ = n;
    b.verts_ = vertices;
    b.facets_ = (n == 2) ? facets2d(vertices) : facets3d(vertices);
    b.rE_ = std::numeric_limits<double>::infinity();
    for (auto& f : b.facets_) {
      if (!(f.b > 1e-12 * f.a.norm()))
        throw std::invalid_argument("body: 0 must lie strictly inside the polytope");
      b.rE_ = std::min(b.rE_, f.b / f.a.norm());
    }
    b.RE_ = 0.0;
    for (const auto& v : vertices) b.RE_ = std::max(b.RE_, v.norm());
    return b;
  }

  BodyKind kind() const { return kind_; }
  int dim() const { return n_; }
  double inner_radius() const { return rE_; }
  double outer_radius() const { return RE_; }
  const std::vector<Facet>& facets() const { return facets_; }
  const std::vector<Eigen::VectorXd>& vertices() const { return verts_; }

  // Minkowski gauge |xi|_E = inf{ t > 0 : xi in tE }
  double gauge(const Eigen::VectorXd& xi) const {
    check_vec(xi);
    switch (kind_) {
      case BodyKind::Ball:
        return xi.norm() / radius_;
      case BodyKind::Ellipsoid:
        return std::sqrt(std::max(0.0, xi.dot(Q_ * xi)));
      case BodyKind::Polytope: {
        double t = 0.0;
        for (const auto& f : facets_) t = std::max(t, f.a.dot(xi) / f.b);
        return std::max(t, 0.0);
      }
    }
    return 0.0;
  }

  // dual gauge |xi|_{E'} = sup_{e in E} <xi, e>
  double dual_gauge(const Eigen::VectorXd& xi) const {
    check_vec(xi);
    switch (kind_) {
      case BodyKind::Ball:
        return radius_ * xi.norm();
      case BodyKind::Ellipsoid:
        return std::sqrt(std::max(0.0, xi.dot(Qinv_ * xi)));
      case BodyKind::Polytope: {
        double s = 0.0;
        for (const auto& v : verts_) s = std::max(s, v.dot(xi));
        return s;
      }
    }
    return 0.0;
  }

  // quasi-uniform sample of dE* = { e : |e|_{E'} = 1 }
  std::vector<Eigen::VectorXd> dual_boundary_directions(int count) const {
    if (count < 2 * n_)
      throw std::invalid_argument("dual_boundary_directions: count must be >= 2n");
    std::vector<Eigen::VectorXd> out;
    out.reserve(count);
    if (n_ == 2) {
      for (int k = 0; k < count; ++k) {
        const double th = 2.0 * M_PI * k / count;
        Eigen::VectorXd d(2);
        d << std::cos(th), std::sin(th);
        out.push_back(d / dual_gauge(d));
      }
    } else if (n_ == 3) {
      // Fibonacci sphere
      const double ga = M_PI * (3.0 - std::sqrt(5.0));
      for (int k = 0; k < count; ++k) {
        const double z = 1.0 - 2.0 * (k + 0.5) / count;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        Eigen::VectorXd d(3);
        d << r * std::cos(ga * k), r * std::sin(ga * k), z;
        out.push_back(d / dual_gauge(d));
      }
    } else {
      Rng rng(0x9e3779b97f4a7c15ull);
      while (static_cast<int>(out.size()) < count) {
        Eigen::VectorXd d = rng.cube(n_, 1.0);
        const double nn = d.norm();
        if (nn < 1e-3 || nn > 1.0) continue;
        out.push_back(d / dual_gauge(d));
      }
    }
    return out;
  }

 private:
  ConvexBody() = default;

  void check_vec(const Eigen::VectorXd& xi) const {
    if (xi.size() != n_ || !xi.allFinite())
      throw std::invalid_argument("gauge: vector must be finite with matching dimension");
  }

  static int affine_rank(const std::vector<Eigen::VectorXd>& pts) {
    Eigen::MatrixXd M(static_cast<int>(pts.size()) - 1, pts.front().size());
    for (size_t i = 1; i < pts.size(); ++i)
      M.row(static_cast<int>(i) - 1) = (pts[i] - pts[0]).transpose();
    return static_cast<int>(M.colPivHouseholderQr().rank());
  }

  // Andrew monotone chain; edges of the CCW hull give outward normals
  static std::vector<Facet> facets2d(std::vector<Eigen::VectorXd> pts) {
    std::sort(pts.begin(), pts.end(), [](const auto& p, const auto& q) {
      return p[0] < q[0] || (p[0] == q[0] && p[1] < q[1]);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const auto& p, const auto& q) { return p == q; }),
              pts.end());
    auto cross = [](const Eigen::VectorXd& o, const Eigen::VectorXd& a,
                    const Eigen::VectorXd& b) {
      return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    std::vector<Eigen::VectorXd> hull(2 * pts.size());
    size_t k = 0;
    for (const auto& p : pts) {
      while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
      hull[k++] = p;
    }
    const size_t lower = k + 1;
    for (auto it = pts.rbegin() + 1, lim = pts.rend(); it != lim; ++it) {
      while (k >= lower && cross(hull[k - 2], hull[k - 1], *it) <= 0) --k;
      hull[k++] = *it;
    }
    hull.resize(k - 1);  // CCW, last point == first removed
    if (hull.size() < 3)
      throw std::invalid_argument("body: polytope is degenerate (collinear vertices)");
    std::vector<Facet> fs;
    for (size_t i = 0; i < hull.size(); ++i) {
      const auto& p = hull[i];
      const auto& q = hull[(i + 1) % hull.size()];
      Eigen::VectorXd a(2);
      a << q[1] - p[1], -(q[0] - p[0]);  // outward for CCW
      fs.push_back({a, a.dot(p)});
    }
    return fs;
  }

  // brute-force hull facets for small 3d vertex sets
  static std::vector<Facet> facets3d(const std::vector<Eigen::VectorXd>& pts) {
    const size_t m = pts.size();
    std::vector<Facet> fs;
    auto known = [&](const Eigen::VectorXd& a, double b) {
      for (const auto& f : fs)
        if ((f.a - a).norm() < 1e-9 && std::abs(f.b - b) < 1e-9) return true;
      return false;
    };
    for (size_t i = 0; i < m; ++i)
      for (size_t j = i + 1; j < m; ++j)
        for (size_t l = j + 1; l < m; ++l) {
          Eigen::Vector3d u = pts[j].head<3>() - pts[i].head<3>();
          Eigen::Vector3d v = pts[l].head<3>() - pts[i].head<3>();
          Eigen::Vector3d nr = u.cross(v);
          if (nr.norm() < 1e-12) continue;
          nr.normalize();
          double b = nr.dot(pts[i].head<3>());
          double lo = b, hi = b;
          for (const auto& p : pts) {
            const double d = nr.dot(p.head<3>());
            lo = std::min(lo, d);
            hi = std::max(hi, d);
          }
          const double tol = 1e-10 * (1.0 + std::abs(b));
          Eigen::VectorXd a = nr;
          if (hi <= b + tol && !known(a, b)) fs.push_back({a, b});
          if (lo >= b - tol && !known(-a, -b)) fs.push_back({-a, -b});
        }
    if (fs.size() < 4)
      throw std::invalid_argument("body: degenerate 3d polytope");
    return fs;
  }

  BodyKind kind_ = BodyKind::Ball;
  int n_ = 0;
  double radius_ = 1.0;
  Eigen::MatrixXd Q_, Qinv_;
  std::vector<Eigen::VectorXd> verts_;
  std::vector<Facet> facets_;
  double rE_ = 0.0, RE_ = 0.0;
};

// G_delta(xi) = ((|xi|_E - (1+delta))_+ / |xi|_E) xi, 0 at the origin.
// delta = 0 gives G.
inline Eigen::VectorXd g_delta(const ConvexBody& body, double delta,
                               const Eigen::VectorXd& xi) {
  if (delta < 0.0) throw std::invalid_argument("g_delta: delta must be >= 0");
  const double g = body.gauge(xi);
  if (g <= 1.0 + delta) return Eigen::VectorXd::Zero(xi.size());
  return ((g - (1.0 + delta)) / g) * xi;
}

// Body description file: {"type": "ball"|"ellipsoid"|"polytope", "dimension",
// "radius" | "matrix" | "vertices"}. Throws invalid_argument naming the field.
inline ConvexBody body_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type"))
    throw std::invalid_argument("body file: missing field 'type'");
  const std::string type = j.at("type").get<std::string>();
  if (type == "ball") {
    if (!j.contains("radius"))
      throw std::invalid_argument("body file: ball requires field 'radius'");
    const int n = j.value("dimension", 2);
    return ConvexBody::ball(n, j.at("radius").get<double>());
  }
  if (type == "ellipsoid") {
    if (!j.contains("matrix"))
      throw std::invalid_argument("body file: ellipsoid requires field 'matrix'");
    const auto& rows = j.at("matrix");
    const int n = static_cast<int>(rows.size());
    Eigen::MatrixXd Q(n, n);
    for (int r = 0; r < n; ++r) {
      if (static_cast<int>(rows[r].size()) != n)
        throw std::invalid_argument("body file: 'matrix' must be square");
      for (int c = 0; c < n; ++c) Q(r, c) = rows[r][c].get<double>();
    }
    return ConvexBody::ellipsoid(Q);
  }
  if (type == "polytope") {
    if (!j.contains("vertices"))
      throw std::invalid_argument("body file: polytope requires field 'vertices'");
    std::vector<Eigen::VectorXd> vs;
    for (const auto& row : j.at("vertices")) {
      Eigen::VectorXd v(static_cast<int>(row.size()));
      for (int c = 0; c < v.size(); ++c) v[c] = row[c].get<double>();
      vs.push_back(v);
    }
    return ConvexBody::polytope(vs);
  }
  throw std::invalid_argument("body file: unknown type '" + type + "'");
}

}  // namespace wde
