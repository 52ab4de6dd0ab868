#pragma once

// Experiment configuration: JSON parsing/validation for bodies, integrands,
// grids, the named analytic f/g families and harness switches.

#include <cmath>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "wde/convex_body.hpp"
#include "wde/csv.hpp"
#include "wde/integrand.hpp"

namespace wde {

// scalar analytic field with gradient; families are named and versioned so
// fixtures stay reproducible
struct AnalyticField {
  std::string name;
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;
};

inline AnalyticField field_from_json(const nlohmann::json& j, int n) {
  if (!j.is_object() || !j.contains("kind"))
    throw std::invalid_argument("config: field spec needs a 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  AnalyticField f;
  if (kind == "constant") {
    const double v = j.at("value").get<double>();
    f.name = "constant.v1(" + fmt_g17(v) + ")";
    f.value = [v](const Eigen::VectorXd&) { return v; };
    f.grad = [n](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(n); };
    return f;
  }
  if (kind == "affine") {
    const double off = j.value("offset", 0.0);
    Eigen::VectorXd q(n);
    const auto& qa = j.at("q");
    if (static_cast<int>(qa.size()) != n)
      throw std::invalid_argument("config: affine field 'q' has wrong dimension");
    for (int k = 0; k < n; ++k) q[k] = qa[k].get<double>();
    f.name = "affine.v1";
    f.value = [off, q](const Eigen::VectorXd& x) { return off + q.dot(x); };
    f.grad = [q](const Eigen::VectorXd&) { return q; };
    return f;
  }
  if (kind == "profile1d") {
    // g(x) = x1 + ((c x1 + k)_+^2 - (k)_+^2) / (2c): the p = 2 profile whose
    // slope is 1 + (c s + k)_+, bracketing the degeneracy where c s + k < 0
    const double c = j.at("c").get<double>();
    const double k0 = j.at("k").get<double>();
    if (c == 0.0) throw std::invalid_argument("config: profile1d needs c != 0");
    f.name = "profile1d.v1";
    f.value = [c, k0](const Eigen::VectorXd& x) {
      const double m = std::max(c * x[0] + k0, 0.0);
      const double m0 = std::max(k0, 0.0);
      return x[0] + (m * m - m0 * m0) / (2.0 * c);
    };
    f.grad = [c, k0, n](const Eigen::VectorXd& x) {
      Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
      g[0] = 1.0 + std::max(c * x[0] + k0, 0.0);
      return g;
    };
    return f;
  }
  if (kind == "sine") {
    const double amp = j.at("amp").get<double>();
    Eigen::VectorXd w(n);
    const auto& wa = j.at("w");
    for (int k = 0; k < n; ++k) w[k] = wa[k].get<double>();
    const double off = j.value("offset", 0.0);
    f.name = "sine.v1";
    f.value = [off, amp, w](const Eigen::VectorXd& x) {
      return off + amp * std::sin(w.dot(x));
    };
    f.grad = [amp, w](const Eigen::VectorXd& x) {
      return Eigen::VectorXd(amp * std::cos(w.dot(x)) * w);
    };
    return f;
  }
  throw std::invalid_argument("config: unknown field kind '" + kind + "'");
}

struct HarnessSwitches {
  bool cascade = false;
  bool convergence = false;
  bool continuity = false;
  bool subsolution = false;
};

struct ExperimentConfig {
  nlohmann::json raw;  // canonical parsed form, used for hashing

  ConvexBody body = ConvexBody::ball(2, 1.0);
  double p = 2.0;
  nlohmann::json a_spec;

  Eigen::VectorXd lo, hi;
  double h = 0.0;
  nlohmann::json f_spec, g_spec;

  std::vector<double> epsilons;
  std::vector<double> deltas;
  HarnessSwitches harness;
  double nu = 0.125;
  double sigma = 1.0;
  double kappa = 0.9;
  double K_margin = 1.1;
  double K_override = 0.0;  // 0 = derive from the boundary datum
  double tol = 1e-9;
  int direction_count = 64;
  int cascade_steps = 6;
  bool write_solutions = false;
  std::string out = "out";
  std::uint64_t seed = 0;

  int dim() const { return static_cast<int>(lo.size()); }

  Integrand make_integrand() const {
    Domain dom{lo, hi};
    CoefficientField a = CoefficientField::constant(1.0);
    if (!a_spec.is_null()) {
      const std::string kind = a_spec.value("kind", "constant");
      if (kind == "constant")
        a = CoefficientField::constant(a_spec.value("value", 1.0));
      else if (kind == "affine") {
        Eigen::VectorXd s(dim());
        for (int k = 0; k < dim(); ++k) s[k] = a_spec.at("slope")[k].get<double>();
        a = CoefficientField::affine(a_spec.value("offset", 1.0), s, lo, hi);
      } else if (kind == "trig") {
        Eigen::VectorXd w(dim());
        for (int k = 0; k < dim(); ++k) w[k] = a_spec.at("w")[k].get<double>();
        a = CoefficientField::trig(a_spec.value("base", 1.0),
                                   a_spec.value("amp", 0.1), w);
      } else {
        throw std::invalid_argument("config: unknown coefficient kind '" + kind + "'");
      }
    }
    return Integrand::prototype(p, a, dom);
  }

  AnalyticField f_field() const { return field_from_json(f_spec, dim()); }
  AnalyticField g_field() const { return field_from_json(g_spec, dim()); }
};

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: root must be an object");
  ExperimentConfig c;
  c.raw = j;

  if (!j.contains("body")) throw std::invalid_argument("config: missing 'body'");
  c.body = body_from_json(j.at("body"));

  const auto& ig = j.value("integrand", nlohmann::json::object());
  const std::string ik = ig.value("kind", "prototype");
  if (ik != "prototype")
    throw std::invalid_argument("config: only 'prototype' integrands are configurable");
  c.p = ig.value("p", 2.0);
  if (!(c.p > 1.0)) throw std::invalid_argument("config: integrand p must exceed 1");
  c.a_spec = ig.value("a", nlohmann::json());

  if (!j.contains("grid")) throw std::invalid_argument("config: missing 'grid'");
  const auto& gr = j.at("grid");
  const auto& lo = gr.at("lo");
  const auto& hi = gr.at("hi");
  const int n = static_cast<int>(lo.size());
  if (n < 2 || static_cast<int>(hi.size()) != n)
    throw std::invalid_argument("config: grid bounds must agree, dimension >= 2");
  c.lo.resize(n);
  c.hi.resize(n);
  for (int k = 0; k < n; ++k) {
    c.lo[k] = lo[k].get<double>();
    c.hi[k] = hi[k].get<double>();
  }
  c.h = gr.at("h").get<double>();
  if (c.body.dim() != n)
    throw std::invalid_argument("config: body dimension does not match the grid");

  if (!j.contains("f") || !j.contains("g"))
    throw std::invalid_argument("config: missing 'f' or 'g' field specs");
  c.f_spec = j.at("f");
  c.g_spec = j.at("g");
  field_from_json(c.f_spec, n);  // validate now
  field_from_json(c.g_spec, n);

  if (!j.contains("epsilons")) throw std::invalid_argument("config: missing 'epsilons'");
  for (const auto& e : j.at("epsilons")) {
    const double v = e.get<double>();
    if (!(v > 0.0 && v <= 1.0))
      throw std::invalid_argument("config: epsilon values must lie in (0,1]");
    c.epsilons.push_back(v);
  }
  for (const auto& d : j.value("deltas", nlohmann::json::array({0.1}))) {
    const double v = d.get<double>();
    if (!(v > 0.0 && v <= 1.0))
      throw std::invalid_argument("config: delta values must lie in (0,1]");
    c.deltas.push_back(v);
  }

  const auto& hs = j.value("harness", nlohmann::json::object());
  c.harness.cascade = hs.value("cascade", false);
  c.harness.convergence = hs.value("convergence", false);
  c.harness.continuity = hs.value("continuity", false);
  c.harness.subsolution = hs.value("subsolution", false);

  c.nu = j.value("nu", 0.125);
  if (!(c.nu > 0.0 && c.nu <= 0.25))
    throw std::invalid_argument("config: nu must lie in (0, 1/4]");
  c.sigma = j.value("sigma", 1.0);
  c.kappa = j.value("kappa", 0.9);
  if (!(c.kappa > 0.0 && c.kappa < 1.0))
    throw std::invalid_argument("config: kappa must lie in (0,1)");
  c.K_margin = j.value("K_margin", 1.1);
  c.K_override = j.value("K", 0.0);
  c.tol = j.value("tol", 1e-9);
  c.direction_count = j.value("direction_count", 64);
  c.cascade_steps = j.value("cascade_steps", 6);
  c.write_solutions = j.value("write_solutions", false);
  c.out = j.value("out", "out");
  c.seed = j.value("seed", 0ull);
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: parse error: ") + e.what());
  }
  if (j.contains("body") && j.at("body").is_object() && j.at("body").contains("file")) {
    std::ifstream bf(j.at("body").at("file").get<std::string>());
    if (!bf) throw std::invalid_argument("config: cannot open body file");
    nlohmann::json bj;
    bf >> bj;
    j["body"] = bj;
  }
  return parse_config(j);
}

// FNV-1a over the canonical dump, reported in the manifest
inline std::string config_hash(const nlohmann::json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace wde
