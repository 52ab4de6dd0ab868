#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace wde {

// Deterministic RNG used everywhere randomness appears; identical seeds give
// identical streams across platforms (mt19937_64 output mapped to [0,1) by a
// fixed bit recipe, no distribution objects with unspecified algorithms).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // uniform in the centered cube [-s, s]^n
  Eigen::VectorXd cube(int n, double s) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(-s, s);
    return v;
  }

  // uniform in an axis-aligned box
  Eigen::VectorXd box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    Eigen::VectorXd v(lo.size());
    for (int i = 0; i < lo.size(); ++i) v[i] = uniform(lo[i], hi[i]);
    return v;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace wde
