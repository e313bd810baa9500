#include "dpgd/random.hpp"

#include <cmath>
#include <numbers>

namespace dpgd {

double Rng::gaussian() {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return z;
  }
  // 1 - u lies in (0, 1], so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

Vec Rng::gaussian_vector(Eigen::Index n) {
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = gaussian();
  return v;
}

Vec Rng::unit_vector(Eigen::Index n) {
  Vec v = gaussian_vector(n);
  double norm = v.norm();
  while (norm == 0.0) {
    v = gaussian_vector(n);
    norm = v.norm();
  }
  return v / norm;
}

}  // namespace dpgd
