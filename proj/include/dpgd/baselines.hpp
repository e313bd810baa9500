#pragma once

// Reference first-order methods: gradient descent and the Bregman gradient method.

#include "dpgd/core.hpp"
#include "dpgd/solver.hpp"

namespace dpgd {

/// Strictly convex reference h with closed-form inverse gradient map grad h*.
template <typename Scalar>
struct MirrorMap {
  using VectorType = Vector<Scalar>;
  using MatrixType = Matrix<Scalar>;

  Eigen::Index dim = 0;
  std::function<Scalar(const VectorType&)> value;
  std::function<VectorType(const VectorType&)> gradient;
  std::function<VectorType(const VectorType&)> conjugate_gradient;
  std::function<bool(const VectorType&)> conjugate_in_domain;  // empty: all of R^d
};

/// h(x) = ||x||^2 / 2.
template <typename Scalar>
MirrorMap<Scalar> euclidean_mirror_map(Eigen::Index dim) {
  MirrorMap<Scalar> h;
  h.dim = dim;
  h.value = [](const Vector<Scalar>& x) { return Scalar(0.5) * x.squaredNorm(); };
  h.gradient = [](const Vector<Scalar>& x) { return x; };
  h.conjugate_gradient = [](const Vector<Scalar>& y) { return y; };
  return h;
}

/// h(x) = ||x - c||^p / p, with grad h*(y) = c + ||y||^{(2-p)/(p-1)} y.
template <typename Scalar>
MirrorMap<Scalar> power_mirror_map(const Vector<Scalar>& center, Scalar p) {
  if (!(p > 1)) throw std::invalid_argument("power_mirror_map: p must exceed 1");
  MirrorMap<Scalar> h;
  h.dim = center.size();
  h.value = [center, p](const Vector<Scalar>& x) { return std::pow((x - center).norm(), p) / p; };
  h.gradient = [center, p](const Vector<Scalar>& x) {
    const Vector<Scalar> y = x - center;
    const Scalar r = y.norm();
    if (r == Scalar(0)) return Vector<Scalar>(Vector<Scalar>::Zero(y.size()));
    return Vector<Scalar>(std::pow(r, p - 2) * y);
  };
  h.conjugate_gradient = [center, p](const Vector<Scalar>& y) {
    const Scalar r = y.norm();
    if (r == Scalar(0)) return center;
    return Vector<Scalar>(center + std::pow(r, (2 - p) / (p - 1)) * y);
  };
  return h;
}

/// x - (1/L) grad f(x).
template <typename Scalar>
Vector<Scalar> gd_step(const Objective<Scalar>& f, const Vector<Scalar>& x, Scalar L) {
  detail::require_domain(f, x, "gd_step");
  return x - (Scalar(1) / L) * f.gradient(x);
}

/// grad h*(grad h(x) - (1/L) grad f(x)).
template <typename Scalar>
Vector<Scalar> bregman_step(const Objective<Scalar>& f, const MirrorMap<Scalar>& h,
                            const Vector<Scalar>& x, Scalar L) {
  detail::require_domain(f, x, "bregman_step");
  const Vector<Scalar> y = h.gradient(x) - (Scalar(1) / L) * f.gradient(x);
  if (h.conjugate_in_domain && !h.conjugate_in_domain(y))
    throw DomainError("bregman_step: argument outside domain of grad h*");
  return h.conjugate_gradient(y);
}

/// Gradient descent driven by the shared loop; k only monitors k_gap (and the adaptive conditions).
template <typename Scalar>
IterateTrace<Scalar> run_gradient_descent(const Objective<Scalar>& f, const DualReference<Scalar>& k,
                                          const std::type_identity_t<Vector<Scalar>>& x0, const SolverConfig<Scalar>& cfg) {
  StepMap<Scalar> step = [](const Vector<Scalar>& x, const Vector<Scalar>& g, Scalar L) {
    return Vector<Scalar>(x - (Scalar(1) / L) * g);
  };
  return detail::drive(f, k, x0, cfg, step);
}

template <typename Scalar>
IterateTrace<Scalar> run_bregman(const Objective<Scalar>& f, const MirrorMap<Scalar>& h,
                                 const DualReference<Scalar>& k, const std::type_identity_t<Vector<Scalar>>& x0,
                                 const SolverConfig<Scalar>& cfg) {
  StepMap<Scalar> step = [&h](const Vector<Scalar>& x, const Vector<Scalar>& g, Scalar L) {
    const Vector<Scalar> y = h.gradient(x) - (Scalar(1) / L) * g;
    if (h.conjugate_in_domain && !h.conjugate_in_domain(y))
      return Vector<Scalar>(Vector<Scalar>::Constant(x.size(), std::numeric_limits<Scalar>::quiet_NaN()));
    return h.conjugate_gradient(y);
  };
  return detail::drive(f, k, x0, cfg, step);
}

}  // namespace dpgd
