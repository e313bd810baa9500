#pragma once

// Objective / dual-reference abstractions and Bregman-divergence machinery.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

namespace dpgd {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vec = Vector<double>;
using Mat = Matrix<double>;

/// A point (or its evaluation) lies outside the function's domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Evaluation would overflow the floating-point range; treated as leaving the domain.
class RangeError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A non-finite value or gradient showed up during an iteration.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, long iterate)
      : std::runtime_error(what + " (iterate " + std::to_string(iterate) + ")"), iterate_(iterate) {}
  long iterate() const { return iterate_; }

 private:
  long iterate_;
};

/// Operation needs input the caller did not provide (e.g. a reference minimum).
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A problem-class assumption (full rank, positive c_G, ...) failed.
class AssumptionViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
struct ReferenceMin {
  Vector<Scalar> x_min;
  Scalar f_min;
};

/**
 * Convex, essentially smooth objective f.
 *
 * `hessian` and `in_domain` may be empty: an empty `in_domain` means
 * dom f = R^d, an empty `hessian` means second-order information is
 * unavailable.
 */
template <typename Scalar>
struct Objective {
  using VectorType = Vector<Scalar>;
  using MatrixType = Matrix<Scalar>;

  Eigen::Index dim = 0;
  std::function<Scalar(const VectorType&)> value;
  std::function<VectorType(const VectorType&)> gradient;
  std::function<MatrixType(const VectorType&)> hessian;
  std::function<bool(const VectorType&)> in_domain;
  std::optional<ReferenceMin<Scalar>> reference_min;

  bool has_hessian() const { return static_cast<bool>(hessian); }
  bool contains(const VectorType& x) const { return !in_domain || in_domain(x); }
};

/**
 * Legendre dual reference k, uniquely minimized at the origin.
 *
 * `conjugate_gradient` is the inverse gradient map (grad k*) when known.
 */
template <typename Scalar>
struct DualReference {
  using VectorType = Vector<Scalar>;
  using MatrixType = Matrix<Scalar>;

  Eigen::Index dim = 0;
  std::function<Scalar(const VectorType&)> value;
  std::function<VectorType(const VectorType&)> gradient;
  std::function<MatrixType(const VectorType&)> hessian;
  std::function<VectorType(const VectorType&)> conjugate_gradient;
  std::function<bool(const VectorType&)> in_domain;
  Scalar min_value = Scalar(0);

  bool has_hessian() const { return static_cast<bool>(hessian); }
  bool has_conjugate_gradient() const { return static_cast<bool>(conjugate_gradient); }
  bool contains(const VectorType& x) const { return !in_domain || in_domain(x); }
};

/// Anything evaluable with a value and a gradient (Objective, DualReference, MirrorMap).
template <typename F>
concept Differentiable = requires(const F& fn, const typename F::VectorType& x) {
  { fn.value(x) };
  { fn.gradient(x) };
};

template <typename F>
concept Evaluable = requires(const F& fn, const typename F::VectorType& x) {
  { fn.value(x) };
};

namespace detail {

template <typename F>
bool point_in_domain(const F& fn, const typename F::VectorType& x) {
  if constexpr (requires { fn.contains(x); }) {
    return fn.contains(x);
  } else {
    return true;
  }
}

template <typename F>
void require_domain(const F& fn, const typename F::VectorType& x, const char* who) {
  if (!point_in_domain(fn, x)) throw DomainError(std::string(who) + ": point outside domain");
}

}  // namespace detail

/// D(x, y) = fn(x) - fn(y) - <grad fn(y), x - y>, evaluated at interior differentiable points.
template <Differentiable F>
auto bregman_divergence(const F& fn, const typename F::VectorType& x,
                        const typename F::VectorType& y) {
  detail::require_domain(fn, x, "bregman_divergence");
  detail::require_domain(fn, y, "bregman_divergence");
  if (x == y) return decltype(fn.value(x))(0);
  return fn.value(x) - fn.value(y) - fn.gradient(y).dot(x - y);
}

/// Default central-difference step for gradients: 1e-5 (1 + ||x||).
template <typename Derived>
typename Derived::Scalar default_gradient_step(const Eigen::MatrixBase<Derived>& x) {
  return typename Derived::Scalar(1e-5) * (typename Derived::Scalar(1) + x.norm());
}

/// Default step for second differences: 1e-3 (1 + ||x||).
template <typename Derived>
typename Derived::Scalar default_hessian_step(const Eigen::MatrixBase<Derived>& x) {
  return typename Derived::Scalar(1e-3) * (typename Derived::Scalar(1) + x.norm());
}

/// Central-difference gradient (fn(x + h e_j) - fn(x - h e_j)) / 2h.
template <Evaluable F>
typename F::VectorType finite_diff_gradient(const F& fn, const typename F::VectorType& x,
                                            typename F::VectorType::Scalar h) {
  using Scalar = typename F::VectorType::Scalar;
  if (!(h > Scalar(0))) throw std::invalid_argument("finite_diff_gradient: step must be positive");
  detail::require_domain(fn, x, "finite_diff_gradient");
  typename F::VectorType g(x.size());
  typename F::VectorType probe = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    probe[j] = x[j] + h;
    const Scalar fp = fn.value(probe);
    probe[j] = x[j] - h;
    const Scalar fm = fn.value(probe);
    probe[j] = x[j];
    g[j] = (fp - fm) / (Scalar(2) * h);
  }
  return g;
}

template <Evaluable F>
typename F::VectorType finite_diff_gradient(const F& fn, const typename F::VectorType& x) {
  return finite_diff_gradient(fn, x, default_gradient_step(x));
}

/// Second-order central differences of the value only; result is symmetrized.
template <Evaluable F>
typename F::MatrixType finite_diff_hessian(const F& fn, const typename F::VectorType& x,
                                           typename F::VectorType::Scalar h) {
  using Scalar = typename F::VectorType::Scalar;
  if (!(h > Scalar(0))) throw std::invalid_argument("finite_diff_hessian: step must be positive");
  detail::require_domain(fn, x, "finite_diff_hessian");
  const Eigen::Index d = x.size();
  typename F::MatrixType H(d, d);
  typename F::VectorType probe = x;
  const Scalar f0 = fn.value(x);
  auto shifted = [&](Eigen::Index i, Scalar si, Eigen::Index j, Scalar sj) {
    probe = x;
    probe[i] += si;
    probe[j] += sj;
    return fn.value(probe);
  };
  for (Eigen::Index i = 0; i < d; ++i) {
    const Scalar fp = shifted(i, h, i, Scalar(0));
    const Scalar fm = shifted(i, -h, i, Scalar(0));
    H(i, i) = (fp - Scalar(2) * f0 + fm) / (h * h);
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const Scalar fpp = shifted(i, h, j, h);
      const Scalar fpm = shifted(i, h, j, -h);
      const Scalar fmp = shifted(i, -h, j, h);
      const Scalar fmm = shifted(i, -h, j, -h);
      H(i, j) = (fpp - fpm - fmp + fmm) / (Scalar(4) * h * h);
      H(j, i) = H(i, j);
    }
  }
  return H;
}

template <Evaluable F>
typename F::MatrixType finite_diff_hessian(const F& fn, const typename F::VectorType& x) {
  return finite_diff_hessian(fn, x, default_hessian_step(x));
}

/// ||a - b|| / max(||b||, floor); the floor keeps the ratio defined near zero.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar relative_error(const Eigen::MatrixBase<DerivedA>& a,
                                         const Eigen::MatrixBase<DerivedB>& b,
                                         typename DerivedA::Scalar floor = 1e-12) {
  using std::max;
  return (a - b).norm() / max(b.norm(), floor);
}

}  // namespace dpgd
