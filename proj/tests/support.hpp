#pragma once

// Helpers shared by the unit tests and the acceptance binary.

#include "dpgd/core.hpp"
#include "dpgd/problems.hpp"
#include "dpgd/random.hpp"

#include <functional>
#include <string>
#include <vector>

namespace dpgd::testing {

using PointSampler = std::function<Vec(Rng&)>;

struct ShippedPair {
  std::string name;
  ProblemPair pair;
  PointSampler f_point;  // random primal point
  PointSampler k_point;  // random dual point, away from any singularity of k
};

// Gaussian direction with norm log-uniform in [lo, hi].
inline PointSampler log_norm_points(Eigen::Index d, double lo, double hi) {
  return [=](Rng& rng) { return Vec(std::pow(10.0, rng.uniform(std::log10(lo), std::log10(hi))) * rng.unit_vector(d)); };
}

inline PointSampler gaussian_points(Eigen::Index d, double scale) {
  return [=](Rng& rng) { return Vec(scale * rng.gaussian_vector(d)); };
}

inline ProblemInstance small_pnorm(double p, Eigen::Index d, Eigen::Index n, std::uint64_t seed) {
  GenerateSpec spec;
  spec.kind = ProblemKind::pnorm;
  spec.p = p;
  spec.d = d;
  spec.n = n;
  spec.seed = seed;
  return generate_random_instance(spec);
}

inline ProblemInstance box_instance(Eigen::Index d, double tau, const Vec& c) {
  GenerateSpec spec;
  spec.kind = ProblemKind::exp_penalty;
  spec.box = true;
  spec.d = d;
  spec.tau = tau;
  spec.c = c;
  return generate_random_instance(spec);
}

/// Every objective / dual reference family the library ships, at small sizes.
inline std::vector<ShippedPair> shipped_pairs() {
  std::vector<ShippedPair> out;
  for (double p : {2.0, 3.0, 4.0, 6.0}) {
    const auto inst = small_pnorm(p, 5, 40, 17);
    out.push_back({"pnorm p=" + std::to_string(static_cast<int>(p)), make_problem(inst), gaussian_points(5, 1.0),
                   log_norm_points(5, 0.1, 10.0)});
  }
  {
    GenerateSpec spec;
    spec.kind = ProblemKind::exp_penalty;
    spec.d = 4;
    spec.n = 12;
    spec.tau = 0.5;
    spec.seed = 23;
    out.push_back({"exp_penalty random", make_problem(generate_random_instance(spec)), gaussian_points(4, 1.0),
                   log_norm_points(4, 0.1, 10.0)});
  }
  out.push_back({"exp_penalty box tau=0.1", make_problem(box_instance(2, 0.1, Vec::Unit(2, 0))),
                 gaussian_points(2, 1.0), log_norm_points(2, 0.1, 10.0)});
  {
    GenerateSpec spec;
    spec.kind = ProblemKind::quadratic;
    spec.d = 6;
    spec.condition = 50;
    spec.precond = "jacobi";
    spec.seed = 29;
    out.push_back({"quadratic", make_problem(generate_random_instance(spec)), gaussian_points(6, 3.0),
                   gaussian_points(6, 3.0)});
  }
  for (double p : {3.0, 4.0}) {
    auto sign_log = [](double lo, double hi) -> PointSampler {
      return [=](Rng& rng) {
        const double m = std::pow(10.0, rng.uniform(std::log10(lo), std::log10(hi)));
        return Vec::Constant(1, rng.uniform() < 0.5 ? -m : m);
      };
    };
    auto shifted = [sign_log](double b) -> PointSampler {
      return [b, s = sign_log(0.1, 10.0)](Rng& rng) { return Vec(s(rng).array() + b); };
    };
    out.push_back({"power1d p=" + std::to_string(static_cast<int>(p)), power1d_problem(1.0, p), shifted(1.0),
                   sign_log(0.1, 10.0)});
  }
  return out;
}

struct DerivativeReport {
  double worst_grad = 0;
  double worst_hess = 0;
  int points = 0;
};

/// Worst relative errors of the analytic gradient and Hessian against central differences.
template <typename F>
DerivativeReport check_derivatives(const F& fn, const PointSampler& sample, int n_points, Rng& rng) {
  DerivativeReport rep;
  for (int i = 0; i < n_points; ++i) {
    const Vec x = sample(rng);
    if (!fn.contains(x)) continue;
    rep.worst_grad = std::max(rep.worst_grad, relative_error(fn.gradient(x), finite_diff_gradient(fn, x)));
    if (fn.has_hessian()) {
      const Mat H = fn.hessian(x);
      const Mat Hfd = finite_diff_hessian(fn, x);
      rep.worst_hess = std::max(rep.worst_hess, relative_error(H.reshaped(), Hfd.reshaped()));
    }
    ++rep.points;
  }
  return rep;
}

}  // namespace dpgd::testing
