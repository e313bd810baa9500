#pragma once

// Numerical certification of dual relative smoothness / strong convexity.

#include "dpgd/core.hpp"
#include "dpgd/problems.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dpgd {

/// The Hessian of k at grad f(x) is singular, indefinite, or non-finite.
class ConditioningError : public std::runtime_error {
 public:
  ConditioningError(const std::string& what, double lambda_min)
      : std::runtime_error(what + " (lambda_min = " + std::to_string(lambda_min) + ")"),
        lambda_min_(lambda_min) {}
  double lambda_min() const { return lambda_min_; }

 private:
  double lambda_min_;
};

/**
 * Sampled and closed-form dual constants for one (f, k) pair.
 *
 * L_star_estimate is the sup of sampled ratios D_k(grad f(y), grad f(x)) / D_f(x, y),
 * a lower bound for any valid L*; mu_star_estimate is the inf, an upper
 * bound for any valid mu*. Constants that come from sampled extrema carry
 * estimate status; `n_samples` says how many.
 */
struct CertificateReport {
  std::optional<double> L_star_estimate;
  std::optional<double> mu_star_estimate;
  std::optional<double> closed_form_L_star;
  std::optional<double> closed_form_mu_star;
  long n_samples = 0;
  long n_skipped = 0;
  std::optional<double> worst_violation;
  std::map<std::string, double> constants;
  nlohmann::json extra = nlohmann::json::object();
};

nlohmann::json report_to_json(const CertificateReport& report);

using PairSampler = std::function<std::pair<Vec, Vec>()>;

/// Independent points center + rho u with u uniform on the sphere and log10(rho) uniform in [log10 lo, log10 hi].
PairSampler log_radius_sampler(const Vec& center, double r_lo, double r_hi, std::uint64_t seed);

struct RatioSample {
  double inf_ratio = 0;
  double sup_ratio = 0;
  std::vector<double> ratios;
  long skipped = 0;
};

/// Pairs with D_f(x, y) <= 1e-12, outside the domain, or with non-finite ratios are skipped and counted.
RatioSample sample_bregman_ratio(const Objective<double>& f, const DualReference<double>& k,
                                 const PairSampler& sampler, long n_pairs);

struct SecondOrderCheck {
  bool passed = false;
  double lambda_min = 0;  // of S = M^{1/2} H M^{1/2}, M = hess k(grad f(x)), H = hess f(x)
  double lambda_max = 0;
  double lower_margin = 0;  // lambda_min - mu*
  double upper_margin = 0;  // L* - lambda_max
};

/// mu* [hess k(grad f(x))]^{-1} <= hess f(x) <= L* [hess k(grad f(x))]^{-1}, checked with 1e-8 slack.
SecondOrderCheck check_second_order(const Objective<double>& f, const DualReference<double>& k,
                                    const Vec& x, double L_star, double mu_star);

/// Symmetric square root through the eigendecomposition; throws ConditioningError unless positive definite.
Mat spd_sqrt(const Mat& M);

/// Gradient/Hessian growth constants and the resulting closed-form mu*, L* for ||Ax - b||_p^p.
CertificateReport pnorm_constants(const ProblemInstance& inst, long n_dirs, std::uint64_t seed = 7);

/// sqrt(n) ||A||_2, an upper bound on eta since ||s||_2 <= sqrt(n) on the cube.
double exp_penalty_eta_bound(const Mat& A);

/// sup_{||s||_inf <= 1} ||A^T s||: exact by vertex enumeration for n <= exact_limit, else exp_penalty_eta_bound.
double exp_penalty_eta(const Mat& A, int exact_limit, bool* exact = nullptr);

/// L*_tau = (2R/r) (||A^T A|| / tau) (eta + ||c||). r and R default to the instance's radii.
CertificateReport exp_penalty_constants(const ProblemInstance& inst, std::optional<double> r = std::nullopt,
                                        std::optional<double> R = std::nullopt, int exact_eta_limit = 20);

/// Exact constants for the quadratic pair: the extreme generalized eigenvalues of (A, P).
CertificateReport quadratic_constants(const Mat& A, const Mat& P);

struct ConditionComparison {
  double primal_kappa = 0;  // L / mu = p^2 kappa^p
  double dual_kappa = 0;    // L* / mu* = (p-1)^2 kappa^{4-q}
};

/// Condition numbers of the primal (Bregman) and dual preconditioned methods for ||Ax - b||^p / p.
ConditionComparison primal_dual_condition_comparison(const Mat& A, double p);

}  // namespace dpgd
