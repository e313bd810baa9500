#pragma once

// Concrete objective / dual-reference pairs and random instance generation.

#include "dpgd/core.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace dpgd {

enum class ProblemKind { pnorm, exp_penalty, quadratic, power1d };

std::string to_string(ProblemKind kind);
/// Accepts "pnorm", "exp_penalty" / "exp-penalty", "quadratic", "power1d".
ProblemKind parse_problem_kind(std::string_view name);

/**
 * Problem data. Which fields are meaningful depends on `kind`:
 *  - pnorm:       A (n x d), b, p
 *  - exp_penalty: A (unit rows), b, c, tau; optional inradius/circumradius
 *  - quadratic:   A (SPD d x d), b, P (SPD preconditioner)
 *  - power1d:     p and the shift b (1-vector), A = [1]
 * `x0` is an optional suggested starting point.
 */
struct ProblemInstance {
  ProblemKind kind = ProblemKind::pnorm;
  Mat A;
  Vec b;
  Vec c;
  Mat P;
  double p = 2.0;
  double tau = 1.0;
  std::optional<double> inradius;
  std::optional<double> circumradius;
  Vec x0;
  std::uint64_t seed = 0;

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index d() const { return A.cols(); }
};

struct ProblemPair {
  Objective<double> f;
  DualReference<double> k;
};

/// Largest exponent (A_i x - b_i) / tau accepted before exp overflows.
inline constexpr double kMaxPenaltyExponent = 700.0;

/// f(x) = ||Ax - b||_p^p (not divided by p).
Objective<double> pnorm_objective(const ProblemInstance& inst);

/// k(x*) = ((||x*||^2 + 1)^{q/2} - 1) / q with q = p / (p - 1).
DualReference<double> pnorm_dual_reference(double p, Eigen::Index dim);

/// f(x) = c^T x + tau * sum_i exp((A_i x - b_i) / tau).
Objective<double> exp_penalty_objective(const ProblemInstance& inst);

/// k(x*) = ||x*|| - log(||x*|| + 1).
DualReference<double> exp_penalty_dual_reference(Eigen::Index dim);

/// f(x) = x^T A x / 2 - b^T x and k(x*) = x*^T P^{-1} x* / 2; A and P must be SPD.
ProblemPair quadratic_problem(const Mat& A, const Vec& b, const Mat& P);

/// f(x) = |x - b|^p / p and k(x*) = |x*|^q / q on the real line.
ProblemPair power1d_problem(double b, double p);

/// Objective and matching dual reference for an instance.
ProblemPair make_problem(const ProblemInstance& inst);

/**
 * Checks and normalizes an instance in place: p >= 2 for pnorm/power1d,
 * full column rank for pnorm (singular values > 1e-10 sigma_max), unit rows
 * for exp_penalty (rows are rescaled together with b), SPD for quadratic.
 */
void validate_instance(ProblemInstance& inst);

/// Singular values of A, largest first. Uses a thin QR first when A is tall.
Vec singular_values(const Mat& A);

struct GenerateSpec {
  ProblemKind kind = ProblemKind::pnorm;
  Eigen::Index d = 10;
  Eigen::Index n = 0;  // 0 selects n = 10 d (pnorm, exp_penalty)
  double p = 4.0;
  double tau = 1.0;
  std::uint64_t seed = 1;
  bool box = false;          // exp_penalty: axis-aligned unit box
  std::optional<Vec> c;      // exp_penalty: defaults to e_1 (box) or Gaussian
  double shift = 0.0;        // power1d: b
  std::string precond = "exact";  // quadratic: exact | identity | jacobi
  double condition = 10.0;   // quadratic: condition number of A
};

/**
 * Deterministic random instance.
 *  - pnorm: A, b, x0 i.i.d. standard normal (in that order, A row-major).
 *  - exp_penalty box: A = [I; -I], b = 1, r = 1, R = sqrt(d), x0 = 0.
 *  - exp_penalty random: Gaussian rows normalized, b = 1, c Gaussian, x0 = 0.
 *  - quadratic: A = Q diag(spectrum) Q^T with log-spaced spectrum of the given condition number.
 *  - power1d: b = shift, x0 = shift + 8.
 */
ProblemInstance generate_random_instance(const GenerateSpec& spec);

}  // namespace dpgd
