#include "dpgd/certify.hpp"

#include "dpgd/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <memory>

namespace dpgd {

using nlohmann::json;

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

double lambda_max_sym(const Mat& M) {
  Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

struct ValGrad {
  double value;
  Vec grad;
};
using SmoothFn = std::function<ValGrad(const Vec&)>;

// Riemannian gradient descent with Armijo backtracking on the unit sphere.
double sphere_descent(const SmoothFn& fn, Vec& s, int iters) {
  s.normalize();
  ValGrad cur = fn(s);
  double t = 1.0;
  for (int it = 0; it < iters; ++it) {
    Vec rg = cur.grad - s.dot(cur.grad) * s;
    const double gn2 = rg.squaredNorm();
    if (!(gn2 > 1e-24 * (1 + cur.value * cur.value))) break;
    t = std::min(2 * t, 1.0 / std::sqrt(gn2));
    bool moved = false;
    while (t > 1e-14) {
      Vec trial = (s - t * rg).normalized();
      ValGrad next = fn(trial);
      if (next.value <= cur.value - 1e-4 * t * gn2) {
        s = std::move(trial);
        cur = std::move(next);
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  return cur.value;
}

// Projected gradient descent on the ball of radius R.
double ball_descent(const SmoothFn& fn, Vec& x, double R, int iters) {
  auto project = [R](Vec v) {
    const double nv = v.norm();
    if (nv > R) v *= R / nv;
    return v;
  };
  x = project(x);
  ValGrad cur = fn(x);
  double t = 1.0;
  for (int it = 0; it < iters; ++it) {
    const double gn = cur.grad.norm();
    if (!(gn > 1e-12 * (1 + std::abs(cur.value)))) break;
    t = std::min(2 * t, (R > 0 ? R : 1.0) / gn);
    bool moved = false;
    while (t * gn > 1e-14 * (1 + R)) {
      Vec trial = project(x - t * cur.grad);
      ValGrad next = fn(trial);
      if (next.value <= cur.value - 1e-4 * (x - trial).squaredNorm() / t) {
        if ((trial - x).norm() == 0) break;
        x = std::move(trial);
        cur = std::move(next);
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  return cur.value;
}

// sign(t) |t|^e with 0 for t = 0, so negative exponents stay finite.
double signed_pow(double t, double e) { return t == 0 ? 0.0 : std::copysign(std::pow(std::abs(t), e), t); }

// Weighted Gram matrix A^T diag(w) A, w >= 0.
Mat weighted_gram(const Mat& A, const Vec& w) {
  Mat WA = w.cwiseSqrt().asDiagonal() * A;
  return WA.transpose() * WA;
}

}  // namespace

json report_to_json(const CertificateReport& report) {
  json j;
  j["L_star_estimate"] = optional_json(report.L_star_estimate);
  j["mu_star_estimate"] = optional_json(report.mu_star_estimate);
  j["closed_form_L_star"] = optional_json(report.closed_form_L_star);
  j["closed_form_mu_star"] = optional_json(report.closed_form_mu_star);
  j["n_samples"] = report.n_samples;
  j["n_skipped"] = report.n_skipped;
  j["worst_violation"] = optional_json(report.worst_violation);
  json constants = json::object();
  for (const auto& [name, value] : report.constants) constants[name] = value;
  j["constants"] = constants;
  if (!report.extra.empty()) j["extra"] = report.extra;
  return j;
}

PairSampler log_radius_sampler(const Vec& center, double r_lo, double r_hi, std::uint64_t seed) {
  if (!(r_lo > 0) || !(r_hi >= r_lo)) throw std::invalid_argument("log_radius_sampler: need 0 < r_lo <= r_hi");
  auto rng = std::make_shared<Rng>(seed);
  const double lo = std::log10(r_lo), hi = std::log10(r_hi);
  return [rng, center, lo, hi]() {
    auto draw = [&]() -> Vec {
      const double radius = std::pow(10.0, rng->uniform(lo, hi));
      return center + radius * rng->unit_vector(center.size());
    };
    Vec x = draw();
    Vec y = draw();
    return std::make_pair(std::move(x), std::move(y));
  };
}

RatioSample sample_bregman_ratio(const Objective<double>& f, const DualReference<double>& k,
                                 const PairSampler& sampler, long n_pairs) {
  RatioSample out;
  out.inf_ratio = std::numeric_limits<double>::infinity();
  out.sup_ratio = -std::numeric_limits<double>::infinity();
  for (long i = 0; i < n_pairs; ++i) {
    auto [x, y] = sampler();
    double ratio;
    try {
      const double df = bregman_divergence(f, x, y);
      if (!(df > 1e-12)) {
        ++out.skipped;
        continue;
      }
      const Vec gx = f.gradient(x);
      const Vec gy = f.gradient(y);
      ratio = bregman_divergence(k, gy, gx) / df;
    } catch (const DomainError&) {
      ++out.skipped;
      continue;
    }
    if (!std::isfinite(ratio)) {
      ++out.skipped;
      continue;
    }
    out.ratios.push_back(ratio);
    out.inf_ratio = std::min(out.inf_ratio, ratio);
    out.sup_ratio = std::max(out.sup_ratio, ratio);
  }
  return out;
}

Mat spd_sqrt(const Mat& M) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.transpose()));
  if (es.info() != Eigen::Success || !es.eigenvalues().allFinite())
    throw ConditioningError("eigendecomposition failed", std::numeric_limits<double>::quiet_NaN());
  const double lmin = es.eigenvalues().minCoeff();
  if (!(lmin > 0)) throw ConditioningError("matrix is not positive definite", lmin);
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

SecondOrderCheck check_second_order(const Objective<double>& f, const DualReference<double>& k,
                                    const Vec& x, double L_star, double mu_star) {
  if (!f.has_hessian() || !k.has_hessian())
    throw UnsupportedError("check_second_order: both Hessians are required");
  const Vec g = f.gradient(x);
  const Mat root = spd_sqrt(k.hessian(g));
  const Mat H = f.hessian(x);
  Mat S = root * H * root;
  S = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
  SecondOrderCheck out;
  out.lambda_min = es.eigenvalues().minCoeff();
  out.lambda_max = es.eigenvalues().maxCoeff();
  out.lower_margin = out.lambda_min - mu_star;
  out.upper_margin = L_star - out.lambda_max;
  out.passed = out.lambda_min >= mu_star - 1e-8 && out.lambda_max <= L_star + 1e-8;
  return out;
}

CertificateReport pnorm_constants(const ProblemInstance& inst, long n_dirs, std::uint64_t seed) {
  if (inst.kind != ProblemKind::pnorm) throw std::invalid_argument("pnorm_constants: not a pnorm instance");
  if (!(inst.p >= 2)) throw AssumptionViolation("pnorm_constants: p must be >= 2");
  if (n_dirs < 1) throw std::invalid_argument("pnorm_constants: n_dirs must be positive");
  const Mat& A = inst.A;
  const Vec& b = inst.b;
  const double p = inst.p;
  const Eigen::Index d = A.cols();
  const int refine_iters = 100;

  const Vec sv = singular_values(A);
  if (sv.size() < d || !(sv[d - 1] > 1e-10 * sv[0]))
    throw AssumptionViolation("pnorm_constants: A is not of full column rank");

  Rng rng(seed);
  Eigen::SelfAdjointEigenSolver<Mat> gram(A.transpose() * A);
  std::vector<Vec> starts;
  starts.push_back(gram.eigenvectors().col(0));
  starts.push_back(gram.eigenvectors().col(d - 1));
  for (long i = 0; i < n_dirs; ++i) starts.push_back(rng.unit_vector(d));

  // ||As||_p^p and its gradient.
  auto g_fn = [&](double sign) -> SmoothFn {
    return [&, sign](const Vec& s) {
      const Vec r = A * s;
      const Vec ar = r.cwiseAbs();
      const double v = ar.array().pow(p).sum();
      Vec w(r.size());
      for (Eigen::Index i = 0; i < r.size(); ++i) w[i] = signed_pow(r[i], p - 1);
      return ValGrad{sign * v, sign * p * (A.transpose() * w)};
    };
  };
  // Extreme eigenvalue of A^T diag(|Au|^{p-2}) A and its gradient in u.
  auto h_fn = [&](double sign) -> SmoothFn {
    return [&, sign](const Vec& u) {
      const Vec r = A * u;
      const Vec w = r.cwiseAbs().array().pow(p - 2).matrix();
      Eigen::SelfAdjointEigenSolver<Mat> es(weighted_gram(A, w));
      const Eigen::Index idx = sign > 0 ? 0 : d - 1;
      const Vec v = es.eigenvectors().col(idx);
      const Vec av = A * v;
      Vec gw(r.size());
      for (Eigen::Index i = 0; i < r.size(); ++i) gw[i] = (p - 2) * signed_pow(r[i], p - 3) * av[i] * av[i];
      return ValGrad{sign * es.eigenvalues()[idx], sign * (A.transpose() * gw)};
    };
  };

  auto extremum = [&](const SmoothFn& fn, Vec* argbest) {
    double best = std::numeric_limits<double>::infinity();
    Vec best_s;
    for (const Vec& s : starts) {
      const double v = fn(s).value;
      if (v < best) {
        best = v;
        best_s = s;
      }
    }
    best = std::min(best, sphere_descent(fn, best_s, refine_iters));
    if (argbest) *argbest = best_s;
    return best;
  };

  Vec s_cg;
  const double c_G = extremum(g_fn(1.0), &s_cg);
  const double sup_G = -extremum(g_fn(-1.0), nullptr);
  starts.push_back(s_cg);
  const double c_H = p == 2 ? gram.eigenvalues()[0] : extremum(h_fn(1.0), nullptr);
  const double sup_H = p == 2 ? gram.eigenvalues()[d - 1] : -extremum(h_fn(-1.0), nullptr);
  if (!(c_G > 0)) throw AssumptionViolation("pnorm_constants: c_G estimate is not positive");
  if (!(c_H > 0)) throw AssumptionViolation("pnorm_constants: c_H estimate is not positive");

  const double sum_bp = b.cwiseAbs().array().pow(p).sum();
  const Vec wb = b.cwiseAbs().array().pow(p - 2).matrix();
  const double norm_B = lambda_max_sym(weighted_gram(A, wb));
  const double pp1 = p * (p - 1);

  CertificateReport rep;
  rep.n_samples = n_dirs;
  auto& K = rep.constants;
  K["c_G"] = c_G;
  K["c_H"] = c_H;
  K["sup_G"] = sup_G;
  K["sup_H"] = sup_H;
  K["L_G"] = std::pow(2.0, -p + 1) * c_G;
  K["C_G"] = std::pow(sum_bp, (p - 1) / p) * std::pow(c_G, 1 / p);
  K["U_G"] = std::pow(2.0, p - 2) * (p + 1) * sup_G;
  K["D_G"] = std::pow(2.0, p - 2) * (p - 1) * sum_bp;
  K["U_H"] = std::pow(2.0, p - 3) * pp1 * sup_H;
  K["D_H"] = pp1 * std::pow(2.0, p - 3) * norm_B;

  if (p == 2) {
    // Hessian is the constant 2 A^T A and k is half the squared norm.
    K["R_H"] = 0;
    K["rho_H"] = 2 * gram.eigenvalues()[0];
    K["L_H"] = 2 * gram.eigenvalues()[0];
    K["C_H"] = 0;
    rep.closed_form_mu_star = 2 * gram.eigenvalues()[0];
    rep.closed_form_L_star = 2 * gram.eigenvalues()[d - 1];
    return rep;
  }

  const double R_H = std::pow(norm_B, 1 / (p - 2)) / std::pow(c_H * std::pow(2.0, -p), 1 / (p - 2));
  K["R_H"] = R_H;

  // rho_H: inf of lambda_min(hess f) over the ball of radius R_H.
  auto rho_fn = [&](const Vec& x) {
    const Vec r = A * x - b;
    const Vec w = r.cwiseAbs().array().pow(p - 2).matrix();
    Eigen::SelfAdjointEigenSolver<Mat> es(weighted_gram(A, w));
    const Vec av = A * es.eigenvectors().col(0);
    Vec gw(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) gw[i] = (p - 2) * signed_pow(r[i], p - 3) * av[i] * av[i];
    return ValGrad{pp1 * es.eigenvalues()[0], pp1 * (A.transpose() * gw)};
  };
  double rho_H;
  if (R_H > 0) {
    std::vector<Vec> pts;
    pts.push_back(Vec::Zero(d));
    Vec ls = A.colPivHouseholderQr().solve(b);
    if (ls.norm() > R_H) ls *= R_H / ls.norm();
    pts.push_back(ls);
    for (long i = 0; i < n_dirs; ++i)
      pts.push_back(R_H * std::pow(rng.uniform(), 1.0 / static_cast<double>(d)) * rng.unit_vector(d));
    double best = std::numeric_limits<double>::infinity();
    Vec best_x;
    for (const Vec& x : pts) {
      const double v = rho_fn(x).value;
      if (v < best) {
        best = v;
        best_x = x;
      }
    }
    rho_H = std::min(best, ball_descent(rho_fn, best_x, R_H, refine_iters));
  } else {
    rho_H = rho_fn(Vec::Zero(d)).value;
  }
  K["rho_H"] = rho_H;

  const double hess_lo = pp1 * std::pow(2.0, -p - 1) * c_H;
  K["L_H"] = R_H > 0 ? std::min(hess_lo, rho_H / (2 * std::pow(R_H, p - 2))) : hess_lo;
  K["C_H"] = std::min(rho_H / 2, hess_lo * std::pow(R_H, p - 2));

  const double e = (p - 2) / (p - 1);
  const double mu = std::min(K["C_H"] / (2 * (p - 1) * (2 + 2 * K["D_G"])),
                             K["L_H"] / (4 * (p - 1) * std::pow(K["U_G"], e)));
  const double far = K["U_H"] / std::pow(K["L_G"] / 2, e);
  const double near = 4 * K["U_H"] * std::pow(K["C_G"] / K["L_G"], e) + 2 * K["D_H"];
  rep.closed_form_mu_star = mu;
  rep.closed_form_L_star = std::min(far, near);
  // The large-||x|| and small-||x|| regime bounds separately; their max bounds both regimes.
  K["L_star_far"] = far;
  K["L_star_near"] = near;
  return rep;
}

double exp_penalty_eta_bound(const Mat& A) {
  if (A.size() == 0) return 0.0;
  return std::sqrt(static_cast<double>(A.rows()) * lambda_max_sym(A.transpose() * A));
}

double exp_penalty_eta(const Mat& A, int exact_limit, bool* exact) {
  const Eigen::Index n = A.rows();
  const double bound = exp_penalty_eta_bound(A);
  if (n == 0) {
    if (exact) *exact = true;
    return 0.0;
  }
  if (n > exact_limit || n > 62) {
    if (exact) *exact = false;
    return bound;
  }
  // s and -s give the same norm, so fix s_0 = +1 and walk the remaining signs in Gray-code order.
  Vec v = A.colwise().sum().transpose();
  std::vector<int> sign(static_cast<std::size_t>(n), 1);
  double best = v.squaredNorm();
  const std::uint64_t count = std::uint64_t{1} << (n - 1);
  for (std::uint64_t i = 1; i < count; ++i) {
    const int bit = std::countr_zero(i) + 1;
    v -= 2.0 * sign[static_cast<std::size_t>(bit)] * A.row(bit).transpose();
    sign[static_cast<std::size_t>(bit)] = -sign[static_cast<std::size_t>(bit)];
    best = std::max(best, v.squaredNorm());
  }
  if (exact) *exact = true;
  return std::sqrt(best);
}

CertificateReport exp_penalty_constants(const ProblemInstance& inst, std::optional<double> r,
                                        std::optional<double> R, int exact_eta_limit) {
  if (inst.kind != ProblemKind::exp_penalty)
    throw std::invalid_argument("exp_penalty_constants: not an exp_penalty instance");
  if (!r) r = inst.inradius;
  if (!R) R = inst.circumradius;
  if (!r || !R) throw UnsupportedError("exp_penalty_constants: inradius r and circumradius R are required");
  if (!(*r > 0) || !(*R > 0)) throw std::invalid_argument("exp_penalty_constants: r and R must be positive");
  bool exact = false;
  const double eta = exp_penalty_eta(inst.A, exact_eta_limit, &exact);
  const double norm_AtA = lambda_max_sym(inst.A.transpose() * inst.A);
  const double c_norm = inst.c.size() > 0 ? inst.c.norm() : 0.0;
  const double L = (2 * *R / *r) * (norm_AtA / inst.tau) * (eta + c_norm);

  CertificateReport rep;
  rep.closed_form_L_star = L;
  rep.constants["eta"] = eta;
  rep.constants["eta_bound"] = exp_penalty_eta_bound(inst.A);
  rep.constants["r"] = *r;
  rep.constants["R"] = *R;
  rep.constants["norm_AtA"] = norm_AtA;
  rep.constants["L_star_tau"] = L;
  rep.extra["eta_exact"] = exact;
  return rep;
}

CertificateReport quadratic_constants(const Mat& A, const Mat& P) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(A, P, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw AssumptionViolation("quadratic_constants: A, P must be SPD");
  CertificateReport rep;
  rep.closed_form_mu_star = es.eigenvalues().minCoeff();
  rep.closed_form_L_star = es.eigenvalues().maxCoeff();
  return rep;
}

ConditionComparison primal_dual_condition_comparison(const Mat& A, double p) {
  if (!(p > 2)) throw std::invalid_argument("primal_dual_condition_comparison: p must exceed 2");
  const Vec sv = singular_values(A);
  if (sv.size() == 0 || !(sv[sv.size() - 1] > 0))
    throw std::invalid_argument("primal_dual_condition_comparison: A must be nonsingular");
  const double kappa = sv[0] / sv[sv.size() - 1];
  const double q = p / (p - 1);
  return {p * p * std::pow(kappa, p), (p - 1) * (p - 1) * std::pow(kappa, 4 - q)};
}

}  // namespace dpgd
