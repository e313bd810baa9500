#pragma once

// Dual space preconditioned gradient descent: x+ = x - (1/L*) grad k(grad f(x)).

#include "dpgd/core.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

namespace dpgd {

enum class StepRuleKind { fixed, doubling, adaptive };

/// How the inverse step size L*_i is chosen at each iteration.
struct StepRule {
  StepRuleKind kind = StepRuleKind::adaptive;
  double L = 1.0;  // fixed L*, or the initial L*_0 for doubling/adaptive

  static StepRule fixed(double L) { return {StepRuleKind::fixed, L}; }
  static StepRule doubling(double L0) { return {StepRuleKind::doubling, L0}; }
  static StepRule adaptive(double L0) { return {StepRuleKind::adaptive, L0}; }
};

template <typename Scalar>
struct SolverConfig {
  StepRule rule = StepRule::adaptive(1.0);
  long max_iters = 10000;
  Scalar tol_kgap = Scalar(1e-12);  // on k(grad f(x)) - k(0)
  Scalar tol_grad = Scalar(0);      // disabled when zero
  int r_min = -60;                  // L*_i is searched over 2^r, r in [r_min, r_max]
  int r_max = 60;
  // Relative allowance on f comparisons (doubling test, adaptive sufficient decrease); near
  // the minimizer the true decrease per step falls to a few ulps of f.
  Scalar f_slack = Scalar(64) * std::numeric_limits<Scalar>::epsilon();
  bool store_iterates = false;

  void validate() const {
    if (!(rule.L > 0) || !std::isfinite(rule.L))
      throw std::invalid_argument("SolverConfig: L* must be strictly positive");
    if (r_min > r_max) throw std::invalid_argument("SolverConfig: empty r bounds");
    if (max_iters < 0) throw std::invalid_argument("SolverConfig: negative max_iters");
    if (tol_kgap < 0 || tol_grad < 0 || f_slack < 0)
      throw std::invalid_argument("SolverConfig: negative tolerance");
  }
};

enum class Termination { kgap_tol, grad_tol, max_iters, step_search_exhausted };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::kgap_tol: return "kgap_tol";
    case Termination::grad_tol: return "grad_tol";
    case Termination::max_iters: return "max_iters";
    case Termination::step_search_exhausted: return "step_search_exhausted";
  }
  return "unknown";
}

/**
 * State at iterate x_i. `L_inv` is the inverse step size that produced x_i
 * (for i = 0, the initial L*_0); `grad_evals` counts gradient evaluations
 * spent up to and including x_i.
 */
template <typename Scalar>
struct IterateRecord {
  long iter = 0;
  Scalar f_val = 0;
  Scalar k_gap = 0;
  Scalar grad_norm = 0;
  Scalar L_inv = 0;
  long grad_evals = 0;
  double wall_ms = 0;
  std::optional<Vector<Scalar>> x;
};

template <typename Scalar>
struct IterateTrace {
  std::vector<IterateRecord<Scalar>> records;
  Termination termination = Termination::max_iters;
  long value_evals = 0;
  Vector<Scalar> x_final;

  const IterateRecord<Scalar>& back() const { return records.back(); }
  std::size_t size() const { return records.size(); }
};

/// One step of the dual preconditioned iteration; returns x unchanged when grad f(x) = 0.
template <typename Scalar>
Vector<Scalar> dual_precon_step(const Objective<Scalar>& f, const DualReference<Scalar>& k,
                                const Vector<Scalar>& x, Scalar L) {
  return x - (Scalar(1) / L) * k.gradient(f.gradient(x));
}

/// Maps (x, grad f(x), L) to the next iterate. Used to share the driver with baselines.
template <typename Scalar>
using StepMap = std::function<Vector<Scalar>(const Vector<Scalar>&, const Vector<Scalar>&, Scalar)>;

namespace detail {

template <typename Scalar>
bool all_finite(const Vector<Scalar>& v) {
  return v.allFinite();
}

template <typename Scalar>
struct Point {
  Vector<Scalar> x;
  Scalar f = 0;
  Vector<Scalar> g;
  Scalar k_gap = 0;
};

/**
 * Shared iteration driver. `k` is used for the k_gap monitor and, under the
 * adaptive rule, for the descent conditions; `step` produces candidates.
 */
template <typename Scalar>
IterateTrace<Scalar> drive(const Objective<Scalar>& f, const DualReference<Scalar>& k,
                           const Vector<Scalar>& x0, const SolverConfig<Scalar>& cfg,
                           const StepMap<Scalar>& step) {
  cfg.validate();
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  const Scalar k0 = k.min_value;

  if (x0.size() != f.dim) throw std::invalid_argument("solve: x0 has wrong dimension");
  if (!f.contains(x0)) throw DomainError("solve: x0 outside domain of f");

  IterateTrace<Scalar> trace;
  long grad_evals = 0;

  auto k_gap_of = [&](const Vector<Scalar>& g) { return k.value(g) - k0; };

  Point<Scalar> cur;
  cur.x = x0;
  cur.f = f.value(x0);
  ++trace.value_evals;
  cur.g = f.gradient(x0);
  ++grad_evals;
  if (!std::isfinite(cur.f) || !all_finite(cur.g))
    throw NumericalError("solve: non-finite value or gradient", 0);
  cur.k_gap = k_gap_of(cur.g);

  int r_cur = 0;
  Scalar L_cur = Scalar(cfg.rule.L);
  if (cfg.rule.kind == StepRuleKind::adaptive) {
    r_cur = static_cast<int>(std::ceil(std::log2(cfg.rule.L)));
    r_cur = std::clamp(r_cur, cfg.r_min, cfg.r_max);
    L_cur = std::ldexp(Scalar(1), r_cur);
  }
  const Scalar L_ceiling = std::ldexp(Scalar(1), cfg.r_max);

  auto push = [&](long i, const Point<Scalar>& p, Scalar L) {
    IterateRecord<Scalar> rec;
    rec.iter = i;
    rec.f_val = p.f;
    rec.k_gap = p.k_gap;
    rec.grad_norm = p.g.norm();
    rec.L_inv = L;
    rec.grad_evals = grad_evals;
    rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    if (cfg.store_iterates) rec.x = p.x;
    trace.records.push_back(std::move(rec));
  };

  push(0, cur, L_cur);

  for (long i = 0;; ++i) {
    if (cur.k_gap <= cfg.tol_kgap) {
      trace.termination = Termination::kgap_tol;
      break;
    }
    if (cfg.tol_grad > 0 && cur.g.norm() <= cfg.tol_grad) {
      trace.termination = Termination::grad_tol;
      break;
    }
    if (i >= cfg.max_iters) {
      trace.termination = Termination::max_iters;
      break;
    }

    std::optional<Point<Scalar>> next;
    Scalar L_used = L_cur;

    switch (cfg.rule.kind) {
      case StepRuleKind::fixed: {
        Point<Scalar> p;
        p.x = step(cur.x, cur.g, L_cur);
        if (!f.contains(p.x)) throw DomainError("solve: fixed step left the domain at iterate " + std::to_string(i + 1));
        p.f = f.value(p.x);
        ++trace.value_evals;
        p.g = f.gradient(p.x);
        ++grad_evals;
        if (!std::isfinite(p.f) || !all_finite(p.g))
          throw NumericalError("solve: non-finite value or gradient", i + 1);
        p.k_gap = k_gap_of(p.g);
        next = std::move(p);
        break;
      }
      case StepRuleKind::doubling: {
        // L* grows by 2 while the candidate increases f or leaves the domain; never decreases.
        Scalar L = L_cur;
        while (true) {
          Point<Scalar> p;
          p.x = step(cur.x, cur.g, L);
          if (f.contains(p.x)) {
            p.f = f.value(p.x);
            ++trace.value_evals;
            if (std::isfinite(p.f) && p.f <= cur.f + cfg.f_slack * (Scalar(1) + std::abs(cur.f))) {
              next = std::move(p);
              break;
            }
          }
          if (L * 2 > L_ceiling) break;
          L *= 2;
        }
        if (next) {
          next->g = f.gradient(next->x);
          ++grad_evals;
          if (!std::isfinite(next->f) || !all_finite(next->g))
            throw NumericalError("solve: non-finite gradient", i + 1);
          next->k_gap = k_gap_of(next->g);
          L_cur = L;
          L_used = L;
        }
        break;
      }
      case StepRuleKind::adaptive: {
        const Scalar slack = Scalar(1e-12) * (Scalar(1) + std::abs(cur.k_gap));
        // The measured decrease f - f+ carries rounding of order f_slack |f|.
        const Scalar f_noise = cfg.f_slack * (Scalar(1) + std::abs(cur.f));
        // Conditions 1-3: stay in domain, k(grad f) does not increase, sufficient decrease.
        auto attempt = [&](int r) -> std::optional<Point<Scalar>> {
          const Scalar L = std::ldexp(Scalar(1), r);
          Point<Scalar> p;
          p.x = step(cur.x, cur.g, L);
          if (!f.contains(p.x)) return std::nullopt;
          p.f = f.value(p.x);
          ++trace.value_evals;
          if (!std::isfinite(p.f)) return std::nullopt;
          p.g = f.gradient(p.x);
          ++grad_evals;
          if (!all_finite(p.g)) return std::nullopt;
          p.k_gap = k_gap_of(p.g);
          if (!std::isfinite(p.k_gap)) return std::nullopt;
          if (p.k_gap > cur.k_gap + slack) return std::nullopt;
          if (p.k_gap > L * (cur.f - p.f + f_noise) + slack) return std::nullopt;
          return p;
        };
        int r = r_cur;
        auto cand = attempt(r);
        if (cand) {
          while (r - 1 >= cfg.r_min) {
            auto smaller = attempt(r - 1);
            if (!smaller) break;
            --r;
            cand = std::move(smaller);
          }
        } else {
          while (!cand && r + 1 <= cfg.r_max) {
            ++r;
            cand = attempt(r);
          }
        }
        if (cand) {
          r_cur = r;
          L_cur = std::ldexp(Scalar(1), r);
          L_used = L_cur;
          next = std::move(cand);
        }
        break;
      }
    }

    if (!next) {
      trace.termination = Termination::step_search_exhausted;
      break;
    }
    cur = std::move(*next);
    push(i + 1, cur, L_used);
  }

  trace.x_final = cur.x;
  return trace;
}

}  // namespace detail

/// Runs the dual preconditioned iteration from x0 under the configured step rule.
template <typename Scalar>
IterateTrace<Scalar> solve(const Objective<Scalar>& f, const DualReference<Scalar>& k,
                           const std::type_identity_t<Vector<Scalar>>& x0, const SolverConfig<Scalar>& cfg) {
  StepMap<Scalar> step = [&k](const Vector<Scalar>& x, const Vector<Scalar>& g, Scalar L) {
    return Vector<Scalar>(x - (Scalar(1) / L) * k.gradient(g));
  };
  return detail::drive(f, k, x0, cfg, step);
}

template <typename Scalar>
struct RateBoundReport {
  bool sublinear_ok = true;
  Scalar worst_sublinear_margin = std::numeric_limits<Scalar>::infinity();
  long worst_sublinear_iter = -1;
  std::optional<bool> linear_ok;  // set only when mu* was supplied
  Scalar worst_linear_margin = std::numeric_limits<Scalar>::infinity();
  long worst_linear_iter = -1;

  bool passed() const { return sublinear_ok && linear_ok.value_or(true); }
};

/**
 * Checks the recorded trace against the convergence guarantees:
 *   k_gap(i) <= (max_{j<i} L*_j / i) (f0 - f_min) + tol
 * and, when mu* is given,
 *   f(x_i) - f_min <= prod_{j<i} (1 - mu* / L*_j) (f0 - f_min) + tol,
 * which is (1 - mu* / L*)^i (f0 - f_min) for a fixed L*.
 * Margins are bound + tol - observed; negative means violated.
 */
template <typename Scalar>
RateBoundReport<Scalar> verify_rate_bounds(const IterateTrace<Scalar>& trace,
                                           std::optional<Scalar> f_min, Scalar f0,
                                           std::optional<Scalar> mu_star = std::nullopt,
                                           Scalar tol = Scalar(1e-10)) {
  if (!f_min) throw UnsupportedError("verify_rate_bounds: reference f_min is required");
  RateBoundReport<Scalar> rep;
  const Scalar gap0 = f0 - *f_min;
  Scalar max_L = 0;
  Scalar contraction = 1;
  if (mu_star) rep.linear_ok = true;
  for (std::size_t i = 1; i < trace.records.size(); ++i) {
    const auto& rec = trace.records[i];
    max_L = std::max(max_L, rec.L_inv);
    const Scalar bound = max_L / Scalar(i) * gap0;
    const Scalar margin = bound + tol - rec.k_gap;
    if (margin < rep.worst_sublinear_margin) {
      rep.worst_sublinear_margin = margin;
      rep.worst_sublinear_iter = static_cast<long>(i);
    }
    if (margin < 0) rep.sublinear_ok = false;
    if (mu_star) {
      contraction *= std::max(Scalar(0), Scalar(1) - *mu_star / rec.L_inv);
      const Scalar lin_margin = contraction * gap0 + tol - (rec.f_val - *f_min);
      if (lin_margin < rep.worst_linear_margin) {
        rep.worst_linear_margin = lin_margin;
        rep.worst_linear_iter = static_cast<long>(i);
      }
      if (lin_margin < 0) rep.linear_ok = false;
    }
  }
  return rep;
}

/**
 * Tight reference minimum: a long adaptive run followed by damped Newton
 * polishing when the Hessian is available. Returns the best point seen.
 */
template <typename Scalar>
ReferenceMin<Scalar> reference_minimum(const Objective<Scalar>& f, const DualReference<Scalar>& k,
                                       const std::type_identity_t<Vector<Scalar>>& x0, long max_iters = 20000) {
  SolverConfig<Scalar> cfg;
  cfg.rule = StepRule::adaptive(1.0);
  cfg.max_iters = max_iters;
  cfg.tol_kgap = Scalar(0);
  const auto trace = solve(f, k, x0, cfg);
  Vector<Scalar> x = trace.x_final;
  Scalar fx = f.value(x);
  if (f.has_hessian()) {
    for (int it = 0; it < 50; ++it) {
      const Vector<Scalar> g = f.gradient(x);
      if (g.norm() == Scalar(0)) break;
      const Matrix<Scalar> H = f.hessian(x);
      const Eigen::LDLT<Matrix<Scalar>> ldlt(H);
      if (ldlt.info() != Eigen::Success) break;
      const Vector<Scalar> dir = ldlt.solve(g);
      if (!dir.allFinite()) break;
      Scalar t = 1;
      bool improved = false;
      // Near the minimum f stops resolving progress; a smaller gradient at rounding-level f also counts.
      const Scalar f_noise = 64 * std::numeric_limits<Scalar>::epsilon() * (1 + std::abs(fx));
      for (int ls = 0; ls < 40; ++ls, t /= 2) {
        const Vector<Scalar> xn = x - t * dir;
        if (!f.contains(xn)) continue;
        const Scalar fn = f.value(xn);
        if (fn < fx || (fn <= fx + f_noise && f.gradient(xn).norm() < g.norm())) {
          x = xn;
          fx = fn;
          improved = true;
          break;
        }
      }
      if (!improved) break;
    }
  }
  return {x, fx};
}

}  // namespace dpgd
