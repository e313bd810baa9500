#include "dpgd/problems.hpp"

#include "dpgd/random.hpp"

#include <cmath>
#include <memory>

namespace dpgd {

namespace {

/// |t|^e, with the common integer exponents computed by multiplication.
double abs_pow(double t, double e) {
  const double a = std::abs(t);
  if (e == 0.0) return 1.0;
  if (e == 1.0) return a;
  if (e == 2.0) return a * a;
  if (e == 3.0) return a * a * a;
  if (e == 4.0) return (a * a) * (a * a);
  return std::pow(a, e);
}

/// sign(t) |t|^e. e = 1/3 goes through cbrt so perfect cubes invert exactly.
double signed_pow(double t, double e, bool cube_root = false) {
  if (t == 0.0) return 0.0;
  if (cube_root) return std::cbrt(t);
  return std::copysign(abs_pow(t, e), t);
}

struct PnormData {
  Mat A;
  Vec b;
  double p;
};

struct ExpPenaltyData {
  Mat A;
  Vec b;
  Vec c;
  double tau;
};

}  // namespace

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::pnorm: return "pnorm";
    case ProblemKind::exp_penalty: return "exp_penalty";
    case ProblemKind::quadratic: return "quadratic";
    case ProblemKind::power1d: return "power1d";
  }
  return "unknown";
}

ProblemKind parse_problem_kind(std::string_view name) {
  if (name == "pnorm") return ProblemKind::pnorm;
  if (name == "exp_penalty" || name == "exp-penalty") return ProblemKind::exp_penalty;
  if (name == "quadratic") return ProblemKind::quadratic;
  if (name == "power1d") return ProblemKind::power1d;
  throw std::invalid_argument("unknown problem kind: " + std::string(name));
}

Objective<double> pnorm_objective(const ProblemInstance& inst) {
  if (!(inst.p >= 2.0) || !std::isfinite(inst.p))
    throw std::invalid_argument("pnorm_objective: requires 2 <= p < inf");
  if (inst.A.rows() != inst.b.size())
    throw std::invalid_argument("pnorm_objective: A and b disagree in row count");
  auto data = std::make_shared<const PnormData>(PnormData{inst.A, inst.b, inst.p});

  Objective<double> f;
  f.dim = inst.A.cols();
  f.value = [data](const Vec& x) {
    const Vec r = data->A * x - data->b;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) sum += abs_pow(r[i], data->p);
    return sum;
  };
  f.gradient = [data](const Vec& x) {
    Vec r = data->A * x - data->b;
    for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = abs_pow(r[i], data->p - 2.0) * r[i];
    return Vec(data->p * (data->A.transpose() * r));
  };
  f.hessian = [data](const Vec& x) {
    Vec w = data->A * x - data->b;
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = abs_pow(w[i], data->p - 2.0);
    Mat H = data->A.transpose() * w.asDiagonal() * data->A;
    H *= data->p * (data->p - 1.0);
    return H;
  };
  return f;
}

DualReference<double> pnorm_dual_reference(double p, Eigen::Index dim) {
  if (!(p >= 2.0) || !std::isfinite(p)) throw std::invalid_argument("pnorm_dual_reference: requires 2 <= p < inf");
  const double q = p / (p - 1.0);

  DualReference<double> k;
  k.dim = dim;
  k.min_value = 0.0;
  // (1 + s)^a computed as exp(a log1p(s)); expm1 keeps k accurate near its minimum.
  k.value = [q](const Vec& y) {
    const double s = y.squaredNorm();
    return std::expm1(0.5 * q * std::log1p(s)) / q;
  };
  k.gradient = [q](const Vec& y) {
    const double s = y.squaredNorm();
    return Vec(std::exp(0.5 * (q - 2.0) * std::log1p(s)) * y);
  };
  k.hessian = [q](const Vec& y) {
    const double s = y.squaredNorm();
    const double l = std::log1p(s);
    const double a = std::exp(0.5 * (q - 2.0) * l);
    const double c = (q - 2.0) * std::exp(0.5 * (q - 4.0) * l);
    Mat H = c * (y * y.transpose());
    H.diagonal().array() += a;
    return H;
  };
  // Radial inversion of ||grad k(y)|| = r (1 + r^2)^{(q-2)/2}. In u = log r the map is
  // increasing and concave, so Newton converges monotonically after the first step.
  k.conjugate_gradient = [q](const Vec& x) {
    const double target = x.norm();
    if (target == 0.0) return Vec(Vec::Zero(x.size()));
    const double log_target = std::log(target);
    double u = log_target;
    for (int it = 0; it < 200; ++it) {
      const double e2u = std::exp(2.0 * u);
      double phi;
      double dphi;
      if (e2u > 1e300) {
        phi = u + 0.5 * (q - 2.0) * 2.0 * u - log_target;
        dphi = q - 1.0;
      } else {
        phi = u + 0.5 * (q - 2.0) * std::log1p(e2u) - log_target;
        dphi = 1.0 + (q - 2.0) * e2u / (1.0 + e2u);
      }
      const double du = phi / dphi;
      u -= du;
      if (std::abs(du) <= 1e-16 * (1.0 + std::abs(u))) break;
    }
    return Vec((std::exp(u) / target) * x);
  };
  return k;
}

Objective<double> exp_penalty_objective(const ProblemInstance& inst) {
  if (!(inst.tau > 0.0)) throw std::invalid_argument("exp_penalty_objective: tau must be positive");
  if (inst.A.rows() != inst.b.size())
    throw std::invalid_argument("exp_penalty_objective: A and b disagree in row count");
  Vec c = inst.c.size() == 0 ? Vec(Vec::Zero(inst.A.cols())) : inst.c;
  if (c.size() != inst.A.cols()) throw std::invalid_argument("exp_penalty_objective: c has wrong size");
  auto data = std::make_shared<const ExpPenaltyData>(ExpPenaltyData{inst.A, inst.b, c, inst.tau});

  auto exponents = [data](const Vec& x) { return Vec((data->A * x - data->b) / data->tau); };
  auto guarded = [exponents](const Vec& x) {
    Vec e = exponents(x);
    if (!(e.maxCoeff() <= kMaxPenaltyExponent))
      throw RangeError("exp_penalty: exponent (A_i x - b_i)/tau exceeds overflow guard");
    return e;
  };

  Objective<double> f;
  f.dim = inst.A.cols();
  f.in_domain = [exponents](const Vec& x) {
    if (!x.allFinite()) return false;
    return exponents(x).maxCoeff() <= kMaxPenaltyExponent;
  };
  f.value = [data, guarded](const Vec& x) {
    const Vec e = guarded(x);
    return data->c.dot(x) + data->tau * e.array().exp().sum();
  };
  f.gradient = [data, guarded](const Vec& x) {
    const Vec w = guarded(x).array().exp();
    return Vec(data->A.transpose() * w + data->c);
  };
  f.hessian = [data, guarded](const Vec& x) {
    const Vec w = guarded(x).array().exp() / data->tau;
    return Mat(data->A.transpose() * w.asDiagonal() * data->A);
  };
  return f;
}

DualReference<double> exp_penalty_dual_reference(Eigen::Index dim) {
  DualReference<double> k;
  k.dim = dim;
  k.min_value = 0.0;
  k.value = [](const Vec& y) {
    const double r = y.norm();
    return r - std::log1p(r);
  };
  k.gradient = [](const Vec& y) { return Vec(y / (y.norm() + 1.0)); };
  k.hessian = [](const Vec& y) {
    const double r = y.norm();
    const Eigen::Index d = y.size();
    if (r == 0.0) return Mat(Mat::Identity(d, d));
    const Vec u = y / r;
    Mat H = (-r / ((r + 1.0) * (r + 1.0))) * (u * u.transpose());
    H.diagonal().array() += 1.0 / (r + 1.0);
    return H;
  };
  k.conjugate_gradient = [](const Vec& x) {
    const double s = x.norm();
    if (!(s < 1.0)) throw DomainError("exp_penalty k*: gradient argument must satisfy ||x|| < 1");
    return Vec(x / (1.0 - s));
  };
  return k;
}

ProblemPair quadratic_problem(const Mat& A, const Vec& b, const Mat& P) {
  const Eigen::Index d = A.rows();
  if (A.cols() != d || P.rows() != d || P.cols() != d || b.size() != d)
    throw std::invalid_argument("quadratic_problem: dimension mismatch");
  auto is_symmetric = [](const Mat& M) { return (M - M.transpose()).norm() <= 1e-12 * (1.0 + M.norm()); };
  if (!is_symmetric(A) || !is_symmetric(P))
    throw std::invalid_argument("quadratic_problem: A and P must be symmetric");
  auto A_llt = std::make_shared<const Eigen::LLT<Mat>>(A);
  if (A_llt->info() != Eigen::Success) throw std::invalid_argument("quadratic_problem: A is not positive definite");
  auto P_llt = std::make_shared<const Eigen::LLT<Mat>>(P);
  if (P_llt->info() != Eigen::Success) throw std::invalid_argument("quadratic_problem: P is not positive definite");
  auto Ap = std::make_shared<const Mat>(A);
  auto Pp = std::make_shared<const Mat>(P);
  auto bp = std::make_shared<const Vec>(b);

  ProblemPair out;
  Objective<double>& f = out.f;
  f.dim = d;
  f.value = [Ap, bp](const Vec& x) { return 0.5 * x.dot(*Ap * x) - bp->dot(x); };
  f.gradient = [Ap, bp](const Vec& x) { return Vec(*Ap * x - *bp); };
  f.hessian = [Ap](const Vec&) { return *Ap; };
  const Vec x_min = A_llt->solve(b);
  f.reference_min = ReferenceMin<double>{x_min, 0.5 * x_min.dot(A * x_min) - b.dot(x_min)};

  DualReference<double>& k = out.k;
  k.dim = d;
  k.min_value = 0.0;
  k.value = [P_llt](const Vec& y) { return 0.5 * y.dot(P_llt->solve(y)); };
  k.gradient = [P_llt](const Vec& y) { return Vec(P_llt->solve(y)); };
  k.hessian = [P_llt, d](const Vec&) { return Mat(P_llt->solve(Mat::Identity(d, d))); };
  k.conjugate_gradient = [Pp](const Vec& x) { return Vec(*Pp * x); };
  return out;
}

ProblemPair power1d_problem(double b, double p) {
  if (!(p >= 2.0) || !std::isfinite(p)) throw std::invalid_argument("power1d_problem: requires 2 <= p < inf");
  const double q = p / (p - 1.0);
  const double inv = 1.0 / (p - 1.0);  // q - 1
  const bool cube_root = (p == 4.0);

  ProblemPair out;
  Objective<double>& f = out.f;
  f.dim = 1;
  f.value = [b, p](const Vec& x) { return abs_pow(x[0] - b, p) / p; };
  f.gradient = [b, p](const Vec& x) {
    Vec g(1);
    g[0] = signed_pow(x[0] - b, p - 1.0);
    return g;
  };
  f.hessian = [b, p](const Vec& x) {
    Mat H(1, 1);
    H(0, 0) = (p - 1.0) * abs_pow(x[0] - b, p - 2.0);
    return H;
  };
  f.reference_min = ReferenceMin<double>{Vec::Constant(1, b), 0.0};

  DualReference<double>& k = out.k;
  k.dim = 1;
  k.min_value = 0.0;
  k.value = [q](const Vec& y) { return abs_pow(y[0], q) / q; };
  k.gradient = [inv, cube_root](const Vec& y) {
    Vec g(1);
    g[0] = signed_pow(y[0], inv, cube_root);
    return g;
  };
  // Singular (infinite) at the origin when q < 2.
  k.hessian = [q, inv](const Vec& y) {
    Mat H(1, 1);
    H(0, 0) = inv * abs_pow(y[0], q - 2.0);
    if (y[0] == 0.0 && q < 2.0) H(0, 0) = std::numeric_limits<double>::infinity();
    return H;
  };
  k.conjugate_gradient = [p](const Vec& x) {
    Vec g(1);
    g[0] = signed_pow(x[0], p - 1.0);
    return g;
  };
  return out;
}

ProblemPair make_problem(const ProblemInstance& inst) {
  switch (inst.kind) {
    case ProblemKind::pnorm:
      return {pnorm_objective(inst), pnorm_dual_reference(inst.p, inst.d())};
    case ProblemKind::exp_penalty:
      return {exp_penalty_objective(inst), exp_penalty_dual_reference(inst.d())};
    case ProblemKind::quadratic:
      return quadratic_problem(inst.A, inst.b, inst.P.size() == 0 ? inst.A : inst.P);
    case ProblemKind::power1d:
      return power1d_problem(inst.b.size() > 0 ? inst.b[0] : 0.0, inst.p);
  }
  throw std::invalid_argument("make_problem: unknown kind");
}

Vec singular_values(const Mat& A) {
  if (A.rows() > A.cols()) {
    Eigen::HouseholderQR<Mat> qr(A);
    const Mat R = qr.matrixQR().topRows(A.cols()).triangularView<Eigen::Upper>();
    return Eigen::BDCSVD<Mat>(R).singularValues();
  }
  return Eigen::BDCSVD<Mat>(A).singularValues();
}

void validate_instance(ProblemInstance& inst) {
  switch (inst.kind) {
    case ProblemKind::pnorm: {
      if (!(inst.p >= 2.0) || !std::isfinite(inst.p)) throw AssumptionViolation("pnorm: requires 2 <= p < inf");
      if (inst.A.rows() != inst.b.size()) throw std::invalid_argument("pnorm: A and b disagree in row count");
      if (inst.A.rows() < inst.A.cols()) throw AssumptionViolation("pnorm: A must have full column rank d (n < d)");
      const Vec sv = singular_values(inst.A);
      if (sv.size() == 0 || !(sv[sv.size() - 1] > 1e-10 * sv[0]))
        throw AssumptionViolation("pnorm: A is rank deficient");
      break;
    }
    case ProblemKind::exp_penalty: {
      if (!(inst.tau > 0.0)) throw std::invalid_argument("exp_penalty: tau must be positive");
      if (inst.A.rows() != inst.b.size()) throw std::invalid_argument("exp_penalty: A and b disagree in row count");
      if (inst.c.size() == 0) inst.c = Vec::Zero(inst.A.cols());
      if (inst.c.size() != inst.A.cols()) throw std::invalid_argument("exp_penalty: c has wrong size");
      for (Eigen::Index i = 0; i < inst.A.rows(); ++i) {
        const double norm = inst.A.row(i).norm();
        if (!(norm > 0.0)) throw AssumptionViolation("exp_penalty: zero row in A");
        if (norm != 1.0) {
          inst.A.row(i) /= norm;
          inst.b[i] /= norm;
        }
      }
      break;
    }
    case ProblemKind::quadratic: {
      if (inst.P.size() == 0) inst.P = inst.A;
      quadratic_problem(inst.A, inst.b, inst.P);  // throws on non-SPD input
      break;
    }
    case ProblemKind::power1d: {
      if (!(inst.p >= 2.0) || !std::isfinite(inst.p)) throw AssumptionViolation("power1d: requires 2 <= p < inf");
      if (inst.b.size() != 1) throw std::invalid_argument("power1d: b must be a 1-vector");
      inst.A = Mat::Identity(1, 1);
      break;
    }
  }
  if (inst.x0.size() != 0 && inst.x0.size() != inst.d())
    throw std::invalid_argument("instance x0 has wrong dimension");
}

ProblemInstance generate_random_instance(const GenerateSpec& spec) {
  if (spec.d <= 0 || spec.n < 0) throw std::invalid_argument("generate: d must be positive");
  Rng rng(spec.seed);
  ProblemInstance inst;
  inst.kind = spec.kind;
  inst.seed = spec.seed;
  inst.p = spec.p;
  inst.tau = spec.tau;
  const Eigen::Index d = spec.d;

  switch (spec.kind) {
    case ProblemKind::pnorm: {
      const Eigen::Index n = spec.n > 0 ? spec.n : 10 * d;
      inst.A.resize(n, d);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) inst.A(i, j) = rng.gaussian();
      inst.b = rng.gaussian_vector(n);
      inst.x0 = rng.gaussian_vector(d);
      break;
    }
    case ProblemKind::exp_penalty: {
      if (spec.box) {
        inst.A.resize(2 * d, d);
        inst.A.topRows(d) = Mat::Identity(d, d);
        inst.A.bottomRows(d) = -Mat::Identity(d, d);
        inst.b = Vec::Ones(2 * d);
        inst.c = spec.c.value_or(Vec(Vec::Unit(d, 0)));
        inst.inradius = 1.0;
        inst.circumradius = std::sqrt(static_cast<double>(d));
      } else {
        const Eigen::Index n = spec.n > 0 ? spec.n : 10 * d;
        inst.A.resize(n, d);
        for (Eigen::Index i = 0; i < n; ++i)
          for (Eigen::Index j = 0; j < d; ++j) inst.A(i, j) = rng.gaussian();
        inst.b = Vec::Ones(n);
        inst.c = spec.c.value_or(rng.gaussian_vector(d));
      }
      inst.x0 = Vec::Zero(d);
      break;
    }
    case ProblemKind::quadratic: {
      const Mat G = [&] {
        Mat M(d, d);
        for (Eigen::Index i = 0; i < d; ++i)
          for (Eigen::Index j = 0; j < d; ++j) M(i, j) = rng.gaussian();
        return M;
      }();
      const Mat Q = Eigen::HouseholderQR<Mat>(G).householderQ();
      Vec spectrum(d);
      for (Eigen::Index j = 0; j < d; ++j)
        spectrum[j] = d == 1 ? 1.0 : std::pow(spec.condition, static_cast<double>(j) / static_cast<double>(d - 1));
      inst.A = Q * spectrum.asDiagonal() * Q.transpose();
      inst.A = 0.5 * (inst.A + inst.A.transpose()).eval();
      inst.b = rng.gaussian_vector(d);
      inst.x0 = rng.gaussian_vector(d);
      if (spec.precond == "exact") {
        inst.P = inst.A;
      } else if (spec.precond == "identity") {
        inst.P = Mat::Identity(d, d);
      } else if (spec.precond == "jacobi") {
        inst.P = inst.A.diagonal().asDiagonal();
      } else {
        throw std::invalid_argument("generate: unknown preconditioner " + spec.precond);
      }
      break;
    }
    case ProblemKind::power1d: {
      inst.A = Mat::Identity(1, 1);
      inst.b = Vec::Constant(1, spec.shift);
      inst.x0 = Vec::Constant(1, spec.shift + 8.0);
      break;
    }
  }
  validate_instance(inst);
  return inst;
}

}  // namespace dpgd
