#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dpgd/certify.hpp"
#include "support.hpp"

#include <cmath>

using namespace dpgd;
using namespace dpgd::testing;

TEST_CASE("quartic ratios are identically one") {
  const auto pr = power1d_problem(1.0, 4.0);
  const auto s = sample_bregman_ratio(pr.f, pr.k, log_radius_sampler(Vec::Constant(1, 1.0), 1e-2, 1e2, 3), 500);
  CHECK(s.ratios.size() + static_cast<std::size_t>(s.skipped) == 500);
  CHECK(s.ratios.size() > 400);
  CHECK(std::abs(s.inf_ratio - 1) <= 1e-8);
  CHECK(std::abs(s.sup_ratio - 1) <= 1e-8);
}

TEST_CASE("half squared norm pair has unit ratios") {
  Objective<double> f;
  f.dim = 3;
  f.value = [](const Vec& x) { return 0.5 * x.squaredNorm(); };
  f.gradient = [](const Vec& x) { return x; };
  DualReference<double> k;
  k.dim = 3;
  k.value = f.value;
  k.gradient = f.gradient;
  const auto s = sample_bregman_ratio(f, k, log_radius_sampler(Vec::Zero(3), 1e-2, 1e2, 5), 200);
  for (double r : s.ratios) CHECK(r == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("degenerate pairs are skipped and counted") {
  const auto pr = power1d_problem(0.0, 4.0);
  int calls = 0;
  PairSampler same = [&calls]() {
    ++calls;
    return std::make_pair(Vec(Vec::Constant(1, 1e-6)), Vec(Vec::Constant(1, 2e-6)));
  };
  const auto s = sample_bregman_ratio(pr.f, pr.k, same, 10);
  CHECK(calls == 10);
  CHECK(s.skipped == 10);
  CHECK(s.ratios.empty());
}

TEST_CASE("second-order check: exact identities") {
  SUBCASE("power1d") {
    const auto pr = power1d_problem(1.0, 4.0);
    Rng rng(2);
    for (int i = 0; i < 100; ++i) {
      const double x = 1.0 + (rng.uniform() < 0.5 ? -1 : 1) * std::pow(10.0, rng.uniform(-2, 2));
      const auto c = check_second_order(pr.f, pr.k, Vec::Constant(1, x), 1.0, 1.0);
      CHECK(c.passed);
      CHECK(std::abs(c.lower_margin) <= 1e-12);
      CHECK(std::abs(c.upper_margin) <= 1e-12);
    }
  }
  SUBCASE("quadratic with P = A") {
    GenerateSpec spec;
    spec.kind = ProblemKind::quadratic;
    spec.d = 4;
    spec.condition = 30;
    const auto inst = generate_random_instance(spec);
    const auto pr = make_problem(inst);
    Rng rng(8);
    for (int i = 0; i < 100; ++i) {
      const auto c = check_second_order(pr.f, pr.k, rng.gaussian_vector(4), 1.0, 1.0);
      CHECK(c.passed);
      CHECK(c.lambda_min == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(c.lambda_max == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("second-order check fails outside the certified interval") {
  const auto pr = power1d_problem(1.0, 4.0);
  const auto c = check_second_order(pr.f, pr.k, Vec::Constant(1, 3.0), 0.9, 0.5);
  CHECK_FALSE(c.passed);
  CHECK(c.upper_margin == doctest::Approx(-0.1));
}

TEST_CASE("singular Hessian of k raises a conditioning error") {
  Objective<double> f;
  f.dim = 2;
  f.value = [](const Vec& x) { return 0.5 * x.squaredNorm(); };
  f.gradient = [](const Vec& x) { return x; };
  f.hessian = [](const Vec&) { return Mat(Mat::Identity(2, 2)); };
  DualReference<double> k;
  k.dim = 2;
  k.value = [](const Vec& y) { return 0.5 * y[0] * y[0]; };
  k.gradient = [](const Vec& y) { return Vec(Vec::Unit(2, 0) * y[0]); };
  k.hessian = [](const Vec&) {
    Mat M = Mat::Zero(2, 2);
    M(0, 0) = 1;
    return M;
  };
  try {
    check_second_order(f, k, Vec::Ones(2), 1, 1);
    FAIL("expected ConditioningError");
  } catch (const ConditioningError& e) {
    CHECK(e.lambda_min() == 0.0);
  }
}

TEST_CASE("spd_sqrt squares back") {
  Mat M(2, 2);
  M << 5, 2, 2, 3;
  const Mat R = spd_sqrt(M);
  CHECK((R * R - M).norm() <= 1e-14);
  CHECK((R - R.transpose()).norm() == 0.0);
}

TEST_CASE("second-order check on the box passes with the closed-form constant") {
  const auto inst = box_instance(2, 1.0, Vec::Unit(2, 0));
  const auto pr = make_problem(inst);
  const auto rep = exp_penalty_constants(inst);
  const double L = *rep.closed_form_L_star;
  for (int i = 0; i < 21; ++i)
    for (int j = 0; j < 21; ++j) {
      Vec x(2);
      x << -3 + 0.3 * i, -3 + 0.3 * j;
      CHECK(check_second_order(pr.f, pr.k, x, L, 0.0).passed);
    }
}

TEST_CASE("exp penalty constants on the unit box") {
  const double eta_expected = 2 * std::sqrt(2.0);
  SUBCASE("c = e1") {
    const auto rep = exp_penalty_constants(box_instance(2, 1.0, Vec::Unit(2, 0)));
    CHECK(rep.constants.at("eta") == doctest::Approx(eta_expected).epsilon(1e-15));
    CHECK(rep.constants.at("norm_AtA") == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(rep.constants.at("r") == 1.0);
    CHECK(rep.constants.at("R") == doctest::Approx(std::sqrt(2.0)));
    CHECK(*rep.closed_form_L_star == doctest::Approx(16 + 4 * std::sqrt(2.0)).epsilon(1e-14));
    CHECK(rep.constants.at("L_star_tau") == *rep.closed_form_L_star);
  }
  SUBCASE("c = 0") {
    const auto rep = exp_penalty_constants(box_instance(2, 1.0, Vec::Zero(2)));
    CHECK(*rep.closed_form_L_star == doctest::Approx(16.0).epsilon(1e-14));
  }
  SUBCASE("tau scales inversely") {
    const auto rep = exp_penalty_constants(box_instance(2, 0.1, Vec::Zero(2)));
    CHECK(*rep.closed_form_L_star == doctest::Approx(160.0).epsilon(1e-14));
  }
  SUBCASE("missing radii") {
    auto inst = box_instance(2, 1.0, Vec::Zero(2));
    inst.inradius.reset();
    CHECK_THROWS_AS(exp_penalty_constants(inst), UnsupportedError);
    CHECK(*exp_penalty_constants(inst, 1.0).closed_form_L_star == doctest::Approx(16.0));
  }
}

TEST_CASE("eta enumeration against brute force and the bound") {
  Rng rng(31);
  for (int n = 1; n <= 12; ++n) {
    Mat A(n, 3);
    for (int i = 0; i < n; ++i) A.row(i) = rng.unit_vector(3).transpose();
    bool exact = false;
    const double eta = exp_penalty_eta(A, 20, &exact);
    CHECK(exact);
    // Independent brute force over all 2^n sign vectors.
    double brute = 0;
    for (int mask = 0; mask < (1 << n); ++mask) {
      Vec s(n);
      for (int i = 0; i < n; ++i) s[i] = (mask >> i) & 1 ? 1.0 : -1.0;
      brute = std::max(brute, (A.transpose() * s).norm());
    }
    CHECK(eta == doctest::Approx(brute).epsilon(1e-13));
    const double bound = std::sqrt(static_cast<double>(n)) * Eigen::JacobiSVD<Mat>(A).singularValues()[0];
    CHECK(eta <= bound * (1 + 1e-14));
    bool exact_large = true;
    CHECK(exp_penalty_eta(A, 0, &exact_large) == doctest::Approx(bound).epsilon(1e-13));
    CHECK_FALSE(exact_large);
  }
}

TEST_CASE("eta meets its bound on the box and on a single row") {
  // Box rows +-e1, +-e2: eta = ||(2, 2)|| = 2 sqrt 2 = sqrt 4 * ||A||_2.
  const auto box = box_instance(2, 1.0, Vec::Unit(2, 0));
  CHECK(exp_penalty_eta(box.A, 20) == doctest::Approx(2 * std::sqrt(2.0)).epsilon(1e-15));
  CHECK(exp_penalty_eta_bound(box.A) == doctest::Approx(2 * std::sqrt(2.0)).epsilon(1e-15));
  Mat A(1, 3);
  A << 0.6, 0, -0.8;
  CHECK(exp_penalty_eta(A, 20) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(exp_penalty_eta_bound(A) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("pnorm constants in one dimension with b = 0") {
  ProblemInstance inst;
  inst.kind = ProblemKind::pnorm;
  inst.p = 4;
  inst.A = Mat::Ones(1, 1);
  inst.b = Vec::Zero(1);
  const auto rep = pnorm_constants(inst, 8);
  const auto& K = rep.constants;
  CHECK(K.at("c_G") == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(K.at("c_H") == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(K.at("L_G") == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(K.at("U_G") == doctest::Approx(20.0).epsilon(1e-14));
  CHECK(K.at("C_G") == 0.0);
  CHECK(K.at("D_G") == 0.0);
  CHECK(K.at("R_H") == 0.0);
  CHECK(K.at("D_H") == 0.0);
}

TEST_CASE("pnorm constants with zero offset") {
  auto inst = small_pnorm(3.0, 3, 30, 5);
  inst.b.setZero();
  const auto rep = pnorm_constants(inst, 16);
  CHECK(rep.constants.at("C_G") == 0.0);
  CHECK(rep.constants.at("D_G") == 0.0);
}

TEST_CASE("pnorm constants bracket the sampled extremes they estimate") {
  const auto inst = small_pnorm(4.0, 4, 40, 6);
  const auto rep = pnorm_constants(inst, 32);
  const auto& K = rep.constants;
  Rng rng(77);
  // c_G is an infimum over the sphere: no sampled direction may go below it (up to refinement accuracy).
  for (int i = 0; i < 2000; ++i) {
    const Vec s = rng.unit_vector(4);
    const double g = (inst.A * s).cwiseAbs().array().pow(4).sum();
    CHECK(g >= K.at("c_G") * (1 - 1e-9));
    CHECK(g <= K.at("sup_G") * (1 + 1e-9));
  }
  for (const char* name : {"L_G", "C_G", "U_G", "D_G", "L_H", "U_H", "C_H", "D_H", "R_H", "rho_H"}) {
    CAPTURE(name);
    CHECK(K.at(name) >= 0);
  }
  CHECK(*rep.closed_form_mu_star > 0);
  CHECK(*rep.closed_form_mu_star <= *rep.closed_form_L_star);
  CHECK(rep.n_samples == 32);
}

TEST_CASE("pnorm gradient and Hessian growth bounds hold at sampled points") {
  const auto inst = small_pnorm(4.0, 4, 40, 6);
  const auto rep = pnorm_constants(inst, 32);
  const auto& K = rep.constants;
  const auto f = pnorm_objective(inst);
  const auto sample = log_norm_points(4, 1e-2, 1e2);
  Rng rng(12);
  for (int i = 0; i < 300; ++i) {
    const Vec x = sample(rng);
    const double nx = x.norm();
    const double gn = f.gradient(x).norm();
    CHECK(K.at("L_G") * std::pow(nx, 3) - K.at("C_G") <= gn * (1 + 1e-12));
    CHECK(gn <= (K.at("U_G") * std::pow(nx, 3) + K.at("D_G")) * (1 + 1e-12));
    Eigen::SelfAdjointEigenSolver<Mat> es(f.hessian(x), Eigen::EigenvaluesOnly);
    CHECK(K.at("L_H") * nx * nx + K.at("C_H") <= es.eigenvalues()[0] * (1 + 1e-9));
    CHECK(es.eigenvalues()[3] <= (K.at("U_H") * nx * nx + K.at("D_H")) * (1 + 1e-12));
  }
}

TEST_CASE("pnorm rank deficiency is an assumption violation") {
  auto inst = small_pnorm(4.0, 3, 30, 5);
  inst.A.col(1) = 2 * inst.A.col(0);
  CHECK_THROWS_AS(pnorm_constants(inst, 4), AssumptionViolation);
}

TEST_CASE("pnorm with p = 2 uses the exact quadratic constants") {
  const auto inst = small_pnorm(2.0, 3, 30, 5);
  const auto rep = pnorm_constants(inst, 4);
  Eigen::SelfAdjointEigenSolver<Mat> es(inst.A.transpose() * inst.A);
  CHECK(*rep.closed_form_mu_star == doctest::Approx(2 * es.eigenvalues()[0]));
  CHECK(*rep.closed_form_L_star == doctest::Approx(2 * es.eigenvalues()[2]));
  const auto pr = make_problem(inst);
  const auto s = sample_bregman_ratio(pr.f, pr.k, log_radius_sampler(Vec::Zero(3), 1e-2, 1e2, 2), 200);
  CHECK(s.sup_ratio <= *rep.closed_form_L_star + 1e-6);
  CHECK(s.inf_ratio >= *rep.closed_form_mu_star - 1e-6);
}

TEST_CASE("quadratic constants are the generalized eigenvalues") {
  Mat A(2, 2), P(2, 2);
  A << 2, 0, 0, 8;
  P << 1, 0, 0, 2;
  const auto rep = quadratic_constants(A, P);
  CHECK(*rep.closed_form_mu_star == doctest::Approx(2.0));
  CHECK(*rep.closed_form_L_star == doctest::Approx(4.0));
}

TEST_CASE("condition number comparison") {
  auto diag = [](double kappa) {
    Mat A = Mat::Identity(3, 3);
    A(0, 0) = kappa;
    A(1, 1) = std::sqrt(kappa);
    return A;
  };
  const auto c2 = primal_dual_condition_comparison(diag(2.0), 4.0);
  CHECK(c2.primal_kappa == doctest::Approx(256.0).epsilon(1e-12));
  CHECK(c2.dual_kappa == doctest::Approx(9 * std::pow(2.0, 8.0 / 3.0)).epsilon(1e-12));
  CHECK(c2.dual_kappa == doctest::Approx(57.15).epsilon(1e-4));
  const auto c1 = primal_dual_condition_comparison(diag(1.0), 4.0);
  CHECK(c1.primal_kappa == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(c1.dual_kappa == doctest::Approx(9.0).epsilon(1e-12));
  const auto c10 = primal_dual_condition_comparison(diag(10.0), 4.0);
  // primal / dual = (p^2 / (p-1)^2) kappa^{p - 4 + q}
  CHECK(c10.primal_kappa / c10.dual_kappa == doctest::Approx(16.0 / 9.0 * std::pow(10.0, 4.0 / 3.0)).epsilon(1e-12));
  CHECK(c10.primal_kappa > c10.dual_kappa);
  CHECK_THROWS_AS(primal_dual_condition_comparison(diag(2.0), 2.0), std::invalid_argument);
}

TEST_CASE("report serialization") {
  CertificateReport rep;
  rep.closed_form_L_star = 2.5;
  rep.n_samples = 7;
  rep.constants["eta"] = 1.0;
  const auto j = report_to_json(rep);
  CHECK(j["closed_form_L_star"].get<double>() == 2.5);
  CHECK(j["closed_form_mu_star"].is_null());
  CHECK(j["n_samples"].get<long>() == 7);
  CHECK(j["constants"]["eta"].get<double>() == 1.0);
}
