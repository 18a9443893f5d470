#include <doctest.h>

#include <cmath>
#include <limits>

#include "ldcluster/errors.hpp"
#include "ldcluster/saddlepoint.hpp"
#include "models.hpp"

using namespace ldc;

namespace {

const double kTail3 = 1.3498980316300945e-3;
const double kTail6 = 9.865876450376981e-10;

CumulantFamily gaussian_psi() {
  return {[](double t) { return 0.5 * t * t; }, [](double t) { return t; }, [](double) { return 1.0; }};
}

}  // namespace

TEST_CASE("solve_tau examples") {
  const CoefficientSeq iid(0, {1.0});
  CHECK(solve_tau(NoiseModel::gaussian(1.0), iid, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(solve_tau(NoiseModel::centered_uniform(1.0), iid, 0.3) - 0.953149472857406) < 1e-11);
  CHECK(solve_tau(NoiseModel::gaussian(2.0), CoefficientSeq(0, {2.0}), 0.8) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("solve_tau residual and preconditions") {
  for (const auto& mdl : testing::shipped_models()) {
    CAPTURE(mdl.name);
    const double tau = solve_tau(mdl.noise, mdl.coef, mdl.eps);
    const double target = mdl.eps / mdl.coef.total();
    CHECK(std::abs(cgf_d1(mdl.noise, tau) - target) <= 1e-12 * std::max(1.0, target));
  }
  const NoiseModel u = NoiseModel::centered_uniform(1.0);
  const CoefficientSeq iid(0, {1.0});
  CHECK_THROWS_AS(solve_tau(u, iid, 1.0), PreconditionError);
  CHECK_THROWS_AS(solve_tau(u, iid, 0.0), PreconditionError);
  CHECK_THROWS_AS(solve_tau(u, iid, -0.1), PreconditionError);
  try {
    solve_tau(u, iid, 1.5);
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("eps/A < s_0") != std::string::npos);
  }
  CHECK(solve_tau(u, iid, 0.999) > 100.0);
}

TEST_CASE("psi_n examples") {
  const NoiseModel g = NoiseModel::gaussian(1.0);
  const CoefficientSeq iid(0, {1.0});
  for (Index n : {1, 7, 100}) CHECK(psi_n(g, iid, n, 0.8) == doctest::Approx(0.32).epsilon(1e-14));
  for (const auto& mdl : testing::shipped_models()) CHECK(std::abs(psi_n(mdl.noise, mdl.coef, 9, 0.0)) < 1e-15);
  CHECK(psi_n(g, CoefficientSeq(0, {0.5, 0.5}), 4, 1.0) == doctest::Approx(0.4375).epsilon(1e-14));
}

TEST_CASE("psi_n derivatives match finite differences") {
  const double h = 1e-5;
  for (const auto& mdl : testing::shipped_models()) {
    CAPTURE(mdl.name);
    for (double t = -3.0; t <= 3.0; t += 0.5) {
      const double d1 = (psi_n(mdl.noise, mdl.coef, 20, t + h) - psi_n(mdl.noise, mdl.coef, 20, t - h)) / (2 * h);
      const double d2 =
          (psi_n_d1(mdl.noise, mdl.coef, 20, t + h) - psi_n_d1(mdl.noise, mdl.coef, 20, t - h)) / (2 * h);
      CHECK(std::abs(d1 - psi_n_d1(mdl.noise, mdl.coef, 20, t)) < 1e-6);
      CHECK(std::abs(d2 - psi_n_d2(mdl.noise, mdl.coef, 20, t)) < 1e-6);
    }
  }
}

TEST_CASE("solve_theta_n examples") {
  const NoiseModel g = NoiseModel::gaussian(1.0);
  for (Index n : {1, 10, 400}) {
    CHECK(solve_theta_n(g, CoefficientSeq(0, {1.0}), n, 0.3).theta_n == doctest::Approx(0.3).epsilon(1e-12));
  }
  const CoefficientSeq ma(0, {0.5, 0.5});
  const SaddlepointResult r = solve_theta_n(g, ma, 400, 0.3);
  const double tau = solve_tau(g, ma, 0.3);
  CHECK(std::abs(r.theta_n - tau) < 0.01 * tau);
  CHECK(std::abs(r.psi_d2_at_theta - cgf_d2(g, tau)) < 0.02 * cgf_d2(g, tau));
  CHECK(std::abs(psi_n_d1(g, ma, 400, r.theta_n) - 0.3) <= 1e-12);
  CHECK(r.tau_eps == doctest::Approx(tau));
}

TEST_CASE("saddlepoint invariants on shipped models") {
  for (const auto& mdl : testing::shipped_models()) {
    CAPTURE(mdl.name);
    const double a = mdl.coef.total();
    const double tau = solve_tau(mdl.noise, mdl.coef, mdl.eps);
    double prev_exponent = 0.0;
    for (Index n : {25, 50, 100, 200, 400}) {
      const SaddlepointResult r = prob_e0(mdl.noise, mdl.coef, n, mdl.eps);
      CHECK(r.exponent > prev_exponent);
      CHECK(r.psi_d2_at_theta > 0.0);
      CHECK(r.prob_approx > 0.0);
      CHECK(r.prob_approx < 1.0);
      CHECK(std::abs(psi_n_d1(mdl.noise, mdl.coef, n, r.theta_n) - mdl.eps) <= 1e-12 * std::max(1.0, mdl.eps));
      prev_exponent = r.exponent;
    }
    const double gap100 = std::abs(solve_theta_n(mdl.noise, mdl.coef, 100, mdl.eps).theta_n - tau / a);
    const double gap400 = std::abs(solve_theta_n(mdl.noise, mdl.coef, 400, mdl.eps).theta_n - tau / a);
    CHECK(gap400 <= gap100);

    // Specialised constant vs the generic prefactor psi_n''(theta_n).
    const SaddlepointResult r = prob_e0(mdl.noise, mdl.coef, 400, mdl.eps);
    const CumulantFamily psi{[&](double t) { return psi_n(mdl.noise, mdl.coef, 400, t); },
                             [&](double t) { return psi_n_d1(mdl.noise, mdl.coef, 400, t); },
                             [&](double t) { return psi_n_d2(mdl.noise, mdl.coef, 400, t); }};
    const TailApproximation g = cs_formula(psi, 400.0, mdl.eps, 0.0, 50.0);
    CHECK(g.tau_n == doctest::Approx(r.theta_n).epsilon(1e-9));
    CHECK(std::abs(g.prob / r.prob_approx - 1.0) < 0.02);
  }
}

TEST_CASE("prob_e0 against the gaussian tail") {
  const NoiseModel g = NoiseModel::gaussian(1.0);
  const CoefficientSeq iid(0, {1.0});
  const double p100 = prob_e0(g, iid, 100, 0.3).prob_approx;
  const double p400 = prob_e0(g, iid, 400, 0.3).prob_approx;
  CHECK(p100 == doctest::Approx(1.4772828039793357e-3).epsilon(1e-10));
  CHECK(p400 / kTail6 == doctest::Approx(1.02641).epsilon(1e-4));
  CHECK(std::abs(p400 / kTail6 - 1) < std::abs(p100 / kTail3 - 1));
}

TEST_CASE("cs_formula examples") {
  TailApproximation r = cs_formula(gaussian_psi(), 100.0, 0.3, 0.0, 10.0);
  CHECK(r.tau_n == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(r.prob == doctest::Approx(1.4772828039793357e-3).epsilon(1e-10));
  r = cs_formula(gaussian_psi(), 400.0, 0.3, 0.0, 10.0);
  CHECK(r.prob == doctest::Approx(1.0126471416372142e-9).epsilon(1e-10));
  CHECK_THROWS_AS(cs_formula(gaussian_psi(), 100.0, 0.0, 0.0, 10.0), PreconditionError);
  CHECK_THROWS_AS(cs_formula(gaussian_psi(), 100.0, 20.0, 0.0, 10.0), NumericalError);
  const CumulantFamily wavy{[](double t) { return -std::cos(t); }, [](double t) { return std::sin(t); },
                            [](double t) { return std::cos(t); }};
  CHECK_THROWS_AS(cs_formula(wavy, 100.0, 0.5, 0.0, 10.0), NumericalError);
}
