#include "ldcluster/saddlepoint.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "ldcluster/errors.hpp"
#include "ldcluster/roots.hpp"

namespace ldc {

void require_reachable_level(const NoiseModel& m, const CoefficientSeq& c, double eps) {
  const double level = eps / c.total();
  if (!(eps > 0.0) || !std::isfinite(eps) || !(level < m.support_sup())) {
    std::ostringstream os;
    os << "overshoot level eps=" << eps << " violates 0 < eps/A < s_0 (A=" << c.total()
       << ", s_0=" << m.support_sup() << ")";
    throw PreconditionError(os.str());
  }
}

double solve_tau(const NoiseModel& m, const CoefficientSeq& c, double eps) {
  require_reachable_level(m, c, eps);
  const double target = eps / c.total();
  auto f = [&](double t) {
    const CgfPoint p = cgf_all(m, t);
    return ValueSlope{p.d1, p.d2};
  };
  const double hi = expand_upper_bracket(f, target, 50.0);
  if (hi < 0.0) throw NumericalError("solve_tau: could not bracket cgf'(tau) = eps/A");
  const RootResult r = solve_increasing(f, target, 0.0, hi, 1e-12 * std::max(1.0, target), target / m.sigma_sq());
  if (!r.converged) throw NumericalError("solve_tau: root finder did not converge");
  return r.x;
}

CgfPoint psi_n_all(const NoiseModel& m, const CoefficientSeq& c, Index n, double t) {
  if (n < 1) throw PreconditionError("psi_n: n must be at least 1");
  CgfPoint acc{0.0, 0.0, 0.0};
  for (Index j = c.s_n_first(n); j <= c.s_n_last(n); ++j) {
    const double w = c.s_n_coefficient(n, j);
    if (w == 0.0) continue;
    const CgfPoint p = cgf_all(m, w * t);
    acc.value += p.value;
    acc.d1 += w * p.d1;
    acc.d2 += w * w * p.d2;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  return {acc.value * inv_n, acc.d1 * inv_n, acc.d2 * inv_n};
}

double psi_n(const NoiseModel& m, const CoefficientSeq& c, Index n, double t) { return psi_n_all(m, c, n, t).value; }
double psi_n_d1(const NoiseModel& m, const CoefficientSeq& c, Index n, double t) { return psi_n_all(m, c, n, t).d1; }
double psi_n_d2(const NoiseModel& m, const CoefficientSeq& c, Index n, double t) { return psi_n_all(m, c, n, t).d2; }

SaddlepointResult solve_theta_n(const NoiseModel& m, const CoefficientSeq& c, Index n, double eps) {
  require_reachable_level(m, c, eps);
  if (n < 1) throw PreconditionError("solve_theta_n: n must be at least 1");
  auto f = [&](double t) {
    const CgfPoint p = psi_n_all(m, c, n, t);
    return ValueSlope{p.d1, p.d2};
  };
  const double hi = expand_upper_bracket(f, eps, 50.0 / c.max_abs());
  if (hi < 0.0) {
    throw NumericalError("solve_theta_n: n too small or eps beyond reachable mean (psi_n' never reaches eps)");
  }
  const double guess = eps / psi_n_d2(m, c, n, 0.0);
  const RootResult r = solve_increasing(f, eps, 0.0, hi, 1e-12 * std::max(1.0, eps), guess);
  if (!r.converged) throw NumericalError("solve_theta_n: root finder did not converge");

  SaddlepointResult out;
  out.n = n;
  out.eps = eps;
  out.theta_n = r.x;
  const CgfPoint at = psi_n_all(m, c, n, r.x);
  out.psi_at_theta = at.value;
  out.psi_d2_at_theta = at.d2;
  out.tau_eps = solve_tau(m, c, eps);
  out.exponent = static_cast<double>(n) * (r.x * eps - at.value);
  return out;
}

SaddlepointResult prob_e0(const NoiseModel& m, const CoefficientSeq& c, Index n, double eps) {
  SaddlepointResult out = solve_theta_n(m, c, n, eps);
  const double tau = out.tau_eps;
  const double prefactor = 1.0 / (tau * std::sqrt(2.0 * std::numbers::pi * cgf_d2(m, tau)));
  out.prob_approx = prefactor / std::sqrt(static_cast<double>(n)) * std::exp(-out.exponent);
  return out;
}

TailApproximation cs_formula(const CumulantFamily& psi, double a_n, double m_n, double lo, double hi) {
  if (!(a_n > 0.0)) throw PreconditionError("cs_formula: a_n must be positive");
  if (!(lo < hi)) throw PreconditionError("cs_formula: bracket must satisfy lo < hi");

  constexpr int kGrid = 64;
  double prev = psi.d1(lo);
  for (int k = 1; k <= kGrid; ++k) {
    const double x = lo + (hi - lo) * k / kGrid;
    const double v = psi.d1(x);
    if (!(v > prev)) {
      std::ostringstream os;
      os << "cs_formula: psi' is not strictly increasing on the bracket (near x=" << x << ")";
      throw NumericalError(os.str());
    }
    prev = v;
  }
  if (!(m_n > psi.d1(0.0))) {
    throw PreconditionError("cs_formula: degenerate saddlepoint tau_n <= 0 (m_n must exceed psi'(0))");
  }
  if (m_n < psi.d1(lo) || m_n > psi.d1(hi)) {
    throw NumericalError("cs_formula: m_n is not reachable by psi' on the bracket");
  }
  auto f = [&](double t) { return ValueSlope{psi.d1(t), psi.d2(t)}; };
  const RootResult r = solve_increasing(f, m_n, lo, hi, 1e-12 * std::max(1.0, std::abs(m_n)), 0.5 * (lo + hi));
  if (!r.converged) throw NumericalError("cs_formula: root finder did not converge");
  const double tau_n = r.x;
  const double prob = std::exp(-a_n * (m_n * tau_n - psi.value(tau_n))) /
                      (tau_n * std::sqrt(2.0 * std::numbers::pi * a_n * psi.d2(tau_n)));
  return {tau_n, prob};
}

}  // namespace ldc
