#pragma once

#include <functional>

#include "ldcluster/coefficients.hpp"
#include "ldcluster/noise.hpp"

namespace ldc {

/// Saddlepoint data for P(S_n >= n eps).
struct SaddlepointResult {
  Index n = 0;
  double eps = 0.0;
  double theta_n = 0.0;          ///< root of psi_n'(theta) = eps
  double psi_at_theta = 0.0;     ///< psi_n(theta_n)
  double psi_d2_at_theta = 0.0;  ///< psi_n''(theta_n)
  double tau_eps = 0.0;          ///< root of cgf'(tau) = eps / A
  double exponent = 0.0;         ///< n (theta_n eps - psi_n(theta_n))
  double prob_approx = 0.0;      ///< filled by prob_e0 only
};

/// Throws PreconditionError unless 0 < eps/A < s_0.
void require_reachable_level(const NoiseModel& m, const CoefficientSeq& c, double eps);

/// The unique tau > 0 with cgf'(tau) = eps / A.
double solve_tau(const NoiseModel& m, const CoefficientSeq& c, double eps);

/// psi_n(t) = n^{-1} log E exp(t S_n), with its first two derivatives.
CgfPoint psi_n_all(const NoiseModel& m, const CoefficientSeq& c, Index n, double t);
double psi_n(const NoiseModel& m, const CoefficientSeq& c, Index n, double t);
double psi_n_d1(const NoiseModel& m, const CoefficientSeq& c, Index n, double t);
double psi_n_d2(const NoiseModel& m, const CoefficientSeq& c, Index n, double t);

/// Solves psi_n'(theta) = eps. Throws NumericalError when the root cannot be
/// bracketed (n too small, or eps beyond the reachable mean).
SaddlepointResult solve_theta_n(const NoiseModel& m, const CoefficientSeq& c, Index n, double eps);

/// (C / sqrt n) exp(-n (theta_n eps - psi_n(theta_n))) with
/// C = 1 / (tau sqrt(2 pi cgf''(tau))).
SaddlepointResult prob_e0(const NoiseModel& m, const CoefficientSeq& c, Index n, double eps);

/// A scaled log-moment generating function psi and its derivatives.
struct CumulantFamily {
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
};

struct TailApproximation {
  double tau_n;
  double prob;
};

/// Generic non-logarithmic tail formula for P(T_n / a_n >= m_n):
/// solves psi'(tau_n) = m_n on [lo, hi] and returns
/// exp(-a_n (m_n tau_n - psi(tau_n))) / (tau_n sqrt(2 pi a_n psi''(tau_n))).
TailApproximation cs_formula(const CumulantFamily& psi, double a_n, double m_n, double lo, double hi);

}  // namespace ldc
