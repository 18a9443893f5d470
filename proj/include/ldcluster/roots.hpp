#pragma once

#include <functional>

namespace ldc {

struct ValueSlope {
  double value;
  double slope;
};

struct RootResult {
  double x;
  double residual;  ///< f(x) - target
  int iterations;
  bool converged;
};

/// Solves f(x) = target for increasing f on [lo, hi] with f(lo) <= target <= f(hi).
///
/// Newton steps are taken from the current iterate and replaced by bisection
/// whenever they leave the bracket or fail to halve it. Stops once
/// |f(x) - target| <= abs_tol or the bracket collapses to a few ulps.
RootResult solve_increasing(const std::function<ValueSlope(double)>& f, double target, double lo, double hi,
                            double abs_tol, double initial_guess, int max_iter = 100);

/// Grows hi geometrically (hi *= factor, up to max_expansions times) until
/// f(hi) >= target. Returns the new hi, or a negative value when the target
/// stays out of reach.
double expand_upper_bracket(const std::function<ValueSlope(double)>& f, double target, double hi,
                            double factor = 4.0, int max_expansions = 10);

}  // namespace ldc
