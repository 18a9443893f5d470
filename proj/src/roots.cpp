#include "ldcluster/roots.hpp"

#include <cmath>
#include <limits>

namespace ldc {

RootResult solve_increasing(const std::function<ValueSlope(double)>& f, double target, double lo, double hi,
                            double abs_tol, double initial_guess, int max_iter) {
  double x = (initial_guess > lo && initial_guess < hi) ? initial_guess : 0.5 * (lo + hi);
  double prev_width = hi - lo;
  RootResult best{x, std::numeric_limits<double>::infinity(), 0, false};

  for (int it = 1; it <= max_iter; ++it) {
    const ValueSlope vs = f(x);
    const double g = vs.value - target;
    if (std::abs(g) < std::abs(best.residual)) best = {x, g, it, false};
    if (std::abs(g) <= abs_tol) return {x, g, it, true};

    if (g < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double width = hi - lo;
    if (width <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) {
      best.iterations = it;
      best.converged = std::abs(best.residual) <= abs_tol;
      return best;
    }

    double next = vs.slope > 0.0 ? x - g / vs.slope : lo - 1.0;
    const bool stalled = width > 0.5 * prev_width;
    if (!(next > lo && next < hi) || (stalled && it > 2 && std::abs(next - x) > 0.5 * width)) {
      next = 0.5 * (lo + hi);
    }
    prev_width = width;
    x = next;
  }
  best.iterations = max_iter;
  return best;
}

double expand_upper_bracket(const std::function<ValueSlope(double)>& f, double target, double hi, double factor,
                            int max_expansions) {
  for (int k = 0; k <= max_expansions; ++k) {
    if (f(hi).value >= target) return hi;
    hi *= factor;
  }
  return -1.0;
}

}  // namespace ldc
