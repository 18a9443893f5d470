#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ldcluster/coefficients.hpp"
#include "ldcluster/limit_process.hpp"
#include "ldcluster/noise.hpp"
#include "ldcluster/parallel.hpp"
#include "ldcluster/random.hpp"
#include "ldcluster/stats.hpp"

namespace ldc {

/// Euler scheme for A^2 sigma^2 int_0^inf 1(T_0 >= sqrt(2) B_t + t) dt.
struct BrownianFunctionalConfig {
  double dt = 1e-3;
  double horizon = 0.0;  ///< 0 selects max(50, 10 log(1/delta))
  double a_total = 1.0;
  double sigma_sq = 1.0;
  double delta = 1e-4;

  double resolved_horizon() const;
  /// Throws PreconditionError on nonpositive dt/sigma_sq, dt > horizon, or a
  /// horizon whose post-horizon occupation bound reaches delta.
  void validate() const;
};

/// Bound on E int_H^inf 1(T_0 >= sqrt(2) B_t + t) dt:
/// min over lambda in (0,1) of exp(-lambda (1 - lambda) H) / (lambda (1 - lambda)^2).
double post_horizon_occupation_bound(double horizon);

struct BrownianDraw {
  double t0 = 0.0;
  double plus = 0.0;
  double minus = 0.0;
};

/// Draws T_0 ~ Exp(1) and two independent Brownian paths on the grid
/// k dt <= horizon; each value is A^2 sigma^2 dt times the number of grid
/// points with sqrt(2) B_t + t <= T_0. A path is abandoned once it is above
/// T_0 + log(1/delta), from where it returns below T_0 with probability delta.
BrownianDraw simulate_functional(const BrownianFunctionalConfig& cfg, RandomStream& rng);

/// The same draw evaluated on grids dt (every other point) and dt/2 of one
/// fine path, for discretisation checks.
struct RefinedDraw {
  BrownianDraw coarse;
  BrownianDraw fine;
};
RefinedDraw simulate_functional_refined(const BrownianFunctionalConfig& cfg, RandomStream& rng);

std::vector<BrownianDraw> simulate_functional_batch(const BrownianFunctionalConfig& cfg, std::int64_t n_draws,
                                                    const ReplicationPlan& plan);
std::vector<RefinedDraw> simulate_functional_refined_batch(const BrownianFunctionalConfig& cfg, std::int64_t n_draws,
                                                           const ReplicationPlan& plan);

/// A^2 sigma^2 int_0^inf int_0^inf e^{-x} Phi((x - t) / sqrt(2 t)) dx dt by
/// nested adaptive Gauss-Kronrod quadrature (relative tolerance 1e-6).
/// Throws NumericalError if the requested tolerance is not met.
double mean_functional_quadrature(const BrownianFunctionalConfig& cfg);

struct ScalingRow {
  double eps = 0.0;
  double e2_d_plus = 0.0;
  double se_plus = 0.0;
  double e2_d_minus = 0.0;
  double se_minus = 0.0;
  double oracle = 0.0;
  double ratio = 0.0;  ///< e2_d_plus / oracle
  std::int64_t truncated = 0;
};

/// eps^2 E D^+_eps and eps^2 E D^-_eps from n_draws limit draws per eps,
/// against the Brownian mean A^2 sigma^2 * (quadrature constant).
/// Requires eps_list strictly decreasing.
std::vector<ScalingRow> scaling_study(const NoiseModel& m, const CoefficientSeq& c, std::span<const double> eps_list,
                                      std::int64_t n_draws, const LimitOptions& opts, const ReplicationPlan& plan);

}  // namespace ldc
