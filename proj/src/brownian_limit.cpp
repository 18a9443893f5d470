#include "ldcluster/brownian_limit.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "ldcluster/errors.hpp"

namespace ldc {

double BrownianFunctionalConfig::resolved_horizon() const {
  if (horizon > 0.0) return horizon;
  return std::max(50.0, 10.0 * std::log(1.0 / delta));
}

double post_horizon_occupation_bound(double horizon) {
  if (!(horizon > 0.0)) throw PreconditionError("post_horizon_occupation_bound: horizon must be positive");
  double best = std::numeric_limits<double>::infinity();
  for (int i = 1; i < 1000; ++i) {
    const double l = i / 1000.0;
    best = std::min(best, std::exp(-l * (1.0 - l) * horizon) / (l * (1.0 - l) * (1.0 - l)));
  }
  return best;
}

void BrownianFunctionalConfig::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw PreconditionError("brownian config: delta must lie in (0, 1)");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw PreconditionError("brownian config: dt must be positive");
  if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq)) {
    throw PreconditionError("brownian config: sigma_sq must be positive");
  }
  if (!std::isfinite(a_total) || a_total == 0.0) throw PreconditionError("brownian config: a_total must be nonzero");
  if (horizon < 0.0 || !std::isfinite(horizon)) throw PreconditionError("brownian config: horizon must be >= 0");
  const double h = resolved_horizon();
  if (dt > h) throw PreconditionError("brownian config: dt exceeds the horizon");
  const double bound = a_total * a_total * sigma_sq * post_horizon_occupation_bound(h);
  if (!(bound < delta)) {
    throw PreconditionError(fmt::format(
        "brownian config: horizon {} leaves a post-horizon occupation bound {:.3g} >= delta {}", h, bound, delta));
  }
}

namespace {

std::int64_t grid_points(const BrownianFunctionalConfig& cfg) {
  return static_cast<std::int64_t>(std::floor(cfg.resolved_horizon() / cfg.dt + 1e-9));
}

/// Counts grid points k < n with X_k <= t0 on a path with increments
/// N(dt, 2 dt), stopping once X exceeds t0 + margin.
std::int64_t occupation_count(double t0, double dt, std::int64_t n, double margin, RandomStream& rng) {
  const double sd = std::sqrt(2.0 * dt);
  const double stop = t0 + margin;
  double x = 0.0;
  std::int64_t count = 0;
  for (std::int64_t k = 0; k < n; ++k) {
    if (x <= t0) {
      ++count;
    } else if (x > stop) {
      break;
    }
    x += sd * rng.normal() + dt;
  }
  return count;
}

/// As occupation_count on the fine grid dt/2, also reporting the count over
/// even grid points.
std::pair<std::int64_t, std::int64_t> occupation_count_refined(double t0, double dt, std::int64_t n, double margin,
                                                               RandomStream& rng) {
  const double h = 0.5 * dt;
  const double sd = std::sqrt(2.0 * h);
  const double stop = t0 + margin;
  double x = 0.0;
  std::int64_t coarse = 0;
  std::int64_t fine = 0;
  for (std::int64_t k = 0; k < 2 * n; ++k) {
    if (x <= t0) {
      ++fine;
      if (k % 2 == 0) ++coarse;
    } else if (x > stop) {
      break;
    }
    x += sd * rng.normal() + h;
  }
  return {coarse, fine};
}

void check_draws(std::int64_t n) {
  if (n < 1) throw PreconditionError("brownian functional: n_draws must be at least 1");
}

}  // namespace

BrownianDraw simulate_functional(const BrownianFunctionalConfig& cfg, RandomStream& rng) {
  cfg.validate();
  const double scale = cfg.a_total * cfg.a_total * cfg.sigma_sq * cfg.dt;
  const double margin = std::log(1.0 / cfg.delta);
  const std::int64_t n = grid_points(cfg);
  BrownianDraw d;
  d.t0 = rng.exponential(1.0);
  d.plus = scale * static_cast<double>(occupation_count(d.t0, cfg.dt, n, margin, rng));
  d.minus = scale * static_cast<double>(occupation_count(d.t0, cfg.dt, n, margin, rng));
  return d;
}

RefinedDraw simulate_functional_refined(const BrownianFunctionalConfig& cfg, RandomStream& rng) {
  cfg.validate();
  const double scale = cfg.a_total * cfg.a_total * cfg.sigma_sq * cfg.dt;
  const double margin = std::log(1.0 / cfg.delta);
  const std::int64_t n = grid_points(cfg);
  RefinedDraw d;
  d.coarse.t0 = d.fine.t0 = rng.exponential(1.0);
  const auto [cp, fp] = occupation_count_refined(d.coarse.t0, cfg.dt, n, margin, rng);
  const auto [cm, fm] = occupation_count_refined(d.coarse.t0, cfg.dt, n, margin, rng);
  d.coarse.plus = scale * static_cast<double>(cp);
  d.coarse.minus = scale * static_cast<double>(cm);
  d.fine.plus = 0.5 * scale * static_cast<double>(fp);
  d.fine.minus = 0.5 * scale * static_cast<double>(fm);
  return d;
}

std::vector<BrownianDraw> simulate_functional_batch(const BrownianFunctionalConfig& cfg, std::int64_t n_draws,
                                                    const ReplicationPlan& plan) {
  check_draws(n_draws);
  cfg.validate();
  auto parts = run_blocks(plan.block_count(n_draws), plan.workers, [&](std::int64_t b) {
    RandomStream rng = plan.stream(b);
    std::vector<BrownianDraw> out;
    for (std::int64_t i = 0; i < plan.block_length(n_draws, b); ++i) out.push_back(simulate_functional(cfg, rng));
    return out;
  });
  std::vector<BrownianDraw> all;
  all.reserve(static_cast<std::size_t>(n_draws));
  for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return all;
}

std::vector<RefinedDraw> simulate_functional_refined_batch(const BrownianFunctionalConfig& cfg, std::int64_t n_draws,
                                                           const ReplicationPlan& plan) {
  check_draws(n_draws);
  cfg.validate();
  auto parts = run_blocks(plan.block_count(n_draws), plan.workers, [&](std::int64_t b) {
    RandomStream rng = plan.stream(b);
    std::vector<RefinedDraw> out;
    for (std::int64_t i = 0; i < plan.block_length(n_draws, b); ++i) {
      out.push_back(simulate_functional_refined(cfg, rng));
    }
    return out;
  });
  std::vector<RefinedDraw> all;
  all.reserve(static_cast<std::size_t>(n_draws));
  for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return all;
}

double mean_functional_quadrature(const BrownianFunctionalConfig& cfg) {
  using boost::math::quadrature::gauss_kronrod;
  constexpr double kTol = 1e-6;
  constexpr unsigned kDepth = 12;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  double worst_inner = 0.0;

  auto inner = [&](double t) {
    if (t <= 0.0) return 1.0;
    const double s = 2.0 * std::sqrt(t);
    auto f = [&](double x) { return std::exp(-x) * 0.5 * std::erfc((t - x) / s); };
    double e1 = 0.0, e2 = 0.0;
    const double a = gauss_kronrod<double, 31>::integrate(f, 0.0, t, kDepth, 1e-12, &e1);
    const double b = gauss_kronrod<double, 31>::integrate(f, t, kInf, kDepth, 1e-12, &e2);
    const double v = a + b;
    if (v > 0.0) worst_inner = std::max(worst_inner, (e1 + e2) / v);
    return v;
  };
  // Outer variable u with t = u^2.
  auto outer = [&](double u) { return 2.0 * u * inner(u * u); };

  double err_a = 0.0, err_b = 0.0;
  const double head = gauss_kronrod<double, 31>::integrate(outer, 0.0, 1.0, kDepth, 1e-9, &err_a);
  const double tail = gauss_kronrod<double, 31>::integrate(outer, 1.0, kInf, kDepth, 1e-9, &err_b);
  const double base = head + tail;
  const double achieved = (err_a + err_b) / base + worst_inner;
  if (!(achieved <= kTol) || !std::isfinite(base)) {
    throw NumericalError(fmt::format("mean_functional_quadrature: achieved relative error {:.3g} > {:.0e}", achieved,
                                     kTol));
  }
  return cfg.a_total * cfg.a_total * cfg.sigma_sq * base;
}

std::vector<ScalingRow> scaling_study(const NoiseModel& m, const CoefficientSeq& c, std::span<const double> eps_list,
                                      std::int64_t n_draws, const LimitOptions& opts, const ReplicationPlan& plan) {
  if (eps_list.empty()) throw PreconditionError("scaling_study: eps_list is empty");
  for (std::size_t i = 1; i < eps_list.size(); ++i) {
    if (!(eps_list[i] < eps_list[i - 1])) throw PreconditionError("scaling_study: eps_list must be strictly decreasing");
  }
  check_draws(n_draws);
  BrownianFunctionalConfig bcfg;
  bcfg.a_total = c.total();
  bcfg.sigma_sq = m.sigma_sq();
  const double oracle = mean_functional_quadrature(bcfg);

  std::vector<ScalingRow> rows;
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    const double eps = eps_list[i];
    const LimitSampler s(m, c, eps);
    ReplicationPlan p = plan;
    p.stream_base = plan.stream_base + (static_cast<std::uint64_t>(i) << 32);
    const auto draws = cluster_sizes(s, opts, n_draws, p);
    std::vector<double> dp, dm;
    dp.reserve(draws.size());
    dm.reserve(draws.size());
    ScalingRow row;
    row.eps = eps;
    for (const auto& d : draws) {
      dp.push_back(static_cast<double>(d.d_plus));
      dm.push_back(static_cast<double>(d.d_minus));
      row.truncated += d.truncated ? 1 : 0;
    }
    const Estimate ep = mean_ci(dp);
    const Estimate em = mean_ci(dm);
    const double e2 = eps * eps;
    row.e2_d_plus = e2 * ep.value;
    row.se_plus = e2 * ep.std_error;
    row.e2_d_minus = e2 * em.value;
    row.se_minus = e2 * em.std_error;
    row.oracle = oracle;
    row.ratio = row.e2_d_plus / oracle;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace ldc
