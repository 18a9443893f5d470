#include "ldcluster/limit_process.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "ldcluster/errors.hpp"
#include "ldcluster/roots.hpp"
#include "ldcluster/saddlepoint.hpp"

namespace ldc {

double tilt_parameter(const CoefficientSeq& c, double tau_eps, Side side, Index j) {
  const CoefficientSums s = c.sums();
  const double scale = tau_eps / s.total;
  if (side == Side::minus) {
    if (j < 0) return scale * (s.plus - c.partial_plus(-j - 1));
    return scale * (s.plus + c.partial_minus(j));
  }
  if (j < 0) return scale * (c.partial_plus(-j - 1) + s.minus);
  return scale * (s.minus - c.partial_minus(j));
}

double LimitDraw::crossing(Index j) const {
  if (j == 0) return 0.0;
  if (j > 0) {
    if (j > j_fwd) throw PreconditionError(fmt::format("LimitDraw: lag {} beyond the forward horizon {}", j, j_fwd));
    return forward[static_cast<std::size_t>(j)];
  }
  if (-j > j_back) throw PreconditionError(fmt::format("LimitDraw: lag {} beyond the backward horizon {}", j, j_back));
  return backward[static_cast<std::size_t>(-j - 1)];
}

double LimitDraw::u(Side side, Index i) const {
  const auto& vals = side == Side::minus ? u_minus : u_plus;
  const Index k = i + j_back;
  if (k < 0 || k >= static_cast<Index>(vals.size())) {
    throw PreconditionError(fmt::format("LimitDraw: U index {} outside the drawn range", i));
  }
  return vals[static_cast<std::size_t>(k)];
}

namespace {

/// Limiting noises Z^side_d of one draw, generated lazily in index order
/// (d = 0, 1, ... from one stream and d = -1, -2, ... from another) so that
/// extending the horizon never redraws an existing value.
class NoiseLine {
 public:
  NoiseLine(const NoiseModel& m, const CoefficientSeq& c, double tau, Side side, RandomStream fwd, RandomStream bwd)
      : m_(m), c_(c), tau_(tau), side_(side), fwd_(fwd), bwd_(bwd) {}

  double at(Index d) {
    if (d >= 0) {
      while (static_cast<Index>(pos_.size()) <= d) {
        const Index k = static_cast<Index>(pos_.size());
        pos_.push_back(sample_tilted(m_, tilt_parameter(c_, tau_, side_, k), fwd_));
      }
      return pos_[static_cast<std::size_t>(d)];
    }
    while (static_cast<Index>(neg_.size()) < -d) {
      const Index k = -static_cast<Index>(neg_.size()) - 1;
      neg_.push_back(sample_tilted(m_, tilt_parameter(c_, tau_, side_, k), bwd_));
    }
    return neg_[static_cast<std::size_t>(-d - 1)];
  }

  /// U_i = sum_k a_k Z_{i-k}.
  double u(Index i) {
    const auto taps = c_.values();
    double acc = 0.0;
    for (std::size_t k = 0; k < taps.size(); ++k) acc += taps[k] * at(i - (c_.window_lo() + static_cast<Index>(k)));
    return acc;
  }

 private:
  const NoiseModel& m_;
  const CoefficientSeq& c_;
  double tau_;
  Side side_;
  RandomStream fwd_;
  RandomStream bwd_;
  std::vector<double> pos_;
  std::vector<double> neg_;
};

struct SideResult {
  Index count = 0;
  Index first_exit = 0;
  bool certified = false;
};

/// Extends one crossing walk step by step. `step(k)` returns the k-th
/// increment (k = 0, 1, ...); sums[k + 1] receives the partial sum.
template <class Step>
SideResult run_side(Step&& step, double t_star, const LimitOptions& opts, double margin, Index warmup,
                    std::vector<double>& sums) {
  SideResult r;
  bool leading = true;
  double acc = 0.0;
  const Index cap = opts.extend ? opts.j_max : opts.min_horizon;
  for (Index j = 1; j <= cap; ++j) {
    acc += step(j - 1);
    sums.push_back(acc);
    if (t_star >= acc) {
      ++r.count;
      if (leading) ++r.first_exit;
    } else {
      leading = false;
    }
    if (opts.extend && j >= warmup && acc > t_star + margin) {
      r.certified = true;
      break;
    }
  }
  return r;
}

void check_options(const LimitOptions& opts) {
  if (opts.j_max < 1) throw PreconditionError("limit options: j_max must be at least 1");
  if (opts.min_horizon < 0) throw PreconditionError("limit options: min_horizon must be nonnegative");
  if (opts.extend && opts.min_horizon > opts.j_max) {
    throw PreconditionError("limit options: min_horizon exceeds j_max");
  }
  if (!(opts.tail_delta > 0.0 && opts.tail_delta < 1.0)) {
    throw PreconditionError("limit options: tail_delta must lie in (0, 1)");
  }
  if (opts.t_star && !(*opts.t_star >= 0.0 && std::isfinite(*opts.t_star))) {
    throw PreconditionError("limit options: a fixed t_star must be finite and nonnegative");
  }
}

CoefficientSeq single_tap() { return CoefficientSeq(0, {1.0}); }

LimitDraw walk_draw(const LimitSampler& s, const LimitOptions& opts, RandomStream& rng) {
  check_options(opts);
  const NoiseModel& m = s.model();
  LimitDraw out;
  out.t_star = opts.t_star ? *opts.t_star : rng.exponential(s.rate());
  RandomStream fwd = rng.split();
  RandomStream bwd = rng.split();
  const double tau = s.tau();
  auto step_fwd = [&](Index) { return sample_tilted(m, tau, fwd) - sample(m, fwd); };
  auto step_bwd = [&](Index) { return sample_tilted(m, tau, bwd) - sample(m, bwd); };
  const double margin = s.stop_margin(opts.tail_delta);
  const Index warmup = std::max<Index>(opts.min_horizon, 1);
  out.forward.push_back(0.0);
  const SideResult plus = run_side(step_fwd, out.t_star, opts, margin, warmup, out.forward);
  const SideResult minus = run_side(step_bwd, out.t_star, opts, margin, warmup, out.backward);
  out.j_fwd = static_cast<Index>(out.forward.size()) - 1;
  out.j_back = static_cast<Index>(out.backward.size());
  out.d_plus = plus.count;
  out.d_minus = minus.count;
  out.first_exit_plus = plus.first_exit;
  out.first_exit_minus = minus.first_exit;
  out.truncated = !(plus.certified && minus.certified);
  return out;
}

std::uint64_t draw_pattern(const LimitDraw& d, int k_minus, int k_plus) {
  std::uint64_t p = 0;
  for (int j = -k_minus; j <= k_plus; ++j) {
    if (j != 0 && d.v(j)) p |= std::uint64_t{1} << pattern_bit(k_minus, j);
  }
  return p;
}

template <class Draw>
PatternLaw pattern_law_from(Draw&& draw, int k_minus, int k_plus, std::int64_t n_draws, const ReplicationPlan& plan) {
  if (k_minus < 0 || k_plus < 0 || k_minus + k_plus > 62) {
    throw PreconditionError("pattern law: window sides must be nonnegative with at most 62 lags");
  }
  if (n_draws < 1) throw PreconditionError("pattern law: n_draws must be at least 1");
  LimitOptions opts;
  opts.extend = false;
  opts.min_horizon = std::max(k_minus, k_plus);
  auto parts = run_blocks(plan.block_count(n_draws), plan.workers, [&](std::int64_t b) {
    RandomStream rng = plan.stream(b);
    std::map<std::uint64_t, std::int64_t> counts;
    for (std::int64_t i = 0; i < plan.block_length(n_draws, b); ++i) {
      ++counts[draw_pattern(draw(opts, rng), k_minus, k_plus)];
    }
    return counts;
  });
  std::map<std::uint64_t, std::int64_t> total;
  for (const auto& part : parts) {
    for (const auto& [k, v] : part) total[k] += v;
  }
  PatternLaw law;
  law.k_minus = k_minus;
  law.k_plus = k_plus;
  const double n = static_cast<double>(n_draws);
  for (const auto& [k, v] : total) {
    const double p = static_cast<double>(v) / n;
    law.probability[k] = p;
    law.std_error[k] = std::sqrt(p * (1.0 - p) / n);
  }
  return law;
}

}  // namespace

LimitSampler::LimitSampler(NoiseModel m, CoefficientSeq c, double eps)
    : m_(std::move(m)), c_(std::move(c)), eps_(eps), tau_(solve_tau(m_, c_, eps)) {
  const double a = c_.total();
  rate_ = tau_ / a;
  const double phi_tau = cgf(m_, tau_);
  auto lambda = [&](double g) {
    const CgfPoint lo = cgf_all(m_, tau_ - g * a);
    const CgfPoint hi = cgf_all(m_, g * a);
    return ValueSlope{lo.value - phi_tau + hi.value, a * (hi.d1 - lo.d1)};
  };
  const double lo = tau_ / (2.0 * a);
  double hi = expand_upper_bracket(lambda, 0.0, 2.0 * tau_ / a, 2.0, 20);
  gamma_ = 0.0;
  if (hi > 0.0) {
    const RootResult r = solve_increasing(lambda, 0.0, lo, hi, 1e-14 * std::max(1.0, phi_tau), tau_ / a);
    if (r.converged && r.x >= 1e-8) gamma_ = r.x;
  }
}

double LimitSampler::stop_margin(double delta) const {
  if (gamma_ <= 0.0) return std::numeric_limits<double>::infinity();
  return std::log(1.0 / delta) / gamma_;
}

LimitDraw LimitSampler::sample(const LimitOptions& opts, RandomStream& rng) const {
  check_options(opts);
  LimitDraw out;
  out.t_star = opts.t_star ? *opts.t_star : rng.exponential(rate_);
  RandomStream zm_fwd = rng.split();
  RandomStream zm_bwd = rng.split();
  RandomStream zp_fwd = rng.split();
  RandomStream zp_bwd = rng.split();
  NoiseLine zm(m_, c_, tau_, Side::minus, zm_fwd, zm_bwd);
  NoiseLine zp(m_, c_, tau_, Side::plus, zp_fwd, zp_bwd);

  std::vector<double> um_f, up_f, um_b, up_b;
  auto step_fwd = [&](Index i) {
    um_f.push_back(zm.u(i));
    up_f.push_back(zp.u(i));
    return um_f.back() - up_f.back();
  };
  auto step_bwd = [&](Index k) {
    const Index i = -k - 1;
    um_b.push_back(zm.u(i));
    up_b.push_back(zp.u(i));
    return up_b.back() - um_b.back();
  };
  const double margin = stop_margin(opts.tail_delta);
  const Index width = c_.window_hi() - c_.window_lo() + 1;
  const Index warmup = std::max(opts.min_horizon, width);
  out.forward.push_back(0.0);
  const SideResult plus = run_side(step_fwd, out.t_star, opts, margin, warmup, out.forward);
  const SideResult minus = run_side(step_bwd, out.t_star, opts, margin, warmup, out.backward);

  out.j_fwd = static_cast<Index>(out.forward.size()) - 1;
  out.j_back = static_cast<Index>(out.backward.size());
  out.u_minus.assign(um_b.rbegin(), um_b.rend());
  out.u_minus.insert(out.u_minus.end(), um_f.begin(), um_f.end());
  out.u_plus.assign(up_b.rbegin(), up_b.rend());
  out.u_plus.insert(out.u_plus.end(), up_f.begin(), up_f.end());
  out.d_plus = plus.count;
  out.d_minus = minus.count;
  out.first_exit_plus = plus.first_exit;
  out.first_exit_minus = minus.first_exit;
  out.truncated = !(plus.certified && minus.certified);
  return out;
}

std::vector<double> LimitSampler::overshoots(Index k, RandomStream& rng) const {
  if (k < 0) throw PreconditionError("overshoots: window half-width must be nonnegative");
  LimitOptions opts;
  opts.extend = false;
  opts.min_horizon = k;
  const LimitDraw d = sample(opts, rng);
  std::vector<double> out(static_cast<std::size_t>(2 * k + 1));
  for (Index j = -k; j <= k; ++j) out[static_cast<std::size_t>(j + k)] = d.overshoot(j);
  return out;
}

YDraw LimitSampler::sample_y(Index k, RandomStream& rng) const {
  YDraw out;
  out.k = k;
  out.y = overshoots(k, rng);
  for (double& v : out.y) v = std::exp(v);
  return out;
}

ScaledCrossing LimitSampler::crossing_process(std::span<const double> t_grid, RandomStream& rng) const {
  if (t_grid.empty()) return {};
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] >= 0.0) || !std::isfinite(t_grid[i]) || (i > 0 && t_grid[i] < t_grid[i - 1])) {
      throw PreconditionError("crossing_process: t_grid must be finite, nonnegative and nondecreasing");
    }
  }
  const double inv_e2 = 1.0 / (eps_ * eps_);
  auto steps = [&](double t) { return static_cast<Index>(std::floor(t * inv_e2 * (1.0 + 1e-12))); };
  LimitOptions opts;
  opts.extend = false;
  opts.min_horizon = steps(t_grid.back()) + 1;
  opts.t_star = 0.0;
  const LimitDraw d = sample(opts, rng);
  const double scale = tau_ / c_.total();
  ScaledCrossing out;
  for (double t : t_grid) {
    const Index k = steps(t);
    out.plus.push_back(scale * d.forward[static_cast<std::size_t>(k + 1)]);
    out.minus.push_back(k == 0 ? 0.0 : scale * d.backward[static_cast<std::size_t>(k - 1)]);
  }
  return out;
}

LimitDraw sample_limit(const NoiseModel& m, const CoefficientSeq& c, double eps, const LimitOptions& opts,
                       RandomStream& rng) {
  return LimitSampler(m, c, eps).sample(opts, rng);
}

LimitDraw sample_v_iid(const NoiseModel& m, double eps, const LimitOptions& opts, RandomStream& rng) {
  return walk_draw(LimitSampler(m, single_tap(), eps), opts, rng);
}

std::vector<double> overshoot_limit(const NoiseModel& m, const CoefficientSeq& c, double eps, Index k,
                                    RandomStream& rng) {
  return LimitSampler(m, c, eps).overshoots(k, rng);
}

YDraw sample_y(const NoiseModel& m, const CoefficientSeq& c, double eps, Index k, RandomStream& rng) {
  return LimitSampler(m, c, eps).sample_y(k, rng);
}

ScaledCrossing crossing_process_scaled(const NoiseModel& m, const CoefficientSeq& c, double eps,
                                       std::span<const double> t_grid, RandomStream& rng) {
  return LimitSampler(m, c, eps).crossing_process(t_grid, rng);
}

PatternLaw limit_pattern_law(const LimitSampler& s, int k_minus, int k_plus, std::int64_t n_draws,
                             const ReplicationPlan& plan) {
  return pattern_law_from([&](const LimitOptions& o, RandomStream& r) { return s.sample(o, r); }, k_minus, k_plus,
                          n_draws, plan);
}

PatternLaw v_iid_pattern_law(const NoiseModel& m, double eps, int k_minus, int k_plus, std::int64_t n_draws,
                             const ReplicationPlan& plan) {
  const LimitSampler s(m, single_tap(), eps);
  return pattern_law_from([&](const LimitOptions& o, RandomStream& r) { return walk_draw(s, o, r); }, k_minus,
                          k_plus, n_draws, plan);
}

std::vector<ClusterSizeRow> cluster_sizes(const LimitSampler& s, const LimitOptions& opts, std::int64_t n_draws,
                                          const ReplicationPlan& plan) {
  if (n_draws < 1) throw PreconditionError("cluster_sizes: n_draws must be at least 1");
  check_options(opts);
  auto parts = run_blocks(plan.block_count(n_draws), plan.workers, [&](std::int64_t b) {
    RandomStream rng = plan.stream(b);
    std::vector<ClusterSizeRow> rows;
    const std::int64_t first = b * plan.block_size;
    for (std::int64_t i = 0; i < plan.block_length(n_draws, b); ++i) {
      RandomStream draw_rng = rng.split();
      const LimitDraw d = s.sample(opts, draw_rng);
      rows.push_back({first + i, d.d_minus, d.d_plus, d.t_star, d.truncated});
    }
    return rows;
  });
  std::vector<ClusterSizeRow> out;
  out.reserve(static_cast<std::size_t>(n_draws));
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

Functional Functional::constant(double c) {
  if (!std::isfinite(c)) throw PreconditionError("functional: constant must be finite");
  Functional h;
  h.kind = Kind::constant;
  h.value = c;
  h.bound = std::abs(c);
  return h;
}

Functional Functional::box(Index coord, double lower, double upper) {
  if (!(lower < upper)) throw PreconditionError("functional: box needs lower < upper");
  Functional h;
  h.kind = Kind::box_indicator;
  h.coord = coord;
  h.lower = lower;
  h.upper = upper;
  h.bound = 1.0;
  return h;
}

Functional Functional::clipped_power(Index coord, double power, double cap) {
  if (!std::isfinite(power) || !(cap > 0.0) || !std::isfinite(cap)) {
    throw PreconditionError("functional: clipped power needs a finite power and a finite positive cap");
  }
  Functional h;
  h.kind = Kind::clipped_power;
  h.coord = coord;
  h.power = power;
  h.cap = cap;
  h.bound = cap;
  return h;
}

double Functional::evaluate(const YDraw& y, double scale, Index shift) const {
  double r = value;
  if (kind != Kind::constant) {
    const double x = scale * y.at(coord - shift);
    if (kind == Kind::box_indicator) {
      r = (x > lower && x <= upper) ? 1.0 : 0.0;
    } else {
      r = std::min(std::pow(x, power), cap);
    }
  }
  if (!(std::abs(r) <= bound * (1.0 + 1e-12))) {
    throw NumericalError(fmt::format("functional {} evaluated to {} beyond its bound {} (scale {}, shift {})",
                                     describe(), r, bound, scale, shift));
  }
  return r;
}

std::string Functional::describe() const {
  switch (kind) {
    case Kind::constant:
      return fmt::format("{}", value);
    case Kind::box_indicator:
      if (std::isinf(upper)) return fmt::format("1(Y[{}]>{})", coord, lower);
      return fmt::format("1({}<Y[{}]<={})", lower, coord, upper);
    case Kind::clipped_power:
      if (power == 1.0) return fmt::format("min(Y[{}],{})", coord, cap);
      return fmt::format("min(Y[{}]^{},{})", coord, power, cap);
  }
  return "?";
}

TimeChangeCheck check_time_change(const LimitSampler& s, const Functional& h, Index j, double t,
                                  std::int64_t n_samples, const ReplicationPlan& plan) {
  if (!(t > 0.0) || !std::isfinite(t)) throw PreconditionError("time change: t must be positive and finite");
  if (n_samples < 1) throw PreconditionError("time change: n_samples must be at least 1");
  const Index aj = j < 0 ? -j : j;
  const Index k = std::max(aj, h.reach() + aj);
  const double factor = std::pow(t, s.rate());

  auto run = [&](const ReplicationPlan& p, auto&& term) {
    auto parts = run_blocks(p.block_count(n_samples), p.workers, [&](std::int64_t b) {
      RandomStream rng = p.stream(b);
      WeightedAccumulator acc;
      for (std::int64_t i = 0; i < p.block_length(n_samples, b); ++i) acc.add(term(s.sample_y(k, rng)), 1.0);
      return acc;
    });
    WeightedAccumulator total;
    for (const auto& a : parts) total.merge(a);
    return total.estimate();
  };

  ReplicationPlan rhs_plan = plan;
  rhs_plan.stream_base = plan.stream_base ^ (std::uint64_t{1} << 62);
  TimeChangeCheck out;
  out.lhs = run(plan, [&](const YDraw& y) { return y.at(-j) > 1.0 / t ? h.evaluate(y, t, j) : 0.0; });
  out.rhs = run(rhs_plan, [&](const YDraw& y) { return y.at(j) > t ? factor * h.evaluate(y) : 0.0; });
  const double se = std::hypot(out.lhs.std_error, out.rhs.std_error);
  const double diff = std::abs(out.lhs.value - out.rhs.value);
  out.z_score = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  return out;
}

std::pair<double, double> pareto_time_change_exact(double alpha, double t) {
  if (!(alpha > 0.0) || !(t > 0.0)) throw PreconditionError("pareto_time_change_exact: alpha and t must be positive");
  const double ta = std::pow(t, alpha);
  // lhs = P(W > 1/t), rhs = t^alpha P(W > t).
  const double lhs = std::min(1.0, ta);
  const double rhs = ta * std::min(1.0, 1.0 / ta);
  return {lhs, rhs};
}

}  // namespace ldc
