#include "ldcluster/mc_conditional.hpp"

#include <cmath>
#include <map>
#include <utility>

#include "ldcluster/errors.hpp"
#include "ldcluster/saddlepoint.hpp"

namespace ldc {

void WindowSpec::validate(const NoiseModel& m, const CoefficientSeq& c) const {
  if (n < 1) throw PreconditionError("window spec: n must be at least 1");
  if (k_minus < 0 || k_plus < 0) throw PreconditionError("window spec: k_minus and k_plus must be nonnegative");
  if (k_minus > 62 || k_plus > 62 || k_minus + k_plus > 62) {
    throw PreconditionError("window spec: at most 62 observed lags are supported");
  }
  require_reachable_level(m, c, eps);
}

std::uint64_t WindowPath::pattern(const WindowSpec& s) const {
  std::uint64_t p = 0;
  for (int j = -s.k_minus; j <= s.k_plus; ++j) {
    if (j != 0 && exceeds(s, j)) p |= std::uint64_t{1} << pattern_bit(s.k_minus, j);
  }
  return p;
}

WindowPath window_from_noise(const CoefficientSeq& c, const WindowSpec& spec, std::span<const double> noise) {
  const Index z0 = spec.first_noise(c);
  const Index expected = spec.last_noise(c) - z0 + 1;
  if (static_cast<Index>(noise.size()) != expected) {
    throw PreconditionError("window_from_noise: noise path has the wrong length");
  }
  // X_i for i in [-k_minus, k_plus + n - 1].
  const Index x0 = -spec.k_minus;
  const Index nx = spec.k_plus + spec.n + spec.k_minus;
  std::vector<double> x(static_cast<std::size_t>(nx), 0.0);
  const auto taps = c.values();
  for (Index i = 0; i < nx; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < taps.size(); ++k) {
      const Index zi = (x0 + i) - (c.window_lo() + static_cast<Index>(k));
      acc += taps[k] * noise[static_cast<std::size_t>(zi - z0)];
    }
    x[static_cast<std::size_t>(i)] = acc;
  }

  constexpr Index kRefresh = Index{1} << 16;
  const double level = static_cast<double>(spec.n) * spec.eps;
  WindowPath out;
  out.indicators.resize(static_cast<std::size_t>(spec.lags()));
  out.overshoots.resize(static_cast<std::size_t>(spec.lags()));
  double sum = 0.0;
  for (Index s = 0; s < spec.lags(); ++s) {
    if (s % kRefresh == 0) {
      sum = 0.0;
      for (Index i = s; i < s + spec.n; ++i) sum += x[static_cast<std::size_t>(i)];
    } else {
      sum += x[static_cast<std::size_t>(s + spec.n - 1)] - x[static_cast<std::size_t>(s - 1)];
    }
    out.overshoots[static_cast<std::size_t>(s)] = sum - level;
    out.indicators[static_cast<std::size_t>(s)] = sum >= level ? 1 : 0;
  }
  return out;
}

WindowPath simulate_window(const NoiseModel& m, const CoefficientSeq& c, const WindowSpec& spec, RandomStream& rng) {
  spec.validate(m, c);
  std::vector<double> z(static_cast<std::size_t>(spec.last_noise(c) - spec.first_noise(c) + 1));
  for (double& v : z) v = sample(m, rng);
  return window_from_noise(c, spec, z);
}

namespace {

/// Saddlepoint tilt restricted to the noises of S_n (= S at lag 0).
struct SumTilt {
  Index first = 0;
  std::vector<double> coef;  // c_{n,j}, j = first + k
  double theta = 0.0;
  double log_mgf = 0.0;      // n psi_n(theta)
};

SumTilt make_sum_tilt(const NoiseModel& m, const CoefficientSeq& c, Index n, double eps,
                      std::optional<double> theta_override) {
  SumTilt t;
  t.first = c.s_n_first(n);
  for (Index j = t.first; j <= c.s_n_last(n); ++j) t.coef.push_back(c.s_n_coefficient(n, j));
  t.theta = theta_override ? *theta_override : solve_theta_n(m, c, n, eps).theta_n;
  t.log_mgf = static_cast<double>(n) * psi_n(m, c, n, t.theta);
  return t;
}

struct PeAccumulator {
  WeightedAccumulator values;
  double sum_w = 0.0;
  double sum_w2 = 0.0;

  void merge(const PeAccumulator& o) {
    values.merge(o.values);
    sum_w += o.sum_w;
    sum_w2 += o.sum_w2;
  }
};

void pe_block(const NoiseModel& m, const SumTilt& tilt, double level, std::int64_t count, RandomStream& rng,
              PeAccumulator& acc) {
  for (std::int64_t s = 0; s < count; ++s) {
    double sum = 0.0;
    for (double cj : tilt.coef) {
      if (cj == 0.0) continue;
      sum += cj * sample_tilted(m, tilt.theta * cj, rng);
    }
    const double w = sum >= level ? std::exp(-tilt.theta * sum + tilt.log_mgf) : 0.0;
    acc.values.add(w, 1.0);
    acc.sum_w += w;
    acc.sum_w2 += w * w;
  }
}

Estimate finish_pe(const PeAccumulator& acc) {
  Estimate e = acc.values.estimate();
  e.ess = acc.sum_w2 > 0.0 ? acc.sum_w * acc.sum_w / acc.sum_w2 : 0.0;
  return e;
}

struct LawAccumulator {
  std::map<std::uint64_t, std::pair<double, double>> by_pattern;  // (sum w, sum w^2)
  double sum_w = 0.0;
  double sum_w2 = 0.0;
  std::int64_t draws = 0;
  std::int64_t accepted = 0;
  std::vector<ConditionalSample> kept;

  void add(std::uint64_t pattern, std::vector<double> overshoots, double w, std::size_t keep) {
    ++accepted;
    auto& slot = by_pattern[pattern];
    slot.first += w;
    slot.second += w * w;
    sum_w += w;
    sum_w2 += w * w;
    if (kept.size() < keep) kept.push_back({pattern, std::move(overshoots), w});
  }

  void merge(LawAccumulator&& o, std::size_t keep) {
    for (const auto& [k, v] : o.by_pattern) {
      auto& slot = by_pattern[k];
      slot.first += v.first;
      slot.second += v.second;
    }
    sum_w += o.sum_w;
    sum_w2 += o.sum_w2;
    draws += o.draws;
    accepted += o.accepted;
    for (auto& s : o.kept) {
      if (kept.size() >= keep) break;
      kept.push_back(std::move(s));
    }
  }

  ConditionalLaw finish(const WindowSpec& spec) && {
    if (accepted == 0 || !(sum_w > 0.0)) {
      throw NumericalError("conditional law: no sample carried positive weight on E_0; increase n_samples");
    }
    ConditionalLaw out;
    out.law.k_minus = spec.k_minus;
    out.law.k_plus = spec.k_plus;
    for (const auto& [k, v] : by_pattern) {
      const double p = v.first / sum_w;
      const double var = (v.second * (1.0 - p) * (1.0 - p) + (sum_w2 - v.second) * p * p) / (sum_w * sum_w);
      out.law.probability[k] = p;
      out.law.std_error[k] = std::sqrt(std::max(0.0, var));
    }
    out.samples = std::move(kept);
    out.draws = draws;
    out.accepted = accepted;
    out.acceptance_rate = draws > 0 ? static_cast<double>(accepted) / static_cast<double>(draws) : 0.0;
    out.ess = sum_w * sum_w / sum_w2;
    out.low_ess = out.ess < 1000.0;
    return out;
  }
};

/// Noise tilts for the full observation window: c_{n,j} theta on S_n's
/// noises, zero elsewhere.
std::vector<double> window_tilts(const CoefficientSeq& c, const WindowSpec& spec, const SumTilt& tilt) {
  const Index z0 = spec.first_noise(c);
  std::vector<double> th(static_cast<std::size_t>(spec.last_noise(c) - z0 + 1), 0.0);
  for (std::size_t k = 0; k < tilt.coef.size(); ++k) {
    const Index j = tilt.first + static_cast<Index>(k);
    th[static_cast<std::size_t>(j - z0)] = tilt.theta * tilt.coef[k];
  }
  return th;
}

void tilted_block(const NoiseModel& m, const CoefficientSeq& c, const WindowSpec& spec, const SumTilt& tilt,
                  const std::vector<double>& tilts, std::int64_t count, RandomStream& rng, std::size_t keep,
                  LawAccumulator& acc) {
  std::vector<double> z(tilts.size());
  for (std::int64_t s = 0; s < count; ++s) {
    for (std::size_t k = 0; k < z.size(); ++k) z[k] = sample_tilted(m, tilts[k], rng);
    WindowPath path = window_from_noise(c, spec, z);
    ++acc.draws;
    if (!path.exceeds(spec, 0)) continue;
    // exp(-theta S_n + n psi_n) up to the constant exp(-theta n eps + n psi_n),
    // which cancels in the self-normalised ratio.
    const double w = std::exp(-tilt.theta * path.overshoot(spec, 0));
    acc.add(path.pattern(spec), std::move(path.overshoots), w, keep);
  }
}

struct RejectionBlock {
  std::int64_t draws = 0;
  std::vector<std::pair<std::int64_t, ConditionalSample>> hits;  // (draw index within block, sample)
};

RejectionBlock rejection_block(const NoiseModel& m, const CoefficientSeq& c, const WindowSpec& spec,
                               std::int64_t count, std::int64_t max_hits, RandomStream& rng) {
  RejectionBlock out;
  std::vector<double> z(static_cast<std::size_t>(spec.last_noise(c) - spec.first_noise(c) + 1));
  for (std::int64_t s = 0; s < count && static_cast<std::int64_t>(out.hits.size()) < max_hits; ++s) {
    for (double& v : z) v = sample(m, rng);
    WindowPath path = window_from_noise(c, spec, z);
    ++out.draws;
    if (path.exceeds(spec, 0)) {
      out.hits.push_back({s, ConditionalSample{path.pattern(spec), std::move(path.overshoots), 1.0}});
    }
  }
  return out;
}

void check_count(std::int64_t n, const char* what) {
  if (n < 1) throw PreconditionError(std::string(what) + " must be at least 1");
}

}  // namespace

Estimate estimate_p_e0_mc(const NoiseModel& m, const CoefficientSeq& c, const WindowSpec& spec,
                          std::int64_t n_samples, RandomStream& rng, std::optional<double> theta_override) {
  spec.validate(m, c);
  check_count(n_samples, "estimate_p_e0_mc: n_samples");
  const SumTilt tilt = make_sum_tilt(m, c, spec.n, spec.eps, theta_override);
  PeAccumulator acc;
  pe_block(m, tilt, static_cast<double>(spec.n) * spec.eps, n_samples, rng, acc);
  return finish_pe(acc);
}

Estimate estimate_p_e0_mc(const NoiseModel& m, const CoefficientSeq& c, const WindowSpec& spec,
                          std::int64_t n_samples, const ReplicationPlan& plan, std::optional<double> theta_override) {
  spec.validate(m, c);
  check_count(n_samples, "estimate_p_e0_mc: n_samples");
  const SumTilt tilt = make_sum_tilt(m, c, spec.n, spec.eps, theta_override);
  const double level = static_cast<double>(spec.n) * spec.eps;
  auto parts = run_blocks(plan.block_count(n_samples), plan.workers, [&](std::int64_t b) {
    RandomStream rng = plan.stream(b);
    PeAccumulator acc;
    pe_block(m, tilt, level, plan.block_length(n_samples, b), rng, acc);
    return acc;
  });
  PeAccumulator total;
  for (const auto& p : parts) total.merge(p);
  return finish_pe(total);
}

ConditionalLaw conditional_law_rejection(const NoiseModel& m, const CoefficientSeq& c, const WindowSpec& spec,
                                         std::int64_t n_accepted_target, std::int64_t max_draws, RandomStream& rng,
                                         std::size_t keep_samples) {
  spec.validate(m, c);
  check_count(n_accepted_target, "conditional_law_rejection: n_accepted_target");
  check_count(max_draws, "conditional_law_rejection: max_draws");
  RejectionBlock block = rejection_block(m, c, spec, max_draws, n_accepted_target, rng);
  if (block.hits.empty()) {
    throw NumericalError("conditional_law_rejection: event too rare for rejection (0 accepted); use the tilted estimator");
  }
  LawAccumulator acc;
  acc.draws = block.draws;
  for (auto& [idx, s] : block.hits) acc.add(s.pattern, std::move(s.overshoots), 1.0, keep_samples);
  return std::move(acc).finish(spec);
}

ConditionalLaw conditional_law_rejection(const NoiseModel& m, const CoefficientSeq& c, const WindowSpec& spec,
                                         std::int64_t n_accepted_target, std::int64_t max_draws,
                                         const ReplicationPlan& plan, std::size_t keep_samples) {
  spec.validate(m, c);
  check_count(n_accepted_target, "conditional_law_rejection: n_accepted_target");
  check_count(max_draws, "conditional_law_rejection: max_draws");
  LawAccumulator acc;
  const std::int64_t n_blocks = plan.block_count(max_draws);
  const std::int64_t batch = std::max(1, plan.workers);
  bool done = false;
  for (std::int64_t first = 0; first < n_blocks && !done; first += batch) {
    const std::int64_t count = std::min(batch, n_blocks - first);
    auto parts = run_blocks(count, plan.workers, [&](std::int64_t k) {
      const std::int64_t b = first + k;
      RandomStream rng = plan.stream(b);
      return rejection_block(m, c, spec, plan.block_length(max_draws, b), plan.block_length(max_draws, b), rng);
    });
    for (auto& part : parts) {
      for (auto& [idx, s] : part.hits) {
        acc.add(s.pattern, std::move(s.overshoots), 1.0, keep_samples);
        if (acc.accepted == n_accepted_target) {
          acc.draws += idx + 1;
          done = true;
          break;
        }
      }
      if (done) break;
      acc.draws += part.draws;
    }
  }
  if (acc.accepted == 0) {
    throw NumericalError("conditional_law_rejection: event too rare for rejection (0 accepted); use the tilted estimator");
  }
  return std::move(acc).finish(spec);
}

ConditionalLaw conditional_law_tilted(const NoiseModel& m, const CoefficientSeq& c, const WindowSpec& spec,
                                      std::int64_t n_samples, RandomStream& rng, std::size_t keep_samples) {
  spec.validate(m, c);
  check_count(n_samples, "conditional_law_tilted: n_samples");
  const SumTilt tilt = make_sum_tilt(m, c, spec.n, spec.eps, std::nullopt);
  const auto tilts = window_tilts(c, spec, tilt);
  LawAccumulator acc;
  tilted_block(m, c, spec, tilt, tilts, n_samples, rng, keep_samples, acc);
  return std::move(acc).finish(spec);
}

ConditionalLaw conditional_law_tilted(const NoiseModel& m, const CoefficientSeq& c, const WindowSpec& spec,
                                      std::int64_t n_samples, const ReplicationPlan& plan,
                                      std::size_t keep_samples) {
  spec.validate(m, c);
  check_count(n_samples, "conditional_law_tilted: n_samples");
  const SumTilt tilt = make_sum_tilt(m, c, spec.n, spec.eps, std::nullopt);
  const auto tilts = window_tilts(c, spec, tilt);
  auto parts = run_blocks(plan.block_count(n_samples), plan.workers, [&](std::int64_t b) {
    RandomStream rng = plan.stream(b);
    LawAccumulator acc;
    tilted_block(m, c, spec, tilt, tilts, plan.block_length(n_samples, b), rng, keep_samples, acc);
    return acc;
  });
  LawAccumulator total;
  for (auto& p : parts) total.merge(std::move(p), keep_samples);
  return std::move(total).finish(spec);
}

}  // namespace ldc
