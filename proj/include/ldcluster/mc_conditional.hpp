#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ldcluster/coefficients.hpp"
#include "ldcluster/noise.hpp"
#include "ldcluster/parallel.hpp"
#include "ldcluster/random.hpp"
#include "ldcluster/stats.hpp"

namespace ldc {

/// A rare-event instance: windows of length n averaging at least eps,
/// observed at lags -k_minus..k_plus around the conditioning window 0.
struct WindowSpec {
  Index n = 1;
  double eps = 0.0;
  int k_minus = 0;
  int k_plus = 0;

  /// Throws PreconditionError unless n >= 1, k_minus, k_plus >= 0 and 0 < eps/A < s_0.
  void validate(const NoiseModel& m, const CoefficientSeq& c) const;
  int lags() const { return k_minus + k_plus + 1; }
  /// First and last noise index any observed window depends on.
  Index first_noise(const CoefficientSeq& c) const { return -k_minus - c.window_hi(); }
  Index last_noise(const CoefficientSeq& c) const { return k_plus + n - 1 - c.window_lo(); }
};

/// Exceedance indicators and overshoots sum_{i=j}^{j+n-1} X_i - n eps, stored
/// at position j + k_minus.
struct WindowPath {
  std::vector<std::uint8_t> indicators;
  std::vector<double> overshoots;

  double overshoot(const WindowSpec& s, int lag) const { return overshoots[static_cast<std::size_t>(lag + s.k_minus)]; }
  bool exceeds(const WindowSpec& s, int lag) const { return indicators[static_cast<std::size_t>(lag + s.k_minus)] != 0; }
  /// Pattern over lags j != 0, bit layout of PatternLaw.
  std::uint64_t pattern(const WindowSpec& s) const;
};

/// Window sums from a given noise path; noise[k] is Z at index first_noise + k.
/// Sums slide by S_{j+1} = S_j - X_j + X_{j+n} with a full recomputation every
/// 2^16 slides.
WindowPath window_from_noise(const CoefficientSeq& c, const WindowSpec& spec, std::span<const double> noise);

/// Unconditional draw of every noise the observed windows depend on.
WindowPath simulate_window(const NoiseModel& m, const CoefficientSeq& c, const WindowSpec& spec, RandomStream& rng);

/// Importance-sampling estimate of P(E_0) under the saddlepoint product tilt:
/// Z_j ~ G_{theta c_{n,j}}, weight exp(-theta S_n + n psi_n(theta)).
/// `theta_override` replaces theta_n (0 gives plain Monte Carlo). ess is taken
/// over the weights of samples in E_0.
Estimate estimate_p_e0_mc(const NoiseModel& m, const CoefficientSeq& c, const WindowSpec& spec,
                          std::int64_t n_samples, RandomStream& rng,
                          std::optional<double> theta_override = std::nullopt);
Estimate estimate_p_e0_mc(const NoiseModel& m, const CoefficientSeq& c, const WindowSpec& spec,
                          std::int64_t n_samples, const ReplicationPlan& plan,
                          std::optional<double> theta_override = std::nullopt);

/// One conditioned sample: exceedance pattern, overshoots over the window and
/// its importance weight (1 under rejection).
struct ConditionalSample {
  std::uint64_t pattern = 0;
  std::vector<double> overshoots;
  double weight = 1.0;
};

struct ConditionalLaw {
  PatternLaw law;
  std::vector<ConditionalSample> samples;  ///< the first `keep_samples` accepted samples
  std::int64_t draws = 0;
  std::int64_t accepted = 0;
  double acceptance_rate = 0.0;  ///< accepted / draws
  double ess = 0.0;              ///< (sum w)^2 / sum w^2 over accepted samples
  bool low_ess = false;          ///< ess below 1000
};

/// Rejection sampler: simulate windows until `n_accepted_target` draws hit
/// E_0 or `max_draws` are spent. Throws NumericalError when nothing is accepted.
ConditionalLaw conditional_law_rejection(const NoiseModel& m, const CoefficientSeq& c, const WindowSpec& spec,
                                         std::int64_t n_accepted_target, std::int64_t max_draws, RandomStream& rng,
                                         std::size_t keep_samples = 1000);
ConditionalLaw conditional_law_rejection(const NoiseModel& m, const CoefficientSeq& c, const WindowSpec& spec,
                                         std::int64_t n_accepted_target, std::int64_t max_draws,
                                         const ReplicationPlan& plan, std::size_t keep_samples = 1000);

/// Self-normalised importance sampler for the law given E_0: noises entering
/// S_n are tilted as in estimate_p_e0_mc, the remaining window noises are not.
/// Throws NumericalError when no sample lands in E_0.
ConditionalLaw conditional_law_tilted(const NoiseModel& m, const CoefficientSeq& c, const WindowSpec& spec,
                                      std::int64_t n_samples, RandomStream& rng, std::size_t keep_samples = 1000);
ConditionalLaw conditional_law_tilted(const NoiseModel& m, const CoefficientSeq& c, const WindowSpec& spec,
                                      std::int64_t n_samples, const ReplicationPlan& plan,
                                      std::size_t keep_samples = 1000);

}  // namespace ldc
