#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ldcluster/coefficients.hpp"
#include "ldcluster/noise.hpp"
#include "ldcluster/parallel.hpp"
#include "ldcluster/random.hpp"
#include "ldcluster/stats.hpp"

namespace ldc {

enum class Side { minus, plus };

/// Tilt of the limiting noise Z^side_j: for side minus,
/// tau (A^+ - A^+_{j'-1}) / A at j = -j' < 0 and tau (A^+ + A^-_j) / A at j >= 0;
/// for side plus, tau (A^+_{j'-1} + A^-) / A and tau (A^- - A^-_j) / A.
double tilt_parameter(const CoefficientSeq& c, double tau_eps, Side side, Index j);

struct LimitOptions {
  Index j_max = 1'000'000;  ///< hard cap on the horizon per side
  double tail_delta = 1e-6;  ///< allowed probability of a missed exceedance past the stop
  Index min_horizon = 0;     ///< always extend each side at least this far
  bool extend = true;        ///< false: stop at exactly min_horizon per side
  std::optional<double> t_star;  ///< fixes T* instead of drawing it
};

/// One realisation of the limiting cluster objects.
///
/// forward[j] = sum_{i=0}^{j-1} (U^-_i - U^+_i) for j = 0..j_fwd, and
/// backward[k] = sum_{i=j}^{-1} (U^+_i - U^-_i) for j = -(k + 1), k < j_back.
/// U values are kept for i in [-j_back, j_fwd - 1] (empty for sample_v_iid).
struct LimitDraw {
  double t_star = 0.0;
  Index j_back = 0;
  Index j_fwd = 0;
  std::vector<double> forward;
  std::vector<double> backward;
  std::vector<double> u_minus;
  std::vector<double> u_plus;
  Index d_minus = 0;
  Index d_plus = 0;
  Index first_exit_minus = 0;  ///< leading run of ones in V_{-1}, V_{-2}, ...
  Index first_exit_plus = 0;   ///< leading run of ones in V_1, V_2, ...
  bool truncated = false;      ///< a side ended without the stopping certificate

  /// Crossing sum at lag j != 0 (forward for j > 0, backward for j < 0); 0 at j = 0.
  double crossing(Index j) const;
  /// V_j = 1(T* >= crossing(j)), j != 0.
  bool v(Index j) const { return t_star >= crossing(j); }
  /// Limiting overshoot T* - crossing(j).
  double overshoot(Index j) const { return t_star - crossing(j); }
  double u(Side side, Index i) const;
};

/// Values of Y_j = exp(overshoot_j) for j in [-k, k], stored at j + k.
struct YDraw {
  Index k = 0;
  std::vector<double> y;
  double at(Index j) const { return y[static_cast<std::size_t>(j + k)]; }
};

/// Scaled crossing processes W^+(t) and W^-(t) on a time grid.
struct ScaledCrossing {
  std::vector<double> plus;
  std::vector<double> minus;
};

struct ClusterSizeRow {
  std::int64_t draw_id;
  Index d_minus;
  Index d_plus;
  double t_star;
  bool truncated;
};

/// Precomputed limit law for one (noise, coefficients, eps): tau(eps), the
/// rate tau/A of T* and the Lundberg exponent of the crossing walks.
class LimitSampler {
 public:
  /// Throws PreconditionError unless 0 < eps/A < s_0.
  LimitSampler(NoiseModel m, CoefficientSeq c, double eps);

  const NoiseModel& model() const { return m_; }
  const CoefficientSeq& coefficients() const { return c_; }
  double eps() const { return eps_; }
  double tau() const { return tau_; }
  /// Rate of T*, also the Pareto index of exp(T*).
  double rate() const { return rate_; }
  /// Positive root gamma of phi(tau - gamma A) - phi(tau) + phi(gamma A) = 0,
  /// or 0 when it is below 1e-8.
  double lundberg() const { return gamma_; }
  /// log(1 / delta) / gamma; infinite when lundberg() is 0.
  double stop_margin(double delta) const;

  LimitDraw sample(const LimitOptions& opts, RandomStream& rng) const;
  /// Overshoots T* - crossing(j) for j in [-k, k], stored at j + k.
  std::vector<double> overshoots(Index k, RandomStream& rng) const;
  YDraw sample_y(Index k, RandomStream& rng) const;
  /// W^+(t) = (tau/A) sum_{i=0}^{[t/eps^2]} (U^-_i - U^+_i) and
  /// W^-(t) = (tau/A) sum_{i=-[t/eps^2]}^{-1} (U^+_i - U^-_i).
  ScaledCrossing crossing_process(std::span<const double> t_grid, RandomStream& rng) const;

 private:
  NoiseModel m_;
  CoefficientSeq c_;
  double eps_;
  double tau_;
  double rate_;
  double gamma_;
};

LimitDraw sample_limit(const NoiseModel& m, const CoefficientSeq& c, double eps, const LimitOptions& opts,
                       RandomStream& rng);

/// Random-walk construction for a single tap a_0 = 1: both crossing walks
/// take steps A' - B with A' ~ G_tau, B ~ G. V_j = 1(T* >= walk_j) for every
/// j, as in the general sampler; first_exit_* records the first crossing.
LimitDraw sample_v_iid(const NoiseModel& m, double eps, const LimitOptions& opts, RandomStream& rng);

std::vector<double> overshoot_limit(const NoiseModel& m, const CoefficientSeq& c, double eps, Index k,
                                    RandomStream& rng);
YDraw sample_y(const NoiseModel& m, const CoefficientSeq& c, double eps, Index k, RandomStream& rng);
ScaledCrossing crossing_process_scaled(const NoiseModel& m, const CoefficientSeq& c, double eps,
                                       std::span<const double> t_grid, RandomStream& rng);

/// Law of (V_j, j in [-k_minus, k_plus] \ {0}) over n_draws limit draws,
/// with binomial standard errors.
PatternLaw limit_pattern_law(const LimitSampler& s, int k_minus, int k_plus, std::int64_t n_draws,
                             const ReplicationPlan& plan);
/// The same for sample_v_iid.
PatternLaw v_iid_pattern_law(const NoiseModel& m, double eps, int k_minus, int k_plus, std::int64_t n_draws,
                             const ReplicationPlan& plan);

/// Cluster sizes (D^-, D^+) of n_draws limit draws, in draw order.
std::vector<ClusterSizeRow> cluster_sizes(const LimitSampler& s, const LimitOptions& opts, std::int64_t n_draws,
                                          const ReplicationPlan& plan);

/// Bounded functional H of finitely many coordinates of Y. The bound is
/// checked on every evaluation; a violation throws NumericalError.
struct Functional {
  enum class Kind { constant, box_indicator, clipped_power };
  Kind kind = Kind::constant;
  double value = 1.0;  ///< constant
  Index coord = 0;     ///< box_indicator and clipped_power
  double lower = 0.0;  ///< box_indicator: 1(lower < y_coord <= upper)
  double upper = 0.0;
  double power = 1.0;  ///< clipped_power: min(y_coord^power, cap)
  double cap = 1.0;
  double bound = 1.0;

  static Functional constant(double c);
  static Functional box(Index coord, double lower, double upper);
  static Functional clipped_power(Index coord, double power, double cap);

  /// Largest |coordinate| read.
  Index reach() const { return kind == Kind::constant ? 0 : (coord < 0 ? -coord : coord); }
  /// H(scale * B^shift y), i.e. reads scale * y_{coord - shift}.
  double evaluate(const YDraw& y, double scale = 1.0, Index shift = 0) const;
  std::string describe() const;
};

struct TimeChangeCheck {
  Estimate lhs;
  Estimate rhs;
  double z_score;  ///< |lhs - rhs| / sqrt(se_lhs^2 + se_rhs^2)
};

/// Monte Carlo estimates of E[H(t B^j Y) 1(Y_{-j} > 1/t)] and
/// t^{tau/A} E[H(Y) 1(Y_j > t)] from independent sample sets.
TimeChangeCheck check_time_change(const LimitSampler& s, const Functional& h, Index j, double t,
                                  std::int64_t n_samples, const ReplicationPlan& plan);

/// Both sides of the time change identity for H = 1, j = 0 in closed form,
/// using P(W > x) = min(1, x^-alpha) for W = exp(T*).
std::pair<double, double> pareto_time_change_exact(double alpha, double t);

}  // namespace ldc
