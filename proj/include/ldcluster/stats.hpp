#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>

namespace ldc {

/// Monte Carlo estimate. `std_error` is the (delta-method) standard error.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t n_samples = 0;
  double ess = 0.0;
};

/// Self-normalised weighted mean sum(w x) / sum(w) with delta-method standard
/// error sqrt(sum w^2 (x - mean)^2) / sum(w) and ESS (sum w)^2 / sum w^2.
/// With unit weights this is the sample mean with stderr sd / sqrt(n)
/// (sd with denominator n).
Estimate weighted_mean_ci(std::span<const double> samples, std::span<const double> weights);
Estimate mean_ci(std::span<const double> samples);

/// Streaming sums behind a self-normalised weighted mean. merge() is
/// associative, so per-block accumulators can be reduced in any grouping.
struct WeightedAccumulator {
  std::int64_t count = 0;  ///< number of raw samples seen (including zero weights)
  double sum_w = 0.0;
  double sum_w2 = 0.0;
  double sum_wx = 0.0;
  double sum_w2x = 0.0;
  double sum_w2x2 = 0.0;

  void add(double x, double w) {
    ++count;
    sum_w += w;
    sum_w2 += w * w;
    sum_wx += w * x;
    sum_w2x += w * w * x;
    sum_w2x2 += w * w * x * x;
  }
  void merge(const WeightedAccumulator& o);
  Estimate estimate() const;
};

/// Law of the indicator pattern (1(E_j), j in [-k_minus, k_plus], j != 0).
/// Bit layout: lag j < 0 -> bit j + k_minus; lag j > 0 -> bit k_minus + j - 1.
struct PatternLaw {
  int k_minus = 0;
  int k_plus = 0;
  std::map<std::uint64_t, double> probability;
  std::map<std::uint64_t, double> std_error;  ///< may be empty
};

int pattern_bit(int k_minus, int lag);
/// Pattern rendered as '0'/'1' over lags -k_minus..k_plus, the centre always '1'.
std::string pattern_string(int k_minus, int k_plus, std::uint64_t pattern);
/// Marginal law on the smaller window [-k_minus, k_plus].
PatternLaw restrict_window(const PatternLaw& law, int k_minus, int k_plus);

/// (1/2) sum |p_a - p_b|. Throws PreconditionError on a window mismatch or a
/// side longer than 12 lags.
double tv_distance(const PatternLaw& a, const PatternLaw& b);
/// Linearised standard error (1/2) sqrt(sum se_a^2 + se_b^2).
double tv_distance_se(const PatternLaw& a, const PatternLaw& b);

/// Two-sample Kolmogorov-Smirnov statistic. Throws on empty input.
double ks_distance(std::span<const double> a, std::span<const double> b);
/// One-sample statistic against a continuous CDF.
double ks_distance(std::span<const double> a, const std::function<double(double)>& cdf);
/// Asymptotic critical value at level 1%; n_b = 0 gives the one-sample value.
double ks_critical_1pct(std::size_t n_a, std::size_t n_b);

}  // namespace ldc
