#include "ldcluster/stats.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "ldcluster/errors.hpp"

namespace ldc {

Estimate weighted_mean_ci(std::span<const double> samples, std::span<const double> weights) {
  if (samples.empty()) throw PreconditionError("weighted_mean_ci: empty input");
  if (samples.size() != weights.size()) throw PreconditionError("weighted_mean_ci: length mismatch");
  double sw = 0.0, sw2 = 0.0, swx = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!(weights[i] >= 0.0)) throw PreconditionError("weighted_mean_ci: weights must be nonnegative");
    sw += weights[i];
    sw2 += weights[i] * weights[i];
    swx += weights[i] * samples[i];
  }
  if (!(sw > 0.0)) throw PreconditionError("weighted_mean_ci: weights sum to zero");
  const double mean = swx / sw;
  double ss = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double d = weights[i] * (samples[i] - mean);
    ss += d * d;
  }
  return {mean, std::sqrt(ss) / sw, static_cast<std::int64_t>(samples.size()), sw * sw / sw2};
}

Estimate mean_ci(std::span<const double> samples) {
  const std::vector<double> ones(samples.size(), 1.0);
  return weighted_mean_ci(samples, ones);
}

void WeightedAccumulator::merge(const WeightedAccumulator& o) {
  count += o.count;
  sum_w += o.sum_w;
  sum_w2 += o.sum_w2;
  sum_wx += o.sum_wx;
  sum_w2x += o.sum_w2x;
  sum_w2x2 += o.sum_w2x2;
}

Estimate WeightedAccumulator::estimate() const {
  if (!(sum_w > 0.0)) throw NumericalError("weighted estimate: no positive weight accumulated");
  const double mean = sum_wx / sum_w;
  const double ss = std::max(0.0, sum_w2x2 - 2.0 * mean * sum_w2x + mean * mean * sum_w2);
  return {mean, std::sqrt(ss) / sum_w, count, sum_w * sum_w / sum_w2};
}

int pattern_bit(int k_minus, int lag) { return lag < 0 ? lag + k_minus : k_minus + lag - 1; }

std::string pattern_string(int k_minus, int k_plus, std::uint64_t pattern) {
  std::string s;
  for (int j = -k_minus; j <= k_plus; ++j) {
    if (j == 0) {
      s += '1';
    } else {
      s += ((pattern >> pattern_bit(k_minus, j)) & 1U) ? '1' : '0';
    }
  }
  return s;
}

PatternLaw restrict_window(const PatternLaw& law, int k_minus, int k_plus) {
  if (k_minus > law.k_minus || k_plus > law.k_plus || k_minus < 0 || k_plus < 0) {
    throw PreconditionError("restrict_window: target window must lie inside the source window");
  }
  PatternLaw out{k_minus, k_plus, {}, {}};
  for (const auto& [pat, p] : law.probability) {
    std::uint64_t q = 0;
    for (int j = -k_minus; j <= k_plus; ++j) {
      if (j == 0) continue;
      if ((pat >> pattern_bit(law.k_minus, j)) & 1U) q |= std::uint64_t{1} << pattern_bit(k_minus, j);
    }
    out.probability[q] += p;
  }
  return out;
}

namespace {

void check_windows(const PatternLaw& a, const PatternLaw& b) {
  if (a.k_minus != b.k_minus || a.k_plus != b.k_plus) {
    throw PreconditionError("tv_distance: pattern windows differ");
  }
  if (a.k_minus > 12 || a.k_plus > 12) {
    throw PreconditionError("tv_distance: windows beyond 12 lags per side are not supported");
  }
}

double lookup(const std::map<std::uint64_t, double>& m, std::uint64_t k) {
  const auto it = m.find(k);
  return it == m.end() ? 0.0 : it->second;
}

std::set<std::uint64_t> support_union(const PatternLaw& a, const PatternLaw& b) {
  std::set<std::uint64_t> keys;
  for (const auto& kv : a.probability) keys.insert(kv.first);
  for (const auto& kv : b.probability) keys.insert(kv.first);
  return keys;
}

}  // namespace

double tv_distance(const PatternLaw& a, const PatternLaw& b) {
  check_windows(a, b);
  double s = 0.0;
  for (std::uint64_t k : support_union(a, b)) s += std::abs(lookup(a.probability, k) - lookup(b.probability, k));
  return std::min(1.0, 0.5 * s);
}

double tv_distance_se(const PatternLaw& a, const PatternLaw& b) {
  check_windows(a, b);
  double v = 0.0;
  for (std::uint64_t k : support_union(a, b)) {
    const double sa = lookup(a.std_error, k);
    const double sb = lookup(b.std_error, k);
    v += sa * sa + sb * sb;
  }
  return 0.5 * std::sqrt(v);
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw PreconditionError("ks_distance: empty input");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(i / nx - j / ny));
  }
  return d;
}

double ks_distance(std::span<const double> a, const std::function<double(double)>& cdf) {
  if (a.empty()) throw PreconditionError("ks_distance: empty input");
  std::vector<double> x(a.begin(), a.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, std::abs((i + 1) / n - f), std::abs(f - i / n)});
  }
  return d;
}

double ks_critical_1pct(std::size_t n_a, std::size_t n_b) {
  const double na = static_cast<double>(n_a), nb = static_cast<double>(n_b);
  if (n_b == 0) return 1.628 / std::sqrt(na);
  return 1.628 * std::sqrt((na + nb) / (na * nb));
}

}  // namespace ldc
