#include "ldcluster/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ldcluster/errors.hpp"

namespace ldc {

CoefficientSeq::CoefficientSeq(Index window_lo, std::vector<double> values)
    : lo_(window_lo), values_(std::move(values)) {
  if (values_.empty()) throw PreconditionError("coefficients: values must be nonempty");
  cumulative_.reserve(values_.size() + 1);
  cumulative_.push_back(0.0);
  double abs_total = 0.0;
  for (double a : values_) {
    if (!std::isfinite(a)) throw PreconditionError("coefficients: values must be finite");
    cumulative_.push_back(cumulative_.back() + a);
    abs_total += std::abs(a);
  }
  const double total = cumulative_.back();
  if (abs_total == 0.0 || std::abs(total) <= 1e-14 * abs_total) {
    throw PreconditionError("coefficients: the coefficient sum A must be nonzero (short memory requires A != 0)");
  }
  if (total < 0.0) {
    throw PreconditionError(
        "coefficients: the coefficient sum A = " + std::to_string(total) +
        " is negative; negate the coefficients (and the noise, which changes the law unless it is symmetric)");
  }
}

double CoefficientSeq::operator[](Index i) const {
  if (i < lo_ || i > window_hi()) return 0.0;
  return values_[static_cast<std::size_t>(i - lo_)];
}

double CoefficientSeq::max_abs() const {
  double m = 0.0;
  for (double a : values_) m = std::max(m, std::abs(a));
  return m;
}

double CoefficientSeq::prefix_through(Index k) const {
  if (k < lo_) return 0.0;
  const Index n = static_cast<Index>(values_.size());
  return cumulative_[static_cast<std::size_t>(std::min(k - lo_ + 1, n))];
}

CoefficientSums CoefficientSeq::sums() const {
  double abs_total = 0.0;
  for (double a : values_) abs_total += std::abs(a);
  const double minus = prefix_through(-1);
  return {total(), minus, total() - minus, abs_total};
}

double CoefficientSeq::partial_plus(Index n) const {
  if (n < 0) throw PreconditionError("partial_plus: n must be nonnegative");
  return prefix_through(n) - prefix_through(-1);
}

double CoefficientSeq::partial_minus(Index n) const {
  if (n < 0) throw PreconditionError("partial_minus: n must be nonnegative");
  return prefix_through(-1) - prefix_through(-n - 1);
}

double CoefficientSeq::s_n_coefficient(Index n, Index j) const {
  if (n < 1) throw PreconditionError("s_n_coefficient: n must be at least 1");
  if (j < 0) return partial_plus(-j + n - 1) - partial_plus(-j - 1);
  if (j >= n) return partial_minus(j) - partial_minus(j - n);
  return partial_plus(n - 1 - j) + partial_minus(j);
}

}  // namespace ldc
