#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ldc {

using Index = std::int64_t;

struct CoefficientSums {
  double total;      ///< A
  double minus;      ///< A^- (negative lags)
  double plus;       ///< A^+ (lags >= 0)
  double abs_total;  ///< sum of |a_i|
};

/// Finite-support moving-average coefficients a_i, i in [window_lo, window_hi],
/// zero outside. The total sum must be positive.
class CoefficientSeq {
 public:
  /// Throws PreconditionError on empty/non-finite input or a non-positive total.
  CoefficientSeq(Index window_lo, std::vector<double> values);

  Index window_lo() const { return lo_; }
  Index window_hi() const { return lo_ + static_cast<Index>(values_.size()) - 1; }
  std::span<const double> values() const { return values_; }

  /// a_i (zero outside the window).
  double operator[](Index i) const;
  double max_abs() const;

  CoefficientSums sums() const;
  double total() const { return cumulative_.back(); }

  /// Sum of a_i for i <= k.
  double prefix_through(Index k) const;

  /// A_n^+ = a_0 + ... + a_n. Throws for n < 0.
  double partial_plus(Index n) const;
  /// A_n^- = a_{-1} + ... + a_{-n}; A_0^- = 0. Throws for n < 0.
  double partial_minus(Index n) const;

  /// Coefficient of Z_j in S_n = X_0 + ... + X_{n-1}. Throws for n < 1.
  double s_n_coefficient(Index n, Index j) const;

  /// Smallest and largest j for which Z_j can enter S_n.
  Index s_n_first(Index /*n*/) const { return -window_hi(); }
  Index s_n_last(Index n) const { return n - 1 - lo_; }

 private:
  Index lo_;
  std::vector<double> values_;
  std::vector<double> cumulative_;  // cumulative_[k] = a_lo + ... + a_{lo+k-1}
};

}  // namespace ldc
