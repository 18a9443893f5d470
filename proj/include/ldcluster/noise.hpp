#pragma once

#include <string>
#include <variant>
#include <vector>

#include "ldcluster/random.hpp"

namespace ldc {

struct Gaussian {
  double sigma;
};

/// Uniform on [-halfwidth, halfwidth].
struct CenteredUniform {
  double halfwidth;
};

/// Finite mixture of normals, recentered so the overall mean is zero.
struct GaussianMixture {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> sigmas;
};

using NoiseFamily = std::variant<Gaussian, CenteredUniform, GaussianMixture>;

/// Zero-mean, non-lattice noise law with an everywhere-finite moment
/// generating function. Only the families above can be constructed, so the
/// standing assumptions hold by construction. Immutable once built.
class NoiseModel {
 public:
  static NoiseModel gaussian(double sigma);
  static NoiseModel centered_uniform(double halfwidth);
  /// Weights must form a probability vector; means are shifted by the
  /// overall mean so the mixture is centred.
  static NoiseModel gaussian_mixture(std::vector<double> weights, std::vector<double> means,
                                     std::vector<double> sigmas);

  const NoiseFamily& family() const { return family_; }
  double sigma_sq() const { return sigma_sq_; }
  /// Right endpoint of the support (+inf for unbounded families).
  double support_sup() const { return support_sup_; }
  std::string describe() const;

 private:
  explicit NoiseModel(NoiseFamily family);
  NoiseFamily family_;
  double sigma_sq_ = 0.0;
  double support_sup_ = 0.0;
};

/// Cumulant generating function and its first two derivatives at one point.
struct CgfPoint {
  double value;
  double d1;
  double d2;
};

/// log E exp(tZ). Throws PreconditionError for non-finite t.
double cgf(const NoiseModel& m, double t);
double cgf_d1(const NoiseModel& m, double t);
double cgf_d2(const NoiseModel& m, double t);
CgfPoint cgf_all(const NoiseModel& m, double t);

/// One draw from the noise law.
double sample(const NoiseModel& m, RandomStream& rng);

/// One draw from the exponentially tilted law exp(theta x - cgf(theta)) F(dx).
double sample_tilted(const NoiseModel& m, double theta, RandomStream& rng);

}  // namespace ldc
