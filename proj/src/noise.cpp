#include "ldcluster/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "ldcluster/errors.hpp"

namespace ldc {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Below this |h t| the uniform cgf and its derivatives use their Taylor
// series; the closed forms lose digits to cancellation there.
constexpr double kUniformSeriesCut = 0.05;

void require_finite(double t, const char* what) {
  if (!std::isfinite(t)) {
    throw PreconditionError(std::string(what) + ": argument must be finite");
  }
}

CgfPoint uniform_cgf(double h, double t) {
  const double x = h * t;
  const double ax = std::abs(x);
  CgfPoint out{};
  if (ax < kUniformSeriesCut) {
    const double x2 = x * x;
    out.value = x2 * (1.0 / 6 + x2 * (-1.0 / 180 + x2 * (1.0 / 2835 + x2 * (-1.0 / 37800 + x2 / 467775))));
    out.d1 = h * x * (1.0 / 3 + x2 * (-1.0 / 45 + x2 * (2.0 / 945 + x2 * (-1.0 / 4725 + x2 * 2.0 / 93555))));
    out.d2 = h * h * (1.0 / 3 + x2 * (-1.0 / 15 + x2 * (2.0 / 189 + x2 * (-1.0 / 675 + x2 * 2.0 / 10395))));
    return out;
  }
  // log(sinh|x| / |x|) without overflowing sinh.
  out.value = ax + std::log1p(-std::exp(-2.0 * ax)) - std::log(2.0) - std::log(ax);
  out.d1 = h * (1.0 / std::tanh(x) - 1.0 / x);
  const double sh = std::sinh(ax);
  out.d2 = h * h * (1.0 / (x * x) - 1.0 / (sh * sh));
  return out;
}

// Log of the normalised posterior component weights w_k MGF_k(t).
std::vector<double> mixture_log_weights(const GaussianMixture& g, double t) {
  std::vector<double> lw(g.weights.size());
  for (std::size_t k = 0; k < lw.size(); ++k) {
    const double s2 = g.sigmas[k] * g.sigmas[k];
    lw[k] = std::log(g.weights[k]) + g.means[k] * t + 0.5 * s2 * t * t;
  }
  return lw;
}

double log_sum_exp(const std::vector<double>& v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

CgfPoint mixture_cgf(const GaussianMixture& g, double t) {
  const auto lw = mixture_log_weights(g, t);
  const double lse = log_sum_exp(lw);
  double d1 = 0.0;
  std::vector<double> p(lw.size()), loc(lw.size());
  for (std::size_t k = 0; k < lw.size(); ++k) {
    p[k] = std::exp(lw[k] - lse);
    loc[k] = g.means[k] + g.sigmas[k] * g.sigmas[k] * t;
    d1 += p[k] * loc[k];
  }
  // Law of total variance keeps d2 positive without cancellation.
  double d2 = 0.0;
  for (std::size_t k = 0; k < lw.size(); ++k) {
    const double dev = loc[k] - d1;
    d2 += p[k] * (g.sigmas[k] * g.sigmas[k] + dev * dev);
  }
  return {lse, d1, d2};
}

}  // namespace

NoiseModel::NoiseModel(NoiseFamily family) : family_(std::move(family)) {}

NoiseModel NoiseModel::gaussian(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw PreconditionError("gaussian noise: sigma must be a positive finite number");
  }
  NoiseModel m(Gaussian{sigma});
  m.sigma_sq_ = sigma * sigma;
  m.support_sup_ = std::numeric_limits<double>::infinity();
  return m;
}

NoiseModel NoiseModel::centered_uniform(double halfwidth) {
  if (!(halfwidth > 0.0) || !std::isfinite(halfwidth)) {
    throw PreconditionError("centered_uniform noise: halfwidth must be a positive finite number");
  }
  NoiseModel m(CenteredUniform{halfwidth});
  m.sigma_sq_ = halfwidth * halfwidth / 3.0;
  m.support_sup_ = halfwidth;
  return m;
}

NoiseModel NoiseModel::gaussian_mixture(std::vector<double> weights, std::vector<double> means,
                                        std::vector<double> sigmas) {
  if (weights.empty() || weights.size() != means.size() || weights.size() != sigmas.size()) {
    throw PreconditionError("gaussian_mixture noise: weights, means and sigmas must be nonempty and of equal length");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!(weights[k] > 0.0) || !std::isfinite(weights[k])) {
      throw PreconditionError("gaussian_mixture noise: weights must be positive");
    }
    if (!(sigmas[k] > 0.0) || !std::isfinite(sigmas[k])) {
      throw PreconditionError("gaussian_mixture noise: sigmas must be positive");
    }
    if (!std::isfinite(means[k])) {
      throw PreconditionError("gaussian_mixture noise: means must be finite");
    }
    total += weights[k];
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw PreconditionError("gaussian_mixture noise: weights must sum to 1");
  }
  for (double& w : weights) w /= total;
  double mean = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) mean += weights[k] * means[k];
  for (double& mu : means) mu -= mean;

  double var = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    var += weights[k] * (sigmas[k] * sigmas[k] + means[k] * means[k]);
  }
  NoiseModel m(GaussianMixture{std::move(weights), std::move(means), std::move(sigmas)});
  m.sigma_sq_ = var;
  m.support_sup_ = std::numeric_limits<double>::infinity();
  return m;
}

std::string NoiseModel::describe() const {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const Gaussian& g) { os << "gaussian(sigma=" << g.sigma << ")"; },
                 [&](const CenteredUniform& u) { os << "centered_uniform(halfwidth=" << u.halfwidth << ")"; },
                 [&](const GaussianMixture& g) { os << "gaussian_mixture(" << g.weights.size() << " components)"; },
             },
             family_);
  return os.str();
}

CgfPoint cgf_all(const NoiseModel& m, double t) {
  require_finite(t, "cgf");
  return std::visit(Overloaded{
                        [&](const Gaussian& g) {
                          const double s2 = g.sigma * g.sigma;
                          return CgfPoint{0.5 * s2 * t * t, s2 * t, s2};
                        },
                        [&](const CenteredUniform& u) { return uniform_cgf(u.halfwidth, t); },
                        [&](const GaussianMixture& g) { return mixture_cgf(g, t); },
                    },
                    m.family());
}

double cgf(const NoiseModel& m, double t) { return cgf_all(m, t).value; }
double cgf_d1(const NoiseModel& m, double t) { return cgf_all(m, t).d1; }
double cgf_d2(const NoiseModel& m, double t) { return cgf_all(m, t).d2; }

double sample(const NoiseModel& m, RandomStream& rng) {
  return std::visit(Overloaded{
                        [&](const Gaussian& g) { return g.sigma * rng.normal(); },
                        [&](const CenteredUniform& u) { return u.halfwidth * (2.0 * rng.uniform() - 1.0); },
                        [&](const GaussianMixture& g) {
                          double u = rng.uniform();
                          std::size_t k = 0;
                          while (k + 1 < g.weights.size() && u >= g.weights[k]) u -= g.weights[k++];
                          return g.means[k] + g.sigmas[k] * rng.normal();
                        },
                    },
                    m.family());
}

double sample_tilted(const NoiseModel& m, double theta, RandomStream& rng) {
  require_finite(theta, "sample_tilted");
  if (theta == 0.0) return sample(m, rng);
  return std::visit(
      Overloaded{
          [&](const Gaussian& g) {
            const double s2 = g.sigma * g.sigma;
            return theta * s2 + g.sigma * rng.normal();
          },
          [&](const CenteredUniform& u) {
            // Inverse CDF of the density proportional to exp(theta x) on [-h, h],
            // written with log1p/expm1 so small |theta| stays accurate.
            const double h = u.halfwidth;
            const double s = std::abs(theta);
            const double v = 1.0 - rng.uniform();  // (0, 1]
            const double x = h + std::log1p(v * std::expm1(-2.0 * s * h)) / s;
            return theta > 0.0 ? x : -x;
          },
          [&](const GaussianMixture& g) {
            const auto lw = mixture_log_weights(g, theta);
            const double lse = log_sum_exp(lw);
            double u = rng.uniform();
            std::size_t k = 0;
            for (; k + 1 < lw.size(); ++k) {
              const double p = std::exp(lw[k] - lse);
              if (u < p) break;
              u -= p;
            }
            const double s2 = g.sigmas[k] * g.sigmas[k];
            return g.means[k] + s2 * theta + g.sigmas[k] * rng.normal();
          },
      },
      m.family());
}

}  // namespace ldc
