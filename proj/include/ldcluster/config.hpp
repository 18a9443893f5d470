#pragma once

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "ldcluster/coefficients.hpp"
#include "ldcluster/errors.hpp"
#include "ldcluster/limit_process.hpp"
#include "ldcluster/noise.hpp"

namespace ldc {

/// Invalid or incomplete configuration; the message names the JSON path.
class ConfigError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

struct NoiseSpec {
  std::string family = "gaussian";  ///< gaussian | centered_uniform | gaussian_mixture
  double sigma = 1.0;
  double halfwidth = 1.0;
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> sigmas;

  NoiseModel build() const;
};

struct CoefficientSpec {
  Index window_lo = 0;
  std::vector<double> values{1.0};

  CoefficientSeq build() const;
};

struct FunctionalSpec {
  std::string kind = "constant";  ///< constant | box | clipped_power
  double value = 1.0;
  Index coord = 0;
  double lower = 0.0;
  double upper = 0.0;  ///< JSON null stands for +inf
  double power = 1.0;
  double cap = 1.0;

  Functional build() const;
};

/// A run description. Command parameters are optional at parse time and
/// required by the subcommands that use them.
struct RunConfig {
  NoiseSpec noise;
  CoefficientSpec coefficients;

  std::optional<Index> n;
  std::optional<double> eps;
  std::optional<std::vector<double>> eps_list;
  std::optional<int> k_minus;
  std::optional<int> k_plus;
  std::optional<std::int64_t> n_samples;
  std::optional<std::string> method;  ///< cluster-law: tilted | rejection
  std::optional<std::int64_t> max_draws;
  std::optional<std::string> overshoot_dump;
  std::optional<double> dt;
  std::optional<double> horizon;
  std::optional<double> delta;
  std::optional<double> tail_delta;
  std::optional<Index> j_max;
  std::optional<Index> j;
  std::optional<double> t;
  std::optional<FunctionalSpec> h;

  std::uint64_t seed = 0;
  int workers = 1;
  std::optional<std::string> output;
  std::string format = "csv";
};

/// Parses and validates a config document. Unknown keys are rejected.
RunConfig parse_config(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& cfg);
/// Reads and parses a JSON file; I/O and syntax errors become ConfigError.
RunConfig load_config(const std::string& path);

}  // namespace ldc
