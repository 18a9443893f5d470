#include "ldcluster/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "ldcluster/saddlepoint.hpp"

namespace ldc {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError("config " + path + ": " + msg);
}

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.count(k)) fail(path + "." + k, "unknown field");
  }
}

const json& field(const json& obj, const std::string& path, const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing required field '" + key + "'");
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(path, "expected a finite number");
  return x;
}

std::int64_t as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
    fail(path, "integer out of range");
  }
  return v.get<std::int64_t>();
}

std::vector<double> as_numbers(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

template <class T, class Get>
void optional_field(const json& obj, const std::string& path, const std::string& key, std::optional<T>& dst,
                    Get&& get) {
  auto it = obj.find(key);
  if (it != obj.end()) dst = get(*it, path + "." + key);
}

NoiseSpec parse_noise(const json& v, const std::string& path) {
  if (!v.is_object()) fail(path, "expected an object");
  NoiseSpec s;
  s.family = as_string(field(v, path, "family"), path + ".family");
  if (s.family == "gaussian") {
    check_keys(v, path, {"family", "sigma"});
    s.sigma = as_number(field(v, path, "sigma"), path + ".sigma");
    if (!(s.sigma > 0.0)) fail(path + ".sigma", "must be positive");
  } else if (s.family == "centered_uniform") {
    check_keys(v, path, {"family", "halfwidth"});
    s.halfwidth = as_number(field(v, path, "halfwidth"), path + ".halfwidth");
    if (!(s.halfwidth > 0.0)) fail(path + ".halfwidth", "must be positive");
  } else if (s.family == "gaussian_mixture") {
    check_keys(v, path, {"family", "weights", "means", "sigmas"});
    s.weights = as_numbers(field(v, path, "weights"), path + ".weights");
    s.means = as_numbers(field(v, path, "means"), path + ".means");
    s.sigmas = as_numbers(field(v, path, "sigmas"), path + ".sigmas");
  } else {
    fail(path + ".family", "unknown family '" + s.family + "' (gaussian, centered_uniform, gaussian_mixture)");
  }
  try {
    (void)s.build();
  } catch (const PreconditionError& e) {
    fail(path, e.what());
  }
  return s;
}

json noise_json(const NoiseSpec& s) {
  json j{{"family", s.family}};
  if (s.family == "gaussian") j["sigma"] = s.sigma;
  if (s.family == "centered_uniform") j["halfwidth"] = s.halfwidth;
  if (s.family == "gaussian_mixture") {
    j["weights"] = s.weights;
    j["means"] = s.means;
    j["sigmas"] = s.sigmas;
  }
  return j;
}

FunctionalSpec parse_functional(const json& v, const std::string& path) {
  if (!v.is_object()) fail(path, "expected an object");
  FunctionalSpec s;
  s.kind = as_string(field(v, path, "kind"), path + ".kind");
  if (s.kind == "constant") {
    check_keys(v, path, {"kind", "value"});
    s.value = as_number(field(v, path, "value"), path + ".value");
  } else if (s.kind == "box") {
    check_keys(v, path, {"kind", "coord", "lower", "upper"});
    s.coord = as_int(field(v, path, "coord"), path + ".coord");
    s.lower = as_number(field(v, path, "lower"), path + ".lower");
    const json& up = field(v, path, "upper");
    s.upper = up.is_null() ? std::numeric_limits<double>::infinity() : as_number(up, path + ".upper");
  } else if (s.kind == "clipped_power") {
    check_keys(v, path, {"kind", "coord", "power", "cap"});
    s.coord = as_int(field(v, path, "coord"), path + ".coord");
    s.power = as_number(field(v, path, "power"), path + ".power");
    s.cap = as_number(field(v, path, "cap"), path + ".cap");
  } else {
    fail(path + ".kind", "unknown functional '" + s.kind + "' (constant, box, clipped_power)");
  }
  try {
    (void)s.build();
  } catch (const PreconditionError& e) {
    fail(path, e.what());
  }
  return s;
}

json functional_json(const FunctionalSpec& s) {
  json j{{"kind", s.kind}};
  if (s.kind == "constant") j["value"] = s.value;
  if (s.kind == "box") {
    j["coord"] = s.coord;
    j["lower"] = s.lower;
    j["upper"] = std::isinf(s.upper) ? json(nullptr) : json(s.upper);
  }
  if (s.kind == "clipped_power") {
    j["coord"] = s.coord;
    j["power"] = s.power;
    j["cap"] = s.cap;
  }
  return j;
}

}  // namespace

NoiseModel NoiseSpec::build() const {
  if (family == "gaussian") return NoiseModel::gaussian(sigma);
  if (family == "centered_uniform") return NoiseModel::centered_uniform(halfwidth);
  if (family == "gaussian_mixture") return NoiseModel::gaussian_mixture(weights, means, sigmas);
  throw ConfigError("config $.noise.family: unknown family '" + family + "'");
}

CoefficientSeq CoefficientSpec::build() const { return CoefficientSeq(window_lo, values); }

Functional FunctionalSpec::build() const {
  if (kind == "constant") return Functional::constant(value);
  if (kind == "box") return Functional::box(coord, lower, upper);
  if (kind == "clipped_power") return Functional::clipped_power(coord, power, cap);
  throw ConfigError("config $.h.kind: unknown functional '" + kind + "'");
}

RunConfig parse_config(const json& j) {
  const std::string root = "$";
  check_keys(j, root,
             {"noise", "coefficients", "n", "eps", "eps_list", "k_minus", "k_plus", "n_samples", "method",
              "max_draws", "overshoot_dump", "dt", "horizon", "delta", "tail_delta", "j_max", "j", "t", "h", "seed",
              "workers", "output", "format"});
  RunConfig cfg;
  cfg.noise = parse_noise(field(j, root, "noise"), "$.noise");

  const json& cj = field(j, root, "coefficients");
  check_keys(cj, "$.coefficients", {"window_lo", "values"});
  cfg.coefficients.window_lo = as_int(field(cj, "$.coefficients", "window_lo"), "$.coefficients.window_lo");
  cfg.coefficients.values = as_numbers(field(cj, "$.coefficients", "values"), "$.coefficients.values");
  std::optional<CoefficientSeq> coef;
  try {
    coef = cfg.coefficients.build();
  } catch (const PreconditionError& e) {
    fail("$.coefficients", e.what());
  }
  const NoiseModel noise = cfg.noise.build();

  auto positive_int = [](const json& v, const std::string& p) {
    const std::int64_t x = as_int(v, p);
    if (x < 1) fail(p, "must be at least 1");
    return x;
  };
  auto nonneg_int = [](const json& v, const std::string& p) {
    const std::int64_t x = as_int(v, p);
    if (x < 0) fail(p, "must be nonnegative");
    if (x > 62) fail(p, "must be at most 62");
    return static_cast<int>(x);
  };
  auto positive_num = [](const json& v, const std::string& p) {
    const double x = as_number(v, p);
    if (!(x > 0.0)) fail(p, "must be positive");
    return x;
  };
  auto reachable = [&](double eps, const std::string& p) {
    try {
      require_reachable_level(noise, *coef, eps);
    } catch (const PreconditionError& e) {
      fail(p, e.what());
    }
    return eps;
  };

  optional_field(j, root, "n", cfg.n, positive_int);
  optional_field(j, root, "eps", cfg.eps, [&](const json& v, const std::string& p) {
    return reachable(as_number(v, p), p);
  });
  optional_field(j, root, "eps_list", cfg.eps_list, [&](const json& v, const std::string& p) {
    auto xs = as_numbers(v, p);
    if (xs.empty()) fail(p, "must be nonempty");
    for (std::size_t i = 0; i < xs.size(); ++i) {
      reachable(xs[i], p + "[" + std::to_string(i) + "]");
      if (i > 0 && !(xs[i] < xs[i - 1])) fail(p, "must be strictly decreasing");
    }
    return xs;
  });
  optional_field(j, root, "k_minus", cfg.k_minus, nonneg_int);
  optional_field(j, root, "k_plus", cfg.k_plus, nonneg_int);
  if (cfg.k_minus && cfg.k_plus && *cfg.k_minus + *cfg.k_plus > 24) {
    fail("$.k_plus", "k_minus + k_plus must be at most 24");
  }
  optional_field(j, root, "n_samples", cfg.n_samples, positive_int);
  optional_field(j, root, "method", cfg.method, [](const json& v, const std::string& p) {
    auto s = as_string(v, p);
    if (s != "tilted" && s != "rejection") fail(p, "must be 'tilted' or 'rejection'");
    return s;
  });
  optional_field(j, root, "max_draws", cfg.max_draws, positive_int);
  optional_field(j, root, "overshoot_dump", cfg.overshoot_dump, as_string);
  optional_field(j, root, "dt", cfg.dt, positive_num);
  optional_field(j, root, "horizon", cfg.horizon, [](const json& v, const std::string& p) {
    const double x = as_number(v, p);
    if (x < 0.0) fail(p, "must be nonnegative (0 selects the automatic horizon)");
    return x;
  });
  optional_field(j, root, "delta", cfg.delta, [](const json& v, const std::string& p) {
    const double x = as_number(v, p);
    if (!(x > 0.0 && x < 1.0)) fail(p, "must lie in (0, 1)");
    return x;
  });
  optional_field(j, root, "tail_delta", cfg.tail_delta, [](const json& v, const std::string& p) {
    const double x = as_number(v, p);
    if (!(x > 0.0 && x < 1.0)) fail(p, "must lie in (0, 1)");
    return x;
  });
  optional_field(j, root, "j_max", cfg.j_max, positive_int);
  optional_field(j, root, "j", cfg.j, as_int);
  optional_field(j, root, "t", cfg.t, positive_num);
  optional_field(j, root, "h", cfg.h, parse_functional);

  if (auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_integer() || (it->is_number_integer() && !it->is_number_unsigned() && it->get<std::int64_t>() < 0)) {
      fail("$.seed", "expected a nonnegative 64-bit integer");
    }
    cfg.seed = it->get<std::uint64_t>();
  }
  if (auto it = j.find("workers"); it != j.end()) {
    const std::int64_t w = as_int(*it, "$.workers");
    if (w < 1 || w > 1024) fail("$.workers", "must be between 1 and 1024");
    cfg.workers = static_cast<int>(w);
  }
  optional_field(j, root, "output", cfg.output, as_string);
  if (auto it = j.find("format"); it != j.end()) {
    cfg.format = as_string(*it, "$.format");
    if (cfg.format != "csv" && cfg.format != "json") fail("$.format", "must be 'csv' or 'json'");
  }
  return cfg;
}

json to_json(const RunConfig& cfg) {
  json j;
  j["noise"] = noise_json(cfg.noise);
  j["coefficients"] = {{"window_lo", cfg.coefficients.window_lo}, {"values", cfg.coefficients.values}};
  auto put = [&](const char* key, const auto& opt) {
    if (opt) j[key] = *opt;
  };
  put("n", cfg.n);
  put("eps", cfg.eps);
  put("eps_list", cfg.eps_list);
  put("k_minus", cfg.k_minus);
  put("k_plus", cfg.k_plus);
  put("n_samples", cfg.n_samples);
  put("method", cfg.method);
  put("max_draws", cfg.max_draws);
  put("overshoot_dump", cfg.overshoot_dump);
  put("dt", cfg.dt);
  put("horizon", cfg.horizon);
  put("delta", cfg.delta);
  put("tail_delta", cfg.tail_delta);
  put("j_max", cfg.j_max);
  put("j", cfg.j);
  put("t", cfg.t);
  if (cfg.h) j["h"] = functional_json(*cfg.h);
  j["seed"] = cfg.seed;
  j["workers"] = cfg.workers;
  put("output", cfg.output);
  j["format"] = cfg.format;
  return j;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  return parse_config(j);
}

}  // namespace ldc
