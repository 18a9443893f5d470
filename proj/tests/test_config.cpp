#include <doctest.h>

#include <cmath>
#include <json.hpp>
#include <string>

#include "ldcluster/config.hpp"

using namespace ldc;
using nlohmann::json;

namespace {

json base() {
  return json{{"noise", {{"family", "gaussian"}, {"sigma", 1.0}}},
              {"coefficients", {{"window_lo", 0}, {"values", {0.5, 0.5}}}}};
}

std::string error_of(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal config") {
  const RunConfig cfg = parse_config(base());
  CHECK(cfg.seed == 0);
  CHECK(cfg.workers == 1);
  CHECK(cfg.format == "csv");
  CHECK_FALSE(cfg.n.has_value());
  CHECK(cfg.coefficients.build().total() == doctest::Approx(1.0));
  CHECK(cfg.noise.build().sigma_sq() == doctest::Approx(1.0));
}

TEST_CASE("round trip") {
  json j = base();
  j["noise"] = {{"family", "gaussian_mixture"}, {"weights", {0.3, 0.7}}, {"means", {-1.0, 0.5}}, {"sigmas", {0.5, 1.0}}};
  j["n"] = 100;
  j["eps"] = 0.3;
  j["eps_list"] = {0.4, 0.2};
  j["k_minus"] = 3;
  j["k_plus"] = 2;
  j["n_samples"] = 1000;
  j["method"] = "rejection";
  j["j"] = -1;
  j["t"] = 2.0;
  j["h"] = {{"kind", "box"}, {"coord", 0}, {"lower", 1.0}, {"upper", nullptr}};
  j["seed"] = 42;
  j["workers"] = 4;
  j["format"] = "json";
  const RunConfig cfg = parse_config(j);
  CHECK(std::isinf(cfg.h->upper));
  CHECK(cfg.h->build().describe() == "1(Y[0]>1)");
  const json back = to_json(cfg);
  const RunConfig again = parse_config(back);
  CHECK(to_json(again) == back);
  CHECK(again.k_minus == 3);
  CHECK(again.method == "rejection");
  CHECK(again.seed == 42);
}

TEST_CASE("errors name the offending path") {
  json j = base();
  j["colour"] = "red";
  CHECK(error_of(j).find("$.colour") != std::string::npos);

  j = base();
  j.erase("noise");
  CHECK(error_of(j).find("missing required field 'noise'") != std::string::npos);

  j = base();
  j["noise"]["sigma"] = -1.0;
  CHECK(error_of(j).find("$.noise.sigma") != std::string::npos);

  j = base();
  j["noise"] = {{"family", "cauchy"}};
  CHECK(error_of(j).find("unknown family") != std::string::npos);

  j = base();
  j["n"] = 1.5;
  CHECK(error_of(j).find("$.n") != std::string::npos);

  j = base();
  j["format"] = "xml";
  CHECK_FALSE(error_of(j).empty());

  j = base();
  j["workers"] = 0;
  CHECK_FALSE(error_of(j).empty());

  j = base();
  j["k_minus"] = 20;
  j["k_plus"] = 20;
  CHECK_FALSE(error_of(j).empty());

  j = base();
  j["coefficients"]["values"] = {1.0, -2.0};
  CHECK_FALSE(error_of(j).empty());
}

TEST_CASE("unreachable levels are rejected at parse time") {
  json j = base();
  j["noise"] = {{"family", "centered_uniform"}, {"halfwidth", 1.0}};
  j["eps"] = 1.0;
  CHECK(error_of(j).find("eps/A < s_0") != std::string::npos);
  j["eps"] = 0.99;
  CHECK(error_of(j).empty());
  j["eps_list"] = {0.5, 1.5};
  CHECK(error_of(j).find("eps/A < s_0") != std::string::npos);
}

TEST_CASE("load_config reports unreadable files") {
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}
