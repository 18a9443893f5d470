#include "ldcluster/commands.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>

#include "ldcluster/brownian_limit.hpp"
#include "ldcluster/limit_process.hpp"
#include "ldcluster/mc_conditional.hpp"
#include "ldcluster/saddlepoint.hpp"

namespace ldc {

using nlohmann::json;

namespace {

template <class T>
T need(const std::optional<T>& v, const char* key, const std::string& cmd) {
  if (!v) throw ConfigError(fmt::format("config $.{}: missing required field '{}' for subcommand {}", key, key, cmd));
  return *v;
}

std::string num(double x) { return fmt::format("{:.17g}", x); }

ReplicationPlan plan_for(const RunConfig& cfg, std::uint64_t stream_base = 0) {
  ReplicationPlan p;
  p.seed = cfg.seed;
  p.stream_base = stream_base;
  p.workers = cfg.workers;
  return p;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

/// One header row and one value row.
std::string csv_record(const std::vector<std::pair<std::string, std::string>>& fields) {
  std::string head, row;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    head += (i ? "," : "") + fields[i].first;
    row += (i ? "," : "") + fields[i].second;
  }
  return head + "\n" + row + "\n";
}

CommandResult cmd_prob(const RunConfig& cfg) {
  const std::string cmd = "prob";
  const NoiseModel m = cfg.noise.build();
  const CoefficientSeq c = cfg.coefficients.build();
  const Index n = need(cfg.n, "n", cmd);
  const double eps = need(cfg.eps, "eps", cmd);
  const SaddlepointResult r = prob_e0(m, c, n, eps);
  std::optional<Estimate> mc;
  if (cfg.n_samples) mc = estimate_p_e0_mc(m, c, WindowSpec{n, eps, 0, 0}, *cfg.n_samples, plan_for(cfg));

  CommandResult out;
  if (cfg.format == "json") {
    json j{{"n", n},
           {"eps", eps},
           {"theta_n", r.theta_n},
           {"tau_eps", r.tau_eps},
           {"exponent", r.exponent},
           {"prob_approx", r.prob_approx}};
    if (mc) {
      j["prob_mc"] = mc->value;
      j["mc_stderr"] = mc->std_error;
      j["mc_ess"] = mc->ess;
      j["n_samples"] = mc->n_samples;
    }
    out.body = dump(j);
  } else {
    std::vector<std::pair<std::string, std::string>> f{{"n", std::to_string(n)},
                                                       {"eps", num(eps)},
                                                       {"theta_n", num(r.theta_n)},
                                                       {"tau_eps", num(r.tau_eps)},
                                                       {"exponent", num(r.exponent)},
                                                       {"prob_approx", num(r.prob_approx)}};
    if (mc) {
      f.push_back({"prob_mc", num(mc->value)});
      f.push_back({"mc_stderr", num(mc->std_error)});
      f.push_back({"mc_ess", num(mc->ess)});
    }
    out.body = csv_record(f);
  }
  return out;
}

CommandResult cmd_cluster_law(const RunConfig& cfg) {
  const std::string cmd = "cluster-law";
  const NoiseModel m = cfg.noise.build();
  const CoefficientSeq c = cfg.coefficients.build();
  WindowSpec spec{need(cfg.n, "n", cmd), need(cfg.eps, "eps", cmd), need(cfg.k_minus, "k_minus", cmd),
                  need(cfg.k_plus, "k_plus", cmd)};
  const std::int64_t n_samples = need(cfg.n_samples, "n_samples", cmd);
  const std::string method = cfg.method.value_or("tilted");
  const std::size_t keep = cfg.overshoot_dump ? 1000 : 0;
  ConditionalLaw law =
      method == "rejection"
          ? conditional_law_rejection(m, c, spec, n_samples, cfg.max_draws.value_or(100 * n_samples), plan_for(cfg),
                                      keep)
          : conditional_law_tilted(m, c, spec, n_samples, plan_for(cfg), keep);

  CommandResult out;
  if (law.low_ess) {
    out.warnings.push_back(fmt::format("effective sample size {:.1f} is below 1000; estimates are unreliable", law.ess));
  }
  std::vector<std::pair<std::string, std::uint64_t>> rows;
  for (const auto& [p, prob] : law.law.probability) rows.push_back({pattern_string(spec.k_minus, spec.k_plus, p), p});
  std::sort(rows.begin(), rows.end());

  if (cfg.format == "json") {
    json pats = json::array();
    for (const auto& [s, p] : rows) {
      pats.push_back({{"pattern", s}, {"probability", law.law.probability.at(p)}, {"stderr", law.law.std_error.at(p)}});
    }
    out.body = dump(json{{"method", method},
                         {"n", spec.n},
                         {"eps", spec.eps},
                         {"k_minus", spec.k_minus},
                         {"k_plus", spec.k_plus},
                         {"draws", law.draws},
                         {"accepted", law.accepted},
                         {"acceptance_rate", law.acceptance_rate},
                         {"ess", law.ess},
                         {"patterns", pats}});
  } else {
    out.body = "pattern,probability,stderr\n";
    for (const auto& [s, p] : rows) {
      out.body += fmt::format("{},{},{}\n", s, num(law.law.probability.at(p)), num(law.law.std_error.at(p)));
    }
  }

  if (cfg.overshoot_dump) {
    std::ofstream f(*cfg.overshoot_dump);
    if (!f) throw ConfigError("config $.overshoot_dump: cannot open '" + *cfg.overshoot_dump + "' for writing");
    f << "sample,j,value,weight\n";
    for (std::size_t i = 0; i < law.samples.size(); ++i) {
      const auto& s = law.samples[i];
      for (int j = -spec.k_minus; j <= spec.k_plus; ++j) {
        f << fmt::format("{},{},{},{}\n", i, j, num(s.overshoots[static_cast<std::size_t>(j + spec.k_minus)]),
                         num(s.weight));
      }
    }
  }
  return out;
}

LimitOptions limit_options(const RunConfig& cfg) {
  LimitOptions o;
  if (cfg.tail_delta) o.tail_delta = *cfg.tail_delta;
  if (cfg.j_max) o.j_max = *cfg.j_max;
  return o;
}

CommandResult cmd_cluster_size(const RunConfig& cfg) {
  const std::string cmd = "cluster-size";
  const LimitSampler s(cfg.noise.build(), cfg.coefficients.build(), need(cfg.eps, "eps", cmd));
  const auto rows = cluster_sizes(s, limit_options(cfg), need(cfg.n_samples, "n_samples", cmd), plan_for(cfg));
  CommandResult out;
  std::int64_t truncated = 0;
  for (const auto& r : rows) truncated += r.truncated ? 1 : 0;
  if (truncated > 0) out.warnings.push_back(fmt::format("{} of {} draws hit j_max", truncated, rows.size()));
  if (cfg.format == "json") {
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"draw_id", r.draw_id},
                     {"d_minus", r.d_minus},
                     {"d_plus", r.d_plus},
                     {"t_star", r.t_star},
                     {"truncated", r.truncated}});
    }
    out.body = dump(json{{"eps", s.eps()}, {"tau_eps", s.tau()}, {"draws", arr}});
  } else {
    out.body = "draw_id,d_minus,d_plus,t_star,truncated\n";
    for (const auto& r : rows) {
      out.body += fmt::format("{},{},{},{},{}\n", r.draw_id, r.d_minus, r.d_plus, num(r.t_star), r.truncated ? 1 : 0);
    }
  }
  return out;
}

CommandResult cmd_scaling(const RunConfig& cfg) {
  const std::string cmd = "scaling";
  const auto eps_list = need(cfg.eps_list, "eps_list", cmd);
  const auto rows = scaling_study(cfg.noise.build(), cfg.coefficients.build(), eps_list,
                                  need(cfg.n_samples, "n_samples", cmd), limit_options(cfg), plan_for(cfg));
  CommandResult out;
  if (cfg.format == "json") {
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"eps", r.eps},
                     {"e2_d_plus", r.e2_d_plus},
                     {"stderr", r.se_plus},
                     {"e2_d_minus", r.e2_d_minus},
                     {"stderr_minus", r.se_minus},
                     {"oracle", r.oracle},
                     {"ratio", r.ratio},
                     {"truncated", r.truncated}});
    }
    out.body = dump(arr);
  } else {
    out.body = "eps,e2_d_plus,stderr,oracle,ratio,e2_d_minus,stderr_minus,truncated\n";
    for (const auto& r : rows) {
      out.body += fmt::format("{},{},{},{},{},{},{},{}\n", num(r.eps), num(r.e2_d_plus), num(r.se_plus),
                              num(r.oracle), num(r.ratio), num(r.e2_d_minus), num(r.se_minus), r.truncated);
    }
  }
  return out;
}

CommandResult cmd_time_change(const RunConfig& cfg) {
  const std::string cmd = "time-change";
  const LimitSampler s(cfg.noise.build(), cfg.coefficients.build(), need(cfg.eps, "eps", cmd));
  const Functional h = need(cfg.h, "h", cmd).build();
  const Index j = need(cfg.j, "j", cmd);
  const double t = need(cfg.t, "t", cmd);
  const TimeChangeCheck r = check_time_change(s, h, j, t, need(cfg.n_samples, "n_samples", cmd), plan_for(cfg));
  CommandResult out;
  if (cfg.format == "json") {
    out.body = dump(json{{"j", j},
                         {"t", t},
                         {"H", h.describe()},
                         {"lhs", r.lhs.value},
                         {"lhs_se", r.lhs.std_error},
                         {"rhs", r.rhs.value},
                         {"rhs_se", r.rhs.std_error},
                         {"z", r.z_score}});
  } else {
    out.body = csv_record({{"j", std::to_string(j)},
                           {"t", num(t)},
                           {"H", "\"" + h.describe() + "\""},
                           {"lhs", num(r.lhs.value)},
                           {"lhs_se", num(r.lhs.std_error)},
                           {"rhs", num(r.rhs.value)},
                           {"rhs_se", num(r.rhs.std_error)},
                           {"z", num(r.z_score)}});
  }
  return out;
}

CommandResult cmd_brownian_ref(const RunConfig& cfg) {
  BrownianFunctionalConfig b;
  b.a_total = cfg.coefficients.build().total();
  b.sigma_sq = cfg.noise.build().sigma_sq();
  if (cfg.dt) b.dt = *cfg.dt;
  if (cfg.horizon) b.horizon = *cfg.horizon;
  if (cfg.delta) b.delta = *cfg.delta;
  b.validate();
  const double oracle = mean_functional_quadrature(b);
  std::optional<Estimate> mc;
  if (cfg.n_samples) {
    const auto draws = simulate_functional_batch(b, *cfg.n_samples, plan_for(cfg));
    std::vector<double> v;
    v.reserve(draws.size());
    for (const auto& d : draws) v.push_back(d.plus);
    mc = mean_ci(v);
  }
  CommandResult out;
  json j{{"oracle", oracle}, {"a_total", b.a_total}, {"sigma_sq", b.sigma_sq}};
  std::vector<std::pair<std::string, std::string>> f{
      {"oracle", num(oracle)}, {"a_total", num(b.a_total)}, {"sigma_sq", num(b.sigma_sq)}};
  if (mc) {
    j["dt"] = b.dt;
    j["horizon"] = b.resolved_horizon();
    j["mc_mean"] = mc->value;
    j["mc_stderr"] = mc->std_error;
    j["n_samples"] = mc->n_samples;
    f.push_back({"dt", num(b.dt)});
    f.push_back({"horizon", num(b.resolved_horizon())});
    f.push_back({"mc_mean", num(mc->value)});
    f.push_back({"mc_stderr", num(mc->std_error)});
  }
  out.body = cfg.format == "json" ? dump(j) : csv_record(f);
  return out;
}

using Handler = std::function<CommandResult(const RunConfig&)>;

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h{{"prob", cmd_prob},
                                                {"cluster-law", cmd_cluster_law},
                                                {"cluster-size", cmd_cluster_size},
                                                {"scaling", cmd_scaling},
                                                {"time-change", cmd_time_change},
                                                {"brownian-ref", cmd_brownian_ref}};
  return h;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"prob",    "cluster-law", "cluster-size",
                                              "scaling", "time-change", "brownian-ref"};
  return names;
}

CommandResult run_command(const std::string& name, const RunConfig& cfg) {
  auto it = handlers().find(name);
  if (it == handlers().end()) throw ConfigError("unknown subcommand '" + name + "'");
  return it->second(cfg);
}

}  // namespace ldc
