// Acceptance suite: one PASS/FAIL line per criterion.
#include <fmt/format.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "ldcluster/brownian_limit.hpp"
#include "ldcluster/coefficients.hpp"
#include "ldcluster/limit_process.hpp"
#include "ldcluster/mc_conditional.hpp"
#include "ldcluster/noise.hpp"
#include "ldcluster/saddlepoint.hpp"
#include "ldcluster/stats.hpp"

using namespace ldc;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double gauss_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

ReplicationPlan plan(std::uint64_t seed) { return ReplicationPlan{seed, 0, 1, 4096}; }

Outcome saddlepoint_vs_gaussian_tail() {
  const NoiseModel g = NoiseModel::gaussian(1.0);
  const CoefficientSeq iid(0, {1.0});
  const double eps = 0.3;
  auto ratio = [&](Index n) { return prob_e0(g, iid, n, eps).prob_approx / gauss_tail(std::sqrt(double(n)) * eps); };
  const double r100 = ratio(100), r400 = ratio(400);
  const bool pass = r400 >= 0.95 && r400 <= 1.10 && std::abs(r400 - 1.0) < std::abs(r100 - 1.0);
  return {pass, fmt::format("ratio n=100 {:.5f}, n=400 {:.5f}", r100, r400)};
}

Outcome tilted_mc_vs_saddlepoint() {
  const NoiseModel u = NoiseModel::centered_uniform(1.0);
  const CoefficientSeq c(0, {0.5, 0.5});
  const Index n = 100;
  double lo = 0.01, hi = 0.99;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (prob_e0(u, c, n, mid).prob_approx > 1e-3 ? lo : hi) = mid;
  }
  const double eps = 0.5 * (lo + hi);
  const double approx = prob_e0(u, c, n, eps).prob_approx;
  const WindowSpec spec{n, eps, 0, 0};
  const Estimate a = estimate_p_e0_mc(u, c, spec, 100000, plan(201));
  const Estimate b = estimate_p_e0_mc(u, c, spec, 100000, plan(202));
  const double z = std::abs(a.value - b.value) / std::hypot(a.std_error, b.std_error);
  const double rel = std::abs(a.value - approx) / approx;
  const double rse = std::max(a.std_error / a.value, b.std_error / b.value);
  const bool pass = z < 3.0 && rel < 0.15 && std::abs(b.value - approx) / approx < 0.15 && rse < 0.02;
  return {pass, fmt::format("eps {:.6f}, approx {:.4e}, MC {:.4e} / {:.4e}, seed z {:.2f}, rel dev {:.3f}, rel se {:.4f}",
                            eps, approx, a.value, b.value, z, rel, rse)};
}

Outcome cluster_law_convergence() {
  const NoiseModel g = NoiseModel::gaussian(1.0);
  const CoefficientSeq c(0, {0.5, 0.5});
  const double eps = 0.5;
  const int k = 5;
  const LimitSampler s(g, c, eps);
  const PatternLaw limit = limit_pattern_law(s, k, k, 1000000, plan(301));
  std::vector<double> tv, se;
  std::string detail;
  bool ess_ok = true;
  for (Index n : {50, 100, 200}) {
    const ConditionalLaw law = conditional_law_tilted(g, c, WindowSpec{n, eps, k, k}, 1200000, plan(310 + n), 0);
    ess_ok = ess_ok && law.ess >= 1e5;
    tv.push_back(tv_distance(law.law, limit));
    se.push_back(tv_distance_se(law.law, limit));
    detail += fmt::format("n={} TV {:.4f}+-{:.4f} (ess {:.0f}); ", n, tv.back(), se.back(), law.ess);
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < tv.size(); ++i) decreasing = decreasing && tv[i] <= tv[i - 1] + 2 * std::hypot(se[i], se[i - 1]);
  const bool pass = ess_ok && decreasing && tv.back() < 0.05;
  return {pass, detail + "limit draws 1000000"};
}

Outcome iid_equivalence() {
  const NoiseModel g = NoiseModel::gaussian(1.0);
  const double eps = 0.3;
  const LimitSampler s(g, CoefficientSeq(0, {1.0}), eps);
  const PatternLaw a = limit_pattern_law(s, 5, 5, 1000000, plan(401));
  const PatternLaw b = v_iid_pattern_law(g, eps, 5, 5, 1000000, plan(402));
  const double tv = tv_distance(a, b);
  return {tv < 0.01, fmt::format("TV {:.5f} +- {:.5f}", tv, tv_distance_se(a, b))};
}

Outcome time_change() {
  const NoiseModel u = NoiseModel::centered_uniform(1.0);
  const CoefficientSeq c(-1, {0.25, 0.5, 0.25});
  const LimitSampler s(u, c, 0.3);
  const std::vector<Functional> hs{Functional::constant(1.0), Functional::box(0, 1.0, INFINITY),
                                   Functional::clipped_power(0, 1.0, 3.0)};
  bool pass = true;
  double worst = 0.0;
  std::uint64_t base = 0;
  for (Index j : {1, 2}) {
    for (double t : {0.5, 2.0}) {
      for (const auto& h : hs) {
        ReplicationPlan p = plan(501);
        p.stream_base = (base++) << 40;
        const TimeChangeCheck r = check_time_change(s, h, j, t, 1000000, p);
        worst = std::max(worst, r.z_score);
        pass = pass && r.z_score < 3.0;
      }
    }
  }
  double pareto_err = 0.0;
  for (double alpha : {s.rate(), 0.5, 2.0}) {
    for (double t : {1.0, 2.0, 10.0}) {
      const auto [lhs, rhs] = pareto_time_change_exact(alpha, t);
      pareto_err = std::max({pareto_err, std::abs(lhs - 1.0), std::abs(rhs - 1.0)});
    }
  }
  pass = pass && pareto_err < 1e-12;
  return {pass, fmt::format("12 cases, max z {:.2f}; Pareto max |side - 1| {:.1e}", worst, pareto_err)};
}

Outcome scaling() {
  const NoiseModel g = NoiseModel::gaussian(1.0);
  const std::vector<double> eps{0.4, 0.2, 0.1};
  const auto rows = scaling_study(g, CoefficientSeq(0, {1.0}), eps, 10000, LimitOptions{}, plan(601));
  bool monotone = true;
  std::string detail;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    detail += fmt::format("eps {} ratio {:.4f}+-{:.4f}; ", rows[i].eps, rows[i].ratio, rows[i].se_plus / rows[i].oracle);
    if (i > 0) {
      const double band = 2.0 * std::hypot(rows[i].se_plus, rows[i - 1].se_plus) / rows[i].oracle;
      monotone = monotone && std::abs(rows[i].ratio - 1.0) <= std::abs(rows[i - 1].ratio - 1.0) + band;
    }
  }
  const bool pass = monotone && std::abs(rows.back().ratio - 1.0) < 0.10;
  return {pass, detail + fmt::format("oracle {:.6f}", rows.back().oracle)};
}

Outcome brownian_self_consistency() {
  BrownianFunctionalConfig cfg;
  cfg.dt = 1e-3;
  const double oracle = mean_functional_quadrature(cfg);
  const auto draws = simulate_functional_refined_batch(cfg, 100000, plan(701));
  std::vector<double> coarse, fine;
  coarse.reserve(draws.size());
  fine.reserve(draws.size());
  for (const auto& d : draws) {
    coarse.push_back(d.coarse.plus);
    fine.push_back(d.fine.plus);
  }
  const Estimate ec = mean_ci(coarse), ef = mean_ci(fine);
  const bool pass = std::abs(ec.value - oracle) < 3 * ec.std_error && std::abs(ef.value - ec.value) < 2 * ec.std_error;
  return {pass, fmt::format("quadrature {:.6f}, dt {:.4f}+-{:.4f}, dt/2 {:.4f}", oracle, ec.value, ec.std_error, ef.value)};
}

Outcome analytic_invariants() {
  std::vector<NoiseModel> models{NoiseModel::gaussian(1.3), NoiseModel::centered_uniform(0.7),
                                 NoiseModel::gaussian_mixture({0.3, 0.7}, {-1.0, 0.5}, {0.5, 1.0})};
  double cgf_err = 0.0;
  double worst_z = 0.0;
  std::uint64_t stream = 0;
  for (const auto& m : models) {
    const CgfPoint p = cgf_all(m, 0.0);
    cgf_err = std::max({cgf_err, std::abs(p.value), std::abs(p.d1), std::abs(p.d2 - m.sigma_sq())});
    for (double theta : {-1.0, 0.5, 2.0}) {
      RandomStream r = derive_stream(801, stream++);
      const int n = 100000;
      std::vector<double> x(n);
      for (double& v : x) v = sample_tilted(m, theta, r);
      double mean = 0.0;
      for (double v : x) mean += v;
      mean /= n;
      double m2 = 0.0, m4 = 0.0;
      for (double v : x) {
        const double d = (v - mean) * (v - mean);
        m2 += d;
        m4 += d * d;
      }
      m2 /= n;
      m4 /= n;
      const CgfPoint q = cgf_all(m, theta);
      worst_z = std::max(worst_z, std::abs(mean - q.d1) / std::sqrt(m2 / n));
      worst_z = std::max(worst_z, std::abs(m2 - q.d2) / std::sqrt((m4 - m2 * m2) / n));
    }
  }

  RandomStream cr = derive_stream(802, 0);
  double coef_err = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const Index lo = static_cast<Index>(cr.uniform() * 7) - 3;
    std::vector<double> vals(1 + static_cast<std::size_t>(cr.uniform() * 6));
    for (double& v : vals) v = cr.uniform() - 0.2;
    vals[0] = std::abs(vals[0]) + 1.0;
    const CoefficientSeq c(lo, vals);
    for (Index n = 1; n <= 64; ++n) {
      for (Index j = c.s_n_first(n) - 2; j <= c.s_n_last(n) + 2; ++j) {
        double brute = 0.0;
        for (Index i = 0; i < n; ++i) brute += c[i - j];
        coef_err = std::max(coef_err, std::abs(brute - c.s_n_coefficient(n, j)));
      }
    }
  }

  const NoiseModel g = NoiseModel::gaussian(1.0);
  const CoefficientSeq c(0, {0.75, 0.5});
  const double a2s2 = c.total() * c.total() * g.sigma_sq();
  const LimitSampler s(g, c, 0.05);
  const std::vector<double> grid{1.0};
  std::vector<double> w;
  RandomStream wr = derive_stream(803, 0);
  for (int i = 0; i < 10000; ++i) w.push_back(s.crossing_process(grid, wr).plus[0]);
  const Estimate ew = mean_ci(w);
  double var = 0.0;
  for (double v : w) var += (v - ew.value) * (v - ew.value);
  var /= static_cast<double>(w.size() - 1);
  const double mean_dev = std::abs(ew.value * a2s2 - 1.0);
  const double var_dev = std::abs(var * a2s2 / 2.0 - 1.0);

  const bool pass = cgf_err < 1e-12 && worst_z < 4.0 && coef_err < 1e-12 && mean_dev < 0.05 && var_dev < 0.10;
  return {pass, fmt::format("cgf at 0 err {:.1e}; tilted moments max z {:.2f}; s_n max err {:.1e}; "
                            "W(1) mean dev {:.4f}, var dev {:.4f}",
                            cgf_err, worst_z, coef_err, mean_dev, var_dev)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Outcome reproducibility() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("ldcluster_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  nlohmann::json cfg{{"noise", {{"family", "centered_uniform"}, {"halfwidth", 1.0}}},
                     {"coefficients", {{"window_lo", -1}, {"values", {0.25, 0.5, 0.25}}}},
                     {"n", 40},
                     {"eps", 0.3},
                     {"eps_list", {0.4, 0.3}},
                     {"k_minus", 3},
                     {"k_plus", 3},
                     {"n_samples", 20000},
                     {"dt", 0.01},
                     {"j", 2},
                     {"t", 0.5},
                     {"h", {{"kind", "box"}, {"coord", 0}, {"lower", 1.0}, {"upper", nullptr}}}};
  const fs::path cfg_path = dir / "cfg.json";
  std::ofstream(cfg_path) << cfg.dump();
  std::string detail;
  bool pass = true;
  for (const char* sub : {"prob", "cluster-law", "cluster-size", "scaling", "time-change", "brownian-ref"}) {
    for (const char* format : {"csv", "json"}) {
      std::string outs[2];
      int k = 0;
      for (int workers : {1, 4}) {
        const fs::path out = dir / fmt::format("{}_{}_{}", sub, format, workers);
        const std::string cmd = fmt::format("{} {} --config {} --seed 7 --workers {} --format {} --output {} 2>/dev/null",
                                            LDCLUSTER_CLI, sub, cfg_path.string(), workers, format, out.string());
        const int status = std::system(cmd.c_str());
        if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
          pass = false;
          detail += fmt::format("{} {} exited abnormally; ", sub, format);
        }
        outs[k++] = slurp(out);
      }
      if (outs[0] != outs[1] || outs[0].empty()) {
        pass = false;
        detail += fmt::format("{} {} differs; ", sub, format);
      }
    }
  }
  fs::remove_all(dir);
  return {pass, pass ? "6 subcommands x 2 formats identical at workers 1 and 4" : detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"saddlepoint vs exact gaussian tail", saddlepoint_vs_gaussian_tail},
      {"tilted MC vs saddlepoint", tilted_mc_vs_saddlepoint},
      {"cluster-law convergence", cluster_law_convergence},
      {"iid random-walk equivalence", iid_equivalence},
      {"time-change identity", time_change},
      {"Brownian scaling of cluster size", scaling},
      {"Brownian simulator self-consistency", brownian_self_consistency},
      {"analytic invariants", analytic_invariants},
      {"reproducibility across workers", reproducibility},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += o.pass ? 0 : 1;
    fmt::print("[{}] criterion {}: {} ({}) [{:.1f} s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail,
               secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
