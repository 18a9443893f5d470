#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ldcluster/errors.hpp"
#include "ldcluster/random.hpp"
#include "ldcluster/stats.hpp"

using namespace ldc;

namespace {

PatternLaw law1(std::initializer_list<std::pair<std::uint64_t, double>> ps) {
  PatternLaw l;
  l.k_minus = 1;
  l.k_plus = 1;
  for (auto [k, p] : ps) l.probability[k] = p;
  return l;
}

}  // namespace

TEST_CASE("weighted_mean_ci examples") {
  const std::vector<double> x{0.0, 1.0};
  const std::vector<double> w{1.0, 1.0};
  Estimate e = weighted_mean_ci(x, w);
  CHECK(e.value == doctest::Approx(0.5));
  CHECK(e.std_error == doctest::Approx(0.3535533906).epsilon(1e-9));
  CHECK(e.ess == doctest::Approx(2.0));
  CHECK(e.n_samples == 2);

  const std::vector<double> one{3.0};
  e = mean_ci(one);
  CHECK(e.value == 3.0);
  CHECK(e.std_error == 0.0);
  CHECK(e.ess == 1.0);

  const std::vector<double> y{1, 2, 3, 4, 10};
  e = mean_ci(y);
  double m = 4.0, ss = 0;
  for (double v : y) ss += (v - m) * (v - m);
  CHECK(e.value == doctest::Approx(m));
  CHECK(e.std_error == doctest::Approx(std::sqrt(ss / 5) / std::sqrt(5.0)));

  CHECK_THROWS_AS(mean_ci(std::vector<double>{}), PreconditionError);
  CHECK_THROWS_AS(weighted_mean_ci(x, std::vector<double>{1.0}), PreconditionError);
  CHECK_THROWS_AS(weighted_mean_ci(x, std::vector<double>{0.0, 0.0}), PreconditionError);
}

TEST_CASE("weighted_mean_ci is invariant under weight rescaling") {
  RandomStream r = derive_stream(8, 8);
  std::vector<double> x(500), w(500), w2(500);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = r.normal();
    w[i] = r.exponential(1.0);
    w2[i] = 37.5 * w[i];
  }
  const Estimate a = weighted_mean_ci(x, w), b = weighted_mean_ci(x, w2);
  CHECK(std::abs(a.value - b.value) < 1e-12);
  CHECK(std::abs(a.std_error - b.std_error) < 1e-12);
  CHECK(std::abs(a.ess - b.ess) < 1e-9);
  CHECK(a.ess <= 500.0);
}

TEST_CASE("streaming accumulator matches the batch estimate") {
  RandomStream r = derive_stream(8, 9);
  std::vector<double> x(1000), w(1000);
  WeightedAccumulator left, right;
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = r.normal();
    w[i] = r.exponential(1.0);
    (i < 400 ? left : right).add(x[i], w[i]);
  }
  left.merge(right);
  const Estimate a = left.estimate(), b = weighted_mean_ci(x, w);
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-12));
  CHECK(a.std_error == doctest::Approx(b.std_error).epsilon(1e-9));
  CHECK(a.ess == doctest::Approx(b.ess).epsilon(1e-12));
  CHECK_THROWS_AS(WeightedAccumulator{}.estimate(), NumericalError);
}

TEST_CASE("tv_distance examples") {
  const PatternLaw a = law1({{0, 0.5}, {3, 0.5}});
  CHECK(tv_distance(a, a) == 0.0);
  CHECK(tv_distance(law1({{0, 1.0}}), law1({{3, 1.0}})) == 1.0);
  CHECK(tv_distance(a, law1({{0, 0.25}, {3, 0.75}})) == doctest::Approx(0.25));
  PatternLaw wide = a;
  wide.k_plus = 2;
  CHECK_THROWS_AS(tv_distance(a, wide), PreconditionError);
  PatternLaw huge;
  huge.k_minus = 13;
  CHECK_THROWS_AS(tv_distance(huge, huge), PreconditionError);
}

TEST_CASE("tv and ks are symmetric metrics on random triples") {
  RandomStream r = derive_stream(1, 2);
  for (int trial = 0; trial < 50; ++trial) {
    PatternLaw l[3];
    for (auto& law : l) {
      law.k_minus = 1;
      law.k_plus = 1;
      double tot = 0;
      double p[4];
      for (double& v : p) tot += (v = r.uniform());
      for (int k = 0; k < 4; ++k) law.probability[static_cast<std::uint64_t>(k)] = p[k] / tot;
    }
    const double ab = tv_distance(l[0], l[1]), ba = tv_distance(l[1], l[0]);
    CHECK(ab == doctest::Approx(ba));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
    CHECK(ab <= tv_distance(l[0], l[2]) + tv_distance(l[2], l[1]) + 1e-15);

    std::vector<double> s[3];
    for (auto& v : s) {
      v.resize(20 + r() % 20);
      for (double& x : v) x = r.normal();
    }
    const double k01 = ks_distance(s[0], s[1]);
    CHECK(k01 == doctest::Approx(ks_distance(s[1], s[0])));
    CHECK(k01 <= ks_distance(s[0], s[2]) + ks_distance(s[2], s[1]) + 1e-15);
  }
}

TEST_CASE("ks_distance examples") {
  const std::vector<double> a{0.3, 1.2, -0.5};
  CHECK(ks_distance(a, a) == 0.0);
  CHECK(ks_distance(std::vector<double>{0.0}, std::vector<double>{1.0}) == 1.0);
  CHECK(ks_distance(std::vector<double>{0.0, 1.0}, std::vector<double>{0.5}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(ks_distance(std::vector<double>{}, a), PreconditionError);
  const std::vector<double> u{0.5};
  CHECK(ks_distance(u, [](double x) { return std::clamp(x, 0.0, 1.0); }) == doctest::Approx(0.5));
}

TEST_CASE("pattern helpers") {
  CHECK(pattern_bit(2, -2) == 0);
  CHECK(pattern_bit(2, -1) == 1);
  CHECK(pattern_bit(2, 1) == 2);
  CHECK(pattern_bit(2, 3) == 4);
  const std::uint64_t p = (1u << pattern_bit(2, -1)) | (1u << pattern_bit(2, 2));
  CHECK(pattern_string(2, 2, p) == "01101");

  PatternLaw l;
  l.k_minus = 2;
  l.k_plus = 2;
  l.probability[p] = 0.4;
  l.probability[0] = 0.6;
  const PatternLaw r = restrict_window(l, 1, 1);
  CHECK(r.probability.at(1u << pattern_bit(1, -1)) == doctest::Approx(0.4));
  CHECK(r.probability.at(0) == doctest::Approx(0.6));
  CHECK_THROWS_AS(restrict_window(l, 3, 1), PreconditionError);
}
