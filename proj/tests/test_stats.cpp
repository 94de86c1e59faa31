#include <doctest.h>

#include <cmath>
#include <random>

#include "causalpsm/error.hpp"
#include "causalpsm/stats.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace causalpsm;

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

TEST_CASE("t distribution anchors") {
  for (double dof : {0.5, 1.0, 4.0, 30.0, 1e4}) CHECK(student_t_cdf(0.0, dof) == 0.5);
  for (double x : {-20.0, -3.0, -1.0, -0.25, 0.5, 1.0, 7.0}) {
    CHECK(std::fabs(student_t_cdf(x, 1.0) - (0.5 + std::atan(x) / kPi)) <= 1e-10);
  }
  CHECK(std::fabs(student_t_cdf(1.0, 1.0) - 0.75) <= 1e-10);
  CHECK(student_t_cdf(-1.2247, 4.0) == doctest::Approx(0.1438).epsilon(1e-3));
  CHECK_THROWS_AS(student_t_cdf(1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(student_t_cdf(1.0, -2.0), InvalidArgument);
}

TEST_CASE("incomplete beta closed forms") {
  for (double x : {0.0, 0.1, 0.5, 0.93, 1.0}) {
    CHECK(regularized_incomplete_beta(x, 1.0, 1.0) == doctest::Approx(x).epsilon(1e-13));
    CHECK(regularized_incomplete_beta(x, 3.0, 1.0) == doctest::Approx(x * x * x).epsilon(1e-13));
  }
  CHECK_THROWS_AS(regularized_incomplete_beta(1.5, 1.0, 1.0), InvalidArgument);
}

TEST_CASE("Welch test on the textbook samples") {
  const auto r = welch_ttest_less({1, 2, 3}, {2, 3, 4}, 0.01);
  const auto o = oracle::welch({1, 2, 3}, {2, 3, 4});
  CHECK(r.t_stat == doctest::Approx(-std::sqrt(1.5)).epsilon(1e-12));
  CHECK(r.t_stat == doctest::Approx(-1.2247).epsilon(1e-4));
  CHECK(r.dof == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(r.dof == doctest::Approx(o.dof).epsilon(1e-12));
  CHECK(std::fabs(r.p_value - oracle::t_cdf(o.t, o.dof)) <= 1e-3);
  CHECK(std::fabs(r.p_value - 0.1438) <= 1e-3);
  CHECK_FALSE(r.reject);
  CHECK(r.n_a == 3);
  CHECK(r.n_b == 3);
}

TEST_CASE("identical samples and degenerate input") {
  const auto r = welch_ttest_less({1, 4, 2, 8}, {1, 4, 2, 8}, 0.01);
  CHECK(r.t_stat == 0.0);
  CHECK(r.p_value == 0.5);
  CHECK_FALSE(r.reject);
  CHECK_THROWS_AS(welch_ttest_less({1}, {1, 2}, 0.01), InvalidArgument);
  CHECK_THROWS_AS(welch_ttest_less({2, 2}, {2, 2, 2}, 0.01), DataError);
  const auto sep = welch_ttest_less({1, 1}, {2, 2}, 0.01);
  CHECK(sep.p_value == 0.0);
  CHECK(sep.reject);
}

TEST_CASE("property: t CDF agrees with numeric integration, is antisymmetric and increasing") {
  gen::Source s(51);
  for (int round = 0; round < 200; ++round) {
    const double dof = s.real(0.5, 60.0);
    const double x = s.real(-6.0, 6.0);
    const double c = student_t_cdf(x, dof);
    CHECK(std::fabs(c - oracle::t_cdf(x, dof)) <= 1e-9);
    CHECK(std::fabs(c + student_t_cdf(-x, dof) - 1.0) <= 1e-10);
    CHECK(student_t_cdf(x + 0.01, dof) > c);
  }
}

TEST_CASE("property: swapping samples mirrors the test, scaling leaves it alone") {
  gen::Source s(52);
  for (int round = 0; round < 100; ++round) {
    std::vector<double> a, b;
    for (int k = s.between(2, 30); k > 0; --k) a.push_back(s.real(-3, 3));
    for (int k = s.between(2, 30); k > 0; --k) b.push_back(s.real(-2, 4));
    const auto ab = welch_ttest_less(a, b, 0.05);
    const auto ba = welch_ttest_less(b, a, 0.05);
    CHECK(ba.t_stat == doctest::Approx(-ab.t_stat).epsilon(1e-12));
    CHECK(std::fabs(ba.p_value - (1.0 - ab.p_value)) <= 1e-10);
    const double c = s.real(0.01, 100.0);
    auto scale = [c](std::vector<double> v) {
      for (auto& x : v) x *= c;
      return v;
    };
    const auto sc = welch_ttest_less(scale(a), scale(b), 0.05);
    CHECK(std::fabs(sc.t_stat - ab.t_stat) <= 1e-10 * std::max(1.0, std::fabs(ab.t_stat)));
    CHECK(std::fabs(sc.dof - ab.dof) <= 1e-10 * ab.dof);
    CHECK(std::fabs(sc.p_value - ab.p_value) <= 1e-10);
  }
}

TEST_CASE("distance samples") {
  const auto p = Partition::from_labels({{"a", 0}, {"b", 0}, {"c", 0}, {"x", 1}, {"y", 1}});
  std::map<std::string, CausalityVector> f;
  for (auto [u, v] : {std::pair{"a", 0.0}, {"b", 1.0}, {"c", 3.0}, {"x", 10.0}, {"y", 20.0}}) {
    f[u] = {u, {v}, {"epsilon"}};
  }
  const auto s = distance_samples(p, f, 5);
  CHECK(s.v_a == std::vector<double>{1.0, 3.0, 2.0, 10.0});
  REQUIRE(s.v_b.size() == 5);
  const std::vector<std::vector<double>> allowed{{10, 20}, {9, 19}, {7, 17}, {10, 9, 7}, {20, 19, 17}};
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(std::find(allowed[k].begin(), allowed[k].end(), s.v_b[k]) != allowed[k].end());
  }
  CHECK(distance_samples(p, f, 5).v_b == s.v_b);

  CHECK_THROWS_AS(distance_samples(Partition::from_labels({{"a", 0}, {"b", 0}}), f, 1), DataError);
  f.erase("y");
  CHECK_THROWS_AS(distance_samples(p, f, 1), InvalidArgument);
}

TEST_CASE("property: tight communities reject at 0.01") {
  int rejected = 0;
  const int seeds = 100;
  for (int seed = 0; seed < seeds; ++seed) {
    std::mt19937_64 eng(static_cast<std::uint64_t>(seed));
    std::normal_distribution<double> noise(0.0, 0.3);
    std::map<std::string, int> labels;
    std::map<std::string, CausalityVector> f;
    for (int c = 0; c < 5; ++c) {
      for (int k = 0; k < 8; ++k) {
        const std::string u = "c" + std::to_string(c) + "u" + std::to_string(k);
        labels[u] = c;
        f[u] = {u, {c + noise(eng), -c + noise(eng)}, {}};
      }
    }
    const auto s = distance_samples(Partition::from_labels(labels), f, static_cast<std::uint64_t>(seed));
    rejected += welch_ttest_less(s.v_a, s.v_b, 0.01).reject;
  }
  CHECK(rejected >= 99);
}
