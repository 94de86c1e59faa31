#include <doctest.h>

#include "causalpsm/causality.hpp"
#include "causalpsm/error.hpp"
#include "fixtures.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace causalpsm;

namespace {

const ViralityConfig kTheta2(2);

oracle::Rational exact(std::int64_t n, std::int64_t d) { return oracle::ratio(n, d); }

}  // namespace

TEST_CASE("L1 related users") {
  const auto l1 = fixture::l1();
  CHECK(related_users(l1, kTheta2, "A") == std::set<std::string>{"B", "C"});
  CHECK(related_users(l1, kTheta2, "D").empty());
  CHECK(related_users(l1, kTheta2, "nobody").empty());
}

TEST_CASE("L1 pair probabilities") {
  const auto l1 = fixture::l1();
  const auto ab = pair_probabilities(l1, kTheta2, "A", "B");
  CHECK(ab.precede_count == 1);
  CHECK(ab.either_count == 3);
  CHECK(ab.p_ij() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(ab.p_not_ij() == 1.0);
  const auto ac = pair_probabilities(l1, kTheta2, "A", "C");
  CHECK(ac.p_ij() == 0.5);
  CHECK(ac.p_not_ij() == 0.0);
  CHECK(ac.not_i_count == 1);
  CHECK_THROWS_AS(pair_probabilities(l1, kTheta2, "A", "A"), InvalidArgument);
}

TEST_CASE("L1 epsilon of A is -1/12") {
  const auto s = km_causality(fixture::l1(), kTheta2, "A");
  CHECK(s.epsilon == doctest::Approx(-1.0 / 12.0).epsilon(1e-15));
  CHECK(s.related_count == 2);
  const auto all = score_all(fixture::l1(), kTheta2);
  CHECK(all.size() == 4);
  CHECK(all.at("A").epsilon == s.epsilon);
  CHECK(all.at("D").epsilon == 0.0);
  CHECK(all.at("D").related_count == 0);
}

TEST_CASE("strangers get zero probabilities") {
  const auto log = ActionLog::from_records({{"a", "m", 1}, {"b", "m", 2}, {"x", "n", 1}, {"y", "o", 1}});
  const auto p = pair_probabilities(log, kTheta2, "x", "y");
  CHECK(p.p_ij() == 0.0);
  CHECK(p.p_not_ij() == 0.0);
  const auto q = pair_probabilities(log, kTheta2, "ghost", "phantom");
  CHECK(q.p_ij() == 0.0);
  CHECK(q.p_not_ij() == 0.0);
}

TEST_CASE("without viral messages every score is zero") {
  const auto log = ActionLog::from_records({{"a", "m", 1}});
  for (const auto& [u, s] : score_all(log, kTheta2)) CHECK(s.epsilon == 0.0);
  CHECK(score_all(ActionLog{}, kTheta2).empty());
}

TEST_CASE("a user who always posts first alone scores the mean of its p_ij") {
  const auto log = ActionLog::from_records({{"a", "m1", 1}, {"b", "m1", 2}, {"a", "m2", 1}, {"c", "m2", 2}});
  const auto s = km_causality(log, kTheta2, "a");
  CHECK(s.related_count == 2);
  CHECK(s.epsilon == 0.5);
  CHECK(s.epsilon > 0.0);
}

TEST_CASE("p_not stays a probability when j precedes i") {
  // j leads i in m1, so m1 counts toward j-without-i while i is a key user there.
  const auto log = ActionLog::from_records({{"j", "m1", 1}, {"i", "m1", 2}, {"i", "m2", 1}, {"k", "m2", 2}});
  const auto p = pair_probabilities(log, kTheta2, "i", "j");
  CHECK(p.j_without_i_count == 1);
  CHECK(p.not_i_count == 1);
  CHECK(p.p_not_ij() == 1.0);
}

TEST_CASE("property: exact agreement with the brute-force oracle") {
  gen::Source s(21);
  for (int round = 0; round < 200; ++round) {
    const auto raw = gen::records(s);
    const int theta = s.between(2, 3);
    const auto log = ActionLog::from_records(raw);
    const auto ad = oracle::adoptions(raw);
    const CausalityModel model(log, ViralityConfig(theta));
    for (const auto& i : log.users()) {
      CHECK(model.related_users(i) == oracle::related(ad, theta, i));
      const auto eps = oracle::epsilon(ad, theta, i);
      CHECK(std::fabs(model.score(i).epsilon - eps.value()) <= 1e-12);
      for (const auto& j : log.users()) {
        if (i == j) continue;
        const auto ours = model.pair(i, j);
        const auto want = oracle::pair(ad, theta, i, j);
        CHECK(exact(ours.precede_count, ours.either_count) == want.p);
        CHECK(exact(ours.j_without_i_count, ours.not_i_count) == want.p_not);
        CHECK(ours.p_ij() == doctest::Approx(want.p.value()).epsilon(1e-12));
        CHECK(ours.p_not_ij() == doctest::Approx(want.p_not.value()).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("property: probabilities and scores are bounded") {
  gen::Source s(22);
  for (int round = 0; round < 100; ++round) {
    const auto log = gen::log(s);
    const CausalityModel model(log, ViralityConfig(s.between(2, 4)));
    for (const auto& i : log.users()) {
      const auto sc = model.score(i);
      CHECK(sc.epsilon >= -1.0);
      CHECK(sc.epsilon <= 1.0);
      if (sc.related_count == 0) CHECK(sc.epsilon == 0.0);
      for (const auto& j : log.users()) {
        if (i == j) continue;
        const auto p = model.pair(i, j);
        CHECK(p.p_ij() >= 0.0);
        CHECK(p.p_ij() <= 1.0);
        CHECK(p.p_not_ij() >= 0.0);
        CHECK(p.p_not_ij() <= 1.0);
      }
    }
  }
}

TEST_CASE("property: relabeling and time shifts leave scores unchanged") {
  gen::Source s(23);
  for (int round = 0; round < 100; ++round) {
    const auto raw = gen::records(s);
    const ViralityConfig cfg(s.between(2, 3));
    const Timestamp shift = s.between(1, 1000000);
    std::vector<ActionRecord> renamed;
    std::vector<ActionRecord> shifted;
    for (const auto& r : raw) {
      renamed.push_back({"x" + r.user + "y", "z" + r.message, r.time});
      shifted.push_back({r.user, r.message, r.time + shift});
    }
    const auto base = score_all(ActionLog::from_records(raw), cfg);
    const auto a = score_all(ActionLog::from_records(renamed), cfg);
    const auto b = score_all(ActionLog::from_records(shifted), cfg);
    for (const auto& [u, sc] : base) {
      CHECK(a.at("x" + u + "y").epsilon == sc.epsilon);
      CHECK(b.at(u).epsilon == sc.epsilon);
    }
  }
}

TEST_CASE("property: score_all matches per-user calls") {
  gen::Source s(24);
  for (int round = 0; round < 50; ++round) {
    const auto log = gen::log(s);
    const ViralityConfig cfg(2);
    const auto all = score_all(log, cfg);
    CHECK(all.size() == log.users().size());
    for (const auto& [u, sc] : all) {
      CHECK(sc.user == u);
      CHECK(km_causality(log, cfg, u).epsilon == sc.epsilon);
    }
  }
}
