#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "causalpsm/classify.hpp"
#include "causalpsm/error.hpp"
#include "causalpsm/simulate.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace causalpsm;

namespace {

CausalityVector vec(const std::string& u, std::vector<double> x) { return {u, std::move(x), {}}; }

Prediction pred(const std::string& u, Label l) { return {u, l == Label::psm ? 1.0 : 0.0, l, PredictionSource::supervised}; }

}  // namespace

TEST_CASE("separable data is learned") {
  const auto m = train_logistic({vec("n", {-1.0}), vec("p", {1.0})},
                                {{"n", Label::normal}, {"p", Label::psm}});
  CHECK(predict(m, vec("p", {1.0})).score > 0.5);
  CHECK(predict(m, vec("n", {-1.0})).score < 0.5);
  CHECK(predict(m, vec("p", {1.0})).label == Label::psm);
  CHECK(m.weights.size() == 1);
  CHECK(m.loss_history.front() == doctest::Approx(std::log(2.0)));
}

TEST_CASE("heavy regularization flattens the model") {
  TrainOptions o;
  o.lambda = 1e6;
  const auto m = train_logistic({vec("n", {-1.0}), vec("p", {1.0})},
                                {{"n", Label::normal}, {"p", Label::psm}}, o);
  CHECK(std::fabs(m.weights[0]) < 1e-5);
  CHECK(predict(m, vec("x", {3.0})).score == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("training preconditions") {
  CHECK_THROWS_AS(train_logistic({vec("a", {1.0}), vec("b", {2.0})},
                                 {{"a", Label::psm}, {"b", Label::psm}}),
                  DataError);
  CHECK_THROWS_AS(train_logistic({vec("a", {1.0}), vec("b", {2.0, 1.0})},
                                 {{"a", Label::psm}, {"b", Label::normal}}),
                  InvalidArgument);
}

TEST_CASE("prediction basics") {
  LogisticModel zero;
  zero.weights = {0.0, 0.0};
  const auto p = predict(zero, vec("u", {5.0, -3.0}));
  CHECK(p.score == 0.5);
  CHECK(p.label == Label::psm);
  CHECK(p.source == PredictionSource::supervised);
  LogisticModel steep;
  steep.weights = {1e3};
  CHECK(predict(steep, vec("u", {10.0})).score == 1.0);
  CHECK(predict(steep, vec("u", {-10.0})).score == 0.0);
  CHECK_THROWS_AS(predict(steep, vec("u", {1.0, 2.0})), InvalidArgument);
  CHECK(parse_label("psm") == Label::psm);
  CHECK_THROWS_AS(parse_label("bot"), InvalidArgument);
}

TEST_CASE("property: gradient matches central differences") {
  gen::Source s(61);
  int checked = 0;
  for (int round = 0; round < 100; ++round) {
    const int d = s.between(1, 5);
    const int n = s.between(2, 12);
    std::vector<std::vector<double>> xs(static_cast<std::size_t>(n));
    std::vector<int> ys;
    std::vector<double> sw;
    for (auto& x : xs) {
      for (int k = 0; k < d; ++k) x.push_back(s.real(-2, 2));
      ys.push_back(s.coin() ? 1 : 0);
      sw.push_back(s.coin(0.3) ? s.real(0.2, 3.0) : 1.0);
    }
    const double lambda = s.real(0.0, 0.5);
    LogisticModel m;
    for (int k = 0; k < d; ++k) m.weights.push_back(s.real(-2, 2));
    m.bias = s.real(-1, 1);
    auto as_model = [&](const std::vector<double>& theta) {
      LogisticModel t;
      t.weights.assign(theta.begin(), theta.end() - 1);
      t.bias = theta.back();
      return t;
    };
    auto loss = [&](const std::vector<double>& theta) {
      return logistic_loss(as_model(theta), xs, ys, lambda, sw);
    };
    std::vector<double> theta = m.weights;
    theta.push_back(m.bias);
    const auto g = logistic_gradient(m, xs, ys, lambda, sw);
    REQUIRE(g.size() == theta.size());
    for (std::size_t k = 0; k < theta.size(); ++k) {
      const double fd = oracle::central_difference(loss, theta, k, 1e-5);
      CHECK(std::fabs(g[k] - fd) <= 1e-6 * std::max(1.0, std::fabs(fd)));
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("property: training loss never increases") {
  gen::Source s(62);
  for (int round = 0; round < 30; ++round) {
    std::vector<CausalityVector> f;
    LabelSet labels;
    for (int k = 0; k < 40; ++k) {
      const bool psm = k % 4 == 0;
      const std::string u = "u" + std::to_string(k);
      f.push_back(vec(u, {s.real(-1, 1) + (psm ? 0.7 : 0.0), s.real(-1, 1)}));
      labels[u] = psm ? Label::psm : Label::normal;
    }
    TrainOptions o;
    o.learning_rate = s.real(0.1, 50.0);
    o.balance_classes = s.coin();
    const auto m = train_logistic(f, labels, o);
    for (std::size_t k = 1; k < m.loss_history.size(); ++k) {
      CHECK(m.loss_history[k] <= m.loss_history[k - 1]);
    }
    CHECK(m.final_loss == m.loss_history.back());
  }
}

TEST_CASE("property: labels follow the score threshold") {
  gen::Source s(63);
  for (int round = 0; round < 200; ++round) {
    LogisticModel m;
    m.weights = {s.real(-3, 3), s.real(-3, 3)};
    m.bias = s.real(-1, 1);
    const double threshold = s.real(0.05, 0.95);
    const auto p = predict(m, vec("u", {s.real(-2, 2), s.real(-2, 2)}), threshold);
    CHECK((p.label == Label::psm) == (p.score >= threshold));
  }
}

TEST_CASE("community vote") {
  const auto part = Partition::from_labels(
      {{"u1", 0}, {"u2", 0}, {"u3", 0}, {"v1", 1}, {"v2", 1}, {"v3", 1}, {"w1", 2}, {"w2", 2}});
  const LabelSet labels{{"u1", Label::psm}, {"u2", Label::psm}, {"v1", Label::psm}, {"v2", Label::normal}};
  LogisticModel fallback;
  fallback.weights = {10.0};
  std::map<std::string, CausalityVector> f{{"w1", vec("w1", {1.0})}, {"w2", vec("w2", {-1.0})}};
  const auto out = community_classify(part, labels, f, fallback);
  REQUIRE(out.size() == 8);
  std::map<std::string, Prediction> by;
  for (const auto& p : out) by[p.user] = p;
  CHECK(by["u3"].label == Label::psm);
  CHECK(by["u3"].score == 1.0);
  CHECK(by["u3"].source == PredictionSource::community_vote);
  CHECK(by["v3"].label == Label::psm);
  CHECK(by["v3"].score == 0.5);
  CHECK(by["w1"].source == PredictionSource::fallback);
  CHECK(by["w1"].label == Label::psm);
  CHECK(by["w2"].label == Label::normal);
  CHECK(by["v2"].label == Label::normal);
  CHECK(by["v2"].source == PredictionSource::known);
  CHECK(std::is_sorted(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.user < b.user; }));
  f.erase("w2");
  CHECK_THROWS_AS(community_classify(part, labels, f, fallback), InvalidArgument);
}

TEST_CASE("property: the vote never relabels a labeled user") {
  gen::Source s(64);
  for (int round = 0; round < 100; ++round) {
    std::map<std::string, int> comm;
    LabelSet labels;
    std::map<std::string, CausalityVector> f;
    for (int k = 0; k < 30; ++k) {
      const std::string u = "u" + std::to_string(k);
      comm[u] = s.between(0, 5);
      f[u] = vec(u, {s.real(-1, 1)});
      if (s.coin(0.6)) labels[u] = s.coin(0.3) ? Label::psm : Label::normal;
    }
    LogisticModel m;
    m.weights = {1.0};
    for (const auto& p : community_classify(Partition::from_labels(comm), labels, f, m, s.real(0.1, 0.9))) {
      if (auto it = labels.find(p.user); it != labels.end()) {
        CHECK(p.label == it->second);
        CHECK(p.source == PredictionSource::known);
      }
    }
  }
}

TEST_CASE("evaluation metrics") {
  const LabelSet truth{{"a", Label::psm}, {"b", Label::psm}, {"c", Label::normal}};
  const auto perfect = evaluate({pred("a", Label::psm), pred("b", Label::psm), pred("c", Label::normal)}, truth);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);
  const auto none = evaluate({pred("a", Label::normal), pred("b", Label::normal)}, truth);
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);
  CHECK(none.fn == 2);

  LabelSet t2;
  std::vector<Prediction> ps;
  for (int k = 0; k < 3; ++k) {
    t2["tp" + std::to_string(k)] = Label::psm;
    ps.push_back(pred("tp" + std::to_string(k), Label::psm));
  }
  t2["fp"] = Label::normal;
  ps.push_back(pred("fp", Label::psm));
  for (int k = 0; k < 2; ++k) {
    t2["fn" + std::to_string(k)] = Label::psm;
    ps.push_back(pred("fn" + std::to_string(k), Label::normal));
  }
  const auto r = evaluate(ps, t2);
  CHECK(r.precision == 0.75);
  CHECK(r.recall == 0.6);
  CHECK(r.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  std::reverse(ps.begin(), ps.end());
  CHECK(evaluate(ps, t2).f1 == r.f1);
  CHECK_THROWS_AS(evaluate({pred("zz", Label::psm)}, truth), DataError);
}

TEST_CASE("stratified split") {
  LabelSet truth;
  for (int k = 0; k < 50; ++k) truth["u" + std::to_string(k)] = k < 10 ? Label::psm : Label::normal;
  const auto [train, test] = stratified_split(truth, 0.7, 3);
  CHECK(train.size() == 35);
  CHECK(test.size() == 15);
  int psm_train = 0;
  for (const auto& u : train) psm_train += truth.at(u) == Label::psm;
  CHECK(psm_train == 7);
  CHECK(stratified_split(truth, 0.7, 3) == std::pair{train, test});
  std::vector<std::string> both = train;
  both.insert(both.end(), test.begin(), test.end());
  std::sort(both.begin(), both.end());
  CHECK(std::adjacent_find(both.begin(), both.end()) == both.end());
  CHECK(both.size() == truth.size());
  CHECK_THROWS_AS(stratified_split(truth, 1.0, 3), InvalidArgument);
}

namespace {

SimConfig small_config(std::uint64_t seed) {
  SimConfig c = SimConfig::biased();
  c.n_users = 80;
  c.n_messages = 200;
  c.psm_clique_size = 4;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("a window spanning the whole log equals the unwindowed run") {
  const auto sim = generate(small_config(3));
  EarlyDetectionOptions o;
  o.seed = 3;
  for (auto pipeline : {Pipeline::supervised, Pipeline::community}) {
    const auto whole = early_detection_run(sim.log, sim.truth, ViralityConfig(5), std::nullopt, pipeline, o);
    const auto wide = early_detection_run(sim.log, sim.truth, ViralityConfig(5), 400, pipeline, o);
    CHECK(whole.tp == wide.tp);
    CHECK(whole.fp == wide.fp);
    CHECK(whole.fn == wide.fn);
    CHECK(whole.tn == wide.tn);
  }
}

TEST_CASE("early detection preconditions") {
  const auto sim = generate(small_config(4));
  LabelSet ghosts{{"ghost", Label::psm}, {sim.log.users().front(), Label::normal}};
  CHECK_THROWS_AS(early_detection(sim.log, ghosts, ViralityConfig(5), Pipeline::supervised), DataError);
  CHECK_THROWS_AS(early_detection_run(sim.log, sim.truth, ViralityConfig(5), 0, Pipeline::supervised),
                  InvalidArgument);
  CHECK_THROWS_AS(early_detection(ActionLog{}, sim.truth, ViralityConfig(5), Pipeline::supervised), DataError);
}

TEST_CASE("early detection is deterministic") {
  const auto sim = generate(small_config(5));
  EarlyDetectionOptions o;
  o.seed = 5;
  const auto a = early_detection(sim.log, sim.truth, ViralityConfig(5), Pipeline::community, o);
  const auto b = early_detection(sim.log, sim.truth, ViralityConfig(5), Pipeline::community, o);
  CHECK(a.report.f1 == b.report.f1);
  CHECK(a.partition->assignment == b.partition->assignment);
  CHECK(a.report.window == "first_action..first_action+10d");
}

TEST_CASE("10-day early detection replays from an independent slice of the log") {
  const auto sim = generate(small_config(7));
  const int theta = 5;
  EarlyDetectionOptions o;
  o.seed = 7;
  o.sigmas = {0.0, 1e-5};
  const auto r = early_detection(sim.log, sim.truth, ViralityConfig(theta), Pipeline::community, o);

  const auto& recs = sim.log.records();
  const Timestamp log_end = *sim.log.max_time() + 1;
  std::map<std::string, Timestamp> first;
  for (const auto& rec : recs) first.try_emplace(rec.user, rec.time);

  std::map<std::string, std::pair<Timestamp, Timestamp>> frame;
  std::map<std::string, CausalityVector> feats;
  for (const auto& [u, t] : first) {
    const Timestamp end = std::min<Timestamp>(t + 10 * 86400 + 1, log_end);
    frame[u] = {t, end};
    const auto sub = oracle::slice(recs, t, end);
    const Timestamp delta = std::min<Timestamp>(86400, end - t);
    std::vector<double> x{oracle::epsilon(oracle::adoptions(sub), theta, u).value()};
    for (double sigma : o.sigmas) x.push_back(oracle::xi(recs, theta, t, end, delta, sigma, u));
    feats[u] = {u, x, {}};
  }
  const std::size_t d = feats.begin()->second.x.size();
  for (std::size_t k = 0; k < d; ++k) {
    double mean = 0, var = 0;
    for (const auto& [u, v] : feats) mean += v.x[k];
    mean /= static_cast<double>(feats.size());
    for (const auto& [u, v] : feats) var += (v.x[k] - mean) * (v.x[k] - mean);
    const double sd = std::sqrt(var / static_cast<double>(feats.size()));
    for (auto& [u, v] : feats) v.x[k] = sd > 0 ? (v.x[k] - mean) / sd : 0.0;
  }
  for (const auto& [u, v] : feats) {
    for (std::size_t k = 0; k < d; ++k) CHECK(std::fabs(r.features.at(u).x[k] - v.x[k]) <= 1e-9);
  }

  std::map<std::string, std::map<std::string, Timestamp>> posts;
  for (const auto& rec : recs) {
    const auto [b, e] = frame.at(rec.user);
    if (b <= rec.time && rec.time < e) posts[rec.message][rec.user] = rec.time;
  }
  UserGraph g;
  for (const auto& [u, t] : first) g.add_node(u);
  for (const auto& [m, who] : posts) {
    for (auto a = who.begin(); a != who.end(); ++a) {
      for (auto b = std::next(a); b != who.end(); ++b) {
        if (a->second == b->second) continue;
        const auto& xa = feats.at(a->first).x;
        const auto& xb = feats.at(b->first).x;
        double dist = 0;
        for (std::size_t k = 0; k < d; ++k) dist += (xa[k] - xb[k]) * (xa[k] - xb[k]);
        g.add_edge(a->first, b->first, 1.0 / (1.0 + std::sqrt(dist)));
      }
    }
  }
  const auto part = louvain(g, 7);
  std::vector<CausalityVector> train;
  for (const auto& [u, l] : r.train_labels) train.push_back(feats.at(u));
  TrainOptions to;
  to.balance_classes = true;
  const auto model = train_logistic(train, r.train_labels, to);
  std::vector<Prediction> test_preds;
  for (const auto& p : community_classify(part, r.train_labels, feats, model)) {
    if (std::binary_search(r.test_users.begin(), r.test_users.end(), p.user)) test_preds.push_back(p);
  }
  LabelSet test_truth;
  for (const auto& u : r.test_users) test_truth[u] = sim.truth.at(u);
  const auto replay = evaluate(test_preds, test_truth);
  CHECK(replay.tp == r.report.tp);
  CHECK(replay.fp == r.report.fp);
  CHECK(replay.fn == r.report.fn);
  CHECK(replay.tn == r.report.tn);
  CHECK(replay.f1 == r.report.f1);
}
