#include "causalpsm/decay.hpp"

#include <cmath>
#include <cstdio>

#include "causalpsm/causality.hpp"
#include "causalpsm/error.hpp"

namespace causalpsm {

namespace {

double weighted_mean(const std::vector<double>& scores, const std::vector<Window>& ws,
                     Timestamp t, const DecayConfig& decay) {
  double sum = 0.0;
  for (std::size_t k = 0; k < ws.size(); ++k) {
    sum += decay_weight(decay, t, ws[k].end) * scores[k];
  }
  return sum / static_cast<double>(ws.size());
}

void validate_sigmas(const std::vector<double>& sigmas) {
  if (sigmas.empty()) throw InvalidArgument("feature_vector needs at least one sigma");
  for (double s : sigmas) DecayConfig{s}.validate();
}

}  // namespace

void WindowSpec::validate() const {
  if (t0 >= t) {
    throw InvalidArgument("window spec needs t0 < t (t0=" + std::to_string(t0) +
                          ", t=" + std::to_string(t) + ")");
  }
  if (delta <= 0) throw InvalidArgument("window length delta must be > 0");
  if (delta > t - t0) throw InvalidArgument("window length delta exceeds t - t0");
}

void DecayConfig::validate() const {
  if (!std::isfinite(sigma) || sigma < 0.0) {
    throw InvalidArgument("sigma must be finite and >= 0");
  }
}

std::vector<Window> windows(const WindowSpec& spec) {
  spec.validate();
  std::vector<Window> out;
  for (Timestamp end = spec.t0 + spec.delta; end <= spec.t; end += spec.delta) {
    out.push_back({end, {end - spec.delta, end}});
  }
  return out;
}

double decay_weight(const DecayConfig& cfg, Timestamp t, Timestamp t_prime) {
  cfg.validate();
  if (t_prime > t) throw InvalidArgument("decay_weight requires t' <= t");
  return std::exp(-cfg.sigma * static_cast<double>(t - t_prime));
}

std::vector<double> window_scores(const ActionLog& log, const ViralityConfig& cfg,
                                  const WindowSpec& spec, const std::string& user) {
  std::vector<double> scores;
  for (const auto& w : windows(spec)) {
    scores.push_back(CausalityModel(restrict(log, w.interval), cfg).score(user).epsilon);
  }
  return scores;
}

double decayed_causality(const ActionLog& log, const ViralityConfig& cfg, const WindowSpec& spec,
                         const DecayConfig& decay, const std::string& user) {
  decay.validate();
  return weighted_mean(window_scores(log, cfg, spec, user), windows(spec), spec.t, decay);
}

std::vector<std::string> feature_names(const std::vector<double>& sigmas) {
  std::vector<std::string> names{"epsilon"};
  for (double s : sigmas) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "xi_sigma=%g", s);
    names.emplace_back(buf);
  }
  return names;
}

std::vector<double> default_sigmas() { return {0.001, 0.01, 0.1}; }

CausalityVector feature_vector(const ActionLog& log, const ViralityConfig& cfg,
                               const WindowSpec& spec, const std::vector<double>& sigmas,
                               const std::string& user) {
  validate_sigmas(sigmas);
  const auto ws = windows(spec);
  const auto scores = window_scores(log, cfg, spec, user);
  CausalityVector v;
  v.user = user;
  v.feature_names = feature_names(sigmas);
  v.x.push_back(CausalityModel(restrict(log, {spec.t0, spec.t}), cfg).score(user).epsilon);
  for (double s : sigmas) v.x.push_back(weighted_mean(scores, ws, spec.t, DecayConfig{s}));
  return v;
}

std::map<std::string, CausalityVector> feature_vectors(const ActionLog& log,
                                                       const ViralityConfig& cfg,
                                                       const WindowSpec& spec,
                                                       const std::vector<double>& sigmas) {
  validate_sigmas(sigmas);
  const auto ws = windows(spec);
  const auto users = log.users();
  const auto names = feature_names(sigmas);

  std::vector<CausalityModel> models;
  models.reserve(ws.size());
  for (const auto& w : ws) models.emplace_back(restrict(log, w.interval), cfg);
  const CausalityModel whole(restrict(log, {spec.t0, spec.t}), cfg);

  std::map<std::string, CausalityVector> out;
  std::vector<double> scores(ws.size());
  for (const auto& u : users) {
    for (std::size_t k = 0; k < ws.size(); ++k) scores[k] = models[k].score(u).epsilon;
    CausalityVector v;
    v.user = u;
    v.feature_names = names;
    v.x.push_back(whole.score(u).epsilon);
    for (double s : sigmas) v.x.push_back(weighted_mean(scores, ws, spec.t, DecayConfig{s}));
    out.emplace(u, std::move(v));
  }
  return out;
}

void standardize(std::map<std::string, CausalityVector>& features) {
  if (features.empty()) return;
  const std::size_t d = features.begin()->second.x.size();
  for (const auto& [user, v] : features) {
    if (v.x.size() != d) throw InvalidArgument("feature vector of '" + user + "' has the wrong dimension");
  }
  const auto n = static_cast<double>(features.size());
  for (std::size_t k = 0; k < d; ++k) {
    double mean = 0.0;
    for (const auto& [_, v] : features) mean += v.x[k];
    mean /= n;
    double var = 0.0;
    for (const auto& [_, v] : features) var += (v.x[k] - mean) * (v.x[k] - mean);
    const double sd = std::sqrt(var / n);
    for (auto& [_, v] : features) v.x[k] = sd > 0.0 ? (v.x[k] - mean) / sd : 0.0;
  }
}

}  // namespace causalpsm
