#include <algorithm>
#include <cmath>

#include "causalpsm/classify.hpp"
#include "causalpsm/error.hpp"
#include "causalpsm/random.hpp"

namespace causalpsm {

namespace {

constexpr Timestamp kSecondsPerDay = 86400;

std::string describe(const EarlyDetectionOptions& o) {
  if (!o.window_days) return "whole log";
  const std::string days = std::to_string(*o.window_days) + "d";
  return o.symmetric_window ? "first_action-" + days + "..first_action+" + days
                            : "first_action..first_action+" + days;
}

}  // namespace

TimeInterval early_window(Timestamp first_action, const EarlyDetectionOptions& options) {
  if (!options.window_days) throw InvalidArgument("early_window needs window_days");
  if (*options.window_days < 1) throw InvalidArgument("window_days must be >= 1");
  const Timestamp span = static_cast<Timestamp>(*options.window_days) * kSecondsPerDay;
  const Timestamp begin = options.symmetric_window ? std::max<Timestamp>(0, first_action - span)
                                                   : first_action;
  return {begin, first_action + span + 1};
}

namespace {

// The frame a user's features see, clipped to the log's extent so that a
// window wider than the log reduces to the unwindowed run.
TimeInterval user_frame(Timestamp first_action, Timestamp log_end,
                        const EarlyDetectionOptions& options) {
  if (!options.window_days) return {first_action, log_end};
  auto w = early_window(first_action, options);
  w.end = std::min(w.end, log_end);
  return w;
}

CausalityVector features_in_frame(const ActionLog& log, const ViralityConfig& cfg,
                                  const std::string& user, TimeInterval frame,
                                  const EarlyDetectionOptions& options) {
  const ActionLog sub = restrict(log, frame);
  WindowSpec spec{frame.begin, frame.end, std::min(options.delta, frame.end - frame.begin)};
  return feature_vector(sub, cfg, spec, options.sigmas, user);
}

}  // namespace

CausalityVector early_features(const ActionLog& log, const ViralityConfig& cfg,
                               const std::string& user, const EarlyDetectionOptions& options) {
  const auto first = log.first_action_times();
  auto it = first.find(user);
  if (it == first.end()) throw InvalidArgument("user '" + user + "' has no actions");
  return features_in_frame(log, cfg, user, user_frame(it->second, *log.max_time() + 1, options),
                           options);
}

std::pair<std::vector<std::string>, std::vector<std::string>> stratified_split(
    const LabelSet& truth, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidArgument("train fraction must lie in (0, 1)");
  }
  std::vector<std::string> by_class[2];
  for (const auto& [user, label] : truth) by_class[label == Label::psm ? 1 : 0].push_back(user);
  Rng rng(seed);
  std::vector<std::string> train;
  std::vector<std::string> test;
  for (auto& group : by_class) {
    rng.shuffle(group);
    const auto n_train = static_cast<std::size_t>(
        std::lround(train_fraction * static_cast<double>(group.size())));
    for (std::size_t k = 0; k < group.size(); ++k) (k < n_train ? train : test).push_back(group[k]);
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {train, test};
}

namespace {

std::map<std::string, TimeInterval> user_frames(const ActionLog& log,
                                                const EarlyDetectionOptions& options) {
  const Timestamp log_end = *log.max_time() + 1;
  std::map<std::string, TimeInterval> frames;
  for (const auto& [user, t] : log.first_action_times()) {
    frames.emplace(user, user_frame(t, log_end, options));
  }
  return frames;
}

void check_window(const EarlyDetectionOptions& options) {
  if (options.window_days && *options.window_days < 1) {
    throw InvalidArgument("window_days must be >= 1");
  }
}

}  // namespace

ClassifyResult classify_users(const ActionLog& log, const LabelSet& labels,
                              const ViralityConfig& cfg, Pipeline pipeline,
                              const EarlyDetectionOptions& options) {
  check_window(options);
  if (log.empty()) throw DataError("cannot classify users of an empty log");
  const auto frames = user_frames(log, options);

  ClassifyResult result;
  for (const auto& [user, frame] : frames) {
    result.features.emplace(user, features_in_frame(log, cfg, user, frame, options));
  }
  if (options.standardize_features) standardize(result.features);

  LabelSet known;
  std::vector<CausalityVector> train_features;
  for (const auto& [user, label] : labels) {
    auto it = result.features.find(user);
    if (it == result.features.end()) continue;
    known.emplace(user, label);
    train_features.push_back(it->second);
  }
  result.model = train_logistic(train_features, known, options.train);

  if (pipeline == Pipeline::supervised) {
    for (const auto& [user, x] : result.features) {
      if (auto it = known.find(user); it != known.end()) {
        result.predictions.push_back({user, it->second == Label::psm ? 1.0 : 0.0, it->second,
                                      PredictionSource::known});
      } else {
        result.predictions.push_back(predict(result.model, x));
      }
    }
    return result;
  }

  // Each user contributes only the records inside its own frame.
  const ActionLog early = filter_records(
      log, [&](const ActionRecord& r) { return frames.at(r.user).contains(r.time); });
  UserGraph g = coposting_graph(early);
  if (options.causal_weights) g = causal_weighted_graph(g, result.features);
  result.partition = louvain(g, options.seed, options.resolution);
  result.graph = std::move(g);
  result.predictions = community_classify(*result.partition, known, result.features,
                                          result.model, options.vote_threshold);
  return result;
}

EarlyDetectionResult early_detection(const ActionLog& log, const LabelSet& truth,
                                     const ViralityConfig& cfg, Pipeline pipeline,
                                     const EarlyDetectionOptions& options) {
  check_window(options);
  if (log.empty()) throw DataError("early detection on an empty log");
  const auto first = log.first_action_times();

  // Only labeled users with at least one action in the log take part.
  LabelSet present;
  for (const auto& [user, label] : truth) {
    if (first.contains(user)) present.emplace(user, label);
  }
  const bool has_psm = std::any_of(present.begin(), present.end(),
                                   [](const auto& kv) { return kv.second == Label::psm; });
  if (!has_psm) throw DataError("the early window leaves no psm users to detect");

  EarlyDetectionResult result;
  auto [train, test] = stratified_split(present, options.train_fraction, options.seed);
  for (const auto& u : train) result.train_labels.emplace(u, present.at(u));
  result.test_users = test;

  auto run = classify_users(log, result.train_labels, cfg, pipeline, options);
  for (auto& p : run.predictions) {
    if (std::binary_search(test.begin(), test.end(), p.user)) result.predictions.push_back(p);
  }
  result.features = std::move(run.features);
  result.model = std::move(run.model);
  result.graph = std::move(run.graph);
  result.partition = std::move(run.partition);

  LabelSet test_truth;
  for (const auto& u : test) test_truth.emplace(u, present.at(u));
  result.report = evaluate(result.predictions, test_truth);
  result.report.window = describe(options);
  return result;
}

EvalReport early_detection_run(const ActionLog& log, const LabelSet& truth,
                               const ViralityConfig& cfg, std::optional<int> window_days,
                               Pipeline pipeline, const EarlyDetectionOptions& options) {
  EarlyDetectionOptions o = options;
  o.window_days = window_days;
  return early_detection(log, truth, cfg, pipeline, o).report;
}

}  // namespace causalpsm
