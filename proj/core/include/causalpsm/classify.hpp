#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "causalpsm/action_log.hpp"
#include "causalpsm/community.hpp"
#include "causalpsm/decay.hpp"

namespace causalpsm {

enum class Label { normal, psm };

/// Ground-truth or training labels; may cover a subset of users.
using LabelSet = std::map<std::string, Label>;

std::string to_string(Label label);
/// Accepts "psm" and "normal". Throws InvalidArgument otherwise.
Label parse_label(const std::string& text);

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;
  double lambda = 0.0;
  int iterations = 0;
  double final_loss = 0.0;
  /// Loss after each accepted step, starting with the zero model.
  std::vector<double> loss_history;
};

struct TrainOptions {
  double lambda = 1e-3;
  double learning_rate = 1.0;
  int max_iterations = 2000;
  /// Weight each class by n / (2 * n_class), so the minority class counts as
  /// much as the majority.
  bool balance_classes = false;
  double tolerance = 1e-10;
};

/// Objective: mean (optionally class-weighted) log-loss plus
/// lambda/2 * ||w||^2; the bias is not regularized.
double logistic_loss(const LogisticModel& model, const std::vector<std::vector<double>>& xs,
                     const std::vector<int>& ys, double lambda,
                     const std::vector<double>& sample_weights = {});

/// Gradient of logistic_loss; entries [0, d) are the weights, entry d the bias.
std::vector<double> logistic_gradient(const LogisticModel& model,
                                      const std::vector<std::vector<double>>& xs,
                                      const std::vector<int>& ys, double lambda,
                                      const std::vector<double>& sample_weights = {});

/// Full-batch gradient descent from the zero model. A step that would raise
/// the loss is retried at half the step size, so the loss never increases.
/// Only users present in `labels` are used. Throws DataError if a class is
/// missing and InvalidArgument on mixed dimensions.
LogisticModel train_logistic(const std::vector<CausalityVector>& features, const LabelSet& labels,
                             const TrainOptions& options = {});

enum class PredictionSource { supervised, community_vote, fallback, known };

std::string to_string(PredictionSource source);
PredictionSource parse_prediction_source(const std::string& text);

struct Prediction {
  std::string user;
  double score = 0.0;
  Label label = Label::normal;
  PredictionSource source = PredictionSource::supervised;
};

inline constexpr double kDecisionThreshold = 0.5;

/// sigmoid(w.x + b); psm iff score >= threshold. Throws InvalidArgument on a
/// dimension mismatch.
Prediction predict(const LogisticModel& model, const CausalityVector& x,
                   double threshold = kDecisionThreshold);

/// Labels every user of the partition. Labeled users keep their label
/// (source known). An unlabeled user whose community has labeled members
/// takes the psm share of those members as its score and is psm iff the
/// share reaches `vote_threshold`; otherwise the fallback model decides.
/// Results are ordered by user id. Throws InvalidArgument if a user needs the
/// fallback but has no feature vector.
std::vector<Prediction> community_classify(const Partition& partition, const LabelSet& labels,
                                           const std::map<std::string, CausalityVector>& features,
                                           const LogisticModel& fallback,
                                           double vote_threshold = 0.5);

struct EvalReport {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::string window;
};

/// psm is the positive class. Throws DataError if a predicted user has no
/// truth label.
EvalReport evaluate(const std::vector<Prediction>& predictions, const LabelSet& truth);

enum class Pipeline { supervised, community };

std::string to_string(Pipeline pipeline);
Pipeline parse_pipeline(const std::string& text);

struct EarlyDetectionOptions {
  /// Days after each user's first action visible to that user's features.
  /// Unset means the whole log.
  std::optional<int> window_days = 10;
  /// Also look window_days back from the first action.
  bool symmetric_window = false;
  Timestamp delta = kDefaultDelta;
  std::vector<double> sigmas = default_sigmas();
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
  TrainOptions train{.balance_classes = true};
  double resolution = 1.0;
  double vote_threshold = 0.5;
  /// Reweight co-posting edges by causal similarity before Louvain.
  bool causal_weights = true;
  /// z-score every feature dimension across users before training and
  /// reweighting.
  bool standardize_features = true;
};

struct ClassifyResult {
  /// Per-user features, standardized when the options ask for it.
  std::map<std::string, CausalityVector> features;
  LogisticModel model;
  std::optional<UserGraph> graph;      // community pipeline only
  std::optional<Partition> partition;  // community pipeline only
  /// One prediction per user in the log, ordered by user. Labeled users
  /// pass through with source `known`.
  std::vector<Prediction> predictions;
};

struct EarlyDetectionResult {
  EvalReport report;
  std::vector<Prediction> predictions;  // test users only
  std::map<std::string, CausalityVector> features;
  LabelSet train_labels;
  std::vector<std::string> test_users;
  std::optional<UserGraph> graph;      // community pipeline only
  std::optional<Partition> partition;  // community pipeline only
  LogisticModel model;
};

/// Per-user time frame [first action, first action + window], in seconds.
TimeInterval early_window(Timestamp first_action, const EarlyDetectionOptions& options);

/// Features of one user computed from the records inside that user's early
/// window. Windows shorter than delta fall back to a single window.
CausalityVector early_features(const ActionLog& log, const ViralityConfig& cfg,
                               const std::string& user, const EarlyDetectionOptions& options);

/// Seeded per-class shuffle; the first round(train_fraction * n_class) users of
/// each class train. Returns (train, test), each sorted.
std::pair<std::vector<std::string>, std::vector<std::string>> stratified_split(
    const LabelSet& truth, double train_fraction, std::uint64_t seed);

/// Trains on the labeled users of the log and labels everyone else with the
/// chosen pipeline. Labels of users absent from the log are ignored. Throws
/// DataError if the labeled users present do not cover both classes.
ClassifyResult classify_users(const ActionLog& log, const LabelSet& labels,
                              const ViralityConfig& cfg, Pipeline pipeline,
                              const EarlyDetectionOptions& options = {});

/// Early-detection protocol on one log: windowed features, per-user split,
/// then the chosen pipeline, evaluated on the held-out users.
EarlyDetectionResult early_detection(const ActionLog& log, const LabelSet& truth,
                                     const ViralityConfig& cfg, Pipeline pipeline,
                                     const EarlyDetectionOptions& options = {});

EvalReport early_detection_run(const ActionLog& log, const LabelSet& truth,
                               const ViralityConfig& cfg, std::optional<int> window_days,
                               Pipeline pipeline, const EarlyDetectionOptions& options = {});

}  // namespace causalpsm
