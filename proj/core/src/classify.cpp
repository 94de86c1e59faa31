#include "causalpsm/classify.hpp"

#include <cmath>

#include "causalpsm/error.hpp"

namespace causalpsm {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double linear(const LogisticModel& m, const std::vector<double>& x) {
  double z = m.bias;
  for (std::size_t k = 0; k < x.size(); ++k) z += m.weights[k] * x[k];
  return z;
}

void check_shapes(const LogisticModel& model, const std::vector<std::vector<double>>& xs,
                  const std::vector<int>& ys, const std::vector<double>& sw) {
  if (xs.size() != ys.size()) throw InvalidArgument("feature and label counts differ");
  if (!sw.empty() && sw.size() != xs.size()) throw InvalidArgument("sample weight count differs");
  for (const auto& x : xs) {
    if (x.size() != model.weights.size()) throw InvalidArgument("feature dimension mismatch");
  }
}

}  // namespace

std::string to_string(Label label) { return label == Label::psm ? "psm" : "normal"; }

Label parse_label(const std::string& text) {
  if (text == "psm") return Label::psm;
  if (text == "normal") return Label::normal;
  throw InvalidArgument("unknown label '" + text + "' (expected psm or normal)");
}

std::string to_string(PredictionSource source) {
  switch (source) {
    case PredictionSource::supervised: return "supervised";
    case PredictionSource::community_vote: return "community_vote";
    case PredictionSource::fallback: return "fallback";
    case PredictionSource::known: return "known";
  }
  return "unknown";
}

PredictionSource parse_prediction_source(const std::string& text) {
  if (text == "supervised") return PredictionSource::supervised;
  if (text == "community_vote") return PredictionSource::community_vote;
  if (text == "fallback") return PredictionSource::fallback;
  if (text == "known") return PredictionSource::known;
  throw InvalidArgument("unknown prediction source '" + text + "'");
}

std::string to_string(Pipeline pipeline) {
  return pipeline == Pipeline::community ? "community" : "supervised";
}

Pipeline parse_pipeline(const std::string& text) {
  if (text == "community") return Pipeline::community;
  if (text == "supervised") return Pipeline::supervised;
  throw InvalidArgument("unknown pipeline '" + text + "' (expected supervised or community)");
}

double logistic_loss(const LogisticModel& model, const std::vector<std::vector<double>>& xs,
                     const std::vector<int>& ys, double lambda,
                     const std::vector<double>& sample_weights) {
  check_shapes(model, xs, ys, sample_weights);
  double loss = 0.0;
  double total = 0.0;
  for (std::size_t n = 0; n < xs.size(); ++n) {
    const double w = sample_weights.empty() ? 1.0 : sample_weights[n];
    const double z = linear(model, xs[n]);
    // -[y log s(z) + (1-y) log(1-s(z))] = softplus(z) - y z
    loss += w * (softplus(z) - ys[n] * z);
    total += w;
  }
  double reg = 0.0;
  for (double v : model.weights) reg += v * v;
  return loss / total + 0.5 * lambda * reg;
}

std::vector<double> logistic_gradient(const LogisticModel& model,
                                      const std::vector<std::vector<double>>& xs,
                                      const std::vector<int>& ys, double lambda,
                                      const std::vector<double>& sample_weights) {
  check_shapes(model, xs, ys, sample_weights);
  const std::size_t d = model.weights.size();
  std::vector<double> g(d + 1, 0.0);
  double total = 0.0;
  for (std::size_t n = 0; n < xs.size(); ++n) {
    const double w = sample_weights.empty() ? 1.0 : sample_weights[n];
    const double r = w * (sigmoid(linear(model, xs[n])) - ys[n]);
    for (std::size_t k = 0; k < d; ++k) g[k] += r * xs[n][k];
    g[d] += r;
    total += w;
  }
  for (std::size_t k = 0; k < d; ++k) g[k] = g[k] / total + lambda * model.weights[k];
  g[d] /= total;
  return g;
}

LogisticModel train_logistic(const std::vector<CausalityVector>& features, const LabelSet& labels,
                             const TrainOptions& options) {
  if (options.lambda < 0.0) throw InvalidArgument("lambda must be >= 0");
  if (!(options.learning_rate > 0.0)) throw InvalidArgument("learning rate must be > 0");

  std::vector<std::vector<double>> xs;
  std::vector<int> ys;
  std::size_t dim = 0;
  for (const auto& f : features) {
    auto it = labels.find(f.user);
    if (it == labels.end()) continue;
    if (xs.empty()) dim = f.x.size();
    if (f.x.size() != dim) throw InvalidArgument("training features have mixed dimensions");
    xs.push_back(f.x);
    ys.push_back(it->second == Label::psm ? 1 : 0);
  }
  std::size_t positives = 0;
  for (int y : ys) positives += static_cast<std::size_t>(y);
  if (positives == 0 || positives == ys.size()) {
    throw DataError("training set needs at least one psm and one normal example");
  }

  std::vector<double> sw;
  if (options.balance_classes) {
    const double n = static_cast<double>(ys.size());
    const double wp = n / (2.0 * static_cast<double>(positives));
    const double wn = n / (2.0 * static_cast<double>(ys.size() - positives));
    for (int y : ys) sw.push_back(y ? wp : wn);
  }

  LogisticModel model;
  model.lambda = options.lambda;
  model.weights.assign(dim, 0.0);
  double loss = logistic_loss(model, xs, ys, options.lambda, sw);
  model.loss_history.push_back(loss);
  double step = options.learning_rate;
  for (int it = 0; it < options.max_iterations; ++it) {
    const auto g = logistic_gradient(model, xs, ys, options.lambda, sw);
    double norm2 = 0.0;
    for (double v : g) norm2 += v * v;
    if (std::sqrt(norm2) < options.tolerance) break;

    LogisticModel next = model;
    double next_loss = loss;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings) {
      for (std::size_t k = 0; k < dim; ++k) next.weights[k] = model.weights[k] - step * g[k];
      next.bias = model.bias - step * g[dim];
      next_loss = logistic_loss(next, xs, ys, options.lambda, sw);
      if (next_loss <= loss) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    model.weights = std::move(next.weights);
    model.bias = next.bias;
    model.iterations = it + 1;
    model.loss_history.push_back(next_loss);
    const double change = loss - next_loss;
    loss = next_loss;
    if (change < options.tolerance * options.tolerance) break;
  }
  model.final_loss = loss;
  return model;
}

Prediction predict(const LogisticModel& model, const CausalityVector& x, double threshold) {
  if (x.x.size() != model.weights.size()) {
    throw InvalidArgument("feature dimension mismatch for '" + x.user + "'");
  }
  Prediction p;
  p.user = x.user;
  p.score = sigmoid(linear(model, x.x));
  p.label = p.score >= threshold ? Label::psm : Label::normal;
  p.source = PredictionSource::supervised;
  return p;
}

std::vector<Prediction> community_classify(const Partition& partition, const LabelSet& labels,
                                           const std::map<std::string, CausalityVector>& features,
                                           const LogisticModel& fallback, double vote_threshold) {
  std::vector<int> psm(static_cast<std::size_t>(partition.community_count), 0);
  std::vector<int> labeled(static_cast<std::size_t>(partition.community_count), 0);
  for (const auto& [user, c] : partition.assignment) {
    auto it = labels.find(user);
    if (it == labels.end()) continue;
    ++labeled[static_cast<std::size_t>(c)];
    if (it->second == Label::psm) ++psm[static_cast<std::size_t>(c)];
  }

  std::vector<Prediction> out;
  out.reserve(partition.assignment.size());
  for (const auto& [user, c] : partition.assignment) {
    const auto sc = static_cast<std::size_t>(c);
    Prediction p;
    p.user = user;
    if (auto it = labels.find(user); it != labels.end()) {
      p.label = it->second;
      p.score = it->second == Label::psm ? 1.0 : 0.0;
      p.source = PredictionSource::known;
    } else if (labeled[sc] > 0) {
      p.score = static_cast<double>(psm[sc]) / static_cast<double>(labeled[sc]);
      p.label = p.score >= vote_threshold ? Label::psm : Label::normal;
      p.source = PredictionSource::community_vote;
    } else {
      auto f = features.find(user);
      if (f == features.end()) {
        throw InvalidArgument("user '" + user + "' has no labeled community members and no features");
      }
      p = predict(fallback, f->second);
      p.source = PredictionSource::fallback;
    }
    out.push_back(std::move(p));
  }
  return out;
}

EvalReport evaluate(const std::vector<Prediction>& predictions, const LabelSet& truth) {
  EvalReport r;
  for (const auto& p : predictions) {
    auto it = truth.find(p.user);
    if (it == truth.end()) throw DataError("no truth label for predicted user '" + p.user + "'");
    const bool actual = it->second == Label::psm;
    const bool predicted = p.label == Label::psm;
    if (predicted && actual) ++r.tp;
    else if (predicted) ++r.fp;
    else if (actual) ++r.fn;
    else ++r.tn;
  }
  if (r.tp + r.fp > 0) r.precision = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp);
  if (r.tp + r.fn > 0) r.recall = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn);
  if (r.precision + r.recall > 0) {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  }
  return r;
}

}  // namespace causalpsm
