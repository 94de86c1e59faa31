#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "causalpsm/action_log.hpp"
#include "causalpsm/causality.hpp"
#include "causalpsm/classify.hpp"
#include "causalpsm/community.hpp"
#include "causalpsm/decay.hpp"
#include "causalpsm/error.hpp"
#include "causalpsm/io.hpp"
#include "causalpsm/simulate.hpp"
#include "causalpsm/stats.hpp"

namespace causalpsm::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kFormats = R"(Formats:
  action log   CSV user,message,time (header required) or JSON lines
               {"user":..,"message":..,"time":<int>}; chosen by --format or
               by a .jsonl/.ndjson/.json extension
  labels       CSV user,label with label psm or normal
  graph        CSV user_a,user_b,weight
  partition    CSV user,community
  scores       JSON lines {"user","epsilon","related_count","x","feature_names"}
  predictions  JSON lines {"user","score","label","source"}
  reports      a single JSON object
Any flag may also come from --config FILE, one `key = value` per line (key is
the flag name without dashes, lists comma separated, # starts a comment).
Flags given on the command line win over the file.)";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string flag_name(const std::string& arg) {
  if (arg.rfind("--", 0) != 0) return "";
  return arg.substr(2, arg.find('=') == std::string::npos ? std::string::npos : arg.find('=') - 2);
}

std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file '" + path + "'");
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(n) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty()) throw UsageError(path + ":" + std::to_string(n) + ": empty key");
    entries.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return entries;
}

// Replaces --config FILE by the file's entries, skipping keys that are also
// given on the command line.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> kept;
  std::optional<std::string> config;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config") {
      if (k + 1 >= args.size()) throw UsageError("--config needs a file name");
      config = args[++k];
    } else if (args[k].rfind("--config=", 0) == 0) {
      config = args[k].substr(9);
    } else {
      kept.push_back(args[k]);
    }
  }
  if (!config) return kept;
  std::set<std::string> given;
  for (const auto& a : kept) given.insert(flag_name(a));
  for (const auto& [key, value] : read_config(*config)) {
    if (!given.contains(key)) kept.push_back("--" + key + "=" + value);
  }
  return kept;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return in;
}

template <class Parse>
auto read_file(const std::string& path, Parse parse) {
  auto in = open_input(path);
  try {
    return parse(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  body(out);
  out.flush();
  if (!out) throw DataError("error while writing '" + path + "'");
}

void write_text(const std::string& path, const std::string& text) {
  write_file(path, [&](std::ostream& out) { out << text; });
}

// Data-driven precondition failures are data errors, not usage errors.
template <class F>
auto on_data(F f) {
  try {
    return f();
  } catch (const InvalidArgument& e) {
    throw DataError(e.what());
  }
}

struct LogInput {
  std::string path;
  std::string format;

  void add(CLI::App* sub) {
    sub->add_option("--input", path, "Action log file")->required();
    sub->add_option("--format", format, "Action log format (csv or jsonl); default from extension")
        ->check(CLI::IsMember({"csv", "jsonl"}));
  }

  ActionLog load() const {
    const auto fmt = format.empty() ? io::format_from_path(path) : io::parse_log_format(format);
    return read_file(path, [&](std::istream& in) { return io::parse_action_log(in, fmt); });
  }
};

struct EarlyFlags {
  int theta = 0;
  int window_days = 10;
  bool whole_log = false;
  bool symmetric = false;
  Timestamp delta = kDefaultDelta;
  std::vector<double> sigmas = default_sigmas();
  std::uint64_t seed = 0;
  double resolution = 1.0;
  double vote_threshold = 0.5;
  double lambda = 1e-3;
  double learning_rate = 1.0;
  int max_iterations = 2000;
  bool no_causal_weights = false;
  bool no_standardize = false;
  bool no_balance = false;
  std::string pipeline = "community";

  void add(CLI::App* sub) {
    sub->add_option("--theta", theta, "Viral threshold (distinct adopters)")->required();
    sub->add_option("--pipeline", pipeline, "supervised or community")
        ->check(CLI::IsMember({"supervised", "community"}))
        ->capture_default_str();
    auto* w = sub->add_option("--window-days", window_days,
                              "Days after each user's first action visible to its features")
                  ->capture_default_str();
    sub->add_flag("--whole-log", whole_log, "Use every record of every user")->excludes(w);
    sub->add_flag("--symmetric", symmetric, "Also look window-days back from the first action");
    sub->add_option("--delta", delta, "Sliding window length in seconds")->capture_default_str();
    sub->add_option("--sigma", sigmas, "Decay rates per second (repeatable or comma separated)")
        ->delimiter(',')
        ->capture_default_str();
    sub->add_option("--seed", seed, "Seed for the split and Louvain")->capture_default_str();
    sub->add_option("--resolution", resolution, "Louvain resolution")->capture_default_str();
    sub->add_option("--vote-threshold", vote_threshold, "psm share needed in a community vote")
        ->capture_default_str();
    sub->add_option("--lambda", lambda, "L2 penalty of the logistic model")->capture_default_str();
    sub->add_option("--learning-rate", learning_rate, "Initial gradient step")->capture_default_str();
    sub->add_option("--max-iterations", max_iterations, "Gradient descent iterations")
        ->capture_default_str();
    sub->add_flag("--no-causal-weights", no_causal_weights, "Louvain on the raw co-posting graph");
    sub->add_flag("--no-standardize", no_standardize, "Keep features on their raw scale");
    sub->add_flag("--no-balance", no_balance, "Do not reweight classes in training");
  }

  EarlyDetectionOptions options() const {
    EarlyDetectionOptions o;
    if (whole_log) {
      o.window_days.reset();
    } else {
      o.window_days = window_days;
    }
    o.symmetric_window = symmetric;
    o.delta = delta;
    o.sigmas = sigmas;
    o.seed = seed;
    o.resolution = resolution;
    o.vote_threshold = vote_threshold;
    o.train.lambda = lambda;
    o.train.learning_rate = learning_rate;
    o.train.max_iterations = max_iterations;
    o.train.balance_classes = !no_balance;
    o.causal_weights = !no_causal_weights;
    o.standardize_features = !no_standardize;
    return o;
  }
};

void write_scores_file(const std::string& path, const std::map<std::string, CausalityVector>& f) {
  write_file(path, [&](std::ostream& out) { io::write_scores(out, {}, f); });
}

void write_predictions_file(const std::string& path, const std::vector<Prediction>& p) {
  write_file(path, [&](std::ostream& out) { io::write_predictions(out, p); });
}

LabelSet load_labels(const std::string& path) {
  return read_file(path, [](std::istream& in) { return io::read_labels(in); });
}

void add_score(CLI::App& app, std::function<void()>& action) {
  auto* sub = app.add_subcommand("score", "Causality score and decayed features per user");
  auto input = std::make_shared<LogInput>();
  auto theta = std::make_shared<int>(0);
  auto t0 = std::make_shared<std::optional<Timestamp>>();
  auto t = std::make_shared<std::optional<Timestamp>>();
  auto delta = std::make_shared<std::optional<Timestamp>>();
  auto sigmas = std::make_shared<std::vector<double>>(default_sigmas());
  auto out = std::make_shared<std::string>();
  input->add(sub);
  sub->add_option("--theta", *theta, "Viral threshold (distinct adopters)")->required();
  sub->add_option("--t0", *t0, "Interval start; default first record");
  sub->add_option("--t", *t, "Interval end (exclusive); default one past the last record");
  sub->add_option("--delta", *delta, "Window length; default min(86400, t - t0)");
  sub->add_option("--sigma", *sigmas, "Decay rates (repeatable or comma separated)")
      ->delimiter(',')
      ->capture_default_str();
  sub->add_option("--out", *out, "Scores file (JSON lines)")->required();
  sub->footer(kFormats);
  sub->callback([&action, input, theta, t0, t, delta, sigmas, out] {
    action = [=] {
      const ViralityConfig cfg(*theta);
      const ActionLog log = input->load();
      if (log.empty() && (!*t0 || !*t)) throw DataError("empty log and no --t0/--t given");
      const Timestamp begin = t0->value_or(log.empty() ? 0 : *log.min_time());
      const Timestamp end = t->value_or(log.empty() ? 0 : *log.max_time() + 1);
      WindowSpec spec{begin, end, delta->value_or(std::min(kDefaultDelta, end - begin))};
      spec.validate();
      const auto features = feature_vectors(log, cfg, spec, *sigmas);
      const CausalityModel model(restrict(log, {begin, end}), cfg);
      std::map<std::string, CausalityScore> scores;
      for (const auto& u : log.users()) scores.emplace(u, model.score(u));
      write_file(*out, [&](std::ostream& os) { io::write_scores(os, scores, features); });
    };
  });
}

void add_graph(CLI::App& app, std::function<void()>& action) {
  auto* sub = app.add_subcommand("graph", "Co-posting user graph, optionally causally reweighted");
  auto input = std::make_shared<LogInput>();
  auto features = std::make_shared<std::string>();
  auto standardize_flag = std::make_shared<bool>(false);
  auto out = std::make_shared<std::string>();
  input->add(sub);
  sub->add_option("--features", *features,
                  "Scores file; divides each weight by 1 + feature distance");
  sub->add_flag("--standardize", *standardize_flag, "z-score the features before reweighting");
  sub->add_option("--out", *out, "Graph file (CSV)")->required();
  sub->footer(kFormats);
  sub->callback([&action, input, features, standardize_flag, out] {
    action = [=] {
      UserGraph g = coposting_graph(input->load());
      if (!features->empty()) {
        auto f = read_file(*features, [](std::istream& in) { return io::read_features(in); });
        if (*standardize_flag) on_data([&] { standardize(f); });
        g = on_data([&] { return causal_weighted_graph(g, f); });
      }
      write_file(*out, [&](std::ostream& os) { io::write_graph(os, g); });
    };
  });
}

void add_communities(CLI::App& app, std::function<void()>& action) {
  auto* sub = app.add_subcommand("communities", "Louvain partition of a user graph");
  auto graph = std::make_shared<std::string>();
  auto seed = std::make_shared<std::uint64_t>(0);
  auto resolution = std::make_shared<double>(1.0);
  auto out = std::make_shared<std::string>();
  auto report = std::make_shared<std::string>();
  sub->add_option("--graph", *graph, "Graph file (CSV)")->required();
  sub->add_option("--seed", *seed, "Node order seed")->capture_default_str();
  sub->add_option("--resolution", *resolution, "Modularity resolution")->capture_default_str();
  sub->add_option("--out", *out, "Partition file (CSV)")->required();
  sub->add_option("--report", *report, "Modularity report (JSON)");
  sub->footer(kFormats);
  sub->callback([&action, graph, seed, resolution, out, report] {
    action = [=] {
      if (!(*resolution > 0.0)) throw UsageError("--resolution must be > 0");
      const UserGraph g = read_file(*graph, [](std::istream& in) { return io::read_graph(in); });
      if (g.node_count() == 0) throw DataError(*graph + ": graph has no edges");
      LouvainTrace trace;
      const Partition p = louvain(g, *seed, *resolution, &trace);
      write_file(*out, [&](std::ostream& os) { io::write_partition(os, p); });
      if (!report->empty()) {
        json j{{"modularity", modularity(g, p, *resolution)},
               {"communities", p.community_count},
               {"nodes", g.node_count()},
               {"seed", *seed},
               {"resolution", *resolution},
               {"levels", trace.levels},
               {"pass_modularity", trace.pass_modularity}};
        write_text(*report, j.dump(2) + "\n");
      }
    };
  });
}

void add_ttest(CLI::App& app, std::function<void()>& action) {
  auto* sub = app.add_subcommand(
      "ttest", "Welch test that intra-community feature distances are smaller than inter-community ones");
  auto partition = std::make_shared<std::string>();
  auto features = std::make_shared<std::string>();
  auto seed = std::make_shared<std::uint64_t>(0);
  auto alpha = std::make_shared<double>(0.01);
  auto standardize_flag = std::make_shared<bool>(false);
  auto out = std::make_shared<std::string>();
  auto samples = std::make_shared<std::string>();
  sub->add_option("--partition", *partition, "Partition file (CSV)")->required();
  sub->add_option("--features", *features, "Scores file (JSON lines)")->required();
  sub->add_option("--seed", *seed, "Seed for the inter-community draws")->capture_default_str();
  sub->add_option("--alpha", *alpha, "Significance level")->capture_default_str();
  sub->add_flag("--standardize", *standardize_flag, "z-score the features first");
  sub->add_option("--out", *out, "Test report (JSON)")->required();
  sub->add_option("--samples", *samples, "Also dump the distance samples (JSON)");
  sub->footer(kFormats);
  sub->callback([&action, partition, features, seed, alpha, standardize_flag, out, samples] {
    action = [=] {
      if (!(*alpha > 0.0 && *alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
      const Partition p =
          read_file(*partition, [](std::istream& in) { return io::read_partition(in); });
      auto f = read_file(*features, [](std::istream& in) { return io::read_features(in); });
      if (*standardize_flag) on_data([&] { standardize(f); });
      const auto s = on_data([&] { return distance_samples(p, f, *seed); });
      const auto r = on_data([&] { return welch_ttest_less(s.v_a, s.v_b, *alpha); });
      write_text(*out, io::to_json(r));
      if (!samples->empty()) write_text(*samples, io::to_json(s));
    };
  });
}

void add_classify(CLI::App& app, std::function<void()>& action) {
  auto* sub = app.add_subcommand(
      "classify", "Label unlabeled users from the labeled ones (supervised or community vote)");
  auto input = std::make_shared<LogInput>();
  auto flags = std::make_shared<EarlyFlags>();
  auto labels = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto scores_out = std::make_shared<std::string>();
  auto partition_out = std::make_shared<std::string>();
  input->add(sub);
  flags->add(sub);
  sub->add_option("--labels", *labels, "Known labels (CSV) used for training and voting")
      ->required();
  sub->add_option("--out", *out, "Predictions for every user (JSON lines)")->required();
  sub->add_option("--scores-out", *scores_out, "Also write the features used");
  sub->add_option("--partition-out", *partition_out, "Also write the partition (community)");
  sub->footer(kFormats);
  sub->callback([&action, input, flags, labels, out, scores_out, partition_out] {
    action = [=] {
      const ViralityConfig cfg(flags->theta);
      const auto options = flags->options();
      const ActionLog log = input->load();
      const LabelSet known = load_labels(*labels);
      const auto r = classify_users(log, known, cfg, parse_pipeline(flags->pipeline), options);
      write_predictions_file(*out, r.predictions);
      if (!scores_out->empty()) write_scores_file(*scores_out, r.features);
      if (!partition_out->empty() && r.partition) {
        write_file(*partition_out, [&](std::ostream& os) { io::write_partition(os, *r.partition); });
      }
    };
  });
}

void add_evaluate(CLI::App& app, std::function<void()>& action) {
  auto* sub = app.add_subcommand("evaluate", "Precision, recall and F1 of psm predictions");
  auto predictions = std::make_shared<std::string>();
  auto labels = std::make_shared<std::string>();
  auto window = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  sub->add_option("--predictions", *predictions, "Predictions (JSON lines)")->required();
  sub->add_option("--labels", *labels, "Ground truth (CSV)")->required();
  sub->add_option("--window", *window, "Free-text window description for the report");
  sub->add_option("--out", *out, "Evaluation report (JSON)")->required();
  sub->footer(std::string("Predictions with source `known` are skipped.\n") + kFormats);
  sub->callback([&action, predictions, labels, window, out] {
    action = [=] {
      auto all = read_file(*predictions, [](std::istream& in) { return io::read_predictions(in); });
      std::erase_if(all, [](const Prediction& p) { return p.source == PredictionSource::known; });
      EvalReport r = evaluate(all, load_labels(*labels));
      r.window = *window;
      write_text(*out, io::to_json(r));
    };
  });
}

struct SimFlags {
  std::string preset = "biased";
  std::optional<int> n_users;
  std::optional<double> psm_fraction;
  std::optional<int> n_messages;
  std::optional<double> viral_fraction;
  std::optional<int> theta;
  std::optional<Timestamp> horizon;
  std::optional<double> mean_interarrival;
  std::optional<double> extra_adopters;
  std::optional<int> interest_groups;
  std::optional<double> psm_early_bias;
  std::optional<int> psm_clique_size;
  std::optional<std::uint64_t> seed;

  void add(CLI::App* sub) {
    sub->add_option("--preset", preset, "biased or null (bias 1, clique size 1)")
        ->check(CLI::IsMember({"biased", "null"}))
        ->capture_default_str();
    sub->add_option("--n-users", n_users, "Number of users");
    sub->add_option("--psm-fraction", psm_fraction, "Share of psm users");
    sub->add_option("--n-messages", n_messages, "Number of messages");
    sub->add_option("--viral-fraction", viral_fraction, "Share of viral messages");
    sub->add_option("--theta", theta, "Viral threshold");
    sub->add_option("--horizon", horizon, "Message start times span, seconds");
    sub->add_option("--mean-interarrival", mean_interarrival, "Mean adoption gap, seconds");
    sub->add_option("--extra-adopters", extra_adopters, "Mean normal adopters per viral message");
    sub->add_option("--interest-groups", interest_groups, "Number of interest groups");
    sub->add_option("--psm-early-bias", psm_early_bias, "Speed-up of psm adoption clocks");
    sub->add_option("--psm-clique-size", psm_clique_size, "psm users seeding each viral message");
    sub->add_option("--seed", seed, "Generator seed");
  }

  SimConfig config() const {
    SimConfig c = preset == "null" ? SimConfig::null_model() : SimConfig::biased();
    if (n_users) c.n_users = *n_users;
    if (psm_fraction) c.psm_fraction = *psm_fraction;
    if (n_messages) c.n_messages = *n_messages;
    if (viral_fraction) c.viral_fraction = *viral_fraction;
    if (theta) c.theta = *theta;
    if (horizon) c.horizon = *horizon;
    if (mean_interarrival) c.mean_interarrival = *mean_interarrival;
    if (extra_adopters) c.extra_adopters = *extra_adopters;
    if (interest_groups) c.interest_groups = *interest_groups;
    if (psm_early_bias) c.psm_early_bias = *psm_early_bias;
    if (psm_clique_size) c.psm_clique_size = *psm_clique_size;
    if (seed) c.seed = *seed;
    return c;
  }
};

void add_simulate(CLI::App& app, std::function<void()>& action) {
  auto* sub = app.add_subcommand("simulate", "Synthetic action log with planted psm accounts");
  auto flags = std::make_shared<SimFlags>();
  auto out = std::make_shared<std::string>();
  flags->add(sub);
  sub->add_option("--out", *out, "Output directory for log.csv and labels.csv")->required();
  sub->footer(kFormats);
  sub->callback([&action, flags, out] {
    action = [=] {
      const SimResult sim = generate(flags->config());
      const fs::path dir(*out);
      write_file((dir / "log.csv").string(),
                 [&](std::ostream& os) { io::write_action_log(os, sim.log); });
      write_file((dir / "labels.csv").string(),
                 [&](std::ostream& os) { io::write_labels(os, sim.truth); });
    };
  });
}

void add_pipeline(CLI::App& app, std::function<void()>& action) {
  auto* sub = app.add_subcommand(
      "pipeline", "Early-detection run: score, graph, communities, classify, evaluate");
  auto input = std::make_shared<LogInput>();
  auto flags = std::make_shared<EarlyFlags>();
  auto labels = std::make_shared<std::string>();
  auto train_fraction = std::make_shared<double>(0.7);
  auto out_dir = std::make_shared<std::string>();
  input->add(sub);
  flags->add(sub);
  sub->add_option("--labels", *labels, "Ground truth (CSV), split into train and test")->required();
  sub->add_option("--train-fraction", *train_fraction, "Share of each class used for training")
      ->capture_default_str();
  sub->add_option("--out-dir", *out_dir,
                  "Directory for scores.jsonl, train_labels.csv, graph.csv, partition.csv, "
                  "predictions.jsonl and report.json")
      ->required();
  sub->footer(kFormats);
  sub->callback([&action, input, flags, labels, train_fraction, out_dir] {
    action = [=] {
      const ViralityConfig cfg(flags->theta);
      auto options = flags->options();
      options.train_fraction = *train_fraction;
      const ActionLog log = input->load();
      const LabelSet truth = load_labels(*labels);
      const auto r = early_detection(log, truth, cfg, parse_pipeline(flags->pipeline), options);
      const fs::path dir(*out_dir);
      auto path = [&](const char* name) { return (dir / name).string(); };
      write_scores_file(path("scores.jsonl"), r.features);
      write_file(path("train_labels.csv"),
                 [&](std::ostream& os) { io::write_labels(os, r.train_labels); });
      if (r.graph) write_file(path("graph.csv"), [&](std::ostream& os) { io::write_graph(os, *r.graph); });
      if (r.partition) {
        write_file(path("partition.csv"),
                   [&](std::ostream& os) { io::write_partition(os, *r.partition); });
      }
      write_predictions_file(path("predictions.jsonl"), r.predictions);
      write_text(path("report.json"), io::to_json(r.report));
    };
  });
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Causal early detection of pathogenic social media accounts", "causalpsm"};
  app.require_subcommand(1);
  app.footer("Run `causalpsm <command> --help` for the flags of each command.");
  app.set_version_flag("--version", "causalpsm 0.1.0");

  std::function<void()> action;
  add_score(app, action);
  add_graph(app, action);
  add_communities(app, action);
  add_ttest(app, action);
  add_classify(app, action);
  add_evaluate(app, action);
  add_simulate(app, action);
  add_pipeline(app, action);

  try {
    const auto args = expand_config(raw_args);
    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
      return app.exit(e, out, err) == 0 ? kOk : kUsage;
    }
    if (action) action();
    return kOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv, argv + argc);
  if (args.empty()) args.emplace_back("causalpsm");
  return run(args, out, err);
}

}  // namespace causalpsm::cli
