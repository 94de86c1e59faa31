#include "causalpsm/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "causalpsm/error.hpp"

namespace causalpsm::io {

namespace {

using nlohmann::json;

// Yields non-blank lines with trailing '\r' removed and their 1-based index
// among data rows (a CSV header, when expected, is consumed first).
class Rows {
 public:
  Rows(std::istream& in, const std::string& header) : in_(in) {
    if (header.empty()) return;
    std::string line;
    while (std::getline(in_, line)) {
      strip(line);
      if (line.empty()) continue;
      if (line != header) {
        throw ParseError(0, "expected header '" + header + "', got '" + line + "'");
      }
      return;
    }
  }

  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      strip(line);
      if (line.empty()) continue;
      ++row_;
      return true;
    }
    return false;
  }

  std::size_t row() const { return row_; }

 private:
  static void strip(std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  }

  std::istream& in_;
  std::size_t row_ = 0;
};

std::vector<std::string> fields(const std::string& line, std::size_t expected, std::size_t row) {
  auto f = split_csv(line);
  if (f.size() != expected) {
    throw ParseError(row, "expected " + std::to_string(expected) + " fields, got " +
                              std::to_string(f.size()));
  }
  return f;
}

Timestamp parse_time(const std::string& s, std::size_t row) {
  Timestamp t = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, t);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw ParseError(row, "time '" + s + "' is not an integer");
  }
  return t;
}

double parse_double(const std::string& s, std::size_t row, const char* what) {
  // std::from_chars for double is not available in every libstdc++ we target.
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw ParseError(row, std::string(what) + " '" + s + "' is not a finite number");
  }
  return v;
}

int parse_int(const std::string& s, std::size_t row, const char* what) {
  int v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw ParseError(row, std::string(what) + " '" + s + "' is not an integer");
  }
  return v;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ActionRecord make_record(std::string user, std::string message, Timestamp time, std::size_t row) {
  if (user.empty()) throw ParseError(row, "empty user id");
  if (message.empty()) throw ParseError(row, "empty message id");
  if (time < 0) throw ParseError(row, "negative time");
  return {std::move(user), std::move(message), time};
}

json parse_json_line(const std::string& line, std::size_t row) {
  try {
    json j = json::parse(line);
    if (!j.is_object()) throw ParseError(row, "expected a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ParseError(row, std::string("invalid JSON: ") + e.what());
  }
}

std::string string_field(const json& j, const char* key, std::size_t row) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw ParseError(row, std::string("missing string field '") + key + "'");
  }
  return it->get<std::string>();
}

}  // namespace

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::string csv_field(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

LogFormat format_from_path(const std::string& path) {
  for (const char* ext : {".jsonl", ".ndjson", ".json"}) {
    const std::string e(ext);
    if (path.size() >= e.size() && path.compare(path.size() - e.size(), e.size(), e) == 0) {
      return LogFormat::jsonl;
    }
  }
  return LogFormat::csv;
}

LogFormat parse_log_format(const std::string& name) {
  if (name == "csv") return LogFormat::csv;
  if (name == "jsonl" || name == "json-lines") return LogFormat::jsonl;
  throw InvalidArgument("unknown log format '" + name + "' (expected csv or jsonl)");
}

ActionLog parse_action_log(std::istream& in, LogFormat format) {
  std::vector<ActionRecord> records;
  std::string line;
  if (format == LogFormat::csv) {
    Rows rows(in, "user,message,time");
    while (rows.next(line)) {
      auto f = fields(line, 3, rows.row());
      records.push_back(make_record(std::move(f[0]), std::move(f[1]),
                                    parse_time(f[2], rows.row()), rows.row()));
    }
  } else {
    Rows rows(in, "");
    while (rows.next(line)) {
      const json j = parse_json_line(line, rows.row());
      auto t = j.find("time");
      if (t == j.end() || !t->is_number_integer()) {
        throw ParseError(rows.row(), "field 'time' must be an integer");
      }
      records.push_back(make_record(string_field(j, "user", rows.row()),
                                    string_field(j, "message", rows.row()),
                                    t->get<Timestamp>(), rows.row()));
    }
  }
  return ActionLog::from_records(std::move(records));
}

void write_action_log(std::ostream& out, const ActionLog& log, LogFormat format) {
  if (format == LogFormat::csv) {
    out << "user,message,time\n";
    for (const auto& r : log.records()) {
      out << csv_field(r.user) << ',' << csv_field(r.message) << ',' << r.time << '\n';
    }
    return;
  }
  for (const auto& r : log.records()) {
    json j{{"user", r.user}, {"message", r.message}, {"time", r.time}};
    out << j.dump() << '\n';
  }
}

LabelSet read_labels(std::istream& in) {
  LabelSet labels;
  Rows rows(in, "user,label");
  std::string line;
  while (rows.next(line)) {
    auto f = fields(line, 2, rows.row());
    if (f[0].empty()) throw ParseError(rows.row(), "empty user id");
    try {
      labels[f[0]] = parse_label(f[1]);
    } catch (const InvalidArgument& e) {
      throw ParseError(rows.row(), e.what());
    }
  }
  return labels;
}

void write_labels(std::ostream& out, const LabelSet& labels) {
  out << "user,label\n";
  for (const auto& [user, label] : labels) out << csv_field(user) << ',' << to_string(label) << '\n';
}

UserGraph read_graph(std::istream& in) {
  UserGraph g;
  Rows rows(in, "user_a,user_b,weight");
  std::string line;
  while (rows.next(line)) {
    auto f = fields(line, 3, rows.row());
    const double w = parse_double(f[2], rows.row(), "weight");
    try {
      g.add_edge(f[0], f[1], w);
    } catch (const InvalidArgument& e) {
      throw ParseError(rows.row(), e.what());
    }
  }
  return g;
}

void write_graph(std::ostream& out, const UserGraph& g) {
  out << "user_a,user_b,weight\n";
  for (const auto& e : g.edges()) {
    out << csv_field(e.a) << ',' << csv_field(e.b) << ',' << format_double(e.weight) << '\n';
  }
}

Partition read_partition(std::istream& in) {
  std::map<std::string, int> labels;
  Rows rows(in, "user,community");
  std::string line;
  while (rows.next(line)) {
    auto f = fields(line, 2, rows.row());
    if (f[0].empty()) throw ParseError(rows.row(), "empty user id");
    labels[f[0]] = parse_int(f[1], rows.row(), "community");
  }
  return Partition::from_labels(labels);
}

void write_partition(std::ostream& out, const Partition& p) {
  out << "user,community\n";
  for (const auto& [user, c] : p.assignment) out << csv_field(user) << ',' << c << '\n';
}

void write_scores(std::ostream& out, const std::map<std::string, CausalityScore>& scores,
                  const std::map<std::string, CausalityVector>& features) {
  std::map<std::string, json> lines;
  for (const auto& [user, s] : scores) {
    auto& j = lines[user];
    j["user"] = user;
    j["epsilon"] = s.epsilon;
    j["related_count"] = s.related_count;
  }
  for (const auto& [user, f] : features) {
    auto& j = lines[user];
    j["user"] = user;
    j["x"] = f.x;
    j["feature_names"] = f.feature_names;
  }
  for (const auto& [_, j] : lines) out << j.dump() << '\n';
}

std::map<std::string, CausalityVector> read_features(std::istream& in) {
  std::map<std::string, CausalityVector> out;
  Rows rows(in, "");
  std::string line;
  while (rows.next(line)) {
    const json j = parse_json_line(line, rows.row());
    CausalityVector v;
    v.user = string_field(j, "user", rows.row());
    auto x = j.find("x");
    if (x == j.end() || !x->is_array() || x->empty()) {
      throw ParseError(rows.row(), "field 'x' must be a non-empty array");
    }
    for (const auto& e : *x) {
      if (!e.is_number()) throw ParseError(rows.row(), "field 'x' must hold numbers");
      v.x.push_back(e.get<double>());
    }
    if (auto names = j.find("feature_names"); names != j.end() && names->is_array()) {
      for (const auto& n : *names) v.feature_names.push_back(n.get<std::string>());
    }
    out[v.user] = std::move(v);
  }
  return out;
}

void write_predictions(std::ostream& out, const std::vector<Prediction>& predictions) {
  for (const auto& p : predictions) {
    json j{{"user", p.user},
           {"score", p.score},
           {"label", to_string(p.label)},
           {"source", to_string(p.source)}};
    out << j.dump() << '\n';
  }
}

std::vector<Prediction> read_predictions(std::istream& in) {
  std::vector<Prediction> out;
  Rows rows(in, "");
  std::string line;
  while (rows.next(line)) {
    const json j = parse_json_line(line, rows.row());
    Prediction p;
    p.user = string_field(j, "user", rows.row());
    auto score = j.find("score");
    if (score == j.end() || !score->is_number()) {
      throw ParseError(rows.row(), "field 'score' must be a number");
    }
    p.score = score->get<double>();
    try {
      p.label = parse_label(string_field(j, "label", rows.row()));
      if (j.contains("source")) p.source = parse_prediction_source(string_field(j, "source", rows.row()));
    } catch (const InvalidArgument& e) {
      throw ParseError(rows.row(), e.what());
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::string to_json(const TTestReport& r) {
  json j{{"t", r.t_stat}, {"dof", r.dof},       {"p", r.p_value},  {"alpha", r.alpha},
         {"reject", r.reject}, {"n_a", r.n_a}, {"n_b", r.n_b}, {"test", "welch_one_sided_less"}};
  return j.dump(2) + "\n";
}

std::string to_json(const EvalReport& r) {
  json j{{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1}, {"tp", r.tp},
         {"fp", r.fp},               {"fn", r.fn},         {"tn", r.tn}, {"window", r.window}};
  return j.dump(2) + "\n";
}

std::string to_json(const DistanceSamples& s) {
  json j{{"seed", s.seed}, {"v_a", s.v_a}, {"v_b", s.v_b}};
  return j.dump() + "\n";
}

}  // namespace causalpsm::io
