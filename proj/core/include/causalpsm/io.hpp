#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "causalpsm/action_log.hpp"
#include "causalpsm/causality.hpp"
#include "causalpsm/classify.hpp"
#include "causalpsm/community.hpp"
#include "causalpsm/decay.hpp"
#include "causalpsm/stats.hpp"

// File formats. CSV files carry a header row; data rows are numbered from 1
// in error messages. JSON-lines files hold one object per line.
namespace causalpsm::io {

enum class LogFormat { csv, jsonl };

/// ".jsonl" / ".ndjson" / ".json" select JSON-lines, anything else CSV.
LogFormat format_from_path(const std::string& path);
LogFormat parse_log_format(const std::string& name);

/// CSV `user,message,time` or JSON-lines {"user","message","time"}.
/// Empty input gives an empty log. Throws ParseError naming the row.
ActionLog parse_action_log(std::istream& in, LogFormat format);
void write_action_log(std::ostream& out, const ActionLog& log, LogFormat format = LogFormat::csv);

/// CSV `user,label`, label in {psm, normal}.
LabelSet read_labels(std::istream& in);
void write_labels(std::ostream& out, const LabelSet& labels);

/// CSV `user_a,user_b,weight`.
UserGraph read_graph(std::istream& in);
void write_graph(std::ostream& out, const UserGraph& g);

/// CSV `user,community`.
Partition read_partition(std::istream& in);
void write_partition(std::ostream& out, const Partition& p);

/// JSON-lines {"user","epsilon","related_count","x","feature_names"}.
/// Either map may be empty; a user appears if it is in either map.
void write_scores(std::ostream& out, const std::map<std::string, CausalityScore>& scores,
                  const std::map<std::string, CausalityVector>& features);
/// Reads the `user`, `x` and (optional) `feature_names` fields.
std::map<std::string, CausalityVector> read_features(std::istream& in);

/// JSON-lines {"user","score","label","source"}.
void write_predictions(std::ostream& out, const std::vector<Prediction>& predictions);
std::vector<Prediction> read_predictions(std::istream& in);

/// Single JSON objects, pretty-printed with a trailing newline.
std::string to_json(const TTestReport& report);
std::string to_json(const EvalReport& report);
std::string to_json(const DistanceSamples& samples);

/// Splits one CSV line, honoring double-quoted fields.
std::vector<std::string> split_csv(const std::string& line);
/// Quotes a field if it contains a comma, quote or newline.
std::string csv_field(const std::string& field);

}  // namespace causalpsm::io
