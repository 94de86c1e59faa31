#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace causalpsm {

/// Seconds since the Unix epoch (UTC). Durations use the same unit.
using Timestamp = std::int64_t;

/// One posting event: `user` posted `message` at `time`.
struct ActionRecord {
  std::string user;
  std::string message;
  Timestamp time = 0;

  friend bool operator==(const ActionRecord&, const ActionRecord&) = default;
};

/// Half-open time range [begin, end).
struct TimeInterval {
  Timestamp begin = 0;
  Timestamp end = 0;

  bool contains(Timestamp t) const { return begin <= t && t < end; }
};

/// A normalized action log.
///
/// Records are sorted by (time, user, message) and each (user, message) pair
/// occurs at most once, carrying the earliest time the user posted the
/// message. The log is immutable once built.
class ActionLog {
 public:
  ActionLog() = default;

  /// Validates and normalizes raw records. Duplicate (user, message) rows
  /// collapse to the earliest time. Throws InvalidArgument on an empty id or
  /// negative time.
  static ActionLog from_records(std::vector<ActionRecord> records);

  const std::vector<ActionRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  /// Earliest time `user` posted `message`, if ever.
  std::optional<Timestamp> adoption_time(const std::string& user,
                                         const std::string& message) const;

  /// Distinct users, sorted.
  std::vector<std::string> users() const;
  /// Distinct messages, sorted.
  std::vector<std::string> messages() const;

  /// First action time per user.
  std::map<std::string, Timestamp> first_action_times() const;

  std::optional<Timestamp> min_time() const;
  std::optional<Timestamp> max_time() const;

  friend bool operator==(const ActionLog& a, const ActionLog& b) {
    return a.records_ == b.records_;
  }

 private:
  // Caller guarantees `records` is already normalized.
  static ActionLog adopt_normalized(std::vector<ActionRecord> records);

  friend ActionLog restrict(const ActionLog& log, TimeInterval interval);
  template <typename Pred>
  friend ActionLog filter_records(const ActionLog& log, Pred keep);

  std::vector<ActionRecord> records_;
  std::map<std::pair<std::string, std::string>, Timestamp> first_time_;
};

/// Minimum number of distinct adopters for a message to count as viral.
struct ViralityConfig {
  int theta = 2;

  ViralityConfig() = default;
  /// Throws InvalidArgument if theta < 2.
  explicit ViralityConfig(int theta);
};

struct Adoption {
  std::string user;
  Timestamp time = 0;

  friend bool operator==(const Adoption&, const Adoption&) = default;
};

/// Adopters of one message, in (time, user) order.
struct CascadeSummary {
  std::string message;
  std::vector<Adoption> adopters;
  bool viral = false;
  /// Time of the theta-th distinct adopter; set iff viral.
  std::optional<Timestamp> viral_time;

  friend bool operator==(const CascadeSummary&, const CascadeSummary&) = default;
};

/// One summary per distinct message, ordered by message id.
std::vector<CascadeSummary> cascades(const ActionLog& log, const ViralityConfig& cfg);

/// Adopters with adoption time at or before the viral time, in adoption
/// order. Throws InvalidArgument if the cascade is not viral.
std::vector<std::string> key_users(const CascadeSummary& cascade);

/// Records with interval.begin <= time < interval.end. Throws
/// InvalidArgument if begin >= end.
ActionLog restrict(const ActionLog& log, TimeInterval interval);

/// Records for which `keep(record)` is true. The result stays normalized.
template <typename Pred>
ActionLog filter_records(const ActionLog& log, Pred keep) {
  std::vector<ActionRecord> kept;
  for (const auto& r : log.records_) {
    if (keep(r)) kept.push_back(r);
  }
  return ActionLog::adopt_normalized(std::move(kept));
}

}  // namespace causalpsm
