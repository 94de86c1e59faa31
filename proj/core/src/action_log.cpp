#include "causalpsm/action_log.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "causalpsm/error.hpp"

namespace causalpsm {

namespace {

bool record_less(const ActionRecord& a, const ActionRecord& b) {
  return std::tie(a.time, a.user, a.message) < std::tie(b.time, b.user, b.message);
}

}  // namespace

ViralityConfig::ViralityConfig(int theta) : theta(theta) {
  if (theta < 2) {
    throw InvalidArgument("theta must be >= 2, got " + std::to_string(theta));
  }
}

ActionLog ActionLog::from_records(std::vector<ActionRecord> records) {
  for (const auto& r : records) {
    if (r.user.empty()) throw InvalidArgument("action record has an empty user id");
    if (r.message.empty()) throw InvalidArgument("action record has an empty message id");
    if (r.time < 0) throw InvalidArgument("action record has a negative time");
  }
  // After sorting by time, the first occurrence of each (user, message)
  // pair is its earliest post.
  std::sort(records.begin(), records.end(), record_less);
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<ActionRecord> unique;
  unique.reserve(records.size());
  for (auto& r : records) {
    if (seen.emplace(r.user, r.message).second) unique.push_back(std::move(r));
  }
  return adopt_normalized(std::move(unique));
}

ActionLog ActionLog::adopt_normalized(std::vector<ActionRecord> records) {
  ActionLog log;
  log.records_ = std::move(records);
  for (const auto& r : log.records_) {
    log.first_time_.emplace(std::make_pair(r.user, r.message), r.time);
  }
  return log;
}

std::optional<Timestamp> ActionLog::adoption_time(const std::string& user,
                                                  const std::string& message) const {
  auto it = first_time_.find(std::make_pair(user, message));
  if (it == first_time_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> ActionLog::users() const {
  std::set<std::string> s;
  for (const auto& r : records_) s.insert(r.user);
  return {s.begin(), s.end()};
}

std::vector<std::string> ActionLog::messages() const {
  std::set<std::string> s;
  for (const auto& r : records_) s.insert(r.message);
  return {s.begin(), s.end()};
}

std::map<std::string, Timestamp> ActionLog::first_action_times() const {
  std::map<std::string, Timestamp> first;
  for (const auto& r : records_) first.emplace(r.user, r.time);
  return first;
}

std::optional<Timestamp> ActionLog::min_time() const {
  if (records_.empty()) return std::nullopt;
  return records_.front().time;
}

std::optional<Timestamp> ActionLog::max_time() const {
  if (records_.empty()) return std::nullopt;
  return records_.back().time;
}

std::vector<CascadeSummary> cascades(const ActionLog& log, const ViralityConfig& cfg) {
  // Records are already in (time, user) order, so appending keeps each
  // adopter list sorted.
  std::map<std::string, CascadeSummary> by_message;
  for (const auto& r : log.records()) {
    auto& c = by_message[r.message];
    c.message = r.message;
    c.adopters.push_back({r.user, r.time});
  }
  std::vector<CascadeSummary> out;
  out.reserve(by_message.size());
  const auto theta = static_cast<std::size_t>(cfg.theta);
  for (auto& [_, c] : by_message) {
    c.viral = c.adopters.size() >= theta;
    if (c.viral) c.viral_time = c.adopters[theta - 1].time;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<std::string> key_users(const CascadeSummary& cascade) {
  if (!cascade.viral || !cascade.viral_time) {
    throw InvalidArgument("key_users called on non-viral cascade '" + cascade.message + "'");
  }
  std::vector<std::string> keys;
  for (const auto& a : cascade.adopters) {
    if (a.time > *cascade.viral_time) break;
    keys.push_back(a.user);
  }
  return keys;
}

ActionLog restrict(const ActionLog& log, TimeInterval interval) {
  if (interval.begin >= interval.end) {
    throw InvalidArgument("restrict: empty interval [" + std::to_string(interval.begin) + ", " +
                          std::to_string(interval.end) + ")");
  }
  const auto& recs = log.records_;
  auto lo = std::lower_bound(recs.begin(), recs.end(), interval.begin,
                             [](const ActionRecord& r, Timestamp t) { return r.time < t; });
  auto hi = std::lower_bound(lo, recs.end(), interval.end,
                             [](const ActionRecord& r, Timestamp t) { return r.time < t; });
  return ActionLog::adopt_normalized(std::vector<ActionRecord>(lo, hi));
}

}  // namespace causalpsm
