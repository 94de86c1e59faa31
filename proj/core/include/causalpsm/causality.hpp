#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "causalpsm/action_log.hpp"

namespace causalpsm {

/// Exact counts behind the two adoption probabilities of an ordered pair
/// (i, j). Probabilities are formed by a single division; an empty
/// denominator yields 0.
struct PairStats {
  /// Viral messages where i and j are both key users and i posts strictly first.
  std::int64_t precede_count = 0;
  /// Viral messages where i or j is a key user.
  std::int64_t either_count = 0;
  /// Viral messages where j is a key user and i is not a key user preceding j.
  std::int64_t j_without_i_count = 0;
  /// Viral messages where i is not a key user, plus those where both are key
  /// users but i does not precede j.
  std::int64_t not_i_count = 0;

  std::int64_t support() const { return precede_count; }
  double p_ij() const;
  double p_not_ij() const;
};

struct CausalityScore {
  std::string user;
  double epsilon = 0.0;
  std::size_t related_count = 0;
};

/// Kleinberg-Mishra causality over one action log.
///
/// Construction walks every viral cascade once and accumulates per-user and
/// per-pair key-user counts; queries afterwards are lookups. Scores are
/// independent of evaluation order.
class CausalityModel {
 public:
  CausalityModel(const ActionLog& log, const ViralityConfig& cfg);

  std::size_t viral_message_count() const { return viral_count_; }

  /// Users j != i that i precedes as a fellow key user in some viral message.
  std::set<std::string> related_users(const std::string& i) const;
  /// Throws InvalidArgument if i == j.
  PairStats pair(const std::string& i, const std::string& j) const;
  CausalityScore score(const std::string& i) const;
  std::map<std::string, CausalityScore> score_all() const;

 private:
  using Index = std::uint32_t;

  std::uint64_t pair_key(Index a, Index b) const {
    return static_cast<std::uint64_t>(a) * users_.size() + b;
  }
  PairStats pair_by_index(Index i, Index j) const;
  CausalityScore score_by_index(Index i) const;

  std::vector<std::string> users_;
  std::unordered_map<std::string, Index> index_;
  std::int64_t viral_count_ = 0;
  std::vector<std::int64_t> key_count_;
  // Unordered pairs (a < b) both key users of the same viral message.
  std::unordered_map<std::uint64_t, std::int64_t> both_key_;
  // Ordered pairs (i, j) with i a key user strictly before key user j.
  std::unordered_map<std::uint64_t, std::int64_t> precede_;
  // related_[i]: sorted indices j with precede_(i, j) > 0.
  std::vector<std::vector<Index>> related_;
};

std::set<std::string> related_users(const ActionLog& log, const ViralityConfig& cfg,
                                     const std::string& i);

PairStats pair_probabilities(const ActionLog& log, const ViralityConfig& cfg,
                             const std::string& i, const std::string& j);

/// Mean of p_ij - p_not_ij over i's related users; 0 when there are none.
CausalityScore km_causality(const ActionLog& log, const ViralityConfig& cfg,
                            const std::string& i);

/// One score per user appearing in the log.
std::map<std::string, CausalityScore> score_all(const ActionLog& log, const ViralityConfig& cfg);

}  // namespace causalpsm
