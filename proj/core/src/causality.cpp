#include "causalpsm/causality.hpp"

#include <algorithm>

#include "causalpsm/error.hpp"

namespace causalpsm {

namespace {

double ratio(std::int64_t num, std::int64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

double PairStats::p_ij() const { return ratio(precede_count, either_count); }

double PairStats::p_not_ij() const { return ratio(j_without_i_count, not_i_count); }

CausalityModel::CausalityModel(const ActionLog& log, const ViralityConfig& cfg) {
  users_ = log.users();
  index_.reserve(users_.size());
  for (Index k = 0; k < users_.size(); ++k) index_.emplace(users_[k], k);
  key_count_.assign(users_.size(), 0);
  related_.resize(users_.size());

  struct Key {
    Index user;
    Timestamp time;
  };
  std::vector<Key> keys;
  for (const auto& c : cascades(log, cfg)) {
    if (!c.viral) continue;
    ++viral_count_;
    keys.clear();
    for (const auto& a : c.adopters) {
      if (a.time > *c.viral_time) break;
      keys.push_back({index_.at(a.user), a.time});
    }
    for (std::size_t x = 0; x < keys.size(); ++x) {
      ++key_count_[keys[x].user];
      for (std::size_t y = x + 1; y < keys.size(); ++y) {
        const Index a = std::min(keys[x].user, keys[y].user);
        const Index b = std::max(keys[x].user, keys[y].user);
        ++both_key_[pair_key(a, b)];
        // keys are time-ordered, so only x can strictly precede y.
        if (keys[x].time < keys[y].time) ++precede_[pair_key(keys[x].user, keys[y].user)];
      }
    }
  }
  for (const auto& [key, count] : precede_) {
    if (count > 0) {
      related_[key / users_.size()].push_back(static_cast<Index>(key % users_.size()));
    }
  }
  for (auto& r : related_) std::sort(r.begin(), r.end());
}

PairStats CausalityModel::pair_by_index(Index i, Index j) const {
  auto lookup = [](const auto& map, std::uint64_t key) -> std::int64_t {
    auto it = map.find(key);
    return it == map.end() ? 0 : it->second;
  };
  const std::int64_t precede = lookup(precede_, pair_key(i, j));
  const std::int64_t both = lookup(both_key_, pair_key(std::min(i, j), std::max(i, j)));
  PairStats s;
  s.precede_count = precede;
  s.either_count = key_count_[i] + key_count_[j] - both;
  s.j_without_i_count = key_count_[j] - precede;
  s.not_i_count = (viral_count_ - key_count_[i]) + (both - precede);
  return s;
}

PairStats CausalityModel::pair(const std::string& i, const std::string& j) const {
  if (i == j) throw InvalidArgument("pair_probabilities requires i != j (got '" + i + "')");
  auto ii = index_.find(i);
  auto jj = index_.find(j);
  if (ii != index_.end() && jj != index_.end()) return pair_by_index(ii->second, jj->second);

  // At least one user never posted: it is never a key user.
  PairStats s;
  const std::int64_t ki = ii == index_.end() ? 0 : key_count_[ii->second];
  const std::int64_t kj = jj == index_.end() ? 0 : key_count_[jj->second];
  s.either_count = ki + kj;
  s.j_without_i_count = kj;
  s.not_i_count = viral_count_ - ki;
  return s;
}

std::set<std::string> CausalityModel::related_users(const std::string& i) const {
  std::set<std::string> out;
  auto it = index_.find(i);
  if (it == index_.end()) return out;
  for (Index j : related_[it->second]) out.insert(users_[j]);
  return out;
}

CausalityScore CausalityModel::score_by_index(Index i) const {
  CausalityScore s;
  s.user = users_[i];
  const auto& rel = related_[i];
  s.related_count = rel.size();
  if (rel.empty()) return s;
  double sum = 0.0;
  for (Index j : rel) {
    const PairStats p = pair_by_index(i, j);
    sum += p.p_ij() - p.p_not_ij();
  }
  s.epsilon = sum / static_cast<double>(rel.size());
  return s;
}

CausalityScore CausalityModel::score(const std::string& i) const {
  auto it = index_.find(i);
  if (it == index_.end()) return CausalityScore{i, 0.0, 0};
  return score_by_index(it->second);
}

std::map<std::string, CausalityScore> CausalityModel::score_all() const {
  std::map<std::string, CausalityScore> out;
  for (Index i = 0; i < users_.size(); ++i) out.emplace(users_[i], score_by_index(i));
  return out;
}

std::set<std::string> related_users(const ActionLog& log, const ViralityConfig& cfg,
                                     const std::string& i) {
  return CausalityModel(log, cfg).related_users(i);
}

PairStats pair_probabilities(const ActionLog& log, const ViralityConfig& cfg,
                             const std::string& i, const std::string& j) {
  if (i == j) throw InvalidArgument("pair_probabilities requires i != j (got '" + i + "')");
  return CausalityModel(log, cfg).pair(i, j);
}

CausalityScore km_causality(const ActionLog& log, const ViralityConfig& cfg,
                            const std::string& i) {
  return CausalityModel(log, cfg).score(i);
}

std::map<std::string, CausalityScore> score_all(const ActionLog& log, const ViralityConfig& cfg) {
  return CausalityModel(log, cfg).score_all();
}

}  // namespace causalpsm
