#include "causalpsm/community.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "causalpsm/error.hpp"

namespace causalpsm {

namespace {

std::pair<std::string, std::string> ordered(const std::string& a, const std::string& b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

double euclidean(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InvalidArgument("feature vectors differ in dimension");
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += (x[k] - y[k]) * (x[k] - y[k]);
  return std::sqrt(s);
}

}  // namespace

void UserGraph::add_node(const std::string& user) {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), user);
  if (it == nodes_.end() || *it != user) nodes_.insert(it, user);
}

void UserGraph::add_edge(const std::string& a, const std::string& b, double weight) {
  if (a == b) throw InvalidArgument("self-loop on '" + a + "'");
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw InvalidArgument("edge weight must be finite and > 0");
  }
  add_node(a);
  add_node(b);
  edges_[ordered(a, b)] += weight;
}

bool UserGraph::has_node(const std::string& user) const {
  return std::binary_search(nodes_.begin(), nodes_.end(), user);
}

std::optional<std::size_t> UserGraph::index_of(const std::string& user) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), user);
  if (it == nodes_.end() || *it != user) return std::nullopt;
  return static_cast<std::size_t>(it - nodes_.begin());
}

double UserGraph::weight(const std::string& a, const std::string& b) const {
  auto it = edges_.find(ordered(a, b));
  return it == edges_.end() ? 0.0 : it->second;
}

std::vector<Edge> UserGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edges_.size());
  for (const auto& [k, w] : edges_) out.push_back({k.first, k.second, w});
  return out;
}

double UserGraph::total_weight() const {
  double w = 0.0;
  for (const auto& [_, x] : edges_) w += x;
  return w;
}

Partition Partition::from_labels(const std::map<std::string, int>& labels) {
  Partition p;
  std::map<int, int> dense;
  for (const auto& [user, label] : labels) {
    auto [it, inserted] = dense.emplace(label, static_cast<int>(dense.size()));
    p.assignment.emplace(user, it->second);
  }
  p.community_count = static_cast<int>(dense.size());
  return p;
}

std::vector<std::vector<std::string>> Partition::communities() const {
  std::vector<std::vector<std::string>> out(static_cast<std::size_t>(community_count));
  for (const auto& [user, c] : assignment) out[static_cast<std::size_t>(c)].push_back(user);
  return out;
}

UserGraph coposting_graph(const ActionLog& log) {
  UserGraph g;
  for (const auto& u : log.users()) g.add_node(u);
  std::map<std::string, std::vector<const ActionRecord*>> by_message;
  for (const auto& r : log.records()) by_message[r.message].push_back(&r);
  for (const auto& [_, posts] : by_message) {
    for (std::size_t x = 0; x < posts.size(); ++x) {
      for (std::size_t y = x + 1; y < posts.size(); ++y) {
        if (posts[x]->time != posts[y]->time) g.add_edge(posts[x]->user, posts[y]->user, 1.0);
      }
    }
  }
  return g;
}

UserGraph causal_weighted_graph(const UserGraph& base,
                                const std::map<std::string, CausalityVector>& features) {
  for (const auto& u : base.nodes()) {
    if (!features.contains(u)) throw InvalidArgument("no feature vector for user '" + u + "'");
  }
  UserGraph g;
  for (const auto& u : base.nodes()) g.add_node(u);
  for (const auto& e : base.edges()) {
    const double d = euclidean(features.at(e.a).x, features.at(e.b).x);
    g.add_edge(e.a, e.b, e.weight / (1.0 + d));
  }
  return g;
}

double modularity(const UserGraph& g, const Partition& p, double resolution) {
  std::unordered_map<std::string, int> comm;
  for (const auto& u : g.nodes()) {
    auto it = p.assignment.find(u);
    if (it == p.assignment.end()) throw InvalidArgument("partition does not assign '" + u + "'");
    comm.emplace(u, it->second);
  }
  const double m = g.total_weight();
  if (m == 0.0) return 0.0;
  std::unordered_map<int, double> internal;
  std::unordered_map<int, double> degree;
  for (const auto& e : g.edges()) {
    const int ca = comm.at(e.a);
    const int cb = comm.at(e.b);
    degree[ca] += e.weight;
    degree[cb] += e.weight;
    if (ca == cb) internal[ca] += e.weight;
  }
  // Sum over communities in id order for a reproducible result.
  std::map<int, std::pair<double, double>> per;
  for (const auto& [c, d] : degree) per[c].second = d;
  for (const auto& [c, w] : internal) per[c].first = w;
  double q = 0.0;
  for (const auto& [_, v] : per) {
    const double tot = v.second / (2.0 * m);
    q += v.first / m - resolution * tot * tot;
  }
  return q;
}

}  // namespace causalpsm
