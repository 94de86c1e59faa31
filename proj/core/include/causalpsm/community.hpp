#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "causalpsm/action_log.hpp"
#include "causalpsm/decay.hpp"

namespace causalpsm {

struct Edge {
  std::string a;  // a < b
  std::string b;
  double weight = 0.0;
};

/// Weighted undirected graph over user ids, without self-loops.
///
/// Nodes are kept in sorted order and addressed by dense index; parallel
/// add_edge calls on the same pair accumulate weight.
class UserGraph {
 public:
  /// Adds a node if absent.
  void add_node(const std::string& user);
  /// Throws InvalidArgument on self-loops or non-positive weight.
  void add_edge(const std::string& a, const std::string& b, double weight);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<std::string>& nodes() const { return nodes_; }
  bool has_node(const std::string& user) const;
  std::optional<std::size_t> index_of(const std::string& user) const;

  /// Weight of {a, b}, 0 if absent. Symmetric.
  double weight(const std::string& a, const std::string& b) const;
  /// Edges with a < b, ordered by (a, b).
  std::vector<Edge> edges() const;
  double total_weight() const;

 private:
  std::vector<std::string> nodes_;
  std::map<std::pair<std::string, std::string>, double> edges_;
};

/// Community id per user; ids are dense from 0.
struct Partition {
  std::map<std::string, int> assignment;
  int community_count = 0;

  /// Renumbers arbitrary labels densely, in order of first appearance over
  /// the sorted user ids.
  static Partition from_labels(const std::map<std::string, int>& labels);
  /// Members of each community, sorted.
  std::vector<std::vector<std::string>> communities() const;
};

/// Edge {i, j} weighted by the number of messages both posted at different
/// times. Every user in the log is a node.
UserGraph coposting_graph(const ActionLog& log);

/// Same topology, weight / (1 + ||x_i - x_j||). Throws InvalidArgument naming
/// the first node without a feature vector.
UserGraph causal_weighted_graph(const UserGraph& base,
                                const std::map<std::string, CausalityVector>& features);

/// Newman weighted modularity. Throws InvalidArgument if some node of g is
/// unassigned.
double modularity(const UserGraph& g, const Partition& p, double resolution = 1.0);

struct LouvainTrace {
  /// Modularity of the original graph after every local-move pass.
  std::vector<double> pass_modularity;
  int levels = 0;
};

/// Louvain modularity optimization. Node visiting order is shuffled with
/// `seed`, so a fixed seed gives a fixed partition. Throws InvalidArgument on
/// an empty graph.
Partition louvain(const UserGraph& g, std::uint64_t seed, double resolution = 1.0,
                  LouvainTrace* trace = nullptr);

}  // namespace causalpsm
