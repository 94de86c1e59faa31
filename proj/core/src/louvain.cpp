#include <algorithm>
#include <numeric>

#include "causalpsm/community.hpp"
#include "causalpsm/error.hpp"
#include "causalpsm/random.hpp"

namespace causalpsm {

namespace {

constexpr double kMinModularityGain = 1e-9;

// Working graph for one Louvain level. Aggregated levels carry self-loops
// holding the weight internal to each collapsed community.
struct LevelGraph {
  std::vector<std::vector<std::pair<int, double>>> adj;
  std::vector<double> self_loop;

  int size() const { return static_cast<int>(adj.size()); }

  double degree(int u) const {
    double k = 2.0 * self_loop[static_cast<std::size_t>(u)];
    for (const auto& [_, w] : adj[static_cast<std::size_t>(u)]) k += w;
    return k;
  }
};

LevelGraph from_user_graph(const UserGraph& g) {
  LevelGraph lg;
  lg.adj.resize(g.node_count());
  lg.self_loop.assign(g.node_count(), 0.0);
  for (const auto& e : g.edges()) {
    const int a = static_cast<int>(*g.index_of(e.a));
    const int b = static_cast<int>(*g.index_of(e.b));
    lg.adj[static_cast<std::size_t>(a)].emplace_back(b, e.weight);
    lg.adj[static_cast<std::size_t>(b)].emplace_back(a, e.weight);
  }
  return lg;
}

// Renumbers community labels densely in order of first appearance.
int compact(std::vector<int>& comm) {
  std::vector<int> remap(comm.size(), -1);
  int next = 0;
  for (int& c : comm) {
    auto& r = remap[static_cast<std::size_t>(c)];
    if (r < 0) r = next++;
    c = r;
  }
  return next;
}

LevelGraph aggregate(const LevelGraph& g, const std::vector<int>& comm, int count) {
  LevelGraph out;
  out.adj.resize(static_cast<std::size_t>(count));
  out.self_loop.assign(static_cast<std::size_t>(count), 0.0);
  std::vector<std::map<int, double>> acc(static_cast<std::size_t>(count));
  for (int u = 0; u < g.size(); ++u) {
    const int cu = comm[static_cast<std::size_t>(u)];
    out.self_loop[static_cast<std::size_t>(cu)] += g.self_loop[static_cast<std::size_t>(u)];
    for (const auto& [v, w] : g.adj[static_cast<std::size_t>(u)]) {
      if (v < u) continue;  // each undirected edge once
      const int cv = comm[static_cast<std::size_t>(v)];
      if (cu == cv) {
        out.self_loop[static_cast<std::size_t>(cu)] += w;
      } else {
        acc[static_cast<std::size_t>(cu)][cv] += w;
        acc[static_cast<std::size_t>(cv)][cu] += w;
      }
    }
  }
  for (int c = 0; c < count; ++c) {
    for (const auto& [d, w] : acc[static_cast<std::size_t>(c)]) {
      out.adj[static_cast<std::size_t>(c)].emplace_back(d, w);
    }
  }
  return out;
}

Partition to_partition(const UserGraph& g, const std::vector<int>& node_comm) {
  std::map<std::string, int> labels;
  for (std::size_t i = 0; i < g.node_count(); ++i) labels.emplace(g.nodes()[i], node_comm[i]);
  return Partition::from_labels(labels);
}

// One local-move phase. Returns true if any node changed community.
// `on_pass` runs after each sweep over the nodes.
template <typename OnPass>
bool local_moves(const LevelGraph& g, double m2, double resolution, Rng& rng,
                 std::vector<int>& comm, OnPass on_pass) {
  const int n = g.size();
  std::vector<double> k(static_cast<std::size_t>(n));
  std::vector<double> tot(static_cast<std::size_t>(n), 0.0);
  for (int u = 0; u < n; ++u) {
    k[static_cast<std::size_t>(u)] = g.degree(u);
    tot[static_cast<std::size_t>(comm[static_cast<std::size_t>(u)])] += k[static_cast<std::size_t>(u)];
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  std::vector<double> to_comm(static_cast<std::size_t>(n), 0.0);
  std::vector<int> touched;
  bool any_move = false;
  for (;;) {
    bool moved = false;
    for (int u : order) {
      const auto su = static_cast<std::size_t>(u);
      const int old_c = comm[su];
      const double ku = k[su];
      touched.clear();
      touched.push_back(old_c);
      for (const auto& [v, w] : g.adj[su]) {
        const int c = comm[static_cast<std::size_t>(v)];
        if (to_comm[static_cast<std::size_t>(c)] == 0.0 &&
            std::find(touched.begin(), touched.end(), c) == touched.end()) {
          touched.push_back(c);
        }
        to_comm[static_cast<std::size_t>(c)] += w;
      }
      tot[static_cast<std::size_t>(old_c)] -= ku;

      auto gain = [&](int c) {
        return to_comm[static_cast<std::size_t>(c)] -
               resolution * tot[static_cast<std::size_t>(c)] * ku / m2;
      };
      const double stay = gain(old_c);
      int best = old_c;
      double best_gain = stay;
      for (int c : touched) {
        const double gc = gain(c);
        if (gc > best_gain) {
          best_gain = gc;
          best = c;
        }
      }
      // Modularity change of the move is 2 * (best_gain - stay) / m2.
      if (best != old_c && 2.0 * (best_gain - stay) / m2 <= kMinModularityGain) best = old_c;

      tot[static_cast<std::size_t>(best)] += ku;
      comm[su] = best;
      if (best != old_c) moved = true;
      for (int c : touched) to_comm[static_cast<std::size_t>(c)] = 0.0;
    }
    on_pass();
    if (!moved) break;
    any_move = true;
  }
  return any_move;
}

}  // namespace

Partition louvain(const UserGraph& g, std::uint64_t seed, double resolution,
                  LouvainTrace* trace) {
  if (g.node_count() == 0) throw InvalidArgument("louvain on an empty graph");
  if (!(resolution > 0.0)) throw InvalidArgument("louvain resolution must be > 0");

  std::vector<int> node_comm(g.node_count());
  std::iota(node_comm.begin(), node_comm.end(), 0);
  const double m2 = 2.0 * g.total_weight();
  if (m2 == 0.0) return to_partition(g, node_comm);

  Rng rng(seed);
  LevelGraph level = from_user_graph(g);
  for (int depth = 0;; ++depth) {
    std::vector<int> comm(static_cast<std::size_t>(level.size()));
    std::iota(comm.begin(), comm.end(), 0);
    auto record_pass = [&] {
      if (!trace) return;
      std::vector<int> flat(node_comm.size());
      for (std::size_t i = 0; i < flat.size(); ++i) {
        flat[i] = comm[static_cast<std::size_t>(node_comm[i])];
      }
      trace->pass_modularity.push_back(modularity(g, to_partition(g, flat), resolution));
    };
    const bool improved = local_moves(level, m2, resolution, rng, comm, record_pass);
    if (trace) trace->levels = depth + 1;
    if (!improved) break;
    const int count = compact(comm);
    for (auto& c : node_comm) c = comm[static_cast<std::size_t>(c)];
    level = aggregate(level, comm, count);
  }
  return to_partition(g, node_comm);
}

}  // namespace causalpsm
