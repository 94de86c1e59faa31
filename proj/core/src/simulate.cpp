#include "causalpsm/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "causalpsm/error.hpp"
#include "causalpsm/random.hpp"

namespace causalpsm {

namespace {

std::string id(char prefix, int n, int width) {
  std::string digits = std::to_string(n);
  if (static_cast<int>(digits.size()) < width) {
    digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  }
  return prefix + digits;
}

// Draws k distinct entries of `pool` with probability proportional to weight.
std::vector<int> weighted_sample(const std::vector<int>& pool, const std::vector<double>& weight,
                                 std::size_t k, Rng& rng) {
  std::vector<int> left = pool;
  std::vector<int> out;
  k = std::min(k, left.size());
  while (out.size() < k) {
    double total = 0.0;
    for (int u : left) total += weight[static_cast<std::size_t>(u)];
    double r = rng.uniform() * total;
    std::size_t pick = left.size() - 1;
    for (std::size_t x = 0; x < left.size(); ++x) {
      r -= weight[static_cast<std::size_t>(left[x])];
      if (r < 0.0) {
        pick = x;
        break;
      }
    }
    out.push_back(left[pick]);
    left.erase(left.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return out;
}

}  // namespace

void SimConfig::validate() const {
  auto fail = [](const std::string& what) { throw InvalidArgument("simulate: " + what); };
  if (n_users < 2) fail("n_users must be >= 2");
  if (!(psm_fraction > 0.0 && psm_fraction < 1.0)) fail("psm_fraction must lie in (0, 1)");
  if (n_messages < 1) fail("n_messages must be >= 1");
  if (!(viral_fraction > 0.0 && viral_fraction < 1.0)) fail("viral_fraction must lie in (0, 1)");
  if (theta < 2) fail("theta must be >= 2");
  if (horizon < 1) fail("horizon must be >= 1");
  if (!(mean_interarrival > 0.0)) fail("mean_interarrival must be > 0");
  if (!(extra_adopters >= 0.0)) fail("extra_adopters must be >= 0");
  if (!(psm_early_bias >= 1.0)) fail("psm_early_bias must be >= 1");
  if (psm_clique_size < 1) fail("psm_clique_size must be >= 1");
  if (interest_groups < 1) fail("interest_groups must be >= 1");
}

SimConfig SimConfig::biased() { return SimConfig{}; }

SimConfig SimConfig::null_model() {
  SimConfig c;
  c.psm_early_bias = 1.0;
  c.psm_clique_size = 1;
  return c;
}

SimResult generate(const SimConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);

  const int n_psm = std::clamp(
      static_cast<int>(std::lround(cfg.psm_fraction * cfg.n_users)), 1, cfg.n_users - 1);
  if (cfg.psm_clique_size > n_psm) {
    throw InvalidArgument("simulate: psm_clique_size " + std::to_string(cfg.psm_clique_size) +
                          " exceeds the " + std::to_string(n_psm) + " PSM users");
  }
  const int user_width = std::max(4, static_cast<int>(std::to_string(cfg.n_users - 1).size()));
  const int msg_width = std::max(5, static_cast<int>(std::to_string(cfg.n_messages - 1).size()));

  std::vector<int> order(static_cast<std::size_t>(cfg.n_users));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<int> psms(order.begin(), order.begin() + n_psm);
  std::vector<int> normals(order.begin() + n_psm, order.end());

  SimResult result;
  for (int u = 0; u < cfg.n_users; ++u) result.truth[id('u', u, user_width)] = Label::normal;
  for (int u : psms) result.truth[id('u', u, user_width)] = Label::psm;

  // Fixed-size cliques tiling the PSM list; the last one wraps around.
  const int c = cfg.psm_clique_size;
  const int n_cliques = (n_psm + c - 1) / c;
  std::vector<std::vector<int>> cliques(static_cast<std::size_t>(n_cliques));
  for (int k = 0; k < n_cliques; ++k) {
    for (int r = 0; r < c; ++r) {
      cliques[static_cast<std::size_t>(k)].push_back(psms[static_cast<std::size_t>((k * c + r) % n_psm)]);
    }
  }

  std::vector<double> popularity(static_cast<std::size_t>(cfg.n_users));
  for (auto& p : popularity) p = 0.1 + rng.exponential(1.0);

  // Interest groups partition all users round-robin over the shuffled order.
  const int n_groups = std::min(cfg.interest_groups, cfg.n_users);
  std::vector<std::vector<int>> groups(static_cast<std::size_t>(n_groups));
  for (std::size_t k = 0; k < order.size(); ++k) {
    groups[k % static_cast<std::size_t>(n_groups)].push_back(order[k]);
  }

  std::vector<int> messages(static_cast<std::size_t>(cfg.n_messages));
  std::iota(messages.begin(), messages.end(), 0);
  rng.shuffle(messages);
  const auto n_viral = static_cast<std::size_t>(std::max<long>(
      1, std::lround(cfg.viral_fraction * cfg.n_messages)));

  const double psm_mean = cfg.mean_interarrival / cfg.psm_early_bias;
  std::vector<ActionRecord> records;
  auto post = [&](int user, int message, double start, double offset) {
    records.push_back({id('u', user, user_width), id('m', message, msg_width),
                       static_cast<Timestamp>(std::floor(start + offset))});
  };

  std::vector<bool> viral(static_cast<std::size_t>(cfg.n_messages), false);
  for (std::size_t k = 0; k < n_viral && k < messages.size(); ++k) {
    viral[static_cast<std::size_t>(messages[k])] = true;
  }
  for (int m = 0; m < cfg.n_messages; ++m) {
    const double start = rng.uniform() * static_cast<double>(cfg.horizon);
    if (viral[static_cast<std::size_t>(m)]) {
      const auto& clique = cliques[rng.index(cliques.size())];
      for (int u : clique) post(u, m, start, rng.exponential(psm_mean));
      const int needed = std::max(0, cfg.theta - c);
      const int extra = static_cast<int>(std::floor(rng.exponential(cfg.extra_adopters + 0.5)));
      for (int u : weighted_sample(normals, popularity,
                                   static_cast<std::size_t>(needed + extra), rng)) {
        post(u, m, start, rng.exponential(cfg.mean_interarrival));
      }
    } else {
      const auto count = static_cast<std::size_t>(cfg.theta - 1);
      const auto& group = groups[rng.index(groups.size())];
      for (int u : weighted_sample(group, popularity, count, rng)) {
        post(u, m, start, rng.exponential(cfg.mean_interarrival));
      }
    }
  }
  result.log = ActionLog::from_records(std::move(records));
  return result;
}

}  // namespace causalpsm
