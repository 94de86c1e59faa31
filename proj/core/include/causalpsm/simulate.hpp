#pragma once

#include <cstdint>

#include "causalpsm/action_log.hpp"
#include "causalpsm/classify.hpp"

namespace causalpsm {

/// Synthetic action-log generator with planted PSM accounts.
///
/// PSM users are split into coordinated cliques of `psm_clique_size`. Every
/// viral message is seeded by one clique whose members adopt at exponential
/// inter-arrival times shrunk by `psm_early_bias`; normal users then adopt
/// with popularity-proportional choice on the unshrunk clock. Each non-viral
/// message gets `theta - 1` adopters from a single interest group.
struct SimConfig {
  int n_users = 200;
  double psm_fraction = 0.2;
  int n_messages = 500;
  double viral_fraction = 0.4;
  int theta = 5;
  /// Message start times are uniform in [0, horizon) seconds.
  Timestamp horizon = 30 * 86400;
  /// Mean inter-arrival time of adoptions within one cascade, in seconds.
  double mean_interarrival = 3600.0;
  /// Mean number of normal adopters of a viral message beyond those needed
  /// to reach theta.
  double extra_adopters = 1.0;
  /// Users are split into this many interest groups; the adopters of a
  /// non-viral message all come from one group.
  int interest_groups = 8;
  double psm_early_bias = 4.0;
  int psm_clique_size = 5;
  std::uint64_t seed = 7;

  /// Throws InvalidArgument on any out-of-range field.
  void validate() const;

  /// The configuration used for the planted-signal regression fixture.
  static SimConfig biased();
  /// Same population with the planted signal switched off (bias 1, clique 1).
  static SimConfig null_model();
};

struct SimResult {
  ActionLog log;
  LabelSet truth;
};

SimResult generate(const SimConfig& cfg);

}  // namespace causalpsm
