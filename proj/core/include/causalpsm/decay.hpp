#pragma once

#include <map>
#include <string>
#include <vector>

#include "causalpsm/action_log.hpp"

namespace causalpsm {

/// Scoring interval [t0, t] cut into sliding windows of length delta.
struct WindowSpec {
  Timestamp t0 = 0;
  Timestamp t = 0;
  Timestamp delta = 0;

  /// Throws InvalidArgument unless t0 < t and 0 < delta <= t - t0.
  void validate() const;
};

struct DecayConfig {
  double sigma = 0.0;

  /// Throws InvalidArgument if sigma is negative or not finite.
  void validate() const;
};

/// Window ending at `end` (the t' of the window sequence) covering
/// [end - delta, end).
struct Window {
  Timestamp end = 0;
  TimeInterval interval;
};

struct CausalityVector {
  std::string user;
  std::vector<double> x;
  std::vector<std::string> feature_names;
};

/// t' = t0 + j*delta for j = 1, 2, ... while t' <= t, ascending.
std::vector<Window> windows(const WindowSpec& spec);

/// exp(-sigma * (t - t_prime)). Throws InvalidArgument if t_prime > t.
double decay_weight(const DecayConfig& cfg, Timestamp t, Timestamp t_prime);

/// Causality of `user` computed separately inside every window, with virality
/// re-evaluated on the window's sub-log. Same order as windows(spec).
std::vector<double> window_scores(const ActionLog& log, const ViralityConfig& cfg,
                                  const WindowSpec& spec, const std::string& user);

/// Decay-weighted mean of the per-window causality scores of `user`.
double decayed_causality(const ActionLog& log, const ViralityConfig& cfg, const WindowSpec& spec,
                         const DecayConfig& decay, const std::string& user);

/// [epsilon over [t0, t)] followed by one decayed score per sigma.
/// Throws InvalidArgument if sigmas is empty.
CausalityVector feature_vector(const ActionLog& log, const ViralityConfig& cfg,
                               const WindowSpec& spec, const std::vector<double>& sigmas,
                               const std::string& user);

/// feature_vector for every user in the log, sharing the per-window work.
std::map<std::string, CausalityVector> feature_vectors(const ActionLog& log,
                                                       const ViralityConfig& cfg,
                                                       const WindowSpec& spec,
                                                       const std::vector<double>& sigmas);

/// Rescales each dimension to zero mean and unit (population) standard
/// deviation across users. Constant dimensions become 0. Throws
/// InvalidArgument if the vectors disagree in dimension.
void standardize(std::map<std::string, CausalityVector>& features);

/// Labels for the entries of feature_vector's x.
std::vector<std::string> feature_names(const std::vector<double>& sigmas);

/// Default decay rates and window length (one day, in seconds).
std::vector<double> default_sigmas();
inline constexpr Timestamp kDefaultDelta = 86400;

}  // namespace causalpsm
