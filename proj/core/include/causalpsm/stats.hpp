#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "causalpsm/community.hpp"
#include "causalpsm/decay.hpp"

namespace causalpsm {

/// Euclidean distances between causality vectors: v_a holds every unordered
/// same-community pair, v_b pairs each user with one random user from
/// another community.
struct DistanceSamples {
  std::vector<double> v_a;
  std::vector<double> v_b;
  std::uint64_t seed = 0;
};

/// Welch one-sided test of H0: mean(v_a) >= mean(v_b) against
/// H1: mean(v_a) < mean(v_b).
struct TTestReport {
  double t_stat = 0.0;
  double dof = 0.0;
  double p_value = 0.0;
  double alpha = 0.0;
  bool reject = false;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

/// Users are visited in sorted order; v_a pairs follow community id then
/// member order. Throws DataError with fewer than two communities and
/// InvalidArgument if a user lacks features or dimensions differ.
DistanceSamples distance_samples(const Partition& partition,
                                 const std::map<std::string, CausalityVector>& features,
                                 std::uint64_t seed);

/// Throws InvalidArgument if either sample has fewer than two values and
/// DataError if both samples are constant and equal.
TTestReport welch_ttest_less(const std::vector<double>& v_a, const std::vector<double>& v_b,
                             double alpha);

/// P(T <= x) for Student's t with `dof` degrees of freedom.
double student_t_cdf(double x, double dof);

/// Regularized incomplete beta I_x(a, b) by continued fraction. Throws
/// Error if the fraction has not converged after 300 iterations.
double regularized_incomplete_beta(double x, double a, double b);

}  // namespace causalpsm
