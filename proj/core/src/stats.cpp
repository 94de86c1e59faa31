#include "causalpsm/stats.hpp"

#include <cmath>
#include <limits>

#include "causalpsm/error.hpp"
#include "causalpsm/random.hpp"

namespace causalpsm {

namespace {

constexpr int kMaxFractionTerms = 300;
constexpr double kFractionEpsilon = 1e-14;
constexpr double kTiny = 1e-300;

double distance(const CausalityVector& a, const CausalityVector& b) {
  if (a.x.size() != b.x.size()) {
    throw InvalidArgument("feature dimension mismatch between '" + a.user + "' and '" + b.user +
                          "'");
  }
  double s = 0.0;
  for (std::size_t k = 0; k < a.x.size(); ++k) s += (a.x[k] - b.x[k]) * (a.x[k] - b.x[k]);
  return std::sqrt(s);
}

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_fraction(double x, double a, double b) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxFractionTerms; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kFractionEpsilon) return h;
  }
  throw Error("incomplete beta continued fraction did not converge");
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v, double mu) {
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument("incomplete beta needs a, b > 0");
  if (x < 0.0 || x > 1.0 || std::isnan(x)) throw InvalidArgument("incomplete beta needs x in [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The fraction converges fastest on the side of the mode.
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_fraction(x, a, b) / a;
  return 1.0 - front * beta_fraction(1.0 - x, b, a) / b;
}

double student_t_cdf(double x, double dof) {
  if (!(dof > 0.0)) throw InvalidArgument("student_t_cdf needs dof > 0");
  if (std::isnan(x)) throw InvalidArgument("student_t_cdf of NaN");
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  if (x == 0.0) return 0.5;
  // P(|T| > |x|) = I_{dof/(dof+x^2)}(dof/2, 1/2)
  const double tail = 0.5 * regularized_incomplete_beta(dof / (dof + x * x), 0.5 * dof, 0.5);
  return x < 0.0 ? tail : 1.0 - tail;
}

TTestReport welch_ttest_less(const std::vector<double>& v_a, const std::vector<double>& v_b,
                             double alpha) {
  if (v_a.size() < 2 || v_b.size() < 2) {
    throw InvalidArgument("t-test needs at least two values per sample");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  const double na = static_cast<double>(v_a.size());
  const double nb = static_cast<double>(v_b.size());
  const double ma = mean(v_a);
  const double mb = mean(v_b);
  const double qa = sample_variance(v_a, ma) / na;
  const double qb = sample_variance(v_b, mb) / nb;

  TTestReport r;
  r.alpha = alpha;
  r.n_a = v_a.size();
  r.n_b = v_b.size();
  const double se2 = qa + qb;
  if (se2 == 0.0) {
    if (ma == mb) throw DataError("t-test undefined: both samples constant and equal");
    // Zero spread with distinct means: the ordering is certain.
    r.t_stat = ma < mb ? -std::numeric_limits<double>::infinity()
                       : std::numeric_limits<double>::infinity();
    r.dof = na + nb - 2.0;
  } else {
    r.t_stat = (ma - mb) / std::sqrt(se2);
    r.dof = se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
  }
  r.p_value = student_t_cdf(r.t_stat, r.dof);
  r.reject = r.p_value < alpha;
  return r;
}

DistanceSamples distance_samples(const Partition& partition,
                                 const std::map<std::string, CausalityVector>& features,
                                 std::uint64_t seed) {
  if (partition.community_count < 2) {
    throw DataError("intra/inter-community test needs at least two communities, got " +
                    std::to_string(partition.community_count));
  }
  auto feat = [&](const std::string& u) -> const CausalityVector& {
    auto it = features.find(u);
    if (it == features.end()) throw InvalidArgument("no feature vector for user '" + u + "'");
    return it->second;
  };

  DistanceSamples s;
  s.seed = seed;
  const auto groups = partition.communities();
  for (const auto& members : groups) {
    for (std::size_t x = 0; x < members.size(); ++x) {
      for (std::size_t y = x + 1; y < members.size(); ++y) {
        s.v_a.push_back(distance(feat(members[x]), feat(members[y])));
      }
    }
  }

  const std::size_t n = partition.assignment.size();
  Rng rng(seed);
  for (const auto& [user, c] : partition.assignment) {
    const std::size_t outside = n - groups[static_cast<std::size_t>(c)].size();
    // Pick the k-th user outside c by walking the communities in id order.
    std::size_t k = rng.index(outside);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (static_cast<int>(g) == c) continue;
      if (k < groups[g].size()) {
        s.v_b.push_back(distance(feat(user), feat(groups[g][k])));
        break;
      }
      k -= groups[g].size();
    }
  }
  return s;
}

}  // namespace causalpsm
