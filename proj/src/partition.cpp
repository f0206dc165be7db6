#include "copoly/partition.hpp"

#include <numbers>

#include "copoly/parallel.hpp"

namespace copoly {

namespace {

constexpr double kLog2 = std::numbers::ln2;
// Stored scaled values stay within exp(+-kRescale) of their reference.
constexpr double kRescale = 256.0;

// Plain vector v(j) = exp(x(j) - ref), with ref raised lazily.
struct ScaledSeries {
  Vector v;
  double ref;

  ScaledSeries(Index n, double first) : v(Vector::Zero(n + 1)), ref(first) { v(0) = 1.0; }

  void store(Index m, double x) {
    if (x == kNegInf) return;
    if (x > ref + kRescale) {
      v.head(m) *= std::exp(ref - x);
      ref = x;
    }
    v(m) = std::exp(x - ref);
  }

  double log_dot(const Vector& rev, Index n, Index m) const {
    const double s = v.head(m).dot(rev.segment(n - m, m));
    return s > 0.0 ? ref + std::log(s) : kNegInf;
  }
};

void require_reachable(const InterArrivalLaw& law, Index n) {
  require(n >= 0 && n <= law.n_max(), "partition: size exceeds law truncation");
  require(law.reachable(n), "partition: odd system size under a period-2 law");
}

}  // namespace

void validate(const ModelParams& p) {
  require(p.lambda >= 0.0 && std::isfinite(p.lambda), "lambda must be >= 0");
  require(p.h >= 0.0 && std::isfinite(p.h), "h must be >= 0");
  require(p.gamma > 0.0 && p.gamma <= 1.0, "gamma must lie in (0, 1]");
}

double phi(Index len, double omega_sum, const ModelParams& params) {
  if (len == 0) return 1.0;
  return 0.5 * (1.0 + std::exp(-2.0 * params.lambda * (params.h * double(len) + omega_sum)));
}

double log_phi(Index len, double omega_sum, const ModelParams& params) {
  if (len == 0) return 0.0;
  return log_half_one_plus_exp(-2.0 * params.lambda * (params.h * double(len) + omega_sum));
}

Vector quenched_potential(const DisorderSample& s, const ModelParams& params, Index n) {
  require(n >= 0 && n <= s.size(), "quenched_potential: n exceeds disorder length");
  Vector g(n + 1);
  for (Index m = 0; m <= n; ++m)
    g(m) = -2.0 * params.lambda * (params.h * double(m) + s.prefix(m));
  return g;
}

Vector log_weighted_renewal(const InterArrivalLaw& law, const Eigen::Ref<const Vector>& potential) {
  const Index n = potential.size() - 1;
  require(n >= 0 && n <= law.n_max(), "log_weighted_renewal: size exceeds law truncation");
  Vector log_z(n + 1);
  log_z(0) = 0.0;
  if (n == 0) return log_z;

  const Vector rev = law.pmf().segment(1, n).reverse();
  ScaledSeries plain(n, 0.0);
  ScaledSeries shifted(n, -potential(0));
  for (Index m = 1; m <= n; ++m) {
    const double a = plain.log_dot(rev, n, m);
    const double b = shifted.log_dot(rev, n, m);
    const double x = log_add(a, b == kNegInf ? kNegInf : b + potential(m)) - kLog2;
    log_z(m) = x;
    plain.store(m, x);
    shifted.store(m, x == kNegInf ? kNegInf : x - potential(m));
  }
  return log_z;
}

Vector log_rate_renewal(const InterArrivalLaw& law, double rate, Index n) {
  require(n >= 0 && n <= law.n_max(), "log_rate_renewal: size exceeds law truncation");
  if (rate > 0.0) {
    const Vector g = rate * Vector::LinSpaced(n + 1, 0.0, double(n));
    return log_weighted_renewal(law, g);
  }
  // Non-positive rate: the folded kernel K(n) (1 + e^{rate n}) / 2 <= K(n)
  // keeps every value in [0, 1].
  Vector kernel(n + 1);
  kernel(0) = 0.0;
  for (Index g = 1; g <= n; ++g) kernel(g) = law.pmf()(g) * 0.5 * (1.0 + std::exp(rate * double(g)));
  return renewal_convolve<double>(kernel, n).array().log();
}

LogPartitionTable quenched_log_z(const InterArrivalLaw& law, const DisorderSample& s,
                                 const ModelParams& params, Index n) {
  validate(params);
  require_reachable(law, n);
  return {TableKind::quenched, log_weighted_renewal(law, quenched_potential(s, params, n)), params};
}

double srw_path_log_z(const DisorderSample& s, const ModelParams& params, Index n) {
  validate(params);
  require(n >= 0 && n % 2 == 0, "srw_path_log_z: n must be even");
  require(n <= s.size(), "srw_path_log_z: n exceeds disorder length");
  if (n == 0) return 0.0;
  // Slot n + y holds height y != 0; zero_pos / zero_neg hold height 0 reached
  // from above / below.
  const Index width = 2 * n + 1;
  Vector p = Vector::Zero(width), next(width);
  double zero_pos = 1.0, zero_neg = 0.0, log_scale = 0.0;
  for (Index i = 1; i <= n; ++i) {
    const double below = 0.5 * std::exp(-2.0 * params.lambda * (s.omega(i) + params.h));
    const double above = 0.5;
    next.setZero();
    double next_pos = 0.0, next_neg = 0.0;
    const double from_zero = zero_pos + zero_neg;
    next(n + 1) += above * from_zero;
    next(n - 1) += below * from_zero;
    for (Index y = 1; y < n; ++y) {
      const double up = p(n + y), down = p(n - y);
      if (up != 0.0) {
        next(n + y + 1) += above * up;
        if (y == 1) next_pos += above * up;
        else next(n + y - 1) += above * up;
      }
      if (down != 0.0) {
        next(n - y - 1) += below * down;
        if (y == 1) next_neg += below * down;
        else next(n - y + 1) += below * down;
      }
    }
    const double total = next.sum() + next_pos + next_neg;
    if (total <= 0.0) return kNegInf;
    p = next / total;
    zero_pos = next_pos / total;
    zero_neg = next_neg / total;
    log_scale += std::log(total);
  }
  const double z = zero_pos + zero_neg;
  return z > 0.0 ? log_scale + std::log(z) : kNegInf;
}

LogPartitionTable annealed_log_z(const InterArrivalLaw& law, const ModelParams& params, Index n) {
  validate(params);
  require_reachable(law, n);
  const double rate = 2.0 * params.lambda * (params.lambda - params.h);
  return {TableKind::annealed, log_rate_renewal(law, rate, n), params};
}

double tilted_rate(double lambda, double rho, Index k) {
  require(k >= 1, "tilted_rate: k must be >= 1");
  return 2.0 * lambda * lambda * (1.0 - rho) - 2.0 * lambda / std::sqrt(double(k));
}

TiltedU tilted_u(const InterArrivalLaw& law, double lambda, double rho, Index k, Index n) {
  require(lambda >= 0.0, "tilted_u: lambda must be >= 0");
  require(n >= 0 && n <= law.n_max(), "tilted_u: n exceeds law truncation");
  TiltedU out;
  out.k = k;
  out.rate = tilted_rate(lambda, rho, k);
  out.values = log_rate_renewal(law, out.rate, n).array().exp();
  return out;
}

Vector replica_log_z(const InterArrivalLaw& law, const ModelParams& params, Index n,
                     Index replicas, std::uint64_t seed) {
  validate(params);
  require_reachable(law, n);
  require(replicas >= 1, "replica_log_z: need at least one replica");
  Vector out(replicas);
  parallel_for(replicas, [&](Index r) {
    const DisorderSample s = sample(replica_seed(seed, std::uint64_t(r)), std::max<Index>(n, 1));
    out(r) = log_weighted_renewal(law, quenched_potential(s, params, n))(n);
  });
  return out;
}

MCEstimate fractional_moment(const InterArrivalLaw& law, const ModelParams& params, Index n,
                             Index replicas, std::uint64_t seed) {
  require(replicas >= 2, "fractional_moment: need at least two replicas");
  const Vector v = params.gamma * replica_log_z(law, params, n, replicas, seed).array();
  const double shift = v.maxCoeff();
  const Eigen::ArrayXd x = (v.array() - shift).exp();
  const double mean = x.mean();
  const double var = (x - mean).square().sum() / double(replicas - 1);
  const double scale = std::exp(shift);
  return {scale * mean, scale * std::sqrt(var / double(replicas)), replicas, seed};
}

}  // namespace copoly
