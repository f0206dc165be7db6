#include "copoly/estimator.hpp"

#include <cmath>

namespace copoly {

FreeEnergyEstimate quenched_free_energy(const InterArrivalLaw& law, const ModelParams& params,
                                        Index n, Index replicas, std::uint64_t seed) {
  require(replicas >= 2, "quenched_free_energy: need at least two replicas");
  require(n >= 1, "quenched_free_energy: n must be >= 1");
  const Vector f = replica_log_z(law, params, n, replicas, seed) / double(n);
  FreeEnergyEstimate est;
  est.value = f.mean();
  const double var = (f.array() - est.value).square().sum() / double(replicas - 1);
  est.std_error = std::sqrt(var / double(replicas));
  est.n = n;
  est.replicas = replicas;
  est.seed = seed;
  est.params = params;
  return est;
}

double annealed_free_energy(double lambda, double h) {
  require(lambda >= 0.0 && h >= 0.0, "annealed_free_energy: need lambda, h >= 0");
  return h < lambda ? 2.0 * lambda * (lambda - h) : 0.0;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::localized: return "localized";
    case Verdict::delocalized: return "delocalized";
    default: return "indeterminate";
  }
}

CriticalHResult critical_h(const InterArrivalLaw& law, double lambda, Index n,
                           const CriticalHOptions& options) {
  require(lambda >= 0.0, "critical_h: lambda must be >= 0");
  require(options.tol > 0.0, "critical_h: tol must be positive");
  CriticalHResult res;
  res.lambda = lambda;
  res.n = n;
  res.bracket_lo = 0.0;
  res.bracket_hi = lambda;
  if (lambda == 0.0) {
    res.h_hat = 0.0;
    return res;
  }

  const auto estimate = [&](double h, Index size) {
    return quenched_free_energy(law, {lambda, h, 1.0}, size, options.replicas, options.seed);
  };
  if (options.threshold) {
    res.threshold = *options.threshold;
  } else {
    res.threshold = 10.0 * estimate(0.5 * lambda, n).std_error;
  }

  const auto classify = [&](double h) {
    Index size = n;
    for (Index step = 0;; ++step) {
      const FreeEnergyEstimate est = estimate(h, size);
      require(res.threshold > est.std_error,
              "critical_h: threshold is not above the statistical error at this size");
      CriticalHStep rec{h, size, est.value, est.std_error, Verdict::indeterminate};
      if (est.value > res.threshold + 3.0 * est.std_error) rec.verdict = Verdict::localized;
      else if (est.value < res.threshold - 3.0 * est.std_error) rec.verdict = Verdict::delocalized;
      res.trace.push_back(rec);
      if (rec.verdict != Verdict::indeterminate || step == options.max_refinements) return rec.verdict;
      size *= 2;
    }
  };

  while (res.bracket_hi - res.bracket_lo > options.tol) {
    const double mid = 0.5 * (res.bracket_lo + res.bracket_hi);
    const Verdict v = classify(mid);
    if (v == Verdict::localized) res.bracket_lo = mid;
    else if (v == Verdict::delocalized) res.bracket_hi = mid;
    else return res;
  }
  res.h_hat = 0.5 * (res.bracket_lo + res.bracket_hi);
  return res;
}

std::vector<SlopeRow> slope_table(const InterArrivalLaw& law, const std::vector<double>& lambdas,
                                  Index n, const CriticalHOptions& options) {
  std::vector<SlopeRow> rows;
  rows.reserve(lambdas.size());
  for (double lambda : lambdas) {
    require(lambda > 0.0, "slope_table: lambdas must be positive");
    CriticalHOptions opt = options;
    opt.tol = options.tol * lambda;
    const CriticalHResult r = critical_h(law, lambda, n, opt);
    rows.push_back({lambda, r.h_hat, r.bracket_lo, r.bracket_hi});
  }
  return rows;
}

double excursion_expectation(const InterArrivalLaw& law, double q, Index n) {
  require(q >= 0.0, "excursion_expectation: q must be >= 0");
  require(n >= 1 && n <= law.n_max(), "excursion_expectation: n outside the law range");
  require(law.reachable(n), "excursion_expectation: u(n) = 0 for odd n under a period-2 law");
  const Vector log_v = log_rate_renewal(law, -q / double(n), n);
  const Vector u = renewal_mass(law, n);
  return std::exp(log_v(n) - std::log(u(n)));
}

double last_renewal_ratio(const InterArrivalLaw& law, const Vector& u, Index n, Index i) {
  require(n >= 2 && n % 2 == 0, "last_renewal_ratio: n must be even");
  require(i >= 0 && i <= n / 2, "last_renewal_ratio: need 0 <= i <= n/2");
  require(u.size() > n, "last_renewal_ratio: renewal mass too short");
  require(u(i) > 0.0, "last_renewal_ratio: conditioning on a null event (u(i) = 0)");
  double num = 0.0;
  for (Index j = n / 2 + 1; j <= n; ++j) num += law(j - i) * u(n - j);
  num /= u(n);
  const double den = law.tail(n / 2 + 1 - i);
  require(den > 0.0, "last_renewal_ratio: zero denominator");
  return num / den;
}

double last_renewal_ratio(const InterArrivalLaw& law, Index n, Index i) {
  return last_renewal_ratio(law, renewal_mass(law, n), n, i);
}

Vector srw_negative_time_law(Index n) {
  require(n >= 2 && n % 2 == 0, "srw_negative_time_law: n must be even and >= 2");
  require(n <= 512, "srw_negative_time_law: n above 512");
  // p[y][c]: height y (offset n), c negative-sign sites so far. Height 0 is
  // split by the sign of the excursion that ended there.
  const Index width = 2 * n + 1;
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(width, n + 1), next(width, n + 1);
  Vector zero_pos = Vector::Zero(n + 1), zero_neg = Vector::Zero(n + 1);
  zero_pos(0) = 1.0;
  for (Index step = 1; step <= n; ++step) {
    next.setZero();
    Vector next_pos = Vector::Zero(n + 1), next_neg = Vector::Zero(n + 1);
    for (Index c = 0; c < step; ++c) {
      const double z = zero_pos(c) + zero_neg(c);
      next(n + 1, c) += 0.5 * z;
      next(n - 1, c + 1) += 0.5 * z;
      for (Index y = 1; y < step; ++y) {
        const double up = p(n + y, c), down = p(n - y, c);
        next(n + y + 1, c) += 0.5 * up;
        if (y == 1) next_pos(c) += 0.5 * up;
        else next(n + y - 1, c) += 0.5 * up;
        next(n - y - 1, c + 1) += 0.5 * down;
        if (y == 1) next_neg(c + 1) += 0.5 * down;
        else next(n - y + 1, c + 1) += 0.5 * down;
      }
    }
    p.swap(next);
    zero_pos = next_pos;
    zero_neg = next_neg;
  }
  const Vector joint = zero_pos + zero_neg;
  const double total = joint.sum();
  Vector law(n / 2 + 1);
  for (Index t = 0; t <= n / 2; ++t) law(t) = joint(2 * t) / total;
  return law;
}

}  // namespace copoly
