#include "copoly/renewal.hpp"

#include <numbers>

#include <unsupported/Eigen/SpecialFunctions>

namespace copoly {

std::string to_string(LawKind kind) { return kind == LawKind::power ? "power" : "srw"; }

LawKind law_kind_from_string(const std::string& name) {
  if (name == "power") return LawKind::power;
  if (name == "srw") return LawKind::srw;
  throw std::invalid_argument("unknown law kind '" + name + "' (expected power|srw)");
}

double srw_return_probability(Index m) {
  require(m >= 0, "srw_return_probability: negative index");
  if (m < 64) {
    double u = 1.0;
    for (Index i = 1; i <= m; ++i) u *= double(2 * i - 1) / double(2 * i);
    return u;
  }
  // Asymptotic expansion of Gamma(m + 1/2) / (sqrt(pi) Gamma(m + 1)); relative
  // error below 2e-16 for m >= 64.
  const double x = 1.0 / double(m);
  const double series =
      1.0 + x * (-1.0 / 8 + x * (1.0 / 128 + x * (5.0 / 1024 + x * (-21.0 / 32768 +
      x * (-399.0 / 262144 + x * (869.0 / 4194304))))));
  return series / std::sqrt(std::numbers::pi * double(m));
}

double InterArrivalLaw::analytic_pmf(Index n) const {
  if (n <= 0) return 0.0;
  if (kind_ == LawKind::power) return c_k_ * std::pow(double(n), -(1.0 + alpha_));
  if (n % 2 != 0) return 0.0;
  const Index m = n / 2;
  return srw_return_probability(m - 1) / double(2 * m);
}

double InterArrivalLaw::analytic_tail(Index n) const {
  if (n <= 1) return 1.0;
  if (kind_ == LawKind::power) return c_k_ * Eigen::numext::zeta(1.0 + alpha_, double(n));
  // First return after time n - 1 <=> no return up to 2 floor((n - 1) / 2).
  return srw_return_probability((n - 1) / 2);
}

double InterArrivalLaw::operator()(Index n) const {
  if (n >= 0 && n <= n_max_) return pmf_(n);
  return analytic_pmf(n);
}

double InterArrivalLaw::tail(Index n) const {
  require(n >= 1, "tail: n must be >= 1");
  if (n <= n_max_ + 1) return tail_(n);
  return analytic_tail(n);
}

namespace {

// tail(n) = tail(n + 1) + K(n), accumulated from the closed-form remainder.
Vector accumulate_tail(const Vector& pmf, Index n_max, double remainder) {
  Vector tail(n_max + 2);
  tail(0) = 1.0;
  tail(n_max + 1) = remainder;
  for (Index n = n_max; n >= 1; --n) tail(n) = tail(n + 1) + pmf(n);
  return tail;
}

}  // namespace

InterArrivalLaw make_power_law(double alpha, Index n_max) {
  require(alpha > 0.0 && std::isfinite(alpha), "make_power_law: alpha must be positive");
  require(n_max >= 2, "make_power_law: n_max must be at least 2");
  InterArrivalLaw law;
  law.kind_ = LawKind::power;
  law.alpha_ = alpha;
  law.period_ = 1;
  law.n_max_ = n_max;
  law.c_k_ = 1.0 / Eigen::numext::zeta(1.0 + alpha, 1.0);
  law.pmf_.resize(n_max + 1);
  law.pmf_(0) = 0.0;
  for (Index n = 1; n <= n_max; ++n) law.pmf_(n) = law.analytic_pmf(n);
  law.tail_ = accumulate_tail(law.pmf_, n_max, law.analytic_tail(n_max + 1));
  return law;
}

InterArrivalLaw make_srw_law(Index n_max) {
  require(n_max >= 4 && n_max % 2 == 0, "make_srw_law: n_max must be even and >= 4");
  InterArrivalLaw law;
  law.kind_ = LawKind::srw;
  law.alpha_ = 0.5;
  law.period_ = 2;
  law.n_max_ = n_max;
  law.c_k_ = std::sqrt(2.0 / std::numbers::pi);
  law.pmf_ = Vector::Zero(n_max + 1);
  double u = 1.0;  // u(2m - 2)
  for (Index m = 1; 2 * m <= n_max; ++m) {
    law.pmf_(2 * m) = u / double(2 * m);
    u *= double(2 * m - 1) / double(2 * m);
  }
  law.tail_ = accumulate_tail(law.pmf_, n_max, law.analytic_tail(n_max + 1));
  return law;
}

InterArrivalLaw make_law(const LawSpec& spec) {
  if (spec.kind == LawKind::srw) return make_srw_law(spec.n_max);
  return make_power_law(spec.alpha, spec.n_max);
}

Vector renewal_mass(const InterArrivalLaw& law, Index n) {
  require(n >= 0 && n <= law.n_max(), "renewal_mass: n exceeds law truncation");
  return renewal_convolve<double>(law.pmf(), n);
}

double doney_asymptote(const InterArrivalLaw& law, Index j) {
  const double alpha = law.alpha();
  require(alpha > 0.0 && alpha <= 1.0, "doney_asymptote: only 0 < alpha <= 1 is supported");
  require(j >= 2, "doney_asymptote: j must be >= 2");
  const double p2 = double(law.period()) * double(law.period());
  if (alpha == 1.0) return p2 / (law.c_k() * std::log(double(j)));
  return p2 * alpha * std::sin(std::numbers::pi * alpha) / (std::numbers::pi * law.c_k()) *
         std::pow(double(j), alpha - 1.0);
}

double doney_ratio(const InterArrivalLaw& law, const Vector& u, Index j) {
  require(j < u.size(), "doney_ratio: renewal mass too short");
  require(law.reachable(j), "doney_ratio: j unreachable under a period-2 law");
  return u(j) / doney_asymptote(law, j);
}

double doney_ratio(const InterArrivalLaw& law, Index j) {
  // Validate before running the O(j^2) convolution.
  doney_asymptote(law, j);
  return doney_ratio(law, renewal_mass(law, j), j);
}

Vector pinned_sum_table(const InterArrivalLaw& law, double xi, Index n) {
  require(xi >= 0.0 && xi <= 1.0, "pinned_sum: xi must lie in [0, 1]");
  require(n >= 0 && n <= law.n_max(), "pinned_sum: n exceeds law truncation");
  const Vector kernel = xi * law.pmf().head(n + 1);
  return renewal_convolve<double>(kernel, n);
}

double pinned_sum(const InterArrivalLaw& law, double xi, Index n) {
  return pinned_sum_table(law, xi, n)(n);
}

}  // namespace copoly
