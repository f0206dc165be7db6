#pragma once

#include <string>

#include "copoly/core.hpp"

namespace copoly {

enum class LawKind { power, srw };

/// Serializable description of an inter-arrival law: {kind, alpha, n_max}.
struct LawSpec {
  LawKind kind = LawKind::power;
  double alpha = 0.5;
  Index n_max = 1 << 16;
};

std::string to_string(LawKind kind);
LawKind law_kind_from_string(const std::string& name);

/// Heavy-tailed inter-arrival distribution K(n) ~ C_K n^{-(1+alpha)}.
///
/// Values are stored for 1 <= n <= n_max. Beyond the stored range both the
/// mass function and the tail are evaluated in closed form, so that
/// sum_{n <= n_max} K(n) + tail(n_max + 1) == 1 and no mass is dropped:
///  - power law: K(n) = c n^{-(1+alpha)} on all of N, tail via Hurwitz zeta;
///  - SRW first return: tail(2m+1) = tail(2m+2) = C(2m, m) 4^{-m}.
class InterArrivalLaw {
 public:
  InterArrivalLaw() = default;

  LawKind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double c_k() const { return c_k_; }
  int period() const { return period_; }
  Index n_max() const { return n_max_; }
  LawSpec spec() const { return {kind_, alpha_, n_max_}; }

  /// K(n); index 0 holds 0.
  const Vector& pmf() const { return pmf_; }

  /// K(n) for any n >= 0, closed form beyond n_max.
  double operator()(Index n) const;

  /// sum_{m >= n} K(m) for n >= 1.
  double tail(Index n) const;

  bool reachable(Index n) const { return period_ == 1 || n % 2 == 0; }

 private:
  friend InterArrivalLaw make_power_law(double alpha, Index n_max);
  friend InterArrivalLaw make_srw_law(Index n_max);

  double analytic_pmf(Index n) const;
  double analytic_tail(Index n) const;

  LawKind kind_ = LawKind::power;
  double alpha_ = 0.0;
  double c_k_ = 0.0;
  int period_ = 1;
  Index n_max_ = 0;
  Vector pmf_;
  Vector tail_;  // tail_(n) for n = 1 .. n_max + 1
};

InterArrivalLaw make_power_law(double alpha, Index n_max);
InterArrivalLaw make_srw_law(Index n_max);
InterArrivalLaw make_law(const LawSpec& spec);

/// P(2m is a return time of the simple random walk) = C(2m, m) 4^{-m}.
double srw_return_probability(Index m);

/// Solves x(0) = 1, x(m) = sum_{j<m} x(j) a(m - j) for m = 1..n.
/// kernel(0) is ignored; kernel must have at least n + 1 entries.
template <typename Scalar>
VectorX<Scalar> renewal_convolve(const Eigen::Ref<const VectorX<Scalar>>& kernel, Index n) {
  require(n >= 0 && kernel.size() > n, "renewal_convolve: kernel shorter than n");
  VectorX<Scalar> x = VectorX<Scalar>::Zero(n + 1);
  if (n == 0) {
    x(0) = Scalar(1);
    return x;
  }
  // rev(t) = a(n - t) so that sum_j x(j) a(m - j) is a contiguous dot product.
  VectorX<Scalar> rev = kernel.segment(1, n).reverse();
  x(0) = Scalar(1);
  for (Index m = 1; m <= n; ++m) x(m) = x.head(m).dot(rev.segment(n - m, m));
  return x;
}

/// u(m) = P(m in tau) for m = 0..n.
Vector renewal_mass(const InterArrivalLaw& law, Index n);

/// Leading asymptotics of u(j): alpha sin(pi alpha) / (pi C_K) j^{alpha-1}
/// for alpha < 1, 1 / (C_K log j) for alpha = 1. Period-2 laws concentrate
/// the mass on even sites, which multiplies the form by period^2.
double doney_asymptote(const InterArrivalLaw& law, Index j);

/// u(j) divided by its asymptotic form.
double doney_ratio(const InterArrivalLaw& law, Index j);
double doney_ratio(const InterArrivalLaw& law, const Vector& u, Index j);

/// Homogeneous pinning sums P_xi(N) = sum_l xi^l K^{*l}(N) for N = 0..n.
Vector pinned_sum_table(const InterArrivalLaw& law, double xi, Index n);
double pinned_sum(const InterArrivalLaw& law, double xi, Index n);

inline double tail(const InterArrivalLaw& law, Index n) { return law.tail(n); }

}  // namespace copoly
