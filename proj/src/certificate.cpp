#include "copoly/certificate.hpp"

#include <algorithm>
#include <numbers>

namespace copoly {

Index block_scale_k(double lambda, double rho) {
  require(lambda > 0.0, "block_scale_k: lambda must be positive");
  require(rho < 1.0, "block_scale_k: rho must be < 1");
  const double k = std::floor(1.0 / (lambda * lambda * (1.0 - rho)));
  require(k < 9e15, "block_scale_k: k overflows");
  return Index(k);
}

double inverse_annealed_scale(double lambda, double rho) {
  require(lambda > 0.0 && rho < 1.0, "inverse_annealed_scale: need lambda > 0, rho < 1");
  return 2.0 / (2.0 * lambda * (lambda - rho * lambda));
}

double y_scale(Index k, double c_k, double alpha) {
  require(k >= 2, "y_scale: k must be >= 2");
  const double kk = double(k);
  if (alpha < 1.0) return std::pow(kk, alpha) / c_k;
  if (alpha == 1.0) return 2.0 * kk / (c_k * std::log(kk));
  return kk;
}

Cond1Result check_cond1(const Vector& u_tilted, Index k, double y_value, double eps) {
  require(k >= 1 && u_tilted.size() >= k, "check_cond1: U must cover 0..k-1");
  Cond1Result r;
  r.lhs = u_tilted.head(k).sum();
  r.bound = eps * y_value;
  r.pass = r.lhs <= r.bound;
  r.margin = r.bound - r.lhs;
  return r;
}

namespace {

double cond2_lhs(const Vector& u, const InterArrivalLaw& law, Index k) {
  long double acc = 0.0L;
  for (Index j = 0; j < k; ++j) acc += static_cast<long double>(u(j)) * law.tail(k - j);
  return double(acc);
}

}  // namespace

Cond2Result check_cond2(const Vector& u_tilted, const InterArrivalLaw& law, Index k, double eps) {
  require(k >= 1 && u_tilted.size() >= k, "check_cond2: U must cover 0..k-1");
  Cond2Result r;
  r.lhs = cond2_lhs(u_tilted, law, k);
  // U itself carries O(k) roundings; allow for them so U = u, eps = 1 passes.
  const double rounding = 8.0 * double(k) * 0x1p-53 * r.lhs;
  r.pass = r.lhs <= eps + rounding;
  r.margin = eps - r.lhs;
  return r;
}

ZetaBounds zeta_bounds(double s, Index terms) {
  require(s > 1.0, "zeta_bounds: the series diverges for s <= 1");
  require(terms >= 1, "zeta_bounds: need at least one term");
  double partial = 0.0;
  for (Index n = terms; n >= 1; --n) partial += std::pow(double(n), -s);
  const double m = double(terms);
  ZetaBounds b;
  b.lower = partial + std::pow(m + 1.0, 1.0 - s) / (s - 1.0);
  const double rounding = 1.0 + 4.0 * (m + 8.0) * 0x1p-53;
  b.upper = (partial + std::pow(m, 1.0 - s) / (s - 1.0)) * rounding;
  return b;
}

double xi_value(double alpha, double gamma, double eps) {
  require(gamma > 0.0 && gamma < 1.0, "xi_value: gamma must lie in (0, 1)");
  require(eps >= 0.0, "xi_value: eps must be >= 0");
  const double s = (1.0 + alpha) * gamma;
  require(s > 1.0, "xi_value: (1 + alpha) gamma <= 1, the series diverges");
  if (eps == 0.0) return 0.0;
  const double prefactor =
      std::pow(3.0, gamma * (3.0 + 2.0 * alpha)) * 2.0 * std::exp(gamma / (1.0 - gamma));
  return prefactor * std::pow(eps, gamma) * zeta_bounds(s).upper;
}

CertificateReport certify(double alpha, double gamma, double rho, double lambda,
                          const InterArrivalLaw& law, const CertifyOptions& options) {
  require(std::abs(law.alpha() - alpha) < 1e-12, "certify: law exponent does not match alpha");
  CertificateReport rep;
  rep.alpha = alpha;
  rep.gamma = gamma;
  rep.rho = rho;
  rep.lambda = lambda;
  auto& st = rep.structural;
  st.gamma_range = gamma > 1.0 / (1.0 + alpha) && gamma < 1.0;
  st.rho_range = gamma < rho && rho < 1.0;
  st.lambda_positive = lambda > 0.0;
  st.sqrt_condition = 2.0 * std::sqrt(std::max(0.0, 1.0 - rho)) < 1.0;
  if (!st.gamma_range || !st.rho_range || !st.lambda_positive) return rep;

  rep.k = block_scale_k(lambda, rho);
  st.k_large = rep.k >= options.k_min;
  if (rep.k < 2) return rep;
  rep.tilt_rate = tilted_rate(lambda, rho, rep.k);
  st.tilt_rate_nonpositive = rep.tilt_rate <= 0.0;
  rep.y_value = y_scale(rep.k, law.c_k(), alpha);
  rep.evaluated = true;

  if (rep.k > options.k_budget || rep.k - 1 > law.n_max()) {
    // U(0) = 1 and U >= 0 give eps1 >= 1 / Y and eps2 >= tail(k).
    rep.lhs1 = 1.0;
    rep.eps1 = 1.0 / rep.y_value;
    rep.lhs2 = rep.eps2 = law.tail(rep.k);
    rep.eps_achieved = std::max(rep.eps1, rep.eps2);
    rep.xi = xi_value(alpha, gamma, rep.eps_achieved);
    if (rep.xi < 1.0)
      throw ResourceLimit("certify: k = " + std::to_string(rep.k) +
                          " exceeds the budget and the lower bounds do not decide");
    rep.decided_by = "lower_bound";
    rep.pass = false;
    return rep;
  }

  const TiltedU u = tilted_u(law, lambda, rho, rep.k, rep.k - 1);
  rep.lhs1 = u.values.sum();
  rep.eps1 = rep.lhs1 / rep.y_value;
  rep.lhs2 = rep.eps2 = cond2_lhs(u.values, law, rep.k);
  rep.eps_achieved = std::max(rep.eps1, rep.eps2);
  rep.xi = xi_value(alpha, gamma, rep.eps_achieved);
  rep.decided_by = "dp";
  rep.pass = st.all() && rep.xi < 1.0;
  return rep;
}

namespace {

struct RhoSearch {
  double alpha;
  const InterArrivalLaw& law;
  const RhoSearchOptions& opt;
  std::vector<RhoTraceEntry>& trace;

  bool passes(double gamma, double lambda, double rho, const char* phase) {
    RhoTraceEntry e{gamma, lambda, rho, 0, 0.0, 0.0, false, "resource_limit", phase};
    try {
      const CertificateReport rep = certify(alpha, gamma, rho, lambda, law, opt.certify);
      e.k = rep.k;
      e.eps_achieved = rep.eps_achieved;
      e.xi = rep.xi;
      e.pass = rep.pass;
      e.decided_by = rep.decided_by;
    } catch (const ResourceLimit&) {
      // Undecided within the budget: never counted as a pass.
    }
    trace.push_back(e);
    return e.pass;
  }
};

}  // namespace

RhoSearchResult optimize_rho(double alpha, const InterArrivalLaw& law,
                             const std::vector<double>& lambda_grid,
                             const std::vector<double>& gamma_grid,
                             const RhoSearchOptions& options) {
  require(!lambda_grid.empty() && !gamma_grid.empty(), "optimize_rho: empty grid");
  require(options.tol > 0.0 && options.tol < 1.0, "optimize_rho: tol must lie in (0, 1)");
  for (double l : lambda_grid) require(l > 0.0, "optimize_rho: lambda grid must be positive");

  RhoSearchResult res;
  res.alpha = alpha;
  res.lambda_grid = lambda_grid;
  res.gamma_grid = gamma_grid;
  RhoSearch search{alpha, law, options, res.trace};
  const double top = 1.0 - options.tol;

  for (double gamma : gamma_grid) {
    GammaResult g;
    g.gamma = gamma;
    if (!(gamma > 1.0 / (1.0 + alpha) && gamma < 1.0)) {
      g.note = "gamma outside (1/(1+alpha), 1)";
      g.rho_per_lambda.assign(lambda_grid.size(), std::nullopt);
      res.per_gamma.push_back(std::move(g));
      continue;
    }
    bool all_found = true;
    for (double lambda : lambda_grid) {
      if (gamma >= top || !search.passes(gamma, lambda, top, "top")) {
        g.rho_per_lambda.push_back(std::nullopt);
        all_found = false;
        for (Index p = 1; p <= options.scan_points; ++p) {
          const double rho = gamma + (top - gamma) * double(p) / double(options.scan_points + 1);
          search.passes(gamma, lambda, rho, "scan");
        }
        continue;
      }
      const double star = bisect_threshold(
          [&](double rho) { return search.passes(gamma, lambda, rho, "bisect"); }, gamma, top,
          options.tol);
      g.rho_per_lambda.push_back(star);
    }
    if (!all_found) {
      g.note = "no certificate at this grid";
      res.per_gamma.push_back(std::move(g));
      continue;
    }
    // Passing at every lambda of the grid: the largest per-lambda threshold.
    double star = gamma;
    for (const auto& r : g.rho_per_lambda) star = std::max(star, *r);
    bool ok = true;
    for (double lambda : lambda_grid) ok = search.passes(gamma, lambda, star, "verify") && ok;
    bool below_fails = false;
    const double below = star - options.tol;
    if (below <= gamma) {
      below_fails = true;
    } else {
      for (double lambda : lambda_grid)
        below_fails = !search.passes(gamma, lambda, below, "verify") || below_fails;
    }
    g.bracket_verified = ok && below_fails;
    g.rho_star = star;
    if (!g.bracket_verified) g.note = "bisection bracket not verified (non-monotone pass region)";
    // Smaller lambda must not need a larger rho.
    std::vector<std::size_t> order(lambda_grid.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return lambda_grid[a] > lambda_grid[b]; });
    for (std::size_t i = 1; i < order.size(); ++i)
      if (*g.rho_per_lambda[order[i]] > *g.rho_per_lambda[order[i - 1]] + options.tol)
        g.lambda_trend_violation = true;
    res.per_gamma.push_back(std::move(g));
  }

  for (const auto& g : res.per_gamma)
    if (g.rho_star && g.bracket_verified)
      res.rho_alpha = res.rho_alpha ? std::min(*res.rho_alpha, *g.rho_star) : *g.rho_star;
  if (res.rho_alpha) res.sanity_floor_ok = *res.rho_alpha >= 1.0 / (1.0 + alpha);
  return res;
}

}  // namespace copoly
