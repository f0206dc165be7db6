#pragma once

#include <optional>
#include <string>
#include <vector>

#include "copoly/partition.hpp"

namespace copoly {

/// floor(1 / (lambda^2 (1 - rho))).
Index block_scale_k(double lambda, double rho);

/// 2 / annealed free energy at h = rho lambda; floor of it equals block_scale_k.
double inverse_annealed_scale(double lambda, double rho);

/// Y(k, C_K, alpha): k^alpha / C_K, 2k / (C_K log k) or k for alpha <, =, > 1.
double y_scale(Index k, double c_k, double alpha);

struct Cond1Result {
  double lhs = 0.0;    // sum_{j<k} U(j)
  double bound = 0.0;  // eps * Y
  bool pass = false;
  double margin = 0.0;  // bound - lhs
};

struct Cond2Result {
  double lhs = 0.0;  // sum_{j<k} sum_{n>=k} U(j) K(n - j)
  bool pass = false;
  double margin = 0.0;  // eps - lhs
};

Cond1Result check_cond1(const Vector& u_tilted, Index k, double y_value, double eps);

/// Uses the tail rewriting sum_{n>=k} K(n - j) = tail(k - j). The pass test
/// allows 8 k ulp of rounding in lhs.
Cond2Result check_cond2(const Vector& u_tilted, const InterArrivalLaw& law, Index k, double eps);

/// Bounds on sum_{n>=1} n^{-s}: partial sum to `terms` plus the integral
/// tail over [terms+1, inf) (lower) or [terms, inf) (upper). The upper value
/// is inflated by the worst-case rounding of the partial sum.
struct ZetaBounds {
  double lower = 0.0;
  double upper = 0.0;
};
ZetaBounds zeta_bounds(double s, Index terms = 1 << 20);

/// xi = 3^{gamma (3 + 2 alpha)} 2 e^{gamma / (1 - gamma)} eps^gamma zeta((1 + alpha) gamma),
/// evaluated with the upper zeta bound. Throws when (1 + alpha) gamma <= 1.
double xi_value(double alpha, double gamma, double eps);

struct CertifyOptions {
  Index k_min = 100;
  /// Largest k for which U is computed by the O(k^2) recursion.
  Index k_budget = Index(1) << 16;
};

struct StructuralFlags {
  bool gamma_range = false;  // 1/(1+alpha) < gamma < 1
  bool rho_range = false;    // gamma < rho < 1
  bool lambda_positive = false;
  bool sqrt_condition = false;  // 2 sqrt(1 - rho) < 1
  bool tilt_rate_nonpositive = false;
  bool k_large = false;  // k >= k_min

  bool all() const {
    return gamma_range && rho_range && lambda_positive && sqrt_condition &&
           tilt_rate_nonpositive && k_large;
  }
};

inline constexpr const char* kCertificateCaveat =
    "numerical certificate: the coupling threshold below which the sufficient conditions "
    "imply delocalization is not explicit, so a pass is evidence, not proof";

/// Outcome of the delocalization conditions at h = rho lambda.
///
/// `decided_by` is "none" when the ranges rule out any numeric work, "dp"
/// when U was computed, and "lower_bound" when k exceeds the budget and the
/// rigorous bounds eps1 >= 1/Y, eps2 >= tail(k) (from U(0) = 1) already force
/// xi >= 1. In the last case eps fields hold those lower bounds.
struct CertificateReport {
  double alpha = 0.0, gamma = 0.0, rho = 0.0, lambda = 0.0;
  Index k = 0;
  double tilt_rate = 0.0;
  StructuralFlags structural;
  bool evaluated = false;
  std::string decided_by = "none";
  double lhs1 = 0.0, y_value = 0.0, eps1 = 0.0;
  double lhs2 = 0.0, eps2 = 0.0;
  double eps_achieved = 0.0;
  double xi = 0.0;
  bool pass = false;
  std::string caveat = kCertificateCaveat;
};

CertificateReport certify(double alpha, double gamma, double rho, double lambda,
                          const InterArrivalLaw& law, const CertifyOptions& options = {});

struct RhoSearchOptions {
  double tol = 1e-3;
  CertifyOptions certify;
  /// Extra rho points per (gamma, lambda) logged when no certificate is found.
  Index scan_points = 6;
};

struct RhoTraceEntry {
  double gamma = 0.0, lambda = 0.0, rho = 0.0;
  Index k = 0;
  double eps_achieved = 0.0, xi = 0.0;
  bool pass = false;
  std::string decided_by;
  std::string phase;  // "top", "bisect", "verify" or "scan"
};

struct GammaResult {
  double gamma = 0.0;
  std::optional<double> rho_star;
  /// Smallest passing rho for each lambda of the grid (same order).
  std::vector<std::optional<double>> rho_per_lambda;
  /// Checked bracket: pass at rho_star, fail at rho_star - tol.
  bool bracket_verified = false;
  /// Some lambda with a larger rho threshold than a bigger lambda.
  bool lambda_trend_violation = false;
  std::string note;
};

struct RhoSearchResult {
  double alpha = 0.0;
  std::vector<double> lambda_grid, gamma_grid;
  std::vector<GammaResult> per_gamma;
  std::optional<double> rho_alpha;
  bool sanity_floor_ok = true;  // rho_alpha >= 1/(1+alpha)
  std::vector<RhoTraceEntry> trace;
  std::string caveat = kCertificateCaveat;
};

/// Smallest x in (lo, hi] with pred(x) true, assuming pred is monotone and
/// pred(hi) holds; bisection to width tol. Returns hi when already tight.
template <typename Pred>
double bisect_threshold(Pred&& pred, double lo, double hi, double tol) {
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (pred(mid)) hi = mid;
    else lo = mid;
  }
  return hi;
}

RhoSearchResult optimize_rho(double alpha, const InterArrivalLaw& law,
                             const std::vector<double>& lambda_grid,
                             const std::vector<double>& gamma_grid,
                             const RhoSearchOptions& options = {});

}  // namespace copoly
