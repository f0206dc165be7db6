#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "copoly/partition.hpp"

namespace copoly {

/// Replica estimate of (1/N) E log Z_N.
struct FreeEnergyEstimate {
  double value = 0.0;
  double std_error = 0.0;
  Index n = 0;
  Index replicas = 0;
  std::uint64_t seed = 0;
  ModelParams params;
};

FreeEnergyEstimate quenched_free_energy(const InterArrivalLaw& law, const ModelParams& params,
                                        Index n, Index replicas, std::uint64_t seed);

/// 2 lambda (lambda - h) for h < lambda, else 0.
double annealed_free_energy(double lambda, double h);

enum class Verdict { localized, delocalized, indeterminate };
std::string to_string(Verdict v);

struct CriticalHOptions {
  Index replicas = 200;
  std::uint64_t seed = 1;
  /// Free-energy threshold; when unset, 10 standard errors of the estimate
  /// at h = lambda / 2 and the working size.
  std::optional<double> threshold;
  double tol = 0.01;        // bracket width in h
  Index max_refinements = 2;  // size doublings allowed at an indeterminate point
};

struct CriticalHStep {
  double h = 0.0;
  Index n = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  Verdict verdict = Verdict::indeterminate;
};

/// Bisection in h on [0, lambda]. A point is localized when the estimate
/// exceeds threshold + 3 stderr and delocalized below threshold - 3 stderr;
/// otherwise the size is doubled up to max_refinements times. The same
/// replica seeds are used for every h.
struct CriticalHResult {
  double lambda = 0.0;
  std::optional<double> h_hat;  // absent when the search stopped indeterminate
  double bracket_lo = 0.0, bracket_hi = 0.0;
  double threshold = 0.0;
  Index n = 0;
  std::vector<CriticalHStep> trace;
};

CriticalHResult critical_h(const InterArrivalLaw& law, double lambda, Index n,
                           const CriticalHOptions& options = {});

struct SlopeRow {
  double lambda = 0.0;
  std::optional<double> h_hat;
  double bracket_lo = 0.0, bracket_hi = 0.0;

  std::optional<double> slope() const {
    if (!h_hat) return std::nullopt;
    return *h_hat / lambda;
  }
};

std::vector<SlopeRow> slope_table(const InterArrivalLaw& law, const std::vector<double>& lambdas,
                                  Index n, const CriticalHOptions& options = {});

/// E[prod_j (1 + exp(-(q/n) gap_j)) / 2 | n in tau] = V_q(n) / u(n).
double excursion_expectation(const InterArrivalLaw& law, double q, Index n);

/// P(X_{n/2} = i | n in tau) / P(X_{n/2} = i), X_m the last renewal up to m.
double last_renewal_ratio(const InterArrivalLaw& law, Index n, Index i);
double last_renewal_ratio(const InterArrivalLaw& law, const Vector& u, Index n, Index i);

/// Law of the number of sites with negative sign given a return at n, on
/// {0, 2, ..., n}: entry t is P(count = 2t | S_n = 0).
Vector srw_negative_time_law(Index n);

}  // namespace copoly
