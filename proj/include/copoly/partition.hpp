#pragma once

#include <cstdint>

#include "copoly/disorder.hpp"
#include "copoly/renewal.hpp"

namespace copoly {

/// Coupling lambda >= 0, asymmetry h >= 0 and fractional exponent gamma.
struct ModelParams {
  double lambda = 0.0;
  double h = 0.0;
  double gamma = 1.0;

  static ModelParams from_rho(double lambda, double rho, double gamma = 1.0) {
    return {lambda, rho * lambda, gamma};
  }
};

void validate(const ModelParams& p);

enum class TableKind { quenched, annealed, tilted_annealed };

/// log_z(n) = log of the partition value for system size n; log_z(0) = 0 and
/// unreachable sizes hold -inf.
struct LogPartitionTable {
  TableKind kind = TableKind::quenched;
  Vector log_z;
  ModelParams params;
};

/// Excursion weight (1 + exp(-2 lambda h len - 2 lambda omega_sum)) / 2; 1 for len = 0.
double phi(Index len, double omega_sum, const ModelParams& params);
double log_phi(Index len, double omega_sum, const ModelParams& params);

/// g(m) = -2 lambda h m - 2 lambda sum_{i<=m} omega_i, so that
/// phi((j, m]) = (1 + exp(g(m) - g(j))) / 2.
Vector quenched_potential(const DisorderSample& s, const ModelParams& params, Index n);

/// Log-domain solution of z(0) = 1,
///   z(m) = sum_{j<m} z(j) K(m - j) (1 + exp(g(m) - g(j))) / 2,
/// for m = 0..n with n = potential.size() - 1. Only differences of g enter,
/// so a segment of a longer potential yields the shifted-disorder values.
///
/// The sum splits into two convolutions of K with exp(log z(j)) and
/// exp(log z(j) - g(j)); each is kept as a scaled plain vector whose reference
/// exponent is raised whenever a new entry exceeds it by a fixed margin.
Vector log_weighted_renewal(const InterArrivalLaw& law, const Eigen::Ref<const Vector>& potential);

/// Same recursion with a deterministic rate: weight (1 + exp(rate * gap)) / 2.
Vector log_rate_renewal(const InterArrivalLaw& law, double rate, Index n);

/// Literal plain-domain evaluation of the same recursion (reference engine).
template <typename Scalar>
VectorX<Scalar> plain_weighted_renewal(const InterArrivalLaw& law,
                                       const Eigen::Ref<const Vector>& potential) {
  const Index n = potential.size() - 1;
  require(n >= 0 && n <= law.n_max(), "plain_weighted_renewal: size exceeds law truncation");
  VectorX<Scalar> z = VectorX<Scalar>::Zero(n + 1);
  z(0) = Scalar(1);
  for (Index m = 1; m <= n; ++m) {
    Scalar acc(0);
    for (Index j = 0; j < m; ++j) {
      const Scalar k = Scalar(law.pmf()(m - j));
      if (k == Scalar(0)) continue;
      using std::exp;
      const Scalar w = (Scalar(1) + exp(Scalar(potential(m)) - Scalar(potential(j)))) / Scalar(2);
      acc += z(j) * k * w;
    }
    z(m) = acc;
  }
  return z;
}

LogPartitionTable quenched_log_z(const InterArrivalLaw& law, const DisorderSample& s,
                                 const ModelParams& params, Index n);

/// Copolymer built on the simple random walk path itself, evaluated by a
/// transfer over walk heights. A step into height 0 keeps the sign of the
/// excursion it closes.
double srw_path_log_z(const DisorderSample& s, const ModelParams& params, Index n);

/// Gaussian average of the quenched table: weight (1 + exp(2 lambda (lambda - h) gap)) / 2.
LogPartitionTable annealed_log_z(const InterArrivalLaw& law, const ModelParams& params, Index n);

/// Annealed values at asymmetry rho lambda + 1/sqrt(k), U(0) = 1.
struct TiltedU {
  Vector values;
  double rate = 0.0;  // 2 lambda^2 (1 - rho) - 2 lambda / sqrt(k)
  Index k = 0;
};

double tilted_rate(double lambda, double rho, Index k);
TiltedU tilted_u(const InterArrivalLaw& law, double lambda, double rho, Index k, Index n);

/// Replica average with its standard error.
struct MCEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  Index replicas = 0;
  std::uint64_t seed = 0;
};

/// Replica r uses disorder seeded by replica_seed(seed, r).
Vector replica_log_z(const InterArrivalLaw& law, const ModelParams& params, Index n,
                     Index replicas, std::uint64_t seed);

/// Monte-Carlo estimate of E Z_N^gamma with gamma = params.gamma.
MCEstimate fractional_moment(const InterArrivalLaw& law, const ModelParams& params, Index n,
                             Index replicas, std::uint64_t seed);

}  // namespace copoly
