#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "copoly/core.hpp"

namespace copoly {

/// Mean shift `delta` applied to the sites in `sites` (1-based, any order).
struct TiltSpec {
  std::vector<Index> sites;
  double delta = 0.0;
};

/// Gaussian disorder omega_1..omega_N with exact prefix sums.
///
/// Draws come from std::mt19937_64 seeded with `seed`, turned into normals by
/// the Box-Muller transform (pairs, cosine branch first) and rounded to the
/// dyadic grid 2^-32. On that grid every prefix sum is exact in double
/// precision, so prefix(b) - prefix(a) is the exact interval sum. A tilt is
/// kept as metadata over a shared untilted base and applied on access.
class DisorderSample {
 public:
  static constexpr double kGrid = 0x1p-32;

  Index size() const { return base_ ? Index(base_->omega.size()) : 0; }
  std::uint64_t seed() const { return seed_; }
  const std::optional<TiltSpec>& tilt() const { return tilt_; }
  bool is_tilted() const { return tilt_.has_value(); }

  /// omega_i for 1 <= i <= N.
  double omega(Index i) const;
  /// sum_{i <= n} omega_i for 0 <= n <= N.
  double prefix(Index n) const;
  bool in_tilt(Index i) const;

  Vector omega_vector() const;
  Vector prefix_vector() const;

  DisorderSample with_tilt(TiltSpec tilt) const;
  DisorderSample untilted() const;

 private:
  struct Base {
    Vector omega;   // omega(i - 1) = omega_i
    Vector prefix;  // prefix(n)
  };

  friend DisorderSample sample(std::uint64_t, Index, std::optional<TiltSpec>);
  friend DisorderSample read_disorder(std::istream&);

  std::shared_ptr<const Base> base_;
  std::uint64_t seed_ = 0;
  std::optional<TiltSpec> tilt_;
  double delta_ = 0.0;
  std::vector<Index> tilt_count_;  // number of tilted sites in 1..n
};

/// Seed of replica `replica` derived from a master seed (SplitMix64 mixing),
/// independent of evaluation order.
std::uint64_t replica_seed(std::uint64_t master, std::uint64_t replica);

DisorderSample sample(std::uint64_t seed, Index n, std::optional<TiltSpec> tilt = std::nullopt);

/// sum_{i=a+1}^{b} omega_i.
double interval_sum(const DisorderSample& s, Index a, Index b);

/// exp(gamma |W| / (2 k (1 - gamma))): the (1-gamma) power of the
/// 1/(1-gamma) moment of dP/dP~ when P~ shifts |W| sites by 1/sqrt(k).
double rn_moment(double gamma, Index w_size, Index k);

/// log dP/dP~ at the realised (tilted) disorder: sum_{i in W} (-delta w_i + delta^2 / 2).
double log_likelihood_ratio(const DisorderSample& s);

/// Rounds a value to the disorder grid.
double to_grid(double x);

/// Binary dump: 16-byte little-endian header {u16 magic 0x5043 ("CP"),
/// u16 version 1, u32 N, u64 seed} followed by N float64 values of omega.
void write_disorder(std::ostream& os, const DisorderSample& s);
DisorderSample read_disorder(std::istream& is);

}  // namespace copoly
