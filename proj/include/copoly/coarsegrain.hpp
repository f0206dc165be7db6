#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "copoly/partition.hpp"

namespace copoly {

/// Block length k, number of blocks N/k and increasing block indices
/// i_1 < ... < i_l = N/k (1-based). Block B_i = {(i-1)k + 1, ..., ik}.
struct BlockConfig {
  Index k = 1;
  Index n_blocks = 1;
  std::vector<Index> indices;

  Index size() const { return n_blocks * k; }
  Index length() const { return Index(indices.size()); }

  /// M = {i_1..i_l} u {i_1 + 1..i_{l-1} + 1}, sorted.
  std::vector<Index> m_set() const;
  /// Sites of W = union of B_u over u in M, as a mask over 0..N (entry 0 unused).
  std::vector<char> w_mask() const;
  Index w_size() const { return k * Index(m_set().size()); }
  /// J = {r : i_r > i_{r-1} + 2} with i_0 = 0, 1-based r.
  std::vector<Index> j_set() const;
};

/// Validates strict increase and i_l = n_blocks.
BlockConfig make_config(Index k, Index n_blocks, std::vector<Index> indices);

/// Config whose interior indices are the set bits of `mask` (bit b <-> block b + 1).
BlockConfig config_from_mask(Index k, Index n_blocks, std::uint64_t mask);

inline constexpr Index kDefaultBlockCap = 20;

/// Streams every nonempty increasing index set ending at n_blocks, exactly
/// once (2^(n_blocks - 1) configs).
void for_each_config(Index n_blocks, Index k, const std::function<void(const BlockConfig&)>& fn,
                     Index cap = kDefaultBlockCap);

/// All configs, for small n_blocks.
std::vector<BlockConfig> enumerate_configs(Index n_blocks, Index k, Index cap = kDefaultBlockCap);

/// Evaluates the block-restricted pieces Z^(i_1..i_l) of one disorder sample.
/// Segment values Z_{n,j} with j - n < k are tabulated once per sample.
class BlockEvaluator {
 public:
  BlockEvaluator(const InterArrivalLaw& law, const DisorderSample& s, const ModelParams& params,
                 Index n, Index k);

  Index size() const { return n_; }
  Index k() const { return k_; }

  /// log Z_{a,b} for 0 <= b - a < k (or b = N).
  double segment_log_z(Index a, Index b) const;

  /// log of the restricted sum; restrict_phi_to_w replaces every gap
  /// interval I by I n W.
  double log_zhat(const BlockConfig& config, bool restrict_phi_to_w) const;

 private:
  const InterArrivalLaw& law_;
  ModelParams params_;
  Index n_, k_;
  Vector potential_;
  std::vector<Vector> segments_;  // segments_[a](d) = log Z_{a, a + d}, d <= min(k, N - a)
  Vector omega_;
};

double zhat(const InterArrivalLaw& law, const DisorderSample& s, const ModelParams& params,
            const BlockConfig& config, bool restrict_phi_to_w);

struct DecomposeReport {
  Index n = 0;
  Index k = 0;
  double direct_log = 0.0;
  double sum_log = 0.0;
  double rel_err = 0.0;
  Index n_configs = 0;
};

/// Compares log Z_N from the direct recursion with the log of the sum of
/// the block pieces over all configs.
DecomposeReport decompose_check(const InterArrivalLaw& law, const DisorderSample& s,
                                const ModelParams& params, Index n, Index k,
                                Index cap = kDefaultBlockCap);

}  // namespace copoly
