#include "copoly/coarsegrain.hpp"

#include <algorithm>
#include <cassert>

namespace copoly {

std::vector<Index> BlockConfig::m_set() const {
  std::vector<Index> m(indices.begin(), indices.end());
  for (std::size_t r = 0; r + 1 < indices.size(); ++r) m.push_back(indices[r] + 1);
  std::sort(m.begin(), m.end());
  m.erase(std::unique(m.begin(), m.end()), m.end());
  return m;
}

std::vector<char> BlockConfig::w_mask() const {
  std::vector<char> mask(size() + 1, 0);
  for (Index u : m_set())
    for (Index site = (u - 1) * k + 1; site <= u * k; ++site) mask[site] = 1;
  return mask;
}

std::vector<Index> BlockConfig::j_set() const {
  std::vector<Index> j;
  Index prev = 0;
  for (Index r = 0; r < length(); ++r) {
    if (indices[r] > prev + 2) j.push_back(r + 1);
    prev = indices[r];
  }
  return j;
}

BlockConfig make_config(Index k, Index n_blocks, std::vector<Index> indices) {
  require(k >= 1 && n_blocks >= 1, "make_config: need k >= 1 and n_blocks >= 1");
  require(!indices.empty() && indices.back() == n_blocks, "make_config: last index must equal N/k");
  Index prev = 0;
  for (Index i : indices) {
    require(i > prev, "make_config: indices must be strictly increasing and positive");
    prev = i;
  }
  return {k, n_blocks, std::move(indices)};
}

BlockConfig config_from_mask(Index k, Index n_blocks, std::uint64_t mask) {
  std::vector<Index> idx;
  for (Index b = 0; b + 1 < n_blocks; ++b)
    if (mask >> b & 1U) idx.push_back(b + 1);
  idx.push_back(n_blocks);
  return {k, n_blocks, std::move(idx)};
}

void for_each_config(Index n_blocks, Index k, const std::function<void(const BlockConfig&)>& fn,
                     Index cap) {
  require(n_blocks >= 1, "enumerate_configs: n_blocks must be >= 1");
  if (n_blocks > cap || n_blocks > 63)
    throw ResourceLimit("enumerate_configs: " + std::to_string(n_blocks) +
                        " blocks exceed the enumeration cap of " + std::to_string(cap));
  const std::uint64_t count = std::uint64_t(1) << (n_blocks - 1);
  for (std::uint64_t mask = 0; mask < count; ++mask) fn(config_from_mask(k, n_blocks, mask));
}

std::vector<BlockConfig> enumerate_configs(Index n_blocks, Index k, Index cap) {
  std::vector<BlockConfig> out;
  for_each_config(n_blocks, k, [&](const BlockConfig& c) { out.push_back(c); }, cap);
  return out;
}

BlockEvaluator::BlockEvaluator(const InterArrivalLaw& law, const DisorderSample& s,
                               const ModelParams& params, Index n, Index k)
    : law_(law), params_(params), n_(n), k_(k) {
  validate(params);
  require(k >= 1 && n >= k && n % k == 0, "BlockEvaluator: N must be a positive multiple of k");
  require(n <= law.n_max(), "BlockEvaluator: N exceeds law truncation");
  potential_ = quenched_potential(s, params, n);
  omega_ = s.omega_vector().head(n);
  segments_.resize(n + 1);
  for (Index a = 0; a <= n; ++a) {
    const Index len = std::min(k, n - a);
    segments_[a] = log_weighted_renewal(law, potential_.segment(a, len + 1));
  }
}

double BlockEvaluator::segment_log_z(Index a, Index b) const {
  require(a >= 0 && b >= a && b <= n_ && b - a < Index(segments_[a].size()),
          "segment_log_z: segment outside the tabulated band");
  return segments_[a](b - a);
}

double BlockEvaluator::log_zhat(const BlockConfig& config, bool restrict_phi_to_w) const {
  require(config.k == k_ && config.size() == n_, "log_zhat: config inconsistent with N and k");
  const Index k = k_;
  const std::vector<char> w = config.w_mask();

  // Gap potential: the full one, or the one of omega restricted to W.
  Vector g = potential_;
  if (restrict_phi_to_w) {
    g(0) = 0.0;
    for (Index i = 1; i <= n_; ++i)
      g(i) = g(i - 1) + (w[i] ? -2.0 * params_.lambda * (params_.h + omega_(i - 1)) : 0.0);
  }
  const auto log_gap = [&](Index j, Index m) {
    return std::log(law_.pmf()(m - j)) + log_half_one_plus_exp(g(m) - g(j));
  };

  // layer(n_r - first, j_r - n_r) holds the log weight of everything up to j_r.
  Eigen::MatrixXd layer, next;
  Index first = 0;  // first site of the previous block
  const Index ell = config.length();
  for (Index r = 0; r < ell; ++r) {
    const Index block = config.indices[r];
    const Index lo = (block - 1) * k + 1, hi = block * k;
    const bool last = r + 1 == ell;
    next = Eigen::MatrixXd::Constant(k, k, kNegInf);
    for (Index nr = lo; nr <= hi; ++nr) {
      double in = kNegInf;
      if (r == 0) {
        if (law_.pmf()(nr) > 0.0) in = log_gap(0, nr);
      } else {
        for (Index a = 0; a < k; ++a) {
          const Index np = first + a;
          if (nr < np + k) continue;
          for (Index d = 0; d < k; ++d) {
            const double val = layer(a, d);
            const Index jp = np + d;
            if (val == kNegInf || law_.pmf()(nr - jp) == 0.0) continue;
            in = log_add(in, val + log_gap(jp, nr));
          }
        }
      }
      if (in == kNegInf) continue;
      if (last) {
        assert(w[nr] && w[n_]);
        next(nr - lo, 0) = log_add(next(nr - lo, 0), in + segment_log_z(nr, n_));
        continue;
      }
      for (Index d = 0; d < k && nr + d <= n_; ++d) {
        // [n_r, j_r] must lie inside W.
        if (!w[nr] || !w[nr + d]) throw std::logic_error("log_zhat: segment leaves W");
        next(nr - lo, d) = in + segment_log_z(nr, nr + d);
      }
    }
    layer.swap(next);
    first = lo;
  }
  double total = kNegInf;
  for (Index a = 0; a < k; ++a) total = log_add(total, layer(a, 0));
  return total;
}

double zhat(const InterArrivalLaw& law, const DisorderSample& s, const ModelParams& params,
            const BlockConfig& config, bool restrict_phi_to_w) {
  return BlockEvaluator(law, s, params, config.size(), config.k).log_zhat(config, restrict_phi_to_w);
}

DecomposeReport decompose_check(const InterArrivalLaw& law, const DisorderSample& s,
                                const ModelParams& params, Index n, Index k, Index cap) {
  require(k >= 1 && n >= k && n % k == 0, "decompose_check: N must be a positive multiple of k");
  if (n / k > cap) throw ResourceLimit("decompose_check: N/k exceeds the enumeration cap");
  const BlockEvaluator eval(law, s, params, n, k);
  DecomposeReport rep;
  rep.n = n;
  rep.k = k;
  rep.direct_log = quenched_log_z(law, s, params, n).log_z(n);
  rep.sum_log = kNegInf;
  for_each_config(n / k, k, [&](const BlockConfig& c) {
    rep.sum_log = log_add(rep.sum_log, eval.log_zhat(c, false));
    ++rep.n_configs;
  }, cap);
  rep.rel_err = std::abs(std::expm1(rep.sum_log - rep.direct_log));
  return rep;
}

}  // namespace copoly
