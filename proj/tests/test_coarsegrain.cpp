#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "copoly/coarsegrain.hpp"
#include "oracles.hpp"

using namespace copoly;

namespace {

std::vector<double> omega_of(const DisorderSample& s) {
  std::vector<double> w(s.size() + 1, 0.0);
  for (Index i = 1; i <= s.size(); ++i) w[i] = s.omega(i);
  return w;
}

std::vector<int> as_int(const std::vector<Index>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("config enumeration") {
  CHECK(enumerate_configs(1, 4).size() == 1);
  CHECK(enumerate_configs(1, 4)[0].indices == std::vector<Index>{1});
  CHECK(enumerate_configs(4, 2).size() == 8);
  const auto six = enumerate_configs(6, 3);
  CHECK(six.size() == 32);
  std::set<std::vector<Index>> distinct;
  for (const auto& c : six) {
    distinct.insert(c.indices);
    CHECK(c.indices.back() == 6);
    CHECK(std::is_sorted(c.indices.begin(), c.indices.end()));
    const Index m = Index(c.m_set().size());
    CHECK(m >= 1);
    CHECK(m < 2 * c.length());
    CHECK(c.w_size() == 3 * m);
  }
  CHECK(distinct.size() == 32);
  Index count = 0;
  for_each_config(12, 1, [&](const BlockConfig&) { ++count; });
  CHECK(count == 2048);
  CHECK_THROWS_AS(for_each_config(21, 1, [](const BlockConfig&) {}), ResourceLimit);
  CHECK_THROWS_AS(enumerate_configs(0, 1), std::invalid_argument);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(make_config(4, 3, {1, 1, 3}), std::invalid_argument);
  CHECK_THROWS_AS(make_config(4, 3, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(make_config(4, 3, {}), std::invalid_argument);
  CHECK_THROWS_AS(make_config(0, 3, {3}), std::invalid_argument);
  CHECK(config_from_mask(2, 5, 0b0101).indices == std::vector<Index>{1, 3, 5});
}

TEST_CASE("blocks partition the sites") {
  const auto c = make_config(5, 4, {1, 2, 3, 4});
  const auto w = c.w_mask();
  for (Index i = 1; i <= 20; ++i) CHECK(w[i] == 1);
  CHECK(c.w_size() == 20);
}

TEST_CASE("derived sets agree with an incremental construction") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 10000; ++t) {
    const Index nb = 1 + Index(rng() % 18), k = 1 + Index(rng() % 5);
    const auto c = config_from_mask(k, nb, rng() & ((std::uint64_t(1) << (nb - 1)) - 1));
    // Incremental: walk the indices once, adding i_r and, for r < l, i_r + 1.
    std::vector<char> in_m(nb + 2, 0);
    std::vector<Index> j;
    Index prev = 0;
    for (std::size_t r = 0; r < c.indices.size(); ++r) {
      const Index i = c.indices[r];
      in_m[i] = 1;
      if (r + 1 < c.indices.size()) in_m[i + 1] = 1;
      if (i > prev + 2) j.push_back(Index(r) + 1);
      prev = i;
    }
    std::vector<Index> m;
    for (Index i = 1; i <= nb; ++i)
      if (in_m[i]) m.push_back(i);
    REQUIRE(c.m_set() == m);
    REQUIRE(c.j_set() == j);
    const auto w = c.w_mask();
    for (Index site = 1; site <= nb * k; ++site) REQUIRE(bool(w[site]) == bool(in_m[(site + k - 1) / k]));
    REQUIRE(c.w_size() == k * Index(m.size()));
  }
}

TEST_CASE("block pieces match the grouped renewal expansion") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  struct Case {
    InterArrivalLaw law;
    Index n, k;
  };
  for (const auto& cs : {Case{make_srw_law(16), 8, 4}, Case{make_srw_law(16), 12, 4}, Case{make_power_law(0.5, 16), 12, 3},
                         Case{make_power_law(0.5, 16), 12, 4}, Case{make_power_law(1.5, 16), 10, 2}}) {
    for (int t = 0; t < 3; ++t) {
      const double lambda = unif(rng);
      const ModelParams p{lambda, lambda * unif(rng), 1.0};
      const auto s = sample(rng(), cs.n);
      const auto w = omega_of(s);
      const oracle::KFn kf = [&](int m) { return oracle::Real(cs.law(m)); };
      for (bool restrict : {false, true}) {
        const auto groups = oracle::grouped_block_sums(kf, w, {p.lambda, p.h}, int(cs.n), int(cs.k), restrict);
        const BlockEvaluator eval(cs.law, s, p, cs.n, cs.k);
        for (const auto& c : enumerate_configs(cs.n / cs.k, cs.k)) {
          const auto it = groups.find(as_int(c.indices));
          const double expected = it == groups.end() ? 0.0 : double(it->second);
          const double got = std::exp(eval.log_zhat(c, restrict));
          REQUIRE(got == doctest::Approx(expected).epsilon(1e-12).scale(1e-300));
          CHECK(zhat(cs.law, s, p, c, restrict) == doctest::Approx(eval.log_zhat(c, restrict)).epsilon(1e-14));
        }
      }
    }
  }
}

TEST_CASE("single block piece") {
  // N = k = 4: the piece is the whole partition function.
  const auto law = make_power_law(0.5, 8);
  const auto s = sample(3, 4);
  const ModelParams p{0.7, 0.2, 1.0};
  const auto c = make_config(4, 1, {1});
  const auto direct = quenched_log_z(law, s, p, 4).log_z(4);
  CHECK(zhat(law, s, p, c, false) == doctest::Approx(direct).epsilon(1e-13));
  CHECK(zhat(law, s, p, c, true) == doctest::Approx(direct).epsilon(1e-13));
}

TEST_CASE("restriction is void when W covers every gap") {
  const auto law = make_srw_law(24);
  const auto s = sample(9, 24);
  const ModelParams p{0.9, 0.3, 1.0};
  const auto all = make_config(4, 6, {1, 2, 3, 4, 5, 6});
  const auto almost = make_config(4, 6, {1, 2, 4, 5, 6});  // M still covers every block
  for (const auto& c : {all, almost}) CHECK(zhat(law, s, p, c, true) == doctest::Approx(zhat(law, s, p, c, false)).epsilon(1e-13));
}

TEST_CASE("zero coupling gives block-visit probabilities") {
  const auto law = make_srw_law(24);
  const auto s = sample(1, 12);
  const oracle::KFn kf = [&](int m) { return oracle::Real(law(m)); };
  const auto groups = oracle::grouped_block_sums(kf, omega_of(s), {0.0L, 0.0L}, 12, 3, false);
  double total = 0;
  for (const auto& c : enumerate_configs(4, 3)) {
    const double v = std::exp(zhat(law, s, ModelParams{0.0, 0.5, 1.0}, c, false));
    const auto it = groups.find(as_int(c.indices));
    CHECK(v == doctest::Approx(it == groups.end() ? 0.0 : double(it->second)).epsilon(1e-12).scale(1e-300));
    total += v;
  }
  CHECK(total == doctest::Approx(renewal_mass(law, 12)(12)).epsilon(1e-13));
}

TEST_CASE("decomposition identity") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto srw = make_srw_law(24);
  for (int t = 0; t < 20; ++t) {
    const double lambda = unif(rng);
    const ModelParams p{lambda, lambda * unif(rng), 1.0};
    const auto s = sample(rng(), 24);
    const auto r8 = decompose_check(srw, s, p, 8, 4);
    CHECK(r8.rel_err < 1e-9);
    CHECK(r8.n_configs == 2);
    const auto r24 = decompose_check(srw, s, p, 24, 4);
    CHECK(r24.rel_err < 1e-9);
    CHECK(r24.n_configs == 32);
  }
  const auto zero = decompose_check(srw, sample(1, 24), ModelParams{0.0, 0.0, 1.0}, 24, 4);
  const double u24 = renewal_mass(srw, 24)(24);
  CHECK(zero.direct_log == doctest::Approx(std::log(u24)).epsilon(1e-13));
  CHECK(zero.sum_log == doctest::Approx(std::log(u24)).epsilon(1e-13));

  CHECK_THROWS_AS(decompose_check(srw, sample(1, 24), ModelParams{0.5, 0.1, 1.0}, 22, 4), std::invalid_argument);
  CHECK_THROWS_AS(decompose_check(make_power_law(0.5, 100), sample(1, 100), ModelParams{0.5, 0.1, 1.0}, 84, 4, 20),
                  ResourceLimit);
}

TEST_CASE("restricting a gap costs at most a factor two") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 10000; ++t) {
    const ModelParams p{std::abs(normal(rng)), std::abs(normal(rng)), 1.0};
    const Index in = rng() % 30, out = rng() % 30;
    const double s_in = normal(rng) * std::sqrt(double(in)), s_out = normal(rng) * std::sqrt(double(out));
    REQUIRE(log_phi(in + out, s_in + s_out, p) <= std::log(2.0) + log_phi(in, s_in, p) + log_phi(out, s_out, p) + 1e-12);
  }
}
