#include <doctest.h>

#include <cmath>
#include <random>

#include "copoly/partition.hpp"
#include "oracles.hpp"

using namespace copoly;

namespace {

std::vector<double> omega_of(const DisorderSample& s) {
  std::vector<double> w(s.size() + 1, 0.0);
  for (Index i = 1; i <= s.size(); ++i) w[i] = s.omega(i);
  return w;
}

oracle::KFn k_of(const InterArrivalLaw& law) {
  return [&law](int n) { return oracle::Real(law(n)); };
}

}  // namespace

TEST_CASE("phi") {
  const ModelParams p{0.7, 0.3, 1.0};
  CHECK(phi(0, 5.0, p) == 1.0);
  CHECK(phi(10, 3.0, ModelParams{0.0, 0.3, 1.0}) == 1.0);
  CHECK(phi(4, -1.0, p) == doctest::Approx((1 + std::exp(-2 * 0.7 * (0.3 * 4 - 1.0))) / 2));
  CHECK(log_phi(4, -1.0, p) == doctest::Approx(std::log(phi(4, -1.0, p))));
  CHECK(std::isfinite(log_phi(100000, -1e6, p)));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 10000; ++t) {
    const ModelParams q{std::abs(normal(rng)), std::abs(normal(rng)), 1.0};
    const Index l1 = rng() % 50, l2 = rng() % 50;
    const double s1 = normal(rng) * std::sqrt(double(l1)), s2 = normal(rng) * std::sqrt(double(l2));
    REQUIRE(log_phi(l1 + l2, s1 + s2, q) <= std::log(2.0) + log_phi(l1, s1, q) + log_phi(l2, s2, q) + 1e-12);
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(validate(ModelParams{-0.1, 0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(ModelParams{0.1, -0.1, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(ModelParams{0.1, 0.1, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(ModelParams{0.1, 0.1, 1.5}), std::invalid_argument);
  const auto p = ModelParams::from_rho(0.4, 0.8);
  CHECK(p.h == 0.4 * 0.8);
}

TEST_CASE("quenched table at zero coupling is log u") {
  for (const auto& law : {make_power_law(0.5, 300), make_srw_law(300)}) {
    const auto t = quenched_log_z(law, sample(5, 300), ModelParams{0.0, 0.4, 1.0}, 300);
    const Vector u = renewal_mass(law, 300);
    CHECK(t.log_z(0) == 0.0);
    for (Index n = 1; n <= 300; ++n) {
      if (u(n) == 0) REQUIRE(t.log_z(n) == kNegInf);
      else REQUIRE(t.log_z(n) == doctest::Approx(std::log(u(n))).epsilon(1e-13));
    }
  }
}

TEST_CASE("quenched table matches the renewal-subset oracle") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unif(0.0, 1.5);
  for (int t = 0; t < 10; ++t) {
    const ModelParams p{unif(rng), unif(rng), 1.0};
    for (const auto& law : {make_srw_law(16), make_power_law(0.5, 16), make_power_law(1.7, 16)}) {
      const Index n = law.period() == 2 ? 6 : 12;
      const auto s = sample(rng(), n);
      const auto z = oracle::renewal_subset_z(k_of(law), omega_of(s), {p.lambda, p.h}, int(n));
      const auto table = quenched_log_z(law, s, p, n);
      CHECK(table.log_z(n) == doctest::Approx(std::log(double(z))).epsilon(1e-12));
    }
  }
}

TEST_CASE("quenched lower bound K(N)/2") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unif(0.0, 2.0);
  for (int t = 0; t < 20; ++t) {
    const ModelParams p{unif(rng), unif(rng), 1.0};
    for (const auto& law : {make_power_law(0.5, 400), make_srw_law(400)}) {
      const auto table = quenched_log_z(law, sample(rng(), 400), p, 400);
      for (Index n = 1; n <= 400; ++n)
        if (law(n) > 0) REQUIRE(table.log_z(n) >= std::log(law(n) / 2) - 1e-12);
    }
  }
}

TEST_CASE("period two rejects odd final sizes") {
  const auto law = make_srw_law(100);
  CHECK_THROWS_AS(quenched_log_z(law, sample(1, 99), ModelParams{0.5, 0.1, 1.0}, 99), std::invalid_argument);
  CHECK_THROWS_AS(annealed_log_z(law, ModelParams{0.5, 0.1, 1.0}, 51), std::invalid_argument);
  CHECK_THROWS_AS(srw_path_log_z(sample(1, 9), ModelParams{0.5, 0.1, 1.0}, 9), std::invalid_argument);
  CHECK_THROWS_AS(quenched_log_z(law, sample(1, 50), ModelParams{0.5, 0.1, 1.0}, 60), std::invalid_argument);
}

TEST_CASE("srw path form equals the renewal form") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> unif(0.0, 1.2);
  const auto law = make_srw_law(64);
  for (int t = 0; t < 30; ++t) {
    const ModelParams p{unif(rng), unif(rng), 1.0};
    const auto s = sample(rng(), 64);
    const auto table = quenched_log_z(law, s, p, 64);
    for (Index n = 2; n <= 64; n += 2) REQUIRE(std::abs(srw_path_log_z(s, p, n) - table.log_z(n)) < 1e-10);
    const auto brute = oracle::srw_path_z(omega_of(s), {p.lambda, p.h}, 12);
    CHECK(srw_path_log_z(s, p, 12) == doctest::Approx(std::log(double(brute))).epsilon(1e-12));
  }
  CHECK(srw_path_log_z(sample(1, 40), ModelParams{0.0, 0.5, 1.0}, 40) ==
        doctest::Approx(std::log(srw_return_probability(20))).epsilon(1e-13));
}

TEST_CASE("large asymmetry keeps only positive excursions") {
  const auto s = sample(4, 8);
  const ModelParams p{1.0, 50.0, 1.0};
  const double bridges = double(oracle::nonnegative_bridges(8));
  CHECK(bridges == 14.0);
  CHECK(srw_path_log_z(s, p, 8) == doctest::Approx(std::log(bridges / 256)).epsilon(1e-12));
  CHECK(std::log(double(oracle::srw_path_z(omega_of(s), {1.0L, 50.0L}, 8))) ==
        doctest::Approx(std::log(bridges / 256)).epsilon(1e-12));
}

TEST_CASE("log-domain engine agrees with the plain recursion") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unif(0.0, 2.0);
  for (int t = 0; t < 50; ++t) {
    const ModelParams p{unif(rng), unif(rng), 1.0};
    for (const auto& law : {make_power_law(0.5, 32), make_power_law(1.2, 32), make_srw_law(32)}) {
      const auto s = sample(rng(), 32);
      const Vector g = quenched_potential(s, p, 32);
      const Vector lz = log_weighted_renewal(law, g);
      const auto plain = plain_weighted_renewal<long double>(law, g);
      for (Index n = 1; n <= 32; ++n) {
        if (plain(n) == 0) REQUIRE(lz(n) == kNegInf);
        else REQUIRE(std::abs(std::expm1(lz(n) - double(std::log(plain(n))))) < 1e-9);
      }
    }
  }
}

TEST_CASE("log-domain engine survives large exponents") {
  const auto law = make_power_law(0.5, 3000);
  const ModelParams p{3.0, 0.0, 1.0};
  const auto s = sample(2, 3000);
  const auto table = quenched_log_z(law, s, p, 3000);
  CHECK(std::isfinite(table.log_z(3000)));
  const Vector g = quenched_potential(s, p, 400);
  const Vector lz = log_weighted_renewal(law, g);
  const auto plain = plain_weighted_renewal<long double>(law, g);
  for (Index n = 1; n <= 400; ++n) REQUIRE(std::abs(lz(n) - double(std::log(plain(n)))) < 1e-9 * std::max(1.0, std::abs(lz(n))));
}

TEST_CASE("segments of a longer potential give shifted-disorder values") {
  const auto law = make_power_law(0.5, 200);
  const ModelParams p{0.8, 0.2, 1.0};
  const auto s = sample(3, 200);
  const Vector g = quenched_potential(s, p, 200);
  const Vector seg = log_weighted_renewal(law, g.segment(50, 101));
  std::vector<double> shifted(101, 0.0);
  for (Index i = 1; i <= 100; ++i) shifted[i] = s.omega(50 + i);
  const auto z = oracle::renewal_subset_z(k_of(law), shifted, {p.lambda, p.h}, 10);
  CHECK(seg(10) == doctest::Approx(std::log(double(z))).epsilon(1e-12));
}

TEST_CASE("quenched log Z is non-increasing in h") {
  for (const auto& law : {make_power_law(0.5, 500), make_srw_law(500)}) {
    const auto s = sample(21, 500);
    Vector prev = quenched_log_z(law, s, ModelParams{0.6, 0.0, 1.0}, 500).log_z;
    for (double h = 0.05; h <= 1.0; h += 0.05) {
      const Vector cur = quenched_log_z(law, s, ModelParams{0.6, h, 1.0}, 500).log_z;
      for (Index n = 1; n <= 500; ++n)
        if (law.reachable(n)) REQUIRE(cur(n) <= prev(n) + 1e-12);
      prev = cur;
    }
  }
}

TEST_CASE("annealed sandwich") {
  const auto law = make_power_law(0.5, 2000);
  for (double lambda : {0.1, 0.5, 1.0}) {
    for (double h : {0.0, 0.3 * lambda, 0.9 * lambda, lambda, 2 * lambda}) {
      const ModelParams p{lambda, h, 1.0};
      const auto t = annealed_log_z(law, p, 2000);
      const Vector u = renewal_mass(law, 2000);
      const double r = 2 * lambda * (lambda - h);
      for (Index n = 1; n <= 2000; ++n) {
        REQUIRE(t.log_z(n) >= std::log(law(n)) + log_half_one_plus_exp(r * double(n)) - 1e-12);
        if (h < lambda) REQUIRE(t.log_z(n) <= std::log(u(n)) + r * double(n) + 1e-12);
        else REQUIRE(t.log_z(n) <= 1e-12);
      }
    }
  }
}

TEST_CASE("annealed value is the replica mean of Z") {
  const auto law = make_power_law(0.5, 64);
  const ModelParams p{0.15, 0.05, 1.0};
  const Vector lz = replica_log_z(law, p, 64, 10000, 17);
  oracle::Stats st;
  for (Index r = 0; r < lz.size(); ++r) st.add(std::exp(lz(r)));
  const double exact = std::exp(annealed_log_z(law, p, 64).log_z(64));
  CHECK(std::abs(double(st.mean()) - exact) < 3 * double(st.stderr_()));

  const auto fm = fractional_moment(law, p, 64, 10000, 17);
  CHECK(fm.estimate == doctest::Approx(double(st.mean())).epsilon(1e-12));
  CHECK(std::abs(fm.estimate - exact) < 3 * fm.std_error);
}

TEST_CASE("fractional moments") {
  const auto law = make_power_law(0.5, 128);
  const Vector u = renewal_mass(law, 128);
  const auto zero = fractional_moment(law, ModelParams{0.0, 0.2, 0.6}, 128, 50, 3);
  CHECK(zero.estimate == doctest::Approx(std::pow(u(128), 0.6)).epsilon(1e-13));
  CHECK(zero.std_error == doctest::Approx(0.0).epsilon(1e-14));

  const ModelParams p{0.5, 0.2, 0.7};
  const auto fm = fractional_moment(law, p, 128, 2000, 5);
  const double jensen = std::exp(0.7 * annealed_log_z(law, p, 128).log_z(128));
  CHECK(fm.estimate <= jensen + 3 * fm.std_error);
  CHECK(fm.replicas == 2000);
  CHECK(fm.seed == 5);
  CHECK_THROWS_AS(fractional_moment(law, p, 128, 1, 5), std::invalid_argument);
}

TEST_CASE("moment of one excursion factor") {
  // E phi(I)^g <= (1 + exp(2 lambda^2 g (g - rho)|I|)) / 2^g for g < rho, h = rho lambda.
  const double lambda = 0.4, rho = 0.9;
  for (double g : {0.5, 0.7, 0.85}) {
    for (Index len : {1, 5, 20}) {
      const ModelParams p = ModelParams::from_rho(lambda, rho);
      oracle::Stats st;
      for (std::uint64_t r = 0; r < 20000; ++r) {
        const auto s = sample(replica_seed(55, r), len);
        st.add(std::pow(phi(len, s.prefix(len), p), g));
      }
      const double bound = (1 + std::exp(2 * lambda * lambda * g * (g - rho) * double(len))) / std::pow(2.0, g);
      CHECK(double(st.mean()) <= bound + 3 * double(st.stderr_()));
    }
  }
}

TEST_CASE("tilted annealed values") {
  const auto law = make_power_law(0.5, 3000);
  const Vector u = renewal_mass(law, 3000);
  const auto zero = tilted_u(law, 0.0, 0.9, 1000, 3000);
  for (Index j = 0; j <= 3000; ++j) REQUIRE(zero.values(j) == doctest::Approx(u(j)).epsilon(1e-13));
  CHECK(zero.values(0) == 1.0);

  const double lambda = 0.1, rho = 0.9;
  const Index k = 1000;
  const auto t = tilted_u(law, lambda, rho, k, 3000);
  CHECK(t.rate == doctest::Approx(tilted_rate(lambda, rho, k)));
  CHECK(t.rate == doctest::Approx(2 * lambda * lambda * (1 - rho) - 2 * lambda / std::sqrt(double(k))));
  CHECK(t.rate <= 0.0);
  for (Index j = 0; j <= 3000; ++j) REQUIRE(t.values(j) <= u(j) * (1 + 1e-12));

  const double dominating = -1 / (double(k) * std::sqrt(1 - rho));
  CHECK(t.rate <= dominating);
  const Vector bound = log_rate_renewal(law, dominating, 3000);
  for (Index j = 0; j <= 3000; ++j) REQUIRE(std::log(t.values(j)) <= bound(j) + 1e-12);
}
