#include "copoly/disorder.hpp"

#include <algorithm>
#include <bit>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>

namespace copoly {

namespace {

constexpr double kPrefixLimit = 0x1p20;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_prefix(double p) {
  if (std::abs(p) >= kPrefixLimit)
    throw std::overflow_error("disorder prefix sum leaves the exact-arithmetic range");
}

}  // namespace

double to_grid(double x) { return std::nearbyint(x / DisorderSample::kGrid) * DisorderSample::kGrid; }

std::uint64_t replica_seed(std::uint64_t master, std::uint64_t replica) {
  return splitmix64(master ^ splitmix64(replica + 0x632be59bd9b4e019ULL));
}

double DisorderSample::omega(Index i) const {
  require(i >= 1 && i <= size(), "omega: index out of range");
  double w = base_->omega(i - 1);
  if (tilt_ && in_tilt(i)) w += delta_;
  return w;
}

bool DisorderSample::in_tilt(Index i) const {
  if (!tilt_) return false;
  return tilt_count_[i] != tilt_count_[i - 1];
}

double DisorderSample::prefix(Index n) const {
  require(n >= 0 && n <= size(), "prefix: index out of range");
  double p = base_->prefix(n);
  if (tilt_) p += delta_ * double(tilt_count_[n]);
  return p;
}

Vector DisorderSample::omega_vector() const {
  Vector w(size());
  for (Index i = 1; i <= size(); ++i) w(i - 1) = omega(i);
  return w;
}

Vector DisorderSample::prefix_vector() const {
  if (!tilt_) return base_->prefix;
  Vector p(size() + 1);
  for (Index n = 0; n <= size(); ++n) p(n) = prefix(n);
  return p;
}

DisorderSample DisorderSample::untilted() const {
  DisorderSample s;
  s.base_ = base_;
  s.seed_ = seed_;
  return s;
}

DisorderSample DisorderSample::with_tilt(TiltSpec tilt) const {
  const Index n = size();
  DisorderSample s = untilted();
  std::sort(tilt.sites.begin(), tilt.sites.end());
  tilt.sites.erase(std::unique(tilt.sites.begin(), tilt.sites.end()), tilt.sites.end());
  for (Index i : tilt.sites) require(i >= 1 && i <= n, "with_tilt: site out of range");
  s.delta_ = to_grid(tilt.delta);
  s.tilt_count_.assign(n + 1, 0);
  std::vector<char> mark(n + 1, 0);
  for (Index i : tilt.sites) mark[i] = 1;
  for (Index i = 1; i <= n; ++i) s.tilt_count_[i] = s.tilt_count_[i - 1] + mark[i];
  s.tilt_ = std::move(tilt);
  for (Index i = 0; i <= n; ++i) check_prefix(s.prefix(i));
  return s;
}

DisorderSample sample(std::uint64_t seed, Index n, std::optional<TiltSpec> tilt) {
  require(n >= 1, "sample: n must be >= 1");
  auto base = std::make_shared<DisorderSample::Base>();
  base->omega.resize(n);
  base->prefix.resize(n + 1);

  std::mt19937_64 gen(seed);
  const auto unit = [&gen] { return double(gen() >> 11) * 0x1p-53; };
  for (Index i = 0; i < n; i += 2) {
    const double u1 = 1.0 - unit();  // (0, 1]
    const double u2 = unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    base->omega(i) = to_grid(r * std::cos(theta));
    if (i + 1 < n) base->omega(i + 1) = to_grid(r * std::sin(theta));
  }
  base->prefix(0) = 0.0;
  for (Index i = 1; i <= n; ++i) {
    base->prefix(i) = base->prefix(i - 1) + base->omega(i - 1);
    check_prefix(base->prefix(i));
  }

  DisorderSample s;
  s.base_ = std::move(base);
  s.seed_ = seed;
  if (tilt) return s.with_tilt(std::move(*tilt));
  return s;
}

double interval_sum(const DisorderSample& s, Index a, Index b) {
  require(0 <= a && a <= b && b <= s.size(), "interval_sum: need 0 <= a <= b <= N");
  return s.prefix(b) - s.prefix(a);
}

double rn_moment(double gamma, Index w_size, Index k) {
  require(gamma > 0.0 && gamma < 1.0, "rn_moment: gamma must lie in (0, 1)");
  require(w_size >= 0 && k >= 1, "rn_moment: need |W| >= 0 and k >= 1");
  return std::exp(gamma * double(w_size) / (2.0 * double(k) * (1.0 - gamma)));
}

double log_likelihood_ratio(const DisorderSample& s) {
  if (!s.is_tilted()) return 0.0;
  const double delta = to_grid(s.tilt()->delta);
  double acc = 0.0;
  for (Index i : s.tilt()->sites) acc += -delta * s.omega(i) + 0.5 * delta * delta;
  return acc;
}

namespace {

template <typename T>
void put_le(std::ostream& os, T v) {
  static_assert(std::endian::native == std::endian::little, "little-endian host expected");
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("read_disorder: truncated stream");
  return v;
}

constexpr std::uint16_t kMagic = 0x5043;
constexpr std::uint16_t kVersion = 1;

}  // namespace

void write_disorder(std::ostream& os, const DisorderSample& s) {
  require(s.size() <= Index(UINT32_MAX), "write_disorder: sample too large");
  put_le<std::uint16_t>(os, kMagic);
  put_le<std::uint16_t>(os, kVersion);
  put_le<std::uint32_t>(os, std::uint32_t(s.size()));
  put_le<std::uint64_t>(os, s.seed());
  for (Index i = 1; i <= s.size(); ++i) put_le<double>(os, s.omega(i));
}

DisorderSample read_disorder(std::istream& is) {
  if (get_le<std::uint16_t>(is) != kMagic) throw std::runtime_error("read_disorder: bad magic");
  if (get_le<std::uint16_t>(is) != kVersion) throw std::runtime_error("read_disorder: unsupported version");
  const auto n = Index(get_le<std::uint32_t>(is));
  const auto seed = get_le<std::uint64_t>(is);
  require(n >= 1, "read_disorder: empty sample");
  auto base = std::make_shared<DisorderSample::Base>();
  base->omega.resize(n);
  base->prefix.resize(n + 1);
  base->prefix(0) = 0.0;
  for (Index i = 0; i < n; ++i) {
    base->omega(i) = get_le<double>(is);
    base->prefix(i + 1) = base->prefix(i) + base->omega(i);
  }
  DisorderSample s;
  s.base_ = std::move(base);
  s.seed_ = seed;
  return s;
}

}  // namespace copoly
