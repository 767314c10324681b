#include "berncert/dist.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace berncert {

namespace {

constexpr int kExactLimit = 30;

// C(n, k) for n <= 30 fits comfortably in 64 bits.
std::uint64_t exact_choose(int n, int k) {
  if (k > n - k) k = n - k;
  std::uint64_t c = 1;
  for (int i = 1; i <= k; ++i) c = c * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return c;
}

// Error of Stirling's approximation to log(n!):
//   log(n!) - [(n + 1/2) log(n) - n + log(sqrt(2 pi))]
double stirling_error(double n) {
  constexpr double s0 = 1.0 / 12;
  constexpr double s1 = 1.0 / 360;
  constexpr double s2 = 1.0 / 1260;
  constexpr double s3 = 1.0 / 1680;
  constexpr double s4 = 1.0 / 1188;
  if (n <= 15.0) {
    const double log_sqrt_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
    return std::lgamma(n + 1.0) - (n + 0.5) * std::log(n) + n - log_sqrt_2pi;
  }
  const double nn = n * n;
  if (n > 500) return (s0 - s1 / nn) / n;
  if (n > 80) return (s0 - (s1 - s2 / nn) / nn) / n;
  if (n > 35) return (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / n;
  return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n;
}

// Deviance term x log(x / np) + np - x, evaluated without cancellation when
// x is close to np.
double deviance(double x, double np) {
  if (std::fabs(x - np) < 0.1 * (x + np)) {
    double v = (x - np) / (x + np);
    double s = (x - np) * v;
    double ej = 2.0 * x * v;
    v = v * v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v;
      const double s1 = s + ej / (2 * j + 1);
      if (s1 == s) return s1;
      s = s1;
    }
  }
  return x * std::log(x / np) + np - x;
}

// Catherine Loader's saddle-point expansion for the binomial density.
double saddle_point_pmf(int n_int, int y_int, double p) {
  const double q = 1.0 - p;
  const double n = n_int;
  const double y = y_int;
  if (y_int == 0) {
    const double lc = p < 0.1 ? -deviance(n, n * q) - n * p : n * std::log(q);
    return std::exp(lc);
  }
  if (y_int == n_int) {
    const double lc = q < 0.1 ? -deviance(n, n * p) - n * q : n * std::log(p);
    return std::exp(lc);
  }
  const double lc = stirling_error(n) - stirling_error(y) - stirling_error(n - y) - deviance(y, n * p) -
                    deviance(n - y, n * q);
  // (n - y) / n rather than log1p(-y / n): the latter loses digits when y is close to n
  const double lf = std::log(2.0 * std::numbers::pi) + std::log(y) + std::log((n - y) / n);
  return std::exp(lc - 0.5 * lf);
}

// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x)) {
      carry += (sum - t) + x;
    } else {
      carry += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

}  // namespace

BernoulliParam::BernoulliParam(double b) : b_(b) {
  if (!(b >= 0.0 && b <= 1.0)) {
    throw std::domain_error("Bernoulli parameter must lie in [0, 1], got " + std::to_string(b));
  }
}

BinomialSpec::BinomialSpec(int n_, BernoulliParam b_) : n(n_), b(b_) {
  if (n_ < 1) throw std::domain_error("binomial trial count must be >= 1, got " + std::to_string(n_));
}

double binom_pmf(const BinomialSpec& spec, int y) {
  const int n = spec.n;
  if (y < 0 || y > n) {
    throw std::domain_error("binomial outcome " + std::to_string(y) + " outside [0, " + std::to_string(n) + "]");
  }
  const double b = spec.b.value();
  if (b == 0.0) return y == 0 ? 1.0 : 0.0;
  if (b == 1.0) return y == n ? 1.0 : 0.0;
  if (n <= kExactLimit) {
    return static_cast<double>(exact_choose(n, y)) * std::pow(b, y) * std::pow(1.0 - b, n - y);
  }
  return saddle_point_pmf(n, y, b);
}

double binom_cdf(const BinomialSpec& spec, int j) {
  if (j < 0) return 0.0;
  if (j >= spec.n) return 1.0;
  CompensatedSum acc;
  for (int y = 0; y <= j; ++y) acc.add(binom_pmf(spec, y));
  return std::min(acc.value(), 1.0);
}

double binom_sf(const BinomialSpec& spec, int j) {
  if (j < 0) return 1.0;
  if (j >= spec.n) return 0.0;
  CompensatedSum acc;
  for (int y = spec.n; y > j; --y) acc.add(binom_pmf(spec, y));
  return std::min(acc.value(), 1.0);
}

double binom_tail_invert(int n, int y, double target, TailSide side) {
  if (n < 1) throw std::domain_error("tail inversion needs n >= 1");
  if (y < 0 || y > n) throw std::domain_error("tail inversion needs 0 <= y <= n");
  if (!(target > 0.0 && target < 1.0)) throw std::domain_error("tail inversion target must lie in (0, 1)");

  // Tails that are identically 1 in b have no root; report the boundary.
  if (side == TailSide::upper && y == n) return 1.0;
  if (side == TailSide::lower && y == 0) return 0.0;

  // Both tails are monotone in b: Pr(Y <= y) decreases, Pr(Y >= y) increases.
  auto below_root = [&](double b) {
    const BinomialSpec spec(n, BernoulliParam(b));
    return side == TailSide::upper ? binom_cdf(spec, y) > target : binom_sf(spec, y - 1) < target;
  };
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > 1e-15) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (below_root(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

SeededStream SeededStream::substream(std::uint64_t id) const {
  return SeededStream{master_seed, mix64(stream_id ^ mix64(id))};
}

Rng SeededStream::rng() const { return Rng(mix64(master_seed ^ mix64(stream_id + 0x632be59bd9b4e019ULL))); }

std::vector<std::uint8_t> draw_bernoulli(const SeededStream& stream, BernoulliParam b, std::int64_t count) {
  if (count < 0) throw std::domain_error("sample count must be >= 0");
  Rng rng = stream.rng();
  std::vector<std::uint8_t> out(static_cast<std::size_t>(count));
  for (auto& r : out) r = rng.bernoulli(b.value()) ? 1 : 0;
  return out;
}

}  // namespace berncert
