#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace berncert {

// Success probability of a Bernoulli trial. Construction outside [0, 1]
// (or from NaN) throws std::domain_error.
class BernoulliParam {
 public:
  explicit BernoulliParam(double b);
  double value() const { return b_; }
  friend bool operator==(const BernoulliParam&, const BernoulliParam&) = default;

 private:
  double b_;
};

struct BinomialSpec {
  BinomialSpec(int n, BernoulliParam b);
  int n;
  BernoulliParam b;
};

/// Pr(Y = y) for Y ~ Bin(n, b). Exact binomial coefficients up to n = 30,
/// saddle-point evaluation in log space above that.
double binom_pmf(const BinomialSpec& spec, int y);

/// Pr(Y <= j). Total on the integers: 0 below the support, 1 at or above n.
double binom_cdf(const BinomialSpec& spec, int j);

/// Pr(Y > j), summed directly from the upper tail rather than as 1 - cdf.
double binom_sf(const BinomialSpec& spec, int j);

enum class TailSide { lower, upper };

/// Solves for b by bisection.
///  upper: Pr_{Bin(n,b)}(Y <= y) = target  (returns 1 when y == n)
///  lower: Pr_{Bin(n,b)}(Y >= y) = target  (returns 0 when y == 0)
/// The returned root is within 1e-12 of the true root.
double binom_tail_invert(int n, int y, double target, TailSide side);

// Deterministic 64-bit generator. Only the raw engine output is used, so
// sample sequences are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  // uniform on [0, 1) with 53 random bits
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  bool bernoulli(double b) { return uniform01() < b; }

 private:
  std::mt19937_64 engine_;
};

// Value-type handle on a reproducible random stream. Substreams are derived
// by hashing, so parallel consumers get independent sequences regardless of
// the order in which they are created.
struct SeededStream {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  SeededStream substream(std::uint64_t id) const;
  Rng rng() const;
};

std::uint64_t mix64(std::uint64_t x);

std::vector<std::uint8_t> draw_bernoulli(const SeededStream& stream, BernoulliParam b, std::int64_t count);

}  // namespace berncert
