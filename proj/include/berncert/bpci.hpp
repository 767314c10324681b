#pragma once

#include <memory>
#include <string>
#include <vector>

#include "berncert/dist.hpp"

namespace berncert {

// Closed interval [lower, upper] inside [0, 1] reported for y successes in n
// trials at nominal miscoverage alpha.
struct IntervalEstimate {
  double lower = 0.0;
  double upper = 1.0;
  double alpha = 0.0;
  int n = 0;
  int y = 0;

  bool contains(double b) const { return lower <= b && b <= upper; }
};

// Maps a success count to an interval. Implementations must return
// 0 <= lower <= upper <= 1 for every 0 <= y <= n.
class IntervalEstimator {
 public:
  virtual ~IntervalEstimator() = default;
  virtual IntervalEstimate estimate(int n, int y) const = 0;
  virtual std::string name() const = 0;
};

class ClopperPearson final : public IntervalEstimator {
 public:
  explicit ClopperPearson(double alpha);
  IntervalEstimate estimate(int n, int y) const override;
  std::string name() const override { return "clopper-pearson"; }
  double alpha() const { return alpha_; }

 private:
  double alpha_;
};

// Always [0, 1].
class FullInterval final : public IntervalEstimator {
 public:
  IntervalEstimate estimate(int n, int y) const override;
  std::string name() const override { return "full"; }
};

// The same interval regardless of the data.
class ConstantInterval final : public IntervalEstimator {
 public:
  ConstantInterval(double lower, double upper);
  IntervalEstimate estimate(int n, int y) const override;
  std::string name() const override { return "constant"; }

 private:
  double lower_;
  double upper_;
};

IntervalEstimate clopper_pearson(int n, int y, double alpha);

// Intervals for every outcome 0..n, computed once and reused across b values.
class IntervalTable {
 public:
  IntervalTable(const IntervalEstimator& estimator, int n);
  int n() const { return n_; }
  const IntervalEstimate& operator[](int y) const { return rows_[static_cast<std::size_t>(y)]; }
  const std::vector<IntervalEstimate>& rows() const { return rows_; }

 private:
  int n_;
  std::vector<IntervalEstimate> rows_;
};

struct CoverageReport {
  double b = 0.0;
  double coverage = 0.0;
  std::vector<int> covering_set;  // outcomes y whose interval contains b
};

CoverageReport coverage_probability(const IntervalTable& table, BernoulliParam b);
CoverageReport coverage_probability(const IntervalEstimator& estimator, BernoulliParam b, int n);

struct ValidityReport {
  bool valid = true;
  double worst_b = 0.0;
  double worst_coverage = 1.0;
  std::size_t points_checked = 0;
};

ValidityReport verify_conservative_validity(const IntervalEstimator& estimator, int n, double alpha,
                                            const std::vector<double>& b_grid);

// Uniform grid over [0, 1] at `step`, plus every interval endpoint and the
// points `probe` either side of it, clipped to [0, 1], sorted and deduplicated.
// Coverage as a function of b only jumps at endpoints, so this catches dips
// a uniform grid would step over.
std::vector<double> endpoint_augmented_grid(const IntervalTable& table, double step = 1e-3, double probe = 1e-9);

struct PacFormResult {
  std::int64_t trials = 0;
  std::int64_t hits = 0;
  double empirical = 0.0;
  double exact = 0.0;

  // Hoeffding-style allowance for |empirical - exact| at `sigmas` standard deviations.
  double tolerance(double sigmas = 5.0) const;
  bool consistent(double sigmas = 5.0) const;
};

// Simulates the PAC form of the coverage statement: draw mc_trials sets of n
// Bernoulli(b) observations, count how often the interval from their sum
// contains b, and compare with the exact enumeration.
PacFormResult pac_form_check(const IntervalEstimator& estimator, BernoulliParam b, int n, std::int64_t mc_trials,
                             const SeededStream& stream);

}  // namespace berncert
