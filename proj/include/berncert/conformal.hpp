#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "berncert/dist.hpp"
#include "berncert/parallel.hpp"
#include "berncert/rational.hpp"

namespace berncert {

// Nonconformity scores R_1..R_N of a calibration set. Only the multiset of
// scores matters for p-values, so they are kept sorted.
class CalibrationScores {
 public:
  explicit CalibrationScores(std::vector<double> scores);

  std::size_t size() const { return sorted_.size(); }
  const std::vector<double>& sorted() const { return sorted_; }
  // |{i : R_i >= r}|
  std::size_t count_at_least(double r) const;

 private:
  std::vector<double> sorted_;
};

// (|{i : R_i >= candidate}| + 1) / (N + 1), exactly.
Rational p_value(const CalibrationScores& cal, double candidate_score);

// Membership of a candidate in the inductive conformal prediction set: p > epsilon.
bool inp_contains(const CalibrationScores& cal, double candidate_score, const Significance& epsilon);

// Significance level, target miscoverage E and calibration size, all fixed
// before any calibration data is drawn.
class PacParams {
 public:
  PacParams(Significance epsilon, double coverage_e, int n);

  const Significance& epsilon() const { return epsilon_; }
  double coverage_e() const { return coverage_e_; }
  int n() const { return n_; }
  // J = floor(epsilon (N + 1) - 1), in [-1, N]
  int j() const { return j_; }

 private:
  Significance epsilon_;
  double coverage_e_;
  int n_;
  int j_;
};

struct PacBound {
  PacParams params;
  double delta = 0.0;       // Bin_{N,E}(J)
  double confidence = 1.0;  // 1 - delta, summed from the upper tail
};

PacBound theorem1_bound(const PacParams& params);

// The prediction set seen in score space. A candidate is accepted iff at
// least floor(epsilon (N + 1)) calibration scores are >= its own score, so
// the set is always a sublevel set {z : A(z) <= tau}.
struct ScoreThreshold {
  enum class Kind { everything, nothing, at_most };
  Kind kind = Kind::everything;
  double tau = 0.0;

  bool admits(double score) const {
    switch (kind) {
      case Kind::everything: return true;
      case Kind::nothing: return false;
      case Kind::at_most: return score <= tau;
    }
    return false;
  }
};

ScoreThreshold prediction_threshold(const CalibrationScores& cal, const Significance& epsilon);

// A: Z -> R with the training set fixed when the measure is constructed.
template <class Point>
class NonconformityMeasure {
 public:
  virtual ~NonconformityMeasure() = default;
  virtual double score(const Point& z) const = 0;
  // Largest attainable score, if known. Prediction sets whose threshold
  // reaches it contain the whole sample space.
  virtual std::optional<double> max_score() const { return std::nullopt; }
};

// 1 on Q, 0 on its complement.
template <class Point>
class IndicatorMeasure final : public NonconformityMeasure<Point> {
 public:
  explicit IndicatorMeasure(std::function<bool(const Point&)> in_q) : in_q_(std::move(in_q)) {}
  double score(const Point& z) const override { return in_q_(z) ? 1.0 : 0.0; }
  std::optional<double> max_score() const override { return 1.0; }

 private:
  std::function<bool(const Point&)> in_q_;
};

template <class Point>
class ScoreFunctionMeasure final : public NonconformityMeasure<Point> {
 public:
  explicit ScoreFunctionMeasure(std::function<double(const Point&)> fn, std::optional<double> max = std::nullopt)
      : fn_(std::move(fn)), max_(max) {}
  double score(const Point& z) const override { return fn_(z); }
  std::optional<double> max_score() const override { return max_; }

 private:
  std::function<double(const Point&)> fn_;
  std::optional<double> max_;
};

template <class Point>
using PointSampler = std::function<Point(Rng&)>;

// Exact probability that a fresh draw falls outside the prediction set with
// the given threshold. When supplied it replaces the inner sampling loop.
using InnerMissOracle = std::function<double(const ScoreThreshold&)>;

enum class SetClass { fullspace, nontrivial, empty };

struct GuaranteeReport {
  PacBound bound;
  std::int64_t n_cal = 0;
  std::int64_t n_test = 0;
  bool exact_inner = false;

  std::int64_t covering = 0;             // replicates with g_i >= 1 - E
  std::int64_t fullspace = 0;            // replicates whose set is the whole space
  std::int64_t nontrivial_covering = 0;  // proper, nonempty sets that still cover
  std::int64_t empty = 0;

  double h_hat() const { return ratio(covering); }
  double frac_fullspace() const { return ratio(fullspace); }
  double frac_nontrivial_covering() const { return ratio(nontrivial_covering); }
  double frac_empty() const { return ratio(empty); }

 private:
  double ratio(std::int64_t k) const { return static_cast<double>(k) / static_cast<double>(n_cal); }
};

inline constexpr std::int64_t kReplicateChunk = 1024;

// Estimates P^N(S_E): for each of n_cal calibration sets drawn from the
// sampler, build the prediction set and estimate its coverage g_i from
// n_test fresh draws (or take it from `exact_inner`), then report the
// fraction with g_i >= 1 - E. Replicates are processed in fixed chunks, each
// with its own substream, so the result does not depend on `workers`.
template <class Point>
GuaranteeReport estimate_se_probability(const NonconformityMeasure<Point>& inm, const PointSampler<Point>& sampler,
                                        const PacParams& params, std::int64_t n_cal, std::int64_t n_test,
                                        const SeededStream& stream, const InnerMissOracle& exact_inner = {},
                                        unsigned workers = 0) {
  if (n_cal < 1 || n_test < 1) throw std::domain_error("n_cal and n_test must be >= 1");
  if (params.epsilon().is_one()) throw std::domain_error("epsilon = 1 yields the empty set; guarantees need epsilon < 1");

  const auto max_score = inm.max_score();
  const std::int64_t allowed_misses = Significance(params.coverage_e()).floor_times(n_test);
  const auto chunks = static_cast<std::size_t>((n_cal + kReplicateChunk - 1) / kReplicateChunk);

  struct Tally {
    std::int64_t covering = 0, fullspace = 0, nontrivial_covering = 0, empty = 0;
  };
  std::vector<Tally> tallies(chunks);

  parallel_for(chunks, workers, [&](std::size_t c) {
    Rng rng = stream.substream(c).rng();
    Tally& t = tallies[c];
    const std::int64_t begin = static_cast<std::int64_t>(c) * kReplicateChunk;
    const std::int64_t end = std::min(n_cal, begin + kReplicateChunk);
    std::vector<double> scores(static_cast<std::size_t>(params.n()));
    for (std::int64_t i = begin; i < end; ++i) {
      for (auto& s : scores) s = inm.score(sampler(rng));
      const ScoreThreshold thr = prediction_threshold(CalibrationScores(scores), params.epsilon());

      SetClass cls = SetClass::nontrivial;
      if (thr.kind == ScoreThreshold::Kind::nothing) {
        cls = SetClass::empty;
      } else if (thr.kind == ScoreThreshold::Kind::everything || (max_score && thr.tau >= *max_score)) {
        cls = SetClass::fullspace;
      }

      bool covers = false;
      if (exact_inner) {
        covers = exact_inner(thr) <= params.coverage_e();
      } else if (cls == SetClass::fullspace) {
        covers = true;  // every test draw is admitted
      } else {
        std::int64_t misses = 0;
        for (std::int64_t k = 0; k < n_test; ++k) {
          if (!thr.admits(inm.score(sampler(rng)))) ++misses;
        }
        covers = misses <= allowed_misses;
      }

      if (covers) ++t.covering;
      if (cls == SetClass::fullspace) ++t.fullspace;
      if (cls == SetClass::empty) ++t.empty;
      if (cls == SetClass::nontrivial && covers) ++t.nontrivial_covering;
    }
  });

  GuaranteeReport report{theorem1_bound(params), n_cal, n_test, static_cast<bool>(exact_inner)};
  for (const auto& t : tallies) {
    report.covering += t.covering;
    report.fullspace += t.fullspace;
    report.nontrivial_covering += t.nontrivial_covering;
    report.empty += t.empty;
  }
  return report;
}

}  // namespace berncert
