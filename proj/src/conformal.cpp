#include "berncert/conformal.hpp"

#include <cmath>
#include <string>

namespace berncert {

CalibrationScores::CalibrationScores(std::vector<double> scores) : sorted_(std::move(scores)) {
  if (sorted_.empty()) throw std::domain_error("calibration set must be nonempty");
  for (const double s : sorted_) {
    if (std::isnan(s)) throw std::domain_error("nonconformity score is NaN");
  }
  std::sort(sorted_.begin(), sorted_.end());
}

std::size_t CalibrationScores::count_at_least(double r) const {
  return static_cast<std::size_t>(sorted_.end() - std::lower_bound(sorted_.begin(), sorted_.end(), r));
}

Rational p_value(const CalibrationScores& cal, double candidate_score) {
  // ties count toward the numerator
  return Rational(static_cast<std::int64_t>(cal.count_at_least(candidate_score)) + 1,
                  static_cast<std::int64_t>(cal.size()) + 1);
}

bool inp_contains(const CalibrationScores& cal, double candidate_score, const Significance& epsilon) {
  if (!epsilon.in_unit_interval()) throw std::domain_error("epsilon must lie in [0, 1], got " + epsilon.str());
  return epsilon.exceeded_by(p_value(cal, candidate_score));
}

PacParams::PacParams(Significance epsilon, double coverage_e, int n)
    : epsilon_(epsilon), coverage_e_(coverage_e), n_(n), j_(0) {
  if (!epsilon_.in_unit_interval()) throw std::domain_error("epsilon must lie in [0, 1], got " + epsilon_.str());
  if (!(coverage_e >= 0.0 && coverage_e <= 1.0)) {
    throw std::domain_error("coverage E must lie in [0, 1], got " + std::to_string(coverage_e));
  }
  if (n < 1) throw std::domain_error("calibration size must be >= 1, got " + std::to_string(n));
  j_ = static_cast<int>(epsilon_.floor_times(static_cast<std::int64_t>(n) + 1) - 1);
}

PacBound theorem1_bound(const PacParams& params) {
  PacBound out{params};
  if (params.j() < 0) {
    out.delta = 0.0;
    out.confidence = 1.0;
    return out;
  }
  const BinomialSpec spec(params.n(), BernoulliParam(params.coverage_e()));
  out.delta = binom_cdf(spec, params.j());
  out.confidence = binom_sf(spec, params.j());
  return out;
}

ScoreThreshold prediction_threshold(const CalibrationScores& cal, const Significance& epsilon) {
  if (!epsilon.in_unit_interval()) throw std::domain_error("epsilon must lie in [0, 1], got " + epsilon.str());
  const auto n = static_cast<std::int64_t>(cal.size());
  const std::int64_t needed = epsilon.floor_times(n + 1);  // J + 1
  if (needed <= 0) return {ScoreThreshold::Kind::everything, 0.0};
  if (needed > n) return {ScoreThreshold::Kind::nothing, 0.0};
  // needed-th largest calibration score
  return {ScoreThreshold::Kind::at_most, cal.sorted()[static_cast<std::size_t>(n - needed)]};
}

}  // namespace berncert
