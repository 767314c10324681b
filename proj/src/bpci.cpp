#include "berncert/bpci.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace berncert {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
}

void check_outcome(int n, int y) {
  if (n < 1) throw std::domain_error("n must be >= 1, got " + std::to_string(n));
  if (y < 0 || y > n) {
    throw std::domain_error("successes " + std::to_string(y) + " outside [0, " + std::to_string(n) + "]");
  }
}

}  // namespace

IntervalEstimate clopper_pearson(int n, int y, double alpha) {
  check_outcome(n, y);
  check_alpha(alpha);
  IntervalEstimate out;
  out.n = n;
  out.y = y;
  out.alpha = alpha;
  out.lower = y == 0 ? 0.0 : binom_tail_invert(n, y, alpha / 2, TailSide::lower);
  out.upper = y == n ? 1.0 : binom_tail_invert(n, y, alpha / 2, TailSide::upper);
  return out;
}

ClopperPearson::ClopperPearson(double alpha) : alpha_(alpha) { check_alpha(alpha); }

IntervalEstimate ClopperPearson::estimate(int n, int y) const { return clopper_pearson(n, y, alpha_); }

IntervalEstimate FullInterval::estimate(int n, int y) const {
  check_outcome(n, y);
  return IntervalEstimate{0.0, 1.0, 0.0, n, y};
}

ConstantInterval::ConstantInterval(double lower, double upper) : lower_(lower), upper_(upper) {
  if (!(0.0 <= lower && lower <= upper && upper <= 1.0)) {
    throw std::domain_error("constant interval must satisfy 0 <= lower <= upper <= 1");
  }
}

IntervalEstimate ConstantInterval::estimate(int n, int y) const {
  check_outcome(n, y);
  return IntervalEstimate{lower_, upper_, 0.0, n, y};
}

IntervalTable::IntervalTable(const IntervalEstimator& estimator, int n) : n_(n) {
  if (n < 1) throw std::domain_error("n must be >= 1");
  rows_.reserve(static_cast<std::size_t>(n) + 1);
  for (int y = 0; y <= n; ++y) {
    IntervalEstimate e = estimator.estimate(n, y);
    if (!(0.0 <= e.lower && e.lower <= e.upper && e.upper <= 1.0)) {
      throw std::logic_error(estimator.name() + " produced an invalid interval at y=" + std::to_string(y));
    }
    rows_.push_back(e);
  }
}

CoverageReport coverage_probability(const IntervalTable& table, BernoulliParam b) {
  CoverageReport report;
  report.b = b.value();
  const BinomialSpec spec(table.n(), b);
  double total = 0.0;
  for (int y = 0; y <= table.n(); ++y) {
    if (table[y].contains(b.value())) {
      report.covering_set.push_back(y);
      total += binom_pmf(spec, y);
    }
  }
  report.coverage = std::min(total, 1.0);
  return report;
}

CoverageReport coverage_probability(const IntervalEstimator& estimator, BernoulliParam b, int n) {
  return coverage_probability(IntervalTable(estimator, n), b);
}

ValidityReport verify_conservative_validity(const IntervalEstimator& estimator, int n, double alpha,
                                            const std::vector<double>& b_grid) {
  if (b_grid.empty()) throw std::domain_error("validity grid must be nonempty");
  const IntervalTable table(estimator, n);
  ValidityReport report;
  report.worst_coverage = 2.0;
  for (const double b : b_grid) {
    const double c = coverage_probability(table, BernoulliParam(b)).coverage;
    ++report.points_checked;
    if (c < report.worst_coverage) {
      report.worst_coverage = c;
      report.worst_b = b;
    }
  }
  report.valid = report.worst_coverage >= 1.0 - alpha;
  return report;
}

std::vector<double> endpoint_augmented_grid(const IntervalTable& table, double step, double probe) {
  if (!(step > 0.0 && step <= 1.0)) throw std::domain_error("grid step must lie in (0, 1]");
  std::vector<double> grid;
  const auto count = static_cast<long>(std::llround(1.0 / step));
  for (long i = 0; i <= count; ++i) grid.push_back(std::min(1.0, static_cast<double>(i) * step));
  auto add = [&grid](double b) {
    if (b >= 0.0 && b <= 1.0) grid.push_back(b);
  };
  for (const auto& row : table.rows()) {
    for (const double e : {row.lower, row.upper}) {
      add(e);
      add(e - probe);
      add(e + probe);
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

double PacFormResult::tolerance(double sigmas) const {
  return sigmas * std::sqrt(exact * (1.0 - exact) / static_cast<double>(trials));
}

bool PacFormResult::consistent(double sigmas) const { return std::fabs(empirical - exact) <= tolerance(sigmas); }

PacFormResult pac_form_check(const IntervalEstimator& estimator, BernoulliParam b, int n, std::int64_t mc_trials,
                             const SeededStream& stream) {
  if (mc_trials < 1) throw std::domain_error("mc_trials must be >= 1");
  const IntervalTable table(estimator, n);
  Rng rng = stream.rng();
  PacFormResult out;
  out.trials = mc_trials;
  for (std::int64_t t = 0; t < mc_trials; ++t) {
    int successes = 0;
    for (int i = 0; i < n; ++i) successes += rng.bernoulli(b.value()) ? 1 : 0;
    // the PAC form asks whether Pr(R_{N+1} = 1), which is b, lies in the interval
    if (table[successes].contains(b.value())) ++out.hits;
  }
  out.empirical = static_cast<double>(out.hits) / static_cast<double>(mc_trials);
  out.exact = coverage_probability(table, b).coverage;
  return out;
}

}  // namespace berncert
