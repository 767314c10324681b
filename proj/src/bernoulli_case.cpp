#include "berncert/bernoulli_case.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace berncert {

namespace {

void require_proper_level(const Significance& epsilon) {
  if (!epsilon.in_unit_interval()) throw std::domain_error("epsilon must lie in [0, 1], got " + epsilon.str());
  if (epsilon.is_one()) throw std::domain_error("epsilon must be < 1 here; epsilon = 1 only yields the empty set");
}

}  // namespace

std::string_view to_string(PredictionSet set) {
  switch (set) {
    case PredictionSet::q: return "Q";
    case PredictionSet::q_complement: return "Q_complement";
    case PredictionSet::full_space: return "FullSpace";
    case PredictionSet::empty: return "Empty";
  }
  return "?";
}

double inner_coverage(PredictionSet set, BernoulliParam b) {
  switch (set) {
    case PredictionSet::q: return b.value();
    case PredictionSet::q_complement: return 1.0 - b.value();
    case PredictionSet::full_space: return 1.0;
    case PredictionSet::empty: return 0.0;
  }
  return 0.0;
}

PredictionSet from_threshold(const ScoreThreshold& thr) {
  if (thr.admits(1.0)) return PredictionSet::full_space;
  if (thr.admits(0.0)) return PredictionSet::q_complement;
  return PredictionSet::empty;
}

InnerMissOracle indicator_miss_oracle(BernoulliParam b) {
  return [b](const ScoreThreshold& thr) {
    switch (from_threshold(thr)) {
      case PredictionSet::full_space: return 0.0;
      case PredictionSet::q_complement: return b.value();
      case PredictionSet::q: return 1.0 - b.value();
      case PredictionSet::empty: break;
    }
    return 1.0;
  };
}

IndicatorModel::IndicatorModel(BernoulliParam b_, int n_) : b(b_), n(n_) {
  if (n_ < 1) throw std::domain_error("calibration size must be >= 1, got " + std::to_string(n_));
}

PredictionSet inp_closed_form(int n, int ones_count, const Significance& epsilon) {
  if (n < 1) throw std::domain_error("calibration size must be >= 1, got " + std::to_string(n));
  if (ones_count < 0 || ones_count > n) {
    throw std::domain_error("ones_count " + std::to_string(ones_count) + " outside [0, " + std::to_string(n) + "]");
  }
  if (!epsilon.in_unit_interval()) throw std::domain_error("epsilon must lie in [0, 1], got " + epsilon.str());
  if (epsilon.is_one()) return PredictionSet::empty;
  return epsilon.exceeded_by(Rational(ones_count + 1, n + 1)) ? PredictionSet::full_space
                                                              : PredictionSet::q_complement;
}

ExactSEResult exact_se_probability(const IndicatorModel& model, const Significance& epsilon, double coverage_e) {
  require_proper_level(epsilon);
  const PacParams params(epsilon, coverage_e, model.n);
  const BinomialSpec spec(model.n, model.b);
  const int j = params.j();

  ExactSEResult out{0.0, 0.0, 0.0, theorem1_bound(params)};
  // the set is Z exactly when ones_count >= J + 1
  out.prob_fullspace = binom_sf(spec, j);
  if (model.b.value() <= coverage_e) {
    out.prob_qbar_covering = binom_cdf(spec, j);
    out.prob_se = 1.0;
  } else {
    out.prob_qbar_covering = 0.0;
    out.prob_se = out.prob_fullspace;
  }
  return out;
}

Example1Table enumerate_example1(BernoulliParam b, const Significance& epsilon, double coverage_e) {
  require_proper_level(epsilon);
  if (!(coverage_e >= 0.0 && coverage_e <= 1.0)) throw std::domain_error("coverage E must lie in [0, 1]");
  const double p = b.value();
  const std::array<double, 3> weights{(1.0 - p) * (1.0 - p), 2.0 * p * (1.0 - p), p * p};

  Example1Table table;
  for (int ones = 0; ones <= 2; ++ones) {
    std::vector<double> scores{ones >= 1 ? 1.0 : 0.0, ones >= 2 ? 1.0 : 0.0};
    const CalibrationScores cal(std::move(scores));
    const bool q_in = inp_contains(cal, 1.0, epsilon);
    const bool qbar_in = inp_contains(cal, 0.0, epsilon);
    PredictionSet set = PredictionSet::empty;
    if (q_in && qbar_in) set = PredictionSet::full_space;
    else if (qbar_in) set = PredictionSet::q_complement;
    else if (q_in) set = PredictionSet::q;

    Example1Case& c = table.cases[static_cast<std::size_t>(ones)];
    c.ones = ones;
    c.weight = weights[static_cast<std::size_t>(ones)];
    c.set = set;
    c.inner_coverage = inner_coverage(set, b);
    // coverage >= 1 - E, compared on the miss probability to avoid 1 - (1 - b)
    double miss = 1.0;
    if (set == PredictionSet::full_space) miss = 0.0;
    else if (set == PredictionSet::q_complement) miss = p;
    else if (set == PredictionSet::q) miss = 1.0 - p;
    c.in_se = miss <= coverage_e;
  }

  bool all_in = true;
  for (const auto& c : table.cases) all_in = all_in && c.in_se;
  if (all_in) {
    table.prob_se = 1.0;
  } else {
    double total = 0.0;
    for (int ones = 2; ones >= 0; --ones) {
      const auto& c = table.cases[static_cast<std::size_t>(ones)];
      if (c.in_se) total += c.weight;
    }
    table.prob_se = total;
  }
  return table;
}

NaiveIntervalCoverage naive_interval_coverage(BernoulliParam b, double coverage_e, int n,
                                              const Significance& epsilon) {
  require_proper_level(epsilon);
  const PacParams params(epsilon, coverage_e, n);
  NaiveIntervalCoverage out;
  // the claim is issued exactly when the set is Q-bar, i.e. ones_count <= J
  out.claim_rate = binom_cdf(BinomialSpec(n, b), params.j());
  if (out.claim_rate <= 0.0) return out;
  const double claimed_and_covered = b.value() <= coverage_e ? out.claim_rate : 0.0;
  out.conditional_coverage = claimed_and_covered / out.claim_rate;
  return out;
}

}  // namespace berncert
