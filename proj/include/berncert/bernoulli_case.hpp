#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "berncert/conformal.hpp"
#include "berncert/dist.hpp"
#include "berncert/rational.hpp"

namespace berncert {

// With an indicator nonconformity measure for a set Q, the prediction set is
// one of four symbolic sets. Only the measure b = P(Q) matters downstream,
// so sets are never materialised.
enum class PredictionSet { q, q_complement, full_space, empty };

std::string_view to_string(PredictionSet set);

// P(Z_{N+1} in set) when P(Q) = b.
double inner_coverage(PredictionSet set, BernoulliParam b);

// Reads a score threshold produced from {0, 1} scores back into a symbolic set.
PredictionSet from_threshold(const ScoreThreshold& thr);

// Exact miss probability for indicator scores; plugs into estimate_se_probability.
InnerMissOracle indicator_miss_oracle(BernoulliParam b);

struct IndicatorModel {
  IndicatorModel(BernoulliParam b, int n);
  BernoulliParam b;
  int n;
};

// Prediction set for a calibration set of size n holding `ones_count` scores
// equal to 1. Points of Q-bar always get p = 1; points of Q get
// p = (ones_count + 1) / (n + 1).
PredictionSet inp_closed_form(int n, int ones_count, const Significance& epsilon);

struct ExactSEResult {
  double prob_se = 0.0;
  double prob_fullspace = 0.0;      // P(set = Z)
  double prob_qbar_covering = 0.0;  // P(set = Q-bar and 1 - b >= 1 - E)
  PacBound bound;
};

// P^N(S_E) in closed form: 1 when b <= E, otherwise P(set = Z) =
// P(ones_count >= J + 1). Requires epsilon < 1.
ExactSEResult exact_se_probability(const IndicatorModel& model, const Significance& epsilon, double coverage_e);

struct Example1Case {
  int ones = 0;
  double weight = 0.0;
  PredictionSet set = PredictionSet::full_space;
  double inner_coverage = 0.0;
  bool in_se = false;
};

struct Example1Table {
  std::array<Example1Case, 3> cases;  // ones = 0, 1, 2
  double prob_se = 0.0;
};

// The N = 2 case table, built by materialising scores and querying the
// conformal predictor directly rather than through the closed form.
Example1Table enumerate_example1(BernoulliParam b, const Significance& epsilon, double coverage_e);

struct NaiveIntervalCoverage {
  double claim_rate = 0.0;                    // P(set = Q-bar)
  std::optional<double> conditional_coverage;  // empty when the claim is never issued
};

// Frequentist coverage of the rule "whenever the set is Q-bar, claim
// b in [0, E]". The conditional coverage is 1 if b <= E and 0 otherwise,
// whatever the nominal level.
NaiveIntervalCoverage naive_interval_coverage(BernoulliParam b, double coverage_e, int n,
                                              const Significance& epsilon);

}  // namespace berncert
