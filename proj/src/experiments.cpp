#include "berncert/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>

#include "berncert/parallel.hpp"

namespace berncert {

namespace {

std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Mean of h_hat when the inner coverage of each Q-bar prediction is itself
// estimated from n_test draws: a Q-bar set counts as covering iff the number
// of test points landing in Q is at most floor(E n_test).
double monte_carlo_mean(const ExactSEResult& exact, double b, double coverage_e, std::int64_t n_test) {
  const double p_qbar = 1.0 - exact.prob_fullspace;
  if (p_qbar <= 0.0) return exact.prob_fullspace;
  const std::int64_t allowed = Significance(coverage_e).floor_times(n_test);
  const double pass = binom_cdf(BinomialSpec(static_cast<int>(n_test), BernoulliParam(b)), static_cast<int>(allowed));
  return exact.prob_fullspace + p_qbar * pass;
}

ExperimentRow evaluate_row(const AppendixConfig& config, int q, Regime regime) {
  ExperimentRow row;
  row.q = q;
  row.coverage_e = AppendixConfig::coverage_for(q);
  row.b = config.parameter_for(q, regime);
  row.regime = regime;
  row.mode = config.mode;
  row.n_cal = config.n_cal;
  row.n_test = config.n_test;
  row.seed = config.master_seed;

  const BernoulliParam b(row.b);
  const ExactSEResult exact =
      exact_se_probability(IndicatorModel(b, config.calibration_size), config.epsilon, row.coverage_e);
  row.exact_prob_se = exact.prob_se;
  row.bound_esq = exact.bound.confidence;

  if (config.mode == AppendixMode::fully_exact) {
    row.h_hat = exact.prob_se;
    row.expected_h_hat = exact.prob_se;
    row.frac_fullspace = exact.prob_fullspace;
    row.frac_qbar_covering = exact.prob_qbar_covering;
    return row;
  }

  const PacParams params(config.epsilon, row.coverage_e, config.calibration_size);
  const SeededStream stream = SeededStream{config.master_seed, 0}.substream(
      static_cast<std::uint64_t>(q) * 2 + (regime == Regime::b_gt_e ? 1 : 0));
  // sample space Z = [0, 1) with Q = [0, b), so P(Q) = b
  const IndicatorMeasure<double> inm([bv = row.b](const double& z) { return z < bv; });
  const PointSampler<double> sampler = [](Rng& rng) { return rng.uniform01(); };

  const bool exact_inner = config.mode == AppendixMode::exact_inner;
  const GuaranteeReport report =
      estimate_se_probability<double>(inm, sampler, params, config.n_cal, config.n_test, stream,
                                      exact_inner ? indicator_miss_oracle(b) : InnerMissOracle{}, 1);
  row.h_hat = report.h_hat();
  row.frac_fullspace = report.frac_fullspace();
  row.frac_qbar_covering = report.frac_nontrivial_covering();
  row.expected_h_hat = exact_inner ? exact.prob_se : monte_carlo_mean(exact, row.b, row.coverage_e, config.n_test);
  return row;
}

}  // namespace

std::string_view to_string(AppendixMode mode) {
  switch (mode) {
    case AppendixMode::monte_carlo: return "monte-carlo";
    case AppendixMode::exact_inner: return "exact-inner";
    case AppendixMode::fully_exact: return "fully-exact";
  }
  return "?";
}

AppendixMode parse_appendix_mode(std::string_view text) {
  std::string s(text);
  std::replace(s.begin(), s.end(), '_', '-');
  if (s == "monte-carlo") return AppendixMode::monte_carlo;
  if (s == "exact-inner") return AppendixMode::exact_inner;
  if (s == "fully-exact") return AppendixMode::fully_exact;
  throw std::domain_error("unknown mode '" + std::string(text) + "' (expected monte-carlo, exact-inner or fully-exact)");
}

std::string_view to_string(Regime regime) { return regime == Regime::b_le_e ? "b_le_E" : "b_gt_E"; }

double AppendixConfig::parameter_for(int q, Regime regime) const {
  const double e = coverage_for(q);
  if (regime == Regime::b_le_e) return e * (1.0 - alpha_frac);
  return std::min(1.0, e * (1.0 + alpha_frac));
}

void AppendixConfig::validate() const {
  if (q_min > q_max) throw std::domain_error("q-min must not exceed q-max");
  for (const int q : {q_min, q_max}) {
    const double e = coverage_for(q);
    if (!(e > 0.0 && e < 1.0)) {
      throw std::domain_error("q = " + std::to_string(q) + " gives E = " + fmt12(e) + ", outside (0, 1)");
    }
  }
  if (!(alpha_frac > 0.0 && alpha_frac < 1.0)) throw std::domain_error("alpha-frac must lie in (0, 1)");
  if (!epsilon.in_unit_interval() || epsilon.is_one()) throw std::domain_error("epsilon must lie in [0, 1)");
  if (n_cal < 1) throw std::domain_error("n-cal must be >= 1");
  if (n_test < 1 || n_test > 2'000'000'000) throw std::domain_error("n-test must lie in [1, 2e9]");
  if (calibration_size < 1) throw std::domain_error("cal-size must be >= 1");
}

double h_hat_tolerance(const ExperimentRow& row, double sigmas) {
  if (row.mode == AppendixMode::fully_exact) return 0.0;
  const double m = row.expected_h_hat;
  const double spread = sigmas * std::sqrt(m * (1.0 - m) / static_cast<double>(row.n_cal));
  return spread + std::fabs(row.expected_h_hat - row.exact_prob_se);
}

std::vector<ExperimentRow> run_appendix(const AppendixConfig& config) {
  config.validate();
  const int span = config.q_max - config.q_min + 1;
  std::vector<ExperimentRow> rows(static_cast<std::size_t>(span) * 2);
  parallel_for(rows.size(), config.workers, [&](std::size_t i) {
    const int q = config.q_min + static_cast<int>(i / 2);
    const Regime regime = i % 2 == 0 ? Regime::b_le_e : Regime::b_gt_e;
    rows[i] = evaluate_row(config, q, regime);
  });
  return rows;
}

void write_csv(const std::vector<ExperimentRow>& rows, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.q << ',' << fmt12(r.coverage_e) << ',' << fmt12(r.b) << ',' << to_string(r.regime) << ','
        << to_string(r.mode) << ',' << fmt12(r.h_hat) << ',' << fmt12(r.exact_prob_se) << ',' << fmt12(r.bound_esq)
        << ',' << fmt12(r.frac_fullspace) << ',' << fmt12(r.frac_qbar_covering) << ',' << r.n_cal << ','
        << r.n_test << ',' << r.seed << '\n';
  }
}

void emit_csv(const std::vector<ExperimentRow>& rows, const std::filesystem::path& path) {
  if (rows.empty()) throw std::domain_error("no rows to write");
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  write_csv(rows, file);
  file.flush();
  if (!file) throw IoError("failed writing " + path.string());
}

bool ToySafetySystem::reaches_unsafe(const State& x0) const {
  State x = x0;
  for (int t = 0;; ++t) {
    if (unsafe(x)) return true;
    if (t == horizon) return false;
    x = step(x);
  }
}

ToySafetySystem linear_contraction_system(double rate, double radius, double half_width, int horizon) {
  if (horizon < 0) throw std::domain_error("horizon must be >= 0");
  if (!(radius > 0.0 && half_width > 0.0)) throw std::domain_error("radius and half-width must be positive");
  ToySafetySystem sys;
  sys.horizon = horizon;
  sys.step = [rate](const State& x) {
    State next(x.size());
    std::transform(x.begin(), x.end(), next.begin(), [rate](double v) { return rate * v; });
    return next;
  };
  sys.unsafe = [radius](const State& x) { return std::fabs(x.at(0)) > radius; };
  sys.initial_state = [half_width](Rng& rng) { return State{rng.uniform(-half_width, half_width)}; };
  return sys;
}

SafetyDemoReport run_safety_demo(const ToySafetySystem& system, int n_cal, double alpha, const Significance& epsilon,
                                 double coverage_e, const SeededStream& stream) {
  if (n_cal < 1) throw std::domain_error("n_cal must be >= 1");
  const PacParams params(epsilon, coverage_e, n_cal);
  Rng rng = stream.rng();
  std::vector<double> scores(static_cast<std::size_t>(n_cal));
  int unsafe = 0;
  for (auto& s : scores) {
    // indicator nonconformity: 1 iff the trajectory enters the unsafe set
    s = system.reaches_unsafe(system.initial_state(rng)) ? 1.0 : 0.0;
    unsafe += s > 0.0 ? 1 : 0;
  }

  SafetyDemoReport report{
      .n_cal = n_cal,
      .unsafe_count = unsafe,
      .alpha = alpha,
      .certificate = clopper_pearson(n_cal, unsafe, alpha),
      .realized_set = epsilon.is_one() ? PredictionSet::empty
                                       : from_threshold(prediction_threshold(CalibrationScores(scores), epsilon)),
      .bound = theorem1_bound(params),
      .naive_claim = std::nullopt,
      .annotation =
          "The conformal bound concerns how often the prediction set reaches coverage 1-E. "
          "It is NOT a confidence interval for the unsafe probability; use the Clopper-Pearson interval.",
  };
  if (report.realized_set == PredictionSet::q_complement) report.naive_claim = std::make_pair(0.0, coverage_e);
  return report;
}

ReplicationSummary safety_certificate_coverage(const ToySafetySystem& system, double true_b, int replications,
                                               int n_cal, double alpha, const SeededStream& stream) {
  if (replications < 1) throw std::domain_error("replications must be >= 1");
  if (n_cal < 1) throw std::domain_error("n_cal must be >= 1");
  ReplicationSummary out;
  out.replications = replications;
  for (int r = 0; r < replications; ++r) {
    Rng rng = stream.substream(static_cast<std::uint64_t>(r)).rng();
    int unsafe = 0;
    for (int i = 0; i < n_cal; ++i) unsafe += system.reaches_unsafe(system.initial_state(rng)) ? 1 : 0;
    if (clopper_pearson(n_cal, unsafe, alpha).contains(true_b)) ++out.covered;
  }
  return out;
}

}  // namespace berncert
