#include "berncert/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <limits>
#include <memory>
#include <ostream>
#include <stdexcept>

#include "CLI11.hpp"
#include "berncert/bernoulli_case.hpp"
#include "berncert/bpci.hpp"
#include "berncert/conformal.hpp"
#include "berncert/experiments.hpp"
#include "json.hpp"

namespace berncert {

namespace {

using nlohmann::json;

std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

class FlagError : public std::domain_error {
 public:
  FlagError(const std::string& flag, const std::string& what) : std::domain_error(flag + ": " + what) {}
};

enum class Bounds { closed, open, open_low };

Rational probability_flag(const std::string& flag, const std::string& text, Bounds bounds = Bounds::closed) {
  Rational r;
  try {
    r = parse_rational(text);
  } catch (const std::exception& e) {
    throw FlagError(flag, "cannot parse '" + text + "' as a probability (" + e.what() + ")");
  }
  const Rational zero(0), one(1);
  const bool ok = bounds == Bounds::closed ? (r >= zero && r <= one)
                  : bounds == Bounds::open ? (r > zero && r < one)
                                           : (r > zero && r <= one);
  if (!ok) {
    const char* range = bounds == Bounds::closed ? "[0, 1]" : bounds == Bounds::open ? "(0, 1)" : "(0, 1]";
    throw FlagError(flag, "value " + text + " outside " + range);
  }
  return r;
}

void require_at_least(const std::string& flag, long long value, long long min) {
  if (value < min) throw FlagError(flag, "must be >= " + std::to_string(min) + ", got " + std::to_string(value));
}

struct BpciArgs {
  int n = 0;
  int successes = 0;
  std::string alpha = "0.05";
  std::string method = "clopper-pearson";
  bool json = false;
};

int cmd_bpci(const BpciArgs& a, std::ostream& out) {
  require_at_least("--n", a.n, 1);
  if (a.successes < 0 || a.successes > a.n) {
    throw FlagError("--successes", "must lie in [0, n] = [0, " + std::to_string(a.n) + "], got " +
                                       std::to_string(a.successes));
  }
  const double alpha = probability_flag("--alpha", a.alpha, Bounds::open).to_double();
  std::unique_ptr<IntervalEstimator> estimator;
  if (a.method == "clopper-pearson") {
    estimator = std::make_unique<ClopperPearson>(alpha);
  } else if (a.method == "full") {
    estimator = std::make_unique<FullInterval>();
  } else {
    throw FlagError("--method", "unknown method '" + a.method + "' (expected clopper-pearson or full)");
  }
  const IntervalEstimate e = estimator->estimate(a.n, a.successes);
  if (a.json) {
    out << json{{"command", "bpci"}, {"method", a.method}, {"n", a.n},        {"successes", a.successes},
                {"alpha", alpha},    {"lower", e.lower},   {"upper", e.upper}}
               .dump()
        << '\n';
    return kExitOk;
  }
  out << "method: " << a.method << '\n'
      << "n: " << a.n << '\n'
      << "successes: " << a.successes << '\n'
      << "alpha: " << fmt12(alpha) << '\n'
      << "lower: " << fmt12(e.lower) << '\n'
      << "upper: " << fmt12(e.upper) << '\n';
  return kExitOk;
}

struct CpBoundArgs {
  int n = 0;
  std::string epsilon;
  std::string coverage;
  bool json = false;
};

int cmd_cp_bound(const CpBoundArgs& a, std::ostream& out) {
  require_at_least("--n", a.n, 1);
  const Rational eps = probability_flag("--epsilon", a.epsilon);
  const double e = probability_flag("--coverage", a.coverage).to_double();
  const PacBound bound = theorem1_bound(PacParams(eps, e, a.n));
  if (a.json) {
    out << json{{"command", "cp-bound"}, {"n", a.n},
                {"epsilon", eps.str()},  {"coverage", e},
                {"J", bound.params.j()}, {"delta", bound.delta},
                {"confidence", bound.confidence}}
               .dump()
        << '\n';
    return kExitOk;
  }
  out << "n: " << a.n << '\n'
      << "epsilon: " << eps.str() << '\n'
      << "coverage_E: " << fmt12(e) << '\n'
      << "J: " << bound.params.j() << '\n'
      << "delta: " << fmt12(bound.delta) << '\n'
      << "confidence: " << fmt12(bound.confidence) << '\n';
  return kExitOk;
}

struct CounterexampleArgs {
  std::string b;
  std::string coverage;
  std::string epsilon = "2/3";
  int n = 2;
  bool json = false;
};

int cmd_counterexample(const CounterexampleArgs& a, std::ostream& out) {
  require_at_least("--n", a.n, 1);
  const double b = probability_flag("--b", a.b).to_double();
  const double e = probability_flag("--coverage", a.coverage).to_double();
  const Rational eps = probability_flag("--epsilon", a.epsilon);
  if (eps == Rational(1)) throw FlagError("--epsilon", "must be < 1");

  const ExactSEResult r = exact_se_probability(IndicatorModel(BernoulliParam(b), a.n), eps, e);
  const NaiveIntervalCoverage naive = naive_interval_coverage(BernoulliParam(b), e, a.n, eps);
  const bool bound_holds = r.prob_se >= r.bound.confidence;

  std::string verdict;
  if (!naive.conditional_coverage) {
    verdict = "UNDEFINED: the Q-bar prediction is never issued, so the claim b in [0, E] is never made";
  } else if (*naive.conditional_coverage >= 1.0) {
    verdict = "VALID: b <= E, so [0, E] always contains b";
  } else {
    verdict = "INVALID: b > E, so [0, E] never contains b although the conformal bound holds";
  }

  if (a.json) {
    json j{{"command", "counterexample"},
           {"b", b},
           {"coverage", e},
           {"epsilon", eps.str()},
           {"n", a.n},
           {"J", r.bound.params.j()},
           {"prob_SE", r.prob_se},
           {"prob_fullspace", r.prob_fullspace},
           {"prob_qbar_covering", r.prob_qbar_covering},
           {"delta", r.bound.delta},
           {"confidence", r.bound.confidence},
           {"bound_holds", bound_holds},
           {"naive_claim_rate", naive.claim_rate},
           {"naive_conditional_coverage", nullptr},
           {"verdict", verdict.substr(0, verdict.find(':'))}};
    if (naive.conditional_coverage) j["naive_conditional_coverage"] = *naive.conditional_coverage;
    out << j.dump() << '\n';
    return kExitOk;
  }
  out << "b: " << fmt12(b) << '\n'
      << "coverage_E: " << fmt12(e) << '\n'
      << "epsilon: " << eps.str() << '\n'
      << "n: " << a.n << '\n'
      << "J: " << r.bound.params.j() << '\n'
      << "prob_SE: " << fmt12(r.prob_se) << '\n'
      << "prob_fullspace: " << fmt12(r.prob_fullspace) << '\n'
      << "prob_qbar_covering: " << fmt12(r.prob_qbar_covering) << '\n'
      << "delta: " << fmt12(r.bound.delta) << '\n'
      << "confidence: " << fmt12(r.bound.confidence) << '\n'
      << "bound_holds: " << (bound_holds ? "yes" : "no") << '\n'
      << "naive_claim_rate: " << fmt12(naive.claim_rate) << '\n'
      << "naive_conditional_coverage: "
      << (naive.conditional_coverage ? fmt12(*naive.conditional_coverage) : std::string("undefined (claim never issued)"))
      << '\n'
      << "verdict: " << verdict << '\n';
  return kExitOk;
}

struct AppendixArgs {
  int q_min = 0;
  int q_max = 98;
  std::string alpha_frac = "0.005";
  std::string epsilon = "2/3";
  long long n_cal = -1;
  long long n_test = -1;
  int cal_size = 2;
  std::uint64_t seed = 1;
  std::string mode = "exact-inner";
  std::string out_path = "appendix.csv";
  bool paper_scale = false;
};

int cmd_simulate_appendix(const AppendixArgs& a, std::ostream& out) {
  const auto started = std::chrono::steady_clock::now();
  AppendixConfig config;
  config.q_min = a.q_min;
  config.q_max = a.q_max;
  config.alpha_frac = probability_flag("--alpha-frac", a.alpha_frac, Bounds::open).to_double();
  config.epsilon = probability_flag("--epsilon", a.epsilon);
  if (config.epsilon.is_one()) throw FlagError("--epsilon", "must be < 1");
  const std::int64_t scale = a.paper_scale ? kPaperScale : kDeskScale;
  config.n_cal = a.n_cal < 0 ? scale : a.n_cal;
  config.n_test = a.n_test < 0 ? scale : a.n_test;
  require_at_least("--n-cal", config.n_cal, 1);
  require_at_least("--n-test", config.n_test, 1);
  require_at_least("--cal-size", a.cal_size, 1);
  config.calibration_size = a.cal_size;
  config.master_seed = a.seed;
  try {
    config.mode = parse_appendix_mode(a.mode);
  } catch (const std::domain_error& e) {
    throw FlagError("--mode", e.what());
  }
  for (const auto& [flag, q] : {std::pair{"--q-min", a.q_min}, std::pair{"--q-max", a.q_max}}) {
    const double e = AppendixConfig::coverage_for(q);
    if (!(e > 0.0 && e < 1.0)) throw FlagError(flag, "q = " + std::to_string(q) + " gives E = " + fmt12(e) + ", outside (0, 1)");
  }
  if (a.q_min > a.q_max) throw FlagError("--q-min", "must not exceed --q-max");

  const std::vector<ExperimentRow> rows = run_appendix(config);
  emit_csv(rows, a.out_path);

  double min_margin = std::numeric_limits<double>::infinity();
  double max_dev = 0.0;
  int outside = 0;
  for (const auto& r : rows) {
    min_margin = std::min(min_margin, r.exact_prob_se - r.bound_esq);
    const double dev = std::fabs(r.h_hat - r.exact_prob_se);
    max_dev = std::max(max_dev, dev);
    if (dev > h_hat_tolerance(r)) ++outside;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  out << "rows: " << rows.size() << '\n'
      << "mode: " << to_string(config.mode) << '\n'
      << "n_cal: " << config.n_cal << '\n'
      << "n_test: " << config.n_test << '\n'
      << "seed: " << config.master_seed << '\n'
      << "min_margin_exact_minus_bound: " << fmt12(min_margin) << '\n'
      << "max_abs_h_hat_minus_exact: " << fmt12(max_dev) << '\n'
      << "rows_outside_tolerance: " << outside << '\n'
      << "output: " << a.out_path << '\n'
      << "elapsed_seconds: " << fmt12(seconds) << '\n';
  if (min_margin < 0.0) {
    out << "bound check: FAILED\n";
    return kExitDomainError;
  }
  out << "bound check: ok\n";
  return kExitOk;
}

struct SafetyArgs {
  int n_cal = 100;
  std::string alpha = "0.05";
  std::string epsilon = "2/3";
  std::string coverage = "0.1";
  std::uint64_t seed = 1;
  int horizon = 50;
  double rate = 0.9;
  bool json = false;
};

int cmd_safety_demo(const SafetyArgs& a, std::ostream& out) {
  require_at_least("--n-cal", a.n_cal, 1);
  require_at_least("--horizon", a.horizon, 0);
  if (!(a.rate > 0.0 && a.rate < 1.0)) throw FlagError("--rate", "must lie in (0, 1)");
  const double alpha = probability_flag("--alpha", a.alpha, Bounds::open).to_double();
  const Rational eps = probability_flag("--epsilon", a.epsilon);
  const double e = probability_flag("--coverage", a.coverage).to_double();
  const ToySafetySystem system = linear_contraction_system(a.rate, 1.0, 2.0, a.horizon);
  const SafetyDemoReport r = run_safety_demo(system, a.n_cal, alpha, eps, e, SeededStream{a.seed, 0});
  if (a.json) {
    json j{{"command", "safety-demo"},
           {"n_cal", r.n_cal},
           {"unsafe_count", r.unsafe_count},
           {"alpha", alpha},
           {"certificate_lower", r.certificate.lower},
           {"certificate_upper", r.certificate.upper},
           {"realized_set", std::string(to_string(r.realized_set))},
           {"J", r.bound.params.j()},
           {"confidence", r.bound.confidence},
           {"naive_claim_upper", nullptr},
           {"annotation", r.annotation}};
    if (r.naive_claim) j["naive_claim_upper"] = r.naive_claim->second;
    out << j.dump() << '\n';
    return kExitOk;
  }
  out << "system: x <- " << fmt12(a.rate) << " x, unsafe |x| > 1, x0 ~ U[-2, 2], horizon " << a.horizon << '\n'
      << "n_cal: " << r.n_cal << '\n'
      << "unsafe_count: " << r.unsafe_count << '\n'
      << "certificate (Clopper-Pearson, alpha=" << fmt12(alpha) << "): [" << fmt12(r.certificate.lower) << ", "
      << fmt12(r.certificate.upper) << "]\n"
      << "conformal prediction set: " << to_string(r.realized_set) << '\n'
      << "conformal J: " << r.bound.params.j() << '\n'
      << "conformal confidence (1 - delta): " << fmt12(r.bound.confidence) << '\n';
  if (r.naive_claim) {
    out << "naive reading: unsafe probability in [0, " << fmt12(r.naive_claim->second) << "] -- NOT VALID\n";
  }
  out << "note: " << r.annotation << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Binomial proportion intervals versus training-conditional conformal prediction"};
  app.name("berncert");
  app.require_subcommand(1);

  BpciArgs bpci;
  auto* sub_bpci = app.add_subcommand("bpci", "Interval estimate for a binomial proportion");
  sub_bpci->add_option("--n", bpci.n, "Number of trials")->required();
  sub_bpci->add_option("--successes", bpci.successes, "Number of successes")->required();
  sub_bpci->add_option("--alpha", bpci.alpha, "Nominal miscoverage (decimal or fraction)")->capture_default_str();
  sub_bpci->add_option("--method", bpci.method, "clopper-pearson or full")->capture_default_str();
  sub_bpci->add_flag("--json", bpci.json, "Emit a single JSON line");

  CpBoundArgs cp;
  auto* sub_cp = app.add_subcommand("cp-bound", "Training-conditional conformal confidence 1 - delta");
  sub_cp->add_option("--n", cp.n, "Calibration set size")->required();
  sub_cp->add_option("--epsilon", cp.epsilon, "Significance level (decimal or fraction)")->required();
  sub_cp->add_option("--coverage", cp.coverage, "E, so that the target coverage is 1 - E")->required();
  sub_cp->add_flag("--json", cp.json, "Emit a single JSON line");

  CounterexampleArgs cx;
  auto* sub_cx = app.add_subcommand("counterexample", "Exact P^N(S_E) for an indicator score and the [0, E] fallacy");
  sub_cx->add_option("--b", cx.b, "True P(Q)")->required();
  sub_cx->add_option("--coverage", cx.coverage, "E")->required();
  sub_cx->add_option("--epsilon", cx.epsilon, "Significance level")->capture_default_str();
  sub_cx->add_option("--n", cx.n, "Calibration set size")->capture_default_str();
  sub_cx->add_flag("--json", cx.json, "Emit a single JSON line");

  AppendixArgs ap;
  auto* sub_ap = app.add_subcommand("simulate-appendix", "Coverage-grid experiment over E_q = 0.01 + 0.01 q");
  sub_ap->add_option("--q-min", ap.q_min)->capture_default_str();
  sub_ap->add_option("--q-max", ap.q_max)->capture_default_str();
  sub_ap->add_option("--alpha-frac", ap.alpha_frac, "Relative offset of b from E")->capture_default_str();
  sub_ap->add_option("--epsilon", ap.epsilon)->capture_default_str();
  sub_ap->add_option("--n-cal", ap.n_cal, "Calibration replicates (default 5000, 50000 with --paper-scale)");
  sub_ap->add_option("--n-test", ap.n_test, "Test draws per replicate (default 5000, 50000 with --paper-scale)");
  sub_ap->add_option("--cal-size", ap.cal_size, "Calibration set size N")->capture_default_str();
  sub_ap->add_option("--seed", ap.seed)->capture_default_str();
  sub_ap->add_option("--mode", ap.mode, "monte-carlo, exact-inner or fully-exact")->capture_default_str();
  sub_ap->add_option("--out", ap.out_path, "CSV output path")->capture_default_str();
  sub_ap->add_flag("--paper-scale", ap.paper_scale, "Use 50000 replicates and test draws");

  SafetyArgs sd;
  auto* sub_sd = app.add_subcommand("safety-demo", "Toy safety certification: Clopper-Pearson vs conformal");
  sub_sd->add_option("--n-cal", sd.n_cal)->capture_default_str();
  sub_sd->add_option("--alpha", sd.alpha)->capture_default_str();
  sub_sd->add_option("--epsilon", sd.epsilon)->capture_default_str();
  sub_sd->add_option("--coverage", sd.coverage)->capture_default_str();
  sub_sd->add_option("--seed", sd.seed)->capture_default_str();
  sub_sd->add_option("--horizon", sd.horizon)->capture_default_str();
  sub_sd->add_option("--rate", sd.rate, "Contraction factor of the linear map")->capture_default_str();
  sub_sd->add_flag("--json", sd.json, "Emit a single JSON line");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitDomainError;
  }

  try {
    if (*sub_bpci) return cmd_bpci(bpci, out);
    if (*sub_cp) return cmd_cp_bound(cp, out);
    if (*sub_cx) return cmd_counterexample(cx, out);
    if (*sub_ap) return cmd_simulate_appendix(ap, out);
    if (*sub_sd) return cmd_safety_demo(sd, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIoError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomainError;
  }
  return kExitDomainError;
}

}  // namespace berncert
