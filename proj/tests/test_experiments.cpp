#include "berncert/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gtest/gtest.h"

using namespace berncert;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

AppendixConfig exact_config() {
  AppendixConfig c;
  c.mode = AppendixMode::fully_exact;
  return c;
}

}  // namespace

TEST(appendix_config, parameters) {
  const AppendixConfig c;
  EXPECT_EQ(AppendixConfig::coverage_for(0), 0.01);
  EXPECT_EQ(AppendixConfig::coverage_for(49), 0.5);
  EXPECT_EQ(AppendixConfig::coverage_for(98), 0.99);
  EXPECT_NEAR(c.parameter_for(49, Regime::b_le_e), 0.4975, 1e-16);
  EXPECT_NEAR(c.parameter_for(49, Regime::b_gt_e), 0.5025, 1e-16);
  EXPECT_LE(c.parameter_for(98, Regime::b_gt_e), 1.0);
  EXPECT_EQ(parse_appendix_mode("exact_inner"), AppendixMode::exact_inner);
  EXPECT_EQ(parse_appendix_mode("monte-carlo"), AppendixMode::monte_carlo);
  EXPECT_THROW(parse_appendix_mode("quantum"), std::domain_error);
}

TEST(appendix_config, validation) {
  AppendixConfig c = exact_config();
  c.q_min = 99;
  c.q_max = 99;
  EXPECT_THROW(run_appendix(c), std::domain_error);
  c = exact_config();
  c.q_min = 10;
  c.q_max = 5;
  EXPECT_THROW(run_appendix(c), std::domain_error);
  c = exact_config();
  c.epsilon = Rational(1);
  EXPECT_THROW(run_appendix(c), std::domain_error);
  c = exact_config();
  c.n_cal = 0;
  EXPECT_THROW(run_appendix(c), std::domain_error);
}

TEST(run_appendix, fully_exact_midpoint) {
  AppendixConfig c = exact_config();
  c.q_min = 49;
  c.q_max = 49;
  const auto rows = run_appendix(c);
  ASSERT_EQ(rows.size(), 2u);
  const ExperimentRow& le = rows[0];
  const ExperimentRow& gt = rows[1];
  EXPECT_EQ(le.regime, Regime::b_le_e);
  EXPECT_EQ(le.exact_prob_se, 1.0);
  EXPECT_NEAR(le.frac_fullspace, 0.4975 * 0.4975, 1e-15);
  EXPECT_NEAR(le.frac_qbar_covering, 1.0 - 0.4975 * 0.4975, 1e-15);
  EXPECT_EQ(gt.regime, Regime::b_gt_e);
  EXPECT_NEAR(gt.exact_prob_se, 0.25250625, 1e-15);
  EXPECT_EQ(gt.frac_qbar_covering, 0.0);
  EXPECT_NEAR(gt.bound_esq, 0.25, 1e-15);
  EXPECT_EQ(gt.h_hat, gt.exact_prob_se);
  EXPECT_EQ(h_hat_tolerance(gt), 0.0);
}

TEST(run_appendix, exact_never_below_bound) {
  const auto rows = run_appendix(exact_config());
  ASSERT_EQ(rows.size(), 198u);
  for (const auto& r : rows) {
    EXPECT_GE(r.exact_prob_se, r.bound_esq) << r.q;
    EXPECT_NEAR(r.bound_esq, r.coverage_e * r.coverage_e, 1e-15);
  }
}

TEST(run_appendix, exact_inner_within_tolerance) {
  AppendixConfig c;
  c.q_min = 20;
  c.q_max = 30;
  c.n_cal = 3000;
  c.master_seed = 5;
  for (const auto& r : run_appendix(c)) {
    EXPECT_LE(std::fabs(r.h_hat - r.exact_prob_se), h_hat_tolerance(r)) << r.q << " " << to_string(r.regime);
    if (r.regime == Regime::b_gt_e) EXPECT_EQ(r.frac_qbar_covering, 0.0);
    if (r.regime == Regime::b_le_e) EXPECT_EQ(r.h_hat, 1.0);
  }
}

TEST(run_appendix, monte_carlo_within_tolerance) {
  AppendixConfig c;
  c.q_min = 40;
  c.q_max = 44;
  c.n_cal = 2000;
  c.n_test = 400;
  c.mode = AppendixMode::monte_carlo;
  c.master_seed = 9;
  for (const auto& r : run_appendix(c)) {
    EXPECT_LE(std::fabs(r.h_hat - r.expected_h_hat), 5.0 * std::sqrt(r.expected_h_hat * (1 - r.expected_h_hat) / 2000.0))
        << r.q << " " << to_string(r.regime);
    EXPECT_LE(std::fabs(r.h_hat - r.exact_prob_se), h_hat_tolerance(r));
  }
}

TEST(run_appendix, deterministic_across_workers) {
  AppendixConfig c;
  c.q_min = 0;
  c.q_max = 9;
  c.n_cal = 1500;
  c.workers = 1;
  const auto a = run_appendix(c);
  c.workers = 7;
  const auto b = run_appendix(c);
  std::ostringstream sa, sb;
  write_csv(a, sa);
  write_csv(b, sb);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(write_csv, format) {
  const auto rows = run_appendix(exact_config());
  std::ostringstream out;
  write_csv(rows, out);
  const std::string text = out.str();
  EXPECT_EQ(text.find('\r'), std::string::npos);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 199);
  EXPECT_EQ(text.substr(0, text.find('\n')), kCsvHeader);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  EXPECT_EQ(line, "0,0.01,0.00995,b_le_E,fully-exact,1,1,0.0001,9.90025e-05,0.9999009975,5000,5000,0");
}

TEST(emit_csv, rerun_is_byte_identical) {
  const auto dir = std::filesystem::temp_directory_path() / "berncert_test_experiments";
  std::filesystem::create_directories(dir);
  AppendixConfig c;
  c.q_min = 30;
  c.q_max = 35;
  c.n_cal = 1000;
  c.master_seed = 3;
  emit_csv(run_appendix(c), dir / "a.csv");
  emit_csv(run_appendix(c), dir / "b.csv");
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  std::filesystem::remove_all(dir);
}

TEST(emit_csv, error_paths) {
  const auto rows = run_appendix(exact_config());
  EXPECT_THROW(emit_csv(rows, "/nonexistent_dir_berncert/out.csv"), IoError);
  EXPECT_THROW(emit_csv({}, std::filesystem::temp_directory_path() / "berncert_empty.csv"), std::domain_error);
}

TEST(safety_demo, no_unsafe_draws) {
  // radius above half-width: nothing is ever unsafe
  const ToySafetySystem sys = linear_contraction_system(0.9, 3.0, 2.0, 20);
  const SafetyDemoReport r = run_safety_demo(sys, 100, 0.05, Significance(Rational(1, 10)), 0.1, SeededStream{1, 0});
  EXPECT_EQ(r.unsafe_count, 0);
  EXPECT_EQ(r.certificate.lower, 0.0);
  EXPECT_NEAR(r.certificate.upper, 0.036216692645176419, 1e-12);
  EXPECT_EQ(r.realized_set, PredictionSet::q_complement);
  ASSERT_TRUE(r.naive_claim.has_value());
  EXPECT_EQ(r.naive_claim->second, 0.1);
  EXPECT_NE(r.annotation.find("NOT a confidence interval"), std::string::npos);
}

TEST(safety_demo, all_unsafe_draws) {
  ToySafetySystem always = linear_contraction_system();
  always.unsafe = [](const State&) { return true; };
  const SafetyDemoReport r = run_safety_demo(always, 100, 0.05, Significance(Rational(1, 10)), 0.1, SeededStream{1, 0});
  EXPECT_EQ(r.unsafe_count, 100);
  EXPECT_NEAR(r.certificate.lower, 1.0 - 0.036216692645176419, 1e-12);
  EXPECT_EQ(r.certificate.upper, 1.0);
  EXPECT_EQ(r.realized_set, PredictionSet::full_space);
  EXPECT_FALSE(r.naive_claim.has_value());
}

TEST(safety_demo, linear_map_unsafe_fraction) {
  const ToySafetySystem sys = linear_contraction_system();
  Rng rng(4);
  const int n = 40000;
  int unsafe = 0;
  for (int i = 0; i < n; ++i) unsafe += sys.reaches_unsafe(sys.initial_state(rng)) ? 1 : 0;
  EXPECT_NEAR(static_cast<double>(unsafe) / n, 0.5, 5.0 * std::sqrt(0.25 / n));
  EXPECT_TRUE(sys.reaches_unsafe({1.5}));
  EXPECT_FALSE(sys.reaches_unsafe({0.99}));
  EXPECT_THROW(linear_contraction_system(0.9, 1.0, 2.0, -1), std::domain_error);
}

TEST(safety_demo, certificate_coverage) {
  const ReplicationSummary s =
      safety_certificate_coverage(linear_contraction_system(), 0.5, 200, 100, 0.05, SeededStream{2, 0});
  EXPECT_EQ(s.replications, 200);
  EXPECT_GE(s.rate(), 0.95 - 3.0 * std::sqrt(0.95 * 0.05 / 200));
  EXPECT_THROW(safety_certificate_coverage(linear_contraction_system(), 0.5, 0, 100, 0.05, SeededStream{2, 0}),
               std::domain_error);
}
