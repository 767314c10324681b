#include "berncert/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "json.hpp"

using namespace berncert;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

// value printed on a "key: value" line
std::string field(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + ": ", 0) == 0) return line.substr(key.size() + 2);
  }
  return "<missing " + key + ">";
}

double num(const std::string& text, const std::string& key) { return std::stod(field(text, key)); }

}  // namespace

TEST(cli_bpci, examples) {
  const CliResult a = run({"bpci", "--n", "10", "--successes", "0", "--alpha", "0.05"});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_NEAR(num(a.out, "upper"), 0.30850, 5e-6);
  EXPECT_EQ(field(a.out, "upper"), "0.308497107819");

  const CliResult b = run({"bpci", "--n", "2", "--successes", "2", "--alpha", "0.1"});
  ASSERT_EQ(b.code, kExitOk);
  EXPECT_NEAR(num(b.out, "lower"), 0.22361, 5e-6);

  const CliResult f = run({"bpci", "--n", "4", "--successes", "1", "--method", "full"});
  EXPECT_EQ(field(f.out, "lower"), "0");
  EXPECT_EQ(field(f.out, "upper"), "1");
}

TEST(cli_bpci, errors_name_the_flag) {
  const CliResult a = run({"bpci", "--n", "10", "--successes", "11", "--alpha", "0.05"});
  EXPECT_EQ(a.code, kExitDomainError);
  EXPECT_NE(a.err.find("--successes"), std::string::npos);

  const CliResult b = run({"bpci", "--n", "10", "--successes", "1", "--alpha", "1.5"});
  EXPECT_EQ(b.code, kExitDomainError);
  EXPECT_NE(b.err.find("--alpha"), std::string::npos);

  const CliResult c = run({"bpci", "--n", "10", "--successes", "1", "--method", "wald"});
  EXPECT_EQ(c.code, kExitDomainError);
  EXPECT_NE(c.err.find("--method"), std::string::npos);

  EXPECT_EQ(run({"bpci", "--n", "ten", "--successes", "1"}).code, kExitDomainError);
  EXPECT_EQ(run({}).code, kExitDomainError);
  EXPECT_EQ(run({"frobnicate"}).code, kExitDomainError);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
}

TEST(cli_cp_bound, examples) {
  const CliResult a = run({"cp-bound", "--n", "2", "--epsilon", "0.6667", "--coverage", "0.4"});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(field(a.out, "J"), "1");
  EXPECT_NEAR(num(a.out, "confidence"), 0.16, 1e-12);

  const CliResult b = run({"cp-bound", "--n", "2", "--epsilon", "0", "--coverage", "0.4"});
  EXPECT_EQ(field(b.out, "J"), "-1");
  EXPECT_EQ(field(b.out, "confidence"), "1");

  const CliResult c = run({"cp-bound", "--n", "9", "--epsilon", "0.5", "--coverage", "0.1"});
  EXPECT_NEAR(num(c.out, "delta"), 0.99910908, 1e-12);

  const CliResult d = run({"cp-bound", "--n", "2", "--epsilon", "2/3", "--coverage", "0.4"});
  EXPECT_EQ(field(d.out, "epsilon"), "2/3");
  EXPECT_EQ(field(d.out, "J"), "1");

  EXPECT_EQ(run({"cp-bound", "--n", "2", "--epsilon", "x", "--coverage", "0.4"}).code, kExitDomainError);
  EXPECT_EQ(run({"cp-bound", "--n", "0", "--epsilon", "0.5", "--coverage", "0.4"}).code, kExitDomainError);
}

TEST(cli_counterexample, examples) {
  const CliResult a = run({"counterexample", "--b", "0.5", "--coverage", "0.4", "--epsilon", "0.6667", "--n", "2"});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_NEAR(num(a.out, "prob_SE"), 0.25, 1e-15);
  EXPECT_EQ(field(a.out, "naive_conditional_coverage"), "0");
  EXPECT_EQ(field(a.out, "bound_holds"), "yes");
  EXPECT_EQ(field(a.out, "verdict").rfind("INVALID", 0), 0u);

  const CliResult b = run({"counterexample", "--b", "0.3", "--coverage", "0.5", "--epsilon", "0.6667", "--n", "2"});
  EXPECT_EQ(field(b.out, "prob_SE"), "1");
  EXPECT_EQ(field(b.out, "naive_conditional_coverage"), "1");
  EXPECT_EQ(field(b.out, "verdict").rfind("VALID", 0), 0u);

  const CliResult c = run({"counterexample", "--b", "1", "--coverage", "0.5", "--epsilon", "0.6667", "--n", "2"});
  ASSERT_EQ(c.code, kExitOk);
  EXPECT_EQ(field(c.out, "naive_conditional_coverage"), "undefined (claim never issued)");
  EXPECT_EQ(field(c.out, "verdict").rfind("UNDEFINED", 0), 0u);

  EXPECT_EQ(run({"counterexample", "--b", "0.5", "--coverage", "0.4", "--epsilon", "1"}).code, kExitDomainError);
  EXPECT_EQ(run({"counterexample", "--b", "-0.5", "--coverage", "0.4"}).code, kExitDomainError);
}

TEST(cli_json, round_trip_is_identity) {
  const std::vector<std::vector<std::string>> commands = {
      {"bpci", "--n", "10", "--successes", "3", "--json"},
      {"cp-bound", "--n", "9", "--epsilon", "0.5", "--coverage", "0.1", "--json"},
      {"counterexample", "--b", "0.5", "--coverage", "0.4", "--json"},
      {"counterexample", "--b", "1", "--coverage", "0.5", "--json"},
      {"safety-demo", "--n-cal", "50", "--json"},
  };
  for (const auto& cmd : commands) {
    const CliResult r = run(cmd);
    ASSERT_EQ(r.code, kExitOk) << cmd[0] << ": " << r.err;
    ASSERT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1) << cmd[0];
    const std::string line = r.out.substr(0, r.out.size() - 1);
    EXPECT_EQ(nlohmann::json::parse(line).dump(), line) << cmd[0];
  }
  const auto j = nlohmann::json::parse(run(commands[3]).out);
  EXPECT_TRUE(j["naive_conditional_coverage"].is_null());
  EXPECT_EQ(j["verdict"], "UNDEFINED");
}

TEST(cli_simulate_appendix, fully_exact_defaults) {
  const auto dir = std::filesystem::temp_directory_path() / "berncert_test_cli";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "grid.csv").string();
  const CliResult r = run({"simulate-appendix", "--mode", "fully-exact", "--out", path});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(field(r.out, "rows"), "198");
  EXPECT_GE(num(r.out, "min_margin_exact_minus_bound"), 0.0);
  EXPECT_EQ(field(r.out, "bound check"), "ok");
  EXPECT_LT(num(r.out, "elapsed_seconds"), 1.0);

  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "q,E,b,regime,mode,h_hat,exact_prob_SE,bound_Esq,frac_fullspace,frac_qbar_covering,n_cal,n_test,seed");
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, 198);
  std::filesystem::remove_all(dir);
}

TEST(cli_simulate_appendix, exact_inner_small) {
  const auto path = (std::filesystem::temp_directory_path() / "berncert_cli_inner.csv").string();
  const CliResult r = run({"simulate-appendix", "--mode", "exact-inner", "--n-cal", "2000", "--seed", "7", "--q-min", "10",
                     "--q-max", "20", "--out", path});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(field(r.out, "rows"), "22");
  EXPECT_EQ(field(r.out, "rows_outside_tolerance"), "0");
  std::filesystem::remove(path);
}

TEST(cli_simulate_appendix, error_exit_codes) {
  const CliResult bad_q = run({"simulate-appendix", "--q-min", "99", "--mode", "fully-exact", "--out", "/tmp/x.csv"});
  EXPECT_EQ(bad_q.code, kExitDomainError);
  EXPECT_NE(bad_q.err.find("--q-min"), std::string::npos);

  const CliResult bad_mode = run({"simulate-appendix", "--mode", "guess"});
  EXPECT_EQ(bad_mode.code, kExitDomainError);
  EXPECT_NE(bad_mode.err.find("--mode"), std::string::npos);

  const CliResult io = run({"simulate-appendix", "--mode", "fully-exact", "--out", "/nonexistent_dir_berncert/a.csv"});
  EXPECT_EQ(io.code, kExitIoError);
}

TEST(cli_safety_demo, prints_certificate_and_warning) {
  const CliResult r = run({"safety-demo", "--n-cal", "100", "--seed", "3"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("Clopper-Pearson"), std::string::npos);
  EXPECT_NE(r.out.find("NOT a confidence interval"), std::string::npos);
  EXPECT_EQ(run({"safety-demo", "--rate", "1.5"}).code, kExitDomainError);
}

TEST(cli_threads, env_var_caps_workers_without_changing_output) {
  const auto path = (std::filesystem::temp_directory_path() / "berncert_cli_threads.csv").string();
  const std::vector<std::string> args = {"simulate-appendix", "--n-cal", "1500", "--q-max", "5", "--out", path};
  ::setenv("BERN_CERT_THREADS", "1", 1);
  ASSERT_EQ(run(args).code, kExitOk);
  std::ifstream a(path);
  const std::string one((std::istreambuf_iterator<char>(a)), {});
  ::setenv("BERN_CERT_THREADS", "6", 1);
  ASSERT_EQ(run(args).code, kExitOk);
  std::ifstream b(path);
  const std::string six((std::istreambuf_iterator<char>(b)), {});
  ::unsetenv("BERN_CERT_THREADS");
  EXPECT_EQ(one, six);
  std::filesystem::remove(path);
}
