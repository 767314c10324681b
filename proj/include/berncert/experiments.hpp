#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "berncert/bernoulli_case.hpp"
#include "berncert/bpci.hpp"
#include "berncert/conformal.hpp"
#include "berncert/dist.hpp"
#include "berncert/rational.hpp"

namespace berncert {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// How the inner coverage and the outer probability are obtained.
//  monte_carlo: sample calibration sets and test points
//  exact_inner: sample calibration sets, use the exact coverage of each set
//  fully_exact: closed form, no sampling at all
enum class AppendixMode { monte_carlo, exact_inner, fully_exact };

std::string_view to_string(AppendixMode mode);
AppendixMode parse_appendix_mode(std::string_view text);

enum class Regime { b_le_e, b_gt_e };
std::string_view to_string(Regime regime);

inline constexpr std::int64_t kDeskScale = 5000;
inline constexpr std::int64_t kPaperScale = 50000;

struct AppendixConfig {
  int q_min = 0;
  int q_max = 98;
  double alpha_frac = 0.005;
  Significance epsilon = Rational(2, 3);
  std::int64_t n_cal = kDeskScale;
  std::int64_t n_test = kDeskScale;
  int calibration_size = 2;
  std::uint64_t master_seed = 0;
  AppendixMode mode = AppendixMode::exact_inner;
  unsigned workers = 0;  // 0 = default_worker_count()

  // E_q = 0.01 + 0.01 q, evaluated as (q + 1) / 100
  static double coverage_for(int q) { return static_cast<double>(q + 1) / 100.0; }
  // b_1 = E (1 - alpha_frac), b_2 = E (1 + alpha_frac) clamped to 1
  double parameter_for(int q, Regime regime) const;
  void validate() const;
};

struct ExperimentRow {
  int q = 0;
  double coverage_e = 0.0;
  double b = 0.0;
  Regime regime = Regime::b_le_e;
  AppendixMode mode = AppendixMode::exact_inner;
  double h_hat = 0.0;
  double exact_prob_se = 0.0;
  double bound_esq = 0.0;  // confidence 1 - delta; E^2 for N = 2, epsilon = 2/3
  double frac_fullspace = 0.0;
  double frac_qbar_covering = 0.0;
  std::int64_t n_cal = 0;
  std::int64_t n_test = 0;
  std::uint64_t seed = 0;
  // mean of h_hat under the sampling scheme of `mode`; equals exact_prob_se
  // except in monte_carlo mode, where noisy inner estimates shift it
  double expected_h_hat = 0.0;
};

// 5 sigma binomial allowance around expected_h_hat plus the inner-estimation
// slack |expected_h_hat - exact_prob_se|; 0 in fully_exact mode.
double h_hat_tolerance(const ExperimentRow& row, double sigmas = 5.0);

std::vector<ExperimentRow> run_appendix(const AppendixConfig& config);

inline constexpr std::string_view kCsvHeader =
    "q,E,b,regime,mode,h_hat,exact_prob_SE,bound_Esq,frac_fullspace,frac_qbar_covering,n_cal,n_test,seed";

void write_csv(const std::vector<ExperimentRow>& rows, std::ostream& out);
void emit_csv(const std::vector<ExperimentRow>& rows, const std::filesystem::path& path);

// Discrete-time dynamical system x_{t+1} = step(x_t) observed for t = 0..horizon.
using State = std::vector<double>;

struct ToySafetySystem {
  std::function<State(const State&)> step;
  int horizon = 0;
  std::function<bool(const State&)> unsafe;
  std::function<State(Rng&)> initial_state;

  // true iff the trajectory from x0 enters the unsafe set at some t in [0, horizon]
  bool reaches_unsafe(const State& x0) const;
};

// x <- rate * x on the line, unsafe set |x| > radius, initial states uniform
// on [-half_width, half_width]. For rate < 1 only states that start unsafe
// are ever unsafe, so P(unsafe) = 1 - radius / half_width.
ToySafetySystem linear_contraction_system(double rate = 0.9, double radius = 1.0, double half_width = 2.0,
                                          int horizon = 50);

struct SafetyDemoReport {
  int n_cal = 0;
  int unsafe_count = 0;
  double alpha = 0.0;
  IntervalEstimate certificate;  // Clopper-Pearson interval for P(unsafe)
  PredictionSet realized_set = PredictionSet::full_space;
  PacBound bound;
  // the interval [0, E] someone might read off a Q-bar prediction; not a confidence interval
  std::optional<std::pair<double, double>> naive_claim;
  std::string annotation;
};

SafetyDemoReport run_safety_demo(const ToySafetySystem& system, int n_cal, double alpha, const Significance& epsilon,
                                 double coverage_e, const SeededStream& stream);

struct ReplicationSummary {
  int replications = 0;
  int covered = 0;
  double rate() const { return replications == 0 ? 0.0 : static_cast<double>(covered) / replications; }
};

// Repeats the certificate computation on independent substreams and counts
// how often the Clopper-Pearson interval contains `true_b`.
ReplicationSummary safety_certificate_coverage(const ToySafetySystem& system, double true_b, int replications,
                                               int n_cal, double alpha, const SeededStream& stream);

}  // namespace berncert
