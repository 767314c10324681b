#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "berncert/bernoulli_case.hpp"
#include "berncert/bpci.hpp"
#include "berncert/conformal.hpp"
#include "berncert/experiments.hpp"

namespace py = pybind11;
using namespace berncert;

namespace {

py::object fraction(const Rational& r) {
  return py::module_::import("fractions").attr("Fraction")(r.num(), r.den());
}

// Fractions and strings stay exact; floats are compared exactly as doubles.
Significance to_significance(const py::handle& value) {
  if (py::isinstance<py::str>(value)) return parse_rational(value.cast<std::string>());
  if (py::isinstance<py::bool_>(value)) throw py::type_error("epsilon must be a number, not bool");
  if (py::isinstance<py::int_>(value)) return Rational(value.cast<std::int64_t>());
  if (py::hasattr(value, "numerator") && py::hasattr(value, "denominator") && !py::isinstance<py::float_>(value)) {
    return Rational(value.attr("numerator").cast<std::int64_t>(), value.attr("denominator").cast<std::int64_t>());
  }
  return value.cast<double>();
}

py::dict bound_dict(const PacBound& b) {
  py::dict d;
  d["J"] = b.params.j();
  d["delta"] = b.delta;
  d["confidence"] = b.confidence;
  return d;
}

py::dict row_dict(const ExperimentRow& r) {
  py::dict d;
  d["q"] = r.q;
  d["E"] = r.coverage_e;
  d["b"] = r.b;
  d["regime"] = std::string(to_string(r.regime));
  d["mode"] = std::string(to_string(r.mode));
  d["h_hat"] = r.h_hat;
  d["exact_prob_SE"] = r.exact_prob_se;
  d["bound_Esq"] = r.bound_esq;
  d["frac_fullspace"] = r.frac_fullspace;
  d["frac_qbar_covering"] = r.frac_qbar_covering;
  d["n_cal"] = r.n_cal;
  d["n_test"] = r.n_test;
  d["seed"] = r.seed;
  d["tolerance"] = h_hat_tolerance(r);
  return d;
}

std::vector<ExperimentRow> appendix_rows(int q_min, int q_max, double alpha_frac, const py::object& epsilon,
                                         std::int64_t n_cal, std::int64_t n_test, int cal_size, std::uint64_t seed,
                                         const std::string& mode, unsigned workers) {
  AppendixConfig c;
  c.q_min = q_min;
  c.q_max = q_max;
  c.alpha_frac = alpha_frac;
  c.epsilon = to_significance(epsilon);
  c.n_cal = n_cal;
  c.n_test = n_test;
  c.calibration_size = cal_size;
  c.master_seed = seed;
  c.mode = parse_appendix_mode(mode);
  c.workers = workers;
  py::gil_scoped_release release;
  return run_appendix(c);
}

py::list to_list(const std::vector<ExperimentRow>& rows) {
  py::list out;
  for (const auto& r : rows) out.append(row_dict(r));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Binomial proportion intervals and training-conditional conformal prediction";

  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def(
      "clopper_pearson",
      [](int n, int y, double alpha) {
        const IntervalEstimate e = clopper_pearson(n, y, alpha);
        return py::make_tuple(e.lower, e.upper);
      },
      py::arg("n"), py::arg("successes"), py::arg("alpha") = 0.05, "Clopper-Pearson interval (lower, upper).");

  m.def(
      "cp_coverage",
      [](int n, double b, double alpha) {
        return coverage_probability(ClopperPearson(alpha), BernoulliParam(b), n).coverage;
      },
      py::arg("n"), py::arg("b"), py::arg("alpha") = 0.05, "Exact coverage of the Clopper-Pearson interval at b.");

  m.def(
      "p_value",
      [](const std::vector<double>& scores, double candidate) {
        return fraction(p_value(CalibrationScores(scores), candidate));
      },
      py::arg("calibration_scores"), py::arg("candidate_score"), "Conformal p-value as a Fraction.");

  m.def(
      "inp_contains",
      [](const std::vector<double>& scores, double candidate, const py::object& epsilon) {
        return inp_contains(CalibrationScores(scores), candidate, to_significance(epsilon));
      },
      py::arg("calibration_scores"), py::arg("candidate_score"), py::arg("epsilon"));

  m.def(
      "theorem1_bound",
      [](int n, const py::object& epsilon, double coverage) {
        return bound_dict(theorem1_bound(PacParams(to_significance(epsilon), coverage, n)));
      },
      py::arg("n"), py::arg("epsilon"), py::arg("coverage"),
      "J, delta and confidence 1 - delta of the training-conditional bound.");

  m.def(
      "inp_closed_form",
      [](int n, int ones, const py::object& epsilon) {
        return std::string(to_string(inp_closed_form(n, ones, to_significance(epsilon))));
      },
      py::arg("n"), py::arg("ones"), py::arg("epsilon"));

  m.def(
      "exact_se_probability",
      [](double b, double coverage, const py::object& epsilon, int n) {
        const ExactSEResult r = exact_se_probability(IndicatorModel(BernoulliParam(b), n), to_significance(epsilon),
                                                     coverage);
        py::dict d = bound_dict(r.bound);
        d["prob_SE"] = r.prob_se;
        d["prob_fullspace"] = r.prob_fullspace;
        d["prob_qbar_covering"] = r.prob_qbar_covering;
        return d;
      },
      py::arg("b"), py::arg("coverage"), py::arg("epsilon") = fraction(Rational(2, 3)), py::arg("n") = 2,
      "Exact P^N(S_E) for an indicator nonconformity measure.");

  m.def(
      "naive_interval_coverage",
      [](double b, double coverage, const py::object& epsilon, int n) {
        const NaiveIntervalCoverage c =
            naive_interval_coverage(BernoulliParam(b), coverage, n, to_significance(epsilon));
        py::dict d;
        d["claim_rate"] = c.claim_rate;
        d["conditional_coverage"] = c.conditional_coverage ? py::cast(*c.conditional_coverage) : py::none();
        return d;
      },
      py::arg("b"), py::arg("coverage"), py::arg("epsilon") = fraction(Rational(2, 3)), py::arg("n") = 2);

  m.def(
      "run_appendix",
      [](int q_min, int q_max, double alpha_frac, const py::object& epsilon, std::int64_t n_cal, std::int64_t n_test,
         int cal_size, std::uint64_t seed, const std::string& mode, unsigned workers) {
        return to_list(appendix_rows(q_min, q_max, alpha_frac, epsilon, n_cal, n_test, cal_size, seed, mode, workers));
      },
      py::arg("q_min") = 0, py::arg("q_max") = 98, py::arg("alpha_frac") = 0.005,
      py::arg("epsilon") = fraction(Rational(2, 3)), py::arg("n_cal") = kDeskScale, py::arg("n_test") = kDeskScale,
      py::arg("cal_size") = 2, py::arg("seed") = 1, py::arg("mode") = "exact-inner", py::arg("workers") = 0,
      "Coverage-grid experiment; returns one dict per (q, regime).");

  m.def(
      "simulate_appendix",
      [](const std::string& out, int q_min, int q_max, double alpha_frac, const py::object& epsilon,
         std::int64_t n_cal, std::int64_t n_test, int cal_size, std::uint64_t seed, const std::string& mode,
         unsigned workers) {
        const auto rows = appendix_rows(q_min, q_max, alpha_frac, epsilon, n_cal, n_test, cal_size, seed, mode, workers);
        emit_csv(rows, out);
        return to_list(rows);
      },
      py::arg("out"), py::arg("q_min") = 0, py::arg("q_max") = 98, py::arg("alpha_frac") = 0.005,
      py::arg("epsilon") = fraction(Rational(2, 3)), py::arg("n_cal") = kDeskScale, py::arg("n_test") = kDeskScale,
      py::arg("cal_size") = 2, py::arg("seed") = 1, py::arg("mode") = "exact-inner", py::arg("workers") = 0,
      "Runs the grid and writes it as CSV to `out`.");

  m.def(
      "safety_certificate_coverage",
      [](int replications, int n_cal, double alpha, std::uint64_t seed) {
        py::gil_scoped_release release;
        return safety_certificate_coverage(linear_contraction_system(), 0.5, replications, n_cal, alpha,
                                           SeededStream{seed, 0})
            .rate();
      },
      py::arg("replications") = 200, py::arg("n_cal") = 100, py::arg("alpha") = 0.05, py::arg("seed") = 1,
      "Fraction of replications whose Clopper-Pearson interval contains the true unsafe probability 1/2.");

  m.attr("CSV_HEADER") = std::string(kCsvHeader);
}
