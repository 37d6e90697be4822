#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstring>
#include <string>

#include "biasedsgd.h"
#include "doctest.h"

namespace {

struct Str {
  char* s = nullptr;
  ~Str() { bsgd_string_free(s); }
  std::string str() const { return s ? s : ""; }
};

}  // namespace

TEST_CASE("problem handles open, query, and close") {
  bsgd_problem* p = nullptr;
  REQUIRE(bsgd_problem_open("sum-quad10", &p) == BSGD_OK);
  bsgd_problem_info info{};
  REQUIRE(bsgd_problem_query(p, &info) == BSGD_OK);
  CHECK(info.n == 4);
  CHECK(info.d == 10);
  CHECK(info.L == doctest::Approx(1.25));
  CHECK(info.mu == doctest::Approx(1.25));
  CHECK(info.delta_star > 0.0);
  bsgd_problem_close(p);

  bsgd_problem* bad = nullptr;
  CHECK(bsgd_problem_open("nope", &bad) == BSGD_ERR_UNKNOWN_NAME);
  CHECK(std::string(bsgd_last_error()).find("unknown problem") != std::string::npos);

  Str names;
  REQUIRE(bsgd_problem_registry(&names.s) == BSGD_OK);
  CHECK(names.str().find("parabola") != std::string::npos);
}

TEST_CASE("estimator records and framework constants") {
  bsgd_estimator* e = nullptr;
  REQUIRE(bsgd_estimator_parse("kind=top-k; k=2", &e) == BSGD_OK);
  Str rec;
  REQUIRE(bsgd_estimator_format(e, &rec.s) == BSGD_OK);
  CHECK(rec.str() == "kind=top-k; k=2");
  bsgd_abc abc{};
  REQUIRE(bsgd_estimator_constants(e, nullptr, 10, &abc, nullptr) == BSGD_OK);
  CHECK(abc.B == 1.0);
  CHECK(abc.b == doctest::Approx(0.2));
  bsgd_estimator_close(e);

  bsgd_estimator* bad = nullptr;
  CHECK(bsgd_estimator_parse("kind=top-k; k=0", &bad) == BSGD_ERR_INVALID_ARGUMENT);
  CHECK(bsgd_estimator_parse("nonsense", &bad) == BSGD_ERR_INVALID_ARGUMENT);
}

TEST_CASE("assumption table, implication map, stepsizes, bounds") {
  bsgd_abc abc{};
  REQUIRE(bsgd_abc_from_assumption("kind=abs; delta=1", &abc) == BSGD_OK);
  CHECK(abc.B == 2.0);
  CHECK(abc.C == 2.0);
  CHECK(abc.b == 0.5);
  CHECK(abc.c == 0.5);

  Str mapped;
  REQUIRE(bsgd_implication("kind=con; delta=1.3333333333333333", "bvd", &mapped.s) ==
          BSGD_OK);
  CHECK(mapped.str().find("kind=bvd") != std::string::npos);
  Str none;
  REQUIRE(bsgd_implication("kind=con; delta=2", "abs", &none.s) == BSGD_OK);
  CHECK(none.str().find("no implication") != std::string::npos);
  CHECK(none.str().find("CE-CON-not-ABS") != std::string::npos);

  const bsgd_abc plain{1, 0, 0, 1, 0};
  double gamma = 0;
  Str term;
  REQUIRE(bsgd_stepsize("noncvx-neighborhood", &plain, 1.0, 0.0, 4.0, 0.0, 0.0, &gamma,
                        &term.s) == BSGD_OK);
  CHECK(gamma == 0.5);
  CHECK(term.str() == "1/sqrt(LAT)");

  const bsgd_abc unb{0, 1, 0, 1, 0};
  double bound = 0;
  REQUIRE(bsgd_bound("noncvx", &unb, 1.0, 0.0, 2.0, 0.5, 100.0, 0.0, &bound) == BSGD_OK);
  CHECK(bound == doctest::Approx(0.08));

  double lo = 0, hi = 0;
  int empty = 1;
  REQUIRE(bsgd_feasible_s(&unb, 3.0, 2.0, &lo, &hi, &empty) == BSGD_OK);
  CHECK(empty == 0);
  CHECK(lo == 0.0);
  CHECK(hi == 2.0);

  long T = 0;
  REQUIRE(bsgd_iteration_count("noncvx-eps", &unb, 1.0, 0.0, 1.0, 0.1, &T) == BSGD_OK);
  CHECK(T == 1200);
}

TEST_CASE("verifier surface") {
  bsgd_problem* p = nullptr;
  REQUIRE(bsgd_problem_open("quad2", &p) == BSGD_OK);
  bsgd_estimator* e = nullptr;
  REQUIRE(bsgd_estimator_parse("kind=exact", &e) == BSGD_OK);
  Str csv;
  REQUIRE(bsgd_check(p, e, "kind=abc; A=0; B=1; C=0; b=1; c=0", 8, 1000, 1, &csv.s) ==
          BSGD_OK);
  CHECK(csv.str().find(",holds,") != std::string::npos);
  bsgd_estimator_close(e);
  bsgd_problem_close(p);

  Str row;
  int matches = 0;
  REQUIRE(bsgd_classify("top-k", &row.s, &matches) == BSGD_OK);
  CHECK(matches == 1);

  Str rows;
  REQUIRE(bsgd_coverage_rows(&rows.s) == BSGD_OK);
  CHECK(rows.str().find("gaussian-smoothing") != std::string::npos);

  Str report;
  int ok = 0;
  REQUIRE(bsgd_counterexample("CE-Claim1", &report.s, &ok) == BSGD_OK);
  CHECK(ok == 1);
  Str ids;
  REQUIRE(bsgd_counterexample_ids(&ids.s) == BSGD_OK);
  CHECK(ids.str().find("CE-Claim1") != std::string::npos);
}

TEST_CASE("runs, traces, and the sweep") {
  bsgd_problem* p = nullptr;
  REQUIRE(bsgd_problem_open_synthetic_logistic(100, 12, 1.0, 7, &p) == BSGD_OK);
  bsgd_problem_info info{};
  REQUIRE(bsgd_problem_query(p, &info) == BSGD_OK);
  CHECK(info.n == 100);
  CHECK(info.d == 12);

  bsgd_estimator* e = nullptr;
  REQUIRE(bsgd_estimator_parse("kind=biased-sampling; p=0.5", &e) == BSGD_OK);
  bsgd_trace* t = nullptr;
  REQUIRE(bsgd_run(p, e, "rule:noncvx-neighborhood", 100, 10, 3, 1, nullptr, &t) ==
          BSGD_OK);
  Str csv;
  REQUIRE(bsgd_trace_csv(t, &csv.s) == BSGD_OK);
  CHECK(csv.str().find("iteration,f,grad_norm_sq,dist_sq") != std::string::npos);
  bsgd_trace_stats stats{};
  REQUIRE(bsgd_trace_query(t, &stats) == BSGD_OK);
  CHECK(stats.gamma > 0.0);
  CHECK(stats.rows == 11);
  CHECK(stats.min_grad_norm_sq <= stats.final_grad_norm_sq + 1e-15);
  bsgd_trace_close(t);

  // deterministic reruns produce byte-identical CSV
  bsgd_trace* t2 = nullptr;
  REQUIRE(bsgd_run(p, e, "rule:noncvx-neighborhood", 100, 10, 3, 1, nullptr, &t2) ==
          BSGD_OK);
  Str csv2;
  REQUIRE(bsgd_trace_csv(t2, &csv2.s) == BSGD_OK);
  CHECK(csv.str() == csv2.str());
  bsgd_trace_close(t2);

  // ensemble trace
  bsgd_trace* agg = nullptr;
  REQUIRE(bsgd_run(p, e, "0.01", 50, 10, 3, 4, nullptr, &agg) == BSGD_OK);
  Str aggcsv;
  REQUIRE(bsgd_trace_csv(agg, &aggcsv.s) == BSGD_OK);
  CHECK(aggcsv.str().find("f_mean") != std::string::npos);
  bsgd_trace_close(agg);

  Str summary;
  REQUIRE(bsgd_sweep(p, "0.1,0.5", 100, 10, 3, 1, nullptr, "synthetic", &summary.s) ==
          BSGD_OK);
  CHECK(summary.str().find("p,A,gamma,ref_A,ref_gamma,final_grad_norm_sq") !=
        std::string::npos);
  bsgd_estimator_close(e);
  bsgd_problem_close(p);
}

TEST_CASE("io failures surface as status codes") {
  bsgd_problem* p = nullptr;
  CHECK(bsgd_problem_open_libsvm("/no/such/file.libsvm", 1.0, &p) == BSGD_ERR_IO);
}
