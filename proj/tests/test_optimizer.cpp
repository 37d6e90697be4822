#include <cmath>

#include "bsgd/optimizer.hpp"
#include "bsgd/verifier.hpp"
#include "doctest.h"

using namespace bsgd;

TEST_CASE("one exact step solves the scalar quadratic") {
  RunConfig cfg;
  cfg.problem = make_problem("quad1");  // f = x^2/2, L = 1
  cfg.estimator = EstimatorSpec::parse("kind=exact");
  cfg.gamma = 1.0;
  cfg.T = 1;
  cfg.metric_period = 1;
  cfg.x0 = {7.0};
  const RunTrace t = run(cfg);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].f == doctest::Approx(24.5));
  CHECK(t.final_x[0] == 0.0);
  CHECK(t.rows[1].grad_norm_sq == 0.0);
}

TEST_CASE("half stepsize halves the iterate each step") {
  RunConfig cfg;
  cfg.problem = make_problem("quad1");
  cfg.estimator = EstimatorSpec::parse("kind=exact");
  cfg.gamma = 0.5;
  cfg.T = 10;
  cfg.metric_period = 1;
  cfg.x0 = {1.0};
  const RunTrace t = run(cfg);
  REQUIRE(t.rows.size() == 11);
  for (int k = 0; k <= 10; ++k) {
    const double expect = std::pow(0.5, k);
    CHECK(t.rows[k].grad_norm_sq == doctest::Approx(expect * expect).epsilon(1e-12));
  }
}

TEST_CASE("the negated gradient diverges and is flagged") {
  RunConfig cfg;
  cfg.problem = make_problem("quad1");
  cfg.estimator = EstimatorSpec::parse("kind=scaled-gradient; scale=-1");
  cfg.gamma = 0.1;
  cfg.T = 10000;
  cfg.metric_period = 100;
  cfg.x0 = {1.0};
  const RunTrace t = run(cfg);
  CHECK(t.diverged);
  CHECK(t.diverged_at > 0);
  for (const auto& row : t.rows) CHECK(std::isfinite(row.f));
}

TEST_CASE("identical configs give bit-identical traces") {
  RunConfig cfg;
  cfg.problem = make_problem("sum-quad10");
  cfg.estimator = EstimatorSpec::parse("kind=biased-sampling; p=0.5; noise-sd=0.1");
  cfg.gamma = 0.05;
  cfg.T = 200;
  cfg.metric_period = 10;
  cfg.seed = 31;
  const RunTrace a = run(cfg);
  const RunTrace b = run(cfg);
  CHECK(trace_csv(a) == trace_csv(b));
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i)
    CHECK(a.rows[i].f == b.rows[i].f);
}

TEST_CASE("exact gradient descends monotonically when gamma <= 1/L") {
  RunConfig cfg;
  cfg.problem = make_problem("aniso-quad10");
  cfg.estimator = EstimatorSpec::parse("kind=exact");
  cfg.gamma = 1.0 / cfg.problem->L();
  cfg.T = 50;
  cfg.metric_period = 1;
  cfg.x0 = Vec(10, 2.5);
  const RunTrace t = run(cfg);
  for (std::size_t i = 1; i < t.rows.size(); ++i)
    CHECK(t.rows[i].f <= t.rows[i - 1].f + 1e-12);
}

TEST_CASE("recorded minimum gradient norm is nonincreasing in T") {
  RunConfig cfg;
  cfg.problem = make_problem("sum-quad10");
  cfg.estimator = EstimatorSpec::parse("kind=biased-sampling; p=0.5");
  cfg.gamma = 0.02;
  cfg.metric_period = 10;
  cfg.seed = 5;
  double prev = std::numeric_limits<double>::infinity();
  for (long T : {100L, 200L, 400L}) {
    cfg.T = T;
    const RunTrace t = run(cfg);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : t.rows) best = std::min(best, r.grad_norm_sq);
    CHECK(best <= prev + 1e-15);
    prev = best;
  }
}

TEST_CASE("ensembles") {
  RunConfig cfg;
  cfg.problem = make_problem("quad2");
  cfg.estimator = EstimatorSpec::parse("kind=exact");
  cfg.gamma = 0.5;
  cfg.T = 20;
  cfg.metric_period = 5;
  cfg.x0 = {1.0, 1.0};
  SUBCASE("a single seed reproduces the plain run") {
    const RunTrace single = run(cfg);
    const EnsembleTrace agg = run_ensemble(cfg, 1);
    REQUIRE(agg.rows.size() == single.rows.size());
    for (std::size_t i = 0; i < agg.rows.size(); ++i) {
      CHECK(agg.rows[i].f_mean == single.rows[i].f);
      CHECK(agg.rows[i].f_se == 0.0);
    }
  }
  SUBCASE("deterministic estimators have zero standard error") {
    const EnsembleTrace agg = run_ensemble(cfg, 8);
    for (const auto& r : agg.rows) {
      CHECK(r.f_se == 0.0);
      CHECK(r.grad_se == 0.0);
    }
  }
}

TEST_CASE("Rand-1 ensemble follows the exact two-outcome recursion") {
  // f = ||x||^2/2 in 2-d, rand-1: the selected coordinate contracts by
  // (1 - 2 gamma), so E||x_t||^2 = rho^t ||x_0||^2 with
  // rho = (1 + (1 - 2 gamma)^2)/2. Beyond a few steps the distribution of
  // ||x_t||^2 is too skewed for a finite-ensemble mean, so the comparison
  // stays in the early well-sampled regime.
  RunConfig cfg;
  cfg.problem = make_problem("quad2");
  cfg.estimator = EstimatorSpec::parse("kind=rand-k; k=1");
  cfg.gamma = 0.25;
  cfg.T = 8;
  cfg.metric_period = 2;
  cfg.seed = 17;
  cfg.x0 = {3.0, -4.0};
  const EnsembleTrace agg = run_ensemble(cfg, 400);
  const double rho = (1.0 + std::pow(1.0 - 2.0 * cfg.gamma, 2)) / 2.0;
  for (const auto& r : agg.rows) {
    const double expect = std::pow(rho, r.iteration) * 25.0;
    CHECK(std::fabs(r.dist_mean - expect) <= 3.0 * r.dist_se + 1e-9);
  }
}

TEST_CASE("bound compliance") {
  SUBCASE("exact gradient attains the PL bound exactly at gamma = 1/L") {
    RunConfig cfg;
    cfg.problem = make_problem("iso-quad10");  // L = mu = 1
    cfg.estimator = EstimatorSpec::parse("kind=exact");
    cfg.gamma = 1.0;
    cfg.T = 5;
    cfg.metric_period = 1;
    cfg.x0 = Vec(10, 1.0);
    const EnsembleTrace agg = run_ensemble(cfg, 4);
    const AbcConstants k{0, 1, 0, 1, 0};
    const auto rep = bound_compliance(agg, TheoremId::Pl, k, 1.0, 1.0, 5.0, 1.0, 5, 0.0);
    CHECK(rep.pass);
    CHECK(rep.empirical == 0.0);
    CHECK(rep.se == 0.0);
    CHECK(rep.bound == 0.0);
  }
  SUBCASE("rand-k meets the nonconvex bound at the admissible stepsize") {
    RunConfig cfg;
    cfg.problem = make_problem("aniso-quad10");
    cfg.estimator = EstimatorSpec::parse("kind=rand-k; k=5");
    const AbcConstants k{0, 2, 0, 1, 0};
    const double L = cfg.problem->L();
    cfg.gamma = k.b / (L * k.B);
    cfg.T = 400;
    cfg.metric_period = 10;
    cfg.x0 = Vec(10, 2.0);
    const EnsembleTrace agg = run_ensemble(cfg, 100);
    const double delta0 = cfg.problem->full_value(cfg.x0) - *cfg.problem->f_star();
    const auto rep =
        bound_compliance(agg, TheoremId::Noncvx, k, L, 0.0, delta0, cfg.gamma, cfg.T);
    CHECK(rep.pass);
  }
  SUBCASE("top-k meets the PL bound with its table constants") {
    RunConfig cfg;
    cfg.problem = make_problem("aniso-quad10");
    cfg.estimator = EstimatorSpec::parse("kind=top-k; k=5");
    const AbcConstants k{0, 1, 0, 0.5, 0};
    const double L = cfg.problem->L(), mu = *cfg.problem->mu();
    StepsizeInputs in;
    in.abc = k;
    in.L = L;
    in.mu = mu;
    cfg.gamma = theoretical_stepsize(StepsizeRuleId::Pl, in).gamma;
    cfg.T = 400;
    cfg.metric_period = 10;
    cfg.x0 = Vec(10, 2.0);
    const EnsembleTrace agg = run_ensemble(cfg, 100);
    const double delta0 = cfg.problem->full_value(cfg.x0) - *cfg.problem->f_star();
    const auto rep = bound_compliance(agg, TheoremId::Pl, k, L, mu, delta0, cfg.gamma,
                                      cfg.T, *cfg.problem->f_star());
    CHECK(rep.pass);
  }
  SUBCASE("an inadmissible stepsize is rejected") {
    RunConfig cfg;
    cfg.problem = make_problem("quad2");
    cfg.estimator = EstimatorSpec::parse("kind=exact");
    cfg.gamma = 5.0;
    cfg.T = 4;
    cfg.metric_period = 1;
    const EnsembleTrace agg = run_ensemble(cfg, 2);
    const AbcConstants k{0, 1, 0, 1, 0};
    CHECK_THROWS_WITH(static_cast<void>(bound_compliance(agg, TheoremId::Noncvx, k, 1.0,
                                                         0.0, 1.0, 5.0, 4)),
                      "stepsize out of range");
  }
}

TEST_CASE("full-inclusion sampling reproduces the exact-gradient trace") {
  RunConfig cfg;
  cfg.problem = make_problem("sum-quad10");
  cfg.estimator = EstimatorSpec::parse("kind=biased-sampling; p=1.0");
  cfg.gamma = 0.1;
  cfg.T = 50;
  cfg.metric_period = 5;
  cfg.seed = 3;
  cfg.x0 = Vec(10, 1.0);
  const RunTrace sampled = run(cfg);
  cfg.estimator = EstimatorSpec::parse("kind=exact");
  const RunTrace exact = run(cfg);
  CHECK(trace_csv(sampled) == trace_csv(exact));
}

TEST_CASE("trace CSV schema") {
  RunConfig cfg;
  cfg.problem = make_problem("quad1");
  cfg.estimator = EstimatorSpec::parse("kind=exact");
  cfg.gamma = 0.5;
  cfg.T = 4;
  cfg.metric_period = 2;
  cfg.x0 = {1.0};
  const std::string csv = trace_csv(run(cfg));
  CHECK(csv.find("# gamma=0.5 seed=0") == 0);
  CHECK(csv.find("iteration,f,grad_norm_sq,dist_sq\n") != std::string::npos);
  const std::string ecsv = ensemble_csv(run_ensemble(cfg, 2));
  CHECK(ecsv.find("iteration,f_mean,f_se,grad_norm_sq_mean,grad_norm_sq_se,"
                  "dist_sq_mean,dist_sq_se\n") != std::string::npos);
}

TEST_CASE("config validation") {
  RunConfig cfg;
  cfg.problem = make_problem("quad1");
  cfg.estimator = EstimatorSpec::parse("kind=exact");
  cfg.gamma = 0.0;
  CHECK_THROWS(run(cfg));
  cfg.gamma = 0.1;
  cfg.T = 0;
  CHECK_THROWS(run(cfg));
  cfg.T = 1;
  cfg.metric_period = 0;
  CHECK_THROWS(run(cfg));
  cfg.metric_period = 1;
  cfg.x0 = {1.0, 2.0};  // wrong dimension
  CHECK_THROWS(run(cfg));
}
