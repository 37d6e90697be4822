#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bsgd/constants.hpp"
#include "bsgd/estimators.hpp"
#include "bsgd/problems.hpp"

namespace bsgd {

struct RunConfig {
  ProblemPtr problem;
  EstimatorSpec estimator;
  double gamma = 0.0;       // resolved stepsize, > 0
  long T = 1;               // iterations
  long metric_period = 10;  // iterations between metric recomputations
  std::uint64_t seed = 0;
  Vec x0;                   // empty -> zeros
};

struct TraceRow {
  long iteration = 0;
  double f = 0.0;
  double grad_norm_sq = 0.0;
  double dist_sq = -1.0;  // -1 when the minimizer is unknown
};

struct RunTrace {
  std::vector<TraceRow> rows;
  Vec final_x;
  double gamma = 0.0;
  std::uint64_t seed = 0;
  bool diverged = false;
  long diverged_at = -1;
  double wall_time_sec = 0.0;
};

// x^{t+1} = x^t - gamma g^t with a fresh estimator draw per iteration.
// Metrics recorded at t = 0, every metric_period, and t = T. A coordinate
// exceeding 1e154 in magnitude flags divergence and stops the run.
RunTrace run(const RunConfig& config);

struct AggregateRow {
  long iteration = 0;
  double f_mean = 0.0, f_se = 0.0;
  double grad_mean = 0.0, grad_se = 0.0;
  double dist_mean = -1.0, dist_se = 0.0;
};

struct EnsembleTrace {
  std::vector<AggregateRow> rows;
  double gamma = 0.0;
  std::uint64_t base_seed = 0;
  int n_seeds = 0;
  int diverged_count = 0;
};

// Seeds seed, seed+1, ..., run concurrently; aggregation is by iteration
// index, so the result does not depend on scheduling.
EnsembleTrace run_ensemble(const RunConfig& config, int n_seeds);

std::string trace_csv(const RunTrace& t);
std::string ensemble_csv(const EnsembleTrace& t);

struct ComplianceReport {
  bool applicable = false;
  bool pass = false;
  double empirical = 0.0;
  double se = 0.0;
  double bound = 0.0;
  std::string detail;
};

// Compares the empirical left side of a convergence guarantee against its
// evaluated right side with one-sided 3-SE slack.
//   noncvx: min over recorded t <= T-1 of mean ||grad f||^2
//   pl:     final mean f-gap (requires f*)
//   iterate: final mean ||x - x*||^2 (delta0 = ||x0 - x*||^2)
ComplianceReport bound_compliance(const EnsembleTrace& agg, TheoremId thm,
                                  const AbcConstants& abc, double L, double mu,
                                  double delta0, double gamma, long T,
                                  double f_star = 0.0, double s = 0.0);

}  // namespace bsgd
