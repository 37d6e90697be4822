#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bsgd/constants.hpp"
#include "bsgd/estimators.hpp"
#include "bsgd/problems.hpp"

namespace bsgd {

// First/second moments of one estimator at one point. Exact enumeration when
// the outcome space is small (subset draws, indicator patterns, per-coordinate
// two-point randomizations); Monte Carlo with standard errors otherwise.
struct MomentEstimate {
  Vec mean;
  double second_moment = 0.0;  // E ||g||^2
  double dot_grad = 0.0;       // E <g, grad f(x)>
  double err_second = 0.0;     // E ||g - grad f(x)||^2
  double variance = 0.0;       // E ||g - Eg||^2
  bool exact = true;
  long samples = 0;
  // Monte Carlo standard errors (zero when exact):
  double se_second = 0.0;
  double se_dot = 0.0;
  double se_err = 0.0;
  double mean_tr_cov = 0.0;  // tr(Cov(g))/N, uncertainty of the mean vector
};

MomentEstimate estimate_moments(const EstimatorSpec& spec, const FiniteSumProblem& p,
                                const Vec& x, long budget, std::uint64_t seed);

enum class CheckStatus { Holds, Violated, Inconclusive };
const char* status_name(CheckStatus s);

struct AssumptionVerdict {
  AssumptionId assumption = AssumptionId::ABC;
  CheckStatus status = CheckStatus::Holds;
  double worst_margin = 0.0;  // most negative inequality slack over points
  Vec witness;                // point attaining it
  bool exact = true;
  std::string detail;
};

// Evaluates every inequality of the assumption at every point. "Violated"
// requires a breach beyond 3 standard errors (Monte Carlo) or beyond a 1e-9
// relative tolerance (exact enumeration).
AssumptionVerdict check_assumption(const AssumptionParams& params,
                                   const EstimatorSpec& spec,
                                   const FiniteSumProblem& p,
                                   const std::vector<Vec>& points, long budget,
                                   std::uint64_t seed);

// Deterministic low-discrepancy grid inside the problem's probing box.
std::vector<Vec> probe_grid(const FiniteSumProblem& p, int count = 64,
                            double box = 0.0);

// --- coverage matrix -----------------------------------------------------------

struct CoverageCell {
  AssumptionId assumption;
  bool expected_holds = false;
  CheckStatus got = CheckStatus::Inconclusive;
  bool matches = false;
  double margin = 0.0;
  std::string witness;
};

struct CoverageRow {
  std::string estimator;
  std::vector<CoverageCell> cells;
  bool matches_expected = false;
};

std::vector<std::string> coverage_estimators();
CoverageRow classify(const std::string& estimator_row, long budget_override = 0);
std::string coverage_csv(const std::vector<CoverageRow>& rows);
std::string coverage_table(const std::vector<CoverageRow>& rows);

// --- counterexample corpus -------------------------------------------------------

struct CounterexampleOutcome {
  std::string id;
  bool ok = false;
  std::string report;
};

std::vector<std::string> counterexample_corpus();
CounterexampleOutcome run_counterexample(const std::string& id);

// --- implication consistency -------------------------------------------------------

struct ImplicationCheckReport {
  bool edge = false;           // solid edge with a constant mapping
  bool source_holds = false;
  bool target_holds = false;
  std::string mapped_record;   // target constants when edge
  std::string detail;
};

ImplicationCheckReport check_implication(const AssumptionParams& from, AssumptionId to,
                                         const EstimatorSpec& spec,
                                         const FiniteSumProblem& p,
                                         const std::vector<Vec>& points, long budget,
                                         std::uint64_t seed);

// --- Lemma: ||grad f||^2 <= 2 L (f - f*) ------------------------------------------

struct LemmaReport {
  bool all_pass = true;
  double worst_gap = 0.0;
  Vec worst_point;
};

LemmaReport lemma_smooth_check(const FiniteSumProblem& p, const std::vector<Vec>& points);

}  // namespace bsgd
