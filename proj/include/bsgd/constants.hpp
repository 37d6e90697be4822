#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bsgd/estimators.hpp"

namespace bsgd {

// The five-tuple of the scalar-product/second-moment gradient framework:
//   <grad f, E g>  >=  b ||grad f||^2 - c
//   E ||g||^2      <=  2A (f - f*) + B ||grad f||^2 + C
struct AbcConstants {
  double A = 0.0, B = 0.0, C = 0.0, b = 0.0, c = 0.0;
};

enum class AssumptionId { SG1, SG2, CON, BVD, BREQ, BND, ABS, FSML, ABC };

const char* assumption_name(AssumptionId id);
AssumptionId assumption_from_name(const std::string& name);

struct Sg1Params {  // alpha ||grad||^2 <= E||g||^2 <= beta <Eg, grad>
  double alpha = 1.0, beta = 1.0;
};
struct Sg2Params {  // max{tau ||grad||^2, E||g||^2 / beta} <= <Eg, grad>
  double tau = 1.0, beta = 1.0;
};
struct ConParams {  // E||g - grad||^2 <= (1 - 1/delta) ||grad||^2
  double delta = 1.0;
};
struct BvdParams {  // bias^2 <= eta ||grad||^2, variance <= xi ||grad||^2
  double eta = 0.0, xi = 0.0;
};
struct BreqParams {  // deterministic g: <g, grad> >= rho ||grad||^2, ||g||^2 <= zeta ||grad||^2
  double rho = 0.0, zeta = 1.0;
};
struct BndParams {  // variance <= M ||Eg||^2 + sigma2, bias^2 <= m ||grad||^2 + phi2
  double M = 0.0, sigma2 = 0.0, m = 0.0, phi2 = 0.0;
};
struct AbsParams {  // E||g - grad||^2 <= Delta^2
  double Delta = 0.0;
};
struct FsmlParams {  // <grad, Eg> >= q||grad||^2, ||Eg|| <= u||grad||, var <= U||grad||^2 + Q
  double q = 1.0, u = 1.0, U = 0.0, Q = 0.0;
};

using AssumptionParams = std::variant<Sg1Params, Sg2Params, ConParams, BvdParams,
                                      BreqParams, BndParams, AbsParams, FsmlParams,
                                      AbcConstants>;

AssumptionId id_of(const AssumptionParams& p);
void validate_params(const AssumptionParams& p);  // throws on invalid ranges

// Record form `kind=<assumption>; key=value; ...` used by the CLI.
std::string format_params(const AssumptionParams& p);
AssumptionParams parse_params(const std::string& record);

// --- estimator catalogue -> ABC ------------------------------------------------

struct ProblemConstants {
  int d = 0;               // ambient dimension
  int n_components = 1;    // finite-sum component count
  double L = 0.0;          // global smoothness (Gaussian smoothing)
  double L_max = 0.0;      // max_i L_i (sampling, distributed rounding)
  double delta_star = 0.0; // functional dissimilarity; may be +inf
  double tau = 0.0;        // resolved smoothing parameter; 0 -> 1e-4
};

struct AbcBuildResult {
  AbcConstants abc;
  std::string note;  // symbols resolved (Z, F, G, H_a, ...) for reporting
};

// Closed-form constants of the catalogued estimators. Throws
// "no closed form; use verifier" for witness kinds.
AbcBuildResult abc_for_estimator(const EstimatorSpec& spec, const ProblemConstants& pc);

// H_a of the exponential dithering bound for base a, s levels, norm index p.
double dithering_constant_H(double a, int s_levels, double p_norm, int d);

// --- assumption tables and maps ---------------------------------------------------

// Row of the assumptions-to-framework table (exact closed forms).
AbcConstants abc_from_assumption(const AssumptionParams& params);

struct ImplicationResult {
  bool implied = false;
  std::optional<AssumptionParams> mapped;   // when implied
  std::vector<std::string> witness_cases;   // counterexample ids when not
  std::string detail;
};

// Constant mapping along one edge of the assumption-hierarchy diagram.
// Dashed (mutually non-implicative) pairs yield implied=false plus the ids of
// the counterexample cases that witness the gap. Unknown pairs throw
// "not in diagram".
ImplicationResult implication_map(const AssumptionParams& from, AssumptionId to);

// --- stepsizes, bounds, complexities ------------------------------------------------

enum class StepsizeRuleId { NoncvxEps, NoncvxNeighborhood, Pl, StronglyConvexIterate };

StepsizeRuleId stepsize_rule_from_name(const std::string& name);
const char* stepsize_rule_name(StepsizeRuleId id);

struct StepsizeInputs {
  AbcConstants abc;
  double L = 0.0;
  double mu = 0.0;
  double T = 0.0;      // horizon for 1/sqrt(LAT)
  double eps = 0.0;    // tolerance terms
  double s = 0.0;      // iterate-convergence shift parameter
};

struct StepsizeResult {
  double gamma = 0.0;
  std::string active_term;  // which min-term bound
};

// Minimum over the rule's terms. A term whose numerator or denominator is
// zero carries no constraint and is dropped; if everything drops the rule has
// no finite stepsize.
StepsizeResult theoretical_stepsize(StepsizeRuleId rule, const StepsizeInputs& in);

enum class TheoremId { Noncvx, Pl, StronglyConvexIterate };
TheoremId theorem_from_name(const std::string& name);

// Right-hand side of the convergence guarantee. `delta0` is f(x0) - f* for
// the nonconvex/PL bounds and ||x0 - x*||^2 for the iterate bound. Throws
// "stepsize out of range" / "iterate bound inapplicable" when the theorem's
// preconditions fail.
double convergence_bound(TheoremId thm, const AbcConstants& abc, double L, double mu,
                         double delta0, double gamma, double T, double s = 0.0);

struct SRange {
  double lo = 0.0, hi = 0.0;  // open interval (lo, hi); s must also be > 0
  bool empty = true;
  double midpoint() const { return 0.5 * (std::max(0.0, lo) + hi); }
};

// Admissible shift interval (A + L(B+1-2b), mu) of the iterate theorem.
SRange feasible_s_range(const AbcConstants& abc, double L, double mu);

// Iteration-count corollaries; ceiled and clamped at 1.
// ids: "noncvx-eps", "noncvx-neighborhood", "pl", "strongly-convex".
long iteration_count(const std::string& corollary, const AbcConstants& abc, double L,
                     double mu, double delta0, double eps);

}  // namespace bsgd
