/*
 * biasedsgd — stochastic gradient descent with biased gradient estimators.
 *
 * C interface to the core library: opaque handles, integer status codes,
 * malloc'd string outputs released with bsgd_string_free. All functions
 * return BSGD_OK on success; on failure bsgd_last_error() carries a
 * human-readable message for the calling thread.
 */
#ifndef BIASEDSGD_H
#define BIASEDSGD_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bsgd_status {
  BSGD_OK = 0,
  BSGD_ERR_INVALID_ARGUMENT = 1,
  BSGD_ERR_PARSE = 2,
  BSGD_ERR_IO = 3,
  BSGD_ERR_UNKNOWN_NAME = 4,
  BSGD_ERR_NUMERIC = 5,
  BSGD_ERR_INTERNAL = 6
} bsgd_status;

typedef struct bsgd_problem bsgd_problem;
typedef struct bsgd_estimator bsgd_estimator;
typedef struct bsgd_trace bsgd_trace;

const char* bsgd_status_name(bsgd_status status);
const char* bsgd_last_error(void);
void bsgd_string_free(char* s);

/* ---- problems ------------------------------------------------------------ */

/* Comma-separated names of the built-in witness problems. */
bsgd_status bsgd_problem_registry(char** out);

bsgd_status bsgd_problem_open(const char* name, bsgd_problem** out);
/* LibSVM file (labels binarized to -1/+1) with the regularized logistic
 * objective. */
bsgd_status bsgd_problem_open_libsvm(const char* path, double lambda,
                                     bsgd_problem** out);
bsgd_status bsgd_problem_open_synthetic_logistic(int n, int d, double lambda,
                                                 uint64_t seed, bsgd_problem** out);
void bsgd_problem_close(bsgd_problem* p);

typedef struct bsgd_problem_info {
  int n;
  int d;
  double L;
  double L_max;
  double mu;          /* <= 0 when unknown */
  double f_star;      /* NaN when unknown */
  double delta_star;  /* NaN when component infima are unknown */
} bsgd_problem_info;

bsgd_status bsgd_problem_query(const bsgd_problem* p, bsgd_problem_info* out);

/* ---- estimators ----------------------------------------------------------- */

/* Textual config record: `kind=<name>; key=value; ...`. */
bsgd_status bsgd_estimator_parse(const char* record, bsgd_estimator** out);
void bsgd_estimator_close(bsgd_estimator* e);
bsgd_status bsgd_estimator_format(const bsgd_estimator* e, char** out);

typedef struct bsgd_abc {
  double A, B, C, b, c;
} bsgd_abc;

/* Closed-form framework constants of a catalogued estimator. The problem
 * supplies L, L_max, Delta*, d; it may be NULL when `dim` describes a plain
 * vector compressor. `note` (optional) reports resolved symbols. */
bsgd_status bsgd_estimator_constants(const bsgd_estimator* e, const bsgd_problem* p,
                                     int dim, bsgd_abc* out, char** note);

/* ---- assumption framework --------------------------------------------------- */

/* `record` is `kind=<sg1|sg2|con|bvd|breq|bnd|abs|fsml|abc>; key=value; ...`. */
bsgd_status bsgd_abc_from_assumption(const char* record, bsgd_abc* out);

/* Constant mapping along one edge of the assumption hierarchy. Writes the
 * mapped parameter record, or, for mutually non-implicative pairs, the
 * message `no implication; witnesses: ...`. */
bsgd_status bsgd_implication(const char* from_record, const char* to_name, char** out);

/* rule: noncvx-eps | noncvx-neighborhood | pl | strongly-convex-iterate */
bsgd_status bsgd_stepsize(const char* rule, const bsgd_abc* abc, double L, double mu,
                          double T, double eps, double s, double* out_gamma,
                          char** out_active_term);

/* theorem: noncvx | pl | strongly-convex-iterate.  delta0 is f(x0)-f* for the
 * first two and ||x0-x*||^2 for the iterate bound. */
bsgd_status bsgd_bound(const char* theorem, const bsgd_abc* abc, double L, double mu,
                       double delta0, double gamma, double T, double s, double* out);

/* Open admissible interval for the iterate-theorem shift s; empty = nonzero
 * out_empty. */
bsgd_status bsgd_feasible_s(const bsgd_abc* abc, double L, double mu, double* out_lo,
                            double* out_hi, int* out_empty);

/* corollary: noncvx-eps | noncvx-neighborhood | pl | strongly-convex */
bsgd_status bsgd_iteration_count(const char* corollary, const bsgd_abc* abc, double L,
                                 double mu, double delta0, double eps, long* out);

/* ---- verifier ---------------------------------------------------------------- */

/* CSV verdict (`estimator,assumption,status,margin,witness`) of one
 * assumption check over `points` probe points drawn from the problem's
 * probing box (0 -> default 64). */
bsgd_status bsgd_check(const bsgd_problem* p, const bsgd_estimator* e,
                       const char* assumption_record, int points, long budget,
                       uint64_t seed, char** out_csv);

/* One row of the estimator/assumption coverage matrix, as CSV. out_matches
 * reports agreement with the expected pattern. */
bsgd_status bsgd_classify(const char* estimator_row, char** out_csv, int* out_matches);

/* All rows; human-readable table + CSV; out_mismatches counts disagreeing
 * cells' rows. */
bsgd_status bsgd_coverage(char** out_table, char** out_csv, int* out_mismatches);

/* Comma-separated coverage row names / counterexample case ids. */
bsgd_status bsgd_coverage_rows(char** out);
bsgd_status bsgd_counterexample_ids(char** out);

/* One counterexample case (or the whole corpus when id == "all"). out_ok is 1
 * when every "holds"/"fails" side matched. */
bsgd_status bsgd_counterexample(const char* id, char** out_report, int* out_ok);

/* ---- optimizer ----------------------------------------------------------------- */

/* gamma_spec: explicit stepsize (e.g. "0.01") or "rule:<name>" resolved from
 * the estimator's framework constants. n_seeds >= 2 produces an ensemble
 * trace with per-iteration means and standard errors. */
bsgd_status bsgd_run(const bsgd_problem* p, const bsgd_estimator* e,
                     const char* gamma_spec, long T, long period, uint64_t seed,
                     int n_seeds, const double* x0 /* nullable */, bsgd_trace** out);
void bsgd_trace_close(bsgd_trace* t);
bsgd_status bsgd_trace_csv(const bsgd_trace* t, char** out);

typedef struct bsgd_trace_stats {
  double gamma;
  long rows;
  int diverged;        /* diverged member count */
  double final_f;
  double final_grad_norm_sq;
  double min_grad_norm_sq; /* min over recorded iterations of mean ||grad||^2 */
} bsgd_trace_stats;

bsgd_status bsgd_trace_query(const bsgd_trace* t, bsgd_trace_stats* out);

/* Sweep of biased independent sampling over inclusion probabilities
 * `p_list` (comma separated). Writes one trace CSV per p under out_dir (NULL
 * to skip files) and returns a summary CSV
 * `p,A,gamma,ref_A,ref_gamma,final_grad_norm_sq`. */
bsgd_status bsgd_sweep(const bsgd_problem* p, const char* p_list, long T, long period,
                       int n_seeds, uint64_t seed, const char* out_dir,
                       const char* dataset_tag, char** out_summary_csv);

#ifdef __cplusplus
}
#endif

#endif /* BIASEDSGD_H */
