#include "biasedsgd.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <variant>

#include "bsgd/constants.hpp"
#include "bsgd/data.hpp"
#include "bsgd/estimators.hpp"
#include "bsgd/optimizer.hpp"
#include "bsgd/problems.hpp"
#include "bsgd/verifier.hpp"

using namespace bsgd;

struct bsgd_problem {
  ProblemPtr p;
};
struct bsgd_estimator {
  EstimatorSpec spec;
};
struct bsgd_trace {
  std::variant<RunTrace, EnsembleTrace> t;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
bsgd_status wrap(Fn&& fn) {
  try {
    fn();
    return BSGD_OK;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    const std::string w = e.what();
    if (w.find("unknown") != std::string::npos) return BSGD_ERR_UNKNOWN_NAME;
    return BSGD_ERR_INVALID_ARGUMENT;
  } catch (const std::runtime_error& e) {
    g_last_error = e.what();
    const std::string w = e.what();
    if (w.find("parse") != std::string::npos ||
        w.find("index order") != std::string::npos)
      return BSGD_ERR_PARSE;
    if (w.find("cannot open") != std::string::npos) return BSGD_ERR_IO;
    return BSGD_ERR_NUMERIC;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BSGD_ERR_INTERNAL;
  }
}

ProblemConstants problem_constants_of(const FiniteSumProblem& p) {
  ProblemConstants pc;
  pc.d = p.dim();
  pc.n_components = p.n();
  pc.L = p.L();
  pc.L_max = p.L_max();
  try {
    pc.delta_star = delta_star(p);
  } catch (const std::exception&) {
    pc.delta_star = 0.0;  // unavailable; only additive-C terms would use it
  }
  return pc;
}

AbcConstants to_core(const bsgd_abc& a) { return {a.A, a.B, a.C, a.b, a.c}; }
bsgd_abc from_core(const AbcConstants& a) { return {a.A, a.B, a.C, a.b, a.c}; }

}  // namespace

extern "C" {

const char* bsgd_status_name(bsgd_status status) {
  switch (status) {
    case BSGD_OK: return "ok";
    case BSGD_ERR_INVALID_ARGUMENT: return "invalid argument";
    case BSGD_ERR_PARSE: return "parse error";
    case BSGD_ERR_IO: return "io error";
    case BSGD_ERR_UNKNOWN_NAME: return "unknown name";
    case BSGD_ERR_NUMERIC: return "numeric error";
    case BSGD_ERR_INTERNAL: return "internal error";
  }
  return "?";
}

const char* bsgd_last_error(void) { return g_last_error.c_str(); }

void bsgd_string_free(char* s) { std::free(s); }

/* ---- problems ------------------------------------------------------------ */

bsgd_status bsgd_problem_registry(char** out) {
  return wrap([&] {
    std::string s;
    for (const auto& name : problem_registry()) {
      if (!s.empty()) s += ',';
      s += name;
    }
    *out = dup_string(s);
  });
}

bsgd_status bsgd_problem_open(const char* name, bsgd_problem** out) {
  return wrap([&] { *out = new bsgd_problem{make_problem(name)}; });
}

bsgd_status bsgd_problem_open_libsvm(const char* path, double lambda,
                                     bsgd_problem** out) {
  return wrap([&] {
    Dataset ds = parse_libsvm_file(path);
    if (ds.n == 0) throw std::invalid_argument("empty problem");
    *out = new bsgd_problem{make_logistic_from_rows(
        std::filesystem::path(path).filename().string(), std::move(ds.rows),
        binarize_labels(ds), lambda)};
  });
}

bsgd_status bsgd_problem_open_synthetic_logistic(int n, int d, double lambda,
                                                 uint64_t seed, bsgd_problem** out) {
  return wrap([&] { *out = new bsgd_problem{make_synthetic_logistic(n, d, lambda, seed)}; });
}

void bsgd_problem_close(bsgd_problem* p) { delete p; }

bsgd_status bsgd_problem_query(const bsgd_problem* p, bsgd_problem_info* out) {
  return wrap([&] {
    const auto& prob = *p->p;
    out->n = prob.n();
    out->d = prob.dim();
    out->L = prob.L();
    out->L_max = prob.L_max();
    out->mu = prob.mu() ? *prob.mu() : 0.0;
    out->f_star =
        prob.f_star() ? *prob.f_star() : std::numeric_limits<double>::quiet_NaN();
    try {
      out->delta_star = delta_star(prob);
    } catch (const std::exception&) {
      out->delta_star = std::numeric_limits<double>::quiet_NaN();
    }
  });
}

/* ---- estimators ------------------------------------------------------------ */

bsgd_status bsgd_estimator_parse(const char* record, bsgd_estimator** out) {
  return wrap([&] { *out = new bsgd_estimator{EstimatorSpec::parse(record)}; });
}

void bsgd_estimator_close(bsgd_estimator* e) { delete e; }

bsgd_status bsgd_estimator_format(const bsgd_estimator* e, char** out) {
  return wrap([&] { *out = dup_string(e->spec.format()); });
}

bsgd_status bsgd_estimator_constants(const bsgd_estimator* e, const bsgd_problem* p,
                                     int dim, bsgd_abc* out, char** note) {
  return wrap([&] {
    ProblemConstants pc;
    if (p) {
      pc = problem_constants_of(*p->p);
    } else {
      pc.d = dim;
    }
    if (pc.d <= 0) throw std::invalid_argument("dimension required");
    const AbcBuildResult r = abc_for_estimator(e->spec, pc);
    *out = from_core(r.abc);
    if (note) *note = dup_string(r.note);
  });
}

/* ---- assumption framework ----------------------------------------------------- */

bsgd_status bsgd_abc_from_assumption(const char* record, bsgd_abc* out) {
  return wrap([&] { *out = from_core(abc_from_assumption(parse_params(record))); });
}

bsgd_status bsgd_implication(const char* from_record, const char* to_name, char** out) {
  return wrap([&] {
    const ImplicationResult r =
        implication_map(parse_params(from_record), assumption_from_name(to_name));
    if (r.implied) {
      *out = dup_string(format_params(*r.mapped));
    } else {
      std::string msg = "no implication; witnesses:";
      for (const auto& w : r.witness_cases) msg += " " + w;
      *out = dup_string(msg);
    }
  });
}

bsgd_status bsgd_stepsize(const char* rule, const bsgd_abc* abc, double L, double mu,
                          double T, double eps, double s, double* out_gamma,
                          char** out_active_term) {
  return wrap([&] {
    StepsizeInputs in;
    in.abc = to_core(*abc);
    in.L = L;
    in.mu = mu;
    in.T = T;
    in.eps = eps;
    in.s = s;
    const StepsizeResult r = theoretical_stepsize(stepsize_rule_from_name(rule), in);
    *out_gamma = r.gamma;
    if (out_active_term) *out_active_term = dup_string(r.active_term);
  });
}

bsgd_status bsgd_bound(const char* theorem, const bsgd_abc* abc, double L, double mu,
                       double delta0, double gamma, double T, double s, double* out) {
  return wrap([&] {
    *out = convergence_bound(theorem_from_name(theorem), to_core(*abc), L, mu, delta0,
                             gamma, T, s);
  });
}

bsgd_status bsgd_feasible_s(const bsgd_abc* abc, double L, double mu, double* out_lo,
                            double* out_hi, int* out_empty) {
  return wrap([&] {
    const SRange r = feasible_s_range(to_core(*abc), L, mu);
    *out_lo = r.lo;
    *out_hi = r.hi;
    *out_empty = r.empty ? 1 : 0;
  });
}

bsgd_status bsgd_iteration_count(const char* corollary, const bsgd_abc* abc, double L,
                                 double mu, double delta0, double eps, long* out) {
  return wrap([&] {
    *out = iteration_count(corollary, to_core(*abc), L, mu, delta0, eps);
  });
}

/* ---- verifier -------------------------------------------------------------------- */

bsgd_status bsgd_check(const bsgd_problem* p, const bsgd_estimator* e,
                       const char* assumption_record, int points, long budget,
                       uint64_t seed, char** out_csv) {
  return wrap([&] {
    const auto pts = probe_grid(*p->p, points > 0 ? points : 64);
    const auto v = check_assumption(parse_params(assumption_record), e->spec, *p->p,
                                    pts, budget > 0 ? budget : 100000, seed);
    std::ostringstream os;
    os.precision(10);
    os << "estimator,assumption,status,margin,witness\n";
    os << kind_name(e->spec.kind) << ',' << assumption_name(v.assumption) << ','
       << status_name(v.status) << ',';
    if (std::isfinite(v.worst_margin)) os << v.worst_margin;
    os << ",\"" << v.detail << "\"\n";
    *out_csv = dup_string(os.str());
  });
}

bsgd_status bsgd_classify(const char* estimator_row, char** out_csv, int* out_matches) {
  return wrap([&] {
    const CoverageRow row = classify(estimator_row);
    *out_csv = dup_string(coverage_csv({row}));
    if (out_matches) *out_matches = row.matches_expected ? 1 : 0;
  });
}

bsgd_status bsgd_coverage(char** out_table, char** out_csv, int* out_mismatches) {
  return wrap([&] {
    std::vector<CoverageRow> rows;
    int mismatches = 0;
    for (const auto& name : coverage_estimators()) {
      rows.push_back(classify(name));
      if (!rows.back().matches_expected) ++mismatches;
    }
    if (out_table) *out_table = dup_string(coverage_table(rows));
    if (out_csv) *out_csv = dup_string(coverage_csv(rows));
    if (out_mismatches) *out_mismatches = mismatches;
  });
}

bsgd_status bsgd_coverage_rows(char** out) {
  return wrap([&] {
    std::string s;
    for (const auto& name : coverage_estimators()) {
      if (!s.empty()) s += ',';
      s += name;
    }
    *out = dup_string(s);
  });
}

bsgd_status bsgd_counterexample_ids(char** out) {
  return wrap([&] {
    std::string s;
    for (const auto& id : counterexample_corpus()) {
      if (!s.empty()) s += ',';
      s += id;
    }
    *out = dup_string(s);
  });
}

bsgd_status bsgd_counterexample(const char* id, char** out_report, int* out_ok) {
  return wrap([&] {
    std::ostringstream os;
    bool ok = true;
    if (std::string(id) == "all") {
      for (const auto& cid : counterexample_corpus()) {
        const auto r = run_counterexample(cid);
        ok = ok && r.ok;
        os << r.report;
      }
    } else {
      const auto r = run_counterexample(id);
      ok = r.ok;
      os << r.report;
    }
    *out_report = dup_string(os.str());
    if (out_ok) *out_ok = ok ? 1 : 0;
  });
}

/* ---- optimizer --------------------------------------------------------------------- */

namespace {

double resolve_gamma(const std::string& spec, const bsgd_problem* p,
                     const bsgd_estimator* e, long T) {
  if (spec.rfind("rule:", 0) != 0) return std::stod(spec);
  const std::string rule = spec.substr(5);
  const AbcBuildResult abc = abc_for_estimator(e->spec, problem_constants_of(*p->p));
  StepsizeInputs in;
  in.abc = abc.abc;
  in.L = p->p->L();
  in.mu = p->p->mu() ? *p->p->mu() : 0.0;
  in.T = static_cast<double>(T);
  return theoretical_stepsize(stepsize_rule_from_name(rule), in).gamma;
}

}  // namespace

bsgd_status bsgd_run(const bsgd_problem* p, const bsgd_estimator* e,
                     const char* gamma_spec, long T, long period, uint64_t seed,
                     int n_seeds, const double* x0, bsgd_trace** out) {
  return wrap([&] {
    RunConfig cfg;
    cfg.problem = p->p;
    cfg.estimator = e->spec;
    cfg.gamma = resolve_gamma(gamma_spec, p, e, T);
    cfg.T = T;
    cfg.metric_period = period;
    cfg.seed = seed;
    if (x0) cfg.x0.assign(x0, x0 + p->p->dim());
    if (n_seeds <= 1)
      *out = new bsgd_trace{run(cfg)};
    else
      *out = new bsgd_trace{run_ensemble(cfg, n_seeds)};
  });
}

void bsgd_trace_close(bsgd_trace* t) { delete t; }

bsgd_status bsgd_trace_csv(const bsgd_trace* t, char** out) {
  return wrap([&] {
    if (const auto* r = std::get_if<RunTrace>(&t->t))
      *out = dup_string(trace_csv(*r));
    else
      *out = dup_string(ensemble_csv(std::get<EnsembleTrace>(t->t)));
  });
}

bsgd_status bsgd_trace_query(const bsgd_trace* t, bsgd_trace_stats* out) {
  return wrap([&] {
    if (const auto* r = std::get_if<RunTrace>(&t->t)) {
      out->gamma = r->gamma;
      out->rows = static_cast<long>(r->rows.size());
      out->diverged = r->diverged ? 1 : 0;
      out->final_f = r->rows.back().f;
      out->final_grad_norm_sq = r->rows.back().grad_norm_sq;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& row : r->rows) best = std::min(best, row.grad_norm_sq);
      out->min_grad_norm_sq = best;
    } else {
      const auto& a = std::get<EnsembleTrace>(t->t);
      out->gamma = a.gamma;
      out->rows = static_cast<long>(a.rows.size());
      out->diverged = a.diverged_count;
      out->final_f = a.rows.back().f_mean;
      out->final_grad_norm_sq = a.rows.back().grad_mean;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& row : a.rows) best = std::min(best, row.grad_mean);
      out->min_grad_norm_sq = best;
    }
  });
}

/* ---- sweep -------------------------------------------------------------------------- */

namespace {

struct RefRow {
  double p, A, gamma;
};

// Published reference constants and stepsizes for the three LibSVM datasets.
// Printed side by side with the computed values and never asserted against:
// the computed A is L_max / min p by definition and the a9a/w8a reference
// rows are inconsistent with their own L_max (see README).
const RefRow* reference_rows(const std::string& tag, int* count) {
  static const RefRow splice[] = {{0.01, 16325.0, 3.54e-4},
                                  {0.1, 1632.5, 1.12e-3},
                                  {0.5, 326.5, 2.50e-3}};
  static const RefRow a9a[] = {{0.01, 550.0, 1.01e-2},
                               {0.1, 55.0, 3.19e-2},
                               {0.5, 11.0, 7.13e-2}};
  static const RefRow w8a[] = {{0.01, 3050.0, 4.96e-3},
                               {0.1, 305.0, 1.57e-2},
                               {0.5, 61.0, 3.51e-2}};
  if (tag == "splice") {
    *count = 3;
    return splice;
  }
  if (tag == "a9a") {
    *count = 3;
    return a9a;
  }
  if (tag == "w8a") {
    *count = 3;
    return w8a;
  }
  *count = 0;
  return nullptr;
}

}  // namespace

bsgd_status bsgd_sweep(const bsgd_problem* p, const char* p_list, long T, long period,
                       int n_seeds, uint64_t seed, const char* out_dir,
                       const char* dataset_tag, char** out_summary_csv) {
  return wrap([&] {
    std::vector<double> ps;
    {
      std::stringstream ss(p_list);
      std::string tok;
      while (std::getline(ss, tok, ','))
        if (!tok.empty()) ps.push_back(std::stod(tok));
    }
    if (ps.empty()) throw std::invalid_argument("empty probability list");

    int ref_count = 0;
    const RefRow* ref = reference_rows(dataset_tag ? dataset_tag : "", &ref_count);

    const double L = p->p->L();
    const double Lmax = p->p->L_max();

    std::ostringstream os;
    os.precision(10);
    os << "p,A,gamma,ref_A,ref_gamma,final_grad_norm_sq,diverged\n";
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const double prob = ps[i];
      if (!(prob > 0.0 && prob <= 1.0))
        throw std::invalid_argument("need 0 < p <= 1");
      // A = L_max / min_i p_i; with B = 0 and c = 0 only the 1/sqrt(LAK)
      // term of the stepsize rule survives.
      const double A = Lmax / prob;
      const double gamma = 1.0 / std::sqrt(L * A * static_cast<double>(T));

      EstimatorSpec spec;
      spec.kind = EstimatorKind::BiasedIndependentSampling;
      spec.probs = {prob};

      RunConfig cfg;
      cfg.problem = p->p;
      cfg.estimator = spec;
      cfg.gamma = gamma;
      cfg.T = T;
      cfg.metric_period = period;
      cfg.seed = seed + 1000 * i;
      const EnsembleTrace agg = run_ensemble(cfg, n_seeds);

      if (out_dir) {
        std::filesystem::create_directories(out_dir);
        std::ostringstream name;
        name << out_dir << "/sweep_p" << prob << ".csv";
        std::ofstream f(name.str());
        if (!f) throw std::runtime_error("cannot open output file: " + name.str());
        f << ensemble_csv(agg);
      }

      double ref_A = std::numeric_limits<double>::quiet_NaN();
      double ref_gamma = std::numeric_limits<double>::quiet_NaN();
      for (int j = 0; j < ref_count; ++j)
        if (std::fabs(ref[j].p - prob) < 1e-12) {
          ref_A = ref[j].A;
          ref_gamma = ref[j].gamma;
        }

      os << prob << ',' << A << ',' << gamma << ',' << ref_A << ',' << ref_gamma
         << ',' << agg.rows.back().grad_mean << ',' << agg.diverged_count << '\n';
    }
    *out_summary_csv = dup_string(os.str());
  });
}

}  // extern "C"
