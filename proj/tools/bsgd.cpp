// Command-line surface for the biasedsgd library. Everything goes through
// the C API in biasedsgd.h; this translation unit never touches the core
// C++ headers.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "biasedsgd.h"

namespace {

struct StringGuard {
  char* s = nullptr;
  ~StringGuard() { bsgd_string_free(s); }
  std::string str() const { return s ? s : ""; }
};

[[noreturn]] void die(bsgd_status st) {
  std::cerr << "error: " << bsgd_last_error() << " (" << bsgd_status_name(st) << ")\n";
  std::exit(1);
}

void check_ok(bsgd_status st) {
  if (st != BSGD_OK) die(st);
}

struct EstimatorFlags {
  std::string name;
  int k = 0;
  double w = -1.0, chi = 0.0, a = 0.0, tau = 0.0, noise_sd = -1.0, scale = 0.0;
  int s_levels = 0;
  double p_norm = 0.0;
  std::string p_list, grid, record;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--estimator", name, "estimator kind");
    cmd->add_option("--record", record, "full estimator config record (overrides flags)");
    cmd->add_option("--k", k, "sparsifier k");
    cmd->add_option("--w", w, "hard-threshold level");
    cmd->add_option("--chi", chi, "integer-rounding scale");
    cmd->add_option("--a", a, "dithering base");
    cmd->add_option("--s", s_levels, "dithering levels");
    cmd->add_option("--pnorm", p_norm, "dithering norm index");
    cmd->add_option("--tau", tau, "smoothing parameter");
    cmd->add_option("--noise-sd", noise_sd, "sampling noise std dev");
    cmd->add_option("--scale", scale, "gradient scale factor");
    cmd->add_option("--p", p_list, "probability or comma list");
    cmd->add_option("--grid", grid, "rounding grid, pow:<base> or linear:<step>");
  }

  std::string build_record() const {
    if (!record.empty()) return record;
    if (name.empty()) {
      std::cerr << "error: --estimator is required\n";
      std::exit(1);
    }
    std::ostringstream os;
    os.precision(17);
    os << "kind=" << name;
    if (k > 0) os << "; k=" << k;
    if (w >= 0.0) os << "; w=" << w;
    if (chi > 0.0) os << "; chi=" << chi;
    if (a > 0.0) os << "; a=" << a;
    if (s_levels > 0) os << "; s=" << s_levels;
    if (p_norm > 0.0) os << "; pnorm=" << p_norm;
    if (tau > 0.0) os << "; tau=" << tau;
    if (noise_sd >= 0.0) os << "; noise-sd=" << noise_sd;
    if (scale != 0.0) os << "; scale=" << scale;
    if (!p_list.empty()) os << "; p=" << p_list;
    if (!grid.empty()) os << "; grid=" << grid;
    return os.str();
  }
};

struct ProblemFlags {
  std::string dataset, problem;
  double lambda = 1.0;
  int synth_n = 1000, synth_d = 60;
  bool allow_synthetic_fallback = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--dataset", dataset,
                    "LibSVM file; BIASED_SGD_DATA_DIR is used as a prefix");
    cmd->add_option("--problem", problem, "named built-in problem");
    cmd->add_option("--lambda", lambda, "regularization weight (default 1)");
  }

  std::string resolve_dataset_path() const {
    namespace fs = std::filesystem;
    if (dataset.empty()) return "";
    if (fs::exists(dataset)) return dataset;
    if (const char* dir = std::getenv("BIASED_SGD_DATA_DIR")) {
      const fs::path joined = fs::path(dir) / dataset;
      if (fs::exists(joined)) return joined.string();
    }
    return "";
  }

  // Tag used to line up the reported reference constants.
  std::string dataset_tag() const {
    if (dataset.empty()) return "";
    return std::filesystem::path(dataset).stem().string();
  }

  bsgd_problem* open(bool* used_synthetic = nullptr) const {
    bsgd_problem* p = nullptr;
    if (used_synthetic) *used_synthetic = false;
    if (!dataset.empty()) {
      const std::string path = resolve_dataset_path();
      if (!path.empty()) {
        check_ok(bsgd_problem_open_libsvm(path.c_str(), lambda, &p));
        return p;
      }
      if (!allow_synthetic_fallback) {
        std::cerr << "error: dataset not found: " << dataset << "\n";
        std::exit(1);
      }
      std::cerr << "warning: dataset " << dataset << " not found; using a synthetic "
                << synth_n << "x" << synth_d << " logistic problem\n";
      if (used_synthetic) *used_synthetic = true;
      check_ok(bsgd_problem_open_synthetic_logistic(synth_n, synth_d, lambda, 12345, &p));
      return p;
    }
    if (!problem.empty()) {
      check_ok(bsgd_problem_open(problem.c_str(), &p));
      return p;
    }
    std::cerr << "error: provide --dataset or --problem\n";
    std::exit(1);
  }
};

std::string default_assumption_record(const std::string& v) {
  if (v.find('=') != std::string::npos) return v;  // already a record
  // Bare names get the exact-oracle constants.
  if (v == "abc") return "kind=abc; A=0; B=1; C=0; b=1; c=0";
  if (v == "abs") return "kind=abs; delta=0";
  if (v == "con") return "kind=con; delta=1";
  if (v == "sg1") return "kind=sg1; alpha=1; beta=1";
  if (v == "sg2") return "kind=sg2; tau=1; beta=1";
  if (v == "bvd") return "kind=bvd; eta=0; xi=0";
  if (v == "bnd") return "kind=bnd; M=0; sigma2=0; m=0; phi2=0";
  if (v == "breq") return "kind=breq; rho=1; zeta=1";
  if (v == "fsml") return "kind=fsml; q=1; u=1; U=0; Q=0";
  return "kind=" + v;
}

void write_or_print(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream f(out_path);
  if (!f) {
    std::cerr << "error: cannot open output file " << out_path << "\n";
    std::exit(1);
  }
  f << content;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BiasedSGD: biased-gradient SGD, estimator constants, assumption "
               "verification, and the logistic-regression study"};
  app.require_subcommand(1);

  // --- constants -------------------------------------------------------------
  auto* cmd_constants = app.add_subcommand(
      "constants", "framework constants, smoothness constants, stepsizes");
  ProblemFlags cp;
  EstimatorFlags ce;
  int cdim = 0;
  long cT = 5000;
  cp.add_to(cmd_constants);
  ce.add_to(cmd_constants);
  cmd_constants->add_option("--d", cdim, "vector dimension when no problem is given");
  cmd_constants->add_option("--T", cT, "horizon for the stepsize rule");

  // --- check -----------------------------------------------------------------
  auto* cmd_check = app.add_subcommand("check", "verify one assumption numerically");
  ProblemFlags kp;
  EstimatorFlags ke;
  std::string k_assumption;
  long k_budget = 100000;
  int k_points = 64;
  std::uint64_t k_seed = 0;
  kp.add_to(cmd_check);
  ke.add_to(cmd_check);
  cmd_check->add_option("--assumption", k_assumption, "assumption name or record")
      ->required();
  cmd_check->add_option("--budget", k_budget, "Monte Carlo budget per point");
  cmd_check->add_option("--points", k_points, "probe point count");
  cmd_check->add_option("--seed", k_seed, "random seed");

  // --- classify ---------------------------------------------------------------
  auto* cmd_classify =
      app.add_subcommand("classify", "coverage-matrix row(s) for an estimator");
  std::string cl_target = "all";
  std::string cl_out;
  cmd_classify->add_option("--estimator", cl_target, "row name or 'all'");
  cmd_classify->add_option("--out", cl_out, "write CSV here");

  // --- counterexample ----------------------------------------------------------
  auto* cmd_ce = app.add_subcommand("counterexample",
                                    "run the non-implication witness corpus");
  std::string ce_id = "all";
  cmd_ce->add_option("id", ce_id, "case id or 'all'");

  // --- run ----------------------------------------------------------------------
  auto* cmd_run = app.add_subcommand("run", "one BiasedSGD run or seed ensemble");
  ProblemFlags rp;
  EstimatorFlags re;
  std::string r_gamma = "rule:noncvx-neighborhood";
  long rT = 5000, r_period = 10;
  int r_seeds = 1;
  std::uint64_t r_seed = 0;
  std::string r_out;
  rp.add_to(cmd_run);
  re.add_to(cmd_run);
  cmd_run->add_option("--gamma", r_gamma, "stepsize value or rule:<name>");
  cmd_run->add_option("--T", rT, "iterations (default 5000)");
  cmd_run->add_option("--period", r_period, "metric period (default 10)");
  cmd_run->add_option("--seeds", r_seeds, "ensemble size");
  cmd_run->add_option("--seed", r_seed, "base seed");
  cmd_run->add_option("--out", r_out, "write trace CSV here");

  // --- sweep ----------------------------------------------------------------------
  auto* cmd_sweep = app.add_subcommand(
      "sweep", "sampling-probability study with theoretical stepsizes");
  ProblemFlags sp;
  sp.allow_synthetic_fallback = true;
  std::string s_plist = "0.01,0.1,0.5";
  long sT = 5000, s_period = 10;
  int s_seeds = 20;
  std::uint64_t s_seed = 0;
  std::string s_out;
  sp.add_to(cmd_sweep);
  cmd_sweep->add_option("--p", s_plist, "comma-separated probabilities");
  cmd_sweep->add_option("--T", sT, "iterations (default 5000)");
  cmd_sweep->add_option("--period", s_period, "metric period (default 10)");
  cmd_sweep->add_option("--seeds", s_seeds, "ensemble size (default 20)");
  cmd_sweep->add_option("--seed", s_seed, "base seed");
  cmd_sweep->add_option("--out", s_out, "directory for per-p trace CSVs");

  // --- bound -------------------------------------------------------------------------
  auto* cmd_bound =
      app.add_subcommand("bound", "evaluate a convergence guarantee right-hand side");
  std::string b_theorem = "noncvx";
  bsgd_abc b_abc{0, 1, 0, 1, 0};
  double bL = 1, b_mu = 0, b_delta0 = 1, b_gamma = 0, bT = 1000, b_s = 0;
  cmd_bound->add_option("--theorem", b_theorem, "noncvx | pl | strongly-convex-iterate");
  cmd_bound->add_option("--A", b_abc.A);
  cmd_bound->add_option("--B", b_abc.B);
  cmd_bound->add_option("--C", b_abc.C);
  cmd_bound->add_option("--b", b_abc.b);
  cmd_bound->add_option("--c", b_abc.c);
  cmd_bound->add_option("--L", bL);
  cmd_bound->add_option("--mu", b_mu);
  cmd_bound->add_option("--delta0", b_delta0);
  cmd_bound->add_option("--gamma", b_gamma)->required();
  cmd_bound->add_option("--T", bT);
  cmd_bound->add_option("--s", b_s);

  CLI11_PARSE(app, argc, argv);

  if (*cmd_constants) {
    bsgd_problem* prob = nullptr;
    bsgd_problem_info info{};
    if (!cp.dataset.empty() || !cp.problem.empty()) {
      prob = cp.open();
      check_ok(bsgd_problem_query(prob, &info));
      std::printf("problem: n=%d d=%d\n", info.n, info.d);
      std::printf("L      = %.10g\n", info.L);
      std::printf("L_max  = %.10g\n", info.L_max);
      if (info.mu > 0) std::printf("mu     = %.10g\n", info.mu);
      if (std::isnan(info.delta_star))
        std::printf("Delta* = unavailable (component infima unknown)\n");
      else
        std::printf("Delta* = %.10g\n", info.delta_star);
    }
    if (!ce.name.empty() || !ce.record.empty()) {
      bsgd_estimator* est = nullptr;
      check_ok(bsgd_estimator_parse(ce.build_record().c_str(), &est));
      bsgd_abc abc{};
      StringGuard note;
      check_ok(bsgd_estimator_constants(est, prob, prob ? info.d : cdim, &abc, &note.s));
      std::printf("A = %.10g\nB = %.10g\nC = %.10g\nb = %.10g\nc = %.10g\n", abc.A,
                  abc.B, abc.C, abc.b, abc.c);
      if (!note.str().empty()) std::printf("resolved: %s\n", note.s);
      StringGuard term;
      double gamma = 0;
      const double mu = prob && info.mu > 0 ? info.mu : 0.0;
      const bsgd_status st =
          bsgd_stepsize("noncvx-neighborhood", &abc, prob ? info.L : 1.0, mu,
                        static_cast<double>(cT), 0.0, 0.0, &gamma, &term.s);
      if (st == BSGD_OK)
        std::printf("gamma(noncvx-neighborhood, T=%ld) = %.10g  [active term: %s]\n",
                    cT, gamma, term.s);
      else
        std::printf("gamma(noncvx-neighborhood): %s\n", bsgd_last_error());
      bsgd_estimator_close(est);
    }
    if (prob) bsgd_problem_close(prob);
    return 0;
  }

  if (*cmd_check) {
    bsgd_problem* prob = kp.problem.empty() && kp.dataset.empty()
                             ? nullptr
                             : kp.open();
    if (!prob) check_ok(bsgd_problem_open("quad2", &prob));
    bsgd_estimator* est = nullptr;
    check_ok(bsgd_estimator_parse(ke.build_record().c_str(), &est));
    StringGuard csv;
    check_ok(bsgd_check(prob, est, default_assumption_record(k_assumption).c_str(),
                        k_points, k_budget, k_seed, &csv.s));
    std::cout << csv.str();
    const bool violated = csv.str().find(",violated,") != std::string::npos;
    bsgd_estimator_close(est);
    bsgd_problem_close(prob);
    return violated ? 2 : 0;
  }

  if (*cmd_classify) {
    if (cl_target == "all") {
      StringGuard table, csv;
      int mismatches = 0;
      check_ok(bsgd_coverage(&table.s, &csv.s, &mismatches));
      std::cout << table.str();
      if (!cl_out.empty()) write_or_print(cl_out, csv.str());
      if (mismatches > 0) {
        std::cerr << mismatches << " row(s) disagree with the reference matrix\n";
        return 1;
      }
      return 0;
    }
    StringGuard csv;
    int matches = 0;
    check_ok(bsgd_classify(cl_target.c_str(), &csv.s, &matches));
    write_or_print(cl_out, csv.str());
    return matches ? 0 : 1;
  }

  if (*cmd_ce) {
    StringGuard report;
    int ok = 0;
    check_ok(bsgd_counterexample(ce_id.c_str(), &report.s, &ok));
    std::cout << report.str();
    return ok ? 0 : 1;
  }

  if (*cmd_run) {
    bsgd_problem* prob = rp.open();
    bsgd_estimator* est = nullptr;
    check_ok(bsgd_estimator_parse(re.build_record().c_str(), &est));
    bsgd_trace* trace = nullptr;
    check_ok(bsgd_run(prob, est, r_gamma.c_str(), rT, r_period, r_seed, r_seeds,
                      nullptr, &trace));
    StringGuard csv;
    check_ok(bsgd_trace_csv(trace, &csv.s));
    write_or_print(r_out, csv.str());
    bsgd_trace_stats stats{};
    check_ok(bsgd_trace_query(trace, &stats));
    if (!r_out.empty())
      std::printf("gamma=%.10g final_f=%.10g final_grad_norm_sq=%.10g%s\n", stats.gamma,
                  stats.final_f, stats.final_grad_norm_sq,
                  stats.diverged ? " [diverged]" : "");
    if (stats.diverged) std::cerr << "warning: divergence flagged\n";
    bsgd_trace_close(trace);
    bsgd_estimator_close(est);
    bsgd_problem_close(prob);
    return 0;
  }

  if (*cmd_sweep) {
    bool synthetic = false;
    bsgd_problem* prob = sp.open(&synthetic);
    StringGuard summary;
    check_ok(bsgd_sweep(prob, s_plist.c_str(), sT, s_period, s_seeds, s_seed,
                        s_out.empty() ? nullptr : s_out.c_str(),
                        synthetic ? "synthetic" : sp.dataset_tag().c_str(),
                        &summary.s));
    std::cout << summary.str();
    bsgd_problem_close(prob);
    return 0;
  }

  if (*cmd_bound) {
    double value = 0;
    check_ok(bsgd_bound(b_theorem.c_str(), &b_abc, bL, b_mu, b_delta0, b_gamma, bT,
                        b_s, &value));
    std::printf("bound = %.10g\n", value);
    if (b_theorem == "strongly-convex-iterate") {
      double lo = 0, hi = 0;
      int empty = 0;
      check_ok(bsgd_feasible_s(&b_abc, bL, b_mu, &lo, &hi, &empty));
      std::printf("admissible s interval: %s(%.10g, %.10g)\n", empty ? "empty " : "",
                  lo, hi);
    }
    return 0;
  }

  return 0;
}
