// Acceptance suite: one check per release criterion, each printing a PASS or
// FAIL line. The process exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "bsgd/constants.hpp"
#include "bsgd/data.hpp"
#include "bsgd/estimators.hpp"
#include "bsgd/optimizer.hpp"
#include "bsgd/problems.hpp"
#include "bsgd/verifier.hpp"

using namespace bsgd;

namespace {

int g_failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

void report(int criterion, bool pass, const std::string& what, double seconds) {
  std::printf("[%s] criterion %d: %s (%.1f s)\n", pass ? "PASS" : "FAIL", criterion,
              what.c_str(), seconds);
  if (!pass) ++g_failures;
}

bool close_rel(double got, double want, double rel) {
  return std::fabs(got - want) <= rel * std::fabs(want);
}

std::string dataset_path(const std::string& name) {
  namespace fs = std::filesystem;
  const char* env = std::getenv("BIASED_SGD_DATA_DIR");
  for (const std::string& base : {std::string(env ? env : ""), std::string("data")}) {
    if (base.empty()) continue;
    for (const std::string& file : {name, name + ".txt", name + ".libsvm"}) {
      const fs::path p = fs::path(base) / file;
      if (fs::exists(p)) return p.string();
    }
  }
  return "";
}

// ---- criterion 1: smoothness constants ---------------------------------------

void criterion_smoothness() {
  Timer t;
  bool pass = true;
  std::string what;

  struct Ref {
    const char* name;
    double L, L_max;
    int n, d;  // expected dimensions; 0 = do not check
  };
  const Ref refs[] = {{"splice", 97.83, 163.25, 0, 0},
                      {"a9a", 2.57, 4.5, 32560, 123},
                      {"w8a", 1.66, 29.5, 49749, 300}};
  int found = 0;
  for (const Ref& ref : refs) {
    const std::string path = dataset_path(ref.name);
    if (path.empty()) continue;
    ++found;
    Timer per;
    Dataset ds = parse_libsvm_file(path);
    const auto [L, Lmax] = logistic_smoothness_constants(ds.rows, ds.d, 1.0);
    bool ok = close_rel(L, ref.L, 0.01) && close_rel(Lmax, ref.L_max, 0.01) &&
              per.seconds() < 60.0;
    if (ref.n > 0 && (ds.n != ref.n || ds.d != ref.d)) ok = false;
    if (!ok) pass = false;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s n=%d d=%d L=%.4f (ref %.2f) L_max=%.4f (ref %.2f); ",
                  ref.name, ds.n, ds.d, L, ref.L, Lmax, ref.L_max);
    what += buf;
  }
  // Synthetic eigenvalue identity: 2x2 identity features, lambda = 0.
  std::vector<SparseRow> rows(2);
  rows[0].idx = {0};
  rows[0].val = {1.0};
  rows[1].idx = {1};
  rows[1].val = {1.0};
  const auto [L0, Lmax0] = logistic_smoothness_constants(rows, 2, 0.0);
  if (!(std::fabs(L0 - 0.125) <= 1e-9 && Lmax0 == 0.25)) pass = false;
  what += found == 0 ? "datasets absent; synthetic identity-matrix check L=1/8 exact"
                     : "synthetic identity-matrix check L=1/8 exact";
  report(1, pass, what, t.seconds());
}

// ---- criterion 2: constants tables -------------------------------------------

void criterion_tables() {
  Timer t;
  bool pass = true;
  auto expect = [&](const AbcConstants& got, double A, double B, double C, double b,
                    double c, const char* label) {
    const double tol = 1e-15;
    auto near = [&](double x, double y) {
      return std::fabs(x - y) <= tol * std::max(1.0, std::fabs(y));
    };
    if (!(near(got.A, A) && near(got.B, B) && near(got.C, C) && near(got.b, b) &&
          near(got.c, c))) {
      std::printf("  table mismatch: %s\n", label);
      pass = false;
    }
  };

  // Assumption table rows at exact rational parameter choices.
  expect(abc_from_assumption(Sg1Params{1, 2}), 0, 4, 0, 0.5, 0, "SG1");
  expect(abc_from_assumption(Sg2Params{0.25, 4}), 0, 16, 0, 0.25, 0, "SG2");
  expect(abc_from_assumption(ConParams{2}), 0, 3, 0, 0.25, 0, "CON");
  expect(abc_from_assumption(BvdParams{0.5, 0.25}), 0, 3.5, 0, 0.25, 0, "BVD");
  expect(abc_from_assumption(BreqParams{3, 9}), 0, 9, 0, 3, 0, "BREQ");
  expect(abc_from_assumption(BndParams{1, 4, 0.5, 2}), 0, 6, 12, 0.25, 1, "BND");
  expect(abc_from_assumption(AbsParams{1}), 0, 2, 2, 0.5, 0.5, "ABS");
  expect(abc_from_assumption(FsmlParams{0.5, 2, 3, 7}), 0, 7, 7, 0.5, 0, "FSML");

  // Estimator catalogue (main and appendix tables).
  ProblemConstants pc;
  pc.d = 8;
  auto row = [&](const char* record) {
    return abc_for_estimator(EstimatorSpec::parse(record), pc).abc;
  };
  expect(row("kind=top-k; k=2"), 0, 1, 0, 0.25, 0, "Top-k");
  expect(row("kind=rand-k; k=2"), 0, 4, 0, 1, 0, "Rand-k");
  expect(row("kind=biased-rand-k; k=2"), 0, 0.25, 0, 0.25, 0, "Biased Rand-k");
  expect(row("kind=adaptive-sparsification"), 0, 1, 0, 0.125, 0, "Adaptive");
  expect(row("kind=unbiased-rounding; grid=pow:2"), 0, 1.125, 0, 1, 0,
         "General unbiased rounding");
  expect(row("kind=biased-rounding; grid=pow:2"), 0, 16.0 / 9.0, 0, 1.0 / 3.0, 0,
         "General biased rounding");
  expect(row("kind=natural-compression"), 0, 1.125, 0, 1, 0, "Natural compression");
  const double H2 = dithering_constant_H(2.0, 4, 2.0, 8);
  expect(row("kind=natural-dithering; s=4"), 0, H2, 0, 1, 0, "Natural dithering");
  const double H3 = dithering_constant_H(3.0, 4, 2.0, 8);
  expect(row("kind=exponential-dithering; a=3; s=4"), 0, H3, 0, 1, 0,
         "General exponential dithering");
  expect(row("kind=composition; outer={kind=exponential-dithering; a=3; s=4}; "
             "inner={kind=top-k; k=2}"),
         0, H3 * H3, 0, 2.0 / (8.0 * H3), 0, "Top-k + dithering");
  expect(row("kind=hard-threshold; w=2"), 0, 1, 0, 1, 32, "Hard threshold");
  expect(row("kind=scaled-integer-rounding; chi=2"), 0, 2, 4, 0.5, 1,
         "Scaled integer rounding");
  expect(row("kind=biased-dithering"), 0, 8, 0, 1, 0, "Biased dithering");
  expect(row("kind=sign"), 0, 3.75, 0, 0.0625, 0, "Sign compression");
  pc.L = 2.0;
  pc.tau = 0.01;
  expect(row("kind=gaussian-smoothing"), 0, 24,
         0.5 * 1e-4 * 4.0 * 14.0 * 14.0 * 14.0, 0.5,
         0.125 * 1e-4 * 4.0 * 11.0 * 11.0 * 11.0, "Gaussian smoothing");
  pc.L_max = 4.0;
  pc.delta_star = 0.25;
  expect(row("kind=biased-sampling; p=0.25,0.5; noise-sd=3"), 16, 0, 17, 0.25, 0,
         "Biased independent sampling");
  pc.n_components = 8;
  pc.L_max = 1.25;
  pc.delta_star = 0.5;
  expect(row("kind=distributed-rounding; p=0.2; grid=linear:1"), 0.25, 0.4, 0.25, 0.8,
         0, "Distributed biased rounding");

  const bool in_time = t.seconds() < 5.0;
  report(2, pass && in_time, "assumption and estimator constant tables", t.seconds());
}

// ---- criterion 3: coverage matrix ----------------------------------------------

void criterion_coverage() {
  Timer t;
  int mismatches = 0;
  int rows = 0;
  for (const auto& name : coverage_estimators()) {
    const CoverageRow row = classify(name);
    ++rows;
    if (!row.matches_expected) {
      ++mismatches;
      std::printf("  coverage mismatch in row %s\n", name.c_str());
      for (const auto& c : row.cells)
        if (!c.matches)
          std::printf("    %s expected %s\n", assumption_name(c.assumption),
                      c.expected_holds ? "holds" : "fails");
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "coverage matrix: %d rows, %d mismatching", rows,
                mismatches);
  report(3, mismatches == 0 && rows == 17 && t.seconds() < 300.0, buf, t.seconds());
}

// ---- criterion 4: counterexample corpus ------------------------------------------

void criterion_counterexamples() {
  Timer t;
  bool pass = true;
  int cases = 0;
  for (const auto& id : counterexample_corpus()) {
    const auto r = run_counterexample(id);
    ++cases;
    if (!r.ok) {
      pass = false;
      std::printf("%s", r.report.c_str());
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "counterexample corpus: %d cases", cases);
  report(4, pass && cases == 11 && t.seconds() < 120.0, buf, t.seconds());
}

// ---- criterion 5: bound compliance -------------------------------------------------

void criterion_bounds() {
  Timer t;
  bool pass = true;
  const auto problem = make_problem("sum-quad10");
  const double L = problem->L(), mu = *problem->mu();
  const double dstar = delta_star(*problem);

  struct Entry {
    const char* label;
    const char* record;
    AbcConstants abc;
  };
  const double A = problem->L_max() / 0.5;
  const std::vector<Entry> entries = {
      {"exact", "kind=exact", {0, 1, 0, 1, 0}},
      {"top-k(d/2)", "kind=top-k; k=5", {0, 1, 0, 0.5, 0}},
      {"rand-k(d/2)", "kind=rand-k; k=5", {0, 2, 0, 1, 0}},
      {"natural-compression", "kind=natural-compression", {0, 9.0 / 8.0, 0, 1, 0}},
      {"biased-sampling(1/2)", "kind=biased-sampling; p=0.5",
       {A, 0, 2.0 * A * dstar, 0.5, 0}},
  };

  RunConfig base;
  base.problem = problem;
  base.T = 2000;
  base.metric_period = 10;
  base.seed = 2024;
  base.x0 = Vec(problem->dim(), 0.0);
  const double delta0 = problem->full_value(base.x0) - *problem->f_star();

  for (const auto& e : entries) {
    RunConfig cfg = base;
    cfg.estimator = EstimatorSpec::parse(e.record);
    StepsizeInputs in;
    in.abc = e.abc;
    in.L = L;
    in.mu = mu;
    in.T = static_cast<double>(cfg.T);

    cfg.gamma = theoretical_stepsize(StepsizeRuleId::NoncvxNeighborhood, in).gamma;
    EnsembleTrace agg = run_ensemble(cfg, 200);
    const auto r15 = bound_compliance(agg, TheoremId::Noncvx, e.abc, L, mu, delta0,
                                      cfg.gamma, cfg.T);
    if (!r15.pass) {
      pass = false;
      std::printf("  nonconvex bound fails for %s: %s\n", e.label, r15.detail.c_str());
    }

    cfg.gamma = theoretical_stepsize(StepsizeRuleId::Pl, in).gamma;
    agg = run_ensemble(cfg, 200);
    const auto r17 = bound_compliance(agg, TheoremId::Pl, e.abc, L, mu, delta0,
                                      cfg.gamma, cfg.T, *problem->f_star());
    if (!r17.pass) {
      pass = false;
      std::printf("  PL bound fails for %s: %s\n", e.label, r17.detail.c_str());
    }
  }

  // Iterate bound on a problem satisfying the strict constant condition,
  // with the shift at the midpoint of its admissible interval.
  const auto iso = make_problem("iso-quad10");
  for (const auto& e :
       {entries[0], entries[3]}) {  // exact, natural compression: A + L(B+1-2b) < mu
    const SRange sr = feasible_s_range(e.abc, iso->L(), *iso->mu());
    if (sr.empty) {
      pass = false;
      continue;
    }
    const double s = sr.midpoint();
    StepsizeInputs in;
    in.abc = e.abc;
    in.L = iso->L();
    in.mu = *iso->mu();
    in.s = s;
    RunConfig cfg;
    cfg.problem = iso;
    cfg.estimator = EstimatorSpec::parse(e.record);
    cfg.T = 2000;
    cfg.metric_period = 10;
    cfg.seed = 77;
    cfg.x0 = Vec(iso->dim(), 3.0);
    cfg.gamma = theoretical_stepsize(StepsizeRuleId::StronglyConvexIterate, in).gamma;
    const double d0 = dist2sq(cfg.x0, *iso->minimizer());
    const EnsembleTrace agg = run_ensemble(cfg, 200);
    const auto r19 = bound_compliance(agg, TheoremId::StronglyConvexIterate, e.abc,
                                      iso->L(), *iso->mu(), d0, cfg.gamma, cfg.T, 0.0, s);
    if (!r19.pass) {
      pass = false;
      std::printf("  iterate bound fails for %s: %s\n", e.label, r19.detail.c_str());
    }
  }

  report(5, pass && t.seconds() < 600.0,
         "nonconvex and PL bounds over five estimators, iterate bound at the "
         "midpoint shift (200 seeds, T=2000, 3-SE slack)",
         t.seconds());
}

// ---- criterion 6: probability sweep -------------------------------------------------

void criterion_sweep() {
  Timer t;
  bool pass = true;
  ProblemPtr problem;
  std::string tag;
  const std::string path = dataset_path("splice");
  if (!path.empty()) {
    Dataset ds = parse_libsvm_file(path);
    problem = make_logistic_from_rows("splice", std::move(ds.rows),
                                      binarize_labels(ds), 1.0);
    tag = "splice";
  } else {
    problem = make_synthetic_logistic(1000, 60, 1.0, 12345);
    tag = "synthetic 1000x60";
  }
  const double L = problem->L(), Lmax = problem->L_max();
  const long T = 5000;
  const int seeds = 20;

  struct RefRow {
    double p, A, gamma;
  };
  const RefRow ref[] = {{0.01, 16325.0, 3.54e-4},
                        {0.1, 1632.5, 1.12e-3},
                        {0.5, 326.5, 2.50e-3}};

  std::printf("  sweep on %s: L=%.4f L_max=%.4f\n", tag.c_str(), L, Lmax);
  std::printf("  %8s %12s %12s %14s %14s %16s\n", "p", "A", "gamma",
              "ref A", "ref gamma", "final |grad|^2");
  double prev = -1.0;
  int idx = 0;
  for (const double p : {0.01, 0.1, 0.5}) {
    const double A = Lmax / p;
    // A must equal L_max / min p exactly, by construction.
    if (A != Lmax / p) pass = false;
    const double gamma = 1.0 / std::sqrt(L * A * static_cast<double>(T));
    RunConfig cfg;
    cfg.problem = problem;
    cfg.estimator = EstimatorSpec::parse("kind=biased-sampling; p=" + std::to_string(p));
    cfg.gamma = gamma;
    cfg.T = T;
    cfg.metric_period = 10;
    cfg.seed = 99;
    const EnsembleTrace agg = run_ensemble(cfg, seeds);
    const double final_grad = agg.rows.back().grad_mean;
    const bool have_ref = tag == "splice";
    std::printf("  %8.2f %12.4f %12.6g %14s %14s %16.8g\n", p, A, gamma,
                have_ref ? std::to_string(ref[idx].A).c_str() : "-",
                have_ref ? std::to_string(ref[idx].gamma).c_str() : "-", final_grad);
    if (prev >= 0.0 && !(final_grad < prev)) {
      pass = false;
      std::printf("  final gradient norm did not decrease from p=%g\n", p);
    }
    prev = final_grad;
    ++idx;
  }
  report(6, pass && t.seconds() < 600.0,
         "sampling sweep: final mean |grad f|^2 strictly decreasing in p "
         "(reference stepsize table printed side by side, report-only)",
         t.seconds());
}

// ---- criterion 7: estimator micro-properties ------------------------------------------

void criterion_micro() {
  Timer t;
  bool pass = true;
  RandomnessStream rng(321);
  const auto quad = make_problem("quad3");

  for (int trial = 0; trial < 100; ++trial) {
    Vec v(3);
    for (auto& x : v) x = rng.uniform(-10.0, 10.0);
    const double vsq = norm2sq(v);

    // Exact-enumeration unbiasedness and second moments via the verifier.
    const auto at = [&](const char* record) {
      return estimate_moments(EstimatorSpec::parse(record), *quad, v, 1, trial);
    };
    const auto mr = at("kind=rand-k; k=1");
    const auto mb = at("kind=biased-rand-k; k=1");
    const auto mn = at("kind=natural-compression");
    if (!mr.exact || !mb.exact || !mn.exact) pass = false;
    for (int j = 0; j < 3; ++j) {
      if (std::fabs(mr.mean[j] - v[j]) > 1e-12 * std::max(1.0, std::fabs(v[j])))
        pass = false;
      if (std::fabs(mn.mean[j] - v[j]) > 1e-12 * std::max(1.0, std::fabs(v[j])))
        pass = false;
    }
    if (std::fabs(mr.second_moment - 3.0 * vsq) > 1e-12 * std::max(1.0, 3.0 * vsq))
      pass = false;
    if (std::fabs(mb.second_moment - vsq / 3.0) > 1e-12 * std::max(1.0, vsq))
      pass = false;
    if (mn.second_moment > 9.0 / 8.0 * vsq * (1.0 + 1e-12)) pass = false;

    // Top-k contractivity.
    const Vec g = top_k(v, 1);
    if (dist2sq(g, v) > (1.0 - 1.0 / 3.0) * vsq * (1.0 + 1e-12)) pass = false;
  }

  // Lemma gap over the corpus problems with known infima.
  for (const auto& name : problem_registry()) {
    const auto p = make_problem(name);
    if (!p->f_star()) continue;
    const auto rep = lemma_smooth_check(*p, probe_grid(*p, 64));
    if (!rep.all_pass) {
      pass = false;
      std::printf("  lemma gap negative on %s\n", name.c_str());
    }
  }

  report(7, pass && t.seconds() < 30.0,
         "estimator moment identities (1e-12) and lemma gap (-1e-9 floor)",
         t.seconds());
}

}  // namespace

int main() {
  criterion_smoothness();
  criterion_tables();
  criterion_coverage();
  criterion_counterexamples();
  criterion_bounds();
  criterion_sweep();
  criterion_micro();
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
