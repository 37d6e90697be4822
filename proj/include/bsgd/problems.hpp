#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsgd/vec.hpp"

namespace bsgd {

// Finite-sum objective f(x) = (1/n) sum_i f_i(x) with value/gradient oracles
// and the closed-form constants the theory consumes. Oracles are pure
// functions of (i, x) and safe to call concurrently.
class FiniteSumProblem {
 public:
  virtual ~FiniteSumProblem() = default;

  int n() const { return n_; }
  int dim() const { return d_; }
  const std::string& name() const { return name_; }

  virtual double component_value(int i, const Vec& x) const = 0;
  virtual void component_grad(int i, const Vec& x, Vec& out) const = 0;

  virtual double full_value(const Vec& x) const;
  virtual void full_grad(const Vec& x, Vec& out) const;
  Vec full_grad(const Vec& x) const {
    Vec g(d_);
    full_grad(x, g);
    return g;
  }
  Vec component_grad(int i, const Vec& x) const {
    Vec g(d_);
    component_grad(i, x, g);
    return g;
  }

  // Global smoothness constant of f. For problems that are only locally
  // smooth (e.g. the cubic witness) this is the bound on the default
  // probing box, and probe_box() reports the box it is valid on.
  double L() const { return L_; }
  double L_max() const { return L_max_; }
  const std::vector<double>& L_components() const { return L_i_; }

  std::optional<double> mu() const { return mu_; }
  std::optional<double> f_star() const { return f_star_; }
  void set_reference_f_star(double v) { f_star_ = v; }
  bool has_component_infima() const { return !f_i_star_.empty(); }
  const std::vector<double>& component_infima() const { return f_i_star_; }
  std::optional<Vec> minimizer() const { return minimizer_; }

  double probe_box() const { return probe_box_; }

 protected:
  FiniteSumProblem(std::string name, int n, int d)
      : name_(std::move(name)), n_(n), d_(d) {}

  std::string name_;
  int n_ = 0;
  int d_ = 0;
  double L_ = 0.0;
  double L_max_ = 0.0;
  std::vector<double> L_i_;
  std::optional<double> mu_;
  std::optional<double> f_star_;
  std::vector<double> f_i_star_;  // empty if unavailable
  std::optional<Vec> minimizer_;
  double probe_box_ = 10.0;  // checks probe [-box, box]^d
};

using ProblemPtr = std::shared_ptr<const FiniteSumProblem>;

// Sum of per-component diagonal quadratics
//   f_i(x) = 0.5 * sum_j w_ij (x_j - c_ij)^2 + off_i.
class QuadraticSumProblem final : public FiniteSumProblem {
 public:
  QuadraticSumProblem(std::string name, std::vector<Vec> weights,
                      std::vector<Vec> centers, std::vector<double> offsets = {});

  double component_value(int i, const Vec& x) const override;
  void component_grad(int i, const Vec& x, Vec& out) const override;

 private:
  std::vector<Vec> w_, c_;
  std::vector<double> off_;
};

// Arbitrary analytic components supplied as callables; constants are set by
// the caller. Hosts the 1-d/2-d counterexample witnesses.
class AnalyticProblem final : public FiniteSumProblem {
 public:
  using ValueFn = std::function<double(int, const Vec&)>;
  using GradFn = std::function<void(int, const Vec&, Vec&)>;

  AnalyticProblem(std::string name, int n, int d, ValueFn value, GradFn grad)
      : FiniteSumProblem(std::move(name), n, d),
        value_(std::move(value)),
        grad_(std::move(grad)) {}

  double component_value(int i, const Vec& x) const override { return value_(i, x); }
  void component_grad(int i, const Vec& x, Vec& out) const override { grad_(i, x, out); }

  void configure(double L, double L_max, std::vector<double> L_i,
                 std::optional<double> mu, std::optional<double> f_star,
                 std::vector<double> f_i_star, std::optional<Vec> minimizer,
                 double probe_box) {
    L_ = L;
    L_max_ = L_max;
    L_i_ = std::move(L_i);
    mu_ = mu;
    f_star_ = f_star;
    f_i_star_ = std::move(f_i_star);
    minimizer_ = std::move(minimizer);
    probe_box_ = probe_box;
  }

 private:
  ValueFn value_;
  GradFn grad_;
};

struct SparseRow {
  std::vector<int> idx;     // 0-based column indices, strictly increasing
  std::vector<double> val;
};

// Regularized logistic regression
//   f_i(x) = log(1 + exp(-y_i a_i^T x)) + lambda * sum_j x_j^2 / (1 + x_j^2).
class LogisticRegressionProblem final : public FiniteSumProblem {
 public:
  LogisticRegressionProblem(std::string name, std::vector<SparseRow> rows,
                            std::vector<double> labels, double lambda);

  double component_value(int i, const Vec& x) const override;
  void component_grad(int i, const Vec& x, Vec& out) const override;
  double full_value(const Vec& x) const override;
  void full_grad(const Vec& x, Vec& out) const override;

  double lambda() const { return lambda_; }

 private:
  std::vector<SparseRow> rows_;
  std::vector<double> labels_;
  double lambda_;
};

// --- operations -------------------------------------------------------------

// Largest eigenvalue of a symmetric PSD operator by power iteration.
// Deterministic all-ones start, relative tolerance 1e-6, 10000-iteration cap.
double power_iteration(const std::function<void(const Vec&, Vec&)>& apply, int dim,
                       double rel_tol = 1e-6, int max_iter = 10000);

// (L, L_max) of the regularized logistic objective:
//   L     = lambda_max((1/(4n)) A^T A + 2 lambda I)
//   L_max = max_i lambda_max((1/4) a_i a_i^T + 2 lambda I) = max_i ||a_i||^2/4 + 2 lambda.
std::pair<double, double> logistic_smoothness_constants(
    const std::vector<SparseRow>& rows, int d, double lambda);

// Delta* = (1/n) sum_i (f* - f_i*). Throws "infima unavailable" when the
// component infima are not known. +infinity-valued component infima are not
// representable, so callers on such problems get the throw.
double delta_star(const FiniteSumProblem& p);

struct PlCheck {
  bool all_pass = true;
  double worst_margin = 0.0;  // min over points of ||grad||^2 - 2 mu (f - f*)
  Vec worst_point;
};

// Report-only check of ||grad f(x)||^2 >= 2 mu (f(x) - f*) over the points.
PlCheck check_pl(const FiniteSumProblem& p, double mu, const std::vector<Vec>& points);

// 2 L (f(x) - f*) - ||grad f(x)||^2; nonnegative for smooth lower-bounded f.
double smoothness_gap(const FiniteSumProblem& p, const Vec& x);

// --- corpus -----------------------------------------------------------------

// Named witness problems used by the verifier and the counterexample corpus.
ProblemPtr make_problem(const std::string& name);
std::vector<std::string> problem_registry();

ProblemPtr make_logistic_from_rows(std::string name, std::vector<SparseRow> rows,
                                   std::vector<double> labels, double lambda);

// Deterministic dense synthetic classification data (features in {-1,+1}).
ProblemPtr make_synthetic_logistic(int n, int d, double lambda, std::uint64_t seed);

}  // namespace bsgd
