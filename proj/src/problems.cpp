#include "bsgd/problems.hpp"

#include <algorithm>
#include <cmath>

#include "bsgd/rng.hpp"

namespace bsgd {

double FiniteSumProblem::full_value(const Vec& x) const {
  double s = 0.0;
  for (int i = 0; i < n_; ++i) s += component_value(i, x);
  return s / n_;
}

void FiniteSumProblem::full_grad(const Vec& x, Vec& out) const {
  out.assign(d_, 0.0);
  Vec g(d_);
  for (int i = 0; i < n_; ++i) {
    component_grad(i, x, g);
    axpy(1.0, g, out);
  }
  scale(out, 1.0 / n_);
}

// --- QuadraticSumProblem -----------------------------------------------------

QuadraticSumProblem::QuadraticSumProblem(std::string name, std::vector<Vec> weights,
                                         std::vector<Vec> centers,
                                         std::vector<double> offsets)
    : FiniteSumProblem(std::move(name), static_cast<int>(weights.size()),
                       static_cast<int>(weights.at(0).size())),
      w_(std::move(weights)),
      c_(std::move(centers)),
      off_(std::move(offsets)) {
  if (off_.empty()) off_.assign(n_, 0.0);

  L_i_.resize(n_);
  Vec mean_w(d_, 0.0);
  for (int i = 0; i < n_; ++i) {
    L_i_[i] = *std::max_element(w_[i].begin(), w_[i].end());
    axpy(1.0, w_[i], mean_w);
  }
  scale(mean_w, 1.0 / n_);
  L_ = *std::max_element(mean_w.begin(), mean_w.end());
  const double lmin = *std::min_element(mean_w.begin(), mean_w.end());
  if (lmin > 0.0) mu_ = lmin;
  L_max_ = *std::max_element(L_i_.begin(), L_i_.end());

  // Minimizer of the average solves (sum_i w_ij) x_j = sum_i w_ij c_ij.
  Vec xstar(d_, 0.0);
  for (int j = 0; j < d_; ++j) {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n_; ++i) {
      num += w_[i][j] * c_[i][j];
      den += w_[i][j];
    }
    xstar[j] = den > 0.0 ? num / den : 0.0;
  }
  minimizer_ = xstar;
  f_star_ = full_value(xstar);
  f_i_star_ = off_;
}

double QuadraticSumProblem::component_value(int i, const Vec& x) const {
  double s = 0.0;
  for (int j = 0; j < d_; ++j) {
    const double dj = x[j] - c_[i][j];
    s += w_[i][j] * dj * dj;
  }
  return 0.5 * s + off_[i];
}

void QuadraticSumProblem::component_grad(int i, const Vec& x, Vec& out) const {
  out.resize(d_);
  for (int j = 0; j < d_; ++j) out[j] = w_[i][j] * (x[j] - c_[i][j]);
}

// --- LogisticRegressionProblem ----------------------------------------------

LogisticRegressionProblem::LogisticRegressionProblem(std::string name,
                                                     std::vector<SparseRow> rows,
                                                     std::vector<double> labels,
                                                     double lambda)
    : FiniteSumProblem(std::move(name), static_cast<int>(rows.size()), 0),
      rows_(std::move(rows)),
      labels_(std::move(labels)),
      lambda_(lambda) {
  if (rows_.empty()) throw std::invalid_argument("empty problem");
  if (lambda_ < 0.0) throw std::invalid_argument("lambda must be >= 0");
  int d = 0;
  for (const auto& r : rows_) {
    for (std::size_t k = 0; k < r.idx.size(); ++k) {
      if (!std::isfinite(r.val[k])) throw std::invalid_argument("invalid data");
      d = std::max(d, r.idx[k] + 1);
    }
  }
  d_ = d;
  auto [L, Lmax] = logistic_smoothness_constants(rows_, d_, lambda_);
  L_ = L;
  L_max_ = Lmax;
  L_i_.resize(n_);
  for (int i = 0; i < n_; ++i) {
    double nrm = 0.0;
    for (double v : rows_[i].val) nrm += v * v;
    L_i_[i] = 0.25 * nrm + 2.0 * lambda_;
  }
  // f* is not known in closed form; callers may set a reference value.
}

static inline double row_dot(const SparseRow& r, const Vec& x) {
  double s = 0.0;
  for (std::size_t k = 0; k < r.idx.size(); ++k) s += r.val[k] * x[r.idx[k]];
  return s;
}

double LogisticRegressionProblem::component_value(int i, const Vec& x) const {
  const double t = labels_[i] * row_dot(rows_[i], x);
  // log(1 + exp(-t)) computed stably
  const double loss = t > 0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
  double reg = 0.0;
  for (double xj : x) reg += xj * xj / (1.0 + xj * xj);
  return loss + lambda_ * reg;
}

void LogisticRegressionProblem::component_grad(int i, const Vec& x, Vec& out) const {
  out.assign(d_, 0.0);
  const SparseRow& r = rows_[i];
  const double t = labels_[i] * row_dot(r, x);
  const double sig = 1.0 / (1.0 + std::exp(t));  // sigma(-t)
  for (std::size_t k = 0; k < r.idx.size(); ++k)
    out[r.idx[k]] = -labels_[i] * sig * r.val[k];
  for (int j = 0; j < d_; ++j) {
    const double den = 1.0 + x[j] * x[j];
    out[j] += lambda_ * 2.0 * x[j] / (den * den);
  }
}

double LogisticRegressionProblem::full_value(const Vec& x) const {
  double s = 0.0;
  for (int i = 0; i < n_; ++i) {
    const double t = labels_[i] * row_dot(rows_[i], x);
    s += t > 0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
  }
  s /= n_;
  double reg = 0.0;
  for (double xj : x) reg += xj * xj / (1.0 + xj * xj);
  return s + lambda_ * reg;
}

void LogisticRegressionProblem::full_grad(const Vec& x, Vec& out) const {
  out.assign(d_, 0.0);
  for (int i = 0; i < n_; ++i) {
    const SparseRow& r = rows_[i];
    const double t = labels_[i] * row_dot(r, x);
    const double sig = 1.0 / (1.0 + std::exp(t));
    const double coef = -labels_[i] * sig;
    for (std::size_t k = 0; k < r.idx.size(); ++k) out[r.idx[k]] += coef * r.val[k];
  }
  scale(out, 1.0 / n_);
  for (int j = 0; j < d_; ++j) {
    const double den = 1.0 + x[j] * x[j];
    out[j] += lambda_ * 2.0 * x[j] / (den * den);
  }
}

// --- operations ---------------------------------------------------------------

double power_iteration(const std::function<void(const Vec&, Vec&)>& apply, int dim,
                       double rel_tol, int max_iter) {
  Vec v(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
  Vec w(dim);
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    apply(v, w);
    const double nrm = norm2(w);
    if (nrm == 0.0) return 0.0;
    const double next = dot(v, w);
    scale(w, 1.0 / nrm);
    v.swap(w);
    if (it > 0 && std::fabs(next - lambda) <= rel_tol * std::fabs(next)) return next;
    lambda = next;
  }
  return lambda;
}

std::pair<double, double> logistic_smoothness_constants(
    const std::vector<SparseRow>& rows, int d, double lambda) {
  if (rows.empty()) throw std::invalid_argument("empty problem");
  const int n = static_cast<int>(rows.size());
  auto apply = [&](const Vec& v, Vec& out) {
    // out = (1/(4n)) A^T (A v) + 2 lambda v
    out.assign(d, 0.0);
    for (const auto& r : rows) {
      const double av = row_dot(r, v);
      for (std::size_t k = 0; k < r.idx.size(); ++k) out[r.idx[k]] += av * r.val[k];
    }
    const double c = 1.0 / (4.0 * n);
    for (int j = 0; j < d; ++j) out[j] = c * out[j] + 2.0 * lambda * v[j];
  };
  const double L = power_iteration(apply, d);
  double Lmax = 0.0;
  for (const auto& r : rows) {
    double nrm = 0.0;
    for (double v : r.val) {
      if (!std::isfinite(v)) throw std::invalid_argument("invalid data");
      nrm += v * v;
    }
    Lmax = std::max(Lmax, 0.25 * nrm + 2.0 * lambda);
  }
  return {L, Lmax};
}

double delta_star(const FiniteSumProblem& p) {
  if (!p.has_component_infima() || !p.f_star())
    throw std::invalid_argument("infima unavailable");
  double s = 0.0;
  for (double fi : p.component_infima()) s += *p.f_star() - fi;
  return s / p.n();
}

PlCheck check_pl(const FiniteSumProblem& p, double mu, const std::vector<Vec>& points) {
  if (!p.f_star()) throw std::invalid_argument("f* required");
  PlCheck rep;
  bool first = true;
  for (const Vec& x : points) {
    const double lhs = norm2sq(p.full_grad(x));
    const double rhs = 2.0 * mu * (p.full_value(x) - *p.f_star());
    const double margin = lhs - rhs;
    if (first || margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_point = x;
      first = false;
    }
    if (margin < -1e-12 * std::max(1.0, std::fabs(rhs))) rep.all_pass = false;
  }
  return rep;
}

double smoothness_gap(const FiniteSumProblem& p, const Vec& x) {
  if (!p.f_star()) throw std::invalid_argument("f* required");
  return 2.0 * p.L() * (p.full_value(x) - *p.f_star()) - norm2sq(p.full_grad(x));
}

// --- corpus -------------------------------------------------------------------

namespace {

ProblemPtr make_scalar_quad(std::string name, double w) {
  // f(x) = (w/2) x^2
  return std::make_shared<QuadraticSumProblem>(std::move(name), std::vector<Vec>{{w}},
                                               std::vector<Vec>{{0.0}});
}

ProblemPtr make_iso_quad(std::string name, int d, double w) {
  return std::make_shared<QuadraticSumProblem>(
      std::move(name), std::vector<Vec>{Vec(d, w)}, std::vector<Vec>{Vec(d, 0.0)});
}

ProblemPtr make_cube() {
  auto p = std::make_shared<AnalyticProblem>(
      "cube", 1, 1,
      [](int, const Vec& x) { return x[0] * x[0] * x[0]; },
      [](int, const Vec& x, Vec& g) { g = {3.0 * x[0] * x[0]}; });
  // x^3 is only locally smooth; L is the bound on the probing box.
  p->configure(/*L=*/60.0, /*L_max=*/60.0, {60.0}, std::nullopt, std::nullopt, {},
               std::nullopt, /*box=*/10.0);
  return p;
}

ProblemPtr make_quartic() {
  auto p = std::make_shared<AnalyticProblem>(
      "quartic", 1, 1,
      [](int, const Vec& x) { return std::pow(x[0], 4); },
      [](int, const Vec& x, Vec& g) { g = {4.0 * std::pow(x[0], 3)}; });
  // |f''| = 12 x^2 <= 12 on [-1, 1]
  p->configure(12.0, 12.0, {12.0}, std::nullopt, 0.0, {0.0}, Vec{0.0}, 1.0);
  return p;
}

ProblemPtr make_pm_quad(std::string name, double kappa) {
  // f_1 = kappa (x1^2 - x2^2)/2, f_2 = -f_1; f is identically zero.
  auto p = std::make_shared<AnalyticProblem>(
      std::move(name), 2, 2,
      [kappa](int i, const Vec& x) {
        const double v = 0.5 * kappa * (x[0] * x[0] - x[1] * x[1]);
        return i == 0 ? v : -v;
      },
      [kappa](int i, const Vec& x, Vec& g) {
        const double s = i == 0 ? kappa : -kappa;
        g = {s * x[0], -s * x[1]};
      });
  // Components are unbounded below: no f_i*. The average is constant zero.
  p->configure(/*L=*/0.0, /*L_max=*/kappa, {kappa, kappa}, std::nullopt, 0.0, {},
               Vec{0.0, 0.0}, 10.0);
  return p;
}

ProblemPtr make_claim1_pair() {
  // f_1 = x1^2, f_2 = x2^2; f = (x1^2 + x2^2)/2.
  auto p = std::make_shared<AnalyticProblem>(
      "claim1-pair", 2, 2,
      [](int i, const Vec& x) { return x[i] * x[i]; },
      [](int i, const Vec& x, Vec& g) {
        g = {0.0, 0.0};
        g[i] = 2.0 * x[i];
      });
  p->configure(1.0, 2.0, {2.0, 2.0}, 1.0, 0.0, {0.0, 0.0}, Vec{0.0, 0.0}, 10.0);
  return p;
}

ProblemPtr make_gs_witness() {
  // f(x) = cos(w x)/w^2 + c x + eps x^2 with w tau ~ 2 at the witness point,
  // so the smoothed gradient's attenuation of the oscillation is decisive.
  const double w = 2.0e4;
  const double c = 0.5 / w;
  const double eps = 1e-6;
  auto p = std::make_shared<AnalyticProblem>(
      "gs-witness", 1, 1,
      [=](int, const Vec& x) {
        return std::cos(w * x[0]) / (w * w) + c * x[0] + eps * x[0] * x[0];
      },
      [=](int, const Vec& x, Vec& g) {
        g = {-std::sin(w * x[0]) / w + c + 2.0 * eps * x[0]};
      });
  p->configure(/*L=*/1.0 + 2.0 * eps, 1.0 + 2.0 * eps, {1.0 + 2.0 * eps}, std::nullopt,
               std::nullopt, {}, std::nullopt, 10.0);
  return p;
}

ProblemPtr make_aniso_quad10() {
  const int d = 10;
  Vec w(d), c(d, 0.0);
  for (int j = 0; j < d; ++j) w[j] = 1.0 + 3.0 * j / (d - 1);  // spectrum [1, 4]
  return std::make_shared<QuadraticSumProblem>("aniso-quad10", std::vector<Vec>{w},
                                               std::vector<Vec>{c});
}

ProblemPtr make_sum_quad10() {
  // Four heterogeneous components with distinct minimizers; Delta* > 0.
  const int d = 10;
  std::vector<Vec> w, c;
  const double hs[4] = {0.5, 1.0, 1.5, 2.0};
  for (int i = 0; i < 4; ++i) {
    w.push_back(Vec(d, hs[i]));
    Vec ci(d);
    for (int j = 0; j < d; ++j) ci[j] = ((i + j) % 4 - 1.5) * 0.5;
    c.push_back(ci);
  }
  return std::make_shared<QuadraticSumProblem>("sum-quad10", std::move(w), std::move(c));
}

}  // namespace

ProblemPtr make_problem(const std::string& name) {
  if (name == "parabola") return make_scalar_quad("parabola", 2.0);  // f = x^2
  if (name == "quad1") return make_scalar_quad("quad1", 1.0);        // f = x^2/2
  if (name == "quad2") return make_iso_quad("quad2", 2, 1.0);
  if (name == "quad3") return make_iso_quad("quad3", 3, 1.0);
  if (name == "steep-quad1") return make_iso_quad("steep-quad1", 1, 10.0);
  if (name == "steep-quad2") return make_iso_quad("steep-quad2", 2, 10.0);
  if (name == "steep-quad3") return make_iso_quad("steep-quad3", 3, 10.0);
  if (name == "iso-quad10") return make_iso_quad("iso-quad10", 10, 1.0);
  if (name == "aniso-quad10") return make_aniso_quad10();
  if (name == "sum-quad10") return make_sum_quad10();
  if (name == "quartic") return make_quartic();
  if (name == "cube") return make_cube();
  if (name == "pm-quad") return make_pm_quad("pm-quad", 1.0);
  if (name == "pm-quad-steep") return make_pm_quad("pm-quad-steep", 20.0);
  if (name == "claim1-pair") return make_claim1_pair();
  if (name == "gs-witness") return make_gs_witness();
  throw std::invalid_argument("unknown problem: " + name);
}

std::vector<std::string> problem_registry() {
  return {"parabola",    "quad1",       "quad2",      "quad3",       "steep-quad1",
          "steep-quad2", "steep-quad3", "iso-quad10", "aniso-quad10", "sum-quad10",
          "quartic",     "cube",        "pm-quad",    "pm-quad-steep", "claim1-pair",
          "gs-witness"};
}

ProblemPtr make_logistic_from_rows(std::string name, std::vector<SparseRow> rows,
                                   std::vector<double> labels, double lambda) {
  return std::make_shared<LogisticRegressionProblem>(std::move(name), std::move(rows),
                                                     std::move(labels), lambda);
}

ProblemPtr make_synthetic_logistic(int n, int d, double lambda, std::uint64_t seed) {
  RandomnessStream rng(seed);
  std::vector<SparseRow> rows(n);
  std::vector<double> labels(n);
  Vec truth(d);
  for (int j = 0; j < d; ++j) truth[j] = rng.normal();
  for (int i = 0; i < n; ++i) {
    SparseRow& r = rows[i];
    double t = 0.0;
    for (int j = 0; j < d; ++j) {
      const double v = rng.bernoulli(0.5) ? 1.0 : -1.0;
      r.idx.push_back(j);
      r.val.push_back(v);
      t += v * truth[j];
    }
    // Labels correlate with a ground-truth direction plus noise.
    labels[i] = (t + 2.0 * rng.normal()) >= 0.0 ? 1.0 : -1.0;
  }
  return make_logistic_from_rows("synthetic-logistic", std::move(rows),
                                 std::move(labels), lambda);
}

}  // namespace bsgd
