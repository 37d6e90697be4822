#include "bsgd/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace bsgd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Candidate caps for "fails for every constant" searches: squared constants
// run over decades up to (but excluding) 1e6, plain ratios up to 1e6,
// unsquared norm factors up to 1e3.
constexpr double kSqCap = 9e5;
constexpr double kRatioCap = 1e6;
constexpr double kLinCap = 1e3;
constexpr double kConFactorCap = 1.0 - 1e-6;  // (1 - 1/delta) at delta = 1e6

struct RawMoments {
  Vec mean;
  double second = 0.0;
};

// Exact closed-form moments for vector-level compressors, when the outcome
// space is enumerable. Returns nothing when Monte Carlo is required.
std::optional<RawMoments> exact_vector_moments(const EstimatorSpec& spec, const Vec& v);

std::optional<RawMoments> moments_from_atoms(
    const std::vector<std::pair<double, Vec>>& atoms) {
  RawMoments m;
  m.mean.assign(atoms.front().second.size(), 0.0);
  for (const auto& [p, g] : atoms) {
    axpy(p, g, m.mean);
    m.second += p * norm2sq(g);
  }
  return m;
}

std::optional<RawMoments> coordinatewise_moments(
    const Vec& v, const std::function<TwoPoint(double)>& dist) {
  RawMoments m;
  m.mean.assign(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == 0.0) continue;
    const double sign = v[i] > 0.0 ? 1.0 : -1.0;
    const TwoPoint tp = dist(std::fabs(v[i]));
    const double e1 = (1.0 - tp.p_hi) * tp.lo + tp.p_hi * tp.hi;
    const double e2 = (1.0 - tp.p_hi) * tp.lo * tp.lo + tp.p_hi * tp.hi * tp.hi;
    m.mean[i] = sign * e1;
    m.second += e2;
  }
  return m;
}

void enumerate_subsets(int d, int k, std::vector<std::vector<int>>* out) {
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(cur.size()) == k) {
      out->push_back(cur);
      return;
    }
    for (int i = start; i < d; ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

std::optional<RawMoments> exact_vector_moments(const EstimatorSpec& spec, const Vec& v) {
  const int d = static_cast<int>(v.size());
  RandomnessStream unused(0);
  switch (spec.kind) {
    case EstimatorKind::TopK:
    case EstimatorKind::HardThreshold:
    case EstimatorKind::GeneralBiasedRounding:
    case EstimatorKind::BiasedDithering:
    case EstimatorKind::SignCompression:
    case EstimatorKind::ExactGradient:
    case EstimatorKind::ScaledGradient: {
      const Vec g = apply_to_vector(spec, v, unused);
      return RawMoments{g, norm2sq(g)};
    }
    case EstimatorKind::RandK:
    case EstimatorKind::BiasedRandK: {
      if (binomial(d, spec.k) > (1 << 20)) return std::nullopt;
      std::vector<std::vector<int>> subsets;
      enumerate_subsets(d, spec.k, &subsets);
      const double p = 1.0 / subsets.size();
      const double c =
          spec.kind == EstimatorKind::RandK ? static_cast<double>(d) / spec.k : 1.0;
      std::vector<std::pair<double, Vec>> atoms;
      for (const auto& s : subsets) {
        Vec g(d, 0.0);
        for (int i : s) g[i] = c * v[i];
        atoms.emplace_back(p, std::move(g));
      }
      return moments_from_atoms(atoms);
    }
    case EstimatorKind::AdaptiveRandomSparsification: {
      const double l1 = norm1(v);
      if (l1 == 0.0) return RawMoments{Vec(d, 0.0), 0.0};
      std::vector<std::pair<double, Vec>> atoms;
      for (int i = 0; i < d; ++i) {
        Vec g(d, 0.0);
        g[i] = v[i];
        atoms.emplace_back(std::fabs(v[i]) / l1, std::move(g));
      }
      return moments_from_atoms(atoms);
    }
    case EstimatorKind::GeneralUnbiasedRounding:
      return coordinatewise_moments(
          v, [&](double m) { return unbiased_rounding_coord(spec.grid, m); });
    case EstimatorKind::NaturalCompression: {
      GridSequence g{GridSequence::Kind::Power, 2.0, 1.0};
      return coordinatewise_moments(
          v, [&](double m) { return unbiased_rounding_coord(g, m); });
    }
    case EstimatorKind::ExponentialDithering:
    case EstimatorKind::NaturalDithering: {
      const double a = spec.kind == EstimatorKind::NaturalDithering ? 2.0 : spec.a;
      const double nrm = normp(v, spec.p_norm);
      if (nrm == 0.0) return RawMoments{Vec(d, 0.0), 0.0};
      return coordinatewise_moments(v, [&](double m) {
        TwoPoint tp = dithering_coord(a, spec.s_levels, m / nrm);
        tp.lo *= nrm;
        tp.hi *= nrm;
        return tp;
      });
    }
    case EstimatorKind::Composition: {
      if (spec.inner->is_deterministic()) {
        const Vec mid = apply_to_vector(*spec.inner, v, unused);
        return exact_vector_moments(*spec.outer, mid);
      }
      if (spec.outer->kind == EstimatorKind::ExactGradient ||
          spec.outer->kind == EstimatorKind::ScaledGradient) {
        auto m = exact_vector_moments(*spec.inner, v);
        if (!m) return std::nullopt;
        const double s =
            spec.outer->kind == EstimatorKind::ScaledGradient ? spec.outer->scale : 1.0;
        scale(m->mean, s);
        m->second *= s * s;
        return m;
      }
      return std::nullopt;
    }
    default:
      return std::nullopt;
  }
}

// Exact moments for the oracle-based estimators with enumerable randomness.
std::optional<RawMoments> exact_problem_moments(const EstimatorSpec& spec,
                                                const FiniteSumProblem& p, const Vec& x) {
  const int n = p.n(), d = p.dim();
  switch (spec.kind) {
    case EstimatorKind::ScaledIntegerRounding: {
      const Vec g = scaled_integer_rounding(p, x, spec.chi);
      return RawMoments{g, norm2sq(g)};
    }
    case EstimatorKind::BiasedIndependentSampling: {
      if (n > 20) return std::nullopt;
      std::vector<Vec> grads(n, Vec(d));
      for (int i = 0; i < n; ++i) p.component_grad(i, x, grads[i]);
      RawMoments m;
      m.mean.assign(d, 0.0);
      for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        double prob = 1.0;
        int cnt = 0;
        Vec g(d, 0.0);
        for (int i = 0; i < n; ++i) {
          const double pi = prob_at(spec, i, n);
          if (mask & (1u << i)) {
            prob *= pi;
            axpy(1.0, grads[i], g);
            ++cnt;
          } else {
            prob *= 1.0 - pi;
          }
        }
        if (cnt > 0) scale(g, 1.0 / cnt);
        axpy(prob, g, m.mean);
        m.second += prob * norm2sq(g);
      }
      // Independent zero-mean noise with total variance s^2.
      m.second += spec.noise_sd * spec.noise_sd;
      return m;
    }
    case EstimatorKind::DistributedBiasedRounding: {
      if (n > 20) return std::nullopt;
      std::vector<Vec> exact(n, Vec(d)), rounded(n, Vec(d));
      for (int j = 0; j < n; ++j) {
        p.component_grad(j, x, exact[j]);
        for (int jj = 0; jj < d; ++jj) {
          const double m = std::fabs(exact[j][jj]);
          rounded[j][jj] =
              m == 0.0 ? 0.0
                       : (exact[j][jj] > 0.0 ? 1.0 : -1.0) * spec.grid.nearest(m, nullptr);
        }
      }
      RawMoments m;
      m.mean.assign(d, 0.0);
      for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        double prob = 1.0;
        Vec g(d, 0.0);
        for (int j = 0; j < n; ++j) {
          const double pj = prob_at(spec, j, n);
          if (mask & (1u << j)) {
            prob *= pj;
            axpy(1.0, rounded[j], g);
          } else {
            prob *= 1.0 - pj;
            axpy(1.0, exact[j], g);
          }
        }
        scale(g, 1.0 / n);
        axpy(prob, g, m.mean);
        m.second += prob * norm2sq(g);
      }
      return m;
    }
    case EstimatorKind::AffineWitness: {
      RandomnessStream unused(0);
      const Vec g = apply_estimator(spec, p, x, unused);
      return RawMoments{g, norm2sq(g)};
    }
    case EstimatorKind::WitnessYZ: {
      // Four atoms: Y in {0,1}, Z in {-1,+1}, each probability 1/4.
      const double grad = 3.0 * x[0] * x[0];
      std::vector<std::pair<double, Vec>> atoms;
      for (double y : {0.0, 1.0})
        for (double z : {-1.0, 1.0}) atoms.emplace_back(0.25, Vec{y * grad + z});
      return moments_from_atoms(atoms);
    }
    case EstimatorKind::WitnessSampling: {
      std::vector<Vec> grads(n, Vec(d));
      for (int i = 0; i < n; ++i) p.component_grad(i, x, grads[i]);
      RawMoments m;
      m.mean.assign(d, 0.0);
      for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        double prob = 1.0;
        Vec g(d, 0.0);
        for (int i = 0; i < n; ++i) {
          if (mask & (1u << i)) {
            prob *= 1.0 / 3.0;
            axpy(9.0, grads[i], g);
          } else {
            prob *= 2.0 / 3.0;
          }
        }
        scale(g, 1.0 / n);
        axpy(prob, g, m.mean);
        m.second += prob * norm2sq(g);
      }
      return m;
    }
    default:
      return std::nullopt;
  }
}

}  // namespace

MomentEstimate estimate_moments(const EstimatorSpec& spec, const FiniteSumProblem& p,
                                const Vec& x, long budget, std::uint64_t seed) {
  spec.validate();
  const Vec grad = p.full_grad(x);
  const double gradsq = norm2sq(grad);

  std::optional<RawMoments> raw = spec.needs_problem()
                                      ? exact_problem_moments(spec, p, x)
                                      : exact_vector_moments(spec, grad);
  MomentEstimate est;
  if (raw) {
    est.exact = true;
    est.mean = std::move(raw->mean);
    est.second_moment = raw->second;
    est.dot_grad = dot(est.mean, grad);
    est.err_second = est.second_moment - 2.0 * est.dot_grad + gradsq;
    est.variance = est.second_moment - norm2sq(est.mean);
    // Guard tiny negative values from cancellation.
    est.err_second = std::max(est.err_second, 0.0);
    est.variance = std::max(est.variance, 0.0);
    return est;
  }

  if (budget < 1) throw std::invalid_argument("insufficient budget");
  est.exact = false;
  est.samples = budget;
  RandomnessStream rng(seed);
  Vec sum(p.dim(), 0.0);
  double s2 = 0, s2sq = 0, sdot = 0, sdotsq = 0, serr = 0, serrsq = 0;
  for (long i = 0; i < budget; ++i) {
    const Vec g = apply_estimator(spec, p, x, rng);
    const double nsq = norm2sq(g);
    const double dt = dot(g, grad);
    const double err = nsq - 2.0 * dt + gradsq;
    axpy(1.0, g, sum);
    s2 += nsq;
    s2sq += nsq * nsq;
    sdot += dt;
    sdotsq += dt * dt;
    serr += err;
    serrsq += err * err;
  }
  const double n = static_cast<double>(budget);
  est.mean = sum;
  scale(est.mean, 1.0 / n);
  est.second_moment = s2 / n;
  est.dot_grad = sdot / n;
  est.err_second = std::max(0.0, serr / n);
  est.variance = std::max(0.0, est.second_moment - norm2sq(est.mean));
  auto se_of = [n](double total, double totalsq, double mean) {
    (void)total;
    const double var = std::max(0.0, totalsq / n - mean * mean);
    return std::sqrt(var / n);
  };
  est.se_second = se_of(s2, s2sq, est.second_moment);
  est.se_dot = se_of(sdot, sdotsq, est.dot_grad);
  est.se_err = se_of(serr, serrsq, est.err_second);
  est.mean_tr_cov = est.variance / n;
  return est;
}

const char* status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::Holds: return "holds";
    case CheckStatus::Violated: return "violated";
    case CheckStatus::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

struct Ineq {
  std::string name;
  double margin = 0.0;  // >= 0 means the inequality holds
  double se = 0.0;
  double tol_scale = 1.0;
};

// Squared norms of Monte Carlo mean estimates carry an upward bias of
// tr(Cov)/N; subtract it so equality cases do not read as violations.
double debias(const MomentEstimate& m, double raw_sqnorm) {
  return m.exact ? raw_sqnorm : std::max(0.0, raw_sqnorm - m.mean_tr_cov);
}

double bias_sq(const MomentEstimate& m, const Vec& grad) {
  double s = 0.0;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double d = m.mean[i] - grad[i];
    s += d * d;
  }
  return debias(m, s);
}

double se_of_sqnorm(const MomentEstimate& m, double value) {
  // Delta-method bound for ||mean estimate||^2-style quantities.
  const double se_mean = std::sqrt(std::max(0.0, m.mean_tr_cov));
  return 2.0 * std::sqrt(std::max(0.0, value)) * se_mean + se_mean * se_mean;
}

std::vector<Ineq> assumption_inequalities(const AssumptionParams& params,
                                          const MomentEstimate& m, const Vec& grad,
                                          double fgap_or_nan) {
  const double g2 = norm2sq(grad);
  std::vector<Ineq> out;
  auto add = [&](std::string name, double margin, double se, double scl) {
    out.push_back({std::move(name), margin, se, std::max(1.0, scl)});
  };
  if (const auto* v = std::get_if<Sg1Params>(&params)) {
    add("E||g||^2 >= alpha ||grad||^2", m.second_moment - v->alpha * g2, m.se_second,
        m.second_moment + v->alpha * g2);
    add("E||g||^2 <= beta <Eg, grad>", v->beta * m.dot_grad - m.second_moment,
        v->beta * m.se_dot + m.se_second, m.second_moment);
  } else if (const auto* v = std::get_if<Sg2Params>(&params)) {
    add("<Eg, grad> >= tau ||grad||^2", m.dot_grad - v->tau * g2, m.se_dot,
        std::fabs(m.dot_grad) + v->tau * g2);
    add("<Eg, grad> >= E||g||^2 / beta", m.dot_grad - m.second_moment / v->beta,
        m.se_dot + m.se_second / v->beta, m.second_moment / v->beta);
  } else if (const auto* v = std::get_if<ConParams>(&params)) {
    add("E||g - grad||^2 <= (1 - 1/delta) ||grad||^2",
        (1.0 - 1.0 / v->delta) * g2 - m.err_second, m.se_err, g2 + m.err_second);
  } else if (const auto* v = std::get_if<BvdParams>(&params)) {
    const double b2 = bias_sq(m, grad);
    add("||Eg - grad||^2 <= eta ||grad||^2", v->eta * g2 - b2,
        m.exact ? 0.0 : se_of_sqnorm(m, b2), g2 + b2);
    add("Var(g) <= xi ||grad||^2", v->xi * g2 - m.variance,
        m.se_second + (m.exact ? 0.0 : se_of_sqnorm(m, norm2sq(m.mean))),
        g2 + m.variance);
  } else if (const auto* v = std::get_if<BreqParams>(&params)) {
    add("<g, grad> >= rho ||grad||^2", m.dot_grad - v->rho * g2, m.se_dot,
        std::fabs(m.dot_grad) + v->rho * g2);
    add("||g||^2 <= zeta ||grad||^2", v->zeta * g2 - m.second_moment, m.se_second,
        m.second_moment + v->zeta * g2);
  } else if (const auto* v = std::get_if<BndParams>(&params)) {
    const double meansq = debias(m, norm2sq(m.mean));
    add("Var(g) <= M ||Eg||^2 + sigma^2", v->M * meansq + v->sigma2 - m.variance,
        m.se_second + (1.0 + v->M) * (m.exact ? 0.0 : se_of_sqnorm(m, meansq)),
        m.variance + v->M * meansq + v->sigma2);
    const double b2 = bias_sq(m, grad);
    add("||Eg - grad||^2 <= m ||grad||^2 + phi^2", v->m * g2 + v->phi2 - b2,
        m.exact ? 0.0 : se_of_sqnorm(m, b2), b2 + v->m * g2 + v->phi2);
  } else if (const auto* v = std::get_if<AbsParams>(&params)) {
    add("E||g - grad||^2 <= Delta^2", v->Delta * v->Delta - m.err_second, m.se_err,
        m.err_second + v->Delta * v->Delta);
  } else if (const auto* v = std::get_if<FsmlParams>(&params)) {
    add("<grad, Eg> >= q ||grad||^2", m.dot_grad - v->q * g2, m.se_dot,
        std::fabs(m.dot_grad) + v->q * g2);
    const double meannorm = std::sqrt(debias(m, norm2sq(m.mean)));
    add("||Eg|| <= u ||grad||", v->u * std::sqrt(g2) - meannorm,
        m.exact ? 0.0 : std::sqrt(std::max(0.0, m.mean_tr_cov)),
        meannorm + v->u * std::sqrt(g2));
    add("Var(g) <= U ||grad||^2 + Q", v->U * g2 + v->Q - m.variance,
        m.se_second + (m.exact ? 0.0 : se_of_sqnorm(m, norm2sq(m.mean))),
        m.variance + v->U * g2 + v->Q);
  } else if (const auto* v = std::get_if<AbcConstants>(&params)) {
    add("<grad, Eg> >= b ||grad||^2 - c", m.dot_grad - v->b * g2 + v->c, m.se_dot,
        std::fabs(m.dot_grad) + v->b * g2 + v->c);
    double rhs;
    if (v->A > 0.0) {
      if (std::isnan(fgap_or_nan)) throw std::runtime_error("infimum required");
      rhs = 2.0 * v->A * fgap_or_nan + v->B * g2 + v->C;
    } else {
      rhs = v->B * g2 + v->C;
    }
    const double margin = rhs == kInf ? kInf : rhs - m.second_moment;
    add("E||g||^2 <= 2A(f - f*) + B||grad||^2 + C", margin, m.se_second,
        std::isfinite(rhs) ? rhs + m.second_moment : 1.0);
  }
  return out;
}

CheckStatus status_of(const Ineq& iq, bool exact) {
  const double threshold = exact ? 1e-9 * iq.tol_scale : 3.0 * iq.se;
  if (iq.margin < -threshold) return CheckStatus::Violated;
  if (!exact && iq.margin < 0.0) return CheckStatus::Inconclusive;
  return CheckStatus::Holds;
}

}  // namespace

AssumptionVerdict check_assumption(const AssumptionParams& params,
                                   const EstimatorSpec& spec,
                                   const FiniteSumProblem& p,
                                   const std::vector<Vec>& points, long budget,
                                   std::uint64_t seed) {
  validate_params(params);
  if (points.empty()) throw std::invalid_argument("points must be nonempty");
  AssumptionVerdict verdict;
  verdict.assumption = id_of(params);
  verdict.status = CheckStatus::Holds;
  verdict.worst_margin = kInf;

  if (verdict.assumption == AssumptionId::BREQ && !spec.is_deterministic()) {
    verdict.status = CheckStatus::Violated;
    verdict.worst_margin = -kInf;
    verdict.detail = "violated: BREQ is formulated for deterministic estimators only";
    verdict.exact = true;
    return verdict;
  }

  const bool needs_fgap = verdict.assumption == AssumptionId::ABC &&
                          std::get<AbcConstants>(params).A > 0.0;
  if (needs_fgap && !p.f_star()) throw std::runtime_error("infimum required");

  std::uint64_t point_seed = seed;
  for (const Vec& x : points) {
    const MomentEstimate m = estimate_moments(spec, p, x, budget, point_seed++);
    const Vec grad = p.full_grad(x);
    const double fgap = needs_fgap ? p.full_value(x) - *p.f_star()
                                   : std::numeric_limits<double>::quiet_NaN();
    verdict.exact = verdict.exact && m.exact;
    for (const Ineq& iq : assumption_inequalities(params, m, grad, fgap)) {
      const CheckStatus st = status_of(iq, m.exact);
      if (iq.margin < verdict.worst_margin) {
        verdict.worst_margin = iq.margin;
        verdict.witness = x;
        verdict.detail = iq.name;
      }
      if (st == CheckStatus::Violated) {
        verdict.status = CheckStatus::Violated;
      } else if (st == CheckStatus::Inconclusive &&
                 verdict.status == CheckStatus::Holds) {
        verdict.status = CheckStatus::Inconclusive;
      }
    }
  }
  return verdict;
}

std::vector<Vec> probe_grid(const FiniteSumProblem& p, int count, double box) {
  if (box <= 0.0) box = p.probe_box();
  static const double primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29,
                                  31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
  const int d = p.dim();
  std::vector<Vec> pts;
  pts.reserve(count);
  for (int t = 1; t <= count; ++t) {
    Vec x(d);
    for (int j = 0; j < d; ++j) {
      const double alpha = std::sqrt(primes[j % 20]) * (1 + j / 20);
      const double frac = std::fmod(static_cast<double>(t) * alpha, 1.0);
      x[j] = box * (2.0 * frac - 1.0);
    }
    pts.push_back(std::move(x));
  }
  return pts;
}

// --- coverage matrix ------------------------------------------------------------

namespace {

struct CoverageDef {
  std::string row;
  EstimatorSpec spec;
  std::vector<ProblemPtr> problems;
  std::vector<std::vector<Vec>> validation;  // per problem, for "holds" cells
  std::vector<std::vector<Vec>> search;      // per problem, for "fails" cells
  std::map<AssumptionId, AssumptionParams> canonical;
  std::map<AssumptionId, bool> expected;
  long budget = 100000;
};

std::map<AssumptionId, bool> expect(int sg1, int sg2, int con, int bvd, int breq,
                                    int bnd, int abs, int fsml, int abc) {
  return {{AssumptionId::SG1, sg1 != 0},  {AssumptionId::SG2, sg2 != 0},
          {AssumptionId::CON, con != 0},  {AssumptionId::BVD, bvd != 0},
          {AssumptionId::BREQ, breq != 0}, {AssumptionId::BND, bnd != 0},
          {AssumptionId::ABS, abs != 0},  {AssumptionId::FSML, fsml != 0},
          {AssumptionId::ABC, abc != 0}};
}

// Far points along a few directions, out to the corner of [-1000, 1000]^d.
std::vector<Vec> far_points(int d) {
  std::vector<Vec> pts;
  for (double t : {1.0, 10.0, 100.0, 1000.0}) {
    Vec diag(d, t);
    pts.push_back(diag);
    if (d >= 2) {
      Vec near_diag(d, t);
      near_diag[d - 1] = 0.999 * t;
      pts.push_back(near_diag);
      Vec axisish(d, 1e-7 * t);
      axisish[0] = t;
      pts.push_back(axisish);
      Vec skew(d, t);
      for (int j = 0; j < d; ++j) skew[j] = t * (0.55 + 0.17 * j);
      pts.push_back(skew);
    }
    Vec axis(d, 0.0);
    axis[0] = t;
    pts.push_back(axis);
  }
  return pts;
}

std::vector<Vec> join(std::vector<Vec> a, const std::vector<Vec>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

EstimatorSpec spec_of(const std::string& record) { return EstimatorSpec::parse(record); }

AssumptionParams con_p(double delta) { return ConParams{delta}; }
AssumptionParams sg1_p(double a, double b) { return Sg1Params{a, b}; }
AssumptionParams sg2_p(double t, double b) { return Sg2Params{t, b}; }
AssumptionParams bvd_p(double e, double x) { return BvdParams{e, x}; }
AssumptionParams breq_p(double r, double z) { return BreqParams{r, z}; }
AssumptionParams bnd_p(double M, double s2, double m, double f2) {
  return BndParams{M, s2, m, f2};
}
AssumptionParams abs_p(double D) { return AbsParams{D}; }
AssumptionParams fsml_p(double q, double u, double U, double Q) {
  return FsmlParams{q, u, U, Q};
}
AssumptionParams abc_p(double A, double B, double C, double b, double c) {
  return AbcConstants{A, B, C, b, c};
}

// Dominant-coordinate validation points: the leading gradient coordinate
// stays well above the dead zones of thresholding/integer-rounding rows.
std::vector<Vec> dominant_points(int d, int count) {
  std::vector<Vec> pts;
  for (int t = 1; t <= count; ++t) {
    Vec x(d);
    const double lead = 0.5 + 9.5 * std::fmod(t * std::sqrt(2.0), 1.0);
    x[0] = lead;
    for (int j = 1; j < d; ++j) {
      const double f = std::fmod(t * std::sqrt(static_cast<double>(3 + 2 * j)), 1.0);
      x[j] = (2.0 * f - 1.0) * lead;  // |x_j| <= |x_0|
    }
    pts.push_back(std::move(x));
  }
  return pts;
}

// Points with every gradient coordinate's magnitude >= 3 (steep problems).
std::vector<Vec> away_from_zero_points(int d, int count) {
  std::vector<Vec> pts;
  for (int t = 1; t <= count; ++t) {
    Vec x(d);
    for (int j = 0; j < d; ++j) {
      const double f = std::fmod(t * std::sqrt(static_cast<double>(2 + 3 * j)), 1.0);
      const double mag = 0.3 + 9.7 * f;
      x[j] = (t + j) % 2 == 0 ? mag : -mag;
    }
    pts.push_back(std::move(x));
  }
  return pts;
}

double solve_zero_gradient(const FiniteSumProblem& p, double lo, double hi) {
  // Bisection on the 1-d gradient.
  auto g = [&](double x) { return p.full_grad(Vec{x})[0]; };
  double a = lo, b = hi, ga = g(a);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a + b);
    const double gm = g(mid);
    if ((ga < 0.0) == (gm < 0.0)) {
      a = mid;
      ga = gm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

std::vector<CoverageDef> build_coverage_defs() {
  std::vector<CoverageDef> defs;

  auto quad2 = make_problem("quad2");
  auto steep1 = make_problem("steep-quad1");
  auto steep2 = make_problem("steep-quad2");
  auto steep3 = make_problem("steep-quad3");

  // top-k
  {
    CoverageDef d;
    d.row = "top-k";
    d.spec = spec_of("kind=top-k; k=1");
    d.problems = {quad2};
    d.validation = {probe_grid(*quad2)};
    d.search = {join(probe_grid(*quad2), far_points(2))};
    d.canonical = {{AssumptionId::SG1, sg1_p(0.5, 1.0)},
                   {AssumptionId::SG2, sg2_p(0.5, 1.0)},
                   {AssumptionId::CON, con_p(2.0)},
                   {AssumptionId::BVD, bvd_p(0.5, 0.0)},
                   {AssumptionId::BREQ, breq_p(0.5, 1.0)},
                   {AssumptionId::BND, bnd_p(0.0, 0.0, 0.5, 0.0)},
                   {AssumptionId::FSML, fsml_p(0.5, 1.0, 0.0, 0.0)},
                   {AssumptionId::ABC, abc_p(0, 1, 0, 0.5, 0)}};
    d.expected = expect(1, 1, 1, 1, 1, 1, 0, 1, 1);
    defs.push_back(std::move(d));
  }
  // rand-k
  {
    CoverageDef d;
    d.row = "rand-k";
    d.spec = spec_of("kind=rand-k; k=1");
    d.problems = {quad2};
    d.validation = {probe_grid(*quad2)};
    d.search = {join(probe_grid(*quad2), far_points(2))};
    d.canonical = {{AssumptionId::SG1, sg1_p(2.0, 2.0)},
                   {AssumptionId::SG2, sg2_p(1.0, 2.0)},
                   {AssumptionId::BVD, bvd_p(0.0, 1.0)},
                   {AssumptionId::BND, bnd_p(1.0, 0.0, 0.0, 0.0)},
                   {AssumptionId::FSML, fsml_p(1.0, 1.0, 1.0, 0.0)},
                   {AssumptionId::ABC, abc_p(0, 2, 0, 1, 0)}};
    d.expected = expect(1, 1, 0, 1, 0, 1, 0, 1, 1);
    defs.push_back(std::move(d));
  }
  // biased rand-k
  {
    CoverageDef d;
    d.row = "biased-rand-k";
    d.spec = spec_of("kind=biased-rand-k; k=1");
    d.problems = {quad2};
    d.validation = {probe_grid(*quad2)};
    d.search = {join(probe_grid(*quad2), far_points(2))};
    d.canonical = {{AssumptionId::SG1, sg1_p(0.5, 1.0)},
                   {AssumptionId::SG2, sg2_p(0.5, 1.0)},
                   {AssumptionId::CON, con_p(2.0)},
                   {AssumptionId::BVD, bvd_p(0.25, 0.25)},
                   {AssumptionId::BND, bnd_p(1.0, 0.0, 0.25, 0.0)},
                   {AssumptionId::FSML, fsml_p(0.5, 0.5, 0.25, 0.0)},
                   {AssumptionId::ABC, abc_p(0, 0.5, 0, 0.5, 0)}};
    d.expected = expect(1, 1, 1, 1, 0, 1, 0, 1, 1);
    defs.push_back(std::move(d));
  }
  // adaptive random sparsification
  {
    CoverageDef d;
    d.row = "adaptive-sparsification";
    d.spec = spec_of("kind=adaptive-sparsification");
    d.problems = {quad2};
    d.validation = {probe_grid(*quad2)};
    d.search = {join(probe_grid(*quad2), far_points(2))};
    d.canonical = {{AssumptionId::SG1, sg1_p(0.5, 1.0)},
                   {AssumptionId::SG2, sg2_p(0.5, 1.0)},
                   {AssumptionId::CON, con_p(2.0)},
                   {AssumptionId::BVD, bvd_p(0.5, 0.5)},
                   {AssumptionId::BND, bnd_p(6.0, 0.0, 0.5, 0.0)},
                   {AssumptionId::FSML, fsml_p(0.5, 1.0, 1.0, 0.0)},
                   {AssumptionId::ABC, abc_p(0, 1, 0, 0.5, 0)}};
    d.expected = expect(1, 1, 1, 1, 0, 1, 0, 1, 1);
    defs.push_back(std::move(d));
  }
  // general unbiased rounding (base-6 grid; the CON witness lives at
  // midpoints x with 10 x = (7/4) 6^k)
  {
    CoverageDef d;
    d.row = "unbiased-rounding";
    d.spec = spec_of("kind=unbiased-rounding; grid=pow:6");
    d.problems = {steep1};
    const double Z4 = (6.0 + 1.0 / 6.0 + 2.0) / 4.0;
    std::vector<Vec> midpoints;
    for (int k = 0; k <= 4; ++k)
      midpoints.push_back(Vec{1.75 * std::pow(6.0, k) / 10.0});
    d.validation = {probe_grid(*steep1)};
    d.search = {join(join(probe_grid(*steep1), far_points(1)), midpoints)};
    d.canonical = {{AssumptionId::SG1, sg1_p(1.0, Z4)},
                   {AssumptionId::SG2, sg2_p(1.0, Z4)},
                   {AssumptionId::BVD, bvd_p(0.0, Z4 - 1.0)},
                   {AssumptionId::BND, bnd_p(Z4 - 1.0, 0.0, 0.0, 0.0)},
                   {AssumptionId::FSML, fsml_p(1.0, 1.0, Z4 - 1.0, 0.0)},
                   {AssumptionId::ABC, abc_p(0, Z4, 0, 1, 0)}};
    d.expected = expect(1, 1, 0, 1, 0, 1, 0, 1, 1);
    defs.push_back(std::move(d));
  }
  // general biased (nearest) rounding, base-2 grid
  {
    CoverageDef d;
    d.row = "biased-rounding";
    d.spec = spec_of("kind=biased-rounding; grid=pow:2");
    d.problems = {steep1};
    const double F = 4.0 / 3.0, G = 2.0 / 3.0;
    std::vector<Vec> midpoints;
    for (int k = 5; k <= 11; ++k)
      midpoints.push_back(Vec{1.5 * std::pow(2.0, k) / 10.0});
    d.validation = {probe_grid(*steep1)};
    d.search = {join(join(probe_grid(*steep1), far_points(1)), midpoints)};
    d.canonical = {{AssumptionId::SG1, sg1_p(G * G, F)},
                   {AssumptionId::SG2, sg2_p(G, F)},
                   {AssumptionId::CON, con_p(9.0 / 8.0)},
                   {AssumptionId::BVD, bvd_p(1.0 / 9.0, 0.0)},
                   {AssumptionId::BREQ, breq_p(G, F * F)},
                   {AssumptionId::BND, bnd_p(0.0, 0.0, 1.0 / 9.0, 0.0)},
                   {AssumptionId::FSML, fsml_p(G * G / F, F, 0.0, 0.0)},
                   {AssumptionId::ABC, abc_p(0, F * F, 0, G * G / F, 0)}};
    d.expected = expect(1, 1, 1, 1, 1, 1, 0, 1, 1);
    defs.push_back(std::move(d));
  }
  // natural compression
  {
    CoverageDef d;
    d.row = "natural-compression";
    d.spec = spec_of("kind=natural-compression");
    d.problems = {steep1};
    std::vector<Vec> midpoints;
    for (int k = 5; k <= 11; ++k)
      midpoints.push_back(Vec{1.5 * std::pow(2.0, k) / 10.0});
    d.validation = {probe_grid(*steep1)};
    d.search = {join(join(probe_grid(*steep1), far_points(1)), midpoints)};
    d.canonical = {{AssumptionId::SG1, sg1_p(1.0, 9.0 / 8.0)},
                   {AssumptionId::SG2, sg2_p(1.0, 9.0 / 8.0)},
                   {AssumptionId::CON, con_p(8.0 / 7.0)},
                   {AssumptionId::BVD, bvd_p(0.0, 1.0 / 8.0)},
                   {AssumptionId::BND, bnd_p(1.0 / 8.0, 0.0, 0.0, 0.0)},
                   {AssumptionId::FSML, fsml_p(1.0, 1.0, 1.0 / 8.0, 0.0)},
                   {AssumptionId::ABC, abc_p(0, 9.0 / 8.0, 0, 1, 0)}};
    d.expected = expect(1, 1, 1, 1, 0, 1, 0, 1, 1);
    defs.push_back(std::move(d));
  }
  // general exponential dithering, a = 3, s = 4 levels
  {
    CoverageDef d;
    d.row = "exponential-dithering";
    d.spec = spec_of("kind=exponential-dithering; a=3; s=4; pnorm=2");
    d.problems = {steep2};
    const double H = dithering_constant_H(3.0, 4, 2.0, 2);
    d.validation = {probe_grid(*steep2)};
    d.search = {join(probe_grid(*steep2), far_points(2))};
    d.canonical = {{AssumptionId::SG1, sg1_p(1.0, H)},
                   {AssumptionId::SG2, sg2_p(1.0, H)},
                   {AssumptionId::CON, con_p(1.0 / (2.0 - H))},
                   {AssumptionId::BVD, bvd_p(0.0, H - 1.0)},
                   {AssumptionId::BND, bnd_p(H - 1.0, 0.0, 0.0, 0.0)},
                   {AssumptionId::FSML, fsml_p(1.0, 1.0, H - 1.0, 0.0)},
                   {AssumptionId::ABC, abc_p(0, H, 0, 1, 0)}};
    d.expected = expect(1, 1, 1, 1, 0, 1, 0, 1, 1);
    defs.push_back(std::move(d));
  }
  // natural dithering (a = 2)
  {
    CoverageDef d;
    d.row = "natural-dithering";
    d.spec = spec_of("kind=natural-dithering; s=4; pnorm=2");
    d.problems = {steep2};
    const double H = dithering_constant_H(2.0, 4, 2.0, 2);
    d.validation = {probe_grid(*steep2)};
    d.search = {join(probe_grid(*steep2), far_points(2))};
    d.canonical = {{AssumptionId::SG1, sg1_p(1.0, H)},
                   {AssumptionId::SG2, sg2_p(1.0, H)},
                   {AssumptionId::CON, con_p(1.0 / (2.0 - H))},
                   {AssumptionId::BVD, bvd_p(0.0, H - 1.0)},
                   {AssumptionId::BND, bnd_p(H - 1.0, 0.0, 0.0, 0.0)},
                   {AssumptionId::FSML, fsml_p(1.0, 1.0, H - 1.0, 0.0)},
                   {AssumptionId::ABC, abc_p(0, H, 0, 1, 0)}};
    d.expected = expect(1, 1, 1, 1, 0, 1, 0, 1, 1);
    defs.push_back(std::move(d));
  }
  // composition: exponential dithering after top-k
  {
    CoverageDef d;
    d.row = "composition";
    d.spec = spec_of(
        "kind=composition; outer={kind=exponential-dithering; a=2; s=4; pnorm=2}; "
        "inner={kind=top-k; k=2}");
    d.problems = {steep3};
    const double H = dithering_constant_H(2.0, 4, 2.0, 3);
    const double kd = 2.0 / 3.0;
    const double factor = (H - 1.0) + (1.0 - kd);  // contraction of the composition
    const double eta = factor, xi = factor;
    const double alpha = (1.0 - eta) * (1.0 - eta) / (2.0 * (1.0 + eta));
    const double beta = 2.0 / (1.0 - eta) * std::max(xi, 2.0 * xi + eta - 1.0);
    const double M = 2.0 * xi * (1.0 + eta) / ((1.0 - eta) * (1.0 - eta));
    d.validation = {probe_grid(*steep3)};
    d.search = {join(probe_grid(*steep3), far_points(3))};
    d.canonical = {{AssumptionId::SG1, sg1_p(alpha, beta)},
                   {AssumptionId::SG2, sg2_p(alpha / beta, beta)},
                   {AssumptionId::CON, con_p(1.0 / (1.0 - factor))},
                   {AssumptionId::BVD, bvd_p(eta, xi)},
                   {AssumptionId::BND, bnd_p(M, 0.0, eta, 0.0)},
                   {AssumptionId::FSML, fsml_p(alpha / beta, beta * beta, beta * beta, 0.0)},
                   {AssumptionId::ABC, abc_p(0, H * H, 0, kd / H, 0)}};
    d.expected = expect(1, 1, 1, 1, 0, 1, 0, 1, 1);
    defs.push_back(std::move(d));
  }
  // gaussian smoothing
  {
    CoverageDef d;
    d.row = "gaussian-smoothing";
    d.spec = spec_of("kind=gaussian-smoothing");
    auto witness = make_problem("gs-witness");
    d.problems = {witness, steep2};
    // Designated points on the oscillatory witness: a zero-gradient point
    // with nonzero smoothed gradient, and a point where the smoothed gradient
    // opposes the true one.
    const double w = 2.0e4;
    const double x_zero = solve_zero_gradient(*witness, 0.3 / w, 0.7 / w);
    const double x_flip = 3.14159265358979 / (2.0 * w);
    std::vector<Vec> designated = {Vec{x_zero}, Vec{x_flip}, Vec{0.0}};
    d.validation = {join(probe_grid(*witness, 24), designated),
                    probe_grid(*steep2, 24)};
    d.search = {join(probe_grid(*witness, 24), designated),
                join(probe_grid(*steep2, 24), far_points(2))};
    const double tau_max = 1.6e-3;  // 1e-4 (1 + ||x||) over the probing boxes
    const double Lmax = 10.0, dmax = 2.0;
    const double phi2 = 0.25 * tau_max * tau_max * Lmax * Lmax * std::pow(dmax + 3.0, 3);
    const double sig2 = (dmax + 4.0) * tau_max * tau_max * Lmax * Lmax *
                            std::pow(dmax + 3.0, 3) +
                        0.5 * tau_max * tau_max * Lmax * Lmax * std::pow(dmax + 6.0, 3);
    const double Cgs = 0.5 * tau_max * tau_max * Lmax * Lmax * std::pow(dmax + 6.0, 3);
    const double cgs = phi2 * 0.5;
    d.canonical = {{AssumptionId::BND, bnd_p(4.0 * (dmax + 4.0), sig2, 0.5, phi2)},
                   {AssumptionId::ABC, abc_p(0, 2.0 * (dmax + 4.0), Cgs, 0.5, cgs)}};
    d.expected = expect(0, 0, 0, 0, 0, 1, 0, 0, 1);
    d.budget = 400000;
    defs.push_back(std::move(d));
  }
  // hard threshold
  {
    CoverageDef d;
    d.row = "hard-threshold";
    d.spec = spec_of("kind=hard-threshold; w=1");
    d.problems = {steep2};
    d.validation = {dominant_points(2, 64)};
    d.search = {join(dominant_points(2, 64), far_points(2))};
    d.canonical = {{AssumptionId::SG1, sg1_p(0.25, 1.0)},
                   {AssumptionId::SG2, sg2_p(0.25, 1.0)},
                   {AssumptionId::CON, con_p(2.0)},
                   {AssumptionId::BVD, bvd_p(0.5, 0.0)},
                   {AssumptionId::BREQ, breq_p(0.25, 1.0)},
                   {AssumptionId::BND, bnd_p(0.0, 0.0, 0.0, 2.0)},
                   {AssumptionId::ABS, abs_p(std::sqrt(2.0))},
                   {AssumptionId::FSML, fsml_p(0.25, 1.0, 0.0, 0.0)},
                   {AssumptionId::ABC, abc_p(0, 1, 0, 1, 2.0)}};
    d.expected = expect(1, 1, 1, 1, 1, 1, 1, 1, 1);
    defs.push_back(std::move(d));
  }
  // scaled integer rounding
  {
    CoverageDef d;
    d.row = "scaled-integer-rounding";
    d.spec = spec_of("kind=scaled-integer-rounding; chi=1");
    d.problems = {steep2};
    std::vector<Vec> dead_zone = {Vec{0.025, 0.025}, Vec{0.04, 0.0}};
    d.validation = {away_from_zero_points(2, 64)};
    d.search = {join(join(away_from_zero_points(2, 64), far_points(2)), dead_zone)};
    d.canonical = {{AssumptionId::SG1, sg1_p(0.25, 4.5)},
                   {AssumptionId::SG2, sg2_p(0.5, 4.5)},
                   {AssumptionId::BVD, bvd_p(0.25, 0.0)},
                   {AssumptionId::BREQ, breq_p(0.0, 4.0)},
                   {AssumptionId::BND, bnd_p(0.0, 0.0, 0.0, 0.5)},
                   {AssumptionId::ABS, abs_p(std::sqrt(2.0))},
                   {AssumptionId::FSML, fsml_p(0.5, 1.5, 0.0, 0.0)},
                   {AssumptionId::ABC, abc_p(0, 2, 2, 0.5, 1.0)}};
    d.expected = expect(1, 1, 0, 1, 1, 1, 1, 1, 1);
    defs.push_back(std::move(d));
  }
  // biased dithering
  {
    CoverageDef d;
    d.row = "biased-dithering";
    d.spec = spec_of("kind=biased-dithering");
    d.problems = {steep3};
    std::vector<Vec> near_axis;
    for (double t : {1.0, 10.0, 100.0, 1000.0})
      near_axis.push_back(Vec{t, 1e-3 * t, 1e-3 * t});
    d.validation = {probe_grid(*steep3)};
    d.search = {join(join(probe_grid(*steep3), far_points(3)), near_axis)};
    d.canonical = {{AssumptionId::SG1, sg1_p(1.0, 3.0)},
                   {AssumptionId::SG2, sg2_p(1.0, 3.0)},
                   {AssumptionId::BREQ, breq_p(1.0, 3.0)},
                   {AssumptionId::FSML, fsml_p(1.0, std::sqrt(3.0), 0.0, 0.0)},
                   {AssumptionId::ABC, abc_p(0, 3, 0, 1, 0)}};
    d.expected = expect(1, 1, 0, 0, 1, 0, 0, 1, 1);
    defs.push_back(std::move(d));
  }
  // sign compression
  {
    CoverageDef d;
    d.row = "sign";
    d.spec = spec_of("kind=sign");
    d.problems = {steep2};
    std::vector<Vec> near_axis;
    for (double t : {1.0, 10.0, 100.0, 1000.0}) near_axis.push_back(Vec{t, 1e-3 * t});
    d.validation = {probe_grid(*steep2)};
    d.search = {join(join(probe_grid(*steep2), far_points(2)), near_axis)};
    d.canonical = {{AssumptionId::SG1, sg1_p(0.5, 1.0)},
                   {AssumptionId::SG2, sg2_p(0.5, 1.0)},
                   {AssumptionId::CON, con_p(2.0)},
                   {AssumptionId::BVD, bvd_p(0.5, 0.0)},
                   {AssumptionId::BREQ, breq_p(0.5, 1.0)},
                   {AssumptionId::BND, bnd_p(0.0, 0.0, 0.5, 0.0)},
                   {AssumptionId::FSML, fsml_p(0.5, 1.0, 0.0, 0.0)},
                   {AssumptionId::ABC, abc_p(0, 3, 0, 0.25, 0)}};
    d.expected = expect(1, 1, 1, 1, 1, 1, 0, 1, 1);
    defs.push_back(std::move(d));
  }
  // biased independent sampling (opposing-quadratic witness)
  {
    CoverageDef d;
    d.row = "biased-sampling";
    d.spec = spec_of("kind=biased-sampling; p=0.3333333333333333; noise-sd=707.1067811865476");
    auto pm = make_problem("pm-quad");
    d.problems = {pm};
    d.validation = {probe_grid(*pm)};
    d.search = {join(probe_grid(*pm), far_points(2))};
    d.canonical = {{AssumptionId::ABC, abc_p(3.0, 0.0, kInf, 1.0 / 3.0, 0.0)}};
    d.expected = expect(0, 0, 0, 0, 0, 0, 0, 0, 1);
    defs.push_back(std::move(d));
  }
  // distributed general biased rounding (steep opposing pair)
  {
    CoverageDef d;
    d.row = "distributed-rounding";
    d.spec = spec_of("kind=distributed-rounding; p=0.5; grid=pow:2");
    auto pm = make_problem("pm-quad-steep");
    d.problems = {pm};
    std::vector<Vec> midpoints;
    for (int k = 9; k <= 13; ++k) {
      const double m = 1.5 * std::pow(2.0, k) / 20.0;
      if (m <= 1000.0) midpoints.push_back(Vec{m, m});
    }
    d.validation = {probe_grid(*pm)};
    d.search = {join(join(probe_grid(*pm), far_points(2)), midpoints)};
    const double F = 4.0 / 3.0, G = 2.0 / 3.0;
    const double f2p1 = F * F + 1.0;
    const double A = 20.0 * 0.25 * f2p1;  // (2/n) max L_j max p(1-p) (F^2+1), n=2
    d.canonical = {{AssumptionId::ABC,
                    abc_p(A, 2.0 * 0.25 * f2p1, kInf, 0.5 * G + 0.5, 0.0)}};
    d.expected = expect(0, 0, 0, 0, 0, 0, 0, 0, 1);
    defs.push_back(std::move(d));
  }
  return defs;
}

const std::vector<CoverageDef>& coverage_defs() {
  static const std::vector<CoverageDef> defs = build_coverage_defs();
  return defs;
}

struct PointMoments {
  Vec x;
  Vec grad;
  double gradsq = 0.0;
  MomentEstimate m;
};

double exact_tol(double scale) { return 1e-9 * std::max(1.0, scale); }

// "Fails for every constant": a breach witnessed for each candidate in the
// capped family reduces, by monotonicity, to breaching the extreme candidate.
bool refute_assumption(AssumptionId id, const EstimatorSpec& spec,
                       const std::vector<PointMoments>& pts, std::string* witness) {
  auto note = [&](const PointMoments& p, const std::string& what) {
    if (!witness) return;
    std::ostringstream os;
    os.precision(6);
    os << what << " at x=(";
    for (std::size_t i = 0; i < p.x.size(); ++i) os << (i ? "," : "") << p.x[i];
    os << ")";
    *witness = os.str();
  };
  auto tol3 = [](const MomentEstimate& m, double se, double scale) {
    return m.exact ? exact_tol(scale) : 3.0 * se;
  };
  for (const auto& p : pts) {
    const auto& m = p.m;
    const double bias2 = bias_sq(m, p.grad);
    const double meansq = debias(m, norm2sq(m.mean));
    const double se_b2 = m.exact ? 0.0 : se_of_sqnorm(m, bias2);
    const double se_m2 = m.exact ? 0.0 : se_of_sqnorm(m, meansq);
    switch (id) {
      case AssumptionId::ABS:
        if (m.err_second > kSqCap + tol3(m, m.se_err, m.err_second)) {
          note(p, "E||g-grad||^2 exceeds every Delta^2 candidate");
          return true;
        }
        break;
      case AssumptionId::CON:
        if (m.err_second >
            kConFactorCap * p.gradsq + tol3(m, m.se_err, m.err_second + p.gradsq)) {
          note(p, "error exceeds (1-1/delta)||grad||^2 for every delta");
          return true;
        }
        break;
      case AssumptionId::SG1:
      case AssumptionId::SG2: {
        const double upper = kRatioCap * std::max(m.dot_grad, 0.0);
        if (m.second_moment >
            upper + tol3(m, m.se_second + kRatioCap * m.se_dot, m.second_moment)) {
          note(p, "E||g||^2 exceeds beta <Eg, grad> for every beta");
          return true;
        }
        if (p.gradsq > 0.0 &&
            m.second_moment + tol3(m, m.se_second, p.gradsq) < 1e-6 * p.gradsq) {
          note(p, "E||g||^2 below alpha ||grad||^2 for every alpha");
          return true;
        }
        break;
      }
      case AssumptionId::BVD:
        if (bias2 > p.gradsq + tol3(m, se_b2, bias2 + p.gradsq)) {
          note(p, "bias^2 exceeds eta ||grad||^2 for every eta <= 1");
          return true;
        }
        if (m.variance >
            kRatioCap * p.gradsq + tol3(m, m.se_second + se_m2, m.variance)) {
          note(p, "variance exceeds xi ||grad||^2 for every xi");
          return true;
        }
        break;
      case AssumptionId::BREQ:
        if (!spec.is_deterministic()) {
          if (witness) *witness = "stochastic estimator: BREQ is deterministic-only";
          return true;
        }
        if (m.dot_grad < -tol3(m, m.se_dot, std::fabs(m.dot_grad))) {
          note(p, "<g, grad> negative: no rho >= 0 works");
          return true;
        }
        if (m.second_moment >
            kRatioCap * p.gradsq + tol3(m, m.se_second, m.second_moment)) {
          note(p, "||g||^2 exceeds zeta ||grad||^2 for every zeta");
          return true;
        }
        break;
      case AssumptionId::BND:
        if (m.variance > kRatioCap * meansq + kSqCap +
                             tol3(m, m.se_second + kRatioCap * se_m2, m.variance)) {
          note(p, "variance exceeds M||Eg||^2 + sigma^2 for every candidate");
          return true;
        }
        if (bias2 > kConFactorCap * p.gradsq + kSqCap +
                        tol3(m, se_b2, bias2 + p.gradsq)) {
          note(p, "bias^2 exceeds m||grad||^2 + phi^2 for every candidate");
          return true;
        }
        break;
      case AssumptionId::FSML: {
        if (p.gradsq > 0.0 && m.dot_grad < -tol3(m, m.se_dot, std::fabs(m.dot_grad))) {
          note(p, "<grad, Eg> negative: no q > 0 works");
          return true;
        }
        const double se_mean = m.exact ? 0.0 : std::sqrt(std::max(0.0, m.mean_tr_cov));
        if (std::sqrt(meansq) >
            kLinCap * std::sqrt(p.gradsq) + tol3(m, se_mean, std::sqrt(meansq))) {
          note(p, "||Eg|| exceeds u ||grad|| for every u");
          return true;
        }
        if (m.variance > kRatioCap * p.gradsq + kSqCap +
                             tol3(m, m.se_second + se_m2, m.variance)) {
          note(p, "variance exceeds U||grad||^2 + Q for every candidate");
          return true;
        }
        break;
      }
      case AssumptionId::ABC:
        break;  // never refuted in the corpus
      default:
        break;
    }
  }
  return false;
}

}  // namespace

std::vector<std::string> coverage_estimators() {
  std::vector<std::string> names;
  for (const auto& d : coverage_defs()) names.push_back(d.row);
  return names;
}

CoverageRow classify(const std::string& estimator_row, long budget_override) {
  const CoverageDef* def = nullptr;
  for (const auto& d : coverage_defs())
    if (d.row == estimator_row) def = &d;
  if (!def) throw std::invalid_argument("unknown coverage row: " + estimator_row);
  const long budget = budget_override > 0 ? budget_override : def->budget;

  // Moment cache over the search sets.
  std::vector<std::vector<PointMoments>> cache(def->problems.size());
  for (std::size_t pi = 0; pi < def->problems.size(); ++pi) {
    const auto& prob = *def->problems[pi];
    std::uint64_t seed = 9000 + 31 * pi;
    for (const Vec& x : def->search[pi]) {
      PointMoments pm;
      pm.x = x;
      pm.grad = prob.full_grad(x);
      pm.gradsq = norm2sq(pm.grad);
      pm.m = estimate_moments(def->spec, prob, x, budget, seed++);
      cache[pi].push_back(std::move(pm));
    }
  }

  CoverageRow row;
  row.estimator = def->row;
  row.matches_expected = true;
  static const AssumptionId order[] = {
      AssumptionId::SG1, AssumptionId::SG2,  AssumptionId::CON,
      AssumptionId::BVD, AssumptionId::BREQ, AssumptionId::BND,
      AssumptionId::ABS, AssumptionId::FSML, AssumptionId::ABC};
  for (AssumptionId id : order) {
    CoverageCell cell;
    cell.assumption = id;
    cell.expected_holds = def->expected.at(id);
    if (cell.expected_holds) {
      const auto it = def->canonical.find(id);
      if (it == def->canonical.end())
        throw std::logic_error("missing canonical parameters for a holds cell");
      cell.got = CheckStatus::Holds;
      cell.margin = kInf;
      for (std::size_t pi = 0; pi < def->problems.size(); ++pi) {
        const auto v = check_assumption(it->second, def->spec, *def->problems[pi],
                                        def->validation[pi], budget, 4242 + pi);
        if (v.status != CheckStatus::Holds) cell.got = v.status;
        if (v.worst_margin < cell.margin) {
          cell.margin = v.worst_margin;
          cell.witness = v.detail;
        }
      }
      cell.matches = cell.got == CheckStatus::Holds;
    } else {
      std::string witness;
      bool refuted = false;
      for (std::size_t pi = 0; pi < def->problems.size() && !refuted; ++pi)
        refuted = refute_assumption(id, def->spec, cache[pi], &witness);
      cell.got = refuted ? CheckStatus::Violated : CheckStatus::Inconclusive;
      cell.matches = refuted;
      cell.witness = witness;
      cell.margin = 0.0;
    }
    if (!cell.matches) row.matches_expected = false;
    row.cells.push_back(std::move(cell));
  }
  return row;
}

std::string coverage_csv(const std::vector<CoverageRow>& rows) {
  std::ostringstream os;
  os << "estimator,assumption,status,margin,witness\n";
  os.precision(10);
  for (const auto& r : rows)
    for (const auto& c : r.cells) {
      os << r.estimator << ',' << assumption_name(c.assumption) << ','
         << (c.expected_holds ? status_name(c.got)
                              : (c.matches ? "violated" : "unresolved"))
         << ',';
      if (std::isfinite(c.margin)) os << c.margin;
      os << ",\"" << c.witness << "\"\n";
    }
  return os.str();
}

std::string coverage_table(const std::vector<CoverageRow>& rows) {
  std::ostringstream os;
  os << "estimator                 SG1 SG2 CON BVD BREQ BND ABS FSML ABC  matches\n";
  for (const auto& r : rows) {
    os << r.estimator;
    for (std::size_t i = r.estimator.size(); i < 26; ++i) os << ' ';
    for (const auto& c : r.cells) {
      const bool holds = c.expected_holds ? (c.got == CheckStatus::Holds) : !c.matches;
      os << (holds ? " ok " : " no ");
    }
    os << (r.matches_expected ? "  yes" : "  MISMATCH") << '\n';
  }
  return os.str();
}

// --- counterexample corpus ------------------------------------------------------------

namespace {

struct CaseDef {
  std::string id;
  std::string summary;
  ProblemPtr problem;
  EstimatorSpec spec;
  std::vector<std::pair<AssumptionParams, std::string>> holds;
  std::vector<AssumptionId> fails;
  std::vector<Vec> points;      // holds are validated here
  std::vector<Vec> fail_points; // fails are searched here
  // Secondary direction (e.g. "a stochastic estimator cannot be BREQ").
  std::optional<std::pair<EstimatorSpec, AssumptionId>> aux_fail;
  ProblemPtr aux_problem;
};

std::vector<Vec> range_points_1d() {
  std::vector<Vec> pts;
  for (double r : {1.0, 10.0, 100.0, 1000.0}) {
    pts.push_back(Vec{r});
    pts.push_back(Vec{-r});
    pts.push_back(Vec{r * 0.37});
    pts.push_back(Vec{-r * 0.61});
  }
  pts.push_back(Vec{0.0});
  pts.push_back(Vec{-0.25});
  pts.push_back(Vec{0.25});
  return pts;
}

std::vector<Vec> range_points_2d() {
  std::vector<Vec> pts;
  for (double r : {1.0, 10.0, 100.0, 1000.0}) {
    pts.push_back(Vec{r, r});
    pts.push_back(Vec{-r, r * 0.4});
    pts.push_back(Vec{r * 0.8, -r});
  }
  pts.push_back(Vec{0.0, 0.0});
  return pts;
}

std::vector<CaseDef> build_cases() {
  std::vector<CaseDef> cases;
  auto parabola = make_problem("parabola");
  auto quad2 = make_problem("quad2");

  {
    CaseDef c;
    c.id = "CE-CON-not-ABS";
    c.summary = "f(x)=x^2, g=(3/2) grad f: contractive with delta=4/3, "
                "no absolute bound";
    c.problem = parabola;
    c.spec = spec_of("kind=scaled-gradient; scale=1.5");
    c.holds = {{con_p(4.0 / 3.0), "delta=4/3"}, {breq_p(1.5, 2.25), "rho=3/2 zeta=9/4"}};
    c.fails = {AssumptionId::ABS};
    c.points = range_points_1d();
    c.fail_points = range_points_1d();
    cases.push_back(std::move(c));
  }
  {
    CaseDef c;
    c.id = "CE-ABS-not-CON";
    c.summary = "f(x)=x^2, g=2x+1: absolute with Delta=1, not contractive";
    c.problem = parabola;
    c.spec = spec_of("kind=affine-witness");
    c.holds = {{abs_p(1.0), "Delta=1"}};
    c.fails = {AssumptionId::CON};
    c.points = range_points_1d();
    c.fail_points = range_points_1d();
    cases.push_back(std::move(c));
  }
  {
    CaseDef c;
    c.id = "CE-BREQ-not-CON";
    c.summary = "f(x)=x^2, g=3 grad f: BREQ with rho=3, zeta=9, not contractive; "
                "stochastic contractive estimators are never BREQ";
    c.problem = parabola;
    c.spec = spec_of("kind=scaled-gradient; scale=3");
    c.holds = {{breq_p(3.0, 9.0), "rho=3 zeta=9"}};
    c.fails = {AssumptionId::CON};
    c.points = range_points_1d();
    c.fail_points = range_points_1d();
    c.aux_fail = {{spec_of("kind=biased-rand-k; k=1"), AssumptionId::BREQ}};
    c.aux_problem = quad2;
    cases.push_back(std::move(c));
  }
  {
    CaseDef c;
    c.id = "CE-BREQ-not-BND";
    c.summary = "f(x)=x^2, g=3 grad f: BREQ holds, bias defeats BND";
    c.problem = parabola;
    c.spec = spec_of("kind=scaled-gradient; scale=3");
    c.holds = {{breq_p(3.0, 9.0), "rho=3 zeta=9"}};
    c.fails = {AssumptionId::BND};
    c.points = range_points_1d();
    c.fail_points = range_points_1d();
    cases.push_back(std::move(c));
  }
  {
    CaseDef c;
    c.id = "CE-SG1-not-BND";
    c.summary = "f(x)=x^2, g = 3 x unbiased base-2 rounding: SG1 holds, "
                "bias defeats BND";
    c.problem = parabola;
    c.spec = spec_of(
        "kind=composition; outer={kind=scaled-gradient; scale=3}; "
        "inner={kind=unbiased-rounding; grid=pow:2}");
    // alpha = 9 since E||g||^2 >= ||Eg||^2 = 9 ||grad||^2; beta = 3 Z/4.
    c.holds = {{sg1_p(9.0, 27.0 / 8.0), "alpha=9 beta=27/8"}};
    c.fails = {AssumptionId::BND};
    c.points = range_points_1d();
    c.fail_points = range_points_1d();
    cases.push_back(std::move(c));
  }
  {
    CaseDef c;
    c.id = "CE-BND-not-SG1";
    c.summary = "f(x)=x^2, g=2x+1: BND with m=0, phi^2=1; scalar product "
                "goes negative so SG1 fails";
    c.problem = parabola;
    c.spec = spec_of("kind=affine-witness");
    c.holds = {{bnd_p(0.0, 0.0, 0.0, 1.0), "M=0 sigma2=0 m=0 phi2=1"}};
    c.fails = {AssumptionId::SG1};
    c.points = range_points_1d();
    c.fail_points = {Vec{-0.25}, Vec{-0.1}, Vec{0.0}};
    cases.push_back(std::move(c));
  }
  {
    CaseDef c;
    c.id = "CE-ABS-not-FSML";
    c.summary = "f(x)=x^2, g=2x+1: absolute with Delta=1, scalar product "
                "goes negative so FSML fails";
    c.problem = parabola;
    c.spec = spec_of("kind=affine-witness");
    c.holds = {{abs_p(1.0), "Delta=1"}};
    c.fails = {AssumptionId::FSML};
    c.points = range_points_1d();
    c.fail_points = {Vec{-0.25}, Vec{-0.1}};
    cases.push_back(std::move(c));
  }
  {
    CaseDef c;
    c.id = "CE-FSML-not-SG1";
    c.summary = "f(x)=x^3, g = Y grad f + Z: FSML with q=u=1/2, U=1/4, Q=1; "
                "additive noise defeats SG1";
    c.problem = make_problem("cube");
    c.spec = spec_of("kind=yz-witness");
    c.holds = {{fsml_p(0.5, 0.5, 0.25, 1.0), "q=u=1/2 U=1/4 Q=1"}};
    c.fails = {AssumptionId::SG1};
    c.points = range_points_1d();
    c.fail_points = {Vec{0.0}, Vec{0.01}};
    cases.push_back(std::move(c));
  }
  {
    CaseDef c;
    c.id = "CE-ABC-not-FSML";
    c.summary = "opposing quadratics, independent sampling with p=1/3: "
                "scalar ABC holds, variance defeats FSML";
    c.problem = make_problem("pm-quad");
    c.spec =
        spec_of("kind=biased-sampling; p=0.3333333333333333; noise-sd=707.1067811865476");
    // C = 2 A Delta* + s^2 with Delta* = +inf on this witness.
    c.holds = {{abc_p(3.0, 0.0, kInf, 1.0 / 3.0, 0.0), "A=3 B=0 C=inf b=1/3 c=0"}};
    c.fails = {AssumptionId::FSML};
    c.points = range_points_2d();
    c.fail_points = range_points_2d();
    cases.push_back(std::move(c));
  }
  {
    CaseDef c;
    c.id = "CE-ABC-not-BND";
    c.summary = "opposing quadratics, independent sampling with p=1/3: "
                "scalar ABC holds, variance defeats BND";
    c.problem = make_problem("pm-quad");
    c.spec =
        spec_of("kind=biased-sampling; p=0.3333333333333333; noise-sd=707.1067811865476");
    c.holds = {{abc_p(3.0, 0.0, kInf, 1.0 / 3.0, 0.0), "A=3 B=0 C=inf b=1/3 c=0"}};
    c.fails = {AssumptionId::BND};
    c.points = range_points_2d();
    c.fail_points = range_points_2d();
    cases.push_back(std::move(c));
  }
  {
    CaseDef c;
    c.id = "CE-Claim1";
    c.summary = "f_i = x_i^2 pair, weights 1/p^2: ABC scalar holds with b=3, c=0; "
                "BND bias inequality fails for all constants";
    c.problem = make_problem("claim1-pair");
    c.spec = spec_of("kind=claim1-witness");
    c.holds = {{abc_p(0.0, 27.0, 0.0, 3.0, 0.0), "A=0 B=27 C=0 b=3 c=0"}};
    c.fails = {AssumptionId::BND};
    c.points = range_points_2d();
    c.fail_points = range_points_2d();
    cases.push_back(std::move(c));
  }
  return cases;
}

const std::vector<CaseDef>& corpus() {
  static const std::vector<CaseDef> cases = build_cases();
  return cases;
}

}  // namespace

std::vector<std::string> counterexample_corpus() {
  std::vector<std::string> ids;
  for (const auto& c : corpus()) ids.push_back(c.id);
  return ids;
}

CounterexampleOutcome run_counterexample(const std::string& id) {
  const CaseDef* def = nullptr;
  for (const auto& c : corpus())
    if (c.id == id) def = &c;
  if (!def) throw std::invalid_argument("unknown case");

  CounterexampleOutcome out;
  out.id = id;
  out.ok = true;
  std::ostringstream os;
  os.precision(6);
  os << "case " << id << ": " << def->summary << '\n';

  for (const auto& [params, label] : def->holds) {
    const auto v =
        check_assumption(params, def->spec, *def->problem, def->points, 100000, 77);
    const bool pass = v.status == CheckStatus::Holds;
    out.ok = out.ok && pass;
    os << "  holds " << assumption_name(id_of(params)) << " (" << label
       << "): " << status_name(v.status) << ", worst margin " << v.worst_margin << '\n';
  }

  for (AssumptionId fid : def->fails) {
    std::vector<PointMoments> pts;
    std::uint64_t seed = 1234;
    for (const Vec& x : def->fail_points) {
      PointMoments pm;
      pm.x = x;
      pm.grad = def->problem->full_grad(x);
      pm.gradsq = norm2sq(pm.grad);
      pm.m = estimate_moments(def->spec, *def->problem, x, 100000, seed++);
      pts.push_back(std::move(pm));
    }
    std::string witness;
    const bool refuted = refute_assumption(fid, def->spec, pts, &witness);
    out.ok = out.ok && refuted;
    os << "  fails " << assumption_name(fid) << ": "
       << (refuted ? "witnessed for every candidate constant (" + witness + ")"
                   : "NOT witnessed")
       << '\n';
  }

  if (def->aux_fail) {
    const auto& [aux_spec, aux_id] = *def->aux_fail;
    const auto v = check_assumption(BreqParams{0.0, 1.0}, aux_spec, *def->aux_problem,
                                    {Vec(def->aux_problem->dim(), 1.0)}, 1000, 3);
    const bool pass = v.status == CheckStatus::Violated;
    out.ok = out.ok && pass;
    os << "  reverse: " << assumption_name(aux_id)
       << " on a stochastic estimator: " << status_name(v.status) << " (" << v.detail
       << ")\n";
  }

  os << (out.ok ? "  => OK" : "  => MISMATCH") << '\n';
  out.report = os.str();
  return out;
}

// --- implication consistency ------------------------------------------------------------

ImplicationCheckReport check_implication(const AssumptionParams& from, AssumptionId to,
                                         const EstimatorSpec& spec,
                                         const FiniteSumProblem& p,
                                         const std::vector<Vec>& points, long budget,
                                         std::uint64_t seed) {
  ImplicationCheckReport rep;
  const ImplicationResult map = implication_map(from, to);
  if (!map.implied) {
    rep.edge = false;
    std::ostringstream os;
    os << "no implication claimed; witnesses:";
    for (const auto& w : map.witness_cases) os << ' ' << w;
    rep.detail = os.str();
    return rep;
  }
  rep.edge = true;
  rep.mapped_record = format_params(*map.mapped);
  const auto src = check_assumption(from, spec, p, points, budget, seed);
  rep.source_holds = src.status == CheckStatus::Holds;
  const auto dst = check_assumption(*map.mapped, spec, p, points, budget, seed + 1);
  rep.target_holds = dst.status == CheckStatus::Holds;
  std::ostringstream os;
  os << "source " << status_name(src.status) << " (worst " << src.worst_margin
     << "), target " << status_name(dst.status) << " (worst " << dst.worst_margin << ")";
  rep.detail = os.str();
  return rep;
}

LemmaReport lemma_smooth_check(const FiniteSumProblem& p, const std::vector<Vec>& points) {
  LemmaReport rep;
  bool first = true;
  for (const Vec& x : points) {
    const double gap = smoothness_gap(p, x);
    if (first || gap < rep.worst_gap) {
      rep.worst_gap = gap;
      rep.worst_point = x;
      first = false;
    }
    if (gap < -1e-9) rep.all_pass = false;
  }
  return rep;
}

}  // namespace bsgd
