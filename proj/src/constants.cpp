#include "bsgd/constants.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace bsgd {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

const char* assumption_name(AssumptionId id) {
  switch (id) {
    case AssumptionId::SG1: return "sg1";
    case AssumptionId::SG2: return "sg2";
    case AssumptionId::CON: return "con";
    case AssumptionId::BVD: return "bvd";
    case AssumptionId::BREQ: return "breq";
    case AssumptionId::BND: return "bnd";
    case AssumptionId::ABS: return "abs";
    case AssumptionId::FSML: return "fsml";
    case AssumptionId::ABC: return "abc";
  }
  return "?";
}

AssumptionId assumption_from_name(const std::string& name) {
  static const std::map<std::string, AssumptionId> table = {
      {"sg1", AssumptionId::SG1},   {"sg2", AssumptionId::SG2},
      {"con", AssumptionId::CON},   {"bvd", AssumptionId::BVD},
      {"breq", AssumptionId::BREQ}, {"bnd", AssumptionId::BND},
      {"abs", AssumptionId::ABS},   {"fsml", AssumptionId::FSML},
      {"abc", AssumptionId::ABC}};
  const auto it = table.find(name);
  if (it == table.end()) throw std::invalid_argument("unknown assumption: " + name);
  return it->second;
}

AssumptionId id_of(const AssumptionParams& p) {
  struct V {
    AssumptionId operator()(const Sg1Params&) const { return AssumptionId::SG1; }
    AssumptionId operator()(const Sg2Params&) const { return AssumptionId::SG2; }
    AssumptionId operator()(const ConParams&) const { return AssumptionId::CON; }
    AssumptionId operator()(const BvdParams&) const { return AssumptionId::BVD; }
    AssumptionId operator()(const BreqParams&) const { return AssumptionId::BREQ; }
    AssumptionId operator()(const BndParams&) const { return AssumptionId::BND; }
    AssumptionId operator()(const AbsParams&) const { return AssumptionId::ABS; }
    AssumptionId operator()(const FsmlParams&) const { return AssumptionId::FSML; }
    AssumptionId operator()(const AbcConstants&) const { return AssumptionId::ABC; }
  };
  return std::visit(V{}, p);
}

void validate_params(const AssumptionParams& p) {
  const char* err = nullptr;
  if (const auto* v = std::get_if<Sg1Params>(&p)) {
    if (!(v->alpha > 0.0 && v->beta > 0.0)) err = "invalid assumption parameters";
  } else if (const auto* v = std::get_if<Sg2Params>(&p)) {
    if (!(v->tau > 0.0 && v->beta > 0.0)) err = "invalid assumption parameters";
  } else if (const auto* v = std::get_if<ConParams>(&p)) {
    if (!(v->delta >= 1.0)) err = "invalid assumption parameters";
  } else if (const auto* v = std::get_if<BvdParams>(&p)) {
    if (!(v->eta >= 0.0 && v->eta <= 1.0 && v->xi >= 0.0))
      err = "invalid assumption parameters";
  } else if (const auto* v = std::get_if<BreqParams>(&p)) {
    if (!(v->rho >= 0.0 && v->zeta >= 0.0)) err = "invalid assumption parameters";
  } else if (const auto* v = std::get_if<BndParams>(&p)) {
    if (!(v->M >= 0.0 && v->sigma2 >= 0.0 && v->m >= 0.0 && v->m < 1.0 &&
          v->phi2 >= 0.0))
      err = "invalid assumption parameters";
  } else if (const auto* v = std::get_if<AbsParams>(&p)) {
    if (!(v->Delta >= 0.0)) err = "invalid assumption parameters";
  } else if (const auto* v = std::get_if<FsmlParams>(&p)) {
    if (!(v->q > 0.0 && v->q <= v->u && v->U >= 0.0 && v->Q >= 0.0))
      err = "invalid assumption parameters";
  } else if (const auto* v = std::get_if<AbcConstants>(&p)) {
    if (!(v->A >= 0.0 && v->B >= 0.0 && v->C >= 0.0 && v->b >= 0.0 && v->c >= 0.0))
      err = "invalid assumption parameters";
  }
  if (err) throw std::invalid_argument(err);
}

std::string format_params(const AssumptionParams& p) {
  std::ostringstream os;
  os.precision(17);
  if (const auto* v = std::get_if<Sg1Params>(&p)) {
    os << "kind=sg1; alpha=" << v->alpha << "; beta=" << v->beta;
  } else if (const auto* v = std::get_if<Sg2Params>(&p)) {
    os << "kind=sg2; tau=" << v->tau << "; beta=" << v->beta;
  } else if (const auto* v = std::get_if<ConParams>(&p)) {
    os << "kind=con; delta=" << v->delta;
  } else if (const auto* v = std::get_if<BvdParams>(&p)) {
    os << "kind=bvd; eta=" << v->eta << "; xi=" << v->xi;
  } else if (const auto* v = std::get_if<BreqParams>(&p)) {
    os << "kind=breq; rho=" << v->rho << "; zeta=" << v->zeta;
  } else if (const auto* v = std::get_if<BndParams>(&p)) {
    os << "kind=bnd; M=" << v->M << "; sigma2=" << v->sigma2 << "; m=" << v->m
       << "; phi2=" << v->phi2;
  } else if (const auto* v = std::get_if<AbsParams>(&p)) {
    os << "kind=abs; delta=" << v->Delta;
  } else if (const auto* v = std::get_if<FsmlParams>(&p)) {
    os << "kind=fsml; q=" << v->q << "; u=" << v->u << "; U=" << v->U << "; Q=" << v->Q;
  } else if (const auto* v = std::get_if<AbcConstants>(&p)) {
    os << "kind=abc; A=" << v->A << "; B=" << v->B << "; C=" << v->C << "; b=" << v->b
       << "; c=" << v->c;
  }
  return os.str();
}

namespace {

std::map<std::string, double> record_fields(const std::string& record,
                                            std::string* kind_out) {
  std::map<std::string, double> out;
  std::stringstream ss(record);
  std::string field;
  while (std::getline(ss, field, ';')) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) continue;
    auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    const std::string key = strip(field.substr(0, eq));
    const std::string val = strip(field.substr(eq + 1));
    if (key == "kind")
      *kind_out = val;
    else
      out[key] = std::stod(val);
  }
  return out;
}

double field_or(const std::map<std::string, double>& f, const std::string& k,
                double dflt) {
  const auto it = f.find(k);
  return it == f.end() ? dflt : it->second;
}

}  // namespace

AssumptionParams parse_params(const std::string& record) {
  std::string kind;
  const auto f = record_fields(record, &kind);
  AssumptionParams p;
  switch (assumption_from_name(kind)) {
    case AssumptionId::SG1:
      p = Sg1Params{field_or(f, "alpha", 1.0), field_or(f, "beta", 1.0)};
      break;
    case AssumptionId::SG2:
      p = Sg2Params{field_or(f, "tau", 1.0), field_or(f, "beta", 1.0)};
      break;
    case AssumptionId::CON:
      p = ConParams{field_or(f, "delta", 1.0)};
      break;
    case AssumptionId::BVD:
      p = BvdParams{field_or(f, "eta", 0.0), field_or(f, "xi", 0.0)};
      break;
    case AssumptionId::BREQ:
      p = BreqParams{field_or(f, "rho", 0.0), field_or(f, "zeta", 1.0)};
      break;
    case AssumptionId::BND:
      p = BndParams{field_or(f, "M", 0.0), field_or(f, "sigma2", 0.0),
                    field_or(f, "m", 0.0), field_or(f, "phi2", 0.0)};
      break;
    case AssumptionId::ABS:
      p = AbsParams{field_or(f, "delta", 0.0)};
      break;
    case AssumptionId::FSML:
      p = FsmlParams{field_or(f, "q", 1.0), field_or(f, "u", 1.0),
                     field_or(f, "U", 0.0), field_or(f, "Q", 0.0)};
      break;
    case AssumptionId::ABC:
      p = AbcConstants{field_or(f, "A", 0.0), field_or(f, "B", 0.0),
                       field_or(f, "C", 0.0), field_or(f, "b", 0.0),
                       field_or(f, "c", 0.0)};
      break;
  }
  validate_params(p);
  return p;
}

// --- estimator catalogue -----------------------------------------------------------

double dithering_constant_H(double a, int s_levels, double p_norm, int d) {
  const double r = std::min(p_norm, 2.0);
  const double tail = std::pow(static_cast<double>(d), 1.0 / r) *
                      std::pow(a, 1.0 - static_cast<double>(s_levels));
  return 0.25 * (a + 1.0 / a + 2.0) + tail * std::min(1.0, tail);
}

AbcBuildResult abc_for_estimator(const EstimatorSpec& spec, const ProblemConstants& pc) {
  AbcBuildResult r;
  std::ostringstream note;
  note.precision(12);
  const double d = static_cast<double>(pc.d);
  switch (spec.kind) {
    case EstimatorKind::ExactGradient:
      r.abc = {0.0, 1.0, 0.0, 1.0, 0.0};
      break;
    case EstimatorKind::ScaledGradient: {
      const double lam = spec.scale;
      if (lam <= 0.0) throw std::invalid_argument("no closed form; use verifier");
      r.abc = {0.0, lam * lam, 0.0, lam, 0.0};
      break;
    }
    case EstimatorKind::TopK:
      r.abc = {0.0, 1.0, 0.0, spec.k / d, 0.0};
      break;
    case EstimatorKind::RandK:
      r.abc = {0.0, d / spec.k, 0.0, 1.0, 0.0};
      break;
    case EstimatorKind::BiasedRandK:
      r.abc = {0.0, spec.k / d, 0.0, spec.k / d, 0.0};
      break;
    case EstimatorKind::AdaptiveRandomSparsification:
      r.abc = {0.0, 1.0, 0.0, 1.0 / d, 0.0};
      break;
    case EstimatorKind::GeneralUnbiasedRounding: {
      const double Z = spec.grid.rounding_constant_Z();
      note << "Z=" << Z;
      r.abc = {0.0, Z / 4.0, 0.0, 1.0, 0.0};
      break;
    }
    case EstimatorKind::NaturalCompression:
      r.abc = {0.0, 9.0 / 8.0, 0.0, 1.0, 0.0};
      break;
    case EstimatorKind::GeneralBiasedRounding: {
      const double F = spec.grid.biased_rounding_F();
      const double G = spec.grid.biased_rounding_G();
      note << "F=" << F << " G=" << G;
      r.abc = {0.0, F * F, 0.0, G * G / F, 0.0};
      break;
    }
    case EstimatorKind::ExponentialDithering:
    case EstimatorKind::NaturalDithering: {
      const double a = spec.kind == EstimatorKind::NaturalDithering ? 2.0 : spec.a;
      const double H = dithering_constant_H(a, spec.s_levels, spec.p_norm, pc.d);
      note << "H_a=" << H;
      r.abc = {0.0, H, 0.0, 1.0, 0.0};
      break;
    }
    case EstimatorKind::BiasedDithering:
      r.abc = {0.0, d, 0.0, 1.0, 0.0};
      break;
    case EstimatorKind::SignCompression:
      r.abc = {0.0, 4.0 - 2.0 / d, 0.0, 1.0 / (2.0 * d), 0.0};
      break;
    case EstimatorKind::HardThreshold:
      r.abc = {0.0, 1.0, 0.0, 1.0, spec.w * spec.w * d};
      break;
    case EstimatorKind::ScaledIntegerRounding:
      r.abc = {0.0, 2.0, 2.0 * d / (spec.chi * spec.chi), 0.5,
               0.5 * d / (spec.chi * spec.chi)};
      break;
    case EstimatorKind::Composition: {
      // Only the Top-k + exponential dithering composition is catalogued.
      const bool dith_outer = spec.outer->kind == EstimatorKind::ExponentialDithering ||
                              spec.outer->kind == EstimatorKind::NaturalDithering;
      if (!(dith_outer && spec.inner->kind == EstimatorKind::TopK))
        throw std::invalid_argument("no closed form; use verifier");
      const double a =
          spec.outer->kind == EstimatorKind::NaturalDithering ? 2.0 : spec.outer->a;
      const double H = dithering_constant_H(a, spec.outer->s_levels,
                                            spec.outer->p_norm, pc.d);
      note << "H_a=" << H;
      r.abc = {0.0, H * H, 0.0, spec.inner->k / (d * H), 0.0};
      break;
    }
    case EstimatorKind::GaussianSmoothing: {
      const double tau = pc.tau > 0.0 ? pc.tau : (spec.tau > 0.0 ? spec.tau : 1e-4);
      const double L2 = pc.L * pc.L;
      note << "tau=" << tau;
      r.abc = {0.0, 2.0 * (d + 4.0), 0.5 * tau * tau * L2 * std::pow(d + 6.0, 3.0),
               0.5, 0.125 * tau * tau * L2 * std::pow(d + 3.0, 3.0)};
      break;
    }
    case EstimatorKind::BiasedIndependentSampling: {
      double pmin = 1.0;
      for (double p : spec.probs) pmin = std::min(pmin, p);
      const double A = pc.L_max / pmin;
      note << "min_p=" << pmin;
      r.abc = {A, 0.0, 2.0 * A * pc.delta_star + spec.noise_sd * spec.noise_sd, pmin,
               0.0};
      break;
    }
    case EstimatorKind::DistributedBiasedRounding: {
      const double F = spec.grid.biased_rounding_F();
      const double G = spec.grid.biased_rounding_G();
      double pmax = 0.0, qmax = 0.0, pqmax = 0.0;
      for (double p : spec.probs) {
        pmax = std::max(pmax, p);
        qmax = std::max(qmax, 1.0 - p);
        pqmax = std::max(pqmax, p * (1.0 - p));
      }
      note << "F=" << F << " G=" << G;
      const double f2p1 = F * F + 1.0;
      const double A = 2.0 * pc.L_max * pqmax * f2p1 / pc.n_components;
      r.abc = {A, 2.0 * pmax * pmax * f2p1, 2.0 * A * pc.delta_star,
               pmax * G + qmax, 0.0};
      break;
    }
    default:
      throw std::invalid_argument("no closed form; use verifier");
  }
  r.note = note.str();
  return r;
}

// --- assumption table ----------------------------------------------------------------

AbcConstants abc_from_assumption(const AssumptionParams& params) {
  validate_params(params);
  if (const auto* v = std::get_if<Sg1Params>(&params))
    return {0.0, v->beta * v->beta, 0.0, v->alpha / v->beta, 0.0};
  if (const auto* v = std::get_if<Sg2Params>(&params))
    return {0.0, v->beta * v->beta, 0.0, v->tau, 0.0};
  if (const auto* v = std::get_if<ConParams>(&params))
    return {0.0, 2.0 * (2.0 - 1.0 / v->delta), 0.0, 1.0 / (2.0 * v->delta), 0.0};
  if (const auto* v = std::get_if<BvdParams>(&params))
    return {0.0, 2.0 * (1.0 + v->xi + v->eta), 0.0, 0.5 * (1.0 - v->eta), 0.0};
  if (const auto* v = std::get_if<BreqParams>(&params))
    return {0.0, v->zeta, 0.0, v->rho, 0.0};
  if (const auto* v = std::get_if<BndParams>(&params))
    return {0.0, 2.0 * (v->M + 1.0) * (v->m + 1.0),
            2.0 * (v->M + 1.0) * v->phi2 + v->sigma2, 0.5 * (1.0 - v->m),
            0.5 * v->phi2};
  if (const auto* v = std::get_if<AbsParams>(&params))
    return {0.0, 2.0, 2.0 * v->Delta * v->Delta, 0.5, 0.5 * v->Delta * v->Delta};
  if (const auto* v = std::get_if<FsmlParams>(&params))
    return {0.0, v->U + v->u * v->u, v->Q, v->q, 0.0};
  return std::get<AbcConstants>(params);
}

// --- implication map -----------------------------------------------------------------

namespace {

ImplicationResult no_implication(std::vector<std::string> ids) {
  ImplicationResult r;
  r.implied = false;
  r.witness_cases = std::move(ids);
  r.detail = "no implication";
  return r;
}

ImplicationResult implied(AssumptionParams mapped) {
  ImplicationResult r;
  r.implied = true;
  r.mapped = std::move(mapped);
  return r;
}

}  // namespace

ImplicationResult implication_map(const AssumptionParams& from, AssumptionId to) {
  validate_params(from);
  const AssumptionId src = id_of(from);

  // Solid edges of the hierarchy diagram.
  if (src == AssumptionId::CON && to == AssumptionId::BVD) {
    const auto& v = std::get<ConParams>(from);
    const double eta = 1.0 - 1.0 / v.delta;
    return implied(BvdParams{eta, eta});
  }
  if (src == AssumptionId::BVD && to == AssumptionId::BND) {
    const auto& v = std::get<BvdParams>(from);
    const double M = v.eta < 1.0
                         ? 2.0 * v.xi * (1.0 + v.eta) / ((1.0 - v.eta) * (1.0 - v.eta))
                         : kInf;
    return implied(BndParams{M, 0.0, v.eta, 0.0});
  }
  if (src == AssumptionId::ABS && to == AssumptionId::BND) {
    const auto& v = std::get<AbsParams>(from);
    return implied(BndParams{0.0, v.Delta * v.Delta, 0.0, v.Delta * v.Delta});
  }
  if (src == AssumptionId::BVD && to == AssumptionId::SG1) {
    const auto& v = std::get<BvdParams>(from);
    if (v.eta >= 1.0) return no_implication({});
    const double alpha = (1.0 - v.eta) * (1.0 - v.eta) / (2.0 * (1.0 + v.eta));
    const double beta =
        2.0 / (1.0 - v.eta) * std::max(v.xi, 2.0 * v.xi + v.eta - 1.0);
    return implied(Sg1Params{alpha, beta});
  }
  if (src == AssumptionId::BREQ && to == AssumptionId::SG1) {
    const auto& v = std::get<BreqParams>(from);
    if (v.rho <= 0.0) return no_implication({});
    return implied(Sg1Params{v.rho * v.rho, v.zeta / v.rho});
  }
  if (src == AssumptionId::SG1 && to == AssumptionId::SG2) {
    const auto& v = std::get<Sg1Params>(from);
    return implied(Sg2Params{v.alpha / v.beta, v.beta});
  }
  if (src == AssumptionId::SG2 && to == AssumptionId::SG1) {
    const auto& v = std::get<Sg2Params>(from);
    return implied(Sg1Params{v.tau * v.tau, v.beta});
  }
  if (src == AssumptionId::SG1 && to == AssumptionId::FSML) {
    const auto& v = std::get<Sg1Params>(from);
    const double b2 = v.beta * v.beta;
    return implied(FsmlParams{v.alpha / v.beta, b2, b2, 0.0});
  }
  if (src == AssumptionId::FSML && to == AssumptionId::ABC) {
    const auto& v = std::get<FsmlParams>(from);
    return implied(AbcConstants{0.0, v.U + v.u * v.u, v.Q, v.q, 0.0});
  }
  if (src == AssumptionId::BND && to == AssumptionId::ABC) {
    const auto& v = std::get<BndParams>(from);
    return implied(AbcConstants{0.0, 2.0 * (v.M + 1.0) * (v.m + 1.0),
                                2.0 * (v.M + 1.0) * v.phi2 + v.sigma2,
                                0.5 * (1.0 - v.m), 0.5 * v.phi2});
  }

  // Dashed pairs: mutually non-implicative, witnessed by the corpus.
  auto pair_is = [&](AssumptionId a, AssumptionId b) {
    return (src == a && to == b) || (src == b && to == a);
  };
  if (pair_is(AssumptionId::CON, AssumptionId::ABS))
    return no_implication({"CE-CON-not-ABS", "CE-ABS-not-CON"});
  if (pair_is(AssumptionId::CON, AssumptionId::BREQ))
    return no_implication({"CE-BREQ-not-CON"});
  if (pair_is(AssumptionId::BREQ, AssumptionId::ABS))
    return no_implication({"CE-CON-not-ABS", "CE-ABS-not-CON"});
  if (pair_is(AssumptionId::BREQ, AssumptionId::BND))
    return no_implication({"CE-BREQ-not-BND"});
  if (pair_is(AssumptionId::SG1, AssumptionId::BND))
    return no_implication({"CE-SG1-not-BND", "CE-BND-not-SG1"});
  if (pair_is(AssumptionId::ABS, AssumptionId::FSML))
    return no_implication({"CE-ABS-not-FSML", "CE-SG1-not-BND"});
  if (pair_is(AssumptionId::ABS, AssumptionId::BVD))
    return no_implication({"CE-ABS-not-CON", "CE-CON-not-ABS"});
  if (pair_is(AssumptionId::ABS, AssumptionId::SG1) ||
      pair_is(AssumptionId::ABS, AssumptionId::SG2))
    return no_implication({"CE-BND-not-SG1", "CE-SG1-not-BND"});
  if (pair_is(AssumptionId::BVD, AssumptionId::BREQ))
    return no_implication({"CE-BREQ-not-BND"});

  throw std::invalid_argument("not in diagram");
}

// --- stepsizes ------------------------------------------------------------------------

const char* stepsize_rule_name(StepsizeRuleId id) {
  switch (id) {
    case StepsizeRuleId::NoncvxEps: return "noncvx-eps";
    case StepsizeRuleId::NoncvxNeighborhood: return "noncvx-neighborhood";
    case StepsizeRuleId::Pl: return "pl";
    case StepsizeRuleId::StronglyConvexIterate: return "strongly-convex-iterate";
  }
  return "?";
}

StepsizeRuleId stepsize_rule_from_name(const std::string& name) {
  if (name == "noncvx-eps") return StepsizeRuleId::NoncvxEps;
  if (name == "noncvx-neighborhood") return StepsizeRuleId::NoncvxNeighborhood;
  if (name == "pl") return StepsizeRuleId::Pl;
  if (name == "strongly-convex-iterate") return StepsizeRuleId::StronglyConvexIterate;
  throw std::invalid_argument("unknown stepsize rule: " + name);
}

namespace {

struct Term {
  double value;
  const char* name;
};

StepsizeResult pick_min(const std::vector<Term>& terms) {
  StepsizeResult out;
  out.gamma = kInf;
  for (const auto& t : terms) {
    // A zero numerator or zero denominator makes the term vacuous: drop it.
    if (!(t.value > 0.0) || !std::isfinite(t.value)) continue;
    if (t.value < out.gamma) {
      out.gamma = t.value;
      out.active_term = t.name;
    }
  }
  if (!std::isfinite(out.gamma)) throw std::runtime_error("no finite stepsize");
  return out;
}

double safe_div(double num, double den) {
  if (num <= 0.0 || den <= 0.0) return kInf;  // dropped by pick_min via isfinite
  return num / den;
}

}  // namespace

StepsizeResult theoretical_stepsize(StepsizeRuleId rule, const StepsizeInputs& in) {
  const auto& k = in.abc;
  if (k.b <= 0.0) throw std::runtime_error("degenerate first-moment constant");
  switch (rule) {
    case StepsizeRuleId::NoncvxEps: {
      // gamma = min{ 1/sqrt(LAT), 1/(LB), eps/(2LC) }
      std::vector<Term> terms;
      if (in.L * k.A * in.T > 0.0)
        terms.push_back({1.0 / std::sqrt(in.L * k.A * in.T), "1/sqrt(LAT)"});
      terms.push_back({safe_div(1.0, in.L * k.B), "1/(LB)"});
      terms.push_back({safe_div(in.eps, 2.0 * in.L * k.C), "eps/(2LC)"});
      return pick_min(terms);
    }
    case StepsizeRuleId::NoncvxNeighborhood: {
      // gamma = min{ 1/sqrt(LAT), b/(LB), c/(LC) }
      std::vector<Term> terms;
      if (in.L * k.A * in.T > 0.0)
        terms.push_back({1.0 / std::sqrt(in.L * k.A * in.T), "1/sqrt(LAT)"});
      terms.push_back({safe_div(k.b, in.L * k.B), "b/(LB)"});
      terms.push_back({safe_div(k.c, in.L * k.C), "c/(LC)"});
      return pick_min(terms);
    }
    case StepsizeRuleId::Pl: {
      // gamma = min{ mu b / (L(A + mu B)), 1/(2 mu b), eps mu b/(LC) }
      std::vector<Term> terms;
      terms.push_back(
          {safe_div(in.mu * k.b, in.L * (k.A + in.mu * k.B)), "mu*b/(L(A+mu*B))"});
      terms.push_back({safe_div(1.0, 2.0 * in.mu * k.b), "1/(2*mu*b)"});
      terms.push_back({safe_div(in.eps * in.mu * k.b, in.L * k.C), "eps*mu*b/(LC)"});
      return pick_min(terms);
    }
    case StepsizeRuleId::StronglyConvexIterate: {
      const double lower = k.A + in.L * (k.B + 1.0 - 2.0 * k.b);
      if (!(lower < in.mu)) throw std::runtime_error("iterate bound inapplicable");
      if (!(in.s > lower && in.s > 0.0 && in.s < in.mu))
        throw std::runtime_error("s outside the admissible interval");
      std::vector<Term> terms;
      terms.push_back(
          {safe_div(1.0 - lower / in.s, k.A + in.L * k.B), "(1-(A+L(B+1-2b))/s)/(A+LB)"});
      terms.push_back({safe_div(1.0, in.mu - in.s), "1/(mu-s)"});
      return pick_min(terms);
    }
  }
  throw std::logic_error("unreachable");
}

// --- convergence bounds ------------------------------------------------------------------

TheoremId theorem_from_name(const std::string& name) {
  if (name == "noncvx") return TheoremId::Noncvx;
  if (name == "pl") return TheoremId::Pl;
  if (name == "strongly-convex-iterate") return TheoremId::StronglyConvexIterate;
  throw std::invalid_argument("unknown theorem: " + name);
}

double convergence_bound(TheoremId thm, const AbcConstants& k, double L, double mu,
                         double delta0, double gamma, double T, double s) {
  if (!(gamma > 0.0)) throw std::runtime_error("stepsize out of range");
  switch (thm) {
    case TheoremId::Noncvx: {
      if (k.b <= 0.0) throw std::runtime_error("degenerate first-moment constant");
      if (k.B > 0.0 && gamma > k.b / (L * k.B) * (1.0 + 1e-12))
        throw std::runtime_error("stepsize out of range");
      const double growth = std::pow(1.0 + L * k.A * gamma * gamma, T);
      return 2.0 * growth * delta0 / (k.b * gamma * T) + L * k.C * gamma / k.b +
             k.c / k.b;
    }
    case TheoremId::Pl: {
      if (k.b <= 0.0) throw std::runtime_error("degenerate first-moment constant");
      const double cap1 = mu * k.b / (L * (k.A + mu * k.B));
      const double cap2 = 1.0 / (mu * k.b);
      if ((std::isfinite(cap1) && gamma > cap1 * (1.0 + 1e-12)) ||
          gamma > cap2 * (1.0 + 1e-12))
        throw std::runtime_error("stepsize out of range");
      return std::pow(1.0 - gamma * mu * k.b, T) * delta0 +
             L * k.C * gamma / (2.0 * mu * k.b) + k.c / (mu * k.b);
    }
    case TheoremId::StronglyConvexIterate: {
      const double lower = k.A + L * (k.B + 1.0 - 2.0 * k.b);
      if (!(lower < mu)) throw std::runtime_error("iterate bound inapplicable");
      if (!(s > lower && s > 0.0 && s < mu))
        throw std::runtime_error("s outside the admissible interval");
      const double cap1 = (1.0 - lower / s) / (k.A + L * k.B);
      const double cap2 = 1.0 / (mu - s);
      if ((std::isfinite(cap1) && gamma > cap1 * (1.0 + 1e-12)) ||
          gamma > cap2 * (1.0 + 1e-12))
        throw std::runtime_error("stepsize out of range");
      return std::pow(1.0 - gamma * (mu - s), T) * delta0 +
             (gamma * k.C + (k.C + 2.0 * k.c) / s) / (mu - s);
    }
  }
  throw std::logic_error("unreachable");
}

SRange feasible_s_range(const AbcConstants& k, double L, double mu) {
  SRange r;
  r.lo = k.A + L * (k.B + 1.0 - 2.0 * k.b);
  r.hi = mu;
  r.empty = !(r.lo < r.hi && r.hi > 0.0);
  return r;
}

long iteration_count(const std::string& corollary, const AbcConstants& k, double L,
                     double mu, double delta0, double eps) {
  if (!(eps > 0.0)) throw std::runtime_error("invalid tolerance");
  double t = 0.0;
  if (corollary == "noncvx-eps") {
    const double lead = 12.0 * delta0 * L / (eps * eps);
    t = lead * std::max({k.B, 12.0 * delta0 * k.A / (eps * eps),
                         2.0 * k.C / (eps * eps)});
  } else if (corollary == "noncvx-neighborhood") {
    if (!(k.c > 0.0)) throw std::runtime_error("invalid tolerance");
    const double lead = 6.0 * delta0 * L / k.c;
    t = lead * std::max({k.B / k.b, 6.0 * delta0 * k.A / k.c, k.C / k.c});
  } else if (corollary == "pl") {
    const double logf = std::log(2.0 * delta0 / eps);
    t = std::max({2.0, L * (k.A + mu * k.B) / (mu * mu * k.b * k.b),
                  L * k.C / (eps * mu * mu * k.b * k.b)}) *
        std::max(0.0, logf);
  } else if (corollary == "strongly-convex") {
    const double logf = std::log(2.0 * delta0 / eps);
    t = std::max({2.0, L * k.B / (k.b * k.b * mu),
                  L * k.C / (eps * k.b * k.b * mu * mu)}) *
        std::max(0.0, logf);
  } else {
    throw std::invalid_argument("unknown corollary: " + corollary);
  }
  if (!std::isfinite(t)) throw std::runtime_error("invalid tolerance");
  return std::max(1L, static_cast<long>(std::ceil(t)));
}

}  // namespace bsgd
