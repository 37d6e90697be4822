#include "bsgd/estimators.hpp"

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace bsgd {

// --- GridSequence --------------------------------------------------------------

double GridSequence::at(long k) const {
  if (kind == Kind::Power) return std::pow(base, static_cast<double>(k));
  return step * static_cast<double>(k);
}

void GridSequence::bracket(double m, double* lo, double* hi, bool* overflow) const {
  if (overflow) *overflow = false;
  if (kind == Kind::Linear) {
    const double q = std::floor(m / step);
    *lo = q * step;
    *hi = (*lo >= m) ? *lo : (q + 1.0) * step;
    if (*lo > m) *lo = (q - 1.0) * step;  // fp guard
    if (*lo < 0.0) *lo = 0.0;
    return;
  }
  long k = static_cast<long>(std::floor(std::log(m) / std::log(base)));
  // fp guard near grid points
  while (k > kMinExp && at(k) > m) --k;
  while (k < kMaxExp - 1 && at(k + 1) < m) ++k;
  if (m > at(kMaxExp)) {
    if (overflow) *overflow = true;
    *lo = *hi = at(kMaxExp);
    return;
  }
  if (m < at(kMinExp)) {
    if (overflow) *overflow = true;
    *lo = *hi = at(kMinExp);
    return;
  }
  k = std::clamp(k, kMinExp, kMaxExp - 1);
  *lo = at(k);
  *hi = at(k + 1);
}

double GridSequence::nearest(double m, bool* overflow) const {
  double lo, hi;
  bool ovf = false;
  bracket(m, &lo, &hi, &ovf);
  if (overflow) *overflow = ovf;
  if (lo == hi) return lo;
  const double dlo = m - lo, dhi = hi - m;
  if (dlo == dhi) return lo;  // equidistant ties break toward the lower point
  return dlo < dhi ? lo : hi;
}

std::string GridSequence::format() const {
  std::ostringstream os;
  os.precision(17);
  if (kind == Kind::Power)
    os << "pow:" << base;
  else
    os << "linear:" << step;
  return os.str();
}

GridSequence GridSequence::parse(const std::string& text) {
  GridSequence g;
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const double v = colon == std::string::npos ? 2.0 : std::stod(text.substr(colon + 1));
  if (head == "pow") {
    if (v <= 1.0) throw std::invalid_argument("power grid base must be > 1");
    g.kind = Kind::Power;
    g.base = v;
  } else if (head == "linear") {
    if (v <= 0.0) throw std::invalid_argument("linear grid step must be > 0");
    g.kind = Kind::Linear;
    g.step = v;
  } else {
    throw std::invalid_argument("unknown grid spec: " + text);
  }
  return g;
}

double GridSequence::rounding_constant_Z() const {
  if (kind == Kind::Linear) return std::numeric_limits<double>::infinity();
  return base + 1.0 / base + 2.0;
}

double GridSequence::biased_rounding_F() const {
  if (kind == Kind::Linear) return 2.0;  // attained at k = 0
  return 2.0 * base / (1.0 + base);
}

double GridSequence::biased_rounding_G() const {
  if (kind == Kind::Linear) return 0.0;  // attained at k = 0
  return 2.0 / (1.0 + base);
}

// --- EstimatorSpec ----------------------------------------------------------------

const char* kind_name(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::TopK: return "top-k";
    case EstimatorKind::RandK: return "rand-k";
    case EstimatorKind::BiasedRandK: return "biased-rand-k";
    case EstimatorKind::AdaptiveRandomSparsification: return "adaptive-sparsification";
    case EstimatorKind::HardThreshold: return "hard-threshold";
    case EstimatorKind::GeneralUnbiasedRounding: return "unbiased-rounding";
    case EstimatorKind::GeneralBiasedRounding: return "biased-rounding";
    case EstimatorKind::NaturalCompression: return "natural-compression";
    case EstimatorKind::ScaledIntegerRounding: return "scaled-integer-rounding";
    case EstimatorKind::ExponentialDithering: return "exponential-dithering";
    case EstimatorKind::NaturalDithering: return "natural-dithering";
    case EstimatorKind::BiasedDithering: return "biased-dithering";
    case EstimatorKind::SignCompression: return "sign";
    case EstimatorKind::Composition: return "composition";
    case EstimatorKind::BiasedIndependentSampling: return "biased-sampling";
    case EstimatorKind::GaussianSmoothing: return "gaussian-smoothing";
    case EstimatorKind::DistributedBiasedRounding: return "distributed-rounding";
    case EstimatorKind::ExactGradient: return "exact";
    case EstimatorKind::ScaledGradient: return "scaled-gradient";
    case EstimatorKind::AffineWitness: return "affine-witness";
    case EstimatorKind::WitnessYZ: return "yz-witness";
    case EstimatorKind::WitnessSampling: return "claim1-witness";
  }
  return "?";
}

namespace {

EstimatorKind kind_from_name(const std::string& s) {
  static const std::map<std::string, EstimatorKind> table = {
      {"top-k", EstimatorKind::TopK},
      {"topk", EstimatorKind::TopK},
      {"rand-k", EstimatorKind::RandK},
      {"randk", EstimatorKind::RandK},
      {"biased-rand-k", EstimatorKind::BiasedRandK},
      {"adaptive-sparsification", EstimatorKind::AdaptiveRandomSparsification},
      {"hard-threshold", EstimatorKind::HardThreshold},
      {"unbiased-rounding", EstimatorKind::GeneralUnbiasedRounding},
      {"biased-rounding", EstimatorKind::GeneralBiasedRounding},
      {"natural-compression", EstimatorKind::NaturalCompression},
      {"scaled-integer-rounding", EstimatorKind::ScaledIntegerRounding},
      {"exponential-dithering", EstimatorKind::ExponentialDithering},
      {"natural-dithering", EstimatorKind::NaturalDithering},
      {"biased-dithering", EstimatorKind::BiasedDithering},
      {"sign", EstimatorKind::SignCompression},
      {"composition", EstimatorKind::Composition},
      {"biased-sampling", EstimatorKind::BiasedIndependentSampling},
      {"gaussian-smoothing", EstimatorKind::GaussianSmoothing},
      {"distributed-rounding", EstimatorKind::DistributedBiasedRounding},
      {"exact", EstimatorKind::ExactGradient},
      {"scaled-gradient", EstimatorKind::ScaledGradient},
      {"affine-witness", EstimatorKind::AffineWitness},
      {"yz-witness", EstimatorKind::WitnessYZ},
      {"claim1-witness", EstimatorKind::WitnessSampling},
  };
  const auto it = table.find(s);
  if (it == table.end()) throw std::invalid_argument("unknown estimator kind: " + s);
  return it->second;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Splits `kind=a; key=v; inner={...}` at top level, respecting braces.
std::vector<std::pair<std::string, std::string>> split_record(const std::string& rec) {
  std::vector<std::pair<std::string, std::string>> out;
  int depth = 0;
  std::string field;
  auto flush = [&] {
    const std::string f = trim(field);
    field.clear();
    if (f.empty()) return;
    const auto eq = f.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("bad estimator record field: " + f);
    std::string val = trim(f.substr(eq + 1));
    if (val.size() >= 2 && val.front() == '{' && val.back() == '}')
      val = val.substr(1, val.size() - 2);
    out.emplace_back(trim(f.substr(0, eq)), val);
  };
  for (char c : rec) {
    if (c == '{') ++depth;
    if (c == '}') --depth;
    if (c == ';' && depth == 0) {
      flush();
      continue;
    }
    field.push_back(c);
  }
  flush();
  return out;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

}  // namespace

void EstimatorSpec::validate() const {
  switch (kind) {
    case EstimatorKind::TopK:
    case EstimatorKind::RandK:
    case EstimatorKind::BiasedRandK:
      if (k < 1) throw std::invalid_argument("invalid k");
      break;
    case EstimatorKind::HardThreshold:
      if (w < 0.0) throw std::invalid_argument("threshold w must be >= 0");
      break;
    case EstimatorKind::ScaledIntegerRounding:
      if (chi <= 0.0) throw std::invalid_argument("chi must be > 0");
      break;
    case EstimatorKind::ExponentialDithering:
    case EstimatorKind::NaturalDithering:
      if (a <= 1.0) throw std::invalid_argument("dithering base must be > 1");
      if (s_levels < 1) throw std::invalid_argument("dithering needs s >= 1 levels");
      if (p_norm < 1.0) throw std::invalid_argument("invalid p-norm");
      break;
    case EstimatorKind::BiasedIndependentSampling:
      if (probs.empty()) throw std::invalid_argument("sampling needs probabilities");
      for (double p : probs)
        if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("need 0 < p_i <= 1");
      if (noise_sd < 0.0) throw std::invalid_argument("noise sd must be >= 0");
      break;
    case EstimatorKind::DistributedBiasedRounding:
      if (probs.empty()) throw std::invalid_argument("rounding needs probabilities");
      for (double p : probs)
        if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("need 0 < p_j < 1");
      break;
    case EstimatorKind::GaussianSmoothing:
      if (tau < 0.0) throw std::invalid_argument("tau must be > 0");
      break;
    case EstimatorKind::Composition:
      if (!inner || !outer) throw std::invalid_argument("composition needs inner and outer");
      inner->validate();
      outer->validate();
      break;
    default:
      break;
  }
}

bool EstimatorSpec::is_deterministic() const {
  switch (kind) {
    case EstimatorKind::TopK:
    case EstimatorKind::HardThreshold:
    case EstimatorKind::GeneralBiasedRounding:
    case EstimatorKind::ScaledIntegerRounding:
    case EstimatorKind::BiasedDithering:
    case EstimatorKind::SignCompression:
    case EstimatorKind::ExactGradient:
    case EstimatorKind::ScaledGradient:
    case EstimatorKind::AffineWitness:
      return true;
    case EstimatorKind::Composition:
      return inner->is_deterministic() && outer->is_deterministic();
    default:
      return false;
  }
}

bool EstimatorSpec::needs_problem() const {
  switch (kind) {
    case EstimatorKind::ScaledIntegerRounding:
    case EstimatorKind::BiasedIndependentSampling:
    case EstimatorKind::GaussianSmoothing:
    case EstimatorKind::DistributedBiasedRounding:
    case EstimatorKind::AffineWitness:
    case EstimatorKind::WitnessYZ:
    case EstimatorKind::WitnessSampling:
      return true;
    default:
      return false;
  }
}

std::string EstimatorSpec::format() const {
  std::ostringstream os;
  os.precision(17);
  os << "kind=" << kind_name(kind);
  switch (kind) {
    case EstimatorKind::TopK:
    case EstimatorKind::RandK:
    case EstimatorKind::BiasedRandK:
      os << "; k=" << k;
      break;
    case EstimatorKind::HardThreshold:
      os << "; w=" << w;
      break;
    case EstimatorKind::ScaledIntegerRounding:
      os << "; chi=" << chi;
      break;
    case EstimatorKind::GeneralUnbiasedRounding:
    case EstimatorKind::GeneralBiasedRounding:
      os << "; grid=" << grid.format();
      break;
    case EstimatorKind::ExponentialDithering:
      os << "; a=" << a << "; s=" << s_levels << "; pnorm=" << p_norm;
      break;
    case EstimatorKind::NaturalDithering:
      os << "; s=" << s_levels << "; pnorm=" << p_norm;
      break;
    case EstimatorKind::BiasedIndependentSampling: {
      os << "; p=";
      for (std::size_t i = 0; i < probs.size(); ++i) os << (i ? "," : "") << probs[i];
      if (noise_sd != 0.0) os << "; noise-sd=" << noise_sd;
      break;
    }
    case EstimatorKind::DistributedBiasedRounding: {
      os << "; p=";
      for (std::size_t i = 0; i < probs.size(); ++i) os << (i ? "," : "") << probs[i];
      os << "; grid=" << grid.format();
      break;
    }
    case EstimatorKind::GaussianSmoothing:
      if (tau != 0.0) os << "; tau=" << tau;
      break;
    case EstimatorKind::ScaledGradient:
      os << "; scale=" << scale;
      break;
    case EstimatorKind::Composition:
      os << "; outer={" << outer->format() << "}; inner={" << inner->format() << "}";
      break;
    default:
      break;
  }
  return os.str();
}

EstimatorSpec EstimatorSpec::parse(const std::string& record) {
  EstimatorSpec spec;
  bool have_kind = false;
  for (const auto& [key, val] : split_record(record)) {
    if (key == "kind") {
      spec.kind = kind_from_name(val);
      have_kind = true;
      if (spec.kind == EstimatorKind::NaturalCompression) {
        spec.grid = GridSequence{GridSequence::Kind::Power, 2.0, 1.0};
      } else if (spec.kind == EstimatorKind::NaturalDithering) {
        spec.a = 2.0;
      }
    } else if (key == "k") {
      spec.k = std::stoi(val);
    } else if (key == "w") {
      spec.w = std::stod(val);
    } else if (key == "chi") {
      spec.chi = std::stod(val);
    } else if (key == "a") {
      spec.a = std::stod(val);
    } else if (key == "s") {
      spec.s_levels = std::stoi(val);
    } else if (key == "pnorm") {
      spec.p_norm = std::stod(val);
    } else if (key == "tau") {
      spec.tau = std::stod(val);
    } else if (key == "noise-sd") {
      spec.noise_sd = std::stod(val);
    } else if (key == "scale") {
      spec.scale = std::stod(val);
    } else if (key == "p") {
      spec.probs = parse_list(val);
    } else if (key == "grid") {
      spec.grid = GridSequence::parse(val);
    } else if (key == "inner") {
      spec.inner = std::make_shared<EstimatorSpec>(EstimatorSpec::parse(val));
    } else if (key == "outer") {
      spec.outer = std::make_shared<EstimatorSpec>(EstimatorSpec::parse(val));
    } else {
      throw std::invalid_argument("unknown estimator field: " + key);
    }
  }
  if (!have_kind) throw std::invalid_argument("estimator record needs kind=...");
  spec.validate();
  return spec;
}

double prob_at(const EstimatorSpec& spec, int i, int n) {
  if (spec.probs.size() == 1) return spec.probs[0];
  if (static_cast<int>(spec.probs.size()) != n)
    throw std::invalid_argument("probability list does not match component count");
  return spec.probs[i];
}

// --- vector-level compressors -----------------------------------------------------

Vec top_k(const Vec& v, int k) {
  const int d = static_cast<int>(v.size());
  if (k < 1 || k > d) throw std::invalid_argument("invalid k");
  std::vector<int> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  // Equal magnitudes break toward the lowest coordinate index.
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](int a, int b) {
    const double ma = std::fabs(v[a]), mb = std::fabs(v[b]);
    return ma != mb ? ma > mb : a < b;
  });
  Vec out(d, 0.0);
  for (int i = 0; i < k; ++i) out[idx[i]] = v[idx[i]];
  return out;
}

Vec rand_k(const Vec& v, int k, RandomnessStream& rng) {
  const int d = static_cast<int>(v.size());
  if (k < 1 || k > d) throw std::invalid_argument("invalid k");
  Vec out(d, 0.0);
  const double c = static_cast<double>(d) / k;
  for (int i : rng.subset(d, k)) out[i] = c * v[i];
  return out;
}

Vec biased_rand_k(const Vec& v, int k, RandomnessStream& rng) {
  const int d = static_cast<int>(v.size());
  if (k < 1 || k > d) throw std::invalid_argument("invalid k");
  Vec out(d, 0.0);
  for (int i : rng.subset(d, k)) out[i] = v[i];
  return out;
}

Vec adaptive_random_sparsification(const Vec& v, RandomnessStream& rng) {
  const int d = static_cast<int>(v.size());
  Vec out(d, 0.0);
  const double l1 = norm1(v);
  if (l1 == 0.0) return out;  // degenerate zero input
  const double u = rng.uniform01() * l1;
  double acc = 0.0;
  for (int i = 0; i < d; ++i) {
    acc += std::fabs(v[i]);
    if (u < acc || i == d - 1) {
      out[i] = v[i];
      break;
    }
  }
  return out;
}

Vec hard_threshold(const Vec& v, double w) {
  if (w < 0.0) throw std::invalid_argument("threshold w must be >= 0");
  Vec out(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i)
    if (std::fabs(v[i]) >= w) out[i] = v[i];
  return out;
}

TwoPoint unbiased_rounding_coord(const GridSequence& grid, double m, bool* overflow) {
  TwoPoint tp;
  grid.bracket(m, &tp.lo, &tp.hi, overflow);
  tp.p_hi = tp.hi > tp.lo ? (m - tp.lo) / (tp.hi - tp.lo) : 0.0;
  return tp;
}

Vec round_to_grid(const Vec& v, const GridSequence& grid, RoundingMode mode,
                  RandomnessStream& rng, ApplyReport* rep) {
  Vec out(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == 0.0) continue;
    const double m = std::fabs(v[i]);
    const double sign = v[i] > 0.0 ? 1.0 : -1.0;
    bool ovf = false;
    if (mode == RoundingMode::BiasedNearest) {
      out[i] = sign * grid.nearest(m, &ovf);
    } else {
      const TwoPoint tp = unbiased_rounding_coord(grid, m, &ovf);
      double val = tp.lo;
      if (tp.hi > tp.lo && tp.p_hi > 0.0) {
        if (tp.p_hi >= 1.0 || rng.uniform01() < tp.p_hi) val = tp.hi;
      }
      out[i] = sign * val;
    }
    if (ovf && rep) ++rep->grid_overflow;
  }
  return out;
}

TwoPoint dithering_coord(double a, int s_levels, double t) {
  TwoPoint tp;
  const double bottom = std::pow(a, 1.0 - s_levels);  // lowest positive level
  if (t >= 1.0) {
    tp.lo = tp.hi = 1.0;
    tp.p_hi = 0.0;
    return tp;
  }
  if (t <= bottom) {
    tp.lo = 0.0;
    tp.hi = bottom;
    tp.p_hi = t / bottom;
    return tp;
  }
  long u = static_cast<long>(std::floor(-std::log(t) / std::log(a)));
  u = std::clamp(u, 0L, static_cast<long>(s_levels) - 2);
  while (u > 0 && std::pow(a, -static_cast<double>(u)) < t) --u;
  while (u < s_levels - 2 && std::pow(a, -static_cast<double>(u + 1)) > t) ++u;
  tp.hi = std::pow(a, -static_cast<double>(u));
  tp.lo = std::pow(a, -static_cast<double>(u + 1));
  tp.p_hi = (t - tp.lo) / (tp.hi - tp.lo);
  return tp;
}

Vec exponential_dithering(const Vec& v, double a, int s_levels, double p_norm,
                          RandomnessStream& rng) {
  Vec out(v.size(), 0.0);
  const double nrm = normp(v, p_norm);
  if (nrm == 0.0) return out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == 0.0) continue;
    const double sign = v[i] > 0.0 ? 1.0 : -1.0;
    const TwoPoint tp = dithering_coord(a, s_levels, std::fabs(v[i]) / nrm);
    double level = tp.lo;
    if (tp.hi > tp.lo && tp.p_hi > 0.0) {
      if (tp.p_hi >= 1.0 || rng.uniform01() < tp.p_hi) level = tp.hi;
    }
    out[i] = sign * nrm * level;
  }
  return out;
}

Vec sign_compression(const Vec& v) {
  Vec out(v.size(), 0.0);
  const double c = norm1(v) / static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = c * signum(v[i]);
  return out;
}

Vec biased_dithering(const Vec& v) {
  Vec out(v.size(), 0.0);
  const double c = norm2(v);
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = c * signum(v[i]);
  return out;
}

// --- oracle-based estimators --------------------------------------------------------

Vec scaled_integer_rounding(const FiniteSumProblem& p, const Vec& x, double chi) {
  if (chi <= 0.0) throw std::invalid_argument("chi must be > 0");
  Vec out(p.dim(), 0.0);
  Vec g(p.dim());
  for (int i = 0; i < p.n(); ++i) {
    p.component_grad(i, x, g);
    for (int j = 0; j < p.dim(); ++j)
      out[j] += std::nearbyint(chi * g[j]) / chi;  // ties to even
  }
  scale(out, 1.0 / p.n());
  return out;
}

Vec biased_independent_sampling(const FiniteSumProblem& p, const Vec& x,
                                const EstimatorSpec& spec, RandomnessStream& rng) {
  const int n = p.n(), d = p.dim();
  std::vector<int> included;
  for (int i = 0; i < n; ++i)
    if (rng.bernoulli(prob_at(spec, i, n))) included.push_back(i);
  Vec out(d, 0.0);
  if (!included.empty()) {
    Vec g(d);
    for (int i : included) {
      p.component_grad(i, x, g);
      axpy(1.0, g, out);
    }
    scale(out, 1.0 / included.size());
  }
  if (spec.noise_sd > 0.0) {
    // Isotropic noise with total variance s^2: per-coordinate s^2/d.
    const double sd = spec.noise_sd / std::sqrt(static_cast<double>(d));
    for (int j = 0; j < d; ++j) out[j] += sd * rng.normal();
  }
  return out;
}

Vec gaussian_smoothing(const FiniteSumProblem& p, const Vec& x, double tau,
                       RandomnessStream& rng) {
  const int d = p.dim();
  if (tau <= 0.0) tau = 1e-4 * (1.0 + norm2(x));
  Vec z(d), xz(d);
  for (int j = 0; j < d; ++j) {
    z[j] = rng.normal();
    xz[j] = x[j] + tau * z[j];
  }
  const double f0 = p.full_value(x);
  const double f1 = p.full_value(xz);
  if (!std::isfinite(f0) || !std::isfinite(f1))
    throw std::runtime_error("oracle failure");
  Vec out(d);
  const double c = (f1 - f0) / tau;
  for (int j = 0; j < d; ++j) out[j] = c * z[j];
  return out;
}

Vec distributed_biased_rounding(const FiniteSumProblem& p, const Vec& x,
                                const EstimatorSpec& spec, RandomnessStream& rng,
                                ApplyReport* rep) {
  const int n = p.n(), d = p.dim();
  Vec out(d, 0.0);
  Vec g(d);
  for (int j = 0; j < n; ++j) {
    p.component_grad(j, x, g);
    if (rng.bernoulli(prob_at(spec, j, n))) {
      for (int jj = 0; jj < d; ++jj) {
        if (g[jj] == 0.0) continue;
        bool ovf = false;
        const double r = spec.grid.nearest(std::fabs(g[jj]), &ovf);
        out[jj] += (g[jj] > 0.0 ? r : -r);
        if (ovf && rep) ++rep->grid_overflow;
      }
    } else {
      axpy(1.0, g, out);
    }
  }
  scale(out, 1.0 / n);
  return out;
}

// --- witnesses -------------------------------------------------------------------

namespace {

void require_witness(const FiniteSumProblem& p, const char* problem_name) {
  if (p.name() != problem_name) throw std::invalid_argument("witness mismatch");
}

}  // namespace

// --- entry points -------------------------------------------------------------------

Vec apply_to_vector(const EstimatorSpec& spec, const Vec& v, RandomnessStream& rng,
                    ApplyReport* rep) {
  switch (spec.kind) {
    case EstimatorKind::TopK: return top_k(v, spec.k);
    case EstimatorKind::RandK: return rand_k(v, spec.k, rng);
    case EstimatorKind::BiasedRandK: return biased_rand_k(v, spec.k, rng);
    case EstimatorKind::AdaptiveRandomSparsification:
      return adaptive_random_sparsification(v, rng);
    case EstimatorKind::HardThreshold: return hard_threshold(v, spec.w);
    case EstimatorKind::GeneralUnbiasedRounding:
      return round_to_grid(v, spec.grid, RoundingMode::Unbiased, rng, rep);
    case EstimatorKind::GeneralBiasedRounding:
      return round_to_grid(v, spec.grid, RoundingMode::BiasedNearest, rng, rep);
    case EstimatorKind::NaturalCompression: {
      GridSequence g{GridSequence::Kind::Power, 2.0, 1.0};
      return round_to_grid(v, g, RoundingMode::Unbiased, rng, rep);
    }
    case EstimatorKind::ExponentialDithering:
      return exponential_dithering(v, spec.a, spec.s_levels, spec.p_norm, rng);
    case EstimatorKind::NaturalDithering:
      return exponential_dithering(v, 2.0, spec.s_levels, spec.p_norm, rng);
    case EstimatorKind::BiasedDithering: return biased_dithering(v);
    case EstimatorKind::SignCompression: return sign_compression(v);
    case EstimatorKind::Composition: {
      const Vec mid = apply_to_vector(*spec.inner, v, rng, rep);
      return apply_to_vector(*spec.outer, mid, rng, rep);
    }
    case EstimatorKind::ExactGradient: return v;
    case EstimatorKind::ScaledGradient: {
      Vec out = v;
      scale(out, spec.scale);
      return out;
    }
    default:
      throw std::invalid_argument(std::string(kind_name(spec.kind)) +
                                  " is not a vector compressor");
  }
}

Vec apply_estimator(const EstimatorSpec& spec, const FiniteSumProblem& p, const Vec& x,
                    RandomnessStream& rng, ApplyReport* rep) {
  switch (spec.kind) {
    case EstimatorKind::ScaledIntegerRounding:
      return scaled_integer_rounding(p, x, spec.chi);
    case EstimatorKind::BiasedIndependentSampling:
      return biased_independent_sampling(p, x, spec, rng);
    case EstimatorKind::GaussianSmoothing:
      return gaussian_smoothing(p, x, spec.tau, rng);
    case EstimatorKind::DistributedBiasedRounding:
      return distributed_biased_rounding(p, x, spec, rng, rep);
    case EstimatorKind::AffineWitness: {
      // g(x) = 2x + 1 on f(x) = x^2
      require_witness(p, "parabola");
      return Vec{2.0 * x[0] + 1.0};
    }
    case EstimatorKind::WitnessYZ: {
      // g(x) = Y grad f(x) + Z, Y ~ Bern(1/2), Z = +-1, on f(x) = x^3
      require_witness(p, "cube");
      const double y = rng.bernoulli(0.5) ? 1.0 : 0.0;
      const double z = rng.bernoulli(0.5) ? 1.0 : -1.0;
      return Vec{y * 3.0 * x[0] * x[0] + z};
    }
    case EstimatorKind::WitnessSampling: {
      // weights v_i = I_i / p_i^2 with p = 1/3, on f = (x1^2 + x2^2)/2
      require_witness(p, "claim1-pair");
      const double inv_p2 = 9.0;
      Vec out(p.dim(), 0.0);
      Vec g(p.dim());
      for (int i = 0; i < p.n(); ++i) {
        if (!rng.bernoulli(1.0 / 3.0)) continue;
        p.component_grad(i, x, g);
        axpy(inv_p2, g, out);
      }
      scale(out, 1.0 / p.n());
      return out;
    }
    default:
      return apply_to_vector(spec, p.full_grad(x), rng, rep);
  }
}

}  // namespace bsgd
