#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bsgd/problems.hpp"
#include "bsgd/rng.hpp"
#include "bsgd/vec.hpp"

namespace bsgd {

// Strictly increasing positive grid {a_k}. Power grids a_k = base^k expose
// exponents k in [-1022, 1023]; magnitudes outside saturate with a flag.
// Linear grids a_k = k*step include the 0 target (k = 0).
struct GridSequence {
  enum class Kind { Power, Linear };
  Kind kind = Kind::Power;
  double base = 2.0;  // power grid, base > 1
  double step = 1.0;  // linear grid, step > 0

  static constexpr long kMinExp = -1022;
  static constexpr long kMaxExp = 1023;

  double at(long k) const;
  // Bracketing grid points lo <= m <= hi for a positive magnitude.
  // Saturation at the representable range sets *overflow.
  void bracket(double m, double* lo, double* hi, bool* overflow) const;
  double nearest(double m, bool* overflow) const;  // ties toward the lower point

  std::string format() const;
  static GridSequence parse(const std::string& text);

  // sup_k (a_k/a_{k+1} + a_{k+1}/a_k + 2); +inf for linear grids.
  double rounding_constant_Z() const;
  // F = sup_k 2 a_{k+1}/(a_k + a_{k+1}),  G = inf_k 2 a_k/(a_k + a_{k+1}).
  double biased_rounding_F() const;
  double biased_rounding_G() const;
};

enum class EstimatorKind {
  TopK,
  RandK,
  BiasedRandK,
  AdaptiveRandomSparsification,
  HardThreshold,
  GeneralUnbiasedRounding,
  GeneralBiasedRounding,
  NaturalCompression,
  ScaledIntegerRounding,
  ExponentialDithering,
  NaturalDithering,
  BiasedDithering,
  SignCompression,
  Composition,
  BiasedIndependentSampling,
  GaussianSmoothing,
  DistributedBiasedRounding,
  ExactGradient,
  ScaledGradient,
  AffineWitness,
  WitnessYZ,
  WitnessSampling,
};

const char* kind_name(EstimatorKind k);

// Tagged description of one gradient estimator. Serializes to the textual
// config record `kind=<name>; key=value; ...` used by the CLI.
struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::ExactGradient;

  int k = 1;             // sparsifiers
  double w = 0.0;        // hard threshold
  double chi = 1.0;      // scaled integer rounding
  double a = 2.0;        // dithering base, > 1
  int s_levels = 1;      // dithering levels, >= 1
  double p_norm = 2.0;   // dithering norm index
  double tau = 0.0;      // gaussian smoothing; 0 = auto 1e-4 (1 + ||x||)
  double noise_sd = 0.0; // sampling noise total std dev (s)
  double scale = 1.0;    // scaled gradient witness
  std::vector<double> probs;  // sampling / distributed rounding p_i
  GridSequence grid;
  std::shared_ptr<EstimatorSpec> inner, outer;  // composition

  void validate() const;  // parameter ranges; throws std::invalid_argument
  bool is_deterministic() const;
  bool needs_problem() const;

  std::string format() const;
  static EstimatorSpec parse(const std::string& record);
};

struct ApplyReport {
  long grid_overflow = 0;
};

// Per-worker inclusion probability, broadcast from a scalar entry.
double prob_at(const EstimatorSpec& spec, int i, int n);

// --- vector-level compressors -------------------------------------------------

Vec top_k(const Vec& v, int k);
Vec rand_k(const Vec& v, int k, RandomnessStream& rng);
Vec biased_rand_k(const Vec& v, int k, RandomnessStream& rng);
Vec adaptive_random_sparsification(const Vec& v, RandomnessStream& rng);
Vec hard_threshold(const Vec& v, double w);
enum class RoundingMode { Unbiased, BiasedNearest };
Vec round_to_grid(const Vec& v, const GridSequence& grid, RoundingMode mode,
                  RandomnessStream& rng, ApplyReport* rep = nullptr);
Vec exponential_dithering(const Vec& v, double a, int s_levels, double p_norm,
                          RandomnessStream& rng);
Vec sign_compression(const Vec& v);
Vec biased_dithering(const Vec& v);

// Two-point distribution of one rounded/dithered coordinate (exact moments).
struct TwoPoint {
  double lo = 0.0, hi = 0.0;
  double p_hi = 0.0;  // P(hi); 1 - p_hi at lo
};
TwoPoint unbiased_rounding_coord(const GridSequence& grid, double magnitude,
                                 bool* overflow = nullptr);
// Dithering level bracket for normalized magnitude t in [0, 1].
TwoPoint dithering_coord(double a, int s_levels, double t);

// --- oracle-based estimators ---------------------------------------------------

Vec scaled_integer_rounding(const FiniteSumProblem& p, const Vec& x, double chi);
Vec biased_independent_sampling(const FiniteSumProblem& p, const Vec& x,
                                const EstimatorSpec& spec, RandomnessStream& rng);
Vec gaussian_smoothing(const FiniteSumProblem& p, const Vec& x, double tau,
                       RandomnessStream& rng);
Vec distributed_biased_rounding(const FiniteSumProblem& p, const Vec& x,
                                const EstimatorSpec& spec, RandomnessStream& rng,
                                ApplyReport* rep = nullptr);

// --- entry points ---------------------------------------------------------------

// Compressor kinds applied to an explicit vector. Oracle-based kinds throw.
Vec apply_to_vector(const EstimatorSpec& spec, const Vec& v, RandomnessStream& rng,
                    ApplyReport* rep = nullptr);

// One estimator draw at x. Compressors act on full_grad(x).
Vec apply_estimator(const EstimatorSpec& spec, const FiniteSumProblem& p, const Vec& x,
                    RandomnessStream& rng, ApplyReport* rep = nullptr);

}  // namespace bsgd
