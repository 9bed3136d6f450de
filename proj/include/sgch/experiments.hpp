#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sgch/girsanov.hpp"
#include "sgch/integrator.hpp"
#include "sgch/noise.hpp"
#include "sgch/rng.hpp"
#include "sgch/spectral.hpp"

namespace sgch {

// ---------------------------------------------------------------------------
// Statistics

/// Empirical probability with standard error sqrt(p(1-p)/M) and the
/// theoretical value it is compared against.
struct EnsembleStats {
  int n_paths = 0;
  std::vector<std::uint8_t> outcomes;  // 1 = event occurred
  double p_hat = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  /// p_hat - (bound - 3 std_error); >= 0 means the one-sided check passes.
  double margin = 0.0;
  bool pass = false;
};

/// Fills p_hat, std_error, margin and pass for a lower bound.
EnsembleStats lower_bound_stats(std::vector<std::uint8_t> outcomes, double bound);

/// |p_hat - exact| <= 3 std_error.
bool within_three_sigma(const EnsembleStats& stats, double exact);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};
/// Least squares fit of log y against log x.
LinearFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

// ---------------------------------------------------------------------------
// Weak instability construction

struct InstabilityConfig {
  int k = 2;
  double s = 2.0;
  double delta = 0.75;
  int l = 1;
  std::vector<int> n_list{16, 32, 64, 128, 256};
  double T = 1.0;

  /// delta in (1/2, min(s-1, 3/2)), s > 3/2, l in {-1,1} for odd k and
  /// {0,1} for even k, every n >= 1.
  void validate() const;
};

/// Smallest power of two N with N/2 > (k+1) n, so every product formed
/// from u^{l,n} stays resolved.
int resolution_for(int n, int k);

/// l n^{-1/k} + n^{-s} cos(n x - l t) on N modes (0 = resolution_for).
SpectralField approx_solution(const InstabilityConfig& cfg, int n, double t, int n_modes = 0);

/// T_{n,k} = [sum_{j=1}^k C(k,j) (l n^{-1/k})^{k-j} n^{-sj} cos^j theta] (-n^{1-s} sin theta).
SpectralField residual_tnk(const InstabilityConfig& cfg, int n, double t, int n_modes = 0);

/// 2s - delta - (k+1)/k for s <= (2k+1)/k, else s - delta + 1.
double rate_exponent(int k, double s, double delta);

struct ErrorOptions {
  double dt = 1e-3;
  int n_paths = 1;
  int threads = 1;
};

struct ErrorResult {
  int n = 0;
  int n_modes = 0;
  /// sup_t ||E(t)||_{H^delta}; for stochastic noise sqrt(mean over paths of sup^2).
  double value = 0.0;
  /// First path: t and ||E(t)||_{H^delta}.
  std::vector<double> times;
  std::vector<double> norms;
};

/// E(t) = int_0^t [T_{n,k} + F(u^{l,n})] dt' - int_0^t h(t', u^{l,n}) dW,
/// left-point sums on the dt grid up to cfg.T.  `noise` must be zero or
/// f_bounded.
ErrorResult error_functional(const InstabilityConfig& cfg, int n, const NoiseModel& noise, PhiloxStream& rng,
                             const ErrorOptions& options = {});

struct DivergenceOptions {
  double dt = 1e-3;
  int n_paths = 1;
  int threads = 1;
  int n_modes = 0;  // 0 = 4 * max n
  NoiseModel noise;
  std::vector<double> gap_times{0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
  double blowup_threshold = 1e3;
};

struct DivergenceResult {
  std::pair<int, int> l_pair;
  std::vector<int> n_list;
  std::vector<double> initial_gap;
  double initial_slope = 0.0;
  std::vector<double> gap_times;
  /// [n index][time index]: mean over surviving paths of the simulated gap.
  std::vector<std::vector<double>> simulated_gap;
  /// [n index][time index]: gap of the approximate pair.
  std::vector<std::vector<double>> approx_gap;
  std::vector<int> excluded_paths;  // per n: paths stopped before T
};

/// Simulates u_{l,n} from u^{l,n}(0) for the two admissible l values and
/// measures ||u_{l1,n}(t) - u_{l2,n}(t)||_{H^s}.
DivergenceResult divergence_experiment(const InstabilityConfig& cfg, PhiloxStream& rng,
                                       const DivergenceOptions& options = {});

/// 2 sqrt(pi) |sin t|, the large-n limit of the approximate-pair gap.
double predicted_gap(double t);

// ---------------------------------------------------------------------------
// Exponential martingale exit

/// a(t) = lambda b(t)^2 + constant.
struct DriftProfile {
  double lambda = 0.0;
  double constant = 0.0;
  double operator()(double t, const TimeProfile& b) const { return lambda * b(t) * b(t) + constant; }
};

struct ExitOptions {
  double T = 50.0;
  double dt = 1e-3;
  int n_paths = 10000;
  int threads = 1;
};

struct ExitResult {
  std::vector<double> R;
  /// Survival P(sup_{t<=T} X <= R) per barrier; bound is 1 - R^{-(1-2 lambda)}.
  std::vector<EnsembleStats> survival;
};

/// X = exp(int b dW + int (lambda - 1/2) b^2 dt) on the dt grid; the
/// maximum inside each step is drawn from the Brownian bridge law, so
/// the only discretization is the piecewise-constant b.
ExitResult exit_probability_mart(const TimeProfile& b, double lambda, const std::vector<double>& R, PhiloxStream& rng,
                                 const ExitOptions& options = {});

/// 1 - R^{-(1 - 2 lambda)}.  Requires lambda < 1/2 and R > 1.
double exit_survival_bound(double lambda, double R);

// ---------------------------------------------------------------------------
// Decay for small data

/// K with ||f||_{W^{1,inf}} <= K ||f||_{H^s} for every f: Cauchy-Schwarz
/// on the Fourier series, K = (2pi)^{-1/2} max(S0, S1)^{1/2} with
/// S0 = sum (1+m^2)^{-s}, S1 = sum m^2 (1+m^2)^{-s}.  Needs s > 3/2.
double embedding_constant(double s);

/// Largest ||f||_{W^{1,inf}} / ||f||_{H^s} over random fields; a lower
/// estimate of the best embedding constant.
double sampled_embedding_ratio(double s, int n_modes, int samples, PhiloxStream& rng);

/// max(1.01, largest ||F(u)||_{H^s} / (||u||^k_{W^{1,inf}} ||u||_{H^s}),
/// largest |<D^s u, D^s drift(u)>| / (||u||^k_{W^{1,inf}} ||u||^2_{H^s}))
/// over random fields.
double calibrate_energy_constant(int k, double s, int n_modes, int samples, PhiloxStream& rng);

struct DecayConfig {
  int k = 1;
  double s = 2.0;
  TimeProfile b = TimeProfile::constant(1.0);
  double lambda1 = 4.0;
  double lambda2 = 8.0;
  double R = 2.0;
  /// ||u0||_{H^s} = u0_scale * (1/(R K)) (b_*/(C lambda1))^{1/k}; must lie in [0,1).
  double u0_scale = 0.9;
  int u0_mode = 1;
  double T = 10.0;
  double dt = 1e-3;
  int n_modes = 256;
  int n_paths = 200;
  int threads = 1;
  int calibration_samples = 200;
  DriftScheme scheme = DriftScheme::euler;

  /// lambda1 > 2, lambda2 > 2 lambda1/(lambda1 - 2), R > 1, b_* > 0.
  void validate() const;
};

struct DecayResult {
  double K = 0.0;
  double C = 0.0;
  double sampled_K = 0.0;
  double u0_norm = 0.0;
  double envelope0 = 0.0;
  double rate = 0.0;  // ((lambda1-2) lambda2 - 2 lambda1) / (2 lambda1 lambda2)
  EnsembleStats stats;
  std::vector<int> unstable_paths;
};

/// 1 - R^{-2/lambda2}.
double decay_bound(double R, double lambda2);

DecayResult decay_probability(const DecayConfig& cfg, PhiloxStream& rng);

// ---------------------------------------------------------------------------
// Global existence for sign-definite momentum

struct GlobalConfig {
  int k = 1;
  double s = 4.0;
  TimeProfile b = TimeProfile::constant(0.25);
  double p = 1.0;
  double q = 0.0;
  double T = 20.0;
  double dt = 1e-3;
  int n_modes = 256;
  int n_paths = 100;
  int threads = 1;
  double blowup_threshold = 20.0;
  double max_ds = 1e-2;

  /// p, q in [0,1], p + q <= 1, b_* > 0.
  void validate() const;
};

enum class MomentumSign { positive, negative, mixed };
std::string to_string(MomentumSign sign);

/// a + c cos(m x + phi): for positive/negative draws (1+m^2)|c| < |a| so
/// V0 = a + (1+m^2) c cos(m x + phi) keeps the sign of a; mixed draws
/// violate it.
SpectralField sample_initial_data(MomentumSign sign, int n_modes, PhiloxStream& rng);

struct GlobalResult {
  std::vector<MomentumSign> signs;
  std::vector<std::uint8_t> blew_up;
  int violations = 0;  // blow-ups among sign-definite paths
  EnsembleStats stats;  // event = no blow-up before T; bound p + q
  std::vector<int> unstable_paths;
};

GlobalResult global_existence_probability(const GlobalConfig& cfg, PhiloxStream& rng);

// ---------------------------------------------------------------------------
// Law of the iterated logarithm

struct LilReport {
  std::vector<double> times;
  /// [time index]: quantiles 0.05, 0.25, 0.5, 0.75, 0.95 and the sample max
  /// of B_t / sqrt(2 t log log t).
  std::vector<std::vector<double>> quantiles;
  std::vector<double> sample_max;
  /// (int_0^{phi^{-1}(t)} a - t/2) / sqrt(2 t log log t) at the last time.
  double condition_ratio = 0.0;
  bool condition_I = false;   // ratio < -1
  bool condition_II = false;  // ratio > 1
  /// Median of X(t) per time.
  std::vector<double> median_X;
};

/// Needs every t > e (log log t > 0).
LilReport lil_diagnostic(const TimeProfile& b, const DriftProfile& a, const std::vector<double>& times, int n_paths,
                         PhiloxStream& rng);

}  // namespace sgch
