#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgch/integrator.hpp"
#include "sgch/noise.hpp"
#include "sgch/rng.hpp"
#include "sgch/spectral.hpp"

namespace sgch {

/// beta(t) = exp(int b dW - int b^2/2 dt) and the clock S(t) = int beta^k dt
/// on a uniform grid t_i = i dt.
struct GirsanovPath {
  int k = 1;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<double> W;
  std::vector<double> beta;
  std::vector<double> S;

  /// Linear interpolation of S at t, clamped to the grid.
  double clock_at(double t) const;
  /// Inverse of the clock by monotone linear interpolation.
  double time_at(double s) const;
  double beta_at(double t) const;
};

/// Euler increments for int b dW, trapezoid rule for int b^2/2 and for S.
/// b = 0 gives beta = 1 and S(t) = t.
GirsanovPath sample_beta_path(const TimeProfile& b, int k, double T, double dt, PhiloxStream& rng);

/// beta = 1, S(t) = t.
GirsanovPath deterministic_path(int k, double T, double dt);

struct TransportOptions {
  int oversample = 4;
  double max_ds = 1e-2;
  double cfl = 0.5;
  /// Report v every `stride` points of the path grid (plus the end point).
  int stride = 1;
  /// Stop when ||v||_{W^{1,inf}} reaches this value.
  double blowup_threshold = 1e3;
};

/// v on the reported original times t_j, with s_j = S(t_j).
struct VTrajectory {
  int k = 1;
  TransportOptions options;
  std::vector<double> times;
  std::vector<double> clock;
  std::vector<SpectralField> v;
  std::vector<double> w1inf_norm;
  PathStatus status = PathStatus::completed;
  std::optional<double> blowup_time;
  std::string message;
  long long substeps = 0;
};

/// dv/ds = -(v^k v_x + F(v)) by RK4 in s = S(t), substeps
/// ds = min(max_ds, cfl / ((N/2) sup|v|^k)) landing exactly on every S(t_j).
VTrajectory solve_transport(const SpectralField& u0, int k, const GirsanovPath& path,
                            const TransportOptions& options = {});

struct UTrajectory {
  std::vector<double> times;
  std::vector<SpectralField> u;
};

/// u(t) = beta(t) v(t).
UTrajectory reconstruct_u(const VTrajectory& v, const GirsanovPath& path);

/// Particle paths dq/ds = v^k(s, q), q(0) = x0, integrated jointly with v
/// by the same RK4 substeps, and q_x = exp(int k v^{k-1} v_x(s, q) ds) by
/// the trapezoid rule over the substeps.
struct Characteristics {
  std::vector<double> times;
  std::vector<std::vector<double>> q;    // [time][particle]
  std::vector<std::vector<double>> q_x;  // [time][particle]
};
Characteristics characteristics(const VTrajectory& v, const GirsanovPath& path, std::span<const double> x0);

/// V = v - v_xx per reported time, with grid extrema.
struct MomentumTrace {
  std::vector<double> times;
  std::vector<SpectralField> V;
  std::vector<double> min_V;
  std::vector<double> max_V;
};
MomentumTrace momentum_trace(const VTrajectory& v);

/// Largest sup|v_x| - sup|v| over the reported times (oversampled grid).
double slope_excess(const VTrajectory& v);

/// Largest |(v + v_x)(x) - kernel integral of V| over the reported times
/// at the points xs.
double one_sided_identity_error(const VTrajectory& v, std::span<const double> xs);

}  // namespace sgch
