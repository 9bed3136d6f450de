#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgch/dynamics.hpp"
#include "sgch/noise.hpp"
#include "sgch/rng.hpp"
#include "sgch/spectral.hpp"

namespace sgch {

/// Deterministic part of a step.  `euler` is plain Euler-Maruyama; `rk4`
/// advances the drift with classical RK4 and adds the Ito noise increment
/// evaluated at the left point.
enum class DriftScheme { euler, rk4 };

enum class PathStatus { completed, exited, blew_up, unstable };

std::string to_string(DriftScheme scheme);
std::string to_string(PathStatus status);
DriftScheme drift_scheme_from_string(const std::string& name);

struct SolverConfig {
  int k = 1;
  double s = 2.0;
  int n_modes = 256;
  int oversample = 4;
  double dt = 1e-3;
  double T = 1.0;
  NoiseModel noise;
  std::optional<double> cutoff_R;
  std::optional<double> mollifier_eps;
  double blowup_threshold = 1e3;
  std::optional<double> exit_R;
  std::uint64_t seed = 0;
  DriftScheme scheme = DriftScheme::euler;
  bool drift_enabled = true;
  double cfl_limit = 0.5;
  int snapshot_stride = 100;

  DriftSpec drift_spec() const { return DriftSpec{k, cutoff_R, mollifier_eps}; }
  int n_steps() const;
  void validate() const;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> hs_norm;
  std::vector<double> w1inf_norm;
  std::vector<double> sup_norm;
  std::vector<double> snapshot_times;
  std::vector<SpectralField> snapshots;
  SpectralField final_field;
  std::optional<double> exit_time;
  std::optional<double> blowup_time;
  PathStatus status = PathStatus::completed;
  std::string message;
};

/// Right-hand side actually integrated: drift or the cut-off drift.
SpectralField scheme_drift(const SpectralField& u, const SolverConfig& cfg);

/// dt * (N/2) * sup|u|^k, compared against cfg.cfl_limit.
double cfl_number(const SpectralField& u, const SolverConfig& cfg);

/// One step u -> u - dt D(u) + sum_j h(t,u) e_j dW_j.
SpectralField step_em(const SpectralField& u, double t, const SolverConfig& cfg, std::span<const double> dW);

/// Runs to T, the blow-up trigger, the exit trigger or instability.
/// Brownian increments come from `rng`, so (seed, cfg) fixes the path.
TrajectoryRecord simulate_path(const SolverConfig& cfg, const SpectralField& u0, PhiloxStream& rng);
TrajectoryRecord simulate_path(const SolverConfig& cfg, const SpectralField& u0);

/// First t_j with series[j] > R.
std::optional<double> exit_time(std::span<const double> times, std::span<const double> series, double R);
std::optional<double> exit_time(const TrajectoryRecord& record, double R);

/// Runs body(i) for i in [0, n) on `threads` workers (0 = hardware).
/// Work is handed out by index so results written per index do not
/// depend on the thread count.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

/// Column-oriented CSV: header line then rows, "%.17g" formatting.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::span<const double>>& columns);

/// t, Hs_norm, W1inf_norm.
void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryRecord& record);

/// Little-endian: u64 N, u64 count, then per snapshot f64 time and N f64
/// physical samples.
void write_snapshots(const std::filesystem::path& path, std::span<const double> times,
                     std::span<const SpectralField> snapshots);

struct SnapshotFile {
  std::vector<double> times;
  std::vector<std::vector<double>> samples;
};
SnapshotFile read_snapshots(const std::filesystem::path& path);

}  // namespace sgch
