#include "sgch/integrator.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

namespace sgch {
namespace {

struct SupPair {
  double u = 0.0;
  double ux = 0.0;
};

SupPair sup_pair(const SpectralField& u, int oversample) {
  const int m = oversample * u.n_modes();
  const auto w = to_physical(u, m);
  const auto wx = to_physical(derivative(u), m);
  SupPair p;
  for (int j = 0; j < m; ++j) {
    p.u = std::max(p.u, std::abs(w[j]));
    p.ux = std::max(p.ux, std::abs(wx[j]));
  }
  return p;
}

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xFF) << (8 * (7 - i));
  return r;
}

void put_u64(std::ostream& out, std::uint64_t v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_f64(std::ostream& out, double x) { put_u64(out, std::bit_cast<std::uint64_t>(x)); }

std::uint64_t get_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw InvalidInput("truncated snapshot file");
  return to_little(v);
}

}  // namespace

std::string to_string(DriftScheme scheme) { return scheme == DriftScheme::rk4 ? "rk4" : "euler"; }

std::string to_string(PathStatus status) {
  switch (status) {
    case PathStatus::completed:
      return "completed";
    case PathStatus::exited:
      return "exited";
    case PathStatus::blew_up:
      return "blew_up";
    case PathStatus::unstable:
      return "unstable";
  }
  return "unknown";
}

DriftScheme drift_scheme_from_string(const std::string& name) {
  if (name == "euler") return DriftScheme::euler;
  if (name == "rk4") return DriftScheme::rk4;
  throw InvalidParameter("scheme must be \"euler\" or \"rk4\", got \"" + name + "\"");
}

int SolverConfig::n_steps() const { return static_cast<int>(std::ceil(T / dt - 1e-9)); }

void SolverConfig::validate() const {
  drift_spec().validate();
  GridSpec{n_modes, oversample}.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidParameter("dt must be > 0");
  if (!(T >= 0.0) || !std::isfinite(T)) throw InvalidParameter("T must be >= 0");
  if (!(blowup_threshold > 0.0)) throw InvalidParameter("blowup_threshold must be > 0");
  if (exit_R && !(*exit_R > 0.0)) throw InvalidParameter("exit_R must be > 0");
  if (!(cfl_limit > 0.0)) throw InvalidParameter("cfl_limit must be > 0");
  if (snapshot_stride < 1) throw InvalidParameter("snapshot_stride must be >= 1");
  if (cutoff_R.has_value() != mollifier_eps.has_value()) {
    throw InvalidParameter("cutoff_R and mollifier_eps must be given together");
  }
  if (noise.kind() == NoiseModel::Kind::diagonal && noise.n_brownian() / 2 >= n_modes / 2) {
    throw InvalidParameter("diagonal noise modes must stay below N/2");
  }
}

SpectralField scheme_drift(const SpectralField& u, const SolverConfig& cfg) {
  if (!cfg.drift_enabled) return SpectralField(u.n_modes());
  if (cfg.cutoff_R) return cutoff_drift(u, cfg.drift_spec(), cfg.oversample);
  return drift(u, cfg.k);
}

double cfl_number(const SpectralField& u, const SolverConfig& cfg) {
  if (!cfg.drift_enabled) return 0.0;
  return cfg.dt * (u.n_modes() / 2) * std::pow(sup_norm(u, cfg.oversample), cfg.k);
}

SpectralField step_em(const SpectralField& u, double t, const SolverConfig& cfg, std::span<const double> dW) {
  SpectralField next = u;
  const double dt = cfg.dt;
  if (cfg.scheme == DriftScheme::rk4 && cfg.drift_enabled) {
    const auto k1 = scheme_drift(u, cfg);
    const auto k2 = scheme_drift(u - (0.5 * dt) * k1, cfg);
    const auto k3 = scheme_drift(u - (0.5 * dt) * k2, cfg);
    const auto k4 = scheme_drift(u - dt * k3, cfg);
    next.axpy(-dt / 6.0, k1).axpy(-dt / 3.0, k2).axpy(-dt / 3.0, k3).axpy(-dt / 6.0, k4);
  } else {
    next.axpy(-dt, scheme_drift(u, cfg));
  }
  if (cfg.noise.n_brownian() > 0) next += noise_apply(cfg.noise, t, u, dW);
  return next;
}

TrajectoryRecord simulate_path(const SolverConfig& cfg, const SpectralField& u0, PhiloxStream& rng) {
  cfg.validate();
  if (u0.n_modes() != cfg.n_modes) {
    throw InvalidInput("initial field has " + std::to_string(u0.n_modes()) + " modes, config expects " +
                       std::to_string(cfg.n_modes));
  }
  TrajectoryRecord rec;
  SpectralField u = u0;
  double sup_u = 0.0;
  auto observe = [&](double t) {
    const auto p = sup_pair(u, cfg.oversample);
    sup_u = p.u;
    const double hs = sobolev_norm(u, cfg.s);
    const double w = std::max(p.u, p.ux);
    rec.times.push_back(t);
    rec.hs_norm.push_back(hs);
    rec.w1inf_norm.push_back(w);
    rec.sup_norm.push_back(p.u);
    if (w >= cfg.blowup_threshold) {
      rec.status = PathStatus::blew_up;
      rec.blowup_time = t;
      return false;
    }
    if (cfg.exit_R && hs > *cfg.exit_R) {
      rec.status = PathStatus::exited;
      rec.exit_time = t;
      return false;
    }
    return true;
  };
  auto snapshot = [&](double t) {
    if (!rec.snapshot_times.empty() && rec.snapshot_times.back() == t) return;
    rec.snapshot_times.push_back(t);
    rec.snapshots.push_back(u);
  };

  bool running = observe(0.0);
  snapshot(0.0);
  const int n = cfg.n_steps();
  const int nb = cfg.noise.n_brownian();
  const double sqdt = std::sqrt(cfg.dt);
  std::vector<double> dW(nb);
  double t = 0.0;
  for (int step = 1; running && step <= n; ++step) {
    const double c = cfg.drift_enabled ? cfg.dt * (cfg.n_modes / 2) * std::pow(sup_u, cfg.k) : 0.0;
    if (c > cfg.cfl_limit) {
      rec.status = PathStatus::unstable;
      rec.message = "CFL guard: dt*(N/2)*sup|u|^k = " + std::to_string(c) + " > " + std::to_string(cfg.cfl_limit) +
                    " at t = " + std::to_string(t);
      break;
    }
    for (auto& w : dW) w = sqdt * rng.normal();
    SpectralField next = step_em(u, t, cfg, dW);
    if (!next.is_finite()) {
      rec.status = PathStatus::unstable;
      rec.message = "non-finite field at t = " + std::to_string(t + cfg.dt);
      break;
    }
    u = std::move(next);
    t = step * cfg.dt;
    running = observe(t);
    if (step % cfg.snapshot_stride == 0) snapshot(t);
  }
  snapshot(t);
  rec.final_field = u;
  return rec;
}

TrajectoryRecord simulate_path(const SolverConfig& cfg, const SpectralField& u0) {
  PhiloxStream rng(cfg.seed, 0);
  return simulate_path(cfg, u0, rng);
}

std::optional<double> exit_time(std::span<const double> times, std::span<const double> series, double R) {
  if (times.size() != series.size()) throw InvalidInput("times and series differ in length");
  for (std::size_t j = 0; j < series.size(); ++j) {
    if (series[j] > R) return times[j];
  }
  return std::nullopt;
}

std::optional<double> exit_time(const TrajectoryRecord& record, double R) {
  return exit_time(record.times, record.hs_norm, R);
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, std::max(n, 1));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (int i = next++; i < n && !failed; i = next++) {
      try {
        body(i);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
  pool.clear();
  if (error) std::rethrow_exception(error);
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::span<const double>>& columns) {
  if (header.size() != columns.size()) throw InvalidInput("CSV header and column count differ");
  std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != rows) throw InvalidInput("CSV columns differ in length");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  char buf[32];
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", columns[i][r]);
      out << (i ? "," : "") << buf;
    }
    out << '\n';
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryRecord& record) {
  write_csv(path, {"t", "Hs_norm", "W1inf_norm"}, {record.times, record.hs_norm, record.w1inf_norm});
}

void write_snapshots(const std::filesystem::path& path, std::span<const double> times,
                     std::span<const SpectralField> snapshots) {
  if (times.size() != snapshots.size()) throw InvalidInput("snapshot times and fields differ in count");
  const std::uint64_t n = snapshots.empty() ? 0 : snapshots.front().n_modes();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  put_u64(out, n);
  put_u64(out, snapshots.size());
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    if (static_cast<std::uint64_t>(snapshots[i].n_modes()) != n) throw InvalidInput("snapshots differ in N");
    put_f64(out, times[i]);
    for (double x : to_physical(snapshots[i])) put_f64(out, x);
  }
}

SnapshotFile read_snapshots(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  const auto n = get_u64(in);
  const auto count = get_u64(in);
  SnapshotFile f;
  for (std::uint64_t i = 0; i < count; ++i) {
    f.times.push_back(std::bit_cast<double>(get_u64(in)));
    std::vector<double> row(n);
    for (auto& x : row) x = std::bit_cast<double>(get_u64(in));
    f.samples.push_back(std::move(row));
  }
  return f;
}

}  // namespace sgch
