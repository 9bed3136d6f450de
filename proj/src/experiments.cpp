#include "sgch/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "sgch/dynamics.hpp"
#include "sgch/fields.hpp"

namespace sgch {
namespace {

double binomial(int n, int r) {
  double c = 1.0;
  for (int i = 1; i <= r; ++i) c = c * (n - r + i) / i;
  return c;
}

bool is_odd(int k) { return k % 2 != 0; }

std::pair<int, int> l_pair_for(int k) { return is_odd(k) ? std::pair{1, -1} : std::pair{1, 0}; }

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * (v.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double w = pos - i;
  return i + 1 < v.size() ? (1 - w) * v[i] + w * v[i + 1] : v[i];
}

}  // namespace

// ---------------------------------------------------------------------------

EnsembleStats lower_bound_stats(std::vector<std::uint8_t> outcomes, double bound) {
  EnsembleStats st;
  st.n_paths = static_cast<int>(outcomes.size());
  if (st.n_paths < 1) throw InvalidParameter("n_paths must be ≥ 1");
  const double hits = std::accumulate(outcomes.begin(), outcomes.end(), 0.0);
  st.p_hat = hits / st.n_paths;
  st.std_error = std::sqrt(st.p_hat * (1.0 - st.p_hat) / st.n_paths);
  st.bound = bound;
  st.margin = st.p_hat - (bound - 3.0 * st.std_error);
  st.pass = st.margin >= 0.0;
  st.outcomes = std::move(outcomes);
  return st;
}

bool within_three_sigma(const EnsembleStats& stats, double exact) {
  return std::abs(stats.p_hat - exact) <= 3.0 * stats.std_error;
}

LinearFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidInput("log-log fit needs two or more (x, y) pairs");
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidInput("log-log fit needs positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  LinearFit f;
  f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

// ---------------------------------------------------------------------------

void InstabilityConfig::validate() const {
  if (k < 1) throw InvalidParameter("k >= 1 violated");
  if (!(s > 1.5)) throw InvalidParameter("s > 3/2 violated");
  const double upper = std::min(s - 1.0, 1.5);
  if (!(delta > 0.5 && delta < upper)) throw InvalidParameter("delta in (1/2, min(s-1, 3/2)) violated");
  if (is_odd(k) && l != 1 && l != -1) throw InvalidParameter("l in {-1, 1} for odd k violated");
  if (!is_odd(k) && l != 0 && l != 1) throw InvalidParameter("l in {0, 1} for even k violated");
  if (n_list.empty()) throw InvalidParameter("n_list must not be empty");
  for (int n : n_list) {
    if (n < 1) throw InvalidParameter("every n must be >= 1");
  }
  if (!(T > 0.0)) throw InvalidParameter("T > 0 violated");
}

int resolution_for(int n, int k) {
  int N = 8;
  while (N / 2 <= (k + 1) * n) N *= 2;
  return N;
}

SpectralField approx_solution(const InstabilityConfig& cfg, int n, double t, int n_modes) {
  const int N = n_modes > 0 ? n_modes : resolution_for(n, cfg.k);
  if (n >= N / 2) throw InvalidParameter("n must stay below N/2 to be resolved");
  return cosine_field(N, cfg.l * std::pow(double(n), -1.0 / cfg.k), std::pow(double(n), -cfg.s), n, -cfg.l * t);
}

SpectralField residual_tnk(const InstabilityConfig& cfg, int n, double t, int n_modes) {
  const int N = n_modes > 0 ? n_modes : resolution_for(n, cfg.k);
  if ((cfg.k + 1) * n >= N / 2) throw InvalidParameter("T_{n,k} needs N/2 > (k+1) n");
  const double c0 = cfg.l * std::pow(double(n), -1.0 / cfg.k);
  const double a = std::pow(double(n), -cfg.s);
  std::vector<double> w(N);
  for (int j = 0; j < N; ++j) {
    const double th = n * grid_point(j, N) - cfg.l * t;
    const double c = std::cos(th);
    double sum = 0.0;
    for (int i = 1; i <= cfg.k; ++i) sum += binomial(cfg.k, i) * std::pow(c0, cfg.k - i) * std::pow(a * c, i);
    w[j] = sum * (-a * n * std::sin(th));
  }
  return to_spectral(w, N);
}

double rate_exponent(int k, double s, double delta) {
  if (k < 1) throw InvalidParameter("k >= 1 violated");
  if (!(s > 1.5)) throw InvalidParameter("s > 3/2 violated");
  if (!(delta > 0.5 && delta < std::min(s - 1.0, 1.5))) {
    throw InvalidParameter("delta in (1/2, min(s-1, 3/2)) violated");
  }
  const double r = s <= (2.0 * k + 1.0) / k ? 2.0 * s - delta - (k + 1.0) / k : s - delta + 1.0;
  if (!(r > 0.0)) throw InvalidParameter("r_s > 0 violated");
  return r;
}

ErrorResult error_functional(const InstabilityConfig& cfg, int n, const NoiseModel& noise, PhiloxStream& rng,
                             const ErrorOptions& opt) {
  cfg.validate();
  if (noise.kind() != NoiseModel::Kind::zero && noise.kind() != NoiseModel::Kind::f_bounded) {
    throw InvalidParameter("error functional takes zero or f_bounded noise");
  }
  if (noise.kind() == NoiseModel::Kind::f_bounded && noise.order() != cfg.k) {
    throw InvalidParameter("f_bounded noise order must equal k");
  }
  if (!(opt.dt > 0.0)) throw InvalidParameter("dt must be > 0");
  const bool stochastic = noise.kind() == NoiseModel::Kind::f_bounded;
  const int paths = stochastic ? opt.n_paths : 1;
  if (paths < 1) throw InvalidParameter("n_paths must be ≥ 1");

  ErrorResult res;
  res.n = n;
  res.n_modes = resolution_for(n, cfg.k);
  const int N = res.n_modes;
  const int steps = static_cast<int>(std::ceil(cfg.T / opt.dt - 1e-9));
  const double dt = cfg.T / steps;

  // Deterministic integrand T + F at each left point, shared by all paths.
  std::vector<SpectralField> integrand, fvals;
  integrand.reserve(steps);
  for (int i = 0; i < steps; ++i) {
    const auto u = approx_solution(cfg, n, i * dt, N);
    auto f = f_nonlocal(u, cfg.k);
    integrand.push_back(residual_tnk(cfg, n, i * dt, N) + f);
    if (stochastic) fvals.push_back(std::move(f));
  }

  std::vector<double> sup_sq(paths, 0.0);
  std::vector<std::vector<double>> first_series(1);
  parallel_for(paths, opt.threads, [&](int p) {
    auto stream = rng.split(static_cast<std::uint64_t>(p));
    SpectralField E(N);
    double sup = 0.0;
    std::vector<double> series{0.0};
    const double sq = std::sqrt(dt);
    for (int i = 0; i < steps; ++i) {
      E.axpy(dt, integrand[i]);
      if (stochastic) E.axpy(-sq * stream.normal(), fvals[i]);
      const double nrm = sobolev_norm(E, cfg.delta);
      sup = std::max(sup, nrm);
      if (p == 0) series.push_back(nrm);
    }
    sup_sq[p] = sup * sup;
    if (p == 0) first_series[0] = std::move(series);
  });
  res.value = std::sqrt(std::accumulate(sup_sq.begin(), sup_sq.end(), 0.0) / paths);
  res.norms = std::move(first_series[0]);
  for (int i = 0; i <= steps; ++i) res.times.push_back(i * dt);
  return res;
}

double predicted_gap(double t) { return 2.0 * std::sqrt(std::numbers::pi) * std::abs(std::sin(t)); }

DivergenceResult divergence_experiment(const InstabilityConfig& cfg, PhiloxStream& rng,
                                       const DivergenceOptions& opt) {
  cfg.validate();
  if (opt.n_paths < 1) throw InvalidParameter("n_paths must be ≥ 1");
  if (opt.gap_times.empty()) throw InvalidParameter("gap_times must not be empty");
  if (opt.noise.kind() == NoiseModel::Kind::linear) throw InvalidParameter("divergence noise must be zero, f_bounded or diagonal");
  DivergenceResult res;
  res.l_pair = l_pair_for(cfg.k);
  res.n_list = cfg.n_list;
  res.gap_times = opt.gap_times;
  const double t_end = *std::max_element(opt.gap_times.begin(), opt.gap_times.end());
  const int steps = static_cast<int>(std::llround(t_end / opt.dt));
  std::vector<int> record_step;
  for (double gt : opt.gap_times) {
    const double idx = gt / opt.dt;
    if (std::abs(idx - std::round(idx)) > 1e-9 || gt < 0.0) throw InvalidParameter("gap_times must be multiples of dt");
    record_step.push_back(static_cast<int>(std::llround(idx)));
  }

  InstabilityConfig c1 = cfg, c2 = cfg;
  c1.l = res.l_pair.first;
  c2.l = res.l_pair.second;
  for (int n : cfg.n_list) {
    const int N = opt.n_modes > 0 ? opt.n_modes : std::max(16, 4 * n);
    res.initial_gap.push_back(sobolev_norm(approx_solution(c1, n, 0.0, N) - approx_solution(c2, n, 0.0, N), cfg.s));
    std::vector<double> approx;
    for (double gt : opt.gap_times) {
      approx.push_back(sobolev_norm(approx_solution(c1, n, gt, N) - approx_solution(c2, n, gt, N), cfg.s));
    }
    res.approx_gap.push_back(std::move(approx));

    SolverConfig sc;
    sc.k = cfg.k;
    sc.s = cfg.s;
    sc.n_modes = N;
    sc.dt = opt.dt;
    sc.T = t_end;
    sc.noise = opt.noise;
    sc.scheme = DriftScheme::rk4;
    sc.blowup_threshold = opt.blowup_threshold;
    sc.validate();

    std::vector<std::vector<double>> gaps(opt.n_paths);
    std::vector<std::uint8_t> ok(opt.n_paths, 1);
    parallel_for(opt.n_paths, opt.threads, [&](int p) {
      SpectralField u1 = approx_solution(c1, n, 0.0, N), u2 = approx_solution(c2, n, 0.0, N);
      auto stream = rng.split(static_cast<std::uint64_t>(n) * 1000003ULL + p);
      std::vector<double> dW(sc.noise.n_brownian());
      std::vector<double> g(opt.gap_times.size(), 0.0);
      auto store = [&](int step) {
        for (std::size_t j = 0; j < record_step.size(); ++j) {
          if (record_step[j] == step) g[j] = sobolev_norm(u1 - u2, cfg.s);
        }
      };
      store(0);
      for (int step = 1; step <= steps; ++step) {
        const double t = (step - 1) * sc.dt;
        if (cfl_number(u1, sc) > sc.cfl_limit || cfl_number(u2, sc) > sc.cfl_limit) {
          ok[p] = 0;
          break;
        }
        for (auto& w : dW) w = std::sqrt(sc.dt) * stream.normal();
        u1 = step_em(u1, t, sc, dW);
        u2 = step_em(u2, t, sc, dW);
        if (!u1.is_finite() || !u2.is_finite() || w1inf_norm(u1) >= sc.blowup_threshold ||
            w1inf_norm(u2) >= sc.blowup_threshold) {
          ok[p] = 0;
          break;
        }
        store(step);
      }
      gaps[p] = std::move(g);
    });
    std::vector<double> mean(opt.gap_times.size(), 0.0);
    int kept = 0;
    for (int p = 0; p < opt.n_paths; ++p) {
      if (!ok[p]) continue;
      ++kept;
      for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += gaps[p][j];
    }
    for (auto& m : mean) m = kept ? m / kept : std::nan("");
    res.simulated_gap.push_back(std::move(mean));
    res.excluded_paths.push_back(opt.n_paths - kept);
  }
  std::vector<double> nd(cfg.n_list.begin(), cfg.n_list.end());
  if (nd.size() >= 2) res.initial_slope = loglog_fit(nd, res.initial_gap).slope;
  return res;
}

// ---------------------------------------------------------------------------

double exit_survival_bound(double lambda, double R) {
  if (!(lambda < 0.5)) throw InvalidParameter("lambda < 1/2 violated");
  if (!(R > 1.0)) throw InvalidParameter("R > 1 violated");
  return 1.0 - std::pow(1.0 / R, 1.0 - 2.0 * lambda);
}

ExitResult exit_probability_mart(const TimeProfile& b, double lambda, const std::vector<double>& R,
                                 PhiloxStream& rng, const ExitOptions& opt) {
  if (opt.n_paths < 1) throw InvalidParameter("n_paths must be ≥ 1");
  if (R.empty()) throw InvalidParameter("at least one barrier R is needed");
  if (!(opt.dt > 0.0) || !(opt.T > 0.0)) throw InvalidParameter("T and dt must be > 0");
  b.require_admissible();
  std::vector<double> barriers = R;
  std::sort(barriers.begin(), barriers.end());
  for (double r : barriers) (void)exit_survival_bound(lambda, r);
  std::vector<double> logR(barriers.size());
  for (std::size_t i = 0; i < barriers.size(); ++i) logR[i] = std::log(barriers[i]);

  const int steps = static_cast<int>(std::ceil(opt.T / opt.dt - 1e-9));
  const double dt = opt.T / steps;
  const double sq = std::sqrt(dt);
  std::vector<double> bt(steps);
  for (int i = 0; i < steps; ++i) bt[i] = b(i * dt);

  const std::size_t nb = barriers.size();
  std::vector<std::vector<std::uint8_t>> survived(nb, std::vector<std::uint8_t>(opt.n_paths, 1));
  parallel_for(opt.n_paths, opt.threads, [&](int p) {
    auto stream = rng.split(static_cast<std::uint64_t>(p));
    double x = 0.0;
    std::size_t first_alive = 0;  // barriers below this index are already crossed
    for (int i = 0; i < steps && first_alive < nb; ++i) {
      const double var = bt[i] * bt[i] * dt;
      const double next = x + bt[i] * sq * stream.normal() + (lambda - 0.5) * var;
      while (first_alive < nb && next > logR[first_alive]) ++first_alive;
      if (first_alive < nb && var > 0.0) {
        const double e0 = 2.0 * (logR[first_alive] - x) * (logR[first_alive] - next) / var;
        if (e0 < 40.0) {
          const double u = stream.uniform();
          while (first_alive < nb) {
            const double e = 2.0 * (logR[first_alive] - x) * (logR[first_alive] - next) / var;
            if (u < std::exp(-e)) ++first_alive;
            else break;
          }
        }
      }
      x = next;
    }
    for (std::size_t j = 0; j < first_alive; ++j) survived[j][p] = 0;
  });
  ExitResult res;
  res.R = barriers;
  for (std::size_t j = 0; j < nb; ++j) {
    res.survival.push_back(lower_bound_stats(std::move(survived[j]), exit_survival_bound(lambda, barriers[j])));
  }
  return res;
}

// ---------------------------------------------------------------------------

double embedding_constant(double s) {
  if (!(s > 1.5)) throw InvalidParameter("s > 3/2 violated");
  // sums over all integers m; tails bounded by the integral.
  double s0 = 1.0, s1 = 0.0;
  const int M = 200000;
  for (int m = 1; m <= M; ++m) {
    const double w = std::pow(1.0 + double(m) * m, -s);
    s0 += 2.0 * w;
    s1 += 2.0 * double(m) * m * w;
  }
  s0 += 2.0 * std::pow(double(M), 1.0 - 2.0 * s) / (2.0 * s - 1.0);
  s1 += 2.0 * std::pow(double(M), 3.0 - 2.0 * s) / (2.0 * s - 3.0);
  return std::sqrt(std::max(s0, s1) / kTwoPi);
}

double sampled_embedding_ratio(double s, int n_modes, int samples, PhiloxStream& rng) {
  double best = 0.0;
  for (int i = 0; i < samples; ++i) {
    const int band = 1 + static_cast<int>(rng.uniform() * (n_modes / 2 - 1));
    const double decay = 3.0 * rng.uniform();
    const auto f = random_smooth_field(n_modes, std::min(band, n_modes / 2 - 1), decay, rng);
    best = std::max(best, w1inf_norm(f) / sobolev_norm(f, s));
  }
  return best;
}

double calibrate_energy_constant(int k, double s, int n_modes, int samples, PhiloxStream& rng) {
  double best = 1.01;
  for (int i = 0; i < samples; ++i) {
    const int band = 1 + static_cast<int>(rng.uniform() * (n_modes / 4 - 1));
    const double decay = s + 1.0 + 2.0 * rng.uniform();
    const double scale = std::exp(2.0 * rng.uniform() - 1.0);
    const auto u = scale * random_smooth_field(n_modes, std::max(1, band), decay, rng);
    const double w = std::pow(w1inf_norm(u), k);
    const double hs = sobolev_norm(u, s);
    if (!(w > 0.0) || !(hs > 0.0)) continue;
    best = std::max(best, sobolev_norm(f_nonlocal(u, k), s) / (w * hs));
    best = std::max(best, std::abs(sobolev_inner(u, drift(u, k), s)) / (w * hs * hs));
  }
  return best;
}

void DecayConfig::validate() const {
  if (k < 1) throw InvalidParameter("k >= 1 violated");
  if (!(s > 1.5)) throw InvalidParameter("s > 3/2 violated");
  if (!(lambda1 > 2.0)) throw InvalidParameter("λ1>2 violated: decay needs lambda1 > 2");
  if (!(lambda2 > 2.0 * lambda1 / (lambda1 - 2.0))) {
    throw InvalidParameter("lambda2 > 2 lambda1 / (lambda1 - 2) violated");
  }
  if (!(R > 1.0)) throw InvalidParameter("R > 1 violated");
  b.require_admissible();
  if (!(u0_scale >= 0.0 && u0_scale < 1.0)) throw InvalidParameter("u0_scale in [0, 1) violated");
  if (n_paths < 1) throw InvalidParameter("n_paths must be ≥ 1");
  if (u0_mode < 1 || u0_mode >= n_modes / 2) throw InvalidParameter("u0_mode must satisfy 1 <= u0_mode < N/2");
}

double decay_bound(double R, double lambda2) { return 1.0 - std::pow(1.0 / R, 2.0 / lambda2); }

DecayResult decay_probability(const DecayConfig& cfg, PhiloxStream& rng) {
  cfg.validate();
  DecayResult res;
  auto calib = rng.split(0xCA11B);
  res.K = embedding_constant(cfg.s);
  res.sampled_K = sampled_embedding_ratio(cfg.s, cfg.n_modes, cfg.calibration_samples, calib);
  res.C = calibrate_energy_constant(cfg.k, cfg.s, cfg.n_modes, cfg.calibration_samples, calib);
  res.envelope0 = std::pow(cfg.b.lower_sq() / (res.C * cfg.lambda1), 1.0 / cfg.k) / res.K;
  res.rate = ((cfg.lambda1 - 2.0) * cfg.lambda2 - 2.0 * cfg.lambda1) / (2.0 * cfg.lambda1 * cfg.lambda2);
  res.u0_norm = cfg.u0_scale * res.envelope0 / cfg.R;

  SpectralField u0 = cosine_field(cfg.n_modes, 0.0, 1.0, cfg.u0_mode);
  u0 *= res.u0_norm / sobolev_norm(u0, cfg.s);

  SolverConfig sc;
  sc.k = cfg.k;
  sc.s = cfg.s;
  sc.n_modes = cfg.n_modes;
  sc.dt = cfg.dt;
  sc.T = cfg.T;
  sc.noise = NoiseModel::linear(cfg.b);
  sc.scheme = cfg.scheme;
  sc.snapshot_stride = std::max(1, sc.n_steps());
  sc.validate();

  std::vector<std::uint8_t> respects(cfg.n_paths, 0), unstable(cfg.n_paths, 0);
  parallel_for(cfg.n_paths, cfg.threads, [&](int p) {
    auto stream = rng.split(static_cast<std::uint64_t>(p) + 1);
    const auto rec = simulate_path(sc, u0, stream);
    if (rec.status == PathStatus::unstable || rec.status == PathStatus::blew_up) {
      unstable[p] = rec.status == PathStatus::unstable;
      return;
    }
    bool ok = true;
    for (std::size_t j = 0; j < rec.times.size() && ok; ++j) {
      const double env = res.envelope0 * std::exp(-res.rate * cfg.b.integral_sq(rec.times[j]));
      ok = rec.hs_norm[j] < env;
    }
    respects[p] = ok;
  });
  for (int p = 0; p < cfg.n_paths; ++p) {
    if (unstable[p]) res.unstable_paths.push_back(p);
  }
  res.stats = lower_bound_stats(std::move(respects), decay_bound(cfg.R, cfg.lambda2));
  return res;
}

// ---------------------------------------------------------------------------

void GlobalConfig::validate() const {
  if (k < 1) throw InvalidParameter("k >= 1 violated");
  if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0)) throw InvalidParameter("p, q in [0, 1] violated");
  if (p + q > 1.0 + 1e-12) throw InvalidParameter("p + q <= 1 violated");
  b.require_admissible();
  if (n_paths < 1) throw InvalidParameter("n_paths must be ≥ 1");
  if (!(T > 0.0) || !(dt > 0.0)) throw InvalidParameter("T and dt must be > 0");
  if (n_modes < 8) throw InvalidParameter("n_modes must be >= 8");
  if (!(blowup_threshold > 0.0)) throw InvalidParameter("blowup_threshold must be > 0");
}

std::string to_string(MomentumSign sign) {
  switch (sign) {
    case MomentumSign::positive:
      return "positive";
    case MomentumSign::negative:
      return "negative";
    case MomentumSign::mixed:
      return "mixed";
  }
  return "unknown";
}

SpectralField sample_initial_data(MomentumSign sign, int n_modes, PhiloxStream& rng) {
  const int m = 1 + static_cast<int>(rng.uniform() * 3.0);
  if (m >= n_modes / 2) throw InvalidParameter("n_modes too small for the initial-data sampler");
  const double phase = kTwoPi * rng.uniform();
  const double w = 1.0 + double(m) * m;
  const double flip = rng.uniform() < 0.5 ? -1.0 : 1.0;
  double a = 0.0, c = 0.0;
  if (sign == MomentumSign::mixed) {
    a = rng.uniform() - 0.5;
    c = flip * (0.5 + rng.uniform());  // (1+m^2)|c| >= 1 > |a|
  } else {
    a = 1.0 + rng.uniform();
    c = flip * 0.9 * rng.uniform() * a / w;
    if (sign == MomentumSign::negative) a = -a;
  }
  return cosine_field(n_modes, a, c, m, phase);
}

GlobalResult global_existence_probability(const GlobalConfig& cfg, PhiloxStream& rng) {
  cfg.validate();
  GlobalResult res;
  res.signs.resize(cfg.n_paths);
  res.blew_up.assign(cfg.n_paths, 0);
  std::vector<std::uint8_t> unstable(cfg.n_paths, 0);
  parallel_for(cfg.n_paths, cfg.threads, [&](int p) {
    auto stream = rng.split(static_cast<std::uint64_t>(p));
    const double draw = stream.uniform();
    const MomentumSign sign =
        draw < cfg.p ? MomentumSign::positive : (draw < cfg.p + cfg.q ? MomentumSign::negative : MomentumSign::mixed);
    res.signs[p] = sign;
    const auto u0 = sample_initial_data(sign, cfg.n_modes, stream);
    const auto path = sample_beta_path(cfg.b, cfg.k, cfg.T, cfg.dt, stream);
    TransportOptions o;
    o.max_ds = cfg.max_ds;
    o.blowup_threshold = cfg.blowup_threshold;
    o.stride = static_cast<int>(path.times.size());
    const auto v = solve_transport(u0, cfg.k, path, o);
    res.blew_up[p] = v.status == PathStatus::blew_up;
    unstable[p] = v.status == PathStatus::unstable;
  });
  std::vector<std::uint8_t> survived(cfg.n_paths);
  for (int p = 0; p < cfg.n_paths; ++p) {
    survived[p] = !res.blew_up[p] && !unstable[p];
    if (unstable[p]) res.unstable_paths.push_back(p);
    if (!survived[p] && res.signs[p] != MomentumSign::mixed) ++res.violations;
  }
  res.stats = lower_bound_stats(std::move(survived), cfg.p + cfg.q);
  return res;
}

// ---------------------------------------------------------------------------

LilReport lil_diagnostic(const TimeProfile& b, const DriftProfile& a, const std::vector<double>& times, int n_paths,
                         PhiloxStream& rng) {
  if (n_paths < 1) throw InvalidParameter("n_paths must be ≥ 1");
  if (times.empty()) throw InvalidParameter("T-list must not be empty");
  b.require_admissible();
  std::vector<double> ts = times;
  std::sort(ts.begin(), ts.end());
  if (!(ts.front() > std::numbers::e)) throw InvalidParameter("every t must exceed e so that log log t > 0");

  LilReport rep;
  rep.times = ts;
  const std::size_t nt = ts.size();
  std::vector<std::vector<double>> z(nt, std::vector<double>(n_paths));
  std::vector<std::vector<double>> logx(nt, std::vector<double>(n_paths));
  for (int p = 0; p < n_paths; ++p) {
    auto stream = rng.split(static_cast<std::uint64_t>(p));
    double B = 0.0, G = 0.0, t_prev = 0.0, phi_prev = 0.0;
    for (std::size_t j = 0; j < nt; ++j) {
      const double phi = b.integral_sq(ts[j]);
      B += std::sqrt(ts[j] - t_prev) * stream.normal();
      G += std::sqrt(phi - phi_prev) * stream.normal();
      z[j][p] = B / std::sqrt(2.0 * ts[j] * std::log(std::log(ts[j])));
      logx[j][p] = G + a.lambda * phi + a.constant * ts[j] - 0.5 * phi;
      t_prev = ts[j];
      phi_prev = phi;
    }
  }
  for (std::size_t j = 0; j < nt; ++j) {
    std::vector<double> qs;
    for (double q : {0.05, 0.25, 0.5, 0.75, 0.95}) qs.push_back(quantile(z[j], q));
    rep.quantiles.push_back(std::move(qs));
    rep.sample_max.push_back(*std::max_element(z[j].begin(), z[j].end()));
    rep.median_X.push_back(std::exp(quantile(logx[j], 0.5)));
  }
  // phi^{-1}(t) at a far time, by bisection on the closed-form integral.
  const double t_far = 1e12;
  double lo = 0.0, hi = 1.0;
  while (b.integral_sq(hi) < t_far) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (b.integral_sq(mid) < t_far ? lo : hi) = mid;
  }
  const double inv = 0.5 * (lo + hi);
  const double drift_part = a.lambda * t_far + a.constant * inv - 0.5 * t_far;
  rep.condition_ratio = drift_part / std::sqrt(2.0 * t_far * std::log(std::log(t_far)));
  rep.condition_I = rep.condition_ratio < -1.0;
  rep.condition_II = rep.condition_ratio > 1.0;
  return rep;
}

}  // namespace sgch
