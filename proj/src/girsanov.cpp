#include "sgch/girsanov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sgch/dynamics.hpp"

namespace sgch {
namespace {

double interp(std::span<const double> xs, std::span<const double> ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - xs.begin());
  const double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return ys[i - 1] + w * (ys[i] - ys[i - 1]);
}

double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

std::vector<std::size_t> report_indices(const GirsanovPath& path, int stride) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < path.times.size(); i += static_cast<std::size_t>(stride)) idx.push_back(i);
  if (idx.back() != path.times.size() - 1) idx.push_back(path.times.size() - 1);
  return idx;
}

// Joint RK4 for v, particle positions q and the running integral of
// k v^{k-1} v_x along q.  Calls `report(j, t, v, q, log_qx)` at every
// reported path index; returns the trajectory bookkeeping.
template <class Report>
VTrajectory integrate(const SpectralField& u0, int k, const GirsanovPath& path, const TransportOptions& opt,
                      std::vector<double> q, Report&& report) {
  if (k < 1) throw InvalidParameter("nonlinearity order k must be >= 1");
  if (path.times.empty()) throw InvalidInput("empty Girsanov path");
  if (path.k != k) throw InvalidInput("Girsanov clock was built for a different k");
  if (opt.stride < 1) throw InvalidParameter("stride must be >= 1");
  if (!(opt.max_ds > 0.0) || !(opt.cfl > 0.0)) throw InvalidParameter("max_ds and cfl must be > 0");
  GridSpec{u0.n_modes(), opt.oversample}.validate();

  VTrajectory out;
  out.k = k;
  out.options = opt;
  const int n = u0.n_modes();
  const int m = opt.oversample * n;
  const std::size_t np = q.size();
  std::vector<double> log_qx(np, 0.0);
  SpectralField v = u0;

  struct Stage {
    SpectralField dv;
    std::vector<double> dq;
  };
  auto rhs = [&](const SpectralField& vs, const std::vector<double>& qs) {
    Stage st{drift(vs, k), std::vector<double>(qs.size())};
    st.dv *= -1.0;
    for (std::size_t i = 0; i < qs.size(); ++i) st.dq[i] = ipow(evaluate(vs, qs[i]), k);
    return st;
  };
  auto slope_rate = [&](const SpectralField& vs, std::vector<double>& g) {
    for (std::size_t i = 0; i < np; ++i) {
      g[i] = k * ipow(evaluate(vs, q[i]), k - 1) * evaluate_derivative(vs, q[i]);
    }
  };
  std::vector<double> g_prev(np), g_next(np);
  if (np) slope_rate(v, g_prev);

  double sup_v = 0.0, w1 = 0.0;
  auto measure = [&] {
    const auto w = to_physical(v, m);
    const auto wx = to_physical(derivative(v), m);
    sup_v = 0.0;
    double sup_x = 0.0;
    for (int j = 0; j < m; ++j) {
      sup_v = std::max(sup_v, std::abs(w[j]));
      sup_x = std::max(sup_x, std::abs(wx[j]));
    }
    w1 = std::max(sup_v, sup_x);
  };
  measure();

  auto record = [&](std::size_t r) {
    out.times.push_back(path.times[r]);
    out.clock.push_back(path.S[r]);
    out.v.push_back(v);
    out.w1inf_norm.push_back(w1);
    report(path.times[r], v, q, log_qx);
  };

  const auto idx = report_indices(path, opt.stride);
  record(0);
  if (w1 >= opt.blowup_threshold) {
    out.status = PathStatus::blew_up;
    out.blowup_time = 0.0;
    return out;
  }
  double s = 0.0;
  for (std::size_t ri = 1; ri < idx.size(); ++ri) {
    const double target = path.S[idx[ri]];
    while (s < target) {
      const double speed = (n / 2) * ipow(sup_v, k);
      double ds = std::min(opt.max_ds, speed > 0.0 ? opt.cfl / speed : opt.max_ds);
      const bool last = s + ds >= target * (1.0 - 1e-14);
      if (last) ds = target - s;
      const auto a = rhs(v, q);
      std::vector<double> qs(np);
      for (std::size_t i = 0; i < np; ++i) qs[i] = q[i] + 0.5 * ds * a.dq[i];
      const auto b = rhs(v + (0.5 * ds) * a.dv, qs);
      for (std::size_t i = 0; i < np; ++i) qs[i] = q[i] + 0.5 * ds * b.dq[i];
      const auto c = rhs(v + (0.5 * ds) * b.dv, qs);
      for (std::size_t i = 0; i < np; ++i) qs[i] = q[i] + ds * c.dq[i];
      const auto d = rhs(v + ds * c.dv, qs);
      v.axpy(ds / 6.0, a.dv).axpy(ds / 3.0, b.dv).axpy(ds / 3.0, c.dv).axpy(ds / 6.0, d.dv);
      for (std::size_t i = 0; i < np; ++i) {
        q[i] += ds / 6.0 * (a.dq[i] + 2.0 * b.dq[i] + 2.0 * c.dq[i] + d.dq[i]);
      }
      s = last ? target : s + ds;
      ++out.substeps;
      if (!v.is_finite()) {
        out.status = PathStatus::unstable;
        out.message = "non-finite v at s = " + std::to_string(s);
        return out;
      }
      if (np) {
        slope_rate(v, g_next);
        for (std::size_t i = 0; i < np; ++i) log_qx[i] += 0.5 * ds * (g_prev[i] + g_next[i]);
        std::swap(g_prev, g_next);
      }
      measure();
      if (w1 >= opt.blowup_threshold) {
        out.status = PathStatus::blew_up;
        out.blowup_time = path.time_at(s);
        out.times.push_back(*out.blowup_time);
        out.clock.push_back(s);
        out.v.push_back(v);
        out.w1inf_norm.push_back(w1);
        return out;
      }
    }
    record(idx[ri]);
  }
  return out;
}

}  // namespace

double GirsanovPath::clock_at(double t) const { return interp(times, S, t); }
double GirsanovPath::time_at(double s) const { return interp(S, times, s); }
double GirsanovPath::beta_at(double t) const { return interp(times, beta, t); }

GirsanovPath sample_beta_path(const TimeProfile& b, int k, double T, double dt, PhiloxStream& rng) {
  if (k < 1) throw InvalidParameter("nonlinearity order k must be >= 1");
  if (!(dt > 0.0) || !(T > 0.0)) throw InvalidParameter("T and dt must be > 0");
  const int n = static_cast<int>(std::ceil(T / dt - 1e-9));
  const double h = T / n;
  const double lo = b.lower_sq(), hi = b.upper_sq();
  GirsanovPath p;
  p.k = k;
  p.dt = h;
  p.times.resize(n + 1);
  p.W.resize(n + 1);
  p.beta.resize(n + 1);
  p.S.resize(n + 1);
  p.beta[0] = 1.0;
  double log_beta = 0.0;
  const double sq = std::sqrt(h);
  for (int i = 0; i <= n; ++i) {
    const double t = i * h;
    const double bt = b(t);
    if (bt * bt < lo * (1.0 - 1e-12) || bt * bt > hi * (1.0 + 1e-12)) {
      throw InvalidParameter("b(t)^2 left [b_*, b^*] on the grid");
    }
    p.times[i] = t;
    if (i == 0) continue;
    const double tp = (i - 1) * h;
    const double bp = b(tp);
    const double dw = sq * rng.normal();
    p.W[i] = p.W[i - 1] + dw;
    log_beta += bp * dw - 0.25 * (bp * bp + bt * bt) * h;
    p.beta[i] = std::exp(log_beta);
    p.S[i] = p.S[i - 1] + 0.5 * h * (ipow(p.beta[i - 1], k) + ipow(p.beta[i], k));
  }
  return p;
}

GirsanovPath deterministic_path(int k, double T, double dt) {
  PhiloxStream unused(0, 0);
  return sample_beta_path(TimeProfile::constant(0.0), k, T, dt, unused);
}

VTrajectory solve_transport(const SpectralField& u0, int k, const GirsanovPath& path,
                            const TransportOptions& options) {
  return integrate(u0, k, path, options, {}, [](double, const SpectralField&, const auto&, const auto&) {});
}

UTrajectory reconstruct_u(const VTrajectory& v, const GirsanovPath& path) {
  UTrajectory u;
  u.times = v.times;
  for (std::size_t j = 0; j < v.v.size(); ++j) u.u.push_back(path.beta_at(v.times[j]) * v.v[j]);
  return u;
}

Characteristics characteristics(const VTrajectory& v, const GirsanovPath& path, std::span<const double> x0) {
  if (v.v.empty()) throw InvalidInput("empty v trajectory");
  Characteristics ch;
  integrate(v.v.front(), v.k, path, v.options, std::vector<double>(x0.begin(), x0.end()),
            [&](double t, const SpectralField&, const std::vector<double>& q, const std::vector<double>& log_qx) {
              ch.times.push_back(t);
              ch.q.push_back(q);
              std::vector<double> qx(log_qx.size());
              for (std::size_t i = 0; i < qx.size(); ++i) qx[i] = std::exp(log_qx[i]);
              ch.q_x.push_back(std::move(qx));
            });
  return ch;
}

MomentumTrace momentum_trace(const VTrajectory& v) {
  MomentumTrace tr;
  tr.times = v.times;
  for (const auto& f : v.v) {
    auto V = helmholtz(f);
    const auto [lo, hi] = grid_min_max(V, v.options.oversample);
    tr.min_V.push_back(lo);
    tr.max_V.push_back(hi);
    tr.V.push_back(std::move(V));
  }
  return tr;
}

double slope_excess(const VTrajectory& v) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& f : v.v) {
    worst = std::max(worst, sup_norm(derivative(f), v.options.oversample) - sup_norm(f, v.options.oversample));
  }
  return worst;
}

double one_sided_identity_error(const VTrajectory& v, std::span<const double> xs) {
  double worst = 0.0;
  for (const auto& f : v.v) {
    const auto kern = one_sided_kernel_plus(helmholtz(f), xs);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      worst = std::max(worst, std::abs(evaluate(f, xs[i]) + evaluate_derivative(f, xs[i]) - kern[i]));
    }
  }
  return worst;
}

}  // namespace sgch
