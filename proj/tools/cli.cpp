#include "cli.hpp"

#include <toml.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>
#include <set>
#include <sstream>

#include "sgch/errors.hpp"
#include "sgch/experiments.hpp"
#include "sgch/fields.hpp"
#include "sgch/girsanov.hpp"
#include "sgch/integrator.hpp"

namespace sgch::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr double kDivergenceSlopeTol = 0.05;
constexpr double kRateTol = 0.15;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string indexed(const std::string& stem, int i, const std::string& ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d", i);
  return stem + "_" + buf + ext;
}

// Reads keys from one TOML table, records every resolved value (defaults
// included) in `echo`, and rejects keys nobody asked for.
class Section {
 public:
  Section(const toml::table* table, std::string name, Json& parent)
      : table_(table), name_(std::move(name)), parent_(parent) {}

  double number(const std::string& key, double fallback) {
    double v = fallback;
    if (const auto* n = find(key)) {
      if (!n->is_number()) throw InvalidParameter(where(key) + " must be a number");
      v = *n->value<double>();
      if (!std::isfinite(v)) throw InvalidParameter(where(key) + " must be finite");
    }
    echo_[key] = v;
    return v;
  }

  std::optional<double> optional_number(const std::string& key) {
    if (!find(key)) {
      echo_[key] = nullptr;
      return std::nullopt;
    }
    return number(key, 0.0);
  }

  long long integer(const std::string& key, long long fallback) {
    long long v = fallback;
    if (const auto* n = find(key)) {
      if (!n->is_integer()) throw InvalidParameter(where(key) + " must be an integer");
      v = *n->value<std::int64_t>();
    }
    echo_[key] = v;
    return v;
  }

  int small_integer(const std::string& key, int fallback) {
    const long long v = integer(key, fallback);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
      throw InvalidParameter(where(key) + " is out of range");
    }
    return static_cast<int>(v);
  }

  std::string string(const std::string& key, const std::string& fallback) {
    std::string v = fallback;
    if (const auto* n = find(key)) {
      if (!n->is_string()) throw InvalidParameter(where(key) + " must be a string");
      v = *n->value<std::string>();
    }
    echo_[key] = v;
    return v;
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (const auto* n = find(key)) {
      const auto* arr = n->as_array();
      if (!arr) throw InvalidParameter(where(key) + " must be an array of numbers");
      fallback.clear();
      for (const auto& e : *arr) {
        if (!e.is_number()) throw InvalidParameter(where(key) + " must be an array of numbers");
        fallback.push_back(*e.value<double>());
      }
    }
    echo_[key] = fallback;
    return fallback;
  }

  std::vector<int> integers(const std::string& key, std::vector<int> fallback) {
    if (const auto* n = find(key)) {
      const auto* arr = n->as_array();
      if (!arr) throw InvalidParameter(where(key) + " must be an array of integers");
      fallback.clear();
      for (const auto& e : *arr) {
        if (!e.is_integer()) throw InvalidParameter(where(key) + " must be an array of integers");
        fallback.push_back(static_cast<int>(*e.value<std::int64_t>()));
      }
    }
    echo_[key] = fallback;
    return fallback;
  }

  /// Rejects unread keys and copies the resolved values into the parent.
  void finish() const {
    if (table_ && !name_.empty()) {
      for (const auto& [key, node] : *table_) {
        const std::string k(key.str());
        if (!used_.contains(k)) throw InvalidParameter("unknown key '" + where(k) + "'");
      }
    }
    if (name_.empty()) {
      for (const auto& [k, v] : echo_.items()) parent_[k] = v;
    } else {
      parent_[name_] = echo_;
    }
  }

 private:
  const toml::node* find(const std::string& key) {
    used_.insert(key);
    return table_ ? table_->get(key) : nullptr;
  }
  std::string where(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

  const toml::table* table_;
  std::string name_;
  Json& parent_;
  Json echo_ = Json::object();
  std::set<std::string> used_;
};

struct Context {
  std::uint64_t seed = 0;
  int threads = 1;
  fs::path out;
  std::ostream* log = nullptr;
  Json results = Json::object();
  std::vector<Verdict> verdicts;
  std::optional<std::string> unstable;

  void verdict(std::string name, bool pass, std::string detail) {
    *log << (pass ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
    verdicts.push_back({std::move(name), pass, std::move(detail)});
  }
  void mark_unstable(int path, const std::string& what) {
    if (!unstable) unstable = "numerical instability on path " + std::to_string(path) + ": " + what;
  }
};

// A parsed experiment: the work to run, bound to its resolved config.
using Job = std::function<void(Context&)>;

const toml::table* subtable(const toml::table& root, const std::string& name) {
  const auto* n = root.get(name);
  if (!n) return nullptr;
  const auto* t = n->as_table();
  if (!t) throw InvalidParameter("[" + name + "] must be a table");
  return t;
}

TimeProfile parse_profile(Section& sec, double amplitude) {
  const double a = sec.number("amplitude", amplitude);
  const double m = sec.number("modulation", 0.0);
  const double w = sec.number("frequency", 0.0);
  return TimeProfile(a, m, w);
}

enum class NoiseUse { solver, instability, divergence };

NoiseModel parse_noise(Section& sec, NoiseUse use, int k) {
  const std::string kind = sec.string("kind", "zero");
  if (kind == "zero") return NoiseModel::none();
  if (kind == "f_bounded") return NoiseModel::f_bounded(k);
  if (kind == "linear" && use == NoiseUse::solver) return NoiseModel::linear(parse_profile(sec, 1.0));
  if (kind == "diagonal" && use != NoiseUse::instability) return NoiseModel::diagonal(sec.numbers("sigma", {}));
  throw InvalidParameter("noise.kind '" + kind + "' is not available for this experiment");
}

SpectralField parse_initial(Section& sec, int n_modes) {
  const double mean = sec.number("mean", 0.0);
  const auto c = sec.numbers("cos", {1.0});
  const auto s = sec.numbers("sin", {});
  const std::size_t band = std::max(c.size(), s.size());
  if (static_cast<int>(band) >= n_modes / 2) throw InvalidParameter("initial data modes must stay below N/2");
  SpectralField u(n_modes);
  u.set_coeff(0, mean * std::sqrt(kTwoPi));
  // a cos(mx) + b sin(mx) = Re((a - i b) e^{imx})
  for (std::size_t m = 1; m <= band; ++m) {
    const double a = m <= c.size() ? c[m - 1] : 0.0;
    const double b = m <= s.size() ? s[m - 1] : 0.0;
    u.set_coeff(static_cast<int>(m), Complex{a, -b} * std::sqrt(kTwoPi) / 2.0);
  }
  return u;
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidParameter("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json stats_json(const EnsembleStats& st) {
  return Json{{"n_paths", st.n_paths}, {"p_hat", st.p_hat},   {"std_error", st.std_error},
              {"bound", st.bound},     {"margin", st.margin}, {"pass", st.pass}};
}

std::string stats_detail(const EnsembleStats& st) {
  return "p_hat " + fmt("%.4f", st.p_hat) + " vs bound " + fmt("%.4f", st.bound) + " - 3 se (se " +
         fmt("%.4f", st.std_error) + ", M " + std::to_string(st.n_paths) + ")";
}

// ---------------------------------------------------------------------------

Job parse_simulate(const toml::table& root, Json& echo) {
  Section sol(subtable(root, "solver"), "solver", echo);
  SolverConfig cfg;
  cfg.k = sol.small_integer("k", cfg.k);
  cfg.s = sol.number("s", cfg.s);
  cfg.n_modes = sol.small_integer("n_modes", cfg.n_modes);
  cfg.oversample = sol.small_integer("oversample", cfg.oversample);
  cfg.dt = sol.number("dt", cfg.dt);
  cfg.T = sol.number("T", cfg.T);
  cfg.cutoff_R = sol.optional_number("cutoff_R");
  cfg.mollifier_eps = sol.optional_number("mollifier_eps");
  cfg.blowup_threshold = sol.number("blowup_threshold", cfg.blowup_threshold);
  cfg.exit_R = sol.optional_number("exit_R");
  cfg.scheme = drift_scheme_from_string(sol.string("scheme", to_string(cfg.scheme)));
  cfg.cfl_limit = sol.number("cfl_limit", cfg.cfl_limit);
  cfg.snapshot_stride = sol.small_integer("snapshot_stride", cfg.snapshot_stride);
  const int n_paths = sol.small_integer("n_paths", 1);
  sol.finish();

  Section noise(subtable(root, "noise"), "noise", echo);
  cfg.noise = parse_noise(noise, NoiseUse::solver, cfg.k);
  noise.finish();

  if (cfg.n_modes < 4 || cfg.n_modes % 2) throw InvalidParameter("solver.n_modes must be even and >= 4");
  Section init(subtable(root, "initial"), "initial", echo);
  const SpectralField u0 = parse_initial(init, cfg.n_modes);
  init.finish();
  cfg.validate();
  if (n_paths < 1) throw InvalidParameter("n_paths must be ≥ 1");

  return [cfg, u0, n_paths](Context& ctx) mutable {
    cfg.seed = ctx.seed;
    const PhiloxStream root(ctx.seed, 0);
    std::vector<TrajectoryRecord> rec(n_paths);
    parallel_for(n_paths, ctx.threads, [&](int p) {
      auto rng = root.split(static_cast<std::uint64_t>(p));
      rec[p] = simulate_path(cfg, u0, rng);
    });
    Json paths = Json::array();
    for (int p = 0; p < n_paths; ++p) {
      const auto& r = rec[p];
      write_trajectory_csv(ctx.out / indexed("trajectory", p, ".csv"), r);
      write_snapshots(ctx.out / indexed("snapshots", p, ".bin"), r.snapshot_times, r.snapshots);
      paths.push_back({{"path", p},
                       {"status", to_string(r.status)},
                       {"exit_time", optional_json(r.exit_time)},
                       {"blowup_time", optional_json(r.blowup_time)},
                       {"final_time", r.times.empty() ? 0.0 : r.times.back()},
                       {"final_Hs_norm", r.hs_norm.empty() ? 0.0 : r.hs_norm.back()},
                       {"message", r.message}});
      if (r.status == PathStatus::unstable) ctx.mark_unstable(p, r.message);
    }
    ctx.results["paths"] = paths;
  };
}

Job parse_girsanov(const toml::table& root, Json& echo) {
  Section sol(subtable(root, "solver"), "solver", echo);
  const int k = sol.small_integer("k", 1);
  const double s = sol.number("s", 2.0);
  const int n_modes = sol.small_integer("n_modes", 256);
  const double dt = sol.number("dt", 1e-3);
  const double T = sol.number("T", 1.0);
  const int n_paths = sol.small_integer("n_paths", 1);
  sol.finish();

  Section tr(subtable(root, "transport"), "transport", echo);
  TransportOptions opt;
  opt.oversample = tr.small_integer("oversample", opt.oversample);
  opt.max_ds = tr.number("max_ds", opt.max_ds);
  opt.cfl = tr.number("cfl", opt.cfl);
  opt.stride = tr.small_integer("stride", opt.stride);
  opt.blowup_threshold = tr.number("blowup_threshold", opt.blowup_threshold);
  tr.finish();

  Section noise(subtable(root, "noise"), "noise", echo);
  const TimeProfile b = parse_profile(noise, 1.0);
  noise.finish();

  if (k < 1) throw InvalidParameter("k >= 1 violated");
  if (!(s > 1.5)) throw InvalidParameter("s > 3/2 violated");
  if (n_modes < 4 || n_modes % 2) throw InvalidParameter("solver.n_modes must be even and >= 4");
  if (!(dt > 0.0) || !(T > 0.0)) throw InvalidParameter("T and dt must be > 0");
  if (n_paths < 1) throw InvalidParameter("n_paths must be ≥ 1");
  if (opt.stride < 1 || opt.oversample < 1 || !(opt.max_ds > 0.0) || !(opt.cfl > 0.0)) {
    throw InvalidParameter("transport stride, oversample, max_ds and cfl must be positive");
  }
  if (!b.is_zero()) b.require_admissible();
  Section init(subtable(root, "initial"), "initial", echo);
  const SpectralField u0 = parse_initial(init, n_modes);
  init.finish();

  return [=](Context& ctx) {
    const PhiloxStream root(ctx.seed, 0);
    std::vector<Json> summary(n_paths);
    std::vector<std::string> unstable(n_paths);
    parallel_for(n_paths, ctx.threads, [&](int p) {
      auto rng = root.split(static_cast<std::uint64_t>(p));
      const GirsanovPath path = b.is_zero() ? deterministic_path(k, T, dt) : sample_beta_path(b, k, T, dt, rng);
      const VTrajectory v = solve_transport(u0, k, path, opt);
      const UTrajectory u = reconstruct_u(v, path);
      const MomentumTrace mt = momentum_trace(v);
      const std::size_t n = u.times.size();
      std::vector<double> hs(n), w1(n), beta(n), clock(n);
      for (std::size_t j = 0; j < n; ++j) {
        hs[j] = sobolev_norm(u.u[j], s);
        w1[j] = w1inf_norm(u.u[j], opt.oversample);
        beta[j] = path.beta_at(u.times[j]);
        clock[j] = path.clock_at(u.times[j]);
      }
      write_csv(ctx.out / indexed("girsanov", p, ".csv"), {"t", "Hs_norm", "W1inf_norm", "beta", "S"},
                {u.times, hs, w1, beta, clock});
      write_snapshots(ctx.out / indexed("snapshots", p, ".bin"), u.times, u.u);
      summary[p] = Json{{"path", p},
                        {"status", to_string(v.status)},
                        {"blowup_time", optional_json(v.blowup_time)},
                        {"final_time", n ? u.times.back() : 0.0},
                        {"final_clock", n ? clock.back() : 0.0},
                        {"final_beta", n ? beta.back() : 0.0},
                        {"min_V", *std::min_element(mt.min_V.begin(), mt.min_V.end())},
                        {"max_V", *std::max_element(mt.max_V.begin(), mt.max_V.end())},
                        {"slope_excess", slope_excess(v)},
                        {"substeps", v.substeps},
                        {"message", v.message}};
      if (v.status == PathStatus::unstable) unstable[p] = v.message;
    });
    for (int p = 0; p < n_paths; ++p) {
      if (!unstable[p].empty()) ctx.mark_unstable(p, unstable[p]);
    }
    ctx.results["paths"] = summary;
  };
}

InstabilityConfig parse_instability_section(const toml::table& root, Json& echo) {
  Section sec(subtable(root, "instability"), "instability", echo);
  InstabilityConfig c;
  c.k = sec.small_integer("k", c.k);
  c.s = sec.number("s", c.s);
  c.delta = sec.number("delta", c.delta);
  c.l = sec.small_integer("l", c.l);
  c.n_list = sec.integers("n_list", c.n_list);
  c.T = sec.number("T", c.T);
  sec.finish();
  c.validate();
  return c;
}

Job parse_instability(const toml::table& root, Json& echo) {
  const InstabilityConfig cfg = parse_instability_section(root, echo);
  Section es(subtable(root, "error"), "error", echo);
  ErrorOptions opt;
  opt.dt = es.number("dt", opt.dt);
  opt.n_paths = es.small_integer("n_paths", opt.n_paths);
  es.finish();
  Section ns(subtable(root, "noise"), "noise", echo);
  const NoiseModel noise = parse_noise(ns, NoiseUse::instability, cfg.k);
  ns.finish();
  if (opt.n_paths < 1) throw InvalidParameter("n_paths must be ≥ 1");
  if (!(opt.dt > 0.0)) throw InvalidParameter("dt must be > 0");
  const double rate = rate_exponent(cfg.k, cfg.s, cfg.delta);
  if (cfg.n_list.size() < 2) throw InvalidParameter("n_list needs at least two entries for a rate fit");

  return [=](Context& ctx) mutable {
    opt.threads = ctx.threads;
    const PhiloxStream root(ctx.seed, 0);
    std::vector<double> ns_d, err, modes;
    for (int n : cfg.n_list) {
      auto rng = root.split(static_cast<std::uint64_t>(n));
      const ErrorResult r = error_functional(cfg, n, noise, rng, opt);
      ns_d.push_back(n);
      err.push_back(r.value);
      modes.push_back(r.n_modes);
      write_csv(ctx.out / ("error_n" + std::to_string(n) + ".csv"), {"t", "E_norm"}, {r.times, r.norms});
    }
    write_csv(ctx.out / "error.csv", {"n", "n_modes", "error"}, {ns_d, modes, err});
    const LinearFit fit = loglog_fit(ns_d, err);
    ctx.results = Json{{"rate_exponent", rate},
                       {"fitted_slope", fit.slope},
                       {"fitted_intercept", fit.intercept},
                       {"slope_plus_rate", fit.slope + rate},
                       {"n", ns_d},
                       {"error", err}};
    ctx.verdict("error_rate_bound", fit.slope <= -rate + kRateTol,
                "fitted slope " + fmt("%.4f", fit.slope) + " <= -r_s + " + fmt("%.2f", kRateTol) + " with r_s " +
                    fmt("%.4f", rate));
  };
}

Job parse_divergence(const toml::table& root, Json& echo) {
  const InstabilityConfig cfg = parse_instability_section(root, echo);
  Section ds(subtable(root, "divergence"), "divergence", echo);
  DivergenceOptions opt;
  opt.dt = ds.number("dt", opt.dt);
  opt.n_paths = ds.small_integer("n_paths", opt.n_paths);
  opt.n_modes = ds.small_integer("n_modes", opt.n_modes);
  opt.gap_times = ds.numbers("gap_times", opt.gap_times);
  opt.blowup_threshold = ds.number("blowup_threshold", opt.blowup_threshold);
  ds.finish();
  Section ns(subtable(root, "noise"), "noise", echo);
  opt.noise = parse_noise(ns, NoiseUse::divergence, cfg.k);
  ns.finish();
  if (opt.n_paths < 1) throw InvalidParameter("n_paths must be ≥ 1");
  if (cfg.n_list.size() < 2) throw InvalidParameter("n_list needs at least two entries for a rate fit");

  return [=](Context& ctx) mutable {
    opt.threads = ctx.threads;
    PhiloxStream rng(ctx.seed, 0);
    const DivergenceResult r = divergence_experiment(cfg, rng, opt);
    std::vector<double> nd(r.n_list.begin(), r.n_list.end());
    write_csv(ctx.out / "initial_gap.csv", {"n", "gap"}, {nd, r.initial_gap});
    std::vector<double> pred;
    for (double t : r.gap_times) pred.push_back(predicted_gap(t));
    for (std::size_t i = 0; i < r.n_list.size(); ++i) {
      write_csv(ctx.out / ("gap_n" + std::to_string(r.n_list[i]) + ".csv"),
                {"t", "simulated_gap", "approx_gap", "predicted_gap"},
                {r.gap_times, r.simulated_gap[i], r.approx_gap[i], pred});
    }
    ctx.results = Json{{"l_pair", {r.l_pair.first, r.l_pair.second}},
                       {"n", r.n_list},
                       {"initial_gap", r.initial_gap},
                       {"initial_slope", r.initial_slope},
                       {"gap_times", r.gap_times},
                       {"simulated_gap", r.simulated_gap},
                       {"approx_gap", r.approx_gap},
                       {"excluded_paths", r.excluded_paths}};
    const double expected = -1.0 / cfg.k;
    ctx.verdict("initial_gap_vanishes", std::abs(r.initial_slope - expected) <= kDivergenceSlopeTol,
                "slope " + fmt("%.4f", r.initial_slope) + " vs " + fmt("%.4f", expected) + " +- " +
                    fmt("%.2f", kDivergenceSlopeTol));
    // Check at the positive gap time closest to t = 1, for the largest n.
    std::optional<std::size_t> jt;
    for (std::size_t j = 0; j < r.gap_times.size(); ++j) {
      if (r.gap_times[j] <= 0.0) continue;
      if (!jt || std::abs(r.gap_times[j] - 1.0) < std::abs(r.gap_times[*jt] - 1.0)) jt = j;
    }
    if (jt) {
      const double sim = r.simulated_gap.back()[*jt];
      const double ref = r.approx_gap.back()[*jt];
      ctx.verdict("gap_persists", sim >= 0.5 * ref,
                  "gap " + fmt("%.4f", sim) + " >= 0.5 * " + fmt("%.4f", ref) + " at t = " +
                      fmt("%.3g", r.gap_times[*jt]) + ", n = " + std::to_string(r.n_list.back()));
    }
  };
}

Job parse_exit(const toml::table& root, Json& echo) {
  Section es(subtable(root, "exit"), "exit", echo);
  const double lambda = es.number("lambda", 0.0);
  const auto R = es.numbers("R", {2.0, 4.0, 8.0});
  ExitOptions opt;
  opt.T = es.number("T", opt.T);
  opt.dt = es.number("dt", opt.dt);
  opt.n_paths = es.small_integer("n_paths", opt.n_paths);
  es.finish();
  Section ns(subtable(root, "noise"), "noise", echo);
  const TimeProfile b = parse_profile(ns, 1.0);
  ns.finish();
  b.require_admissible();
  if (opt.n_paths < 1) throw InvalidParameter("n_paths must be ≥ 1");
  if (R.empty()) throw InvalidParameter("at least one barrier R is needed");
  for (double r : R) exit_survival_bound(lambda, r);

  return [=](Context& ctx) mutable {
    opt.threads = ctx.threads;
    PhiloxStream rng(ctx.seed, 0);
    const ExitResult r = exit_probability_mart(b, lambda, R, rng, opt);
    std::vector<double> p, se, bound;
    Json rows = Json::array();
    for (std::size_t j = 0; j < r.R.size(); ++j) {
      const auto& st = r.survival[j];
      p.push_back(st.p_hat);
      se.push_back(st.std_error);
      bound.push_back(st.bound);
      Json row = stats_json(st);
      row["R"] = r.R[j];
      if (lambda == 0.0) row["exact"] = 1.0 - 1.0 / r.R[j];
      rows.push_back(row);
      ctx.verdict("survival_R" + fmt("%g", r.R[j]), st.pass, stats_detail(st));
    }
    write_csv(ctx.out / "survival.csv", {"R", "p_hat", "std_error", "bound"}, {r.R, p, se, bound});
    ctx.results["survival"] = rows;
  };
}

Job parse_decay(const toml::table& root, Json& echo) {
  Section ds(subtable(root, "decay"), "decay", echo);
  DecayConfig c;
  c.k = ds.small_integer("k", c.k);
  c.s = ds.number("s", c.s);
  c.lambda1 = ds.number("lambda1", c.lambda1);
  c.lambda2 = ds.number("lambda2", c.lambda2);
  c.R = ds.number("R", c.R);
  c.u0_scale = ds.number("u0_scale", c.u0_scale);
  c.u0_mode = ds.small_integer("u0_mode", c.u0_mode);
  c.T = ds.number("T", c.T);
  c.dt = ds.number("dt", c.dt);
  c.n_modes = ds.small_integer("n_modes", c.n_modes);
  c.n_paths = ds.small_integer("n_paths", c.n_paths);
  c.calibration_samples = ds.small_integer("calibration_samples", c.calibration_samples);
  c.scheme = drift_scheme_from_string(ds.string("scheme", to_string(c.scheme)));
  ds.finish();
  Section ns(subtable(root, "noise"), "noise", echo);
  c.b = parse_profile(ns, 1.0);
  ns.finish();
  c.validate();

  return [c](Context& ctx) mutable {
    c.threads = ctx.threads;
    PhiloxStream rng(ctx.seed, 0);
    const DecayResult r = decay_probability(c, rng);
    std::vector<double> idx, out;
    for (int p = 0; p < r.stats.n_paths; ++p) {
      idx.push_back(p);
      out.push_back(r.stats.outcomes[p]);
    }
    write_csv(ctx.out / "outcomes.csv", {"path", "decayed"}, {idx, out});
    ctx.results = Json{{"K", r.K},
                       {"sampled_K", r.sampled_K},
                       {"C", r.C},
                       {"u0_norm", r.u0_norm},
                       {"envelope0", r.envelope0},
                       {"rate", r.rate},
                       {"stats", stats_json(r.stats)},
                       {"unstable_paths", r.unstable_paths}};
    for (int p : r.unstable_paths) ctx.mark_unstable(p, "CFL guard tripped");
    ctx.verdict("decay_probability", r.stats.pass, stats_detail(r.stats));
  };
}

Job parse_global(const toml::table& root, Json& echo) {
  Section gs(subtable(root, "global"), "global", echo);
  GlobalConfig c;
  c.k = gs.small_integer("k", c.k);
  c.s = gs.number("s", c.s);
  c.p = gs.number("p", c.p);
  c.q = gs.number("q", c.q);
  c.T = gs.number("T", c.T);
  c.dt = gs.number("dt", c.dt);
  c.n_modes = gs.small_integer("n_modes", c.n_modes);
  c.n_paths = gs.small_integer("n_paths", c.n_paths);
  c.blowup_threshold = gs.number("blowup_threshold", c.blowup_threshold);
  c.max_ds = gs.number("max_ds", c.max_ds);
  gs.finish();
  Section ns(subtable(root, "noise"), "noise", echo);
  c.b = parse_profile(ns, c.b.amplitude());
  ns.finish();
  c.validate();

  return [c](Context& ctx) mutable {
    c.threads = ctx.threads;
    PhiloxStream rng(ctx.seed, 0);
    const GlobalResult r = global_existence_probability(c, rng);
    std::vector<double> idx, sign, blew;
    Json signs = Json::array();
    for (std::size_t p = 0; p < r.signs.size(); ++p) {
      idx.push_back(static_cast<double>(p));
      sign.push_back(r.signs[p] == MomentumSign::positive ? 1.0 : r.signs[p] == MomentumSign::negative ? -1.0 : 0.0);
      blew.push_back(r.blew_up[p]);
      signs.push_back(to_string(r.signs[p]));
    }
    write_csv(ctx.out / "paths.csv", {"path", "sign", "blew_up"}, {idx, sign, blew});
    ctx.results = Json{{"signs", signs},
                       {"violations", r.violations},
                       {"stats", stats_json(r.stats)},
                       {"unstable_paths", r.unstable_paths}};
    for (int p : r.unstable_paths) ctx.mark_unstable(p, "transport solver unstable");
    ctx.verdict("sign_definite_global", r.violations == 0,
                std::to_string(r.violations) + " blow-ups among sign-definite paths");
    ctx.verdict("global_probability", r.stats.pass, stats_detail(r.stats));
  };
}

Job parse_lil(const toml::table& root, Json& echo) {
  Section ls(subtable(root, "lil"), "lil", echo);
  DriftProfile a;
  a.lambda = ls.number("lambda", 0.0);
  a.constant = ls.number("constant", 0.0);
  const auto times = ls.numbers("times", {1e2, 1e3, 1e4});
  const int n_paths = ls.small_integer("n_paths", 1000);
  ls.finish();
  Section ns(subtable(root, "noise"), "noise", echo);
  const TimeProfile b = parse_profile(ns, 1.0);
  ns.finish();
  b.require_admissible();
  if (n_paths < 1) throw InvalidParameter("n_paths must be ≥ 1");
  for (double t : times) {
    if (!(t > std::exp(1.0))) throw InvalidParameter("lil times must satisfy t > e");
  }

  return [=](Context& ctx) {
    PhiloxStream rng(ctx.seed, 0);
    const LilReport r = lil_diagnostic(b, a, times, n_paths, rng);
    std::vector<std::vector<double>> q(5);
    for (const auto& row : r.quantiles) {
      for (int i = 0; i < 5; ++i) q[i].push_back(row[i]);
    }
    write_csv(ctx.out / "lil.csv", {"t", "q05", "q25", "q50", "q75", "q95", "max", "median_X"},
              {r.times, q[0], q[1], q[2], q[3], q[4], r.sample_max, r.median_X});
    ctx.results = Json{{"times", r.times},
                       {"quantiles", r.quantiles},
                       {"sample_max", r.sample_max},
                       {"median_X", r.median_X},
                       {"condition_ratio", r.condition_ratio},
                       {"condition_I", r.condition_I},
                       {"condition_II", r.condition_II}};
    *ctx.log << "INFO lil: condition ratio " << fmt("%.4f", r.condition_ratio)
             << (r.condition_I ? " (X -> 0 regime)" : r.condition_II ? " (X -> inf regime)" : " (neither regime)")
             << '\n';
  };
}

struct Kind {
  std::string name;
  std::vector<std::string> sections;
  Job (*parse)(const toml::table&, Json&);
};

const std::vector<Kind>& kinds() {
  static const std::vector<Kind> k{
      {"simulate", {"solver", "noise", "initial"}, parse_simulate},
      {"girsanov", {"solver", "transport", "noise", "initial"}, parse_girsanov},
      {"instability", {"instability", "error", "noise"}, parse_instability},
      {"divergence", {"instability", "divergence", "noise"}, parse_divergence},
      {"exit_mc", {"exit", "noise"}, parse_exit},
      {"decay_mc", {"decay", "noise"}, parse_decay},
      {"global_mc", {"global", "noise"}, parse_global},
      {"lil", {"lil", "noise"}, parse_lil},
  };
  return k;
}

std::optional<long long> parse_long(const char* text) {
  if (!text || !*text) return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(text, &end, 10);
  if (errno || *end != '\0') return std::nullopt;
  return v;
}

RunResult execute(const toml::table& root, const Overrides& ov, std::ostream& log) {
  RunResult result;
  Json echo = Json::object();
  Job job;
  Context ctx;
  ctx.log = &log;
  try {
    Section top(&root, "", echo);
    const std::string name = top.string("experiment", "");
    const auto it = std::find_if(kinds().begin(), kinds().end(), [&](const Kind& k) { return k.name == name; });
    if (it == kinds().end()) {
      throw InvalidParameter(name.empty() ? "missing key 'experiment'" : "unknown experiment kind '" + name + "'");
    }
    const long long seed = top.integer("seed", 0);
    if (seed < 0) throw InvalidParameter("seed must be >= 0");
    const int threads = top.small_integer("threads", 1);
    const std::string output = top.string("output", "sgch_out");
    Json head = Json::object();
    head["experiment"] = name;
    // Sections are parsed by the kind; anything else at top level is unknown.
    Json body = Json::object();
    job = it->parse(root, body);
    for (const auto& [key, node] : root) {
      const std::string k(key.str());
      if (k == "experiment" || k == "seed" || k == "threads" || k == "output") continue;
      if (std::find(it->sections.begin(), it->sections.end(), k) == it->sections.end()) {
        throw InvalidParameter("unknown key '" + k + "'");
      }
    }
    ctx.seed = ov.seed.value_or(static_cast<std::uint64_t>(seed));
    ctx.threads = ov.threads.value_or(threads);
    if (ctx.threads < 0) throw InvalidParameter("threads must be >= 0");
    ctx.out = ov.out.value_or(fs::path(output));
    head["seed"] = ctx.seed;
    for (auto& [k, v] : body.items()) head[k] = v;
    echo = std::move(head);
  } catch (const std::invalid_argument& e) {
    result.status = Status::invalid_config;
    result.message = std::string("invalid config: ") + e.what();
    return result;
  }

  std::error_code ec;
  fs::create_directories(ctx.out, ec);
  if (ec) {
    result.status = Status::invalid_config;
    result.message = "invalid config: cannot create output directory " + ctx.out.string() + ": " + ec.message();
    return result;
  }
  result.output_dir = ctx.out;

  try {
    job(ctx);
  } catch (const std::invalid_argument& e) {
    result.status = Status::invalid_config;
    result.message = std::string("invalid config: ") + e.what();
    return result;
  }

  Json verdicts = Json::array();
  bool all = true;
  for (const auto& v : ctx.verdicts) {
    verdicts.push_back({{"check", v.name}, {"pass", v.pass}, {"detail", v.detail}});
    all = all && v.pass;
  }
  if (ctx.unstable) {
    result.status = Status::unstable;
    result.message = *ctx.unstable;
  } else if (!all) {
    result.status = Status::bound_failed;
    result.message = "bound check failed";
  }
  Json summary{{"experiment", echo["experiment"]},
               {"config", echo},
               {"results", ctx.results},
               {"verdicts", verdicts},
               {"status", static_cast<int>(result.status)}};
  write_json(ctx.out / "summary.json", summary);
  result.verdicts = std::move(ctx.verdicts);
  return result;
}

RunResult parse_failure(const toml::parse_error& e) {
  RunResult r;
  r.status = Status::parse_error;
  const auto& src = e.source();
  std::ostringstream os;
  os << "parse error: " << (src.path ? *src.path : std::string("<config>")) << ':' << src.begin.line << ':'
     << src.begin.column << ": " << e.description();
  r.message = os.str();
  return r;
}

}  // namespace

Overrides environment_overrides(std::ostream& log) {
  Overrides o;
  if (const char* s = std::getenv("SGCH_SEED")) {
    if (const auto v = parse_long(s); v && *v >= 0) {
      o.seed = static_cast<std::uint64_t>(*v);
    } else {
      log << "warning: ignoring SGCH_SEED='" << s << "'\n";
    }
  }
  if (const char* s = std::getenv("SGCH_THREADS")) {
    if (const auto v = parse_long(s); v && *v >= 0 && *v <= 4096) {
      o.threads = static_cast<int>(*v);
    } else {
      log << "warning: ignoring SGCH_THREADS='" << s << "'\n";
    }
  }
  return o;
}

Overrides merge(const Overrides& flags, const Overrides& env) {
  Overrides o = env;
  if (flags.seed) o.seed = flags.seed;
  if (flags.threads) o.threads = flags.threads;
  if (flags.out) o.out = flags.out;
  return o;
}

RunResult run_file(const fs::path& config, const Overrides& overrides, std::ostream& log) {
  try {
    const toml::table root = toml::parse_file(config.string());
    return execute(root, overrides, log);
  } catch (const toml::parse_error& e) {
    return parse_failure(e);
  }
}

RunResult run_text(std::string_view toml_text, std::string_view source_name, const Overrides& overrides,
                   std::ostream& log) {
  try {
    const toml::table root = toml::parse(toml_text, source_name);
    return execute(root, overrides, log);
  } catch (const toml::parse_error& e) {
    return parse_failure(e);
  }
}

const std::vector<CatalogueEntry>& catalogue() {
  static const std::vector<CatalogueEntry> entries{
      {"simulate",
       "Trajectory of the regularized or plain Galerkin SPDE: norm series, exit and blow-up times.",
       {"solver", "noise", "initial"},
       "experiment = \"simulate\"\n[solver]\nn_modes = 32\nT = 0.1\n"},
      {"girsanov",
       "Linear-noise case through the random PDE for v = u / beta: beta, clock S, momentum sign, norms.",
       {"solver", "transport", "noise", "initial"},
       "experiment = \"girsanov\"\n[solver]\nn_modes = 32\nT = 0.1\n[noise]\namplitude = 0.5\n"},
      {"instability",
       "Weak instability: error functional of the approximate solutions decays like n^{-r_s}.",
       {"instability", "error", "noise"},
       "experiment = \"instability\"\n[instability]\nn_list = [4, 8]\nT = 0.1\n[error]\ndt = 1e-2\n"},
      {"divergence",
       "Weak instability: solutions with O(n^{-1/k}) close data separate by O(1) in H^s.",
       {"instability", "divergence", "noise"},
       "experiment = \"divergence\"\n[instability]\nk = 1\nn_list = [8, 16]\nT = 0.5\n"
       "[divergence]\ndt = 1e-2\ngap_times = [0.0, 0.5]\n"},
      {"exit_mc",
       "Exit of the exponential martingale: P(sup X <= R) >= 1 - R^{-(1-2 lambda)}.",
       {"exit", "noise"},
       "experiment = \"exit_mc\"\n[exit]\nn_paths = 200\nT = 5.0\ndt = 1e-2\n"},
      {"decay_mc",
       "Decay with probability >= 1 - R^{-2/lambda2} for small data and linear noise.",
       {"decay", "noise"},
       "experiment = \"decay_mc\"\n[decay]\nn_modes = 16\nn_paths = 4\nT = 0.5\ncalibration_samples = 10\n"},
      {"global_mc",
       "Global existence for sign-definite momentum; P(global) >= p + q.",
       {"global", "noise"},
       "experiment = \"global_mc\"\n[global]\nn_modes = 32\nn_paths = 4\nT = 1.0\n"},
      {"lil",
       "Iterated-logarithm diagnostic for B_t and the growth conditions on int a - t/2 (never fails).",
       {"lil", "noise"},
       "experiment = \"lil\"\n[lil]\nn_paths = 100\ntimes = [10.0, 100.0]\n"},
  };
  return entries;
}

void print_catalogue(std::ostream& os) {
  for (const auto& e : catalogue()) {
    os << e.kind << "\n  checks: " << e.checks << "\n  sections:";
    for (const auto& s : e.sections) os << " [" << s << "]";
    os << "\n  minimal config:\n";
    std::istringstream lines(e.minimal_config);
    for (std::string line; std::getline(lines, line);) os << "    " << line << '\n';
    os << '\n';
  }
}

}  // namespace sgch::cli
