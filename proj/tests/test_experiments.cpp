#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "sgch/dynamics.hpp"
#include "sgch/experiments.hpp"
#include "sgch/fields.hpp"

using namespace sgch;

namespace {

constexpr double kInitialGapK1N64 = 0.07833213358221876;
constexpr double kDecayBoundR2L8 = 0.1591035847462855;

InstabilityConfig instability(int k, double s, double delta, int l) {
  InstabilityConfig c;
  c.k = k;
  c.s = s;
  c.delta = delta;
  c.l = l;
  return c;
}

double sup_diff(const SpectralField& f, double (*g)(double, int, double), int n, double s) {
  double m = 0.0;
  const int M = 4 * f.n_modes();
  const auto v = to_physical(f, M);
  for (int j = 0; j < M; ++j) m = std::max(m, std::abs(v[j] - g(grid_point(j, M), n, s)));
  return m;
}

}  // namespace

TEST_CASE("rate exponent branches") {
  CHECK(rate_exponent(2, 2.0, 0.75) == doctest::Approx(1.75));
  CHECK(rate_exponent(2, 3.0, 0.75) == doctest::Approx(3.25));
  CHECK(rate_exponent(1, 2.0, 0.9) == doctest::Approx(1.1));
  for (int k = 1; k <= 4; ++k) {
    const double s = (2.0 * k + 1.0) / k;
    const double delta = 0.8;
    CHECK(rate_exponent(k, s, delta) == doctest::Approx(s - delta + 1.0));
    CHECK(rate_exponent(k, s + 1e-9, delta) == doctest::Approx(rate_exponent(k, s, delta)));
  }
  CHECK_THROWS_AS(rate_exponent(2, 2.0, 1.0), InvalidParameter);
  CHECK_THROWS_AS(rate_exponent(2, 1.5, 0.4), InvalidParameter);
}

TEST_CASE("instability config hypotheses") {
  CHECK_NOTHROW(instability(1, 2.0, 0.75, -1).validate());
  CHECK_THROWS_AS(instability(1, 2.0, 0.75, 0).validate(), InvalidParameter);
  CHECK_NOTHROW(instability(2, 2.0, 0.75, 0).validate());
  CHECK_THROWS_AS(instability(2, 2.0, 0.75, -1).validate(), InvalidParameter);
  CHECK_THROWS_AS(instability(2, 2.0, 0.5, 1).validate(), InvalidParameter);
}

TEST_CASE("approximate solution") {
  const auto c = instability(2, 2.0, 0.75, 1);
  const auto u = approx_solution(c, 4, 0.0, 32);
  for (double x : {0.0, 0.3, 1.9}) CHECK(evaluate(u, x) == doctest::Approx(0.5 + 0.0625 * std::cos(4 * x)));
  const auto u0 = approx_solution(instability(2, 2.0, 0.75, 0), 8, 0.0, 32);
  CHECK(std::abs(u0.coeff(0)) < 1e-15);
  double lo = 1e9, hi = 0.0;
  for (int n : {8, 16, 32, 64, 128, 256}) {
    const double h = sobolev_norm(approx_solution(c, n, 0.3), c.s);
    lo = std::min(lo, h);
    hi = std::max(hi, h);
  }
  CHECK(hi < 1.2 * std::sqrt(std::numbers::pi) + std::sqrt(kTwoPi));
  CHECK(hi / lo < 2.0);
  CHECK_THROWS_AS(approx_solution(c, 16, 0.0, 32), InvalidParameter);
}

TEST_CASE("transport residual closed forms") {
  auto c = instability(1, 2.0, 0.75, 1);
  const double t = 0.4;
  const auto r1 = residual_tnk(c, 4, t);
  const int n = 4;
  const double s = 2.0;
  double worst = 0.0;
  const int M = 4 * r1.n_modes();
  const auto v = to_physical(r1, M);
  for (int j = 0; j < M; ++j) {
    const double th = n * grid_point(j, M) - t;
    worst = std::max(worst, std::abs(v[j] + std::pow(n, -2 * s + 1) * std::sin(2 * th) / 2));
  }
  CHECK(worst < 1e-15);

  auto c0 = instability(2, 2.0, 0.75, 0);
  const auto r0 = residual_tnk(c0, 4, 0.0);
  CHECK(sup_diff(r0, [](double x, int nn, double ss) {
          return -std::pow(nn, -3 * ss + 1) * std::pow(std::cos(nn * x), 2) * std::sin(nn * x);
        }, 4, 2.0) < 1e-15);
}

TEST_CASE("error functional vanishes at t = 0 and ignores the seed without noise") {
  auto c = instability(2, 2.0, 0.75, 1);
  c.T = 0.2;
  PhiloxStream a(1, 0), b(2, 0);
  const auto e1 = error_functional(c, 8, NoiseModel::none(), a);
  const auto e2 = error_functional(c, 8, NoiseModel::none(), b);
  CHECK(e1.norms.front() == 0.0);
  CHECK(e1.value == e2.value);
  CHECK(e1.norms == e2.norms);
  CHECK_THROWS_AS(error_functional(c, 8, NoiseModel::linear(TimeProfile::constant(1.0)), a), InvalidParameter);
}

TEST_CASE("error functional agrees with a finite-difference oracle") {
  // E(T) = u(T) - u(0) + int_0^T drift(u) dt, drift by the grid oracle and
  // Simpson in time.
  auto c = instability(2, 2.0, 0.75, 1);
  c.T = 0.5;
  const int n = 3;
  PhiloxStream rng(0, 0);
  ErrorOptions o;
  o.dt = 1e-4;
  const auto e = error_functional(c, n, NoiseModel::none(), rng, o);

  const int G = 4096;
  const int steps = 200;
  const double h = c.T / steps;
  auto field = [&](double t) {
    oracle::TrigPoly p;
    p.a0 = std::pow(n, -0.5);
    p.a.assign(n, 0.0);
    p.b.assign(n, 0.0);
    const double amp = std::pow(n, -c.s);
    p.a[n - 1] = amp * std::cos(t);  // cos(nx - t) = cos(nx)cos t + sin(nx) sin t
    p.b[n - 1] = amp * std::sin(t);
    return p.sample(G);
  };
  std::vector<double> acc(G, 0.0);
  for (int i = 0; i <= steps; ++i) {
    const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const auto d = oracle::fd_drift(field(i * h), c.k);
    for (int j = 0; j < G; ++j) acc[j] += w * h / 3.0 * d[j];
  }
  const auto uT = field(c.T), u0 = field(0.0);
  for (int j = 0; j < G; ++j) acc[j] += uT[j] - u0[j];
  const double ref = sobolev_norm(to_spectral(acc, e.n_modes), c.delta);
  CHECK(e.norms.back() == doctest::Approx(ref).epsilon(2e-3));
}

TEST_CASE("stochastic error functional uses F-bounded noise") {
  auto c = instability(2, 2.0, 0.75, 1);
  c.T = 0.1;
  PhiloxStream rng(4, 0);
  ErrorOptions o;
  o.dt = 1e-2;
  o.n_paths = 8;
  const auto det = error_functional(c, 8, NoiseModel::none(), rng, o);
  const auto sto = error_functional(c, 8, NoiseModel::f_bounded(2), rng, o);
  CHECK(sto.value > 0.0);
  CHECK(sto.value != det.value);
  CHECK_THROWS_AS(error_functional(c, 8, NoiseModel::f_bounded(1), rng, o), InvalidParameter);
}

TEST_CASE("log-log fit recovers a power law") {
  std::vector<double> x{2, 4, 8, 16}, y;
  for (double v : x) y.push_back(3.0 * std::pow(v, -1.5));
  const auto f = loglog_fit(x, y);
  CHECK(f.slope == doctest::Approx(-1.5));
  CHECK(std::exp(f.intercept) == doctest::Approx(3.0));
  CHECK_THROWS_AS(loglog_fit({1.0}, {1.0}), InvalidInput);
}

TEST_CASE("ensemble statistics") {
  const auto st = lower_bound_stats({1, 1, 0, 1}, 0.9);
  CHECK(st.p_hat == doctest::Approx(0.75));
  CHECK(st.std_error == doctest::Approx(std::sqrt(0.75 * 0.25 / 4)));
  CHECK(st.pass == (0.75 >= 0.9 - 3 * st.std_error));
  CHECK_THROWS_AS(lower_bound_stats({}, 0.5), InvalidParameter);
}

TEST_CASE("divergence pair") {
  auto c = instability(1, 2.0, 0.75, 1);
  c.n_list = {16, 32, 64};
  DivergenceOptions o;
  o.gap_times = {0.0, 0.5};
  o.dt = 1e-2;
  PhiloxStream rng(3, 0);
  const auto r = divergence_experiment(c, rng, o);
  CHECK(r.l_pair == std::pair{1, -1});
  CHECK(r.initial_gap[2] == doctest::Approx(kInitialGapK1N64).epsilon(1e-12));
  CHECK(r.initial_slope == doctest::Approx(-1.0).epsilon(1e-9));
  for (std::size_t i = 0; i < r.n_list.size(); ++i) {
    CHECK(r.simulated_gap[i][0] == r.initial_gap[i]);
    CHECK(r.approx_gap[i][0] == doctest::Approx(r.initial_gap[i]));
  }
  auto c2 = instability(2, 2.0, 0.75, 1);
  c2.n_list = {16, 64};
  o.gap_times = {0.0};
  const auto r2 = divergence_experiment(c2, rng, o);
  CHECK(r2.l_pair == std::pair{1, 0});
  CHECK(r2.initial_slope == doctest::Approx(-0.5).epsilon(1e-9));
}

TEST_CASE("exit bound values") {
  CHECK(exit_survival_bound(0.25, 4.0) == doctest::Approx(0.5));
  CHECK(exit_survival_bound(0.0, 4.0) == doctest::Approx(0.75));
  CHECK_THROWS_AS(exit_survival_bound(0.5, 4.0), InvalidParameter);
  CHECK_THROWS_AS(exit_survival_bound(0.0, 1.0), InvalidParameter);
}

TEST_CASE("martingale exit Monte Carlo") {
  PhiloxStream rng(12, 0);
  ExitOptions o;
  o.T = 20.0;
  o.dt = 1e-2;
  o.n_paths = 2000;
  const auto r = exit_probability_mart(TimeProfile::constant(1.0), 0.0, {8.0, 2.0, 4.0}, rng, o);
  REQUIRE(r.R == std::vector<double>{2.0, 4.0, 8.0});
  for (std::size_t j = 0; j < r.R.size(); ++j) CHECK(within_three_sigma(r.survival[j], 1.0 - 1.0 / r.R[j]));
  CHECK(r.survival[0].p_hat <= r.survival[1].p_hat);
  CHECK(r.survival[1].p_hat <= r.survival[2].p_hat);
  o.n_paths = 0;
  CHECK_THROWS_AS(exit_probability_mart(TimeProfile::constant(1.0), 0.0, {2.0}, rng, o), InvalidParameter);
}

TEST_CASE("embedding constants") {
  PhiloxStream rng(13, 0);
  for (double s : {1.75, 2.0, 3.0}) {
    const double K = embedding_constant(s);
    CHECK(sampled_embedding_ratio(s, 64, 200, rng) <= K);
  }
  CHECK_THROWS_AS(embedding_constant(1.5), InvalidParameter);
}

TEST_CASE("decay hypotheses") {
  CHECK(decay_bound(2.0, 8.0) == doctest::Approx(kDecayBoundR2L8).epsilon(1e-14));
  DecayConfig c;
  c.lambda1 = 2.0;
  try {
    c.validate();
    FAIL("expected InvalidParameter");
  } catch (const InvalidParameter& e) {
    CHECK(std::string(e.what()).find("λ1>2") != std::string::npos);
  }
  c = DecayConfig{};
  c.lambda2 = 4.0;
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
  c = DecayConfig{};
  c.b = TimeProfile::constant(0.0);
  try {
    c.validate();
    FAIL("expected InvalidParameter");
  } catch (const InvalidParameter& e) {
    CHECK(std::string(e.what()).find("b_* > 0") != std::string::npos);
  }
}

TEST_CASE("decay ensemble with zero data respects the envelope") {
  DecayConfig c;
  c.u0_scale = 0.0;
  c.n_paths = 5;
  c.T = 0.5;
  c.n_modes = 16;
  c.calibration_samples = 10;
  PhiloxStream rng(14, 0);
  const auto r = decay_probability(c, rng);
  CHECK(r.stats.p_hat == 1.0);
  CHECK(r.C > 1.0);
}

TEST_CASE("initial-data sampler respects the momentum sign") {
  PhiloxStream rng(15, 0);
  for (int i = 0; i < 200; ++i) {
    const auto pos = sample_initial_data(MomentumSign::positive, 32, rng);
    const auto neg = sample_initial_data(MomentumSign::negative, 32, rng);
    const auto mix = sample_initial_data(MomentumSign::mixed, 32, rng);
    CHECK(grid_min_max(helmholtz(pos)).first > 0.0);
    CHECK(grid_min_max(helmholtz(neg)).second < 0.0);
    const auto [lo, hi] = grid_min_max(helmholtz(mix));
    CHECK(lo < 0.0);
    CHECK(hi > 0.0);
  }
}

TEST_CASE("global existence for positive momentum") {
  GlobalConfig c;
  c.n_paths = 4;
  c.T = 2.0;
  c.n_modes = 32;
  PhiloxStream rng(16, 0);
  const auto r = global_existence_probability(c, rng);
  CHECK(r.violations == 0);
  CHECK(r.stats.p_hat == 1.0);
  c.p = 0.7;
  c.q = 0.4;
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
}

TEST_CASE("LIL diagnostic") {
  PhiloxStream rng(17, 0);
  const auto rep = lil_diagnostic(TimeProfile::constant(1.0), DriftProfile{0.25, 0.0}, {100.0, 1e4}, 1000, rng);
  CHECK(rep.condition_I);
  CHECK_FALSE(rep.condition_II);
  CHECK(rep.sample_max.back() > 0.5);
  CHECK(rep.sample_max.back() < 1.5);
  const auto up = lil_diagnostic(TimeProfile::constant(1.0), DriftProfile{0.0, 1.0}, {10.0, 40.0}, 200, rng);
  CHECK(up.condition_II);
  CHECK(up.median_X[1] > up.median_X[0]);
  CHECK_THROWS_AS(lil_diagnostic(TimeProfile::constant(1.0), {}, {2.0}, 10, rng), InvalidParameter);
}
