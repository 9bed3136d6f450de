#include <cmath>
#include <vector>

#include "doctest.h"
#include "sgch/dynamics.hpp"
#include "sgch/fields.hpp"
#include "sgch/girsanov.hpp"
#include "sgch/integrator.hpp"

using namespace sgch;

TEST_CASE("zero intensity gives the identity clock") {
  PhiloxStream rng(1, 0);
  const auto p = sample_beta_path(TimeProfile::constant(0.0), 2, 1.0, 0.01, rng);
  REQUIRE(p.times.size() == 101);
  for (std::size_t i = 0; i < p.times.size(); ++i) {
    CHECK(p.beta[i] == 1.0);
    CHECK(p.S[i] == doctest::Approx(p.times[i]).epsilon(1e-13));
  }
  CHECK(p.time_at(0.37) == doctest::Approx(0.37));
}

TEST_CASE("beta is a positive martingale and S increases") {
  PhiloxStream root(2, 0);
  const int paths = 10000;
  double sb = 0, sb2 = 0, ss = 0, ss2 = 0;
  for (int i = 0; i < paths; ++i) {
    auto rng = root.split(i);
    const auto p = sample_beta_path(TimeProfile::constant(1.0), 1, 1.0, 0.01, rng);
    CHECK(p.beta[0] == 1.0);
    CHECK(p.S[0] == 0.0);
    for (std::size_t j = 1; j < p.S.size(); ++j) {
      if (!(p.S[j] > p.S[j - 1]) || !(p.beta[j] > 0.0)) FAIL("monotonicity or positivity violated");
    }
    sb += p.beta.back();
    sb2 += p.beta.back() * p.beta.back();
    ss += p.S.back();
    ss2 += p.S.back() * p.S.back();
  }
  const double mb = sb / paths, ms = ss / paths;
  const double seb = std::sqrt((sb2 / paths - mb * mb) / paths);
  const double ses = std::sqrt((ss2 / paths - ms * ms) / paths);
  CHECK(std::abs(mb - 1.0) <= 3.0 * seb);
  CHECK(std::abs(ms - 1.0) <= 3.0 * ses);
}

TEST_CASE("b = 0 transport matches the deterministic integrator") {
  const auto u0 = cosine_field(64, 0.0, 1.0, 1);
  const auto path = deterministic_path(1, 0.5, 1e-3);
  TransportOptions o;
  o.max_ds = 1e-3;
  o.stride = 500;
  const auto v = solve_transport(u0, 1, path, o);
  SolverConfig c;
  c.n_modes = 64;
  c.dt = 1e-3;
  c.T = 0.5;
  c.scheme = DriftScheme::rk4;
  const auto r = simulate_path(c, u0);
  CHECK(l2_norm(v.v.back() - r.final_field) < 1e-9);
  const auto u = reconstruct_u(v, path);
  CHECK(l2_norm(u.u.back() - v.v.back()) == 0.0);
}

TEST_CASE("H1 norm of v is conserved") {
  PhiloxStream root(3, 0);
  for (int k = 1; k <= 2; ++k) {
    for (int p = 0; p < 3; ++p) {
      auto rng = root.split(10 * k + p);
      const auto path = sample_beta_path(TimeProfile::constant(1.0), k, 2.0, 1e-3, rng);
      const auto u0 = cosine_field(64, 0.8, 0.2, 1) + cosine_field(64, 0.0, 0.05, 2, 0.4);
      TransportOptions o;
      o.stride = 200;
      const auto v = solve_transport(u0, k, path, o);
      CHECK(v.status == PathStatus::completed);
      const double h0 = sobolev_norm(u0, 1.0);
      for (const auto& f : v.v) CHECK(std::abs(sobolev_norm(f, 1.0) - h0) <= 1e-8 * h0);
    }
  }
}

TEST_CASE("reconstruction scales norms by beta") {
  PhiloxStream rng(4, 0);
  const auto path = sample_beta_path(TimeProfile::constant(0.7), 1, 1.0, 1e-2, rng);
  TransportOptions o;
  o.stride = 10;
  const auto v = solve_transport(cosine_field(32, 0.5, 0.2, 1), 1, path, o);
  const auto u = reconstruct_u(v, path);
  for (std::size_t j = 0; j < u.u.size(); ++j) {
    CHECK(sobolev_norm(u.u[j], 2.5) == doctest::Approx(path.beta_at(u.times[j]) * sobolev_norm(v.v[j], 2.5)));
  }
}

TEST_CASE("reconstructed u satisfies the Ito identity") {
  // u(T) - u(0) + sum drift(u_i) dt - sum b u_i dW_i
  auto residual = [](double dt, std::uint64_t seed) {
    PhiloxStream rng(seed, 0);
    const double b = 0.5;
    const auto path = sample_beta_path(TimeProfile::constant(b), 1, 0.5, dt, rng);
    const auto u0 = cosine_field(32, 0.3, 0.4, 1);
    TransportOptions o;
    o.max_ds = dt;
    const auto u = reconstruct_u(solve_transport(u0, 1, path, o), path);
    SpectralField r = u.u.back() - u.u.front();
    for (std::size_t i = 0; i + 1 < u.u.size(); ++i) {
      r.axpy(path.dt, drift(u.u[i], 1));
      r.axpy(-b * (path.W[i + 1] - path.W[i]), u.u[i]);
    }
    return l2_norm(r) / l2_norm(u0);
  };
  double coarse = 0, fine = 0;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    coarse += residual(4e-3, seed) / 4;
    fine += residual(4e-4, seed + 100) / 4;
  }
  CHECK(coarse < 0.05);
  CHECK(fine < 0.5 * coarse);
}

TEST_CASE("characteristics of a constant field") {
  const auto path = deterministic_path(2, 1.0, 1e-2);
  TransportOptions o;
  o.stride = 10;
  const auto v = solve_transport(cosine_field(32, 0.6, 0.0, 1), 2, path, o);
  const std::vector<double> x0{0.0, 1.0, 4.0};
  const auto ch = characteristics(v, path, x0);
  for (std::size_t j = 0; j < ch.times.size(); ++j) {
    for (std::size_t i = 0; i < x0.size(); ++i) {
      CHECK(ch.q[j][i] == doctest::Approx(x0[i] + 0.36 * ch.times[j]).epsilon(1e-12));
      CHECK(ch.q_x[j][i] == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("exponential formula matches the flow-map derivative") {
  PhiloxStream rng(5, 0);
  const auto path = sample_beta_path(TimeProfile::constant(0.5), 1, 1.0, 1e-3, rng);
  TransportOptions o;
  o.stride = 250;
  o.max_ds = 2e-3;
  const auto v = solve_transport(cosine_field(64, 0.2, 0.8, 1), 1, path, o);
  const double h = 1e-5;
  std::vector<double> x0;
  for (double x : {0.3, 1.4, 2.9, 5.0}) {
    x0.push_back(x - h);
    x0.push_back(x);
    x0.push_back(x + h);
  }
  const auto ch = characteristics(v, path, x0);
  CHECK(ch.q_x.front()[1] == 1.0);
  for (std::size_t j = 0; j < ch.times.size(); ++j) {
    for (std::size_t i = 0; i < x0.size(); i += 3) {
      const double fd = (ch.q[j][i + 2] - ch.q[j][i]) / (2 * h);
      CHECK(ch.q_x[j][i + 1] > 0.0);
      CHECK(std::abs(fd - ch.q_x[j][i + 1]) <= 1e-4 * ch.q_x[j][i + 1]);
    }
  }
}

TEST_CASE("momentum keeps its sign") {
  PhiloxStream root(6, 0);
  for (double sign : {1.0, -1.0}) {
    auto rng = root.split(sign > 0 ? 1 : 2);
    const auto path = sample_beta_path(TimeProfile::constant(1.0), 1, 2.0, 1e-3, rng);
    TransportOptions o;
    o.stride = 100;
    const auto v = solve_transport(cosine_field(64, 2.0 * sign, 0.5 * sign, 1), 1, path, o);
    const auto tr = momentum_trace(v);
    CHECK(tr.min_V.front() == doctest::Approx(sign > 0 ? 1.0 : -3.0).epsilon(1e-12));
    for (std::size_t j = 0; j < tr.times.size(); ++j) {
      if (sign > 0) CHECK(tr.min_V[j] > 0.0);
      else CHECK(tr.max_V[j] < 0.0);
    }
    CHECK(slope_excess(v) <= 1e-9);
    const std::vector<double> xs{0.0, 1.0, 2.5, 4.4};
    CHECK(one_sided_identity_error(v, xs) < 1e-8);
  }
}

TEST_CASE("transport blow-up trigger") {
  const auto path = deterministic_path(1, 3.0, 1e-3);
  TransportOptions o;
  o.stride = 100;
  o.max_ds = 1e-3;
  o.blowup_threshold = 8.0;
  const auto v = solve_transport(cosine_field(256, 0.0, 1.0, 1), 1, path, o);
  CHECK(v.status == PathStatus::blew_up);
  REQUIRE(v.blowup_time.has_value());
  CHECK(*v.blowup_time > 1.0);
  CHECK(*v.blowup_time < 1.5);
  CHECK(v.w1inf_norm.back() >= 8.0);
}
