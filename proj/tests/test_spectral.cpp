#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "sgch/fields.hpp"
#include "sgch/rng.hpp"
#include "sgch/spectral.hpp"

using namespace sgch;

namespace {

constexpr double kSqrt2Pi = 2.5066282746310002;
constexpr double kSqrtHalfPi = 1.2533141373155001;
constexpr double kSqrt10Pi = 5.604991216397929;
constexpr double kGreenAtZero = 0.5018709365986606;

double max_abs_diff(const SpectralField& a, const SpectralField& b) {
  double m = 0.0;
  for (int k = 0; k <= a.max_wavenumber(); ++k) m = std::max(m, std::abs(a.coeff(k) - b.coeff(k)));
  return m;
}

double max_abs(const SpectralField& a) {
  double m = 0.0;
  for (int k = 0; k <= a.max_wavenumber(); ++k) m = std::max(m, std::abs(a.coeff(k)));
  return m;
}

std::vector<double> samples_of(int n, double (*f)(double)) {
  std::vector<double> v(n);
  for (int j = 0; j < n; ++j) v[j] = f(grid_point(j, n));
  return v;
}

}  // namespace

TEST_CASE("to_spectral of the zero field") {
  const auto f = to_spectral(std::vector<double>(16, 0.0));
  CHECK(max_abs(f) == 0.0);
}

TEST_CASE("to_spectral of a constant") {
  const auto f = to_spectral(std::vector<double>(16, 1.0));
  CHECK(f.coeff(0).real() == doctest::Approx(kSqrt2Pi).epsilon(1e-14));
  for (int k = 1; k <= 8; ++k) CHECK(std::abs(f.coeff(k)) < 1e-14);
}

TEST_CASE("to_spectral of cos 3x") {
  const auto f = to_spectral(samples_of(16, [](double x) { return std::cos(3 * x); }));
  CHECK(f.coeff(3).real() == doctest::Approx(kSqrtHalfPi).epsilon(1e-14));
  CHECK(f.coeff(-3).real() == doctest::Approx(kSqrtHalfPi).epsilon(1e-14));
  for (int k = 0; k <= 8; ++k) {
    if (k != 3) CHECK(std::abs(f.coeff(k)) < 1e-14);
  }
}

TEST_CASE("to_spectral rejects bad samples") {
  std::vector<double> v(16, 0.0);
  v[3] = std::nan("");
  CHECK_THROWS_AS(to_spectral(v), InvalidInput);
  CHECK_THROWS_AS(to_spectral(std::vector<double>(7, 0.0)), InvalidInput);
}

TEST_CASE("hermitian symmetry and round trip") {
  PhiloxStream rng(11, 0);
  const auto f = random_smooth_field(64, 31, 1.0, rng);
  for (int k = 1; k < 32; ++k) CHECK(f.coeff(-k) == std::conj(f.coeff(k)));
  const auto back = to_spectral(to_physical(f));
  CHECK(max_abs_diff(f, back) < 1e-13);
  const auto fine = to_spectral(to_physical(f, 256), 64);
  CHECK(max_abs_diff(f, fine) < 1e-13);
}

TEST_CASE("Parseval at s = 0") {
  PhiloxStream rng(3, 0);
  const auto f = random_smooth_field(32, 15, 0.5, rng);
  const auto v = to_physical(f);
  double sum = 0.0;
  for (double x : v) sum += x * x;
  const double l2 = std::sqrt(sum * kTwoPi / v.size());
  CHECK(sobolev_norm(f, 0.0) == doctest::Approx(l2).epsilon(1e-13));
  CHECK(l2_norm(f) == doctest::Approx(l2).epsilon(1e-13));
}

TEST_CASE("sobolev norm closed forms") {
  CHECK(sobolev_norm(SpectralField(16), 1.7) == 0.0);
  const auto c3 = cosine_field(16, 0.0, 1.0, 3);
  CHECK(sobolev_norm(c3, 1.0) == doctest::Approx(kSqrt10Pi).epsilon(1e-14));
  // ||cos(lambda x - alpha)||_{H^sigma} / lambda^sigma -> sqrt(pi)
  double prev = 1e9;
  for (int lam : {8, 32, 128}) {
    const auto f = cosine_field(4 * lam, 0.0, 1.0, lam, -0.4);
    const double ratio = sobolev_norm(f, 1.5) / std::pow(lam, 1.5);
    const double err = std::abs(ratio - std::sqrt(std::numbers::pi));
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("w1inf norm") {
  CHECK(w1inf_norm(cosine_field(16, -0.7, 0.0, 1)) == doctest::Approx(0.7));
  CHECK(w1inf_norm(cosine_field(16, 0.0, 1.0, 3)) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(w1inf_norm(cosine_field(64, 0.0, 1.0 / 256.0, 16)) == doctest::Approx(0.0625).epsilon(1e-12));
}

TEST_CASE("helmholtz inverse") {
  const auto c3 = cosine_field(16, 2.0, 1.0, 3);
  const auto h = helmholtz_inverse(c3);
  CHECK(h.coeff(3).real() == doctest::Approx(c3.coeff(3).real() / 10.0).epsilon(1e-15));
  CHECK(h.coeff(0).real() == doctest::Approx(c3.coeff(0).real()).epsilon(1e-15));
  PhiloxStream rng(5, 0);
  const auto f = random_smooth_field(64, 31, 0.0, rng);
  CHECK(max_abs_diff(helmholtz_inverse(helmholtz(f)), f) <= 1e-12 * max_abs(f));
}

TEST_CASE("green kernel closed form") {
  CHECK(green_kernel(0.0) == doctest::Approx(kGreenAtZero).epsilon(1e-15));
  CHECK(green_kernel(kTwoPi) == doctest::Approx(kGreenAtZero).epsilon(1e-14));
  CHECK(green_kernel(0.3) == doctest::Approx(green_kernel(-0.3)).epsilon(1e-14));
  const auto one = green_convolution(cosine_field(16, 1.0, 0.0, 1));
  CHECK(one.coeff(0).real() == doctest::Approx(kSqrt2Pi).epsilon(1e-10));
  const auto c3 = green_convolution(cosine_field(16, 0.0, 1.0, 3));
  CHECK(c3.coeff(3).real() == doctest::Approx(kSqrtHalfPi / 10.0).epsilon(1e-9));
}

TEST_CASE("green convolution agrees with the multiplier") {
  PhiloxStream rng(17, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const auto f = random_smooth_field(128, 63, 0.0, rng);
    const auto a = helmholtz_inverse(f);
    const auto b = green_convolution(f, 16);
    CHECK(l2_norm(a - b) / l2_norm(a) <= 1e-8);
  }
}

TEST_CASE("one-sided kernel reproduces v + v_x") {
  PhiloxStream rng(19, 0);
  const auto v = random_smooth_field(64, 20, 2.0, rng);
  const std::vector<double> xs{0.0, 0.5, 1.7, 3.0, 5.9};
  const auto got = one_sided_kernel_plus(helmholtz(v), xs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    CHECK(got[i] == doctest::Approx(evaluate(v, xs[i]) + evaluate_derivative(v, xs[i])).epsilon(1e-8));
  }
}

TEST_CASE("mollifier symbol") {
  CHECK(mollifier_symbol(0.0) == 1.0);
  CHECK(mollifier_symbol(1.0) == 1.0);
  CHECK(mollifier_symbol(-1.0) == 1.0);
  CHECK(mollifier_symbol(2.0) == 0.0);
  CHECK(mollifier_symbol(7.0) == 0.0);
  double prev = 1.0;
  for (double xi = 1.0; xi <= 2.0; xi += 0.01) {
    const double j = mollifier_symbol(xi);
    CHECK(j <= prev);
    CHECK(j >= 0.0);
    prev = j;
  }
  CHECK(mollifier_symbol(1.5) == doctest::Approx(0.5));
}

TEST_CASE("mollifier J") {
  PhiloxStream rng(23, 0);
  const auto f = random_smooth_field(64, 31, 0.0, rng);
  CHECK(max_abs_diff(mollify_j(f, 1.0 / 32.0), f) == 0.0);
  const auto g = mollify_j(f, 0.25);
  for (int k = 8; k <= 32; ++k) CHECK(g.coeff(k) == Complex{});
  CHECK_THROWS_AS(mollify_j(f, 0.0), InvalidParameter);
  CHECK_THROWS_AS(mollify_j(f, 1.0), InvalidParameter);
}

TEST_CASE("mollifier T") {
  const auto c3 = cosine_field(16, 0.0, 1.0, 3);
  CHECK(mollify_t(c3, 1.0 / 3.0).coeff(3).real() == doctest::Approx(c3.coeff(3).real() / 2.0).epsilon(1e-15));
  PhiloxStream rng(29, 0);
  const auto f = random_smooth_field(32, 15, 0.0, rng);
  CHECK(max_abs_diff(mollify_t(f, 1e-9), f) < 1e-14);
  CHECK_THROWS_AS(mollify_t(f, -0.1), InvalidParameter);
}

TEST_CASE("mollifiers contract and commute with D^s") {
  PhiloxStream rng(31, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = random_smooth_field(64, 31, 0.0, rng);
    const double eps = 0.02 + 0.9 * rng.uniform();
    const double s = -1.0 + 5.0 * rng.uniform();
    CHECK(sobolev_norm(mollify_j(f, eps), s) <= sobolev_norm(f, s));
    CHECK(sobolev_norm(mollify_t(f, eps), s) <= sobolev_norm(f, s));
    const double scale = max_abs(bessel_potential(f, s));
    CHECK(max_abs_diff(bessel_potential(mollify_j(f, eps), s), mollify_j(bessel_potential(f, s), eps)) <=
          4e-16 * scale);
    CHECK(max_abs_diff(bessel_potential(mollify_t(f, eps), s), mollify_t(bessel_potential(f, s), eps)) <=
          4e-16 * scale);
  }
}

TEST_CASE("mollifiers are self-adjoint in L2") {
  PhiloxStream rng(37, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = random_smooth_field(64, 31, 0.0, rng);
    const auto g = random_smooth_field(64, 31, 0.0, rng);
    const double eps = 0.02 + 0.9 * rng.uniform();
    const double scale = sobolev_norm(f, 0.0) * sobolev_norm(g, 0.0);
    CHECK(std::abs(sobolev_inner(mollify_j(f, eps), g, 0.0) - sobolev_inner(f, mollify_j(g, eps), 0.0)) <=
          1e-14 * scale);
    CHECK(std::abs(sobolev_inner(mollify_t(f, eps), g, 0.0) - sobolev_inner(f, mollify_t(g, eps), 0.0)) <=
          1e-14 * scale);
  }
}

TEST_CASE("shift and derivative") {
  const auto c = cosine_field(32, 0.0, 1.0, 2);
  const auto sh = shift(c, 0.3);
  CHECK(evaluate(sh, 1.1) == doctest::Approx(std::cos(2 * 0.8)).epsilon(1e-13));
  CHECK(evaluate(derivative(c), 0.4) == doctest::Approx(-2 * std::sin(0.8)).epsilon(1e-13));
  CHECK(evaluate_derivative(c, 0.4) == doctest::Approx(-2 * std::sin(0.8)).epsilon(1e-13));
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS((GridSpec{6, 4}.validate()), InvalidParameter);
  CHECK_THROWS_AS((GridSpec{16, 1}.validate()), InvalidParameter);
  CHECK_NOTHROW((GridSpec{16, 2}.validate()));
  CHECK(dealias_samples(64, 2) == 128);
  CHECK(dealias_samples(64, 3) == 128);
  CHECK(dealias_samples(64, 4) == 192);
}
