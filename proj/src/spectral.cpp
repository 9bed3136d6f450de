#include "sgch/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fft.hpp"

namespace sgch {
namespace {

const double kSqrtTwoPi = std::sqrt(kTwoPi);

void require_valid_modes(int n_modes) {
  if (n_modes < 2 || n_modes % 2 != 0) {
    throw InvalidParameter("n_modes must be even and >= 2, got " + std::to_string(n_modes));
  }
}

void require_epsilon(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidParameter("mollifier eps must lie in (0,1), got " + std::to_string(eps));
}

// Weight of mode k in a half-spectrum sum over all wavenumbers.
double mode_weight(int k, int n_modes) { return (k == 0 || k == n_modes / 2) ? 1.0 : 2.0; }

template <typename Multiplier>
SpectralField apply_multiplier(const SpectralField& f, Multiplier&& m) {
  SpectralField out = f;
  auto h = out.half();
  for (int k = 0; k < static_cast<int>(h.size()); ++k) h[k] *= m(k);
  return out;
}

// Periodic trapezoid sum h * sum_j kernel(offset_j) g_j at level `stride`
// of an M-point grid, for the output node x_i = node * 2pi/M.
double trapezoid_level(std::span<const double> kernel, std::span<const double> g, int node, int stride) {
  const int m = static_cast<int>(g.size());
  double sum = 0.0;
  for (int j = 0; j < m; j += stride) {
    int off = node - j;
    if (off < 0) off += m;
    sum += kernel[off] * g[j];
  }
  return sum * kTwoPi * stride / m;
}

// Richardson (Romberg) combination of trapezoid sums at h, 2h, 4h.
double romberg3(double t1, double t2, double t4) {
  const double r1 = (4.0 * t1 - t2) / 3.0;
  const double r2 = (4.0 * t2 - t4) / 3.0;
  return (16.0 * r1 - r2) / 15.0;
}

}  // namespace

// ---------------------------------------------------------------- field

SpectralField::SpectralField(int n_modes) : n_modes_(n_modes) {
  require_valid_modes(n_modes);
  half_.assign(n_modes / 2 + 1, Complex{});
}

SpectralField SpectralField::from_half_spectrum(int n_modes, std::vector<Complex> half) {
  require_valid_modes(n_modes);
  if (static_cast<int>(half.size()) != n_modes / 2 + 1) {
    throw InvalidInput("half spectrum must have N/2+1 entries");
  }
  SpectralField f;
  f.n_modes_ = n_modes;
  f.half_ = std::move(half);
  f.half_.front().imag(0.0);
  f.half_.back().imag(0.0);
  return f;
}

Complex SpectralField::coeff(int k) const {
  const int kk = std::abs(k);
  if (kk > n_modes_ / 2) throw InvalidInput("wavenumber " + std::to_string(k) + " outside the resolved band");
  return k >= 0 ? half_[kk] : std::conj(half_[kk]);
}

void SpectralField::set_coeff(int k, Complex value) {
  const int kk = std::abs(k);
  if (kk > n_modes_ / 2) throw InvalidInput("wavenumber " + std::to_string(k) + " outside the resolved band");
  if (k < 0) value = std::conj(value);
  if (kk == 0 || kk == n_modes_ / 2) value.imag(0.0);
  half_[kk] = value;
}

bool SpectralField::is_finite() const {
  return std::all_of(half_.begin(), half_.end(),
                     [](Complex c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
}

void SpectralField::require_same_size(const SpectralField& other) const {
  if (other.n_modes_ != n_modes_) throw InvalidInput("field resolutions differ");
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  require_same_size(other);
  for (std::size_t i = 0; i < half_.size(); ++i) half_[i] += other.half_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  require_same_size(other);
  for (std::size_t i = 0; i < half_.size(); ++i) half_[i] -= other.half_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double scale) {
  for (auto& c : half_) c *= scale;
  return *this;
}

SpectralField& SpectralField::axpy(double scale, const SpectralField& other) {
  require_same_size(other);
  for (std::size_t i = 0; i < half_.size(); ++i) half_[i] += scale * other.half_[i];
  return *this;
}

void GridSpec::validate() const {
  if (n_modes < 8 || n_modes % 2 != 0) throw InvalidParameter("n_modes must be even and >= 8");
  if (oversample < 2) throw InvalidParameter("oversample must be >= 2");
}

// ---------------------------------------------------------------- transforms

SpectralField to_spectral(std::span<const double> samples) {
  if (samples.size() < 2 || samples.size() % 2 != 0) throw InvalidInput("sample count must be even and >= 2");
  return to_spectral(samples, static_cast<int>(samples.size()));
}

SpectralField to_spectral(std::span<const double> samples, int n_modes) {
  const int m = static_cast<int>(samples.size());
  require_valid_modes(n_modes);
  if (m < n_modes || m % 2 != 0) throw InvalidInput("sample count must be even and >= n_modes");
  for (double v : samples) {
    if (!std::isfinite(v)) throw InvalidInput("non-finite sample");
  }
  std::vector<Complex> spec(m / 2 + 1);
  detail::rfft(samples, spec);
  const double scale = kSqrtTwoPi / m;
  std::vector<Complex> half(n_modes / 2 + 1);
  for (int k = 0; k < n_modes / 2; ++k) half[k] = scale * spec[k];
  half[n_modes / 2] = (m == n_modes) ? Complex{scale * spec[n_modes / 2].real(), 0.0} : Complex{};
  return SpectralField::from_half_spectrum(n_modes, std::move(half));
}

std::vector<double> to_physical(const SpectralField& f, int n_samples) {
  const int n = f.n_modes();
  if (n_samples < n || n_samples % 2 != 0) throw InvalidInput("physical grid must be even and >= n_modes");
  std::vector<Complex> padded(n_samples / 2 + 1, Complex{});
  auto h = f.half();
  std::copy(h.begin(), h.begin() + n / 2, padded.begin());
  padded[n / 2] = (n_samples == n) ? h[n / 2] : 0.5 * h[n / 2];
  std::vector<double> out(n_samples);
  detail::irfft(padded, out);
  const double scale = 1.0 / kSqrtTwoPi;
  for (double& v : out) v *= scale;
  return out;
}

double evaluate(const SpectralField& f, double x) {
  auto h = f.half();
  const int nyq = f.n_modes() / 2;
  double sum = h[0].real();
  const Complex step = std::polar(1.0, x);
  Complex z = step;
  for (int k = 1; k < nyq; ++k, z *= step) sum += 2.0 * (h[k] * z).real();
  sum += h[nyq].real() * std::cos(nyq * x);
  return sum / kSqrtTwoPi;
}

double evaluate_derivative(const SpectralField& f, double x) {
  auto h = f.half();
  const int nyq = f.n_modes() / 2;
  double sum = 0.0;
  const Complex step = std::polar(1.0, x);
  Complex z = step;
  for (int k = 1; k < nyq; ++k, z *= step) sum += 2.0 * (Complex{0.0, double(k)} * h[k] * z).real();
  return sum / kSqrtTwoPi;
}

// ---------------------------------------------------------------- norms

double sobolev_norm(const SpectralField& f, double s) { return std::sqrt(std::max(0.0, sobolev_inner(f, f, s))); }

double l2_norm(const SpectralField& f) { return sobolev_norm(f, 0.0); }

double sobolev_inner(const SpectralField& f, const SpectralField& g, double s) {
  if (f.n_modes() != g.n_modes()) throw InvalidInput("field resolutions differ");
  auto a = f.half();
  auto b = g.half();
  const int n = f.n_modes();
  double sum = 0.0;
  for (int k = 0; k <= n / 2; ++k) {
    const double w = (s == 0.0) ? 1.0 : std::pow(1.0 + double(k) * k, s);
    sum += mode_weight(k, n) * w * (a[k] * std::conj(b[k])).real();
  }
  return sum;
}

double sup_norm(const SpectralField& f, int oversample) {
  const auto vals = to_physical(f, f.n_modes() * oversample);
  double m = 0.0;
  for (double v : vals) m = std::max(m, std::abs(v));
  return m;
}

double w1inf_norm(const SpectralField& f, int oversample) {
  return std::max(sup_norm(f, oversample), sup_norm(derivative(f), oversample));
}

std::pair<double, double> grid_min_max(const SpectralField& f, int oversample) {
  const auto vals = to_physical(f, f.n_modes() * oversample);
  const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
  return {*lo, *hi};
}

// ---------------------------------------------------------------- operators

SpectralField derivative(const SpectralField& f) {
  const int nyq = f.n_modes() / 2;
  return apply_multiplier(f, [nyq](int k) { return k == nyq ? Complex{} : Complex{0.0, double(k)}; });
}

SpectralField bessel_potential(const SpectralField& f, double s) {
  return apply_multiplier(f, [s](int k) { return std::pow(1.0 + double(k) * k, 0.5 * s); });
}

SpectralField helmholtz_inverse(const SpectralField& f) {
  return apply_multiplier(f, [](int k) { return 1.0 / (1.0 + double(k) * k); });
}

SpectralField helmholtz(const SpectralField& f) {
  return apply_multiplier(f, [](int k) { return 1.0 + double(k) * k; });
}

SpectralField shift(const SpectralField& f, double a) {
  SpectralField out = apply_multiplier(f, [a](int k) { return std::polar(1.0, -a * k); });
  out.set_coeff(f.n_modes() / 2, out.coeff(f.n_modes() / 2));
  return out;
}

double green_kernel(double x) {
  const double r = x - kTwoPi * std::floor(x / kTwoPi) - std::numbers::pi;
  return std::cosh(r) / (2.0 * std::sinh(std::numbers::pi));
}

SpectralField green_convolution(const SpectralField& f, int quad_factor) {
  if (quad_factor < 4 || quad_factor % 4 != 0) throw InvalidParameter("quad_factor must be a positive multiple of 4");
  const int n = f.n_modes();
  const int m = n * quad_factor;
  const auto g = to_physical(f, m);
  std::vector<double> kernel(m);
  for (int j = 0; j < m; ++j) kernel[j] = green_kernel(grid_point(j, m));

  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    const int node = i * quad_factor;
    out[i] = romberg3(trapezoid_level(kernel, g, node, 1), trapezoid_level(kernel, g, node, 2),
                      trapezoid_level(kernel, g, node, 4));
  }
  return to_spectral(out);
}

std::vector<double> one_sided_kernel_plus(const SpectralField& momentum, std::span<const double> xs, int quad_factor) {
  if (quad_factor < 4 || quad_factor % 4 != 0) throw InvalidParameter("quad_factor must be a positive multiple of 4");
  const int m = momentum.n_modes() * quad_factor;
  const double norm = 1.0 / (2.0 * std::sinh(std::numbers::pi));
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) {
    // y runs over [x - 2pi, x]; the integrand e^{x-y-pi} V(y) is smooth there
    // but not periodic, so the end points carry half weight.
    const auto v = to_physical(shift(momentum, -x), m);  // v[j] = V(x + 2pi j/m)
    auto level = [&](int stride) {
      const int count = m / stride;
      const double h = kTwoPi / count;
      double sum = 0.5 * (std::exp(std::numbers::pi) * v[0] + std::exp(-std::numbers::pi) * v[0]);
      for (int j = 1; j < count; ++j) {
        const double z = kTwoPi - j * h;  // x - y with y = x - 2pi + j h
        sum += std::exp(z - std::numbers::pi) * v[j * stride];
      }
      return sum * h;
    };
    out.push_back(norm * romberg3(level(1), level(2), level(4)));
  }
  return out;
}

// ---------------------------------------------------------------- mollifiers

double smooth_glue(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

double mollifier_symbol(double xi) {
  const double a = std::abs(xi);
  if (a <= 1.0) return 1.0;
  if (a >= 2.0) return 0.0;
  const double up = smooth_glue(2.0 - a);
  return up / (up + smooth_glue(a - 1.0));
}

SpectralField mollify_j(const SpectralField& f, double eps) {
  require_epsilon(eps);
  return apply_multiplier(f, [eps](int k) { return mollifier_symbol(eps * k); });
}

SpectralField mollify_t(const SpectralField& f, double eps) {
  require_epsilon(eps);
  return apply_multiplier(f, [eps](int k) { return 1.0 / (1.0 + eps * eps * double(k) * k); });
}

int dealias_samples(int n_modes, int degree) {
  if (degree < 1) throw InvalidParameter("product degree must be >= 1");
  return ((degree + 2) / 2) * n_modes;  // ceil((d+1)/2) * N
}

}  // namespace sgch
