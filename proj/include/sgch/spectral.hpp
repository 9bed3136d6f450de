#pragma once

#include <complex>
#include <span>
#include <vector>

#include "sgch/errors.hpp"

namespace sgch {

using Complex = std::complex<double>;

/// Real 2*pi-periodic field held as unitary Fourier coefficients
///
///   f(x) = (2 pi)^{-1/2} sum_k fhat(k) e^{ikx},
///   fhat(k) = (2 pi)^{-1/2} int_0^{2pi} f(x) e^{-ikx} dx,
///
/// for wavenumbers -N/2 <= k <= N/2.  Only k = 0..N/2 is stored; negative
/// modes are the complex conjugates, so Hermitian symmetry holds by
/// construction.  The Nyquist mode k = N/2 is kept only when it comes from
/// sampled data; derivatives and dealiased products drop it.
class SpectralField {
 public:
  SpectralField() = default;

  /// Zero field with N modes (N even, N >= 2).
  explicit SpectralField(int n_modes);

  /// Build from the non-negative half spectrum (size N/2 + 1).
  static SpectralField from_half_spectrum(int n_modes, std::vector<Complex> half);

  int n_modes() const { return n_modes_; }
  int max_wavenumber() const { return n_modes_ / 2; }

  /// Coefficient for any |k| <= N/2; negative k returns the conjugate.
  Complex coeff(int k) const;

  /// Sets fhat(k) and, implicitly, fhat(-k) = conj(fhat(k)).  The imaginary
  /// part is discarded for k = 0 and k = N/2.
  void set_coeff(int k, Complex value);

  std::span<const Complex> half() const { return half_; }
  std::span<Complex> half() { return half_; }

  bool is_finite() const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(double scale);

  /// this += scale * other
  SpectralField& axpy(double scale, const SpectralField& other);

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double c, SpectralField a) { return a *= c; }
  friend SpectralField operator*(SpectralField a, double c) { return a *= c; }

 private:
  void require_same_size(const SpectralField& other) const;

  int n_modes_ = 0;
  std::vector<Complex> half_;
};

/// Resolution and the oversampled physical grid used for sup norms.
struct GridSpec {
  int n_modes = 256;
  int oversample = 4;

  int samples() const { return n_modes * oversample; }
  void validate() const;
};

constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Grid point j of an M-point uniform grid on [0, 2pi).
inline double grid_point(int j, int n_samples) { return kTwoPi * j / n_samples; }

/// Samples on x_j = 2 pi j / N -> N-mode field.  Throws InvalidInput on a
/// non-finite sample or an odd/too small sample count.
SpectralField to_spectral(std::span<const double> samples);

/// Samples on an M-point grid projected onto the first N modes (M >= N).
/// Modes |k| >= N/2 are discarded, including the N-grid Nyquist mode.
SpectralField to_spectral(std::span<const double> samples, int n_modes);

/// Evaluates the trigonometric interpolant on an M-point grid, M >= N, M even.
std::vector<double> to_physical(const SpectralField& f, int n_samples);
inline std::vector<double> to_physical(const SpectralField& f) { return to_physical(f, f.n_modes()); }

/// Pointwise evaluation of the interpolant and its derivative, O(N).
double evaluate(const SpectralField& f, double x);
double evaluate_derivative(const SpectralField& f, double x);

double sobolev_norm(const SpectralField& f, double s);
double l2_norm(const SpectralField& f);

/// H^s inner product  sum_k (1+k^2)^s fhat(k) conj(ghat(k)), real part.
double sobolev_inner(const SpectralField& f, const SpectralField& g, double s);

/// sup |f| on the oversample*N point grid.
double sup_norm(const SpectralField& f, int oversample = 4);

/// max(||f||_inf, ||f_x||_inf), both sampled on the oversample*N grid.
double w1inf_norm(const SpectralField& f, int oversample = 4);

/// Minimum and maximum of f on the oversample*N grid.
std::pair<double, double> grid_min_max(const SpectralField& f, int oversample = 4);

SpectralField derivative(const SpectralField& f);

/// D^s = (1 - d_xx)^{s/2}, the diagonal multiplier (1+k^2)^{s/2}.
SpectralField bessel_potential(const SpectralField& f, double s);

/// (1 - d_xx)^{-1}: multiplier 1/(1+k^2).
SpectralField helmholtz_inverse(const SpectralField& f);

/// (1 - d_xx): multiplier 1+k^2.  Used for the momentum V = v - v_xx.
SpectralField helmholtz(const SpectralField& f);

/// f(x - a).
SpectralField shift(const SpectralField& f, double a);

/// Periodic Green's function of 1 - d_xx on the torus,
/// cosh(x - 2pi floor(x/2pi) - pi) / (2 sinh pi).
double green_kernel(double x);

/// (1 - d_xx)^{-1} f computed in physical space as the periodic convolution
/// with green_kernel.  Trapezoid sums on the quad_factor*N grid and the two
/// coarser halvings are Richardson-combined; the kernel's derivative jump
/// sits on a grid node so the trapezoid error is an even power series in h.
/// Independent of helmholtz_inverse; meant as its cross-check.
SpectralField green_convolution(const SpectralField& f, int quad_factor = 16);

/// (2 sinh pi)^{-1} int_0^{2pi} e^{(x-y-2pi floor((x-y)/2pi)-pi)} V(y) dy at
/// the points xs, same quadrature as green_convolution.  For V = v - v_xx
/// this reproduces v + v_x.
std::vector<double> one_sided_kernel_plus(const SpectralField& momentum, std::span<const double> xs,
                                          int quad_factor = 16);

/// e^{-1/t} for t > 0, else 0.
double smooth_glue(double t);

/// Mollifier symbol jhat: 1 on [-1,1], 0 for |xi| >= 2, C-infinity and
/// monotone in between.
double mollifier_symbol(double xi);

/// J_eps f: fhat(k) -> jhat(eps k) fhat(k).  eps must lie in (0,1).
SpectralField mollify_j(const SpectralField& f, double eps);

/// T_eps f = (1 - eps^2 d_xx)^{-1} f.  eps must lie in (0,1).
SpectralField mollify_t(const SpectralField& f, double eps);

/// Products of N-mode fields formed on a zero-padded grid.  `pad_samples`
/// is the physical grid size; exact (alias free) up to degree d when
/// pad_samples >= (d+1)N/2.
int dealias_samples(int n_modes, int degree);

}  // namespace sgch
