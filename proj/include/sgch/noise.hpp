#pragma once

#include <span>
#include <string>
#include <vector>

#include "sgch/spectral.hpp"

namespace sgch {

/// Noise intensity b(t) = amplitude * (1 + modulation * sin(frequency * t)).
/// With |modulation| < 1 this is continuous with
///   b_* = amplitude^2 (1-|modulation|)^2 <= b(0)^2 <= sup b^2 = b^*.
class TimeProfile {
 public:
  TimeProfile() = default;
  TimeProfile(double amplitude, double modulation, double frequency);
  static TimeProfile constant(double b) { return TimeProfile(b, 0.0, 0.0); }

  double operator()(double t) const;
  double amplitude() const { return amplitude_; }
  double modulation() const { return modulation_; }
  double frequency() const { return frequency_; }

  double lower_sq() const;  // b_*
  double upper_sq() const;  // b^*
  bool is_zero() const { return amplitude_ == 0.0; }

  /// Throws InvalidParameter unless 0 < b_* <= b(0)^2 <= sup b^2 <= b^*.
  void require_admissible() const;

  /// int_0^t b^2, closed form.
  double integral_sq(double t) const;

 private:
  double amplitude_ = 0.0;
  double modulation_ = 0.0;
  double frequency_ = 0.0;
};

/// Noise coefficient h(t,u) acting on a finite truncation W = sum_j e_j W_j.
class NoiseModel {
 public:
  enum class Kind { zero, linear, f_bounded, diagonal };

  NoiseModel() = default;
  static NoiseModel none() { return {}; }
  /// h(t,u) e_1 = b(t) u.  b must be admissible.
  static NoiseModel linear(TimeProfile b);
  /// h(t,u) e_1 = F(u) with nonlinearity order k, h e_j = 0 otherwise, so
  /// ||h||_{L2(U;H^s)} = ||F(u)||_{H^s}.
  static NoiseModel f_bounded(int k);
  /// Additive: h e_j = sigma_j ehat_j, j = 1..M.
  static NoiseModel diagonal(std::vector<double> sigma);

  Kind kind() const { return kind_; }
  int n_brownian() const;
  const TimeProfile& profile() const { return profile_; }
  int order() const { return order_; }
  std::span<const double> sigma() const { return sigma_; }

  /// h(t,u) e_j as a field, 1-based j.
  SpectralField column(double t, const SpectralField& u, int j) const;

 private:
  Kind kind_ = Kind::zero;
  TimeProfile profile_;
  int order_ = 1;
  std::vector<double> sigma_;
};

std::string to_string(NoiseModel::Kind kind);

/// Orthonormal L2 basis: ehat_1 = 1/sqrt(2pi), ehat_{2m} = cos(mx)/sqrt(pi),
/// ehat_{2m+1} = sin(mx)/sqrt(pi).
SpectralField noise_basis(int j, int n_modes);

/// sum_j h(t,u) e_j dW_j.  dW.size() must equal n_brownian().
SpectralField noise_apply(const NoiseModel& model, double t, const SpectralField& u, std::span<const double> dW);

/// ||h(t,u)||_{L2(U;H^s)} over the truncated basis.
double hilbert_schmidt_norm(const NoiseModel& model, double t, const SpectralField& u, double s);

/// ||h(t,u)||_{L2(U;H^s)} / (1 + ||u||_{H^s}).  Empirical envelope for the
/// growth function f(||u||_{W^{1,inf}}) of the well-posedness hypothesis.
double growth_ratio(const NoiseModel& model, double t, const SpectralField& u, double s);

}  // namespace sgch
