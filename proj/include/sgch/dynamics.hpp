#pragma once

#include <optional>

#include "sgch/spectral.hpp"

namespace sgch {

/// Drift configuration: nonlinearity order k and, for the regularized
/// scheme, the W^{1,inf} cut-off radius R and mollifier width eps.
struct DriftSpec {
  int k = 1;
  std::optional<double> cutoff_R;
  std::optional<double> mollifier_eps;

  void validate() const;
  bool regularized() const { return cutoff_R.has_value() || mollifier_eps.has_value(); }
};

/// F(u) = F1 + F2 + F3 with
///   F1 = (1-d_xx)^{-1} d_x(u^{k+1}),
///   F2 = (2k-1)/2 (1-d_xx)^{-1} d_x(u^{k-1} u_x^2),
///   F3 = (k-1)/2 (1-d_xx)^{-1} (u^{k-2} u_x^3)   (absent for k = 1).
/// Products are alias free on the padded grid.
SpectralField f_nonlocal(const SpectralField& u, int k);

/// u^k u_x + F(u).
SpectralField drift(const SpectralField& u, int k);

/// Transport part alone, P_N(u^k u_x).
SpectralField transport(const SpectralField& u, int k);

/// Smooth plateau: 1 on [0,R], 0 beyond 2R, monotone in between.  R > 1.
double chi_cutoff(double x, double R);

/// chi_R(||u||_{W^{1,inf}}) [J_eps((J_eps u)^k d_x J_eps u) + F(u)].
/// Requires both cutoff_R and mollifier_eps in `spec`.
SpectralField cutoff_drift(const SpectralField& u, const DriftSpec& spec, int oversample = 4);

/// ||F(u)||_{H^s} / (||u||_{W^{1,inf}}^k ||u||_{H^s}); its sup over fields is
/// the constant of the F growth estimate.
double f_growth_ratio(const SpectralField& u, int k, double s, int oversample = 4);

/// ||F(u)-F(v)||_{H^s} / ((||u||_{H^s} + ||v||_{H^s})^k ||u-v||_{H^s}).
double f_lipschitz_ratio(const SpectralField& u, const SpectralField& v, int k, double s);

}  // namespace sgch
