#include "sgch/fields.hpp"

#include <cmath>
#include <vector>

namespace sgch {

SpectralField cosine_field(int n_modes, double mean, double amplitude, int mode, double phase) {
  if (mode < 1 || mode >= n_modes / 2) throw InvalidParameter("cosine mode must satisfy 1 <= mode < N/2");
  SpectralField f(n_modes);
  const double root_two_pi = std::sqrt(kTwoPi);
  f.set_coeff(0, mean * root_two_pi);
  f.set_coeff(mode, 0.5 * amplitude * root_two_pi * std::polar(1.0, phase));
  return f;
}

SpectralField sample_function(int n_modes, const std::function<double(double)>& f) {
  std::vector<double> v(n_modes);
  for (int j = 0; j < n_modes; ++j) v[j] = f(grid_point(j, n_modes));
  return to_spectral(v);
}

SpectralField random_smooth_field(int n_modes, int band, double decay, PhiloxStream& rng) {
  if (band < 1 || band >= n_modes / 2) throw InvalidParameter("random field band must satisfy 1 <= band < N/2");
  SpectralField f(n_modes);
  f.set_coeff(0, rng.normal());
  for (int k = 1; k <= band; ++k) {
    const double damp = std::pow(1.0 + double(k) * k, -0.5 * decay);
    const double re = rng.normal();
    const double im = rng.normal();
    f.set_coeff(k, damp * Complex{re, im});
  }
  return f;
}

}  // namespace sgch
