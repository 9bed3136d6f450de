#pragma once

#include <functional>

#include "sgch/rng.hpp"
#include "sgch/spectral.hpp"

namespace sgch {

/// mean + amplitude * cos(mode * x + phase).
SpectralField cosine_field(int n_modes, double mean, double amplitude, int mode = 1, double phase = 0.0);

/// Samples f on the N-point grid and transforms.
SpectralField sample_function(int n_modes, const std::function<double(double)>& f);

/// Random smooth band-limited field: Gaussian mean, Gaussian complex
/// coefficients on modes 1..band damped by (1+k^2)^{-decay/2}.
SpectralField random_smooth_field(int n_modes, int band, double decay, PhiloxStream& rng);

}  // namespace sgch
