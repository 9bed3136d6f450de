#include "sgch/noise.hpp"

#include <cmath>
#include <numbers>

#include "sgch/dynamics.hpp"

namespace sgch {

TimeProfile::TimeProfile(double amplitude, double modulation, double frequency)
    : amplitude_(amplitude), modulation_(modulation), frequency_(frequency) {
  if (!std::isfinite(amplitude) || !std::isfinite(modulation) || !std::isfinite(frequency)) {
    throw InvalidParameter("noise profile parameters must be finite");
  }
  if (std::abs(modulation) >= 1.0) throw InvalidParameter("noise profile needs |modulation| < 1");
}

double TimeProfile::operator()(double t) const {
  if (modulation_ == 0.0) return amplitude_;
  return amplitude_ * (1.0 + modulation_ * std::sin(frequency_ * t));
}

double TimeProfile::lower_sq() const {
  const double m = frequency_ == 0.0 ? 0.0 : std::abs(modulation_);
  return amplitude_ * amplitude_ * (1.0 - m) * (1.0 - m);
}

double TimeProfile::upper_sq() const {
  const double m = frequency_ == 0.0 ? 0.0 : std::abs(modulation_);
  return amplitude_ * amplitude_ * (1.0 + m) * (1.0 + m);
}

void TimeProfile::require_admissible() const {
  if (!(lower_sq() > 0.0)) {
    throw InvalidParameter("b_* > 0 violated: noise intensity needs 0 < b_* <= b(0)^2 <= sup b^2 <= b^*");
  }
}

double TimeProfile::integral_sq(double t) const {
  // b^2 = A^2 (1 + 2 m sin(w t) + m^2 sin^2(w t))
  const double a2 = amplitude_ * amplitude_;
  const double m = modulation_;
  const double w = frequency_;
  if (m == 0.0 || w == 0.0) return a2 * t;
  const double lin = t + 2.0 * m * (1.0 - std::cos(w * t)) / w;
  const double quad = m * m * (0.5 * t - std::sin(2.0 * w * t) / (4.0 * w));
  return a2 * (lin + quad);
}

NoiseModel NoiseModel::linear(TimeProfile b) {
  b.require_admissible();
  NoiseModel m;
  m.kind_ = Kind::linear;
  m.profile_ = b;
  return m;
}

NoiseModel NoiseModel::f_bounded(int k) {
  if (k < 1) throw InvalidParameter("nonlinearity order k must be >= 1");
  NoiseModel m;
  m.kind_ = Kind::f_bounded;
  m.order_ = k;
  return m;
}

NoiseModel NoiseModel::diagonal(std::vector<double> sigma) {
  for (double s : sigma) {
    if (!std::isfinite(s)) throw InvalidParameter("diagonal noise coefficients must be finite");
  }
  NoiseModel m;
  m.kind_ = Kind::diagonal;
  m.sigma_ = std::move(sigma);
  return m;
}

int NoiseModel::n_brownian() const {
  switch (kind_) {
    case Kind::zero:
      return 0;
    case Kind::linear:
    case Kind::f_bounded:
      return 1;
    case Kind::diagonal:
      return static_cast<int>(sigma_.size());
  }
  return 0;
}

SpectralField NoiseModel::column(double t, const SpectralField& u, int j) const {
  if (j < 1 || j > n_brownian()) throw InvalidInput("noise column index out of range");
  switch (kind_) {
    case Kind::linear:
      return profile_(t) * u;
    case Kind::f_bounded:
      return f_nonlocal(u, order_);
    case Kind::diagonal:
      return sigma_[j - 1] * noise_basis(j, u.n_modes());
    case Kind::zero:
      break;
  }
  return SpectralField(u.n_modes());
}

std::string to_string(NoiseModel::Kind kind) {
  switch (kind) {
    case NoiseModel::Kind::zero:
      return "zero";
    case NoiseModel::Kind::linear:
      return "linear";
    case NoiseModel::Kind::f_bounded:
      return "f_bounded";
    case NoiseModel::Kind::diagonal:
      return "diagonal";
  }
  return "unknown";
}

SpectralField noise_basis(int j, int n_modes) {
  if (j < 1) throw InvalidParameter("noise basis index starts at 1");
  SpectralField e(n_modes);
  const int m = j / 2;
  if (m >= n_modes / 2) throw InvalidParameter("noise basis index exceeds the resolved band");
  // Unitary coefficients: 1/sqrt(2pi) -> 1, cos(mx)/sqrt(pi) -> 1/sqrt2 at +-m,
  // sin(mx)/sqrt(pi) -> -i/sqrt2 at +m.
  if (j == 1) {
    e.set_coeff(0, 1.0);
  } else if (j % 2 == 0) {
    e.set_coeff(m, std::numbers::sqrt2 / 2.0);
  } else {
    e.set_coeff(m, Complex{0.0, -std::numbers::sqrt2 / 2.0});
  }
  return e;
}

SpectralField noise_apply(const NoiseModel& model, double t, const SpectralField& u, std::span<const double> dW) {
  if (static_cast<int>(dW.size()) != model.n_brownian()) {
    throw InvalidInput("dW has " + std::to_string(dW.size()) + " entries, noise model needs " +
                       std::to_string(model.n_brownian()));
  }
  SpectralField out(u.n_modes());
  switch (model.kind()) {
    case NoiseModel::Kind::zero:
      break;
    case NoiseModel::Kind::linear:
      out.axpy(model.profile()(t) * dW[0], u);
      break;
    case NoiseModel::Kind::f_bounded:
      out.axpy(dW[0], f_nonlocal(u, model.order()));
      break;
    case NoiseModel::Kind::diagonal:
      for (std::size_t j = 0; j < dW.size(); ++j) out.axpy(model.sigma()[j] * dW[j], noise_basis(int(j) + 1, u.n_modes()));
      break;
  }
  return out;
}

double hilbert_schmidt_norm(const NoiseModel& model, double t, const SpectralField& u, double s) {
  double sum = 0.0;
  for (int j = 1; j <= model.n_brownian(); ++j) {
    const double c = sobolev_norm(model.column(t, u, j), s);
    sum += c * c;
  }
  return std::sqrt(sum);
}

double growth_ratio(const NoiseModel& model, double t, const SpectralField& u, double s) {
  return hilbert_schmidt_norm(model, t, u, s) / (1.0 + sobolev_norm(u, s));
}

}  // namespace sgch
