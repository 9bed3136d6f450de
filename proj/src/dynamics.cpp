#include "sgch/dynamics.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace sgch {
namespace {

void require_order(int k) {
  if (k < 1) throw InvalidParameter("nonlinearity order k must be >= 1, got " + std::to_string(k));
}

double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

struct NonlinearTerms {
  SpectralField transport;  // P_N(u^k u_x)
  SpectralField divergence;  // P_N(u^{k+1} + (2k-1)/2 u^{k-1} u_x^2)
  SpectralField cubic;       // P_N((k-1)/2 u^{k-2} u_x^3)
};

// All degree-(k+1) products of u and u_x in one pass over the padded grid.
NonlinearTerms nonlinear_terms(const SpectralField& u, int k, bool want_transport, bool want_f) {
  const int n = u.n_modes();
  const int m = dealias_samples(n, k + 1);
  const auto w = to_physical(u, m);
  const auto wx = to_physical(derivative(u), m);

  std::vector<double> tr(want_transport ? m : 0), dv(want_f ? m : 0), cu(want_f && k >= 2 ? m : 0);
  const double c2 = 0.5 * (2 * k - 1);
  const double c3 = 0.5 * (k - 1);
  for (int j = 0; j < m; ++j) {
    const double uj = w[j];
    const double dj = wx[j];
    const double pk1 = ipow(uj, k - 1);
    if (want_transport) tr[j] = pk1 * uj * dj;
    if (want_f) {
      dv[j] = pk1 * uj * uj + c2 * pk1 * dj * dj;
      if (k >= 2) cu[j] = c3 * ipow(uj, k - 2) * dj * dj * dj;
    }
  }
  NonlinearTerms out{SpectralField(n), SpectralField(n), SpectralField(n)};
  if (want_transport) out.transport = to_spectral(tr, n);
  if (want_f) {
    out.divergence = to_spectral(dv, n);
    if (k >= 2) out.cubic = to_spectral(cu, n);
  }
  return out;
}

SpectralField assemble_f(const NonlinearTerms& t, int k) {
  SpectralField inner = derivative(t.divergence);
  if (k >= 2) inner += t.cubic;
  return helmholtz_inverse(inner);
}

}  // namespace

void DriftSpec::validate() const {
  require_order(k);
  if (cutoff_R && !(*cutoff_R > 1.0)) throw InvalidParameter("cutoff_R must satisfy R > 1");
  if (mollifier_eps && !(*mollifier_eps > 0.0 && *mollifier_eps < 1.0)) {
    throw InvalidParameter("mollifier eps must lie in (0,1)");
  }
}

SpectralField f_nonlocal(const SpectralField& u, int k) {
  require_order(k);
  return assemble_f(nonlinear_terms(u, k, false, true), k);
}

SpectralField transport(const SpectralField& u, int k) {
  require_order(k);
  return nonlinear_terms(u, k, true, false).transport;
}

SpectralField drift(const SpectralField& u, int k) {
  require_order(k);
  const auto t = nonlinear_terms(u, k, true, true);
  SpectralField out = assemble_f(t, k);
  out += t.transport;
  return out;
}

double chi_cutoff(double x, double R) {
  if (!(R > 1.0)) throw InvalidParameter("cut-off radius must satisfy R > 1");
  return mollifier_symbol(x / R);
}

SpectralField cutoff_drift(const SpectralField& u, const DriftSpec& spec, int oversample) {
  spec.validate();
  if (!spec.cutoff_R || !spec.mollifier_eps) {
    throw InvalidParameter("cutoff_drift needs both cutoff_R and mollifier_eps");
  }
  const double chi = chi_cutoff(w1inf_norm(u, oversample), *spec.cutoff_R);
  if (chi == 0.0) return SpectralField(u.n_modes());
  const double eps = *spec.mollifier_eps;
  SpectralField out = mollify_j(transport(mollify_j(u, eps), spec.k), eps);
  out += f_nonlocal(u, spec.k);
  out *= chi;
  return out;
}

double f_growth_ratio(const SpectralField& u, int k, double s, int oversample) {
  const double denom = std::pow(w1inf_norm(u, oversample), k) * sobolev_norm(u, s);
  return denom > 0.0 ? sobolev_norm(f_nonlocal(u, k), s) / denom : 0.0;
}

double f_lipschitz_ratio(const SpectralField& u, const SpectralField& v, int k, double s) {
  const double denom = std::pow(sobolev_norm(u, s) + sobolev_norm(v, s), k) * sobolev_norm(u - v, s);
  return denom > 0.0 ? sobolev_norm(f_nonlocal(u, k) - f_nonlocal(v, k), s) / denom : 0.0;
}

}  // namespace sgch
