#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace sgch::detail {
namespace {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

// fftw_execute_* is thread safe, planning is not.
class PlanCache {
 public:
  const PlanPair& get(int n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;

    double* real = fftw_alloc_real(n);
    fftw_complex* cplx = fftw_alloc_complex(n / 2 + 1);
    constexpr unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair p;
    p.forward = fftw_plan_dft_r2c_1d(n, real, cplx, flags);
    p.backward = fftw_plan_dft_c2r_1d(n, cplx, real, flags);
    fftw_free(real);
    fftw_free(cplx);
    if (p.forward == nullptr || p.backward == nullptr) throw std::runtime_error("FFTW planning failed");
    return plans_.emplace(n, p).first->second;
  }

  ~PlanCache() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.backward);
    }
  }

 private:
  std::mutex mutex_;
  std::map<int, PlanPair> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

}  // namespace

void rfft(std::span<const double> in, std::span<std::complex<double>> out) {
  const int n = static_cast<int>(in.size());
  if (static_cast<int>(out.size()) != n / 2 + 1) throw std::logic_error("rfft: output size mismatch");
  const PlanPair& p = cache().get(n);
  // r2c never writes its input.
  fftw_execute_dft_r2c(p.forward, const_cast<double*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
}

void irfft(std::span<const std::complex<double>> in, std::span<double> out) {
  const int n = static_cast<int>(out.size());
  if (static_cast<int>(in.size()) != n / 2 + 1) throw std::logic_error("irfft: input size mismatch");
  const PlanPair& p = cache().get(n);
  // c2r destroys its input.
  thread_local std::vector<std::complex<double>> scratch;
  scratch.assign(in.begin(), in.end());
  fftw_execute_dft_c2r(p.backward, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
}

}  // namespace sgch::detail
