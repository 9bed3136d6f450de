#pragma once

#include <complex>
#include <span>

namespace sgch::detail {

/// out[k] = sum_j in[j] e^{-2 pi i j k / M}, k = 0..M/2.  out.size() == M/2 + 1.
void rfft(std::span<const double> in, std::span<std::complex<double>> out);

/// out[j] = sum_{k=0}^{M-1} Y_k e^{2 pi i j k / M} with Y_{M-k} = conj(Y_k);
/// only Y_0..Y_{M/2} are read.  The input is not modified.
void irfft(std::span<const std::complex<double>> in, std::span<double> out);

}  // namespace sgch::detail
