#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace occlab {

/// Unnormalized complex DFT y_j = sum_k x_k exp(sign * 2 pi i j k / n),
/// computed by FFTW. Plans are built once per (n, sign) with FFTW_ESTIMATE,
/// which keeps results independent of timing, and are shared between threads.
void dft(std::vector<std::complex<double>>& data, int sign);

}  // namespace occlab
