#pragma once

#include <complex>
#include <span>
#include <vector>

namespace hwb {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

// Unnormalized DFT, X_k = sum_j x_j exp(-2 pi i jk/n). In-place calls are allowed.
void fft_forward(std::span<const cplx> in, std::span<cplx> out);

// Unnormalized inverse DFT, x_j = sum_k X_k exp(+2 pi i jk/n); no 1/n factor.
void fft_backward(std::span<const cplx> in, std::span<cplx> out);

CVec fft_forward(std::span<const cplx> in);
CVec fft_backward(std::span<const cplx> in);

}  // namespace hwb
