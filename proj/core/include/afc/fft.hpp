#pragma once

#include <complex>
#include <vector>

namespace afc {

using cdouble = std::complex<double>;

/// In-place forward DFT, kernel e^{-i 2 pi k n / N}, unnormalized.
void fft_forward(std::vector<cdouble>& data);

/// In-place inverse DFT including the 1/N factor.
void fft_inverse(std::vector<cdouble>& data);

/// Discrete Hilbert transform of a real sequence with the 1/(pi x) kernel
/// sign convention (hilbert(cos) = sin). The input is mirror-extended to
/// twice its length before transforming, which removes the edge
/// discontinuity of the implicit periodic continuation; DC and Nyquist bins
/// are zeroed.
std::vector<double> hilbert(const std::vector<double>& u);

/// Cyclic convolution of two equal-length real sequences via FFT.
std::vector<double> cyclic_convolve(const std::vector<double>& a,
                                    const std::vector<double>& b);

}  // namespace afc
