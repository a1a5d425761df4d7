#ifndef RMVPE_FFT_HPP
#define RMVPE_FFT_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace rmvpe {

// In-place iterative radix-2 FFT. Size must be a power of two.
// inverse=true applies the conjugate transform and scales by 1/n.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse);

// Forward FFT of a real signal zero-padded/truncated to n (power of two).
// Returns the full complex spectrum of length n.
std::vector<std::complex<double>> fft_real(const double* x, std::size_t len,
                                           std::size_t n);

std::size_t next_pow2(std::size_t n);

}  // namespace rmvpe

#endif  // RMVPE_FFT_HPP
