#ifndef RMVPE_DEGRADATION_HPP
#define RMVPE_DEGRADATION_HPP

#include <cstdint>
#include <string>

#include "rmvpe/audio_io.hpp"

namespace rmvpe {

// "babble" is a synthetic multi-talker stand-in (a sum of speech-shaped,
// amplitude-modulated noise streams), not a recorded crowd.
enum class NoiseKind { kWhite, kPink, kBrown, kBabble };

NoiseKind parse_noise_kind(const std::string& name);
std::string noise_kind_name(NoiseKind kind);

// Seeded noise with unit RMS. White is i.i.d. Gaussian; pink and brown shape
// a white draw in the frequency domain by f^-1/2 and f^-1 (-3 and -6
// dB/octave power slopes) with the DC bin zeroed.
Waveform gen_noise(NoiseKind kind, std::int64_t n_samples, int sample_rate,
                   std::uint64_t seed);

// signal + g * noise with g = RMS(signal) / (RMS(noise) * 10^(snr_db/20)).
// The noise is looped or truncated to the signal length before scaling; the
// sum is not renormalized. Throws DomainError for a silent signal or a
// sample rate mismatch.
Waveform mix_at_snr(const Waveform& signal, const Waveform& noise, double snr_db);

// Least-squares slope of 10*log10(power) vs log2(frequency) over
// [f_lo, f_hi], from the periodogram; the oracle for noise color tests and
// the sweep's sanity checks. Returns dB/octave.
double spectral_slope_db_per_octave(const Waveform& w, double f_lo, double f_hi);

}  // namespace rmvpe

#endif  // RMVPE_DEGRADATION_HPP
