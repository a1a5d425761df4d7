#include "rmvpe/degradation.hpp"

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "rmvpe/common.hpp"
#include "rmvpe/fft.hpp"

namespace rmvpe {
namespace {

double rms(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

void normalize_rms(std::vector<double>& x) {
  const double r = rms(x);
  if (r <= 0.0) throw DomainError("noise came out silent");
  for (double& v : x) v /= r;
}

std::vector<double> white(std::int64_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (double& v : x) v = dist(rng);
  return x;
}

// shape a white draw by f^-exponent in the frequency domain
std::vector<double> shaped(std::int64_t n, int sample_rate, std::uint64_t seed,
                           double exponent) {
  const std::int64_t npad = next_pow2(n);
  std::vector<std::complex<double>> spec(static_cast<std::size_t>(npad));
  const auto base = white(npad, seed);
  for (std::int64_t i = 0; i < npad; ++i) spec[static_cast<std::size_t>(i)] = base[static_cast<std::size_t>(i)];
  fft_inplace(spec, false);
  spec[0] = 0.0;  // no DC drift
  for (std::int64_t k = 1; k <= npad / 2; ++k) {
    const double f = static_cast<double>(k) * sample_rate / static_cast<double>(npad);
    const double g = std::pow(f, -exponent);
    spec[static_cast<std::size_t>(k)] *= g;
    if (k < npad - k) spec[static_cast<std::size_t>(npad - k)] *= g;
  }
  fft_inplace(spec, true);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = spec[static_cast<std::size_t>(i)].real();
  return x;
}

// One speech-shaped stream: white noise tilted toward low frequencies with a
// gentle rolloff above ~500 Hz, slowly amplitude-modulated at a syllabic rate.
std::vector<double> babble_stream(std::int64_t n, int sample_rate, std::uint64_t seed) {
  const std::int64_t npad = next_pow2(n);
  std::vector<std::complex<double>> spec(static_cast<std::size_t>(npad));
  const auto base = white(npad, seed);
  for (std::int64_t i = 0; i < npad; ++i) spec[static_cast<std::size_t>(i)] = base[static_cast<std::size_t>(i)];
  fft_inplace(spec, false);
  spec[0] = 0.0;
  for (std::int64_t k = 1; k <= npad / 2; ++k) {
    const double f = static_cast<double>(k) * sample_rate / static_cast<double>(npad);
    const double g = 1.0 / (1.0 + (f / 500.0) * (f / 500.0));
    spec[static_cast<std::size_t>(k)] *= g;
    if (k < npad - k) spec[static_cast<std::size_t>(npad - k)] *= g;
  }
  fft_inplace(spec, true);
  std::mt19937_64 rng(seed ^ 0x5bd1e995u);
  std::uniform_real_distribution<double> rate(2.0, 6.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  const double mod_hz = rate(rng), mod_phase = phase(rng);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double env = 0.55 + 0.45 * std::sin(2.0 * M_PI * mod_hz * t + mod_phase);
    x[static_cast<std::size_t>(i)] = spec[static_cast<std::size_t>(i)].real() * env;
  }
  return x;
}

}  // namespace

NoiseKind parse_noise_kind(const std::string& name) {
  if (name == "white") return NoiseKind::kWhite;
  if (name == "pink") return NoiseKind::kPink;
  if (name == "brown") return NoiseKind::kBrown;
  if (name == "babble") return NoiseKind::kBabble;
  throw ConfigError("unknown noise kind: " + name +
                    " (expected white|pink|brown|babble)");
}

std::string noise_kind_name(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kWhite: return "white";
    case NoiseKind::kPink: return "pink";
    case NoiseKind::kBrown: return "brown";
    case NoiseKind::kBabble: return "babble";
  }
  throw ConfigError("bad noise kind value");
}

Waveform gen_noise(NoiseKind kind, std::int64_t n_samples, int sample_rate,
                   std::uint64_t seed) {
  if (n_samples < 1) throw DomainError("gen_noise: need at least one sample");
  Waveform w;
  w.sample_rate = sample_rate;
  switch (kind) {
    case NoiseKind::kWhite:
      w.samples = white(n_samples, seed);
      break;
    case NoiseKind::kPink:
      w.samples = shaped(n_samples, sample_rate, seed, 0.5);
      break;
    case NoiseKind::kBrown:
      w.samples = shaped(n_samples, sample_rate, seed, 1.0);
      break;
    case NoiseKind::kBabble: {
      w.samples.assign(static_cast<std::size_t>(n_samples), 0.0);
      for (int s = 0; s < 8; ++s) {
        const auto stream =
            babble_stream(n_samples, sample_rate, seed * 8u + static_cast<std::uint64_t>(s));
        for (std::size_t i = 0; i < w.samples.size(); ++i) w.samples[i] += stream[i];
      }
      break;
    }
  }
  normalize_rms(w.samples);
  return w;
}

Waveform mix_at_snr(const Waveform& signal, const Waveform& noise, double snr_db) {
  if (signal.sample_rate != noise.sample_rate)
    throw DomainError("mix_at_snr: sample rate mismatch");
  if (signal.samples.empty()) throw DomainError("mix_at_snr: empty signal");
  if (noise.samples.empty()) throw DomainError("mix_at_snr: empty noise");
  if (!std::isfinite(snr_db)) throw DomainError("mix_at_snr: non-finite SNR");

  const double rs = rms(signal.samples);
  if (rs <= 0.0) throw DomainError("mix_at_snr: silent signal, SNR undefined");

  std::vector<double> aligned(signal.samples.size());
  for (std::size_t i = 0; i < aligned.size(); ++i)
    aligned[i] = noise.samples[i % noise.samples.size()];
  const double rn = rms(aligned);
  if (rn <= 0.0) throw DomainError("mix_at_snr: silent noise");

  const double g = rs / (rn * std::pow(10.0, snr_db / 20.0));
  Waveform out;
  out.sample_rate = signal.sample_rate;
  out.samples.resize(signal.samples.size());
  for (std::size_t i = 0; i < out.samples.size(); ++i)
    out.samples[i] = signal.samples[i] + g * aligned[i];
  return out;
}

double spectral_slope_db_per_octave(const Waveform& w, double f_lo, double f_hi) {
  const std::int64_t n = static_cast<std::int64_t>(w.samples.size());
  if (n < 16) throw DomainError("spectral_slope: sample too short");
  const std::int64_t npad = next_pow2(n);
  std::vector<std::complex<double>> spec(static_cast<std::size_t>(npad));
  for (std::int64_t i = 0; i < n; ++i) spec[static_cast<std::size_t>(i)] = w.samples[static_cast<std::size_t>(i)];
  fft_inplace(spec, false);

  // straight-line fit of 10*log10|X|^2 against log2 f
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::int64_t count = 0;
  for (std::int64_t k = 1; k <= npad / 2; ++k) {
    const double f = static_cast<double>(k) * w.sample_rate / static_cast<double>(npad);
    if (f < f_lo || f > f_hi) continue;
    const double p = std::norm(spec[static_cast<std::size_t>(k)]);
    if (p <= 0.0) continue;
    const double x = std::log2(f);
    const double y = 10.0 * std::log10(p);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 8) throw DomainError("spectral_slope: too few bins in band");
  const double m = (static_cast<double>(count) * sxy - sx * sy) /
                   (static_cast<double>(count) * sxx - sx * sx);
  return m;
}

}  // namespace rmvpe
