#include "rmvpe/spectrogram.hpp"

#include <cmath>
#include <complex>

#include "rmvpe/common.hpp"
#include "rmvpe/fft.hpp"

namespace rmvpe {

namespace {

// Reflect index (no edge repetition), librosa-style center padding.
std::int64_t reflect_index(std::int64_t q, std::int64_t len) {
  if (len == 1) return 0;
  while (q < 0 || q >= len) {
    if (q < 0) q = -q;
    if (q >= len) q = 2 * (len - 1) - q;
  }
  return q;
}

constexpr double kMelFSp = 200.0 / 3.0;       // Hz per mel below the break
constexpr double kMelBreakHz = 1000.0;
constexpr double kMelBreak = 15.0;            // mel value at the break

}  // namespace

double hz_to_mel(double hz) {
  if (hz < kMelBreakHz) return hz / kMelFSp;
  return kMelBreak + std::log(hz / kMelBreakHz) / (std::log(6.4) / 27.0);
}

double mel_to_hz(double mel) {
  if (mel < kMelBreak) return mel * kMelFSp;
  return kMelBreakHz * std::exp((std::log(6.4) / 27.0) * (mel - kMelBreak));
}

std::vector<double> mel_center_frequencies(int n_mels, double fmin, double fmax) {
  const double mel_lo = hz_to_mel(fmin);
  const double mel_hi = hz_to_mel(fmax);
  std::vector<double> centers(static_cast<std::size_t>(n_mels));
  for (int i = 0; i < n_mels; ++i) {
    const double mel =
        mel_lo + (mel_hi - mel_lo) * (i + 1) / static_cast<double>(n_mels + 1);
    centers[static_cast<std::size_t>(i)] = mel_to_hz(mel);
  }
  return centers;
}

Tensor<double> mel_filterbank(int n_mels, double fmin, double fmax, int n_fft,
                              int sample_rate) {
  if (!(fmin < fmax && fmax <= sample_rate / 2.0))
    throw DomainError("mel_filterbank: need fmin < fmax <= sr/2");
  const int n_bins = n_fft / 2 + 1;

  const double mel_lo = hz_to_mel(fmin);
  const double mel_hi = hz_to_mel(fmax);
  std::vector<double> edges(static_cast<std::size_t>(n_mels) + 2);
  for (int i = 0; i < n_mels + 2; ++i)
    edges[static_cast<std::size_t>(i)] =
        mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / static_cast<double>(n_mels + 1));

  Tensor<double> fb({n_mels, n_bins});
  for (int m = 0; m < n_mels; ++m) {
    const double f0 = edges[static_cast<std::size_t>(m)];
    const double f1 = edges[static_cast<std::size_t>(m) + 1];
    const double f2 = edges[static_cast<std::size_t>(m) + 2];
    const double norm = 2.0 / (f2 - f0);  // Slaney area normalization
    for (int k = 0; k < n_bins; ++k) {
      const double fk = static_cast<double>(k) * sample_rate / n_fft;
      const double up = (fk - f0) / (f1 - f0);
      const double down = (f2 - fk) / (f2 - f1);
      const double tri = std::min(up, down);
      fb.at(m, k) = tri > 0.0 ? tri * norm : 0.0;
    }
  }
  return fb;
}

Tensor<double> stft_magnitude(const Waveform& w, int n_fft, int hop) {
  if (w.samples.empty()) throw DomainError("stft: empty waveform");
  if (n_fft <= 0 || (n_fft & (n_fft - 1)) != 0)
    throw DomainError("stft: n_fft must be a power of two");
  if (hop <= 0) throw DomainError("stft: hop must be > 0");

  const auto len = static_cast<std::int64_t>(w.samples.size());
  const std::int64_t pad = n_fft / 2;
  const std::int64_t n_frames = len / hop + 1;
  const int n_bins = n_fft / 2 + 1;

  std::vector<double> window(static_cast<std::size_t>(n_fft));
  for (int i = 0; i < n_fft; ++i)
    window[static_cast<std::size_t>(i)] =
        0.5 - 0.5 * std::cos(2.0 * M_PI * i / n_fft);

  Tensor<double> out({n_frames, n_bins});
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(n_fft));
  for (std::int64_t t = 0; t < n_frames; ++t) {
    const std::int64_t start = t * hop - pad;  // frame centered at t*hop
    for (int i = 0; i < n_fft; ++i) {
      const std::int64_t q = reflect_index(start + i, len);
      buf[static_cast<std::size_t>(i)] = {
          w.samples[static_cast<std::size_t>(q)] * window[static_cast<std::size_t>(i)],
          0.0};
    }
    fft_inplace(buf, false);
    for (int k = 0; k < n_bins; ++k)
      out.at(t, k) = std::abs(buf[static_cast<std::size_t>(k)]);
  }
  return out;
}

LogMelExtractor::LogMelExtractor(const MelConfig& cfg)
    : cfg_(cfg),
      filterbank_(mel_filterbank(cfg.n_mels, cfg.fmin, cfg.fmax, cfg.n_fft,
                                 cfg.sample_rate)) {}

LogMelSpectrogram LogMelExtractor::log_mel(const Waveform& w) const {
  if (w.sample_rate != cfg_.sample_rate)
    throw DomainError("log_mel: waveform must be at " +
                      std::to_string(cfg_.sample_rate) + " Hz, got " +
                      std::to_string(w.sample_rate));
  Tensor<double> mag = stft_magnitude(w, cfg_.n_fft, cfg_.hop);
  const std::int64_t n_frames = mag.dim(0);
  const int n_bins = static_cast<int>(mag.dim(1));

  LogMelSpectrogram mel;
  mel.frames = n_frames;
  mel.n_mels = cfg_.n_mels;
  mel.hop_seconds = static_cast<double>(cfg_.hop) / cfg_.sample_rate;
  mel.sample_rate = cfg_.sample_rate;
  mel.values.assign(static_cast<std::size_t>(n_frames) * cfg_.n_mels, 0.0);

  const double log_floor = std::log(cfg_.floor_amp);
  for (std::int64_t t = 0; t < n_frames; ++t) {
    const double* m = mag.ptr() + t * n_bins;
    for (int i = 0; i < cfg_.n_mels; ++i) {
      const double* row = filterbank_.ptr() + static_cast<std::int64_t>(i) * n_bins;
      double acc = 0.0;
      for (int k = 0; k < n_bins; ++k) acc += row[k] * m[k];
      mel.at(t, i) = acc > cfg_.floor_amp ? std::log(acc) : log_floor;
    }
  }
  return mel;
}

}  // namespace rmvpe
