#ifndef RMVPE_SPECTROGRAM_HPP
#define RMVPE_SPECTROGRAM_HPP

#include <cstdint>
#include <vector>

#include "rmvpe/audio_io.hpp"
#include "rmvpe/tensor.hpp"

namespace rmvpe {

// Frontend settings. The defaults are the working configuration of the whole
// pipeline (16 kHz, 20 ms hop, 256 mel bins between 30 and 8000 Hz, natural
// log of magnitude with a 1e-5 clamp floor, Slaney-normalized filters).
struct MelConfig {
  int sample_rate = 16000;
  int n_fft = 2048;
  int hop = 320;
  int n_mels = 256;
  double fmin = 30.0;
  double fmax = 8000.0;
  double floor_amp = 1e-5;
};

struct LogMelSpectrogram {
  std::int64_t frames = 0;
  int n_mels = 0;
  double hop_seconds = 0.0;
  int sample_rate = 0;
  std::vector<double> values;  // frames x n_mels, row-major

  double at(std::int64_t t, int f) const {
    return values[static_cast<std::size_t>(t) * n_mels + f];
  }
  double& at(std::int64_t t, int f) {
    return values[static_cast<std::size_t>(t) * n_mels + f];
  }
};

// Slaney-style mel scale (linear below 1 kHz, logarithmic above).
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular mel filterbank, n_mels x (n_fft/2 + 1), area normalized so each
// row integrates to ~2/(bandwidth). Centers are uniform on the mel scale
// between fmin and fmax.
Tensor<double> mel_filterbank(int n_mels, double fmin, double fmax, int n_fft,
                              int sample_rate);

// Center frequencies (Hz) of the filters produced by mel_filterbank.
std::vector<double> mel_center_frequencies(int n_mels, double fmin, double fmax);

// Magnitude STFT with a periodic Hann window and reflect center padding of
// n_fft/2 samples per side. Output is T x (n_fft/2+1), T = floor(len/hop)+1.
Tensor<double> stft_magnitude(const Waveform& w, int n_fft, int hop);

class LogMelExtractor {
 public:
  explicit LogMelExtractor(const MelConfig& cfg = MelConfig());

  // ln(max(filterbank * |STFT|, floor_amp)) per frame.
  LogMelSpectrogram log_mel(const Waveform& w) const;

  const MelConfig& config() const { return cfg_; }
  const Tensor<double>& filterbank() const { return filterbank_; }

 private:
  MelConfig cfg_;
  Tensor<double> filterbank_;
};

}  // namespace rmvpe

#endif  // RMVPE_SPECTROGRAM_HPP
