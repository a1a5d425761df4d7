#ifndef RMVPE_AUDIO_IO_HPP
#define RMVPE_AUDIO_IO_HPP

#include <string>
#include <vector>

namespace rmvpe {

// Mono audio buffer. Samples live in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 0;

  double duration_seconds() const {
    return sample_rate > 0
               ? static_cast<double>(samples.size()) / sample_rate
               : 0.0;
  }
};

enum class ChannelMode { kMix, kLeft, kRight };

// Reads a RIFF/WAVE file (PCM 16-bit or IEEE float 32-bit, 1-2 channels).
// Stereo is reduced per `mode` (default: mean of both channels). Samples are
// scaled to [-1, 1]; the file's sample rate is preserved.
Waveform load_wav(const std::string& path, ChannelMode mode = ChannelMode::kMix);

// Writes mono PCM 16-bit little-endian. Samples are clipped to [-1, 1] and
// rounded; a round trip through load_wav stays within 1/32768 per sample.
void save_wav(const Waveform& w, const std::string& path);

// Per-frame pitch on a uniform time grid. frequency 0 encodes unvoiced.
struct PitchTrack {
  double hop_seconds = 0.02;
  std::vector<double> frames;  // Hz; 0 = unvoiced

  std::size_t size() const { return frames.size(); }
  bool voiced(std::size_t k) const { return frames[k] > 0.0; }
};

// Parses a two-column "time_sec frequency_hz" text file (whitespace separated,
// '#' comments ignored, times strictly increasing) and resamples it onto the
// grid t_k = k * hop_seconds by nearest neighbor in time. Equal-distance ties
// go to the earlier label. Grid times past the last label are unvoiced.
// Output length is floor(last_time / hop) + 1, or 0 for an empty file.
PitchTrack load_pitch_labels(const std::string& path, double hop_seconds);

// Canonical two-column emitter, one "time_sec frequency_hz" line per frame.
void save_pitch_labels(const PitchTrack& track, const std::string& path);

// Band-limited sample rate conversion (windowed sinc, Kaiser window,
// 32 zero crossings per side at the output bandwidth).
// Output length is round(len * target_rate / source_rate).
Waveform resample(const Waveform& w, int target_rate);

}  // namespace rmvpe

#endif  // RMVPE_AUDIO_IO_HPP
