#ifndef RMVPE_SYNTH_HPP
#define RMVPE_SYNTH_HPP

#include <cstdint>

#include "rmvpe/audio_io.hpp"

namespace rmvpe {

// Harmonic-tone corpus generator. Each song is a sequence of note slots;
// voiced slots carry a fundamental drawn log-uniformly from [fmin, fmax]
// plus `harmonics` overtones at 1/k amplitude and optional vibrato, unvoiced
// slots are silent. Labels come from the exact contour at the 20 ms frame
// centers, so they are noise-free by construction.
struct SynthSpec {
  double duration_seconds = 4.0;
  int sample_rate = 16000;
  double fmin = 80.0;
  double fmax = 800.0;
  int harmonics = 4;           // overtones above the fundamental
  double vibrato_cents = 30.0;
  double vibrato_hz = 5.0;
  double gap_fraction = 0.25;  // probability a note slot is silent
  int notes = 8;
  std::uint64_t seed = 0;
};

struct SynthSong {
  Waveform audio;
  PitchTrack labels;
};

// Deterministic in (spec.seed, song_index). Throws DomainError when the
// requested range (after vibrato) leaves [32.7, 1975.5] Hz.
SynthSong synth_song(const SynthSpec& spec, int song_index);

}  // namespace rmvpe

#endif  // RMVPE_SYNTH_HPP
