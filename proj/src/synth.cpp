#include "rmvpe/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "rmvpe/common.hpp"

namespace rmvpe {
namespace {

constexpr double kGridLowHz = 32.70;
constexpr double kGridHighHz = 1975.5;
constexpr double kTau = 6.283185307179586476925287;

struct Note {
  bool voiced = false;
  double f0 = 0.0;
  double vib_phase = 0.0;
};

}  // namespace

SynthSong synth_song(const SynthSpec& spec, int song_index) {
  if (spec.notes < 1 || spec.duration_seconds <= 0 || spec.sample_rate <= 0)
    throw DomainError("synth: bad spec");
  const double vib_ratio = std::exp2(spec.vibrato_cents / 1200.0);
  if (spec.fmin / vib_ratio < kGridLowHz || spec.fmax * vib_ratio > kGridHighHz)
    throw DomainError("synth: pitch range (with vibrato) leaves the decodable grid");
  if (spec.fmin > spec.fmax) throw DomainError("synth: fmin > fmax");

  std::mt19937_64 rng(fnv1a("song", spec.seed ^ static_cast<std::uint64_t>(song_index)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> logf(std::log(spec.fmin), std::log(spec.fmax));
  std::uniform_real_distribution<double> phase(0.0, kTau);

  std::vector<Note> notes(static_cast<std::size_t>(spec.notes));
  for (auto& nt : notes) {
    nt.voiced = unit(rng) >= spec.gap_fraction;
    if (nt.voiced) {
      nt.f0 = std::exp(logf(rng));
      nt.vib_phase = phase(rng);
    }
  }
  // never emit an all-silent song; the metrics need at least one voiced note
  if (std::none_of(notes.begin(), notes.end(), [](const Note& n) { return n.voiced; })) {
    notes[0].voiced = true;
    notes[0].f0 = std::exp(logf(rng));
    notes[0].vib_phase = phase(rng);
  }

  const double note_dur = spec.duration_seconds / spec.notes;
  const auto n_samples =
      static_cast<std::int64_t>(std::llround(spec.duration_seconds * spec.sample_rate));

  auto contour_at = [&](double t) -> double {
    auto slot = static_cast<std::int64_t>(t / note_dur);
    if (slot >= spec.notes) slot = spec.notes - 1;
    const Note& nt = notes[static_cast<std::size_t>(slot)];
    if (!nt.voiced) return 0.0;
    const double vib =
        spec.vibrato_cents * std::sin(kTau * spec.vibrato_hz * t + nt.vib_phase);
    return nt.f0 * std::exp2(vib / 1200.0);
  };

  SynthSong song;
  song.audio.sample_rate = spec.sample_rate;
  song.audio.samples.assign(static_cast<std::size_t>(n_samples), 0.0);

  // amplitude keeps the 1/k harmonic stack inside [-1, 1]
  double harm_sum = 0.0;
  for (int k = 1; k <= spec.harmonics + 1; ++k) harm_sum += 1.0 / k;
  const double amp = 0.35 / harm_sum;
  const double fade_sec = 0.005;
  const double nyquist_cap = 0.45 * spec.sample_rate;

  double phi = 0.0;
  for (std::int64_t i = 0; i < n_samples; ++i) {
    const double t = static_cast<double>(i) / spec.sample_rate;
    const double f = contour_at(t);
    if (f <= 0.0) {
      phi = 0.0;
      continue;
    }
    phi += kTau * f / spec.sample_rate;
    // raised-cosine edges inside each note slot kill the onset clicks
    const double pos = t - std::floor(t / note_dur) * note_dur;
    double env = 1.0;
    if (pos < fade_sec) env = 0.5 - 0.5 * std::cos(kTau / 2.0 * pos / fade_sec);
    const double tail = note_dur - pos;
    if (tail < fade_sec) env *= 0.5 - 0.5 * std::cos(kTau / 2.0 * tail / fade_sec);
    double s = 0.0;
    for (int k = 1; k <= spec.harmonics + 1; ++k) {
      if (k * f > nyquist_cap) break;
      s += std::sin(k * phi) / k;
    }
    song.audio.samples[static_cast<std::size_t>(i)] = amp * env * s;
  }

  song.labels.hop_seconds = 0.02;
  const std::int64_t hop = spec.sample_rate / 50;  // 20 ms
  const std::int64_t n_frames = n_samples / hop + 1;
  song.labels.frames.resize(static_cast<std::size_t>(n_frames));
  for (std::int64_t k = 0; k < n_frames; ++k) {
    const double t = std::min(static_cast<double>(k) * 0.02,
                              spec.duration_seconds - 1.0 / spec.sample_rate);
    song.labels.frames[static_cast<std::size_t>(k)] = contour_at(t);
  }
  return song;
}

}  // namespace rmvpe
