#include "rmvpe/pitch_codec.hpp"

#include <cmath>
#include <string>

#include "rmvpe/common.hpp"

namespace rmvpe {

double hz_to_cents(double hz) {
  if (!(hz > 0.0)) throw DomainError("hz_to_cents: frequency must be > 0");
  return 1200.0 * std::log2(hz / CentGrid::kRefHz);
}

double cents_to_hz(double cents) {
  return CentGrid::kRefHz * std::exp2(cents / 1200.0);
}

CentGrid::CentGrid() : cents_(kBins) {
  const double base = hz_to_cents(kAnchorHz);
  for (int i = 0; i < kBins; ++i)
    cents_[static_cast<std::size_t>(i)] = base + kStepCents * i;
}

double CentGrid::bin_hz(int i) const { return cents_to_hz(bin_cents(i)); }

int CentGrid::nearest_bin(double cents) const {
  const double r = (cents - cents_[0]) / kStepCents;
  double k0 = std::floor(r);
  const double frac = r - k0;
  if (frac > 0.5) k0 += 1.0;  // exact half stays on the lower bin
  auto k = static_cast<long>(k0);
  if (k < 0) k = 0;
  if (k >= kBins) k = kBins - 1;
  return static_cast<int>(k);
}

std::vector<float> TargetMatrix::dense() const {
  std::vector<float> out(hot.size() * CentGrid::kBins, 0.0f);
  for (std::size_t t = 0; t < hot.size(); ++t)
    if (hot[t] >= 0) out[t * CentGrid::kBins + static_cast<std::size_t>(hot[t])] = 1.0f;
  return out;
}

TargetMatrix encode_target(const PitchTrack& track, const CentGrid& grid) {
  // tiny slack keeps the closed half-step boundary stable under Hz round trips
  const double edge = 1e-9;
  const double lo = grid.bin_cents(0) - CentGrid::kStepCents / 2.0 - edge;
  const double hi = grid.bin_cents(CentGrid::kBins - 1) + CentGrid::kStepCents / 2.0 + edge;

  TargetMatrix out;
  out.hot.resize(track.frames.size(), -1);
  for (std::size_t t = 0; t < track.frames.size(); ++t) {
    const double hz = track.frames[t];
    if (hz <= 0.0) continue;  // unvoiced
    const double c = hz_to_cents(hz);
    if (c < lo || c > hi)
      throw DomainError("encode_target: frame " + std::to_string(t) + " (" +
                        std::to_string(hz) + " Hz) outside the pitch grid");
    out.hot[t] = grid.nearest_bin(c);
  }
  return out;
}

PitchTrack decode(const SalienceMatrix& salience, double threshold,
                  double hop_seconds, const CentGrid& grid) {
  PitchTrack track;
  track.hop_seconds = hop_seconds;
  track.frames.resize(static_cast<std::size_t>(salience.frames), 0.0);

  for (std::int64_t t = 0; t < salience.frames; ++t) {
    const float* row = salience.row(t);
    int m = 0;
    for (int i = 1; i < CentGrid::kBins; ++i)
      if (row[i] > row[m]) m = i;  // strict > keeps the lowest index on ties
    const double confidence = row[m];
    if (confidence < threshold) continue;

    const int lo = m - 4 < 0 ? 0 : m - 4;
    const int hi = m + 4 >= CentGrid::kBins ? CentGrid::kBins - 1 : m + 4;
    double num = 0.0, den = 0.0;
    for (int i = lo; i <= hi; ++i) {
      num += static_cast<double>(row[i]) * grid.bin_cents(i);
      den += static_cast<double>(row[i]);
    }
    // den can only be zero when threshold == 0 and the row is all zeros;
    // such frames stay unvoiced.
    if (den > 0.0)
      track.frames[static_cast<std::size_t>(t)] = cents_to_hz(num / den);
  }
  return track;
}

}  // namespace rmvpe
