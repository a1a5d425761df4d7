#ifndef RMVPE_PITCH_CODEC_HPP
#define RMVPE_PITCH_CODEC_HPP

#include <cstdint>
#include <vector>

#include "rmvpe/audio_io.hpp"

namespace rmvpe {

// 360-bin logarithmic pitch grid: 20-cent steps anchored at C1 = 32.70 Hz,
// reaching just under C7. Cents are measured against a 10 Hz reference.
class CentGrid {
 public:
  static constexpr int kBins = 360;
  static constexpr double kRefHz = 10.0;
  static constexpr double kStepCents = 20.0;
  static constexpr double kAnchorHz = 32.70;  // C1

  CentGrid();

  double bin_cents(int i) const { return cents_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& cents() const { return cents_; }
  double bin_hz(int i) const;

  // Nearest grid bin to a cent value; ties break toward the lower index.
  int nearest_bin(double cents) const;

 private:
  std::vector<double> cents_;
};

// c(f) = 1200 * log2(f / 10). Throws DomainError for f <= 0.
double hz_to_cents(double hz);
// f(c) = 10 * 2^(c / 1200).
double cents_to_hz(double cents);

// Per-frame bin probabilities, frames x 360, entries in [0, 1].
struct SalienceMatrix {
  std::int64_t frames = 0;
  std::vector<float> values;

  float at(std::int64_t t, int i) const {
    return values[static_cast<std::size_t>(t) * CentGrid::kBins + i];
  }
  float& at(std::int64_t t, int i) {
    return values[static_cast<std::size_t>(t) * CentGrid::kBins + i];
  }
  const float* row(std::int64_t t) const {
    return values.data() + static_cast<std::size_t>(t) * CentGrid::kBins;
  }
};

// One-hot training targets, stored as the hot bin index per frame
// (-1 = unvoiced row of zeros).
struct TargetMatrix {
  std::vector<std::int32_t> hot;

  std::int64_t frames() const { return static_cast<std::int64_t>(hot.size()); }
  bool voiced(std::int64_t t) const { return hot[static_cast<std::size_t>(t)] >= 0; }
  // Dense frames x 360 {0,1} view.
  std::vector<float> dense() const;
};

// Voiced frames map to a 1 at the nearest-cent bin; unvoiced frames to all
// zeros. Voiced frequencies more than half a bin step outside the grid raise
// DomainError naming the frame.
TargetMatrix encode_target(const PitchTrack& track, const CentGrid& grid = CentGrid());

// Local weighted average around the salience peak:
//   m = argmax_i y_i (ties -> lowest i), window [m-4, m+4] clipped to the grid,
//   c_hat = sum(y_i * cents_i) / sum(y_i) over the window,
//   f = 10 * 2^(c_hat/1200) if max_i y_i >= threshold else 0.
PitchTrack decode(const SalienceMatrix& salience, double threshold = 0.5,
                  double hop_seconds = 0.02, const CentGrid& grid = CentGrid());

}  // namespace rmvpe

#endif  // RMVPE_PITCH_CODEC_HPP
