#ifndef RMVPE_TRAINING_HPP
#define RMVPE_TRAINING_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "rmvpe/audio_io.hpp"
#include "rmvpe/model.hpp"
#include "rmvpe/pitch_codec.hpp"
#include "rmvpe/spectrogram.hpp"
#include "rmvpe/tensor.hpp"

namespace rmvpe {

struct TrainConfig {
  double lr0 = 5e-4;
  double lr_decay = 0.98;  // applied every 10 epochs
  int batch_size = 16;
  double segment_seconds = 2.56;
  double omega = 5.0;
  int epochs = 1;
  std::uint64_t seed = 0;
  double threshold = 0.5;
  double val_fraction = 0.1;   // ignored when an explicit validation set is given
  std::int64_t max_steps = 0;  // 0 = no step cap
  double stop_rpa = -1.0;      // stop once the logged RPA reaches this (off if < 0)
  // Resume offset: shifts the lr schedule, epoch numbering, and shuffle
  // stream so a resumed run continues the uninterrupted one exactly.
  int start_epoch = 0;
};

// lr0 * decay^floor(epoch/10)
double lr_at(int epoch, double lr0 = 5e-4, double decay = 0.98);

// Weighted binary cross entropy against {0,1} targets, clamped to
// [1e-7, 1-1e-7]: positives weighted by omega, summed over frames and bins,
// averaged over batch items (rank-3 [N,T,B] input; rank-2 is one item).
// If grad is non-null it receives dL/dpred of the same shape.
template <typename T>
double weighted_bce(const Tensor<T>& pred, const Tensor<T>& target, double omega,
                    Tensor<T>* grad = nullptr);

extern template double weighted_bce<float>(const Tensor<float>&, const Tensor<float>&,
                                           double, Tensor<float>*);
extern template double weighted_bce<double>(const Tensor<double>&, const Tensor<double>&,
                                            double, Tensor<double>*);

// Bias-corrected Adam keyed by parameter name. step() scans every gradient
// first and throws DomainError naming the parameter if any entry is
// non-finite, leaving parameters and moments untouched.
template <typename T>
class Adam {
 public:
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  void attach(const nn::ParamRegistry<T>& reg);
  void step(nn::ParamRegistry<T>& reg, double lr);

  std::int64_t step_count() const { return step_count_; }
  void set_step_count(std::int64_t n) { step_count_ = n; }
  std::map<std::string, Tensor<T>>& moments() { return moments_; }

 private:
  std::int64_t step_count_ = 0;
  // "<name>.m" and "<name>.v", matching the checkpoint record names
  std::map<std::string, Tensor<T>> moments_;
};

extern template class Adam<float>;
extern template class Adam<double>;

// One 2.56 s training window: 128 mel frames, aligned one-hot targets, and
// the reference pitch per frame for metric evaluation. real_frames < 128 on
// the zero-padded tail window of a recording.
struct Segment {
  Tensor<float> mel;  // [128, mel_bins]
  TargetMatrix target;
  std::vector<double> label_hz;  // 128 entries, 0 = unvoiced
  int real_frames = 0;
};

inline constexpr int kSegmentSamples = 40960;
inline constexpr int kSegmentFrames = 128;

// Cut a recording into non-overlapping 40960-sample windows (the tail is
// zero-padded and its padded frames are unvoiced). Returns an empty vector
// for recordings shorter than one hop.
std::vector<Segment> segment_recording(const Waveform& audio, const PitchTrack& labels,
                                       const LogMelExtractor& frontend,
                                       const CentGrid& grid = CentGrid());

struct Dataset {
  std::vector<Segment> segments;
};

struct EpochLog {
  int epoch = 0;
  double lr = 0;
  double train_loss = 0;
  // validation metrics; training-set metrics when no validation split exists
  double rpa = 0, rca = 0, oa = 0;
};

struct TrainResult {
  std::vector<EpochLog> history;
  int best_epoch = -1;
  double best_rpa = -1.0;
  std::int64_t steps_done = 0;
  bool halted_nonfinite = false;
};

// Per-epoch callback; is_best marks a new best validation RPA (checkpointing
// is the caller's job). Returning false stops training.
using EpochCallback = std::function<bool(const EpochLog&, bool is_best)>;

// Seeded-shuffle minibatch SGD with Adam and the geometric lr schedule.
// `val` may be null: a val_fraction split is carved from `train` (seeded),
// or with val_fraction = 0 metrics are computed on the training set itself.
// A non-finite loss halts the loop (parameters keep their last good values
// from the preceding step).
TrainResult train_loop(Model<float>& model, Adam<float>& opt, const Dataset& train,
                       const Dataset* val, const TrainConfig& cfg,
                       const EpochCallback& on_epoch = nullptr);

// Decode each segment's salience and score it against the stored labels,
// pooling frame counts across segments. Returns {rpa, rca, oa}.
std::array<double, 3> score_segments(Model<float>& model,
                                     const std::vector<const Segment*>& segs,
                                     double threshold);

}  // namespace rmvpe

#endif  // RMVPE_TRAINING_HPP
