#include "rmvpe/training.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "rmvpe/common.hpp"
#include "rmvpe/metrics.hpp"

namespace rmvpe {

double lr_at(int epoch, double lr0, double decay) {
  if (epoch < 0) throw DomainError("lr_at: negative epoch");
  return lr0 * std::pow(decay, epoch / 10);
}

template <typename T>
double weighted_bce(const Tensor<T>& pred, const Tensor<T>& target, double omega,
                    Tensor<T>* grad) {
  if (!same_shape(pred, target))
    throw ShapeError("weighted_bce: " + pred.shape_str() + " vs " + target.shape_str());
  const std::int64_t batch = pred.rank() >= 3 ? pred.dim(0) : 1;
  const double inv_b = 1.0 / static_cast<double>(batch);
  if (grad) *grad = Tensor<T>(pred.shape);
  double loss = 0.0;
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    double p = static_cast<double>(pred.data[i]);
    p = std::min(1.0 - 1e-7, std::max(1e-7, p));
    const double y = static_cast<double>(target.data[i]);
    loss -= omega * y * std::log(p) + (1.0 - y) * std::log1p(-p);
    if (grad)
      grad->data[i] = static_cast<T>(-(omega * y / p - (1.0 - y) / (1.0 - p)) * inv_b);
  }
  return loss * inv_b;
}

template double weighted_bce<float>(const Tensor<float>&, const Tensor<float>&, double,
                                    Tensor<float>*);
template double weighted_bce<double>(const Tensor<double>&, const Tensor<double>&,
                                     double, Tensor<double>*);

template <typename T>
void Adam<T>::attach(const nn::ParamRegistry<T>& reg) {
  for (const auto& e : reg.entries) {
    if (!e.grad) continue;
    moments_.emplace(e.name + ".m", Tensor<T>(e.value->shape));
    moments_.emplace(e.name + ".v", Tensor<T>(e.value->shape));
  }
}

template <typename T>
void Adam<T>::step(nn::ParamRegistry<T>& reg, double lr) {
  for (const auto& e : reg.entries)
    if (e.grad && !e.grad->all_finite())
      throw DomainError("adam: non-finite gradient in " + e.name);
  ++step_count_;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count_));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count_));
  for (auto& e : reg.entries) {
    if (!e.grad) continue;
    auto& m = moments_.at(e.name + ".m");
    auto& v = moments_.at(e.name + ".v");
    for (std::size_t i = 0; i < e.value->data.size(); ++i) {
      const double g = static_cast<double>(e.grad->data[i]);
      const double mi = beta1 * static_cast<double>(m.data[i]) + (1.0 - beta1) * g;
      const double vi = beta2 * static_cast<double>(v.data[i]) + (1.0 - beta2) * g * g;
      m.data[i] = static_cast<T>(mi);
      v.data[i] = static_cast<T>(vi);
      e.value->data[i] -=
          static_cast<T>(lr * (mi / bc1) / (std::sqrt(vi / bc2) + eps));
    }
  }
}

template class Adam<float>;
template class Adam<double>;

std::vector<Segment> segment_recording(const Waveform& audio, const PitchTrack& labels,
                                       const LogMelExtractor& frontend,
                                       const CentGrid& grid) {
  const auto& cfg = frontend.config();
  if (std::abs(labels.hop_seconds - 0.02) > 1e-9)
    throw DomainError("segment_recording: labels must be on the 20 ms grid");
  const std::int64_t n = static_cast<std::int64_t>(audio.samples.size());
  if (n < cfg.hop) return {};

  const std::int64_t n_windows = (n + kSegmentSamples - 1) / kSegmentSamples;
  std::vector<Segment> out;
  out.reserve(static_cast<std::size_t>(n_windows));
  for (std::int64_t w = 0; w < n_windows; ++w) {
    const std::int64_t start = w * kSegmentSamples;
    const std::int64_t rem = n - start;
    Waveform window;
    window.sample_rate = audio.sample_rate;
    window.samples.assign(kSegmentSamples, 0.0);
    std::copy_n(audio.samples.begin() + start, std::min<std::int64_t>(rem, kSegmentSamples),
                window.samples.begin());

    const LogMelSpectrogram mel = frontend.log_mel(window);
    // 40960 samples at hop 320 give 129 frames; the 129th starts in the pad
    Segment seg;
    seg.mel = Tensor<float>({kSegmentFrames, cfg.n_mels});
    for (int t = 0; t < kSegmentFrames; ++t)
      for (int f = 0; f < cfg.n_mels; ++f)
        seg.mel.at(t, f) = static_cast<float>(mel.at(t, f));

    seg.real_frames = static_cast<int>(
        std::min<std::int64_t>(kSegmentFrames, (rem + cfg.hop - 1) / cfg.hop));
    seg.label_hz.assign(kSegmentFrames, 0.0);
    PitchTrack rows;
    rows.hop_seconds = 0.02;
    rows.frames.assign(kSegmentFrames, 0.0);
    for (int k = 0; k < seg.real_frames; ++k) {
      const std::int64_t g = w * kSegmentFrames + k;
      if (g < static_cast<std::int64_t>(labels.size())) {
        seg.label_hz[static_cast<std::size_t>(k)] =
            labels.frames[static_cast<std::size_t>(g)];
        rows.frames[static_cast<std::size_t>(k)] =
            labels.frames[static_cast<std::size_t>(g)];
      }
    }
    seg.target = encode_target(rows, grid);
    out.push_back(std::move(seg));
  }
  return out;
}

namespace {

// stack segments into [N,1,128,mel] inputs and dense [N,128,360] targets
void build_batch(const std::vector<const Segment*>& segs, Tensor<float>& x,
                 Tensor<float>& y) {
  const auto n = static_cast<std::int64_t>(segs.size());
  const std::int64_t mel = segs[0]->mel.dim(1);
  x = Tensor<float>({n, 1, kSegmentFrames, mel});
  y = Tensor<float>({n, kSegmentFrames, CentGrid::kBins});
  for (std::int64_t i = 0; i < n; ++i) {
    std::copy(segs[static_cast<std::size_t>(i)]->mel.data.begin(),
              segs[static_cast<std::size_t>(i)]->mel.data.end(),
              x.data.begin() + i * kSegmentFrames * mel);
    const auto dense = segs[static_cast<std::size_t>(i)]->target.dense();
    std::copy(dense.begin(), dense.end(),
              y.data.begin() + i * kSegmentFrames * CentGrid::kBins);
  }
}

}  // namespace

std::array<double, 3> score_segments(Model<float>& model,
                                     const std::vector<const Segment*>& segs,
                                     double threshold) {
  EvalCounts pooled;
  constexpr std::size_t kChunk = 8;
  for (std::size_t base = 0; base < segs.size(); base += kChunk) {
    std::vector<const Segment*> chunk(
        segs.begin() + static_cast<std::ptrdiff_t>(base),
        segs.begin() + static_cast<std::ptrdiff_t>(std::min(base + kChunk, segs.size())));
    Tensor<float> x, y;
    build_batch(chunk, x, y);
    const Tensor<float> pred = model.forward(x, false);
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      const int real = chunk[i]->real_frames;
      SalienceMatrix sal;
      sal.frames = real;
      sal.values.assign(pred.ptr() + static_cast<std::int64_t>(i) * kSegmentFrames *
                                         CentGrid::kBins,
                        pred.ptr() + (static_cast<std::int64_t>(i) * kSegmentFrames + real) *
                                         CentGrid::kBins);
      const PitchTrack est = decode(sal, threshold);
      PitchTrack ref;
      ref.hop_seconds = 0.02;
      ref.frames.assign(chunk[i]->label_hz.begin(),
                        chunk[i]->label_hz.begin() + real);
      const EvalResult r = evaluate(ref, est);
      pooled.ref_voiced += r.counts.ref_voiced;
      pooled.ref_unvoiced += r.counts.ref_unvoiced;
      pooled.matched_rpa += r.counts.matched_rpa;
      pooled.matched_rca += r.counts.matched_rca;
      pooled.matched_oa += r.counts.matched_oa;
    }
  }
  const EvalResult r = from_counts(pooled);
  return {r.rpa, r.rca, r.oa};
}

TrainResult train_loop(Model<float>& model, Adam<float>& opt, const Dataset& train,
                       const Dataset* val, const TrainConfig& cfg,
                       const EpochCallback& on_epoch) {
  if (train.segments.empty()) throw ConfigError("train_loop: no training segments");
  if (cfg.batch_size < 1) throw ConfigError("train_loop: batch_size must be >= 1");

  std::vector<std::size_t> train_idx(train.segments.size());
  for (std::size_t i = 0; i < train_idx.size(); ++i) train_idx[i] = i;

  std::mt19937_64 rng(cfg.seed);
  std::vector<const Segment*> metric_segs;
  if (val) {
    for (const auto& s : val->segments) metric_segs.push_back(&s);
  } else if (cfg.val_fraction > 0 && train.segments.size() >= 2) {
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    auto n_val = static_cast<std::size_t>(
        std::max(1.0, std::round(cfg.val_fraction *
                                 static_cast<double>(train_idx.size()))));
    n_val = std::min(n_val, train_idx.size() - 1);
    for (std::size_t i = 0; i < n_val; ++i)
      metric_segs.push_back(&train.segments[train_idx[i]]);
    train_idx.erase(train_idx.begin(),
                    train_idx.begin() + static_cast<std::ptrdiff_t>(n_val));
  } else {
    for (const auto& s : train.segments) metric_segs.push_back(&s);
  }

  if (cfg.start_epoch < 0) throw ConfigError("train_loop: negative start_epoch");
  for (int e = 0; e < cfg.start_epoch; ++e)
    std::shuffle(train_idx.begin(), train_idx.end(), rng);

  TrainResult res;
  for (int rel = 0; rel < cfg.epochs; ++rel) {
    const int epoch = cfg.start_epoch + rel;
    const double lr = lr_at(epoch, cfg.lr0, cfg.lr_decay);
    std::shuffle(train_idx.begin(), train_idx.end(), rng);

    double loss_sum = 0.0;
    int batches = 0;
    bool capped = false;
    for (std::size_t base = 0; base < train_idx.size();
         base += static_cast<std::size_t>(cfg.batch_size)) {
      std::vector<const Segment*> batch;
      for (std::size_t i = base;
           i < std::min(base + static_cast<std::size_t>(cfg.batch_size), train_idx.size());
           ++i)
        batch.push_back(&train.segments[train_idx[i]]);
      Tensor<float> x, y, grad;
      build_batch(batch, x, y);
      const Tensor<float> pred = model.forward(x, true);
      const double loss = weighted_bce(pred, y, cfg.omega, &grad);
      if (!std::isfinite(loss)) {
        res.halted_nonfinite = true;
        break;
      }
      model.params().zero_grads();
      model.backward(grad);
      try {
        opt.step(model.params(), lr);
      } catch (const DomainError&) {
        res.halted_nonfinite = true;
        break;
      }
      loss_sum += loss;
      ++batches;
      ++res.steps_done;
      if (cfg.max_steps > 0 && res.steps_done >= cfg.max_steps) {
        capped = true;
        break;
      }
    }
    if (batches == 0 && res.halted_nonfinite) break;

    EpochLog log;
    log.epoch = epoch;
    log.lr = lr;
    log.train_loss = batches ? loss_sum / batches : 0.0;
    const auto m = score_segments(model, metric_segs, cfg.threshold);
    log.rpa = m[0];
    log.rca = m[1];
    log.oa = m[2];
    const bool is_best = log.rpa > res.best_rpa;
    if (is_best) {
      res.best_rpa = log.rpa;
      res.best_epoch = epoch;
    }
    res.history.push_back(log);
    if (on_epoch && !on_epoch(log, is_best)) break;
    if (res.halted_nonfinite) break;
    if (cfg.stop_rpa >= 0 && log.rpa >= cfg.stop_rpa) break;
    if (capped) break;
  }
  return res;
}

}  // namespace rmvpe
