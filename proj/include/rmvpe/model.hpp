#ifndef RMVPE_MODEL_HPP
#define RMVPE_MODEL_HPP

#include <array>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "rmvpe/nn/gru.hpp"
#include "rmvpe/nn/layers.hpp"
#include "rmvpe/nn/registry.hpp"
#include "rmvpe/tensor.hpp"

namespace rmvpe {

struct ModelConfig {
  int mel_bins = 256;
  int bins_out = 360;
  std::array<int, 5> encoder_channels{16, 32, 64, 128, 256};
  int rcb_per_block = 4;
  int icb_count = 4;
  int gru_hidden = 256;

  static ModelConfig standard() { return {}; }
  static ModelConfig toy() {
    ModelConfig c;
    c.encoder_channels = {2, 4, 8, 16, 32};
    c.gru_hidden = 32;
    return c;
  }
};

namespace detail {

template <typename T>
Tensor<T> reshaped(Tensor<T> t, std::vector<std::int64_t> shape) {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  if (n != t.numel()) throw ShapeError("reshape: element count mismatch");
  t.shape = std::move(shape);
  return t;
}

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  const std::int64_t n = a.dim(0), ca = a.dim(1), cb = b.dim(1);
  const std::int64_t tt = a.dim(2), ff = a.dim(3);
  if (b.dim(0) != n || b.dim(2) != tt || b.dim(3) != ff)
    throw ShapeError("concat_channels: " + a.shape_str() + " vs " + b.shape_str());
  Tensor<T> out({n, ca + cb, tt, ff});
  const std::int64_t plane = tt * ff;
  for (std::int64_t item = 0; item < n; ++item) {
    std::copy_n(a.ptr() + item * ca * plane, ca * plane,
                out.ptr() + item * (ca + cb) * plane);
    std::copy_n(b.ptr() + item * cb * plane, cb * plane,
                out.ptr() + (item * (ca + cb) + ca) * plane);
  }
  return out;
}

template <typename T>
void split_channels(const Tensor<T>& cat, Tensor<T>& a, Tensor<T>& b) {
  const std::int64_t n = cat.dim(0), ca = a.dim(1), cb = b.dim(1);
  const std::int64_t plane = cat.dim(2) * cat.dim(3);
  for (std::int64_t item = 0; item < n; ++item) {
    std::copy_n(cat.ptr() + item * (ca + cb) * plane, ca * plane,
                a.ptr() + item * ca * plane);
    std::copy_n(cat.ptr() + (item * (ca + cb) + ca) * plane, cb * plane,
                b.ptr() + item * cb * plane);
  }
}

}  // namespace detail

// Residual convolutional block: conv-BN-ReLU twice plus a shortcut from input
// to output (identity when channel counts match, 1x1 conv otherwise).
template <typename T>
struct Rcb {
  int in_ch = 0, out_ch = 0;
  nn::Conv2d<T> conv1, conv2;
  nn::BatchNorm2d<T> bn1, bn2;
  nn::Relu<T> relu1, relu2;
  bool proj = false;
  nn::Conv2d<T> shortcut;

  Rcb() = default;
  Rcb(int in_c, int out_c)
      : in_ch(in_c),
        out_ch(out_c),
        conv1(in_c, out_c, 3),
        conv2(out_c, out_c, 3),
        bn1(out_c),
        bn2(out_c),
        proj(in_c != out_c) {
    if (proj) shortcut = nn::Conv2d<T>(in_c, out_c, 1);
  }

  void init(std::mt19937_64& rng) {
    conv1.init(rng);
    conv2.init(rng);
    bn1.reset();
    bn2.reset();
    if (proj) shortcut.init(rng);
  }

  void reg(nn::ParamRegistry<T>& r, const std::string& p) {
    conv1.reg(r, p + ".conv1");
    bn1.reg(r, p + ".bn1");
    conv2.reg(r, p + ".conv2");
    bn2.reg(r, p + ".bn2");
    if (proj) shortcut.reg(r, p + ".short");
  }

  Tensor<T> forward(const Tensor<T>& x, bool train) {
    Tensor<T> y = relu1.forward(bn1.forward(conv1.forward(x, train), train), train);
    y = relu2.forward(bn2.forward(conv2.forward(y, train), train), train);
    if (proj) {
      Tensor<T> s = shortcut.forward(x, train);
      for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += s.data[i];
    } else {
      for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += x.data[i];
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> d = conv2.backward(bn2.backward(relu2.backward(dy)));
    d = conv1.backward(bn1.backward(relu1.backward(d)));
    if (proj) {
      Tensor<T> ds = shortcut.backward(dy);
      for (std::size_t i = 0; i < d.data.size(); ++i) d.data[i] += ds.data[i];
    } else {
      for (std::size_t i = 0; i < d.data.size(); ++i) d.data[i] += dy.data[i];
    }
    return d;
  }
};

// Encoder block: RCB stack then 2x2 average pooling. The pre-pool activation
// feeds the skip filter.
template <typename T>
struct Reb {
  std::vector<Rcb<T>> rcbs;
  nn::AvgPool2x2<T> pool;

  Reb() = default;
  Reb(int in_c, int out_c, int n_rcb) {
    rcbs.reserve(static_cast<std::size_t>(n_rcb));
    rcbs.emplace_back(in_c, out_c);
    for (int i = 1; i < n_rcb; ++i) rcbs.emplace_back(out_c, out_c);
  }

  void init(std::mt19937_64& rng) {
    for (auto& r : rcbs) r.init(rng);
  }
  void reg(nn::ParamRegistry<T>& r, const std::string& p) {
    for (std::size_t i = 0; i < rcbs.size(); ++i)
      rcbs[i].reg(r, p + ".rcb" + std::to_string(i + 1));
  }

  // returns (pooled, pre_pool)
  std::pair<Tensor<T>, Tensor<T>> forward(const Tensor<T>& x, bool train) {
    Tensor<T> y = x;
    for (auto& r : rcbs) y = r.forward(y, train);
    Tensor<T> pooled = pool.forward(y, train);
    return {std::move(pooled), std::move(y)};
  }

  // d_pooled flows through the pool; d_pre_pool joins from the skip filter
  Tensor<T> backward(const Tensor<T>& d_pooled, const Tensor<T>& d_pre_pool) {
    Tensor<T> d = pool.backward(d_pooled);
    for (std::size_t i = 0; i < d.data.size(); ++i) d.data[i] += d_pre_pool.data[i];
    for (auto it = rcbs.rbegin(); it != rcbs.rend(); ++it) d = it->backward(d);
    return d;
  }
};

// Decoder block: transposed conv doubles the spatial dims, the skip branch is
// concatenated on the channel axis, then an RCB stack reduces back.
template <typename T>
struct Rdb {
  int skip_ch = 0;
  nn::ConvTranspose2x2<T> up;
  std::vector<Rcb<T>> rcbs;
  std::vector<std::int64_t> up_shape_;

  Rdb() = default;
  Rdb(int in_c, int out_c, int n_rcb) : skip_ch(out_c), up(in_c, out_c) {
    rcbs.reserve(static_cast<std::size_t>(n_rcb));
    rcbs.emplace_back(2 * out_c, out_c);
    for (int i = 1; i < n_rcb; ++i) rcbs.emplace_back(out_c, out_c);
  }

  void init(std::mt19937_64& rng) {
    up.init(rng);
    for (auto& r : rcbs) r.init(rng);
  }
  void reg(nn::ParamRegistry<T>& r, const std::string& p) {
    up.reg(r, p + ".up");
    for (std::size_t i = 0; i < rcbs.size(); ++i)
      rcbs[i].reg(r, p + ".rcb" + std::to_string(i + 1));
  }

  Tensor<T> forward(const Tensor<T>& x, const Tensor<T>& skip, bool train) {
    Tensor<T> u = up.forward(x, train);
    if (train) up_shape_ = u.shape;
    Tensor<T> y = detail::concat_channels(u, skip);
    for (auto& r : rcbs) y = r.forward(y, train);
    return y;
  }

  std::pair<Tensor<T>, Tensor<T>> backward(const Tensor<T>& dy) {
    Tensor<T> d = dy;
    for (auto it = rcbs.rbegin(); it != rcbs.rend(); ++it) d = it->backward(d);
    Tensor<T> du(up_shape_);
    Tensor<T> dskip({up_shape_[0], skip_ch, up_shape_[2], up_shape_[3]});
    detail::split_channels(d, du, dskip);
    return {up.backward(du), std::move(dskip)};
  }
};

// Full network: input BN -> 5 encoder blocks -> 4 intermediate RCB stacks ->
// 5 decoder blocks fed by per-level skip RCBs -> 3x3 conv to one channel ->
// BiGRU over time -> per-frame sigmoid FC to 360 pitch bins.
template <typename T>
class Model {
 public:
  explicit Model(const ModelConfig& cfg) : cfg_(cfg) {
    const auto& ec = cfg.encoder_channels;
    int prev = 1;
    rebs_.reserve(5);
    skips_.reserve(5);
    for (int i = 0; i < 5; ++i) {
      rebs_.emplace_back(prev, ec[static_cast<std::size_t>(i)], cfg.rcb_per_block);
      skips_.emplace_back(ec[static_cast<std::size_t>(i)], ec[static_cast<std::size_t>(i)]);
      prev = ec[static_cast<std::size_t>(i)];
    }
    icbs_.reserve(static_cast<std::size_t>(cfg.icb_count));
    for (int i = 0; i < cfg.icb_count; ++i)
      icbs_.emplace_back(ec[4], ec[4], cfg.rcb_per_block);
    rdbs_.reserve(5);
    prev = ec[4];
    for (int i = 4; i >= 0; --i) {
      rdbs_.emplace_back(prev, ec[static_cast<std::size_t>(i)], cfg.rcb_per_block);
      prev = ec[static_cast<std::size_t>(i)];
    }
    bn_in_ = nn::BatchNorm2d<T>(1);
    head_conv_ = nn::Conv2d<T>(ec[0], 1, 3);
    gru_ = nn::BiGru<T>(cfg.mel_bins, cfg.gru_hidden);
    fc_ = nn::LinearSigmoid<T>(2 * cfg.gru_hidden, cfg.bins_out);
    build_registry();
  }

  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelConfig& config() const { return cfg_; }
  nn::ParamRegistry<T>& params() { return reg_; }

  void init(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    bn_in_.reset();
    for (auto& r : rebs_) r.init(rng);
    for (auto& s : skips_) s.init(rng);
    for (auto& m : icbs_) m.init(rng);
    for (auto& d : rdbs_) d.init(rng);
    head_conv_.init(rng);
    gru_.init(rng);
    fc_.init(rng);
  }

  // x: [N, 1, T, mel_bins], T divisible by 32 -> [N, T, bins_out] in (0,1)
  Tensor<T> forward(const Tensor<T>& x, bool train) {
    if (x.rank() != 4 || x.dim(1) != 1 || x.dim(3) != cfg_.mel_bins)
      throw ShapeError("model: expected [N,1,T," + std::to_string(cfg_.mel_bins) +
                       "], got " + x.shape_str());
    const std::int64_t n = x.dim(0), tt = x.dim(2);
    if (tt % 32 != 0)
      throw ShapeError("model: T=" + std::to_string(tt) +
                       " not divisible by 32; pad or trim the segment");

    Tensor<T> y = bn_in_.forward(x, train);
    std::array<Tensor<T>, 5> skip_out;
    for (int i = 0; i < 5; ++i) {
      auto [pooled, pre_pool] = rebs_[static_cast<std::size_t>(i)].forward(y, train);
      require_shape(pooled,
                    {n, cfg_.encoder_channels[static_cast<std::size_t>(i)],
                     tt >> (i + 1), cfg_.mel_bins >> (i + 1)},
                    "encoder level " + std::to_string(i + 1));
      skip_out[static_cast<std::size_t>(i)] =
          skips_[static_cast<std::size_t>(i)].forward(pre_pool, train);
      y = std::move(pooled);
    }
    for (auto& m : icbs_)
      for (auto& r : m.rcbs) y = r.forward(y, train);
    for (int i = 0; i < 5; ++i) {
      const int level = 4 - i;
      y = rdbs_[static_cast<std::size_t>(i)].forward(
          y, skip_out[static_cast<std::size_t>(level)], train);
      require_shape(y,
                    {n, cfg_.encoder_channels[static_cast<std::size_t>(level)],
                     tt >> level, cfg_.mel_bins >> level},
                    "decoder level " + std::to_string(level + 1));
    }
    y = head_conv_.forward(y, train);
    require_shape(y, {n, 1, tt, cfg_.mel_bins}, "head conv");
    y = detail::reshaped(std::move(y), {n, tt, cfg_.mel_bins});
    y = gru_.forward(y, train);
    y = detail::reshaped(std::move(y), {n * tt, 2 * cfg_.gru_hidden});
    y = fc_.forward(y, train);
    return detail::reshaped(std::move(y), {n, tt, cfg_.bins_out});
  }

  // dy: [N, T, bins_out] -> gradient w.r.t. the input spectrogram
  Tensor<T> backward(const Tensor<T>& dy) {
    const std::int64_t n = dy.dim(0), tt = dy.dim(1);
    Tensor<T> d = detail::reshaped(Tensor<T>(dy), {n * tt, cfg_.bins_out});
    d = fc_.backward(d);
    d = detail::reshaped(std::move(d), {n, tt, 2 * cfg_.gru_hidden});
    d = gru_.backward(d);
    d = detail::reshaped(std::move(d), {n, 1, tt, cfg_.mel_bins});
    d = head_conv_.backward(d);
    // unwind the decoder in reverse execution order: rdbs_[4] (shallowest,
    // ran last) back to rdbs_[0]; rdbs_[i] consumed skip level 4-i
    std::array<Tensor<T>, 5> dskip;
    for (int i = 4; i >= 0; --i) {
      auto [dx, ds] = rdbs_[static_cast<std::size_t>(i)].backward(d);
      d = std::move(dx);
      dskip[static_cast<std::size_t>(4 - i)] = std::move(ds);
    }
    for (auto it = icbs_.rbegin(); it != icbs_.rend(); ++it)
      for (auto r = it->rcbs.rbegin(); r != it->rcbs.rend(); ++r) d = r->backward(d);
    for (int i = 4; i >= 0; --i) {
      Tensor<T> dpre =
          skips_[static_cast<std::size_t>(i)].backward(dskip[static_cast<std::size_t>(i)]);
      d = rebs_[static_cast<std::size_t>(i)].backward(d, dpre);
    }
    return bn_in_.backward(d);
  }

 private:
  void build_registry() {
    bn_in_.reg(reg_, "bn_in");
    for (int i = 0; i < 5; ++i) {
      rebs_[static_cast<std::size_t>(i)].reg(reg_, "enc" + std::to_string(i + 1));
      skips_[static_cast<std::size_t>(i)].reg(reg_, "skip" + std::to_string(i + 1));
    }
    for (std::size_t i = 0; i < icbs_.size(); ++i)
      icbs_[i].reg(reg_, "mid" + std::to_string(i + 1));
    for (std::size_t i = 0; i < rdbs_.size(); ++i)
      rdbs_[i].reg(reg_, "dec" + std::to_string(5 - i));
    head_conv_.reg(reg_, "head.conv");
    gru_.reg(reg_, "head.gru");
    fc_.reg(reg_, "head.fc");
  }

  ModelConfig cfg_;
  nn::BatchNorm2d<T> bn_in_;
  std::vector<Reb<T>> rebs_;
  std::vector<Rcb<T>> skips_;
  std::vector<Reb<T>> icbs_;  // pooling member unused; RCB stack only
  std::vector<Rdb<T>> rdbs_;
  nn::Conv2d<T> head_conv_;
  nn::BiGru<T> gru_;
  nn::LinearSigmoid<T> fc_;
  nn::ParamRegistry<T> reg_;
};

}  // namespace rmvpe

#endif  // RMVPE_MODEL_HPP
