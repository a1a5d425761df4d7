#ifndef RMVPE_NN_LAYERS_HPP
#define RMVPE_NN_LAYERS_HPP

#include <cmath>
#include <random>
#include <string>

#include "rmvpe/nn/gemm.hpp"
#include "rmvpe/nn/registry.hpp"
#include "rmvpe/tensor.hpp"

namespace rmvpe::nn {

template <typename T>
T sigmoid(T v) {
  if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
  const T e = std::exp(v);
  return e / (T(1) + e);
}

// ---------------------------------------------------------------------------
// Conv2d: stride 1, zero padding k/2, square odd kernel (1 or 3 in this
// model). Direct shifted-row form: per (ci, ky, kx) tap one strided pass over
// the valid window, so nothing gets materialized and every output element
// accumulates its taps in a fixed sequential order (bit-reproducible).
// ---------------------------------------------------------------------------
template <typename T>
struct Conv2d {
  int in_ch = 0, out_ch = 0, ksize = 3;
  Tensor<T> w, b, gw, gb;
  Tensor<T> x_;  // cached input (training only)
  bool has_cache_ = false;

  Conv2d() = default;
  Conv2d(int in_c, int out_c, int k) : in_ch(in_c), out_ch(out_c), ksize(k) {
    w = Tensor<T>({out_c, in_c, k, k});
    b = Tensor<T>({out_c});
    gw = Tensor<T>({out_c, in_c, k, k});
    gb = Tensor<T>({out_c});
  }

  void init(std::mt19937_64& rng) {
    init_normal(w, rng, std::sqrt(2.0 / (in_ch * ksize * ksize)));
    b.zero();
  }

  void reg(ParamRegistry<T>& r, const std::string& p) {
    r.add(p + ".w", &w, &gw);
    r.add(p + ".b", &b, &gb);
  }

  Tensor<T> forward(const Tensor<T>& x, bool train) {
    if (x.rank() != 4 || x.dim(1) != in_ch)
      throw ShapeError("conv2d: bad input " + x.shape_str());
    const std::int64_t n = x.dim(0), tt = x.dim(2), ff = x.dim(3);
    const std::int64_t plane = tt * ff;
    const int pad = ksize / 2;

    Tensor<T> y({n, out_ch, tt, ff});
    for (std::int64_t item = 0; item < n; ++item) {
      const T* xn = x.ptr() + item * in_ch * plane;
      T* yn = y.ptr() + item * out_ch * plane;
      for (int co = 0; co < out_ch; ++co) {
        T* yp = yn + static_cast<std::int64_t>(co) * plane;
        const T bias = b.data[static_cast<std::size_t>(co)];
        for (std::int64_t i = 0; i < plane; ++i) yp[i] = bias;
        for (int ci = 0; ci < in_ch; ++ci) {
          const T* xp = xn + static_cast<std::int64_t>(ci) * plane;
          const T* wp =
              w.ptr() + (static_cast<std::int64_t>(co) * in_ch + ci) * ksize * ksize;
          for (int ky = 0; ky < ksize; ++ky) {
            const std::int64_t t0 = std::max<std::int64_t>(0, pad - ky);
            const std::int64_t t1 = std::min<std::int64_t>(tt, tt - ky + pad);
            for (int kx = 0; kx < ksize; ++kx) {
              const T wv = wp[ky * ksize + kx];
              if (wv == T(0)) continue;
              const std::int64_t f0 = std::max<std::int64_t>(0, pad - kx);
              const std::int64_t f1 = std::min<std::int64_t>(ff, ff - kx + pad);
              const T* xrow = xp + (t0 + ky - pad) * ff + (kx - pad);
              T* yrow = yp + t0 * ff;
              for (std::int64_t t = t0; t < t1; ++t) {
                for (std::int64_t f = f0; f < f1; ++f) yrow[f] += wv * xrow[f];
                yrow += ff;
                xrow += ff;
              }
            }
          }
        }
      }
    }
    if (train) {
      x_ = x;
      has_cache_ = true;
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    if (!has_cache_) throw Error("conv2d: backward without cached forward");
    const std::int64_t n = x_.dim(0), tt = x_.dim(2), ff = x_.dim(3);
    const std::int64_t plane = tt * ff;
    const int pad = ksize / 2;
    require_shape(dy, {n, out_ch, tt, ff}, "conv2d backward");

    Tensor<T> dx({n, in_ch, tt, ff});
    for (std::int64_t item = 0; item < n; ++item) {
      const T* xn = x_.ptr() + item * in_ch * plane;
      const T* dyn = dy.ptr() + item * out_ch * plane;
      T* dxn = dx.ptr() + item * in_ch * plane;

      for (int co = 0; co < out_ch; ++co) {
        const T* dyp = dyn + static_cast<std::int64_t>(co) * plane;
        // db += sum over plane; four lanes for ILP, combined in fixed order
        T a0 = 0, a1 = 0, a2 = 0, a3 = 0;
        std::int64_t i = 0;
        for (; i + 4 <= plane; i += 4) {
          a0 += dyp[i];
          a1 += dyp[i + 1];
          a2 += dyp[i + 2];
          a3 += dyp[i + 3];
        }
        for (; i < plane; ++i) a0 += dyp[i];
        gb.data[static_cast<std::size_t>(co)] += (a0 + a1) + (a2 + a3);

        for (int ci = 0; ci < in_ch; ++ci) {
          const T* xp = xn + static_cast<std::int64_t>(ci) * plane;
          T* dxp = dxn + static_cast<std::int64_t>(ci) * plane;
          const std::int64_t wbase =
              (static_cast<std::int64_t>(co) * in_ch + ci) * ksize * ksize;
          for (int ky = 0; ky < ksize; ++ky) {
            const std::int64_t t0 = std::max<std::int64_t>(0, pad - ky);
            const std::int64_t t1 = std::min<std::int64_t>(tt, tt - ky + pad);
            for (int kx = 0; kx < ksize; ++kx) {
              const std::int64_t f0 = std::max<std::int64_t>(0, pad - kx);
              const std::int64_t f1 = std::min<std::int64_t>(ff, ff - kx + pad);
              // dW: correlate dy against the same shifted window forward read
              {
                const T* xrow = xp + (t0 + ky - pad) * ff + (kx - pad);
                const T* dyrow = dyp + t0 * ff;
                T c0 = 0, c1 = 0, c2 = 0, c3 = 0;
                for (std::int64_t t = t0; t < t1; ++t) {
                  std::int64_t f = f0;
                  for (; f + 4 <= f1; f += 4) {
                    c0 += dyrow[f] * xrow[f];
                    c1 += dyrow[f + 1] * xrow[f + 1];
                    c2 += dyrow[f + 2] * xrow[f + 2];
                    c3 += dyrow[f + 3] * xrow[f + 3];
                  }
                  for (; f < f1; ++f) c0 += dyrow[f] * xrow[f];
                  dyrow += ff;
                  xrow += ff;
                }
                gw.data[static_cast<std::size_t>(wbase + ky * ksize + kx)] +=
                    (c0 + c1) + (c2 + c3);
              }
              // dx: adjoint of the forward tap, same window geometry
              const T wv = w.data[static_cast<std::size_t>(wbase + ky * ksize + kx)];
              if (wv == T(0)) continue;
              T* dxrow = dxp + (t0 + ky - pad) * ff + (kx - pad);
              const T* dyrow = dyp + t0 * ff;
              for (std::int64_t t = t0; t < t1; ++t) {
                for (std::int64_t f = f0; f < f1; ++f) dxrow[f] += wv * dyrow[f];
                dxrow += ff;
                dyrow += ff;
              }
            }
          }
        }
      }
    }
    return dx;
  }
};

// ---------------------------------------------------------------------------
// BatchNorm2d over (N, T, F) per channel. Training mode normalizes with the
// biased batch variance and updates running stats; eval mode uses the
// running stats (fresh layers therefore normalize with mean 0, var 1).
// ---------------------------------------------------------------------------
template <typename T>
struct BatchNorm2d {
  int channels = 0;
  double eps = 1e-5;
  double momentum = 0.1;
  Tensor<T> gamma, beta, ggamma, gbeta;
  Tensor<T> running_mean, running_var;
  // caches
  Tensor<T> xhat_;
  std::vector<T> inv_std_;
  bool has_cache_ = false;

  BatchNorm2d() = default;
  explicit BatchNorm2d(int c) : channels(c) {
    gamma = Tensor<T>({c});
    beta = Tensor<T>({c});
    ggamma = Tensor<T>({c});
    gbeta = Tensor<T>({c});
    running_mean = Tensor<T>({c});
    running_var = Tensor<T>({c});
    gamma.fill(T(1));
    running_var.fill(T(1));
  }

  void reg(ParamRegistry<T>& r, const std::string& p) {
    r.add(p + ".gamma", &gamma, &ggamma);
    r.add(p + ".beta", &beta, &gbeta);
    r.add_buffer(p + ".running_mean", &running_mean);
    r.add_buffer(p + ".running_var", &running_var);
  }

  void reset() {
    gamma.fill(T(1));
    beta.zero();
    running_mean.zero();
    running_var.fill(T(1));
  }

  Tensor<T> forward(const Tensor<T>& x, bool train) {
    if (x.rank() != 4 || x.dim(1) != channels)
      throw ShapeError("batchnorm2d: bad input " + x.shape_str());
    const std::int64_t n = x.dim(0), tt = x.dim(2), ff = x.dim(3);
    const std::int64_t plane = tt * ff;
    const std::int64_t m = n * plane;

    Tensor<T> y(x.shape);
    if (train) {
      xhat_ = Tensor<T>(x.shape);
      inv_std_.assign(static_cast<std::size_t>(channels), T(0));
    }
    for (int c = 0; c < channels; ++c) {
      double mean, var;
      if (train) {
        double s = 0.0, s2 = 0.0;
        for (std::int64_t item = 0; item < n; ++item) {
          const T* p = x.ptr() + (item * channels + c) * plane;
          for (std::int64_t i = 0; i < plane; ++i) {
            const double v = static_cast<double>(p[i]);
            s += v;
            s2 += v * v;
          }
        }
        mean = s / static_cast<double>(m);
        var = s2 / static_cast<double>(m) - mean * mean;
        if (var < 0.0) var = 0.0;
        auto& rm = running_mean.data[static_cast<std::size_t>(c)];
        auto& rv = running_var.data[static_cast<std::size_t>(c)];
        rm = static_cast<T>((1.0 - momentum) * static_cast<double>(rm) + momentum * mean);
        rv = static_cast<T>((1.0 - momentum) * static_cast<double>(rv) + momentum * var);
      } else {
        mean = static_cast<double>(running_mean.data[static_cast<std::size_t>(c)]);
        var = static_cast<double>(running_var.data[static_cast<std::size_t>(c)]);
      }
      const T istd = static_cast<T>(1.0 / std::sqrt(var + eps));
      const T mu = static_cast<T>(mean);
      const T g = gamma.data[static_cast<std::size_t>(c)];
      const T bt = beta.data[static_cast<std::size_t>(c)];
      if (train) inv_std_[static_cast<std::size_t>(c)] = istd;
      for (std::int64_t item = 0; item < n; ++item) {
        const T* p = x.ptr() + (item * channels + c) * plane;
        T* q = y.ptr() + (item * channels + c) * plane;
        T* xh = train ? xhat_.ptr() + (item * channels + c) * plane : nullptr;
        for (std::int64_t i = 0; i < plane; ++i) {
          const T h = (p[i] - mu) * istd;
          if (xh) xh[i] = h;
          q[i] = g * h + bt;
        }
      }
    }
    has_cache_ = train;
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    if (!has_cache_) throw Error("batchnorm2d: backward without cached forward");
    require_shape(dy, xhat_.shape, "batchnorm2d backward");
    const std::int64_t n = dy.dim(0), plane = dy.dim(2) * dy.dim(3);
    const std::int64_t m = n * plane;

    Tensor<T> dx(dy.shape);
    for (int c = 0; c < channels; ++c) {
      T s1 = T(0), s2 = T(0);
      for (std::int64_t item = 0; item < n; ++item) {
        const T* d = dy.ptr() + (item * channels + c) * plane;
        const T* xh = xhat_.ptr() + (item * channels + c) * plane;
        for (std::int64_t i = 0; i < plane; ++i) {
          s1 += d[i];
          s2 += d[i] * xh[i];
        }
      }
      ggamma.data[static_cast<std::size_t>(c)] += s2;
      gbeta.data[static_cast<std::size_t>(c)] += s1;
      const T g = gamma.data[static_cast<std::size_t>(c)];
      const T istd = inv_std_[static_cast<std::size_t>(c)];
      const T inv_m = static_cast<T>(1.0 / static_cast<double>(m));
      for (std::int64_t item = 0; item < n; ++item) {
        const T* d = dy.ptr() + (item * channels + c) * plane;
        const T* xh = xhat_.ptr() + (item * channels + c) * plane;
        T* o = dx.ptr() + (item * channels + c) * plane;
        for (std::int64_t i = 0; i < plane; ++i)
          o[i] = g * istd * (d[i] - s1 * inv_m - xh[i] * s2 * inv_m);
      }
    }
    return dx;
  }
};

// ---------------------------------------------------------------------------
// ReLU. Subgradient at 0 is 0.
// ---------------------------------------------------------------------------
template <typename T>
struct Relu {
  Tensor<T> y_;
  bool has_cache_ = false;

  Tensor<T> forward(const Tensor<T>& x, bool train) {
    Tensor<T> y(x.shape);
    for (std::size_t i = 0; i < x.data.size(); ++i)
      y.data[i] = x.data[i] > T(0) ? x.data[i] : T(0);
    if (train) {
      y_ = y;
      has_cache_ = true;
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    if (!has_cache_) throw Error("relu: backward without cached forward");
    require_shape(dy, y_.shape, "relu backward");
    Tensor<T> dx(dy.shape);
    for (std::size_t i = 0; i < dy.data.size(); ++i)
      dx.data[i] = y_.data[i] > T(0) ? dy.data[i] : T(0);
    return dx;
  }
};

// ---------------------------------------------------------------------------
// 2x2 average pooling over disjoint blocks; T and F must be even.
// ---------------------------------------------------------------------------
template <typename T>
struct AvgPool2x2 {
  std::vector<std::int64_t> in_shape_;

  Tensor<T> forward(const Tensor<T>& x, bool train) {
    if (x.rank() != 4) throw ShapeError("avgpool2x2: rank-4 input required");
    const std::int64_t n = x.dim(0), c = x.dim(1), tt = x.dim(2), ff = x.dim(3);
    if (tt % 2 != 0 || ff % 2 != 0)
      throw ShapeError("avgpool2x2: odd spatial dims " + x.shape_str());
    if (train) in_shape_ = x.shape;
    Tensor<T> y({n, c, tt / 2, ff / 2});
    for (std::int64_t nc = 0; nc < n * c; ++nc) {
      const T* src = x.ptr() + nc * tt * ff;
      T* dst = y.ptr() + nc * (tt / 2) * (ff / 2);
      for (std::int64_t t = 0; t < tt / 2; ++t)
        for (std::int64_t f = 0; f < ff / 2; ++f) {
          const T* r0 = src + (2 * t) * ff + 2 * f;
          const T* r1 = r0 + ff;
          dst[t * (ff / 2) + f] = (r0[0] + r0[1] + r1[0] + r1[1]) * T(0.25);
        }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    if (in_shape_.empty()) throw Error("avgpool2x2: backward without cached forward");
    Tensor<T> dx(in_shape_);
    const std::int64_t n = dx.dim(0), c = dx.dim(1), tt = dx.dim(2), ff = dx.dim(3);
    require_shape(dy, {n, c, tt / 2, ff / 2}, "avgpool2x2 backward");
    for (std::int64_t nc = 0; nc < n * c; ++nc) {
      const T* src = dy.ptr() + nc * (tt / 2) * (ff / 2);
      T* dst = dx.ptr() + nc * tt * ff;
      for (std::int64_t t = 0; t < tt / 2; ++t)
        for (std::int64_t f = 0; f < ff / 2; ++f) {
          const T v = src[t * (ff / 2) + f] * T(0.25);
          T* r0 = dst + (2 * t) * ff + 2 * f;
          T* r1 = r0 + ff;
          r0[0] += v;
          r0[1] += v;
          r1[0] += v;
          r1[1] += v;
        }
    }
    return dx;
  }
};

// ---------------------------------------------------------------------------
// ConvTranspose2d: 3x3 kernel, stride 2, padding 1, output padding 1, so the
// output is exactly (2T, 2F). Weight layout is [in, out, 3, 3].
// Output positions: y = 2*iy - 1 + ky, x = 2*ix - 1 + kx.
// ---------------------------------------------------------------------------
template <typename T>
struct ConvTranspose2x2 {
  int in_ch = 0, out_ch = 0;
  static constexpr int kK = 3;
  Tensor<T> w, b, gw, gb;
  Tensor<T> x_;
  bool has_cache_ = false;

  ConvTranspose2x2() = default;
  ConvTranspose2x2(int in_c, int out_c) : in_ch(in_c), out_ch(out_c) {
    w = Tensor<T>({in_c, out_c, kK, kK});
    b = Tensor<T>({out_c});
    gw = Tensor<T>({in_c, out_c, kK, kK});
    gb = Tensor<T>({out_c});
  }

  void init(std::mt19937_64& rng) {
    init_normal(w, rng, std::sqrt(2.0 / (in_ch * kK * kK)));
    b.zero();
  }

  void reg(ParamRegistry<T>& r, const std::string& p) {
    r.add(p + ".w", &w, &gw);
    r.add(p + ".b", &b, &gb);
  }

  Tensor<T> forward(const Tensor<T>& x, bool train) {
    if (x.rank() != 4 || x.dim(1) != in_ch)
      throw ShapeError("conv_transpose: bad input " + x.shape_str());
    const std::int64_t n = x.dim(0), tt = x.dim(2), ff = x.dim(3);
    const std::int64_t plane = tt * ff;
    const std::int64_t ot = 2 * tt, of = 2 * ff;
    const std::int64_t kdim = static_cast<std::int64_t>(out_ch) * kK * kK;

    Tensor<T> y({n, out_ch, ot, of});
    auto& tmp = scratch<T>(0);
    auto& wT = scratch<T>(1);
    tmp.resize(static_cast<std::size_t>(kdim * plane));
    wT.resize(static_cast<std::size_t>(kdim * in_ch));
    transpose(in_ch, kdim, w.ptr(), wT.data());

    for (std::int64_t item = 0; item < n; ++item) {
      const T* xn = x.ptr() + item * in_ch * plane;
      T* yn = y.ptr() + item * out_ch * ot * of;
      std::fill(tmp.begin(), tmp.end(), T(0));
      gemm_acc(kdim, plane, in_ch, wT.data(), xn, tmp.data());
      for (int co = 0; co < out_ch; ++co) {
        T* dst = yn + static_cast<std::int64_t>(co) * ot * of;
        const T bias = b.data[static_cast<std::size_t>(co)];
        for (std::int64_t i = 0; i < ot * of; ++i) dst[i] = bias;
        for (int ky = 0; ky < kK; ++ky)
          for (int kx = 0; kx < kK; ++kx) {
            const T* src = tmp.data() +
                           ((static_cast<std::int64_t>(co) * kK + ky) * kK + kx) * plane;
            for (std::int64_t t = 0; t < tt; ++t) {
              const std::int64_t oy = 2 * t - 1 + ky;
              if (oy < 0 || oy >= ot) continue;
              T* drow = dst + oy * of;
              const std::int64_t base = 2 * 0 - 1 + kx;
              for (std::int64_t f = 0; f < ff; ++f) {
                const std::int64_t ox = base + 2 * f;
                if (ox >= 0 && ox < of) drow[ox] += src[t * ff + f];
              }
            }
          }
      }
    }
    if (train) {
      x_ = x;
      has_cache_ = true;
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    if (!has_cache_) throw Error("conv_transpose: backward without cached forward");
    const std::int64_t n = x_.dim(0), tt = x_.dim(2), ff = x_.dim(3);
    const std::int64_t plane = tt * ff;
    const std::int64_t ot = 2 * tt, of = 2 * ff;
    const std::int64_t kdim = static_cast<std::int64_t>(out_ch) * kK * kK;
    require_shape(dy, {n, out_ch, ot, of}, "conv_transpose backward");

    Tensor<T> dx({n, in_ch, tt, ff});
    auto& p = scratch<T>(0);
    auto& pT = scratch<T>(1);
    p.resize(static_cast<std::size_t>(kdim * plane));
    pT.resize(static_cast<std::size_t>(kdim * plane));

    for (std::int64_t item = 0; item < n; ++item) {
      const T* dyn = dy.ptr() + item * out_ch * ot * of;
      const T* xn = x_.ptr() + item * in_ch * plane;
      // gather strided patches of dy: p[(co,ky,kx)][t*ff+f] = dy[co][2t-1+ky][2f-1+kx]
      for (int co = 0; co < out_ch; ++co) {
        const T* src = dyn + static_cast<std::int64_t>(co) * ot * of;
        for (int ky = 0; ky < kK; ++ky)
          for (int kx = 0; kx < kK; ++kx) {
            T* dst = p.data() +
                     ((static_cast<std::int64_t>(co) * kK + ky) * kK + kx) * plane;
            for (std::int64_t t = 0; t < tt; ++t) {
              const std::int64_t oy = 2 * t - 1 + ky;
              T* drow = dst + t * ff;
              if (oy < 0 || oy >= ot) {
                for (std::int64_t f = 0; f < ff; ++f) drow[f] = T(0);
                continue;
              }
              const T* srow = src + oy * of;
              for (std::int64_t f = 0; f < ff; ++f) {
                const std::int64_t ox = 2 * f - 1 + kx;
                drow[f] = (ox >= 0 && ox < of) ? srow[ox] : T(0);
              }
            }
          }
        // db
        T acc = T(0);
        const T* srow = dyn + static_cast<std::int64_t>(co) * ot * of;
        for (std::int64_t i = 0; i < ot * of; ++i) acc += srow[i];
        gb.data[static_cast<std::size_t>(co)] += acc;
      }
      // dx = w[in][kdim] * p[kdim][plane]
      gemm_acc(in_ch, plane, kdim, w.ptr(), p.data(), dx.ptr() + item * in_ch * plane);
      // dW += x[in][plane] * p^T[plane][kdim]
      transpose(kdim, plane, p.data(), pT.data());
      gemm_acc(in_ch, kdim, plane, xn, pT.data(), gw.ptr());
    }
    return dx;
  }
};

// ---------------------------------------------------------------------------
// Fully connected layer with a fused sigmoid: y = sigmoid(x W^T + b).
// Operates on rank-2 input [rows, in_dim].
// ---------------------------------------------------------------------------
template <typename T>
struct LinearSigmoid {
  int in_dim = 0, out_dim = 0;
  Tensor<T> w, b, gw, gb;
  Tensor<T> x_, y_;
  bool has_cache_ = false;

  LinearSigmoid() = default;
  LinearSigmoid(int in_d, int out_d) : in_dim(in_d), out_dim(out_d) {
    w = Tensor<T>({out_d, in_d});
    b = Tensor<T>({out_d});
    gw = Tensor<T>({out_d, in_d});
    gb = Tensor<T>({out_d});
  }

  void init(std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
    init_uniform(w, rng, bound);
    init_uniform(b, rng, bound);
  }

  void reg(ParamRegistry<T>& r, const std::string& p) {
    r.add(p + ".w", &w, &gw);
    r.add(p + ".b", &b, &gb);
  }

  Tensor<T> forward(const Tensor<T>& x, bool train) {
    if (x.rank() != 2 || x.dim(1) != in_dim)
      throw ShapeError("linear_sigmoid: bad input " + x.shape_str());
    const std::int64_t rows = x.dim(0);
    auto& wT = scratch<T>(0);
    wT.resize(static_cast<std::size_t>(in_dim) * out_dim);
    transpose(out_dim, in_dim, w.ptr(), wT.data());

    Tensor<T> y({rows, out_dim});
    for (std::int64_t r = 0; r < rows; ++r)
      for (int o = 0; o < out_dim; ++o)
        y.at(r, o) = b.data[static_cast<std::size_t>(o)];
    gemm_acc(rows, out_dim, in_dim, x.ptr(), wT.data(), y.ptr());
    for (auto& v : y.data) v = sigmoid(v);
    if (train) {
      x_ = x;
      y_ = y;
      has_cache_ = true;
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    if (!has_cache_) throw Error("linear_sigmoid: backward without cached forward");
    require_shape(dy, y_.shape, "linear_sigmoid backward");
    const std::int64_t rows = dy.dim(0);

    Tensor<T> dz({rows, out_dim});
    for (std::size_t i = 0; i < dz.data.size(); ++i) {
      const T y = y_.data[i];
      dz.data[i] = dy.data[i] * y * (T(1) - y);
    }
    // dW += dz^T x
    auto& dzT = scratch<T>(0);
    dzT.resize(static_cast<std::size_t>(rows) * out_dim);
    transpose(rows, out_dim, dz.ptr(), dzT.data());
    gemm_acc(out_dim, in_dim, rows, dzT.data(), x_.ptr(), gw.ptr());
    for (std::int64_t r = 0; r < rows; ++r)
      for (int o = 0; o < out_dim; ++o)
        gb.data[static_cast<std::size_t>(o)] += dz.at(r, o);
    // dx = dz W
    Tensor<T> dx({rows, in_dim});
    gemm_acc(rows, in_dim, out_dim, dz.ptr(), w.ptr(), dx.ptr());
    return dx;
  }
};

}  // namespace rmvpe::nn

#endif  // RMVPE_NN_LAYERS_HPP
