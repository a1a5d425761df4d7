#ifndef RMVPE_NN_GRU_HPP
#define RMVPE_NN_GRU_HPP

#include <cmath>
#include <random>
#include <string>

#include "rmvpe/nn/gemm.hpp"
#include "rmvpe/nn/layers.hpp"
#include "rmvpe/nn/registry.hpp"
#include "rmvpe/tensor.hpp"

namespace rmvpe::nn {

// One GRU direction. Gate order in the packed weights is (r, z, n):
//   r = sigmoid(W_ir x + b_ir + W_hr h + b_hr)
//   z = sigmoid(W_iz x + b_iz + W_hz h + b_hz)
//   n = tanh(W_in x + b_in + r * (W_hn h + b_hn))
//   h' = (1 - z) * n + z * h
// The reset gate multiplies the hidden projection before the tanh (the "v3"
// formulation recorded in checkpoint configs as gru_variant=v3).
template <typename T>
struct GruDirection {
  int in_dim = 0, hidden = 0;
  bool reverse = false;
  Tensor<T> w_ih, w_hh, b_ih, b_hh;      // [3H,I], [3H,H], [3H], [3H]
  Tensor<T> gw_ih, gw_hh, gb_ih, gb_hh;
  // caches (training only)
  Tensor<T> x_, r_, z_, n_, ghn_, h_;
  bool has_cache_ = false;

  GruDirection() = default;
  GruDirection(int in_d, int h, bool rev) : in_dim(in_d), hidden(h), reverse(rev) {
    w_ih = Tensor<T>({3 * h, in_d});
    w_hh = Tensor<T>({3 * h, h});
    b_ih = Tensor<T>({3 * h});
    b_hh = Tensor<T>({3 * h});
    gw_ih = Tensor<T>({3 * h, in_d});
    gw_hh = Tensor<T>({3 * h, h});
    gb_ih = Tensor<T>({3 * h});
    gb_hh = Tensor<T>({3 * h});
  }

  void init(std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    init_uniform(w_ih, rng, bound);
    init_uniform(w_hh, rng, bound);
    init_uniform(b_ih, rng, bound);
    init_uniform(b_hh, rng, bound);
  }

  void reg(ParamRegistry<T>& r, const std::string& p) {
    r.add(p + ".w_ih", &w_ih, &gw_ih);
    r.add(p + ".w_hh", &w_hh, &gw_hh);
    r.add(p + ".b_ih", &b_ih, &gb_ih);
    r.add(p + ".b_hh", &b_hh, &gb_hh);
  }

  // x: [N, T, in_dim] -> h: [N, T, hidden]
  Tensor<T> forward(const Tensor<T>& x, bool train) {
    const std::int64_t n = x.dim(0), steps = x.dim(1);
    const std::int64_t h3 = 3 * hidden;

    // batched input projection gi = x w_ih^T + b_ih, shape [N*T, 3H]
    auto& wT = scratch<T>(0);
    wT.resize(static_cast<std::size_t>(in_dim) * h3);
    transpose(h3, in_dim, w_ih.ptr(), wT.data());
    Tensor<T> gi({n * steps, h3});
    for (std::int64_t row = 0; row < n * steps; ++row)
      for (std::int64_t j = 0; j < h3; ++j)
        gi.at(row, j) = b_ih.data[static_cast<std::size_t>(j)];
    gemm_acc(n * steps, h3, in_dim, x.ptr(), wT.data(), gi.ptr());

    auto& whhT = scratch<T>(1);
    whhT.resize(static_cast<std::size_t>(hidden) * h3);
    transpose(h3, hidden, w_hh.ptr(), whhT.data());

    Tensor<T> out({n, steps, hidden});
    if (train) {
      r_ = Tensor<T>({n, steps, hidden});
      z_ = Tensor<T>({n, steps, hidden});
      n_ = Tensor<T>({n, steps, hidden});
      ghn_ = Tensor<T>({n, steps, hidden});
      h_ = Tensor<T>({n, steps, hidden});
    }
    std::vector<T> hprev(static_cast<std::size_t>(hidden));
    std::vector<T> gh(static_cast<std::size_t>(h3));
    for (std::int64_t item = 0; item < n; ++item) {
      std::fill(hprev.begin(), hprev.end(), T(0));
      for (std::int64_t s = 0; s < steps; ++s) {
        const std::int64_t t = reverse ? steps - 1 - s : s;
        const T* gin = gi.ptr() + (item * steps + t) * h3;
        for (std::int64_t j = 0; j < h3; ++j) gh[static_cast<std::size_t>(j)] = b_hh.data[static_cast<std::size_t>(j)];
        for (int k = 0; k < hidden; ++k) {
          const T hv = hprev[static_cast<std::size_t>(k)];
          if (hv == T(0)) continue;
          const T* wrow = whhT.data() + static_cast<std::int64_t>(k) * h3;
          for (std::int64_t j = 0; j < h3; ++j) gh[static_cast<std::size_t>(j)] += hv * wrow[j];
        }
        T* hout = out.ptr() + (item * steps + t) * hidden;
        for (int j = 0; j < hidden; ++j) {
          const T rv = sigmoid(gin[j] + gh[static_cast<std::size_t>(j)]);
          const T zv = sigmoid(gin[hidden + j] + gh[static_cast<std::size_t>(hidden + j)]);
          const T ghn = gh[static_cast<std::size_t>(2 * hidden + j)];
          const T nv = std::tanh(gin[2 * hidden + j] + rv * ghn);
          const T hv = (T(1) - zv) * nv + zv * hprev[static_cast<std::size_t>(j)];
          if (train) {
            const std::int64_t o = (item * steps + t) * hidden + j;
            r_.data[static_cast<std::size_t>(o)] = rv;
            z_.data[static_cast<std::size_t>(o)] = zv;
            n_.data[static_cast<std::size_t>(o)] = nv;
            ghn_.data[static_cast<std::size_t>(o)] = ghn;
            h_.data[static_cast<std::size_t>(o)] = hv;
          }
          hout[j] = hv;
        }
        for (int j = 0; j < hidden; ++j) hprev[static_cast<std::size_t>(j)] = hout[j];
      }
    }
    if (train) {
      x_ = x;
      has_cache_ = true;
    }
    return out;
  }

  // dy: [N, T, hidden] -> dx: [N, T, in_dim]
  Tensor<T> backward(const Tensor<T>& dy) {
    if (!has_cache_) throw Error("gru: backward without cached forward");
    const std::int64_t n = x_.dim(0), steps = x_.dim(1);
    const std::int64_t h3 = 3 * hidden;
    require_shape(dy, {n, steps, hidden}, "gru backward");

    Tensor<T> dgi({n * steps, h3});
    std::vector<T> dh(static_cast<std::size_t>(hidden));
    std::vector<T> dgh(static_cast<std::size_t>(h3));
    for (std::int64_t item = 0; item < n; ++item) {
      std::fill(dh.begin(), dh.end(), T(0));
      for (std::int64_t s = steps - 1; s >= 0; --s) {
        const std::int64_t t = reverse ? steps - 1 - s : s;
        const std::int64_t o = (item * steps + t) * hidden;
        const std::int64_t tprev = reverse ? t + 1 : t - 1;
        const T* hprev = (s == 0) ? nullptr : h_.ptr() + (item * steps + tprev) * hidden;
        const T* dyt = dy.ptr() + o;
        T* dgit = dgi.ptr() + (item * steps + t) * h3;
        for (int j = 0; j < hidden; ++j) {
          const T d = dyt[j] + dh[static_cast<std::size_t>(j)];
          const T rv = r_.data[static_cast<std::size_t>(o + j)];
          const T zv = z_.data[static_cast<std::size_t>(o + j)];
          const T nv = n_.data[static_cast<std::size_t>(o + j)];
          const T ghn = ghn_.data[static_cast<std::size_t>(o + j)];
          const T hp = hprev ? hprev[j] : T(0);
          const T dz = d * (hp - nv);
          const T dn = d * (T(1) - zv);
          const T dan = dn * (T(1) - nv * nv);
          const T dr = dan * ghn;
          const T dar = dr * rv * (T(1) - rv);
          const T daz = dz * zv * (T(1) - zv);
          const T dghn = dan * rv;
          dgit[j] = dar;
          dgit[hidden + j] = daz;
          dgit[2 * hidden + j] = dan;
          dgh[static_cast<std::size_t>(j)] = dar;
          dgh[static_cast<std::size_t>(hidden + j)] = daz;
          dgh[static_cast<std::size_t>(2 * hidden + j)] = dghn;
          dh[static_cast<std::size_t>(j)] = d * zv;
        }
        // db_hh += dgh; dW_hh += dgh (x) h_prev; dh_prev += W_hh^T dgh
        for (std::int64_t j = 0; j < h3; ++j) {
          const T g = dgh[static_cast<std::size_t>(j)];
          gb_hh.data[static_cast<std::size_t>(j)] += g;
          if (g == T(0)) continue;
          const T* wrow = w_hh.ptr() + j * hidden;
          T* gwrow = gw_hh.ptr() + j * hidden;
          if (hprev) {
            for (int k = 0; k < hidden; ++k) {
              gwrow[k] += g * hprev[k];
              dh[static_cast<std::size_t>(k)] += g * wrow[k];
            }
          } else {
            for (int k = 0; k < hidden; ++k) dh[static_cast<std::size_t>(k)] += g * wrow[k];
          }
        }
      }
    }
    // dW_ih += dgi^T x; db_ih += column sums; dx = dgi w_ih
    auto& dgiT = scratch<T>(0);
    dgiT.resize(static_cast<std::size_t>(n * steps) * h3);
    transpose(n * steps, h3, dgi.ptr(), dgiT.data());
    gemm_acc(h3, in_dim, n * steps, dgiT.data(), x_.ptr(), gw_ih.ptr());
    for (std::int64_t row = 0; row < n * steps; ++row)
      for (std::int64_t j = 0; j < h3; ++j)
        gb_ih.data[static_cast<std::size_t>(j)] += dgi.at(row, j);
    Tensor<T> dx({n, steps, in_dim});
    gemm_acc(n * steps, in_dim, h3, dgi.ptr(), w_ih.ptr(), dx.ptr());
    return dx;
  }
};

// Bidirectional GRU over [N, T, in_dim] -> [N, T, 2*hidden]; forward-direction
// features occupy the first half of the feature axis.
template <typename T>
struct BiGru {
  int in_dim = 0, hidden = 0;
  GruDirection<T> fwd, bwd;

  BiGru() = default;
  BiGru(int in_d, int h)
      : in_dim(in_d), hidden(h), fwd(in_d, h, false), bwd(in_d, h, true) {}

  void init(std::mt19937_64& rng) {
    fwd.init(rng);
    bwd.init(rng);
  }

  void reg(ParamRegistry<T>& r, const std::string& p) {
    fwd.reg(r, p + ".fwd");
    bwd.reg(r, p + ".bwd");
  }

  Tensor<T> forward(const Tensor<T>& x, bool train) {
    if (x.rank() != 3 || x.dim(2) != in_dim)
      throw ShapeError("bigru: bad input " + x.shape_str());
    Tensor<T> hf = fwd.forward(x, train);
    Tensor<T> hb = bwd.forward(x, train);
    const std::int64_t n = x.dim(0), steps = x.dim(1);
    Tensor<T> y({n, steps, 2 * hidden});
    for (std::int64_t row = 0; row < n * steps; ++row) {
      T* dst = y.ptr() + row * 2 * hidden;
      const T* f = hf.ptr() + row * hidden;
      const T* b = hb.ptr() + row * hidden;
      for (int j = 0; j < hidden; ++j) dst[j] = f[j];
      for (int j = 0; j < hidden; ++j) dst[hidden + j] = b[j];
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    const std::int64_t n = dy.dim(0), steps = dy.dim(1);
    require_shape(dy, {n, steps, 2 * hidden}, "bigru backward");
    Tensor<T> df({n, steps, hidden}), db({n, steps, hidden});
    for (std::int64_t row = 0; row < n * steps; ++row) {
      const T* src = dy.ptr() + row * 2 * hidden;
      T* f = df.ptr() + row * hidden;
      T* b = db.ptr() + row * hidden;
      for (int j = 0; j < hidden; ++j) f[j] = src[j];
      for (int j = 0; j < hidden; ++j) b[j] = src[hidden + j];
    }
    Tensor<T> dxf = fwd.backward(df);
    Tensor<T> dxb = bwd.backward(db);
    for (std::size_t i = 0; i < dxf.data.size(); ++i) dxf.data[i] += dxb.data[i];
    return dxf;
  }
};

}  // namespace rmvpe::nn

#endif  // RMVPE_NN_GRU_HPP
