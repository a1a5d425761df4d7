#ifndef RMVPE_NN_GRAD_CHECK_HPP
#define RMVPE_NN_GRAD_CHECK_HPP

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <random>
#include <vector>

#include "rmvpe/tensor.hpp"

namespace rmvpe::nn {

// Finite-difference verification reduces an op's output to a scalar
// L = sum_i w_i y_i with fixed pseudorandom weights so every output element
// contributes, then compares dL/dtheta from central differences against the
// analytic backward run with upstream gradient w.

inline Tensor<double> probe_weights(const std::vector<std::int64_t>& shape,
                                    std::uint64_t seed) {
  Tensor<double> w(shape);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& v : w.data) v = dist(rng);
  return w;
}

inline double weighted_sum(const Tensor<double>& y, const Tensor<double>& w) {
  if (!same_shape(y, w)) throw ShapeError("weighted_sum: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < y.data.size(); ++i) acc += y.data[i] * w.data[i];
  return acc;
}

// One probed coordinate: where to perturb and what the analytic backward said.
struct CoordRef {
  double* value;
  double analytic;
};

// Central differences (f(x+eps) - f(x-eps)) / 2eps per coordinate; relative
// error with an absolute denominator floor. The floor must sit above the
// difference-quotient roundoff (~ulp(f)/eps), or coordinates whose true
// gradient is structurally zero (e.g. a conv bias feeding a BatchNorm, which
// the mean subtraction cancels exactly) report pure noise as disagreement.
// `forward` must rerun the op on the current parameter/input state.
template <typename Fwd>
double max_rel_err(Fwd&& forward, const Tensor<double>& w,
                   const std::vector<CoordRef>& coords, double eps = 1e-4,
                   double floor = 1e-6) {
  double worst = 0.0;
  for (const auto& c : coords) {
    const double saved = *c.value;
    *c.value = saved + eps;
    const double lp = weighted_sum(forward(), w);
    *c.value = saved - eps;
    const double lm = weighted_sum(forward(), w);
    *c.value = saved;
    const double fd = (lp - lm) / (2.0 * eps);
    const double denom = std::max({floor, std::abs(fd), std::abs(c.analytic)});
    worst = std::max(worst, std::abs(fd - c.analytic) / denom);
  }
  return worst;
}

// Like max_rel_err, but each coordinate keeps its best agreement over several
// step sizes. A genuine analytic-gradient defect disagrees at every scale; a
// ReLU kink inside the difference interval only corrupts the scales whose
// step reaches across it, and roundoff on structurally zero gradients only
// the smallest ones, so the per-coordinate min discards exactly the scales a
// nonsmooth point or the floating-point noise floor invalidates.
template <typename Fwd>
double max_rel_err_multiscale(Fwd&& forward, const Tensor<double>& w,
                              const std::vector<CoordRef>& coords,
                              std::initializer_list<double> steps = {1e-4, 1e-5, 1e-6},
                              double floor = 1e-6) {
  double worst = 0.0;
  for (const auto& c : coords) {
    double best = std::numeric_limits<double>::infinity();
    for (const double eps : steps) {
      const double saved = *c.value;
      *c.value = saved + eps;
      const double lp = weighted_sum(forward(), w);
      *c.value = saved - eps;
      const double lm = weighted_sum(forward(), w);
      *c.value = saved;
      const double fd = (lp - lm) / (2.0 * eps);
      const double denom = std::max({floor, std::abs(fd), std::abs(c.analytic)});
      best = std::min(best, std::abs(fd - c.analytic) / denom);
    }
    worst = std::max(worst, best);
  }
  return worst;
}

// Every coordinate of `values` paired with its analytic gradient.
inline void collect_coords(Tensor<double>& values, const Tensor<double>& grads,
                           std::vector<CoordRef>& out) {
  if (!same_shape(values, grads)) throw ShapeError("collect_coords: shape mismatch");
  for (std::size_t i = 0; i < values.data.size(); ++i)
    out.push_back({&values.data[i], grads.data[i]});
}

// A random sample of k coordinates (for large parameter sets).
inline void sample_coords(Tensor<double>& values, const Tensor<double>& grads,
                          std::size_t k, std::uint64_t seed,
                          std::vector<CoordRef>& out) {
  if (!same_shape(values, grads)) throw ShapeError("sample_coords: shape mismatch");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> dist(0, values.data.size() - 1);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = dist(rng);
    out.push_back({&values.data[j], grads.data[j]});
  }
}

}  // namespace rmvpe::nn

#endif  // RMVPE_NN_GRAD_CHECK_HPP
