#ifndef RMVPE_TENSOR_HPP
#define RMVPE_TENSOR_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <vector>

#include "rmvpe/common.hpp"

namespace rmvpe {

// Dense row-major tensor. Rank is dynamic but the pipeline only ever uses
// rank 1 (bias), 2 (sequence T x D), and 4 (N x C x T x F).
template <typename T>
struct Tensor {
  std::vector<std::int64_t> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::int64_t> s) : shape(std::move(s)) {
    data.assign(static_cast<std::size_t>(numel_of(shape)), T(0));
  }
  Tensor(std::initializer_list<std::int64_t> s)
      : Tensor(std::vector<std::int64_t>(s)) {}

  static std::int64_t numel_of(const std::vector<std::int64_t>& s) {
    std::int64_t n = 1;
    for (auto d : s) {
      if (d < 0) throw ShapeError("negative dimension");
      n *= d;
    }
    return n;
  }

  std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  std::int64_t dim(int i) const { return shape[static_cast<std::size_t>(i)]; }

  void fill(T v) { std::fill(data.begin(), data.end(), v); }
  void zero() { fill(T(0)); }

  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  // rank-2 access
  T& at(std::int64_t i, std::int64_t j) {
    return data[static_cast<std::size_t>(i * shape[1] + j)];
  }
  T at(std::int64_t i, std::int64_t j) const {
    return data[static_cast<std::size_t>(i * shape[1] + j)];
  }
  // rank-4 access
  T& at(std::int64_t n, std::int64_t c, std::int64_t t, std::int64_t f) {
    return data[static_cast<std::size_t>(
        ((n * shape[1] + c) * shape[2] + t) * shape[3] + f)];
  }
  T at(std::int64_t n, std::int64_t c, std::int64_t t, std::int64_t f) const {
    return data[static_cast<std::size_t>(
        ((n * shape[1] + c) * shape[2] + t) * shape[3] + f)];
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  std::string shape_str() const {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape.size(); ++i)
      os << shape[i] << (i + 1 < shape.size() ? "," : "");
    os << ")";
    return os.str();
  }

  bool all_finite() const {
    for (T v : data)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(shape);
    for (std::size_t i = 0; i < data.size(); ++i)
      out.data[i] = static_cast<U>(data[i]);
    return out;
  }
};

template <typename T>
bool same_shape(const Tensor<T>& a, const Tensor<T>& b) {
  return a.shape == b.shape;
}

template <typename T>
void require_shape(const Tensor<T>& x, const std::vector<std::int64_t>& want,
                   const std::string& what) {
  if (x.shape != want) {
    std::ostringstream os;
    os << what << ": expected shape (";
    for (std::size_t i = 0; i < want.size(); ++i)
      os << want[i] << (i + 1 < want.size() ? "," : "");
    os << "), got " << x.shape_str();
    throw ShapeError(os.str());
  }
}

}  // namespace rmvpe

#endif  // RMVPE_TENSOR_HPP
