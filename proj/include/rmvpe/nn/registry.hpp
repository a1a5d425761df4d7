#ifndef RMVPE_NN_REGISTRY_HPP
#define RMVPE_NN_REGISTRY_HPP

#include <random>
#include <string>
#include <vector>

#include "rmvpe/common.hpp"
#include "rmvpe/tensor.hpp"

namespace rmvpe::nn {

// Flat view over a model's named tensors, in registration order. The order is
// the contract for the optimizer walk and the checkpoint layout.
template <typename T>
struct ParamRegistry {
  struct Entry {
    std::string name;
    Tensor<T>* value;
    Tensor<T>* grad;  // null for non-trainable buffers (BN running stats)
  };
  std::vector<Entry> entries;

  void add(const std::string& name, Tensor<T>* value, Tensor<T>* grad) {
    for (const auto& e : entries)
      if (e.name == name) throw Error("duplicate parameter name: " + name);
    entries.push_back({name, value, grad});
  }
  void add_buffer(const std::string& name, Tensor<T>* value) {
    add(name, value, nullptr);
  }

  std::int64_t trainable_count() const {
    std::int64_t n = 0;
    for (const auto& e : entries)
      if (e.grad) n += e.value->numel();
    return n;
  }

  void zero_grads() {
    for (auto& e : entries)
      if (e.grad) e.grad->zero();
  }

  const Entry* find(const std::string& name) const {
    for (const auto& e : entries)
      if (e.name == name) return &e;
    return nullptr;
  }
};

template <typename T>
void init_normal(Tensor<T>& t, std::mt19937_64& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto& v : t.data) v = static_cast<T>(dist(rng));
}

template <typename T>
void init_uniform(Tensor<T>& t, std::mt19937_64& rng, double bound) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : t.data) v = static_cast<T>(dist(rng));
}

}  // namespace rmvpe::nn

#endif  // RMVPE_NN_REGISTRY_HPP
