#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "fpforge/errors.hpp"

namespace fpforge::nn {

// Dense NCHW tensor. `grad` is optional storage of the same shape, allocated
// on demand for trainable parameters.
template <typename T>
struct TensorT {
  std::array<int, 4> shape{0, 0, 0, 0};  // (batch, channels, height, width)
  std::vector<T> data;
  std::vector<T> grad;

  TensorT() = default;

  TensorT(int n, int c, int h, int w, T fill = T(0)) : shape{n, c, h, w} {
    if (n < 1 || c < 1 || h < 1 || w < 1) throw InvalidArgument("tensor dims must be >= 1");
    data.assign(static_cast<std::size_t>(n) * c * h * w, fill);
  }

  int n() const { return shape[0]; }
  int c() const { return shape[1]; }
  int h() const { return shape[2]; }
  int w() const { return shape[3]; }

  std::size_t size() const { return data.size(); }

  std::size_t index(int in, int ic, int iy, int ix) const {
    return ((static_cast<std::size_t>(in) * shape[1] + ic) * shape[2] + iy) * shape[3] + ix;
  }

  T& at(int in, int ic, int iy, int ix) { return data[index(in, ic, iy, ix)]; }
  T at(int in, int ic, int iy, int ix) const { return data[index(in, ic, iy, ix)]; }

  void alloc_grad() { grad.assign(data.size(), T(0)); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }

  static TensorT zeros_like(const TensorT& o) {
    return TensorT(o.shape[0], o.shape[1], o.shape[2], o.shape[3], T(0));
  }

  bool same_shape(const TensorT& o) const { return shape == o.shape; }
};

using Tensor = TensorT<float>;
using TensorD = TensorT<double>;

// Named trainable parameters with stable indices; grads live inside each
// tensor. Models register parameters here so the optimizer and checkpoint
// code can walk them uniformly.
template <typename T>
struct ParamStore {
  struct Entry {
    std::string name;
    TensorT<T> value;
    bool is_bias = false;
  };

  std::vector<Entry> entries;

  int add(std::string name, std::array<int, 4> shape, bool is_bias = false) {
    Entry e;
    e.name = std::move(name);
    e.value = TensorT<T>(shape[0], shape[1], shape[2], shape[3]);
    e.value.alloc_grad();
    e.is_bias = is_bias;
    entries.push_back(std::move(e));
    return static_cast<int>(entries.size()) - 1;
  }

  TensorT<T>& operator[](int i) { return entries[static_cast<std::size_t>(i)].value; }
  const TensorT<T>& operator[](int i) const { return entries[static_cast<std::size_t>(i)].value; }

  void zero_grads() {
    for (Entry& e : entries) e.value.zero_grad();
  }

  std::size_t total_size() const {
    std::size_t total = 0;
    for (const Entry& e : entries) total += e.value.size();
    return total;
  }
};

}  // namespace fpforge::nn
