#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace dt6d::nn {

/// Dense 4-axis tensor, NHWC for activations, (K,K,Cin,Cout) for conv
/// kernels, (N,M,1,1) for dense weights. Value type is float for training
/// and double for the finite-difference suite.
template <typename T>
struct Tensor {
  std::array<int, 4> shape{0, 0, 0, 0};
  std::vector<T> v;

  Tensor() = default;
  Tensor(int a, int b, int c, int d)
      : shape{a, b, c, d},
        v(static_cast<size_t>(a) * b * c * d, T{0}) {}

  size_t size() const { return v.size(); }

  T& at(int a, int b, int c, int d) {
    return v[((static_cast<size_t>(a) * shape[1] + b) * shape[2] + c) * shape[3] + d];
  }
  T at(int a, int b, int c, int d) const {
    return v[((static_cast<size_t>(a) * shape[1] + b) * shape[2] + c) * shape[3] + d];
  }

  T* row(int a, int b, int c) {
    return &v[((static_cast<size_t>(a) * shape[1] + b) * shape[2] + c) * shape[3]];
  }
  const T* row(int a, int b, int c) const {
    return &v[((static_cast<size_t>(a) * shape[1] + b) * shape[2] + c) * shape[3]];
  }

  void fill(T value) { std::fill(v.begin(), v.end(), value); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

}  // namespace dt6d::nn
