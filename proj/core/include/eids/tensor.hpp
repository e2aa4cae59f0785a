#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "eids/errors.hpp"

namespace eids::nn {

/// Dense row-major n-d array of 32-bit floats in production; the double
/// instantiation exists for gradient verification only.
template <typename T>
struct TensorT {
  std::vector<std::size_t> shape;
  std::vector<T> data;

  TensorT() = default;
  explicit TensorT(std::vector<std::size_t> s, T fill = T{})
      : shape(std::move(s)), data(checked_count(shape), fill) {}

  static std::size_t checked_count(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (std::size_t d : s) {
      if (d == 0) throw contract_error("tensor dims must be positive");
      n *= d;
    }
    return n;
  }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t dim(std::size_t i) const { return shape[i]; }

  T& operator()(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }
  T& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data[(i * shape[1] + j) * shape[2] + k];
  }
  const T& operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data[(i * shape[1] + j) * shape[2] + k];
  }

  bool same_shape(const TensorT& o) const { return shape == o.shape; }

  TensorT reshaped(std::vector<std::size_t> new_shape) const {
    TensorT out;
    out.shape = std::move(new_shape);
    if (checked_count(out.shape) != size()) throw contract_error("reshape changes element count");
    out.data = data;
    return out;
  }
};

using Tensor = TensorT<float>;

template <typename T>
inline void check_finite(const TensorT<T>& t, const char* what) {
  for (const T& v : t.data) {
    if (!std::isfinite(v))
      throw contract_error(std::string("non-finite value produced by ") + what);
  }
}

inline void require_shape(bool ok, const char* what) {
  if (!ok) throw contract_error(std::string("shape mismatch in ") + what);
}

template <typename To, typename From>
TensorT<To> tensor_cast(const TensorT<From>& src) {
  TensorT<To> out;
  out.shape = src.shape;
  out.data.reserve(src.data.size());
  for (From v : src.data) out.data.push_back(static_cast<To>(v));
  return out;
}

}  // namespace eids::nn
