#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "eids/tensor.hpp"

namespace eids::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected single-tensor Adam update; step is the 1-based step count
/// that produced this call.
template <typename T>
void adam_update(TensorT<T>& value, const TensorT<T>& grad, TensorT<T>& m, TensorT<T>& v,
                 std::uint64_t step, const AdamConfig& cfg) {
  require_shape(value.same_shape(grad) && value.same_shape(m) && value.same_shape(v),
                "adam_update");
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < value.size(); ++i) {
    const double g = static_cast<double>(grad.data[i]);
    const double mi = cfg.beta1 * static_cast<double>(m.data[i]) + (1.0 - cfg.beta1) * g;
    const double vi = cfg.beta2 * static_cast<double>(v.data[i]) + (1.0 - cfg.beta2) * g * g;
    m.data[i] = static_cast<T>(mi);
    v.data[i] = static_cast<T>(vi);
    const double mhat = mi / bc1;
    const double vhat = vi / bc2;
    value.data[i] -= static_cast<T>(cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps));
  }
  check_finite(value, "adam_update");
}

/// Optimizer state covering an ordered parameter list.
template <typename T>
struct AdamState {
  AdamConfig cfg;
  std::vector<TensorT<T>> m, v;
  std::uint64_t step = 0;

  template <typename Params>
  void init(const Params& params) {
    m.clear();
    v.clear();
    for (const auto* p : params) {
      m.emplace_back(p->value.shape);
      v.emplace_back(p->value.shape);
    }
    step = 0;
  }

  /// One Adam step over all parameters using their accumulated gradients.
  template <typename Params>
  void apply(const Params& params) {
    if (m.size() != params.size()) throw contract_error("adam state does not match parameters");
    ++step;
    std::size_t idx = 0;
    for (auto* p : params) {
      adam_update(p->value, p->grad, m[idx], v[idx], step, cfg);
      ++idx;
    }
  }
};

}  // namespace eids::nn
