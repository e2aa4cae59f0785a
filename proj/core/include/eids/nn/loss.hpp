#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "eids/tensor.hpp"

namespace eids::nn {

inline constexpr double kProbFloor = 1e-7;  // prevents log(0) on saturated outputs

template <typename T>
struct LossValue {
  double loss = 0.0;
  TensorT<T> grad;  // dLoss/dpred, same shape as pred
};

/// Class-weighted cross-entropy, mean over the batch of
/// w[y_i] * (-log p_i[y_i]) with probabilities floored at 1e-7.
///
/// Multiclass mode: pred (n x C) rows are probability vectors, weights has C
/// entries. Binary mode: pred (n x 1) are sigmoid outputs for the positive
/// class, weights has 2 entries ordered {class 0, class 1}.
template <typename T>
LossValue<T> weighted_cross_entropy(const TensorT<T>& pred, const std::vector<int>& targets,
                                    const std::vector<double>& weights) {
  require_shape(pred.rank() == 2, "weighted_cross_entropy");
  const std::size_t n = pred.dim(0), c = pred.dim(1);
  require_shape(targets.size() == n, "weighted_cross_entropy");
  const bool binary = c == 1;
  const std::size_t n_classes = binary ? 2 : c;
  if (weights.size() != n_classes)
    throw contract_error("weight vector length does not match class count");

  LossValue<T> out;
  out.grad = TensorT<T>(pred.shape);
  double total = 0.0;
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = targets[i];
    if (y < 0 || static_cast<std::size_t>(y) >= n_classes)
      throw contract_error("target label out of range");
    const double w = weights[static_cast<std::size_t>(y)];
    double p;
    if (binary) {
      const double out_i = static_cast<double>(pred(i, 0));
      p = y == 1 ? out_i : 1.0 - out_i;
    } else {
      p = static_cast<double>(pred(i, static_cast<std::size_t>(y)));
    }
    const double floored = std::max(p, kProbFloor);
    total += w * -std::log(floored);
    // d/dp of -log(max(p, floor)) is 0 below the floor
    if (p > kProbFloor) {
      const double g = w / (floored * dn);
      if (binary) {
        out.grad(i, 0) = static_cast<T>(y == 1 ? -g : g);
      } else {
        out.grad(i, static_cast<std::size_t>(y)) = static_cast<T>(-g);
      }
    }
  }
  out.loss = total / dn;
  return out;
}

}  // namespace eids::nn
