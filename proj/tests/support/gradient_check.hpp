#pragma once

// Finite-difference gradient verification harness. Runs networks in 64-bit
// mode with central differences (step 1e-5) and compares whole-tensor L2
// norms, which keeps single-coordinate rounding noise from dominating.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "eids/nn/layers.hpp"
#include "eids/nn/loss.hpp"

namespace eids::testsupport {

inline double l2_rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  double na = 0, nb = 0, nd = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += a[i] * a[i];
    nb += b[i] * b[i];
    const double d = a[i] - b[i];
    nd += d * d;
  }
  return std::sqrt(nd) / std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
};

/// Compares analytic parameter gradients of `net` against central finite
/// differences of `loss_fn` (which must run a fresh forward pass).
/// coord_budget limits the checked coordinates per tensor (0 = all);
/// sampling is deterministic.
inline GradCheckResult check_gradients(nn::Network<double>& net,
                                       const std::function<double()>& loss_fn,
                                       const std::function<nn::TensorT<double>()>& forward_loss_grad,
                                       std::size_t coord_budget = 0) {
  // analytic pass
  net.zero_grads();
  nn::TensorT<double> g = forward_loss_grad();
  net.backward(g);

  GradCheckResult result;
  const double eps = 1e-5;
  for (nn::Param<double>* p : net.parameters()) {
    std::vector<std::size_t> coords;
    if (coord_budget == 0 || p->value.size() <= coord_budget) {
      coords.resize(p->value.size());
      for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
    } else {
      // deterministic stride sampling
      const std::size_t stride = p->value.size() / coord_budget;
      for (std::size_t i = 0; i < coord_budget; ++i) coords.push_back(i * stride);
    }
    std::vector<double> analytic, numeric;
    for (std::size_t c : coords) {
      const double orig = p->value.data[c];
      p->value.data[c] = orig + eps;
      const double lp = loss_fn();
      p->value.data[c] = orig - eps;
      const double lm = loss_fn();
      p->value.data[c] = orig;
      numeric.push_back((lp - lm) / (2.0 * eps));
      analytic.push_back(p->grad.data[c]);
    }
    const double rel = l2_rel_error(analytic, numeric);
    if (rel > result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst_param = p->name;
    }
  }
  return result;
}

/// Convenience wrapper: cross-entropy loss of net(x) against targets.
struct NetLossProbe {
  nn::Network<double>* net;
  nn::TensorT<double> x;
  std::vector<int> targets;
  std::vector<double> weights;

  double loss() {
    auto pred = net->forward(x, /*training=*/false, nullptr);
    return nn::weighted_cross_entropy(pred, targets, weights).loss;
  }

  nn::TensorT<double> forward_loss_grad() {
    auto pred = net->forward(x, /*training=*/false, nullptr);
    return nn::weighted_cross_entropy(pred, targets, weights).grad;
  }

  GradCheckResult run(std::size_t coord_budget = 0) {
    return check_gradients(
        *net, [this] { return loss(); }, [this] { return forward_loss_grad(); }, coord_budget);
  }
};

}  // namespace eids::testsupport
