#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eids/dataset.hpp"
#include "eids/model.hpp"
#include "eids/tensor.hpp"

namespace eids::baselines {

// ---- logistic regression -------------------------------------------------------

struct LogisticConfig {
  double lr = 0.01;
  std::size_t epochs = 50;
  std::size_t batch_size = 512;
  std::uint64_t seed = 42;
};

/// Sigmoid (binary) or softmax (multi) regression; parameters start at zero
/// so an untrained model predicts the uniform distribution.
struct LogisticModel {
  model::Task task = model::Task::binary;
  nn::Tensor w;  // (d x C) or (d x 1)
  nn::Tensor b;  // (C) or (1)
  bool trained = false;
  LogisticConfig config;
};

/// Mini-batch Adam on (unweighted) cross-entropy; deterministic under seed.
LogisticModel logistic_train(const data::FeatureFrame& frame, model::Task task,
                             const LogisticConfig& cfg);

model::Prediction logistic_predict(const LogisticModel& m, const data::FeatureFrame& frame);

// ---- k-nearest neighbors ----------------------------------------------------------

/// Brute-force Euclidean k-NN; the linear scan cost at predict time is part
/// of what the latency comparison measures, so there is deliberately no
/// index structure.
struct KnnModel {
  std::size_t k = 5;
  std::size_t n_cols = 0;
  std::vector<float> matrix;  // row-major training features
  std::vector<std::uint8_t> binary_labels;
  std::vector<std::uint8_t> class_labels;

  std::size_t n_rows() const { return n_cols == 0 ? 0 : matrix.size() / n_cols; }
};

KnnModel knn_fit(const data::FeatureFrame& frame, std::size_t k = 5);

struct KnnResult {
  std::vector<std::uint8_t> labels;
  double seconds = 0.0;
};

/// Majority vote among the k nearest (distance ties prefer the earlier
/// training row, vote ties the smallest class id). Queries may be scanned in
/// parallel; results are identical for any thread count.
KnnResult knn_predict(const KnnModel& m, const data::FeatureFrame& queries, model::Task task,
                      std::size_t threads = 0);

}  // namespace eids::baselines
