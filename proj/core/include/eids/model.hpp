#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "eids/chi2.hpp"
#include "eids/dataset.hpp"
#include "eids/nn/adam.hpp"
#include "eids/nn/layers.hpp"
#include "eids/nn/loss.hpp"

namespace eids::model {

enum class Task { binary, multi };

std::string task_name(Task t);
Task task_from(const std::string& name);

enum class Axis { sequence, flat };

/// CNN-BiLSTM stack dimensions. The sequence axis mode treats the selected
/// features as a length-`input_width` single-channel sequence; flat mode
/// keeps the literal (1 x width) layout with a width-1 kernel and no pooling,
/// for comparison runs.
struct ArchitectureSpec {
  std::size_t input_width = 20;
  std::size_t conv_filters = 32;
  std::size_t conv_kernel = 3;
  std::size_t pool_width = 2;
  std::size_t lstm_hidden = 32;  // per direction
  std::size_t dense_units = 64;
  double dropout_rate = 0.3;
  Task head = Task::binary;
  Axis axis = Axis::sequence;

  void validate() const;
  std::size_t head_width() const { return head == Task::binary ? 1 : data::kClassCount; }
};

struct TrainConfig {
  Task task = Task::binary;
  double lr = 1e-3;
  std::size_t epochs = 15;
  std::size_t batch_size = 256;
  std::uint64_t seed = 42;
  bool use_class_weights = false;
  double validation_fraction = 0.0;

  static TrainConfig defaults(Task t);
  void validate() const;
};

struct TrainMeta {
  std::uint64_t seed = 0;
  std::size_t epochs_run = 0;
  double final_loss = 0.0;
};

struct EpochStats {
  std::size_t epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  bool has_validation = false;
  double seconds = 0.0;
};

struct TrainTrace {
  std::vector<EpochStats> epochs;
  double total_seconds = 0.0;

  std::string to_csv() const;
};

// ---- network construction ------------------------------------------------------

template <typename T>
void glorot_fill(nn::TensorT<T>& t, std::size_t fan_in, std::size_t fan_out, RngStream& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (T& v : t.data) v = static_cast<T>(rng.uniform(-limit, limit));
}

/// Layer stack: reshape -> conv1d + relu -> maxpool -> BiLSTM -> final
/// position -> dense + relu -> dropout -> head (sigmoid or softmax).
/// Weights are Glorot-uniform from the seeded stream; forget-gate biases
/// start at 1, everything else at 0. The draw order is fixed, so float and
/// double instantiations see the same underlying values.
template <typename T>
nn::Network<T> build_network(const ArchitectureSpec& spec, std::uint64_t seed) {
  spec.validate();
  RngStream rng(seed, "model/init");
  nn::Network<T> net;

  const bool seq = spec.axis == Axis::sequence;
  const std::size_t conv_in = seq ? 1 : spec.input_width;
  const std::size_t kernel = seq ? spec.conv_kernel : 1;

  net.add(std::make_unique<nn::SequenceReshape<T>>(seq));

  auto conv = std::make_unique<nn::Conv1dLayer<T>>("conv", kernel, conv_in, spec.conv_filters);
  glorot_fill(conv->kernels_.value, kernel * conv_in, spec.conv_filters, rng);
  net.add(std::move(conv));
  net.add(std::make_unique<nn::ReluLayer<T>>());
  if (seq) net.add(std::make_unique<nn::MaxPool1dLayer<T>>());

  auto bilstm =
      std::make_unique<nn::BiLstmLayer<T>>("bilstm", spec.conv_filters, spec.lstm_hidden);
  for (nn::Param<T>* p : bilstm->params()) {
    const std::size_t h4 = 4 * spec.lstm_hidden;
    if (p->name.ends_with(".w")) {
      glorot_fill(p->value, spec.conv_filters, h4, rng);
    } else if (p->name.ends_with(".u")) {
      glorot_fill(p->value, spec.lstm_hidden, h4, rng);
    } else {
      // biases zero except the forget-gate block
      for (std::size_t j = spec.lstm_hidden; j < 2 * spec.lstm_hidden; ++j)
        p->value.data[j] = T(1);
    }
  }
  net.add(std::move(bilstm));
  net.add(std::make_unique<nn::LastStep<T>>());

  auto dense =
      std::make_unique<nn::DenseLayer<T>>("dense", 2 * spec.lstm_hidden, spec.dense_units);
  glorot_fill(dense->w_.value, 2 * spec.lstm_hidden, spec.dense_units, rng);
  net.add(std::move(dense));
  net.add(std::make_unique<nn::ReluLayer<T>>());
  net.add(std::make_unique<nn::DropoutLayer<T>>(spec.dropout_rate));

  auto head = std::make_unique<nn::DenseLayer<T>>("head", spec.dense_units, spec.head_width());
  glorot_fill(head->w_.value, spec.dense_units, spec.head_width(), rng);
  net.add(std::move(head));
  if (spec.head == Task::binary) {
    net.add(std::make_unique<nn::SigmoidLayer<T>>());
  } else {
    net.add(std::make_unique<nn::SoftmaxLayer<T>>());
  }
  return net;
}

// ---- model ------------------------------------------------------------------------

struct IdsModel {
  ArchitectureSpec spec;
  nn::Network<float> net;
  chi2::SelectionMask mask;          // provenance: which columns fed the model
  std::uint32_t encoder_digest = 0;  // provenance: which encoder produced them
  TrainMeta meta;
};

IdsModel build_model(const ArchitectureSpec& spec, std::uint64_t seed);

/// Mini-batch Adam training with per-epoch seeded shuffling; identical
/// (config, frame) pairs give bitwise-identical parameters.
TrainTrace train(IdsModel& model, const data::FeatureFrame& frame, const TrainConfig& cfg);

struct Prediction {
  nn::Tensor probs;      // (n x 1) sigmoid or (n x 10) softmax rows
  double seconds = 0.0;  // wall time of the forward passes only
};

/// Pure inference over the frame in fixed-size batches (dropout disabled).
Prediction predict(IdsModel& model, const data::FeatureFrame& frame,
                   std::size_t batch_size = 1024);

/// 0.5 threshold for the sigmoid head, argmax for softmax.
std::vector<std::uint8_t> predicted_labels(const nn::Tensor& probs, Task task);

// ---- checkpoints ---------------------------------------------------------------------

/// Checkpoint file: magic "EIDM", version u16, length-prefixed UTF-8 JSON
/// header (architecture, mask, metadata, tensor offsets), raw little-endian
/// f32 tensor payloads in header order, trailing CRC-32. Round trips are
/// bit exact.
void save_checkpoint(IdsModel& model, const std::string& path);
IdsModel load_checkpoint(const std::string& path);

std::string architecture_json(const ArchitectureSpec& spec);
ArchitectureSpec architecture_from_json(const std::string& text);

}  // namespace eids::model
