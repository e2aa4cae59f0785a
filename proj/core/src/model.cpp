#include "eids/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eids/serial.hpp"

namespace eids::model {

namespace {

using json = nlohmann::json;

constexpr std::uint16_t kCheckpointVersion = 1;

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

nn::Tensor gather_rows(const data::FeatureFrame& frame, const std::vector<std::size_t>& idx,
                       std::size_t begin, std::size_t end) {
  const std::size_t n = end - begin, d = frame.n_cols;
  nn::Tensor x({n, d});
  for (std::size_t i = 0; i < n; ++i) {
    const float* src = frame.row(idx[begin + i]);
    std::copy(src, src + d, x.data.data() + i * d);
  }
  return x;
}

std::vector<int> gather_targets(const data::FeatureFrame& frame,
                                const std::vector<std::size_t>& idx, std::size_t begin,
                                std::size_t end, Task task) {
  std::vector<int> y(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    y[i - begin] = task == Task::binary ? frame.binary_labels[idx[i]]
                                        : frame.class_labels[idx[i]];
  }
  return y;
}

std::size_t correct_count(const nn::Tensor& probs, const std::vector<int>& targets) {
  std::size_t correct = 0;
  const std::size_t n = probs.dim(0), c = probs.dim(1);
  for (std::size_t i = 0; i < n; ++i) {
    int pred;
    if (c == 1) {
      pred = probs(i, 0) >= 0.5f ? 1 : 0;
    } else {
      std::size_t best = 0;
      for (std::size_t j = 1; j < c; ++j)
        if (probs(i, j) > probs(i, best)) best = j;
      pred = static_cast<int>(best);
    }
    correct += pred == targets[i] ? 1 : 0;
  }
  return correct;
}

}  // namespace

std::string task_name(Task t) { return t == Task::binary ? "binary" : "multi"; }

Task task_from(const std::string& name) {
  if (name == "binary") return Task::binary;
  if (name == "multi") return Task::multi;
  throw config_error("unknown task '" + name + "' (want binary or multi)");
}

void ArchitectureSpec::validate() const {
  if (input_width == 0 || conv_filters == 0 || conv_kernel == 0 || lstm_hidden == 0 ||
      dense_units == 0)
    throw contract_error("architecture dimensions must be positive");
  if (conv_kernel % 2 == 0) throw contract_error("conv kernel width must be odd");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0)
    throw contract_error("dropout rate must be in [0, 1)");
  if (pool_width != 2) throw contract_error("pool width is fixed at 2");
  if (axis == Axis::sequence && input_width < 4)
    throw contract_error("sequence axis mode needs input width >= 4");
}

TrainConfig TrainConfig::defaults(Task t) {
  TrainConfig cfg;
  cfg.task = t;
  if (t == Task::binary) {
    cfg.lr = 1e-3;
    cfg.epochs = 15;
    cfg.batch_size = 256;
    cfg.use_class_weights = false;
  } else {
    cfg.lr = 1e-2;
    cfg.epochs = 30;
    cfg.batch_size = 128;
    cfg.use_class_weights = true;
  }
  return cfg;
}

void TrainConfig::validate() const {
  if (lr <= 0.0) throw config_error("learning rate must be positive");
  if (batch_size == 0) throw config_error("batch size must be positive");
  if (validation_fraction < 0.0 || validation_fraction >= 1.0)
    throw config_error("validation fraction must be in [0, 1)");
}

std::string TrainTrace::to_csv() const {
  std::ostringstream out;
  const bool with_val = !epochs.empty() && epochs.front().has_validation;
  out << "epoch,loss,accuracy";
  if (with_val) out << ",val_loss,val_accuracy";
  out << ",seconds\n";
  char buf[160];
  for (const EpochStats& e : epochs) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g", e.epoch, e.loss, e.accuracy);
    out << buf;
    if (with_val) {
      std::snprintf(buf, sizeof(buf), ",%.17g,%.17g", e.val_loss, e.val_accuracy);
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), ",%.3f\n", e.seconds);
    out << buf;
  }
  return out.str();
}

IdsModel build_model(const ArchitectureSpec& spec, std::uint64_t seed) {
  IdsModel m;
  m.spec = spec;
  m.net = build_network<float>(spec, seed);
  m.meta.seed = seed;
  return m;
}

TrainTrace train(IdsModel& model, const data::FeatureFrame& frame, const TrainConfig& cfg) {
  cfg.validate();
  if (cfg.task != model.spec.head)
    throw contract_error("train task does not match the model head");
  if (frame.n_rows == 0) throw contract_error("training frame is empty");
  if (frame.n_cols != model.spec.input_width)
    throw contract_error("frame width " + std::to_string(frame.n_cols) +
                         " does not match model input width " +
                         std::to_string(model.spec.input_width));

  const std::size_t n_classes = cfg.task == Task::binary ? 2 : data::kClassCount;
  std::vector<double> weights(n_classes, 1.0);
  if (cfg.use_class_weights) {
    weights = cfg.task == Task::binary ? data::binary_class_weights(frame)
                                       : data::class_weights(frame);
  }

  // deterministic split/shuffle/dropout substreams off the one seed
  std::vector<std::size_t> order(frame.n_rows);
  std::iota(order.begin(), order.end(), 0);
  RngStream split_rng(cfg.seed, "train/valsplit");
  std::vector<std::size_t> val_idx;
  if (cfg.validation_fraction > 0.0) {
    deterministic_shuffle(order, split_rng);
    const auto n_val = static_cast<std::size_t>(
        std::floor(cfg.validation_fraction * static_cast<double>(frame.n_rows)));
    val_idx.assign(order.end() - static_cast<std::ptrdiff_t>(n_val), order.end());
    order.resize(frame.n_rows - n_val);
  }
  if (order.empty()) throw contract_error("validation fraction leaves no training rows");

  RngStream shuffle_rng(cfg.seed, "train/shuffle");
  RngStream dropout_rng(cfg.seed, "train/dropout");
  nn::AdamState<float> adam;
  adam.cfg.lr = cfg.lr;
  auto params = model.net.parameters();
  adam.init(params);

  TrainTrace trace;
  const double t_start = now_seconds();
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double e_start = now_seconds();
    deterministic_shuffle(order, shuffle_rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(begin + cfg.batch_size, order.size());
      nn::Tensor xb = gather_rows(frame, order, begin, end);
      std::vector<int> yb = gather_targets(frame, order, begin, end, cfg.task);
      nn::Tensor probs = model.net.forward(xb, /*training=*/true, &dropout_rng);
      auto loss = nn::weighted_cross_entropy(probs, yb, weights);
      model.net.zero_grads();
      model.net.backward(loss.grad);
      adam.apply(params);
      loss_sum += loss.loss * static_cast<double>(end - begin);
      correct += correct_count(probs, yb);
    }

    EpochStats stats;
    stats.epoch = epoch + 1;
    stats.loss = loss_sum / static_cast<double>(order.size());
    stats.accuracy = static_cast<double>(correct) / static_cast<double>(order.size());
    if (!val_idx.empty()) {
      stats.has_validation = true;
      nn::Tensor xv = gather_rows(frame, val_idx, 0, val_idx.size());
      std::vector<int> yv = gather_targets(frame, val_idx, 0, val_idx.size(), cfg.task);
      nn::Tensor pv = model.net.forward(xv, /*training=*/false, nullptr);
      stats.val_loss = nn::weighted_cross_entropy(pv, yv, weights).loss;
      stats.val_accuracy =
          static_cast<double>(correct_count(pv, yv)) / static_cast<double>(val_idx.size());
    }
    stats.seconds = now_seconds() - e_start;
    trace.epochs.push_back(stats);
    model.meta.final_loss = stats.loss;
  }
  trace.total_seconds = now_seconds() - t_start;
  model.meta.epochs_run += cfg.epochs;
  return trace;
}

Prediction predict(IdsModel& model, const data::FeatureFrame& frame, std::size_t batch_size) {
  if (frame.n_cols != model.spec.input_width)
    throw contract_error("frame width " + std::to_string(frame.n_cols) +
                         " does not match model input width " +
                         std::to_string(model.spec.input_width));
  if (batch_size == 0) throw contract_error("batch size must be positive");
  if (frame.n_rows == 0) throw contract_error("cannot predict on an empty frame");

  Prediction out;
  out.probs = nn::Tensor({frame.n_rows, model.spec.head_width()});

  std::vector<std::size_t> idx(frame.n_rows);
  std::iota(idx.begin(), idx.end(), 0);
  const double t0 = now_seconds();
  for (std::size_t begin = 0; begin < frame.n_rows; begin += batch_size) {
    const std::size_t end = std::min(begin + batch_size, frame.n_rows);
    nn::Tensor xb = gather_rows(frame, idx, begin, end);
    nn::Tensor pb = model.net.forward(xb, /*training=*/false, nullptr);
    std::copy(pb.data.begin(), pb.data.end(),
              out.probs.data.begin() + begin * model.spec.head_width());
  }
  out.seconds = now_seconds() - t0;
  return out;
}

std::vector<std::uint8_t> predicted_labels(const nn::Tensor& probs, Task task) {
  const std::size_t n = probs.dim(0), c = probs.dim(1);
  std::vector<std::uint8_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (task == Task::binary) {
      labels[i] = probs(i, 0) >= 0.5f ? 1 : 0;
    } else {
      std::size_t best = 0;
      for (std::size_t j = 1; j < c; ++j)
        if (probs(i, j) > probs(i, best)) best = j;
      labels[i] = static_cast<std::uint8_t>(best);
    }
  }
  return labels;
}

// ---- architecture serialization --------------------------------------------------

std::string architecture_json(const ArchitectureSpec& spec) {
  json j;
  j["input_width"] = spec.input_width;
  j["conv_filters"] = spec.conv_filters;
  j["conv_kernel"] = spec.conv_kernel;
  j["pool_width"] = spec.pool_width;
  j["lstm_hidden"] = spec.lstm_hidden;
  j["dense_units"] = spec.dense_units;
  j["dropout_rate"] = spec.dropout_rate;
  j["head"] = task_name(spec.head);
  j["axis"] = spec.axis == Axis::sequence ? "sequence" : "flat";
  return j.dump();
}

ArchitectureSpec architecture_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) throw io_error("invalid architecture description");
  ArchitectureSpec spec;
  spec.input_width = j.at("input_width").get<std::size_t>();
  spec.conv_filters = j.at("conv_filters").get<std::size_t>();
  spec.conv_kernel = j.at("conv_kernel").get<std::size_t>();
  spec.pool_width = j.at("pool_width").get<std::size_t>();
  spec.lstm_hidden = j.at("lstm_hidden").get<std::size_t>();
  spec.dense_units = j.at("dense_units").get<std::size_t>();
  spec.dropout_rate = j.at("dropout_rate").get<double>();
  spec.head = task_from(j.at("head").get<std::string>());
  const std::string axis = j.at("axis").get<std::string>();
  if (axis == "sequence") {
    spec.axis = Axis::sequence;
  } else if (axis == "flat") {
    spec.axis = Axis::flat;
  } else {
    throw io_error("unknown axis mode '" + axis + "'");
  }
  spec.validate();
  return spec;
}

// ---- checkpoints --------------------------------------------------------------------

void save_checkpoint(IdsModel& model, const std::string& path) {
  auto params = model.net.parameters();

  json header;
  header["architecture"] = json::parse(architecture_json(model.spec));
  header["mask"] = json::parse(model.mask.to_json_string());
  header["encoder_digest"] = model.encoder_digest;
  header["metadata"] = {{"seed", model.meta.seed},
                        {"epochs_run", model.meta.epochs_run},
                        {"final_loss", model.meta.final_loss}};
  json tensors = json::array();
  std::uint64_t offset = 0;
  for (const nn::Param<float>* p : params) {
    tensors.push_back(json{{"name", p->name},
                           {"shape", p->value.shape},
                           {"offset", offset},
                           {"count", p->value.size()}});
    offset += p->value.size();
  }
  header["tensors"] = tensors;

  ByteWriter w;
  w.bytes("EIDM", 4);
  w.u16(kCheckpointVersion);
  w.str(header.dump());
  for (const nn::Param<float>* p : params)
    for (float v : p->value.data) w.f32(v);
  w.finish_crc();
  w.write_file(path);
}

IdsModel load_checkpoint(const std::string& path) {
  ByteReader r = ByteReader::from_file(path);
  if (r.size() < 4) throw io_error("not a checkpoint (file too short): " + path);
  char magic[4] = {};
  r.bytes(magic, 4);
  if (std::string_view(magic, 4) != "EIDM")
    throw io_error("not a checkpoint (bad magic): " + path);
  r.check_crc_trailer("checkpoint");
  const std::uint16_t version = r.u16();
  if (version != kCheckpointVersion)
    throw io_error("unsupported checkpoint version " + std::to_string(version));

  json header = json::parse(r.str(), nullptr, /*allow_exceptions=*/false);
  if (header.is_discarded()) throw io_error("checkpoint header is not valid JSON");

  IdsModel model;
  model.spec = architecture_from_json(header.at("architecture").dump());
  model.mask = chi2::SelectionMask::from_json_string(header.at("mask").dump());
  model.encoder_digest = header.at("encoder_digest").get<std::uint32_t>();
  model.meta.seed = header.at("metadata").at("seed").get<std::uint64_t>();
  model.meta.epochs_run = header.at("metadata").at("epochs_run").get<std::size_t>();
  model.meta.final_loss = header.at("metadata").at("final_loss").get<double>();
  model.net = build_network<float>(model.spec, /*seed=*/0);

  auto params = model.net.parameters();
  const json& tensors = header.at("tensors");
  if (tensors.size() != params.size())
    throw io_error("checkpoint tensor table does not match the architecture");
  std::size_t i = 0;
  for (nn::Param<float>* p : params) {
    const json& t = tensors.at(i);
    if (t.at("name").get<std::string>() != p->name)
      throw io_error("checkpoint tensor order mismatch: got '" +
                     t.at("name").get<std::string>() + "', want '" + p->name + "'");
    const auto shape = t.at("shape").get<std::vector<std::size_t>>();
    if (shape != p->value.shape)
      throw io_error("checkpoint tensor '" + p->name + "' has mismatched shape");
    if (t.at("count").get<std::size_t>() != p->value.size())
      throw io_error("checkpoint tensor '" + p->name + "' has mismatched size");
    for (float& v : p->value.data) v = r.f32();
    ++i;
  }
  return model;
}

}  // namespace eids::model
