// eids: chi-square feature selection feeding a compact CNN-BiLSTM intrusion
// detector for the UNSW-NB15 split CSVs, with classical baselines and latency
// measurement. Subcommands: ingest | select | train | eval | predict | bench.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "eids/baselines.hpp"
#include "eids/chi2.hpp"
#include "eids/dataset.hpp"
#include "eids/metrics.hpp"
#include "eids/model.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace eids;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 2;
constexpr int kExitContract = 3;
constexpr int kExitConfig = 4;

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("cannot create output directory: " + dir);
}

std::string dataset_default(const char* filename) {
  const char* dir = std::getenv("EIDS_DATA_DIR");
  if (!dir || !*dir) return "";
  return join_path(dir, filename);
}

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << body;
  if (!out) throw io_error("write failed: " + path);
}

double train_time_from_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) return 0.0;
  std::string line;
  if (!std::getline(in, line)) return 0.0;
  std::istringstream header(line);
  std::string col;
  int seconds_col = -1, idx = 0;
  while (std::getline(header, col, ',')) {
    if (col == "seconds") seconds_col = idx;
    ++idx;
  }
  if (seconds_col < 0) return 0.0;
  double total = 0.0;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string cell;
    for (int c = 0; std::getline(row, cell, ','); ++c) {
      if (c == seconds_col) total += std::atof(cell.c_str());
    }
  }
  return total;
}

// ---- ingest -------------------------------------------------------------------

struct IngestOptions {
  std::string train_csv, test_csv, out_dir;
};

int run_ingest(const IngestOptions& opt) {
  if (opt.train_csv.empty() || opt.test_csv.empty())
    throw config_error("--train/--test not given and EIDS_DATA_DIR is not set");
  ensure_out_dir(opt.out_dir);

  auto train = data::load_csv(opt.train_csv, data::Split::train);
  auto test = data::load_csv(opt.test_csv, data::Split::test);
  for (const auto& w : train.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& w : test.warnings) std::cerr << "warning: " << w << "\n";

  auto encoder = data::fit_encoder(train.records);
  auto train_frame = data::transform(train.records, encoder, data::Split::train);
  auto test_frame = data::transform(test.records, encoder, data::Split::test);

  data::save_frame(train_frame, join_path(opt.out_dir, "train.eids"));
  data::save_frame(test_frame, join_path(opt.out_dir, "test.eids"));
  encoder.save(join_path(opt.out_dir, "encoder.json"));

  std::cout << "train: " << train_frame.n_rows << " rows, " << train_frame.n_cols
            << " features -> " << join_path(opt.out_dir, "train.eids") << "\n";
  std::cout << "test:  " << test_frame.n_rows << " rows, " << test_frame.n_cols
            << " features -> " << join_path(opt.out_dir, "test.eids") << "\n";

  std::array<std::size_t, data::kClassCount> train_hist{}, test_hist{};
  for (auto c : train_frame.class_labels) ++train_hist[c];
  for (auto c : test_frame.class_labels) ++test_hist[c];
  std::cout << "class histogram (train / test):\n";
  for (std::size_t c = 0; c < data::kClassCount; ++c) {
    std::cout << "  " << c << " " << data::class_name(c) << ": " << train_hist[c] << " / "
              << test_hist[c] << "\n";
  }
  return kExitOk;
}

// ---- select -------------------------------------------------------------------

struct SelectOptions {
  std::string out_dir;
  std::size_t k = 20;
  std::string label_view = "multi";
  bool numeric_only = false;
};

int run_select(const SelectOptions& opt) {
  auto frame = data::load_frame(join_path(opt.out_dir, "train.eids"));
  const auto view =
      opt.label_view == "binary" ? chi2::LabelView::binary : chi2::LabelView::multiclass;

  auto scores = chi2::chi2_scores(frame, view);
  if (opt.numeric_only) scores = chi2::drop_categorical(scores);
  if (opt.k > scores.size())
    throw config_error("k = " + std::to_string(opt.k) + " exceeds the " +
                       std::to_string(scores.size()) + " scored features");

  auto mask = chi2::select_top_k(scores, opt.k);
  write_text_file(join_path(opt.out_dir, "scores.csv"), chi2::score_report(scores));
  mask.save(join_path(opt.out_dir, "mask.json"));

  std::cout << "scored " << scores.size() << " features (" << opt.label_view << " labels"
            << (opt.numeric_only ? ", numeric only" : "") << ")\n";
  std::cout << "selected " << mask.k() << ": ";
  for (std::size_t i = 0; i < mask.names.size(); ++i)
    std::cout << (i ? "," : "") << mask.names[i];
  std::cout << "\n";
  return kExitOk;
}

// ---- train ---------------------------------------------------------------------

struct TrainOptions {
  std::string out_dir;
  std::string task;
  std::uint64_t seed = 42;
  // training overrides (sentinel = task default)
  double lr = 0.0;
  long epochs = -1;
  long batch = -1;
  std::string class_weights;  // "", "on", "off"
  double val_fraction = 0.0;
  // architecture overrides
  std::size_t conv_filters = 32;
  std::size_t conv_kernel = 3;
  std::size_t lstm_hidden = 32;
  std::size_t dense_units = 64;
  double dropout = 0.3;
  std::string axis = "sequence";
};

json train_config_echo(const TrainOptions& opt, const model::TrainConfig& cfg,
                       const model::ArchitectureSpec& spec, const chi2::SelectionMask& mask) {
  json j;
  j["command"] = "train";
  j["out"] = opt.out_dir;
  j["task"] = model::task_name(cfg.task);
  j["seed"] = cfg.seed;
  j["lr"] = cfg.lr;
  j["epochs"] = cfg.epochs;
  j["batch_size"] = cfg.batch_size;
  j["use_class_weights"] = cfg.use_class_weights;
  j["validation_fraction"] = cfg.validation_fraction;
  j["architecture"] = json::parse(model::architecture_json(spec));
  j["mask"] = json::parse(mask.to_json_string());
  return j;
}

int run_train(const TrainOptions& opt) {
  const model::Task task = model::task_from(opt.task);
  auto frame = data::load_frame(join_path(opt.out_dir, "train.eids"));
  auto mask = chi2::SelectionMask::load(join_path(opt.out_dir, "mask.json"));
  auto encoder = data::EncoderState::load(join_path(opt.out_dir, "encoder.json"));
  auto selected = chi2::apply_mask(frame, mask);

  model::ArchitectureSpec spec;
  spec.input_width = mask.k();
  spec.conv_filters = opt.conv_filters;
  spec.conv_kernel = opt.conv_kernel;
  spec.lstm_hidden = opt.lstm_hidden;
  spec.dense_units = opt.dense_units;
  spec.dropout_rate = opt.dropout;
  spec.head = task;
  if (opt.axis == "sequence") {
    spec.axis = model::Axis::sequence;
  } else {
    spec.axis = model::Axis::flat;
  }

  model::TrainConfig cfg = model::TrainConfig::defaults(task);
  cfg.seed = opt.seed;
  if (opt.lr > 0.0) cfg.lr = opt.lr;
  if (opt.epochs >= 0) cfg.epochs = static_cast<std::size_t>(opt.epochs);
  if (opt.batch > 0) cfg.batch_size = static_cast<std::size_t>(opt.batch);
  if (opt.class_weights == "on") cfg.use_class_weights = true;
  if (opt.class_weights == "off") cfg.use_class_weights = false;
  cfg.validation_fraction = opt.val_fraction;

  if (cfg.use_class_weights) {
    const auto weights = task == model::Task::multi ? data::class_weights(selected)
                                                    : data::binary_class_weights(selected);
    for (std::size_t c = 0; c < weights.size(); ++c) {
      if (weights[c] == 0.0)
        std::cerr << "warning: class " << data::class_name(c)
                  << " is absent from the training split; weight 0\n";
    }
  }

  auto m = model::build_model(spec, opt.seed);
  m.mask = mask;
  m.encoder_digest = encoder.digest();
  std::cout << "model: " << m.net.param_count() << " parameters, input width " << mask.k()
            << ", task " << model::task_name(task) << "\n";

  auto trace = model::train(m, selected, cfg);
  for (const auto& e : trace.epochs) {
    std::cout << "epoch " << e.epoch << "/" << cfg.epochs << " loss " << e.loss << " acc "
              << e.accuracy;
    if (e.has_validation)
      std::cout << " val_loss " << e.val_loss << " val_acc " << e.val_accuracy;
    std::cout << " (" << metrics::round_ms(e.seconds) << "s)\n";
  }

  model::save_checkpoint(m, join_path(opt.out_dir, "model.eidm"));
  write_text_file(join_path(opt.out_dir, "trace.csv"), trace.to_csv());
  write_text_file(join_path(opt.out_dir, "train_config.json"),
                  train_config_echo(opt, cfg, spec, mask).dump(2) + "\n");
  std::cout << "trained in " << metrics::round_ms(trace.total_seconds) << "s -> "
            << join_path(opt.out_dir, "model.eidm") << "\n";
  return kExitOk;
}

// ---- eval ----------------------------------------------------------------------

struct EvalOptions {
  std::string out_dir;
  std::string checkpoint;
  std::string baseline;  // "", "logistic", "knn"
  std::string task;      // required for baselines; cross-checked for checkpoints
  double holdout = 0.0;
  std::uint64_t seed = 42;
  bool use_mask = true;
  std::size_t knn_k = 5;
  double logistic_lr = 0.01;
  std::size_t logistic_epochs = 50;
  std::size_t logistic_batch = 512;
  std::size_t threads = 0;
  std::string formats = "json,csv,text";
  std::string trace;
};

data::FeatureFrame holdout_fraction(const data::FeatureFrame& frame, double fraction,
                                    std::uint64_t seed) {
  if (fraction <= 0.0) return frame;
  if (fraction >= 1.0) throw config_error("--holdout must be in (0, 1)");
  std::vector<std::size_t> order(frame.n_rows);
  std::iota(order.begin(), order.end(), 0);
  RngStream rng(seed, "eval/holdout");
  deterministic_shuffle(order, rng);
  const auto keep = static_cast<std::size_t>(fraction * static_cast<double>(frame.n_rows));
  if (keep == 0) throw config_error("--holdout keeps no rows");
  order.resize(keep);
  std::sort(order.begin(), order.end());

  data::FeatureFrame out;
  out.feature_names = frame.feature_names;
  out.n_rows = keep;
  out.n_cols = frame.n_cols;
  out.matrix.resize(keep * frame.n_cols);
  out.split_tag = frame.split_tag;
  for (std::size_t i = 0; i < keep; ++i) {
    const float* src = frame.row(order[i]);
    std::copy(src, src + frame.n_cols, out.matrix.data() + i * frame.n_cols);
    out.binary_labels.push_back(frame.binary_labels[order[i]]);
    out.class_labels.push_back(frame.class_labels[order[i]]);
  }
  return out;
}

void emit_all(const metrics::EvalReport& report, const std::string& out_dir,
              const std::string& formats) {
  std::stringstream ss(formats);
  std::string fmt;
  while (std::getline(ss, fmt, ',')) {
    if (fmt == "json") {
      metrics::emit_report(report, metrics::ReportFormat::json,
                           join_path(out_dir, "report.json"));
    } else if (fmt == "csv") {
      metrics::emit_report(report, metrics::ReportFormat::csv,
                           join_path(out_dir, "confusion.csv"));
    } else if (fmt == "text") {
      metrics::emit_report(report, metrics::ReportFormat::text,
                           join_path(out_dir, "report.txt"));
    } else {
      throw config_error("unknown report format '" + fmt + "'");
    }
  }
  std::cout << metrics::report_text(report) << "\n";
}

json eval_config_echo(const EvalOptions& opt, const std::string& model_name,
                      const std::string& task) {
  json j;
  j["command"] = "eval";
  j["out"] = opt.out_dir;
  j["model"] = model_name;
  j["task"] = task;
  j["holdout"] = opt.holdout;
  j["seed"] = opt.seed;
  j["use_mask"] = opt.use_mask;
  if (model_name == "knn") {
    j["knn_k"] = opt.knn_k;
  } else if (model_name == "logistic") {
    j["logistic"] = {{"lr", opt.logistic_lr},
                     {"epochs", opt.logistic_epochs},
                     {"batch_size", opt.logistic_batch}};
  }
  return j;
}

std::vector<std::string> class_name_list(model::Task task) {
  if (task == model::Task::binary) return {"Normal", "Attack"};
  std::vector<std::string> names;
  for (std::size_t c = 0; c < data::kClassCount; ++c)
    names.push_back(std::string(data::class_name(c)));
  return names;
}

int run_eval_checkpoint(const EvalOptions& opt) {
  const std::string ckpt_path =
      opt.checkpoint.empty() ? join_path(opt.out_dir, "model.eidm") : opt.checkpoint;
  auto m = model::load_checkpoint(ckpt_path);
  if (!opt.task.empty() && model::task_from(opt.task) != m.spec.head)
    throw contract_error("checkpoint head is " + model::task_name(m.spec.head) +
                         " but --task asked for " + opt.task);
  const model::Task task = m.spec.head;

  auto test = data::load_frame(join_path(opt.out_dir, "test.eids"));
  auto frame = holdout_fraction(chi2::apply_mask(test, m.mask), opt.holdout, opt.seed);

  auto pred = model::predict(m, frame);
  auto predicted = model::predicted_labels(pred.probs, task);
  const auto& actual = task == model::Task::binary ? frame.binary_labels : frame.class_labels;

  const std::string trace_path =
      opt.trace.empty() ? join_path(opt.out_dir, "trace.csv") : opt.trace;
  json echo = eval_config_echo(opt, "cnn-bilstm", model::task_name(task));
  echo["checkpoint"] = ckpt_path;
  echo["architecture"] = json::parse(model::architecture_json(m.spec));
  echo["mask"] = json::parse(m.mask.to_json_string());
  echo["training"] = {{"seed", m.meta.seed},
                      {"epochs_run", m.meta.epochs_run},
                      {"final_loss", m.meta.final_loss},
                      {"encoder_digest", m.encoder_digest}};

  auto report = metrics::evaluate(model::task_name(task), "cnn-bilstm", actual, predicted,
                                  task == model::Task::binary ? 2 : data::kClassCount,
                                  class_name_list(task), train_time_from_trace(trace_path),
                                  pred.seconds, echo.dump());
  emit_all(report, opt.out_dir, opt.formats);
  return kExitOk;
}

int run_eval_baseline(const EvalOptions& opt) {
  if (opt.task.empty()) throw config_error("--baseline needs --task binary|multi");
  const model::Task task = model::task_from(opt.task);

  auto train = data::load_frame(join_path(opt.out_dir, "train.eids"));
  auto test = data::load_frame(join_path(opt.out_dir, "test.eids"));
  if (opt.use_mask) {
    auto mask = chi2::SelectionMask::load(join_path(opt.out_dir, "mask.json"));
    train = chi2::apply_mask(train, mask);
    test = chi2::apply_mask(test, mask);
  }
  test = holdout_fraction(test, opt.holdout, opt.seed);

  const auto& actual = task == model::Task::binary ? test.binary_labels : test.class_labels;

  std::vector<std::uint8_t> predicted;
  double train_s = 0.0, predict_s = 0.0;
  if (opt.baseline == "logistic") {
    baselines::LogisticConfig cfg;
    cfg.lr = opt.logistic_lr;
    cfg.epochs = opt.logistic_epochs;
    cfg.batch_size = opt.logistic_batch;
    cfg.seed = opt.seed;
    baselines::LogisticModel lm;
    train_s = metrics::time_call([&] { lm = baselines::logistic_train(train, task, cfg); });
    auto pred = baselines::logistic_predict(lm, test);
    predicted = model::predicted_labels(pred.probs, task);
    predict_s = pred.seconds;
  } else {
    baselines::KnnModel km;
    train_s = metrics::time_call([&] { km = baselines::knn_fit(train, opt.knn_k); });
    auto result = baselines::knn_predict(km, test, task, opt.threads);
    predicted = result.labels;
    predict_s = result.seconds;
  }

  auto report = metrics::evaluate(model::task_name(task), opt.baseline, actual, predicted,
                                  task == model::Task::binary ? 2 : data::kClassCount,
                                  class_name_list(task), train_s, predict_s,
                                  eval_config_echo(opt, opt.baseline, opt.task).dump());
  emit_all(report, opt.out_dir, opt.formats);
  return kExitOk;
}

int run_eval(const EvalOptions& opt) {
  if (!opt.baseline.empty()) return run_eval_baseline(opt);
  return run_eval_checkpoint(opt);
}

// ---- predict --------------------------------------------------------------------

struct PredictOptions {
  std::string out_dir;
  std::string checkpoint;
  std::string frame_path;
  std::size_t batch = 1024;
};

int run_predict(const PredictOptions& opt) {
  const std::string ckpt_path =
      opt.checkpoint.empty() ? join_path(opt.out_dir, "model.eidm") : opt.checkpoint;
  auto m = model::load_checkpoint(ckpt_path);
  const std::string frame_path =
      opt.frame_path.empty() ? join_path(opt.out_dir, "test.eids") : opt.frame_path;
  auto frame = chi2::apply_mask(data::load_frame(frame_path), m.mask);

  auto pred = model::predict(m, frame, opt.batch);
  auto labels = model::predicted_labels(pred.probs, m.spec.head);

  std::ostringstream csv;
  csv << "row";
  if (m.spec.head == model::Task::binary) {
    csv << ",p_attack,label\n";
    for (std::size_t r = 0; r < frame.n_rows; ++r)
      csv << r << "," << pred.probs(r, 0) << "," << static_cast<int>(labels[r]) << "\n";
  } else {
    for (std::size_t c = 0; c < data::kClassCount; ++c) csv << ",p_" << data::class_name(c);
    csv << ",label\n";
    for (std::size_t r = 0; r < frame.n_rows; ++r) {
      csv << r;
      for (std::size_t c = 0; c < data::kClassCount; ++c) csv << "," << pred.probs(r, c);
      csv << "," << static_cast<int>(labels[r]) << "\n";
    }
  }
  write_text_file(join_path(opt.out_dir, "predictions.csv"), csv.str());
  std::cout << frame.n_rows << " rows predicted in " << metrics::round_ms(pred.seconds)
            << "s -> " << join_path(opt.out_dir, "predictions.csv") << "\n";
  return kExitOk;
}

// ---- bench ----------------------------------------------------------------------

struct BenchOptions {
  std::string out_dir;
  std::string checkpoint;
  long repeat = 5;
  std::size_t batch = 1024;
};

int run_bench(const BenchOptions& opt) {
  if (opt.repeat < 1) throw config_error("--repeat must be at least 1");
  const std::string ckpt_path =
      opt.checkpoint.empty() ? join_path(opt.out_dir, "model.eidm") : opt.checkpoint;
  auto m = model::load_checkpoint(ckpt_path);
  auto frame = chi2::apply_mask(data::load_frame(join_path(opt.out_dir, "test.eids")), m.mask);

  std::vector<double> seconds;
  for (long r = 0; r < opt.repeat; ++r)
    seconds.push_back(model::predict(m, frame, opt.batch).seconds);

  std::vector<double> sorted = seconds;
  std::sort(sorted.begin(), sorted.end());
  const double min = sorted.front();
  const double median = sorted[sorted.size() / 2];
  double mean = 0;
  for (double s : seconds) mean += s;
  mean /= static_cast<double>(seconds.size());

  json j;
  j["command"] = "bench";
  j["checkpoint"] = ckpt_path;
  j["rows"] = frame.n_rows;
  j["repeat"] = opt.repeat;
  j["batch_size"] = opt.batch;
  j["seconds"] = seconds;
  j["min_s"] = min;
  j["median_s"] = median;
  j["mean_s"] = mean;
  write_text_file(join_path(opt.out_dir, "bench.json"), j.dump(2) + "\n");

  std::cout << "inference over " << frame.n_rows << " rows x" << opt.repeat << ": min "
            << metrics::round_ms(min) << "s, median " << metrics::round_ms(median) << "s, mean "
            << metrics::round_ms(mean) << "s\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chi-square feature selection + compact CNN-BiLSTM intrusion detection "
               "on the UNSW-NB15 split CSVs"};
  app.name("eids");
  app.set_help_all_flag("--help-all", "Print help for every subcommand");
  app.set_config("--config", "", "Read options from an INI-style config file");
  app.require_subcommand(1);

  IngestOptions ingest;
  ingest.train_csv = dataset_default("UNSW_NB15_training-set.csv");
  ingest.test_csv = dataset_default("UNSW_NB15_testing-set.csv");
  auto* cmd_ingest = app.add_subcommand(
      "ingest", "Parse the dataset CSVs, fit the encoder, cache feature frames");
  cmd_ingest
      ->add_option("--train", ingest.train_csv,
                   "Training split CSV (default: $EIDS_DATA_DIR/UNSW_NB15_training-set.csv)")
      ->capture_default_str();
  cmd_ingest
      ->add_option("--test", ingest.test_csv,
                   "Testing split CSV (default: $EIDS_DATA_DIR/UNSW_NB15_testing-set.csv)")
      ->capture_default_str();
  cmd_ingest->add_option("--out", ingest.out_dir, "Output directory for caches")->required();

  SelectOptions select;
  auto* cmd_select = app.add_subcommand(
      "select", "Score features with the chi-square statistic, keep the top k");
  cmd_select->add_option("--out", select.out_dir, "Directory with cached frames")->required();
  cmd_select->add_option("--k", select.k, "Number of features to keep")->capture_default_str();
  cmd_select->add_option("--label-view", select.label_view, "Label view used for scoring")
      ->check(CLI::IsMember({"binary", "multi"}))
      ->capture_default_str();
  cmd_select->add_flag("--numeric-only", select.numeric_only,
                       "Score only the numeric columns (drop proto/service/state)");

  TrainOptions train;
  auto* cmd_train = app.add_subcommand("train", "Train the CNN-BiLSTM on the cached frames");
  cmd_train->add_option("--out", train.out_dir, "Directory with caches; receives the checkpoint")
      ->required();
  cmd_train->add_option("--task", train.task, "binary or multi")
      ->check(CLI::IsMember({"binary", "multi"}))
      ->required();
  cmd_train->add_option("--seed", train.seed, "Seed for init, shuffling and dropout")
      ->capture_default_str();
  cmd_train->add_option("--lr", train.lr, "Learning rate (default 0.001 binary, 0.01 multi)");
  cmd_train->add_option("--epochs", train.epochs, "Epochs (default 15 binary, 30 multi)");
  cmd_train->add_option("--batch", train.batch, "Batch size (default 256 binary, 128 multi)");
  cmd_train
      ->add_option("--class-weights", train.class_weights,
                   "on|off (default: off for binary, on for multi)")
      ->check(CLI::IsMember({"on", "off"}));
  cmd_train
      ->add_option("--val-fraction", train.val_fraction,
                   "Held-out fraction of training rows traced per epoch")
      ->capture_default_str();
  cmd_train->add_option("--conv-filters", train.conv_filters, "Convolution output channels")
      ->capture_default_str();
  cmd_train->add_option("--conv-kernel", train.conv_kernel, "Convolution kernel width (odd)")
      ->capture_default_str();
  cmd_train->add_option("--lstm-hidden", train.lstm_hidden, "LSTM hidden size per direction")
      ->capture_default_str();
  cmd_train->add_option("--dense-units", train.dense_units, "Dense layer width")
      ->capture_default_str();
  cmd_train->add_option("--dropout", train.dropout, "Dropout rate")->capture_default_str();
  cmd_train
      ->add_option("--axis", train.axis,
                   "sequence: features as time steps; flat: literal (1 x width) layout")
      ->check(CLI::IsMember({"sequence", "flat"}))
      ->capture_default_str();

  EvalOptions eval;
  auto* cmd_eval =
      app.add_subcommand("eval", "Evaluate a checkpoint or baseline on the cached test frame");
  cmd_eval->add_option("--out", eval.out_dir, "Directory with caches; receives reports")
      ->required();
  cmd_eval->add_option("--checkpoint", eval.checkpoint,
                       "Checkpoint path (default: OUT/model.eidm)");
  cmd_eval->add_option("--baseline", eval.baseline, "Evaluate a baseline instead: logistic|knn")
      ->check(CLI::IsMember({"logistic", "knn"}));
  cmd_eval
      ->add_option("--task", eval.task,
                   "binary or multi (required for baselines, checked for checkpoints)")
      ->check(CLI::IsMember({"binary", "multi"}));
  cmd_eval
      ->add_option("--holdout", eval.holdout,
                   "Evaluate on a seeded random fraction of the test split")
      ->capture_default_str();
  cmd_eval->add_option("--seed", eval.seed, "Seed for holdout sampling and baseline training")
      ->capture_default_str();
  cmd_eval->add_option("--use-mask", eval.use_mask,
                       "Apply the selection mask to baseline features")
      ->capture_default_str();
  cmd_eval->add_option("--knn-k", eval.knn_k, "Neighbors for the knn baseline")
      ->capture_default_str();
  cmd_eval
      ->add_option("--logistic-lr", eval.logistic_lr, "Learning rate for the logistic baseline")
      ->capture_default_str();
  cmd_eval
      ->add_option("--logistic-epochs", eval.logistic_epochs,
                   "Epochs for the logistic baseline")
      ->capture_default_str();
  cmd_eval
      ->add_option("--logistic-batch", eval.logistic_batch,
                   "Batch size for the logistic baseline")
      ->capture_default_str();
  cmd_eval
      ->add_option("--threads", eval.threads, "Worker threads for the knn scan (0 = hardware)")
      ->capture_default_str();
  cmd_eval->add_option("--formats", eval.formats, "Comma list of report formats: json,csv,text")
      ->capture_default_str();
  cmd_eval->add_option("--trace", eval.trace,
                       "Training trace CSV used to report train time (default: OUT/trace.csv)");

  PredictOptions predict;
  auto* cmd_predict = app.add_subcommand(
      "predict", "Write per-row probabilities and labels for a cached frame");
  cmd_predict
      ->add_option("--out", predict.out_dir, "Directory with caches; receives predictions")
      ->required();
  cmd_predict->add_option("--checkpoint", predict.checkpoint,
                          "Checkpoint path (default: OUT/model.eidm)");
  cmd_predict->add_option("--frame", predict.frame_path,
                          "Frame cache to predict (default: OUT/test.eids)");
  cmd_predict->add_option("--batch", predict.batch, "Inference batch size")
      ->capture_default_str();

  BenchOptions bench;
  auto* cmd_bench = app.add_subcommand("bench", "Repeat timed full-test-set inference passes");
  cmd_bench->add_option("--out", bench.out_dir, "Directory with caches; receives bench.json")
      ->required();
  cmd_bench->add_option("--checkpoint", bench.checkpoint,
                        "Checkpoint path (default: OUT/model.eidm)");
  cmd_bench->add_option("--repeat", bench.repeat, "Number of timed passes")
      ->capture_default_str();
  cmd_bench->add_option("--batch", bench.batch, "Inference batch size")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (cmd_ingest->parsed()) return run_ingest(ingest);
    if (cmd_select->parsed()) return run_select(select);
    if (cmd_train->parsed()) return run_train(train);
    if (cmd_eval->parsed()) return run_eval(eval);
    if (cmd_predict->parsed()) return run_predict(predict);
    if (cmd_bench->parsed()) return run_bench(bench);
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const contract_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitContract;
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
