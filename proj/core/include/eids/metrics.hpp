#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "eids/errors.hpp"

namespace eids::metrics {

/// Square count matrix; rows are actual classes, columns predictions.
struct ConfusionMatrix {
  std::size_t n_classes = 0;
  std::vector<std::uint64_t> counts;  // row-major n_classes^2
  std::vector<std::string> class_names;

  std::uint64_t& at(std::size_t actual, std::size_t predicted) {
    return counts[actual * n_classes + predicted];
  }
  std::uint64_t at(std::size_t actual, std::size_t predicted) const {
    return counts[actual * n_classes + predicted];
  }
  std::uint64_t total() const;
  std::uint64_t trace() const;
};

ConfusionMatrix confusion(const std::vector<std::uint8_t>& actual,
                          const std::vector<std::uint8_t>& predicted, std::size_t n_classes,
                          std::vector<std::string> class_names = {});

/// Attack (class 1) is the positive class. Degenerate denominators yield 0
/// and are listed in `degenerate` instead of producing NaNs.
struct BinaryMetrics {
  std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
  double accuracy = 0, recall = 0, precision = 0, f1 = 0;
  std::vector<std::string> degenerate;
};

BinaryMetrics binary_metrics(const ConfusionMatrix& cm);

struct ClassMetrics {
  std::string name;
  double precision = 0, recall = 0, f1 = 0;
  std::uint64_t support = 0;
  std::vector<std::string> degenerate;
};

struct Averages {
  double precision = 0, recall = 0, f1 = 0;
};

/// One-vs-rest metrics per class plus support-weighted and macro averages.
/// Weighted recall equals accuracy by construction.
struct MulticlassMetrics {
  double accuracy = 0;
  std::vector<ClassMetrics> per_class;
  Averages weighted, macro;
};

MulticlassMetrics multiclass_metrics(const ConfusionMatrix& cm);

/// Monotonic-clock wall time of the callable, in seconds.
double time_call(const std::function<void()>& fn);

/// Millisecond resolution for reporting.
double round_ms(double seconds);

// ---- reports -------------------------------------------------------------------

struct EvalReport {
  std::string task;   // "binary" | "multi"
  std::string model;  // "cnn-bilstm" | "logistic" | "knn"
  ConfusionMatrix cm;
  MulticlassMetrics metrics;
  BinaryMetrics binary;  // populated when task == "binary"
  bool has_binary = false;
  double train_time_s = 0.0;
  double predict_time_s = 0.0;
  std::string config_json = "{}";  // effective run configuration echo
};

EvalReport evaluate(const std::string& task, const std::string& model,
                    const std::vector<std::uint8_t>& actual,
                    const std::vector<std::uint8_t>& predicted, std::size_t n_classes,
                    std::vector<std::string> class_names, double train_time_s,
                    double predict_time_s, std::string config_json);

enum class ReportFormat { json, csv, text };

std::string report_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

/// Table-style text rendering: headline row, per-class table and the
/// confusion matrix.
std::string report_text(const EvalReport& report);

/// CSV with a header row plus one row per actual class.
std::string confusion_csv(const ConfusionMatrix& cm);

void emit_report(const EvalReport& report, ReportFormat format, const std::string& path);

}  // namespace eids::metrics
