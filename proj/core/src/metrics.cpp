#include "eids/metrics.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace eids::metrics {

namespace {

using json = nlohmann::json;

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", v * 100.0);
  return buf;
}

std::string seconds_str(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", round_ms(v));
  return buf;
}

}  // namespace

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t n = 0;
  for (std::uint64_t c : counts) n += c;
  return n;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < n_classes; ++i) n += at(i, i);
  return n;
}

ConfusionMatrix confusion(const std::vector<std::uint8_t>& actual,
                          const std::vector<std::uint8_t>& predicted, std::size_t n_classes,
                          std::vector<std::string> class_names) {
  if (actual.size() != predicted.size())
    throw contract_error("confusion: label vectors differ in length");
  if (n_classes == 0) throw contract_error("confusion: need at least one class");
  ConfusionMatrix cm;
  cm.n_classes = n_classes;
  cm.counts.assign(n_classes * n_classes, 0);
  if (class_names.empty()) {
    for (std::size_t i = 0; i < n_classes; ++i) class_names.push_back("class" + std::to_string(i));
  }
  if (class_names.size() != n_classes)
    throw contract_error("confusion: class name list does not match class count");
  cm.class_names = std::move(class_names);
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] >= n_classes || predicted[i] >= n_classes)
      throw contract_error("confusion: label out of range at row " + std::to_string(i));
    ++cm.at(actual[i], predicted[i]);
  }
  return cm;
}

BinaryMetrics binary_metrics(const ConfusionMatrix& cm) {
  if (cm.n_classes != 2) throw contract_error("binary_metrics requires a 2x2 matrix");
  BinaryMetrics m;
  m.tn = cm.at(0, 0);
  m.fp = cm.at(0, 1);
  m.fn = cm.at(1, 0);
  m.tp = cm.at(1, 1);
  const double tp = static_cast<double>(m.tp), tn = static_cast<double>(m.tn),
               fp = static_cast<double>(m.fp), fn = static_cast<double>(m.fn);
  const double total = tp + tn + fp + fn;
  if (total == 0) {
    m.degenerate = {"accuracy", "recall", "precision", "f1"};
    return m;
  }
  m.accuracy = (tp + tn) / total;
  if (tp + fn > 0) {
    m.recall = tp / (tp + fn);
  } else {
    m.degenerate.push_back("recall");
  }
  if (tp + fp > 0) {
    m.precision = tp / (tp + fp);
  } else {
    m.degenerate.push_back("precision");
  }
  if (m.precision + m.recall > 0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.degenerate.push_back("f1");
  }
  return m;
}

MulticlassMetrics multiclass_metrics(const ConfusionMatrix& cm) {
  if (cm.n_classes == 0) throw contract_error("multiclass_metrics: empty matrix");
  const std::uint64_t total = cm.total();
  if (total == 0) throw contract_error("multiclass_metrics: matrix has no observations");

  MulticlassMetrics out;
  out.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);

  for (std::size_t c = 0; c < cm.n_classes; ++c) {
    ClassMetrics m;
    m.name = cm.class_names[c];
    std::uint64_t tp = cm.at(c, c), row = 0, col = 0;
    for (std::size_t j = 0; j < cm.n_classes; ++j) {
      row += cm.at(c, j);
      col += cm.at(j, c);
    }
    m.support = row;
    if (col > 0) {
      m.precision = static_cast<double>(tp) / static_cast<double>(col);
    } else {
      m.degenerate.push_back("precision");
    }
    if (row > 0) {
      m.recall = static_cast<double>(tp) / static_cast<double>(row);
    } else {
      m.degenerate.push_back("recall");
    }
    if (m.precision + m.recall > 0) {
      m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    } else {
      m.degenerate.push_back("f1");
    }
    out.per_class.push_back(std::move(m));
  }

  const double n = static_cast<double>(total);
  const double c_count = static_cast<double>(cm.n_classes);
  for (const ClassMetrics& m : out.per_class) {
    const double w = static_cast<double>(m.support) / n;
    out.weighted.precision += w * m.precision;
    out.weighted.recall += w * m.recall;
    out.weighted.f1 += w * m.f1;
    out.macro.precision += m.precision / c_count;
    out.macro.recall += m.recall / c_count;
    out.macro.f1 += m.f1 / c_count;
  }
  return out;
}

double time_call(const std::function<void()>& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(stop - start).count();
}

double round_ms(double seconds) { return std::round(seconds * 1000.0) / 1000.0; }

// ---- reports -----------------------------------------------------------------------

EvalReport evaluate(const std::string& task, const std::string& model,
                    const std::vector<std::uint8_t>& actual,
                    const std::vector<std::uint8_t>& predicted, std::size_t n_classes,
                    std::vector<std::string> class_names, double train_time_s,
                    double predict_time_s, std::string config_json) {
  EvalReport report;
  report.task = task;
  report.model = model;
  report.cm = confusion(actual, predicted, n_classes, std::move(class_names));
  report.metrics = multiclass_metrics(report.cm);
  if (task == "binary") {
    report.binary = binary_metrics(report.cm);
    report.has_binary = true;
  }
  report.train_time_s = train_time_s;
  report.predict_time_s = predict_time_s;
  report.config_json = std::move(config_json);
  return report;
}

namespace {

json averages_json(const Averages& a) {
  return json{{"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}};
}

Averages averages_from(const json& j) {
  Averages a;
  a.precision = j.at("precision").get<double>();
  a.recall = j.at("recall").get<double>();
  a.f1 = j.at("f1").get<double>();
  return a;
}

}  // namespace

std::string report_json(const EvalReport& r) {
  json j;
  j["task"] = r.task;
  j["model"] = r.model;
  j["accuracy"] = r.metrics.accuracy;
  j["averages"] = {{"weighted", averages_json(r.metrics.weighted)},
                   {"macro", averages_json(r.metrics.macro)}};
  json per_class = json::array();
  for (const ClassMetrics& m : r.metrics.per_class) {
    per_class.push_back(json{{"class", m.name},
                             {"precision", m.precision},
                             {"recall", m.recall},
                             {"f1", m.f1},
                             {"support", m.support},
                             {"degenerate", m.degenerate}});
  }
  j["per_class"] = per_class;
  if (r.has_binary) {
    j["binary"] = json{{"tp", r.binary.tp},       {"tn", r.binary.tn},
                       {"fp", r.binary.fp},       {"fn", r.binary.fn},
                       {"accuracy", r.binary.accuracy}, {"recall", r.binary.recall},
                       {"precision", r.binary.precision}, {"f1", r.binary.f1},
                       {"degenerate", r.binary.degenerate}};
  }
  json counts = json::array();
  for (std::size_t i = 0; i < r.cm.n_classes; ++i) {
    json row = json::array();
    for (std::size_t k = 0; k < r.cm.n_classes; ++k) row.push_back(r.cm.at(i, k));
    counts.push_back(row);
  }
  j["confusion"] = {{"classes", r.cm.class_names}, {"counts", counts}};
  j["timing"] = {{"train_s", r.train_time_s},
                 {"predict_s", r.predict_time_s},
                 {"total_s", r.train_time_s + r.predict_time_s}};
  j["config"] = json::parse(r.config_json);
  return j.dump(2);
}

EvalReport report_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) throw io_error("not a report file");
  EvalReport r;
  r.task = j.at("task").get<std::string>();
  r.model = j.at("model").get<std::string>();
  r.cm.class_names = j.at("confusion").at("classes").get<std::vector<std::string>>();
  r.cm.n_classes = r.cm.class_names.size();
  r.cm.counts.assign(r.cm.n_classes * r.cm.n_classes, 0);
  const json& counts = j.at("confusion").at("counts");
  for (std::size_t i = 0; i < r.cm.n_classes; ++i)
    for (std::size_t k = 0; k < r.cm.n_classes; ++k)
      r.cm.at(i, k) = counts.at(i).at(k).get<std::uint64_t>();
  r.metrics.accuracy = j.at("accuracy").get<double>();
  r.metrics.weighted = averages_from(j.at("averages").at("weighted"));
  r.metrics.macro = averages_from(j.at("averages").at("macro"));
  for (const json& pc : j.at("per_class")) {
    ClassMetrics m;
    m.name = pc.at("class").get<std::string>();
    m.precision = pc.at("precision").get<double>();
    m.recall = pc.at("recall").get<double>();
    m.f1 = pc.at("f1").get<double>();
    m.support = pc.at("support").get<std::uint64_t>();
    m.degenerate = pc.at("degenerate").get<std::vector<std::string>>();
    r.metrics.per_class.push_back(std::move(m));
  }
  if (j.contains("binary")) {
    const json& b = j.at("binary");
    r.binary.tp = b.at("tp").get<std::uint64_t>();
    r.binary.tn = b.at("tn").get<std::uint64_t>();
    r.binary.fp = b.at("fp").get<std::uint64_t>();
    r.binary.fn = b.at("fn").get<std::uint64_t>();
    r.binary.accuracy = b.at("accuracy").get<double>();
    r.binary.recall = b.at("recall").get<double>();
    r.binary.precision = b.at("precision").get<double>();
    r.binary.f1 = b.at("f1").get<double>();
    r.binary.degenerate = b.at("degenerate").get<std::vector<std::string>>();
    r.has_binary = true;
  }
  r.train_time_s = j.at("timing").at("train_s").get<double>();
  r.predict_time_s = j.at("timing").at("predict_s").get<double>();
  r.config_json = j.at("config").dump();
  return r;
}

std::string report_text(const EvalReport& r) {
  std::ostringstream out;
  const Averages& w = r.metrics.weighted;
  out << "== " << r.model << " / " << r.task << " ==\n";
  if (r.task == "binary") {
    out << "model,accuracy,recall,precision,f1-score,time to train (s),time to predict (s),total time (s)\n";
    out << r.model << "," << percent(r.metrics.accuracy) << "," << percent(w.recall) << ","
        << percent(w.precision) << "," << percent(w.f1) << "," << seconds_str(r.train_time_s)
        << "," << seconds_str(r.predict_time_s) << ","
        << seconds_str(r.train_time_s + r.predict_time_s) << "\n";
  } else {
    out << "model,accuracy,precision,recall,f1-score,time to train (s),time to predict (s)\n";
    out << r.model << "," << percent(r.metrics.accuracy) << "," << percent(w.precision) << ","
        << percent(w.recall) << "," << percent(w.f1) << "," << seconds_str(r.train_time_s) << ","
        << seconds_str(r.predict_time_s) << "\n";
  }
  if (r.has_binary) {
    out << "\npositive class (attack): tp=" << r.binary.tp << " tn=" << r.binary.tn
        << " fp=" << r.binary.fp << " fn=" << r.binary.fn << "\n";
    out << "accuracy=" << percent(r.binary.accuracy) << " recall=" << percent(r.binary.recall)
        << " precision=" << percent(r.binary.precision) << " f1=" << percent(r.binary.f1) << "\n";
  }
  out << "\nper-class (precision / recall / f1 / support):\n";
  for (const ClassMetrics& m : r.metrics.per_class) {
    out << "  " << m.name << ": " << percent(m.precision) << " / " << percent(m.recall) << " / "
        << percent(m.f1) << " / " << m.support;
    if (!m.degenerate.empty()) {
      out << "  [degenerate:";
      for (const std::string& d : m.degenerate) out << " " << d;
      out << "]";
    }
    out << "\n";
  }
  out << "\nconfusion matrix (rows = actual, columns = predicted):\n" << confusion_csv(r.cm);
  return out.str();
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  std::ostringstream out;
  out << "actual\\predicted";
  for (const std::string& name : cm.class_names) out << "," << name;
  out << "\n";
  for (std::size_t i = 0; i < cm.n_classes; ++i) {
    out << cm.class_names[i];
    for (std::size_t j = 0; j < cm.n_classes; ++j) out << "," << cm.at(i, j);
    out << "\n";
  }
  return out.str();
}

void emit_report(const EvalReport& report, ReportFormat format, const std::string& path) {
  std::string body;
  switch (format) {
    case ReportFormat::json:
      body = report_json(report);
      break;
    case ReportFormat::csv:
      body = confusion_csv(report.cm);
      break;
    case ReportFormat::text:
      body = report_text(report);
      break;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << body;
  if (format != ReportFormat::csv) out << "\n";
  if (!out) throw io_error("write failed: " + path);
}

}  // namespace eids::metrics
