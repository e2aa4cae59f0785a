#include "eids/chi2.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eids/errors.hpp"

namespace eids::chi2 {

namespace {

using json = nlohmann::json;

}  // namespace

std::vector<FeatureScore> chi2_scores(const data::FeatureFrame& frame, LabelView view) {
  if (frame.n_rows == 0) throw contract_error("chi2_scores requires a nonempty frame");
  const std::vector<std::uint8_t>& labels =
      view == LabelView::binary ? frame.binary_labels : frame.class_labels;
  const std::size_t n_classes = view == LabelView::binary ? 2 : data::kClassCount;

  std::vector<std::size_t> class_counts(n_classes, 0);
  for (std::uint8_t c : labels) ++class_counts[c];

  // observed[c][f]: per-class sums of each feature, accumulated in row order
  const std::size_t cols = frame.n_cols;
  std::vector<std::vector<double>> observed(n_classes, std::vector<double>(cols, 0.0));
  for (std::size_t r = 0; r < frame.n_rows; ++r) {
    std::vector<double>& row_acc = observed[labels[r]];
    const float* row = frame.row(r);
    for (std::size_t f = 0; f < cols; ++f) {
      if (row[f] < 0.0f)
        throw contract_error("chi2_scores requires non-negative features; '" +
                             frame.feature_names[f] + "' is negative");
      row_acc[f] += static_cast<double>(row[f]);
    }
  }

  const double n = static_cast<double>(frame.n_rows);
  std::vector<FeatureScore> out(cols);
  std::vector<double> terms;
  for (std::size_t f = 0; f < cols; ++f) {
    out[f].column = f;
    out[f].feature = frame.feature_names[f];
    double total = 0.0;
    for (std::size_t c = 0; c < n_classes; ++c) total += observed[c][f];
    if (total == 0.0) {
      out[f].score = 0.0;
      continue;
    }
    terms.clear();
    for (std::size_t c = 0; c < n_classes; ++c) {
      if (class_counts[c] == 0) continue;
      const double expected = total * static_cast<double>(class_counts[c]) / n;
      const double diff = observed[c][f] - expected;
      terms.push_back(diff * diff / expected);
    }
    // summation in sorted order: the result is independent of class labeling
    std::sort(terms.begin(), terms.end());
    double score = 0.0;
    for (double t : terms) score += t;
    out[f].score = score;
  }
  return out;
}

std::vector<FeatureScore> drop_categorical(const std::vector<FeatureScore>& scores) {
  std::vector<FeatureScore> out;
  out.reserve(scores.size());
  for (const FeatureScore& s : scores) {
    bool cat = false;
    for (std::size_t idx : data::categorical_indices())
      cat = cat || s.feature == data::feature_names()[idx];
    if (!cat) out.push_back(s);
  }
  return out;
}

SelectionMask select_top_k(const std::vector<FeatureScore>& scores, std::size_t k) {
  if (k == 0) throw contract_error("selection size k must be at least 1");
  if (k > scores.size())
    throw contract_error("selection size k = " + std::to_string(k) + " exceeds the " +
                         std::to_string(scores.size()) + " scored features");
  std::vector<FeatureScore> ranked = scores;
  std::sort(ranked.begin(), ranked.end(), [](const FeatureScore& a, const FeatureScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.column < b.column;
  });
  ranked.resize(k);
  std::sort(ranked.begin(), ranked.end(),
            [](const FeatureScore& a, const FeatureScore& b) { return a.column < b.column; });

  SelectionMask mask;
  for (const FeatureScore& s : ranked) {
    mask.indices.push_back(s.column);
    mask.names.push_back(s.feature);
  }
  return mask;
}

data::FeatureFrame apply_mask(const data::FeatureFrame& frame, const SelectionMask& mask) {
  if (mask.k() == 0) throw contract_error("selection mask is empty");
  for (std::size_t i = 0; i < mask.indices.size(); ++i) {
    if (mask.indices[i] >= frame.n_cols)
      throw contract_error("mask index " + std::to_string(mask.indices[i]) +
                           " out of range for frame width " + std::to_string(frame.n_cols));
    if (i > 0 && mask.indices[i] <= mask.indices[i - 1])
      throw contract_error("mask indices must be strictly increasing");
  }

  data::FeatureFrame out;
  out.feature_names = mask.names;
  out.n_rows = frame.n_rows;
  out.n_cols = mask.k();
  out.matrix.resize(out.n_rows * out.n_cols);
  for (std::size_t r = 0; r < frame.n_rows; ++r) {
    const float* src = frame.row(r);
    float* dst = out.matrix.data() + r * out.n_cols;
    for (std::size_t j = 0; j < mask.indices.size(); ++j) dst[j] = src[mask.indices[j]];
  }
  out.binary_labels = frame.binary_labels;
  out.class_labels = frame.class_labels;
  out.split_tag = frame.split_tag;
  return out;
}

std::string score_report(const std::vector<FeatureScore>& scores) {
  std::vector<FeatureScore> ranked = scores;
  std::sort(ranked.begin(), ranked.end(), [](const FeatureScore& a, const FeatureScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.column < b.column;
  });
  std::string out = "rank,feature,score\n";
  char buf[64];
  std::size_t rank = 1;
  for (const FeatureScore& s : ranked) {
    std::snprintf(buf, sizeof(buf), "%zu,%s,%.2e\n", rank, s.feature.c_str(), s.score);
    out += buf;
    ++rank;
  }
  return out;
}

// ---- mask serialization ------------------------------------------------------

std::string SelectionMask::to_json_string() const {
  json j;
  j["type"] = "eids-mask";
  j["k"] = indices.size();
  j["indices"] = indices;
  j["names"] = names;
  return j.dump(2);
}

SelectionMask SelectionMask::from_json_string(const std::string& text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object() || j.value("type", "") != "eids-mask")
    throw io_error("not a selection mask file");
  SelectionMask mask;
  mask.indices = j.at("indices").get<std::vector<std::size_t>>();
  mask.names = j.at("names").get<std::vector<std::string>>();
  if (mask.indices.size() != mask.names.size() || mask.indices.size() != j.at("k").get<std::size_t>())
    throw io_error("selection mask file is inconsistent");
  return mask;
}

void SelectionMask::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << to_json_string() << "\n";
  if (!out) throw io_error("write failed: " + path);
}

SelectionMask SelectionMask::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open mask file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_string(ss.str());
}

}  // namespace eids::chi2
