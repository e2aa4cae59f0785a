#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "eids/dataset.hpp"

namespace eids::chi2 {

enum class LabelView { binary, multiclass };

struct FeatureScore {
  std::size_t column = 0;  // index into the scored frame
  std::string feature;
  double score = 0.0;  // chi-square statistic, >= 0 and finite
};

/// Retained columns in ascending original-column order.
struct SelectionMask {
  std::vector<std::size_t> indices;
  std::vector<std::string> names;

  std::size_t k() const { return indices.size(); }

  void save(const std::string& path) const;
  static SelectionMask load(const std::string& path);
  std::string to_json_string() const;
  static SelectionMask from_json_string(const std::string& text);
};

/// Chi-square statistic per feature in frame column order. For feature f and
/// class c, observed O is the sum of f over rows of class c and expected E is
/// (total sum of f) * N_c / N; the score is sum_c (O-E)^2 / E. Features whose
/// values sum to 0 score 0; empty classes are skipped. Requires non-negative
/// features (the scaled frame guarantees this).
///
/// This observed/expected form is linear in the feature column: scaling one
/// column by lambda > 0 scales its score by lambda, so the ranking depends on
/// how features were scaled upstream. Scores are invariant to row order and
/// to class relabeling (per-class terms are reduced in a canonical order).
std::vector<FeatureScore> chi2_scores(const data::FeatureFrame& frame, LabelView view);

/// Drops proto/service/state entries from a score list (the numeric-only
/// report view); column indices keep referring to the full frame.
std::vector<FeatureScore> drop_categorical(const std::vector<FeatureScore>& scores);

/// Top-k by score, ties broken by ascending column index.
SelectionMask select_top_k(const std::vector<FeatureScore>& scores, std::size_t k);

/// Restrict (and order) frame columns per mask; labels are untouched.
data::FeatureFrame apply_mask(const data::FeatureFrame& frame, const SelectionMask& mask);

/// CSV table `rank,feature,score`, descending score, scores in scientific
/// notation with 3 significant digits.
std::string score_report(const std::vector<FeatureScore>& scores);

}  // namespace eids::chi2
