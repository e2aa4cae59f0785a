#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "eids/errors.hpp"

namespace eids::data {

// ---- UNSW-NB15 schema --------------------------------------------------------

inline constexpr std::size_t kFeatureCount = 42;  // modeling features
inline constexpr std::size_t kRecordCells = 44;   // features + attack_cat + label

inline constexpr std::size_t kCanonicalTrainRows = 175341;
inline constexpr std::size_t kCanonicalTestRows = 82332;

/// Modeling feature names in file order (the leading `id` column of the
/// official CSVs is dropped at load time; `attack_cat` and `label` are
/// extracted as labels).
const std::vector<std::string>& feature_names();

/// proto / service / state take ordinal encoding; everything else is numeric.
bool is_categorical(std::size_t feature_index);
const std::vector<std::size_t>& categorical_indices();

enum class Split : std::uint8_t { train = 0, test = 1 };

std::string_view split_name(Split s);

// ---- attack taxonomy ----------------------------------------------------------

/// Normal is class 0; the nine attack categories follow alphabetically.
inline constexpr std::array<std::string_view, 10> kClassNames = {
    "Normal",  "Analysis", "Backdoor",       "DoS",       "Exploits",
    "Fuzzers", "Generic",  "Reconnaissance", "Shellcode", "Worms"};
inline constexpr std::size_t kClassCount = kClassNames.size();

/// Class id for a category name, or -1 if unknown.
int class_id(std::string_view name);
std::string_view class_name(std::size_t id);

// ---- records -------------------------------------------------------------------

/// One parsed CSV row: 42 feature cells plus attack_cat and label.
struct RawRecord {
  std::vector<std::string> values;  // exactly kRecordCells
  std::size_t line = 0;             // 1-based source line, 0 if not from a file

  const std::string& feature(std::size_t i) const { return values[i]; }
  const std::string& attack_cat() const { return values[kFeatureCount]; }
  const std::string& label() const { return values[kFeatureCount + 1]; }
};

struct LoadResult {
  std::vector<RawRecord> records;
  std::vector<std::string> warnings;
};

/// Reads a UNSW-NB15 train/test split CSV. Row-count mismatches against the
/// canonical split sizes are warnings; structural problems (bad header, wrong
/// cell count, unknown attack_cat, label not 0/1) are errors naming the line.
LoadResult load_csv(const std::string& path, Split expected_split);

// ---- encoding ---------------------------------------------------------------------

/// Per-column transform state fitted on the training split only: sorted
/// vocabularies for the categorical columns, min/max for numeric ones.
struct EncoderState {
  std::map<std::string, std::vector<std::string>> vocab;
  std::vector<double> min_vals;   // size kFeatureCount
  std::vector<double> max_vals;   // size kFeatureCount
  std::vector<bool> constant;     // min == max

  std::string to_json_string() const;
  static EncoderState from_json_string(const std::string& text);
  void save(const std::string& path) const;
  static EncoderState load(const std::string& path);

  /// CRC-32 of the canonical JSON form; stored in checkpoints for provenance.
  std::uint32_t digest() const;
};

EncoderState fit_encoder(const std::vector<RawRecord>& train_records);

// ---- feature frames -----------------------------------------------------------------

/// Columnar table of encoded, min-max scaled features plus both label views.
struct FeatureFrame {
  std::vector<std::string> feature_names;
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<float> matrix;  // row-major n_rows x n_cols
  std::vector<std::uint8_t> binary_labels;
  std::vector<std::uint8_t> class_labels;
  Split split_tag = Split::train;

  float at(std::size_t row, std::size_t col) const { return matrix[row * n_cols + col]; }
  const float* row(std::size_t r) const { return matrix.data() + r * n_cols; }
};

/// Encodes and scales records into [0, 1]: ordinal index for categorical
/// columns, (x - min) / (max - min) for numeric ones; constant columns map
/// to 0; out-of-range and unseen values clip to the boundary.
FeatureFrame transform(const std::vector<RawRecord>& records, const EncoderState& enc,
                       Split split_tag);

/// Inverse-frequency class weights over the 10-class view:
/// w_c = N / (C_present * N_c); absent classes get weight 0.
std::vector<double> class_weights(const FeatureFrame& frame);

/// Same formula over the binary view: {w_normal, w_attack}.
std::vector<double> binary_class_weights(const FeatureFrame& frame);

// ---- frame cache ---------------------------------------------------------------------

/// Binary cache: magic "EIDS", version u16, then little-endian dims, a
/// length-prefixed name table, the f32 matrix, both u8 label vectors and a
/// trailing CRC-32 of all preceding bytes. Round trips are bit exact.
void save_frame(const FeatureFrame& frame, const std::string& path);
FeatureFrame load_frame(const std::string& path);

}  // namespace eids::data
