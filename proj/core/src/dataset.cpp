#include "eids/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eids/serial.hpp"

namespace eids::data {

namespace {

using json = nlohmann::json;

constexpr std::uint16_t kFrameFormatVersion = 1;

const std::vector<std::string>& header_without_id() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> v(feature_names());
    v.push_back("attack_cat");
    v.push_back("label");
    return v;
  }();
  return cols;
}

std::string to_lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (quoted) {
      if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

double parse_numeric_cell(const std::string& raw, const std::string& column, std::size_t line,
                          std::size_t record_index) {
  const std::string cell = trim(raw);
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, value, std::chars_format::general);
  if (ec != std::errc() || ptr != end || cell.empty()) {
    std::ostringstream msg;
    msg << "cannot parse numeric cell '" << raw << "' in column '" << column << "', ";
    if (line > 0)
      msg << "line " << line;
    else
      msg << "record " << (record_index + 1);
    throw contract_error(msg.str());
  }
  return value;
}

}  // namespace

const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names = {
      "dur",        "proto",         "service",           "state",
      "spkts",      "dpkts",         "sbytes",            "dbytes",
      "rate",       "sttl",          "dttl",              "sload",
      "dload",      "sloss",         "dloss",             "sinpkt",
      "dinpkt",     "sjit",          "djit",              "swin",
      "stcpb",      "dtcpb",         "dwin",              "tcprtt",
      "synack",     "ackdat",        "smean",             "dmean",
      "trans_depth", "response_body_len", "ct_srv_src",   "ct_state_ttl",
      "ct_dst_ltm", "ct_src_dport_ltm", "ct_dst_sport_ltm", "ct_dst_src_ltm",
      "is_ftp_login", "ct_ftp_cmd",  "ct_flw_http_mthd",  "ct_src_ltm",
      "ct_srv_dst", "is_sm_ips_ports"};
  return names;
}

bool is_categorical(std::size_t feature_index) {
  return feature_index == 1 || feature_index == 2 || feature_index == 3;
}

const std::vector<std::size_t>& categorical_indices() {
  static const std::vector<std::size_t> idx = {1, 2, 3};
  return idx;
}

std::string_view split_name(Split s) { return s == Split::train ? "train" : "test"; }

int class_id(std::string_view name) {
  for (std::size_t i = 0; i < kClassNames.size(); ++i)
    if (kClassNames[i] == name) return static_cast<int>(i);
  return -1;
}

std::string_view class_name(std::size_t id) {
  if (id >= kClassNames.size()) throw contract_error("class id out of range");
  return kClassNames[id];
}

// ---- load_csv -----------------------------------------------------------------

LoadResult load_csv(const std::string& path, Split expected_split) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open dataset file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw io_error("empty dataset file (no header): " + path);

  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = to_lower(trim(h));
  bool has_id = false;
  if (!header.empty() && header[0] == "id") {
    has_id = true;
    header.erase(header.begin());
  }
  const auto& expected = header_without_id();
  if (header.size() != expected.size()) {
    std::ostringstream msg;
    msg << "unexpected header in " << path << ": " << header.size() << " columns (want "
        << expected.size() << (has_id ? " plus id" : "") << ")";
    throw io_error(msg.str());
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (header[i] != expected[i]) {
      std::ostringstream msg;
      msg << "unexpected header column " << (i + 1) << " in " << path << ": got '" << header[i]
          << "', want '" << expected[i] << "'";
      throw io_error(msg.str());
    }
  }

  LoadResult result;
  std::size_t line_no = 1;
  std::size_t label_mismatches = 0;
  const std::size_t expected_cells = kRecordCells + (has_id ? 1 : 0);
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != expected_cells) {
      std::ostringstream msg;
      msg << "malformed row at line " << line_no << " in " << path << ": " << cells.size()
          << " cells (want " << expected_cells << ")";
      throw contract_error(msg.str());
    }
    if (has_id) cells.erase(cells.begin());

    RawRecord rec;
    rec.values = std::move(cells);
    rec.line = line_no;
    const std::string cat = trim(rec.attack_cat());
    const int cid = class_id(cat);
    if (cid < 0) {
      std::ostringstream msg;
      msg << "unknown attack_cat '" << cat << "' at line " << line_no << " in " << path;
      throw contract_error(msg.str());
    }
    const std::string lbl = trim(rec.label());
    if (lbl != "0" && lbl != "1") {
      std::ostringstream msg;
      msg << "label must be 0 or 1, got '" << lbl << "' at line " << line_no << " in " << path;
      throw contract_error(msg.str());
    }
    if ((lbl == "0") != (cid == 0)) ++label_mismatches;
    result.records.push_back(std::move(rec));
  }

  const std::size_t canonical =
      expected_split == Split::train ? kCanonicalTrainRows : kCanonicalTestRows;
  if (result.records.size() != canonical) {
    std::ostringstream msg;
    msg << path << ": " << result.records.size() << " rows, canonical "
        << split_name(expected_split) << " split has " << canonical;
    result.warnings.push_back(msg.str());
  }
  if (label_mismatches > 0) {
    std::ostringstream msg;
    msg << path << ": " << label_mismatches
        << " rows where binary label disagrees with attack_cat == Normal";
    result.warnings.push_back(msg.str());
  }
  return result;
}

// ---- encoder --------------------------------------------------------------------

EncoderState fit_encoder(const std::vector<RawRecord>& train_records) {
  if (train_records.empty()) throw contract_error("fit_encoder requires nonempty records");
  const auto& names = feature_names();

  EncoderState enc;
  enc.min_vals.assign(kFeatureCount, 0.0);
  enc.max_vals.assign(kFeatureCount, 0.0);
  enc.constant.assign(kFeatureCount, false);

  std::array<std::set<std::string>, 3> cat_values;
  for (const RawRecord& rec : train_records) {
    if (rec.values.size() != kRecordCells)
      throw contract_error("record does not have " + std::to_string(kRecordCells) + " cells");
    for (std::size_t k = 0; k < categorical_indices().size(); ++k)
      cat_values[k].insert(trim(rec.feature(categorical_indices()[k])));
  }
  for (std::size_t k = 0; k < categorical_indices().size(); ++k) {
    const std::size_t col = categorical_indices()[k];
    enc.vocab[names[col]] = std::vector<std::string>(cat_values[k].begin(), cat_values[k].end());
    enc.min_vals[col] = 0.0;
    enc.max_vals[col] = static_cast<double>(cat_values[k].size() - 1);
    enc.constant[col] = cat_values[k].size() <= 1;
  }

  bool first = true;
  std::size_t record_index = 0;
  for (const RawRecord& rec : train_records) {
    for (std::size_t col = 0; col < kFeatureCount; ++col) {
      if (is_categorical(col)) continue;
      const double v =
          parse_numeric_cell(rec.feature(col), names[col], rec.line, record_index);
      if (first) {
        enc.min_vals[col] = v;
        enc.max_vals[col] = v;
      } else {
        enc.min_vals[col] = std::min(enc.min_vals[col], v);
        enc.max_vals[col] = std::max(enc.max_vals[col], v);
      }
    }
    first = false;
    ++record_index;
  }
  for (std::size_t col = 0; col < kFeatureCount; ++col) {
    if (!is_categorical(col)) enc.constant[col] = enc.min_vals[col] == enc.max_vals[col];
  }
  return enc;
}

// ---- transform -------------------------------------------------------------------

FeatureFrame transform(const std::vector<RawRecord>& records, const EncoderState& enc,
                       Split split_tag) {
  if (enc.min_vals.size() != kFeatureCount || enc.max_vals.size() != kFeatureCount)
    throw contract_error("encoder not fitted");
  const auto& names = feature_names();

  FeatureFrame frame;
  frame.feature_names = names;
  frame.n_rows = records.size();
  frame.n_cols = kFeatureCount;
  frame.matrix.resize(frame.n_rows * frame.n_cols);
  frame.binary_labels.resize(frame.n_rows);
  frame.class_labels.resize(frame.n_rows);
  frame.split_tag = split_tag;

  std::size_t r = 0;
  for (const RawRecord& rec : records) {
    if (rec.values.size() != kRecordCells)
      throw contract_error("record does not have " + std::to_string(kRecordCells) + " cells");
    for (std::size_t col = 0; col < kFeatureCount; ++col) {
      double raw;
      if (is_categorical(col)) {
        const auto& vocab = enc.vocab.at(names[col]);
        const std::string cell = trim(rec.feature(col));
        auto it = std::lower_bound(vocab.begin(), vocab.end(), cell);
        // unseen values take index -1 and end up clipped to 0
        raw = (it != vocab.end() && *it == cell)
                  ? static_cast<double>(it - vocab.begin())
                  : -1.0;
      } else {
        raw = parse_numeric_cell(rec.feature(col), names[col], rec.line, r);
      }
      double scaled;
      if (enc.constant[col]) {
        scaled = 0.0;
      } else {
        scaled = (raw - enc.min_vals[col]) / (enc.max_vals[col] - enc.min_vals[col]);
      }
      scaled = std::clamp(scaled, 0.0, 1.0);
      frame.matrix[r * kFeatureCount + col] = static_cast<float>(scaled);
    }
    const int cid = class_id(trim(rec.attack_cat()));
    if (cid < 0) throw contract_error("unknown attack_cat '" + rec.attack_cat() + "'");
    const std::string lbl = trim(rec.label());
    if (lbl != "0" && lbl != "1")
      throw contract_error("label must be 0 or 1, got '" + rec.label() + "'");
    frame.class_labels[r] = static_cast<std::uint8_t>(cid);
    frame.binary_labels[r] = static_cast<std::uint8_t>(lbl == "1" ? 1 : 0);
    ++r;
  }
  return frame;
}

// ---- class weights ------------------------------------------------------------------

namespace {

std::vector<double> inverse_frequency_weights(const std::vector<std::uint8_t>& labels,
                                              std::size_t n_classes) {
  if (labels.empty()) throw contract_error("class_weights requires a nonempty frame");
  std::vector<std::size_t> counts(n_classes, 0);
  for (std::uint8_t c : labels) {
    if (c >= n_classes) throw contract_error("class label out of range");
    ++counts[c];
  }
  std::size_t present = 0;
  for (std::size_t c : counts) present += c > 0 ? 1 : 0;
  const double n = static_cast<double>(labels.size());
  std::vector<double> w(n_classes, 0.0);
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (counts[c] > 0)
      w[c] = n / (static_cast<double>(present) * static_cast<double>(counts[c]));
  }
  return w;
}

}  // namespace

std::vector<double> class_weights(const FeatureFrame& frame) {
  return inverse_frequency_weights(frame.class_labels, kClassCount);
}

std::vector<double> binary_class_weights(const FeatureFrame& frame) {
  return inverse_frequency_weights(frame.binary_labels, 2);
}

// ---- encoder serialization ------------------------------------------------------------

std::string EncoderState::to_json_string() const {
  json j;
  j["type"] = "eids-encoder";
  j["version"] = 1;
  j["vocab"] = vocab;
  j["min"] = min_vals;
  j["max"] = max_vals;
  j["constant"] = std::vector<int>(constant.begin(), constant.end());
  return j.dump(2);
}

EncoderState EncoderState::from_json_string(const std::string& text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object() || j.value("type", "") != "eids-encoder")
    throw io_error("not an encoder file");
  EncoderState enc;
  enc.vocab = j.at("vocab").get<std::map<std::string, std::vector<std::string>>>();
  enc.min_vals = j.at("min").get<std::vector<double>>();
  enc.max_vals = j.at("max").get<std::vector<double>>();
  auto c = j.at("constant").get<std::vector<int>>();
  enc.constant.assign(c.begin(), c.end());
  if (enc.min_vals.size() != kFeatureCount || enc.max_vals.size() != kFeatureCount ||
      enc.constant.size() != kFeatureCount)
    throw io_error("encoder file has wrong column count");
  return enc;
}

void EncoderState::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << to_json_string() << "\n";
  if (!out) throw io_error("write failed: " + path);
}

EncoderState EncoderState::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open encoder file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_string(ss.str());
}

std::uint32_t EncoderState::digest() const {
  const std::string s = to_json_string();
  return crc32_bytes(s.data(), s.size());
}

// ---- frame cache ------------------------------------------------------------------------

void save_frame(const FeatureFrame& frame, const std::string& path) {
  if (frame.feature_names.size() != frame.n_cols)
    throw contract_error("frame name table does not match column count");
  if (frame.binary_labels.size() != frame.n_rows || frame.class_labels.size() != frame.n_rows)
    throw contract_error("frame label vectors do not match row count");

  ByteWriter w;
  w.bytes("EIDS", 4);
  w.u16(kFrameFormatVersion);
  w.u8(static_cast<std::uint8_t>(frame.split_tag));
  w.u64(frame.n_rows);
  w.u64(frame.n_cols);
  w.u64(frame.feature_names.size());
  for (const std::string& name : frame.feature_names) w.str(name);
  if constexpr (std::endian::native == std::endian::little) {
    w.bytes(frame.matrix.data(), frame.matrix.size() * sizeof(float));
  } else {
    for (float v : frame.matrix) w.f32(v);
  }
  w.bytes(frame.binary_labels.data(), frame.binary_labels.size());
  w.bytes(frame.class_labels.data(), frame.class_labels.size());
  w.finish_crc();
  w.write_file(path);
}

FeatureFrame load_frame(const std::string& path) {
  ByteReader r = ByteReader::from_file(path);
  char magic[4] = {};
  if (r.size() < 4) throw io_error("not a frame cache (file too short): " + path);
  r.bytes(magic, 4);
  if (std::string_view(magic, 4) != "EIDS")
    throw io_error("not a frame cache (bad magic): " + path);
  r.check_crc_trailer("frame cache");
  const std::uint16_t version = r.u16();
  if (version != kFrameFormatVersion)
    throw io_error("unsupported frame cache version " + std::to_string(version));

  FeatureFrame frame;
  frame.split_tag = static_cast<Split>(r.u8());
  frame.n_rows = r.u64();
  frame.n_cols = r.u64();
  const std::uint64_t n_names = r.u64();
  if (n_names != frame.n_cols) throw io_error("frame cache name table mismatch");
  frame.feature_names.reserve(n_names);
  for (std::uint64_t i = 0; i < n_names; ++i) frame.feature_names.push_back(r.str());
  frame.matrix.resize(frame.n_rows * frame.n_cols);
  if constexpr (std::endian::native == std::endian::little) {
    r.bytes(frame.matrix.data(), frame.matrix.size() * sizeof(float));
  } else {
    for (float& v : frame.matrix) v = r.f32();
  }
  frame.binary_labels.resize(frame.n_rows);
  frame.class_labels.resize(frame.n_rows);
  r.bytes(frame.binary_labels.data(), frame.binary_labels.size());
  r.bytes(frame.class_labels.data(), frame.class_labels.size());
  for (std::uint8_t c : frame.class_labels)
    if (c >= kClassCount) throw io_error("frame cache has out-of-range class label");
  for (std::uint8_t b : frame.binary_labels)
    if (b > 1) throw io_error("frame cache has out-of-range binary label");
  return frame;
}

}  // namespace eids::data
