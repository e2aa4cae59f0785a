#pragma once

// Synthetic fixtures: a miniature UNSW-NB15-shaped CSV generator and small
// feature frames with controlled geometry for training tests.

#include <array>
#include <cstdio>
#include <string>
#include <vector>

#include "eids/dataset.hpp"
#include "eids/rng.hpp"

namespace eids::testsupport {

inline std::string csv_header(bool with_id) {
  std::string h = with_id ? "id," : "";
  for (const std::string& name : data::feature_names()) h += name + ",";
  h += "attack_cat,label";
  return h;
}

/// Rows follow the split-file schema; two numeric columns (sttl, swin) carry
/// the class signal so tiny models can learn the labels.
inline std::string mini_unsw_csv(std::size_t n_rows, std::uint64_t seed, bool with_id = true) {
  static const std::array<const char*, 4> protos = {"tcp", "udp", "icmp", "arp"};
  static const std::array<const char*, 4> services = {"-", "http", "dns", "ftp"};
  static const std::array<const char*, 3> states = {"FIN", "CON", "INT"};

  RngStream rng(seed, "fixture/csv");
  std::string out = csv_header(with_id) + "\n";
  char buf[64];
  for (std::size_t i = 0; i < n_rows; ++i) {
    // cycle through all 10 classes first so every class is present
    const std::size_t cls = i < data::kClassCount ? i
                            : (rng.next_below(100) < 60 ? 0 : 1 + rng.next_below(9));
    const bool attack = cls != 0;
    if (with_id) {
      std::snprintf(buf, sizeof(buf), "%zu,", i + 1);
      out += buf;
    }
    for (std::size_t col = 0; col < data::kFeatureCount; ++col) {
      const std::string& name = data::feature_names()[col];
      if (name == "proto") {
        out += protos[rng.next_below(protos.size())];
      } else if (name == "service") {
        out += services[rng.next_below(services.size())];
      } else if (name == "state") {
        out += states[rng.next_below(states.size())];
      } else if (name == "sttl") {
        std::snprintf(buf, sizeof(buf), "%.0f", attack ? 254.0 - rng.next_below(4)
                                                       : 60.0 + rng.next_below(4));
        out += buf;
      } else if (name == "swin") {
        std::snprintf(buf, sizeof(buf), "%.0f", attack ? rng.next_below(16)
                                                       : 240.0 + rng.next_below(16));
        out += buf;
      } else {
        std::snprintf(buf, sizeof(buf), "%.6g", rng.uniform(0.0, 100.0));
        out += buf;
      }
      out += ",";
    }
    out += std::string(data::kClassNames[cls]);
    out += attack ? ",1" : ",0";
    out += "\n";
  }
  return out;
}

/// Linearly separable two-class frame: feature 0 carries the label with a
/// wide margin, the rest is mild noise.
inline data::FeatureFrame separable_frame(std::size_t n_rows, std::size_t width,
                                          std::uint64_t seed = 7) {
  RngStream rng(seed, "fixture/separable");
  data::FeatureFrame f;
  f.n_rows = n_rows;
  f.n_cols = width;
  f.matrix.resize(n_rows * width);
  f.binary_labels.resize(n_rows);
  f.class_labels.resize(n_rows);
  for (std::size_t c = 0; c < width; ++c) f.feature_names.push_back("f" + std::to_string(c));
  for (std::size_t r = 0; r < n_rows; ++r) {
    const bool attack = r % 2 == 1;
    f.binary_labels[r] = attack ? 1 : 0;
    f.class_labels[r] = attack ? 1 : 0;
    f.matrix[r * width + 0] = static_cast<float>(attack ? 0.9 + rng.uniform(-0.05, 0.05)
                                                        : 0.1 + rng.uniform(-0.05, 0.05));
    if (width > 1)
      f.matrix[r * width + 1] = static_cast<float>(attack ? 0.2 : 0.8);
    for (std::size_t c = 2; c < width; ++c)
      f.matrix[r * width + c] = static_cast<float>(0.5 + rng.uniform(-0.1, 0.1));
  }
  return f;
}

/// Imbalanced overlapping two-class frame (95/5 by default): the minority
/// class sits close enough to the majority that an unweighted model tends to
/// sacrifice it.
inline data::FeatureFrame imbalanced_frame(std::size_t n_rows, double minority_fraction,
                                           std::size_t width, std::uint64_t seed = 11) {
  RngStream rng(seed, "fixture/imbalanced");
  data::FeatureFrame f;
  f.n_rows = n_rows;
  f.n_cols = width;
  f.matrix.resize(n_rows * width);
  f.binary_labels.resize(n_rows);
  f.class_labels.resize(n_rows);
  for (std::size_t c = 0; c < width; ++c) f.feature_names.push_back("f" + std::to_string(c));
  const auto n_minority = static_cast<std::size_t>(minority_fraction * n_rows);
  for (std::size_t r = 0; r < n_rows; ++r) {
    const bool minority = r < n_minority;
    f.binary_labels[r] = minority ? 1 : 0;
    f.class_labels[r] = minority ? 1 : 0;
    const double center = minority ? 0.62 : 0.38;
    f.matrix[r * width + 0] = static_cast<float>(center + rng.uniform(-0.18, 0.18));
    if (width > 1)
      f.matrix[r * width + 1] = static_cast<float>(center + rng.uniform(-0.25, 0.25));
    for (std::size_t c = 2; c < width; ++c)
      f.matrix[r * width + c] = static_cast<float>(0.5 + rng.uniform(-0.05, 0.05));
  }
  return f;
}

}  // namespace eids::testsupport
