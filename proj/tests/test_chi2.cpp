#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "eids/chi2.hpp"
#include "oracles.hpp"

using namespace eids;

namespace {

data::FeatureFrame frame_from(const std::vector<std::vector<float>>& cols,
                              const std::vector<std::uint8_t>& labels) {
  data::FeatureFrame f;
  f.n_rows = labels.size();
  f.n_cols = cols.size();
  f.matrix.resize(f.n_rows * f.n_cols);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    for (std::size_t r = 0; r < labels.size(); ++r) f.matrix[r * f.n_cols + c] = cols[c][r];
    f.feature_names.push_back("f" + std::to_string(c));
  }
  f.binary_labels = labels;
  f.class_labels = labels;
  return f;
}

}  // namespace

TEST_CASE("chi2_scores on hand-checked fixtures") {
  SUBCASE("perfectly class-aligned feature") {
    // observed per class (0, 2); expected (1, 1) -> (0-1)^2/1 + (2-1)^2/1 = 2
    auto f = frame_from({{1, 1, 0, 0}}, {1, 1, 0, 0});
    auto scores = chi2::chi2_scores(f, chi2::LabelView::binary);
    CHECK(scores[0].score == doctest::Approx(2.0).epsilon(1e-12));
  }

  SUBCASE("class-independent feature scores 0") {
    auto f = frame_from({{1, 1, 1, 1}}, {1, 1, 0, 0});
    auto scores = chi2::chi2_scores(f, chi2::LabelView::binary);
    CHECK(scores[0].score == 0.0);
  }

  SUBCASE("all-zero feature scores 0") {
    auto f = frame_from({{0, 0, 0, 0}}, {1, 1, 0, 0});
    auto scores = chi2::chi2_scores(f, chi2::LabelView::binary);
    CHECK(scores[0].score == 0.0);
  }

  SUBCASE("negative feature value raises and names the feature") {
    auto f = frame_from({{1, -1, 0, 0}}, {1, 1, 0, 0});
    try {
      chi2::chi2_scores(f, chi2::LabelView::binary);
      FAIL("expected contract_error");
    } catch (const contract_error& e) {
      CHECK(std::string(e.what()).find("f0") != std::string::npos);
    }
  }
}

TEST_CASE("chi2 oracle equivalence on random frames") {
  RngStream rng(101);
  for (int iter = 0; iter < 100; ++iter) {
    auto f = testsupport::random_grid_frame(rng);
    for (auto view : {chi2::LabelView::binary, chi2::LabelView::multiclass}) {
      const auto& labels =
          view == chi2::LabelView::binary ? f.binary_labels : f.class_labels;
      const std::size_t n_classes = view == chi2::LabelView::binary ? 2 : data::kClassCount;
      auto scores = chi2::chi2_scores(f, view);
      auto expect = testsupport::chi2_oracle(f, labels, n_classes);
      for (std::size_t c = 0; c < f.n_cols; ++c) {
        const double denom = std::max({std::abs(expect[c]), std::abs(scores[c].score), 1e-30});
        CHECK(std::abs(scores[c].score - expect[c]) / denom < 1e-9);
      }
    }
  }
}

TEST_CASE("chi2 invariances") {
  RngStream rng(202);
  auto f = testsupport::random_grid_frame(rng, 120, 6, 4);
  auto base = chi2::chi2_scores(f, chi2::LabelView::multiclass);

  SUBCASE("relabeling classes by a permutation leaves scores unchanged") {
    // swap labels through a fixed permutation of the 10 ids
    std::array<std::uint8_t, 10> perm = {3, 7, 1, 9, 0, 5, 2, 8, 6, 4};
    data::FeatureFrame g = f;
    for (auto& c : g.class_labels) c = perm[c];
    auto scores = chi2::chi2_scores(g, chi2::LabelView::multiclass);
    for (std::size_t c = 0; c < f.n_cols; ++c) CHECK(scores[c].score == base[c].score);
  }

  SUBCASE("shuffling rows leaves scores unchanged") {
    std::vector<std::size_t> order(f.n_rows);
    std::iota(order.begin(), order.end(), 0);
    RngStream shuffle_rng(7);
    deterministic_shuffle(order, shuffle_rng);
    data::FeatureFrame g = f;
    for (std::size_t r = 0; r < f.n_rows; ++r) {
      for (std::size_t c = 0; c < f.n_cols; ++c)
        g.matrix[r * f.n_cols + c] = f.at(order[r], c);
      g.class_labels[r] = f.class_labels[order[r]];
      g.binary_labels[r] = f.binary_labels[order[r]];
    }
    auto scores = chi2::chi2_scores(g, chi2::LabelView::multiclass);
    for (std::size_t c = 0; c < f.n_cols; ++c) CHECK(scores[c].score == base[c].score);
  }

  SUBCASE("scaling one column by lambda scales its score by lambda") {
    data::FeatureFrame g = f;
    for (std::size_t r = 0; r < f.n_rows; ++r) g.matrix[r * f.n_cols] *= 2.0f;
    auto scores = chi2::chi2_scores(g, chi2::LabelView::multiclass);
    CHECK(scores[0].score == doctest::Approx(2.0 * base[0].score).epsilon(1e-12));
    for (std::size_t c = 1; c < f.n_cols; ++c) CHECK(scores[c].score == base[c].score);
  }

  SUBCASE("scoring is deterministic") {
    auto again = chi2::chi2_scores(f, chi2::LabelView::multiclass);
    for (std::size_t c = 0; c < f.n_cols; ++c) CHECK(again[c].score == base[c].score);
  }
}

TEST_CASE("select_top_k") {
  std::vector<chi2::FeatureScore> scores = {{0, "a", 5.0}, {1, "b", 3.0}, {2, "c", 9.0}};

  SUBCASE("keeps the k best, mask ordered by column") {
    auto mask = chi2::select_top_k(scores, 2);
    CHECK(mask.indices == std::vector<std::size_t>{0, 2});
    CHECK(mask.names == std::vector<std::string>{"a", "c"});
  }

  SUBCASE("ties break toward the earlier column") {
    std::vector<chi2::FeatureScore> tied = {{0, "a", 5.0}, {1, "b", 5.0}};
    auto mask = chi2::select_top_k(tied, 1);
    CHECK(mask.names == std::vector<std::string>{"a"});
  }

  SUBCASE("k equal to the feature count is the identity mask") {
    auto mask = chi2::select_top_k(scores, 3);
    CHECK(mask.indices == std::vector<std::size_t>{0, 1, 2});
  }

  SUBCASE("k out of range raises") {
    CHECK_THROWS_AS(chi2::select_top_k(scores, 0), contract_error);
    CHECK_THROWS_AS(chi2::select_top_k(scores, 4), contract_error);
  }

  SUBCASE("selection is stable across calls") {
    auto a = chi2::select_top_k(scores, 2);
    auto b = chi2::select_top_k(scores, 2);
    CHECK(a.indices == b.indices);
    CHECK(a.names == b.names);
  }
}

TEST_CASE("apply_mask") {
  RngStream rng(303);
  auto f = testsupport::random_grid_frame(rng, 50, 8, 3);
  // force a deterministic shape for the subcases below
  while (f.n_cols < 4) f = testsupport::random_grid_frame(rng, 50, 8, 3);

  SUBCASE("identity mask leaves the frame unchanged") {
    chi2::SelectionMask mask;
    for (std::size_t c = 0; c < f.n_cols; ++c) {
      mask.indices.push_back(c);
      mask.names.push_back(f.feature_names[c]);
    }
    auto g = chi2::apply_mask(f, mask);
    CHECK(g.matrix == f.matrix);
    CHECK(g.feature_names == f.feature_names);
  }

  SUBCASE("restricts and orders columns") {
    chi2::SelectionMask mask;
    mask.indices = {1, 3};
    mask.names = {f.feature_names[1], f.feature_names[3]};
    auto g = chi2::apply_mask(f, mask);
    CHECK(g.n_cols == 2);
    for (std::size_t r = 0; r < f.n_rows; ++r) {
      CHECK(g.at(r, 0) == f.at(r, 1));
      CHECK(g.at(r, 1) == f.at(r, 3));
    }
    CHECK(g.binary_labels == f.binary_labels);
    CHECK(g.class_labels == f.class_labels);
  }

  SUBCASE("empty mask raises") {
    chi2::SelectionMask mask;
    CHECK_THROWS_AS(chi2::apply_mask(f, mask), contract_error);
  }

  SUBCASE("out-of-range index raises") {
    chi2::SelectionMask mask;
    mask.indices = {f.n_cols + 7};
    mask.names = {"ghost"};
    CHECK_THROWS_AS(chi2::apply_mask(f, mask), contract_error);
  }
}

TEST_CASE("selection over a wide frame mirrors the modeling pipeline") {
  // 39 numeric-style columns reduced to 20, as the training path does
  RngStream rng(404);
  data::FeatureFrame f;
  f.n_rows = 64;
  f.n_cols = 39;
  f.matrix.resize(f.n_rows * f.n_cols);
  for (auto& v : f.matrix) v = static_cast<float>(rng.next_below(1025)) / 1024.0f;
  f.binary_labels.resize(f.n_rows);
  f.class_labels.resize(f.n_rows);
  for (std::size_t r = 0; r < f.n_rows; ++r) {
    f.class_labels[r] = static_cast<std::uint8_t>(rng.next_below(4));
    f.binary_labels[r] = f.class_labels[r] == 0 ? 0 : 1;
  }
  for (std::size_t c = 0; c < f.n_cols; ++c) f.feature_names.push_back("f" + std::to_string(c));

  auto scores = chi2::chi2_scores(f, chi2::LabelView::multiclass);
  auto mask = chi2::select_top_k(scores, 20);
  auto g = chi2::apply_mask(f, mask);
  CHECK(g.n_cols == 20);
  CHECK(std::is_sorted(mask.indices.begin(), mask.indices.end()));
}

TEST_CASE("score_report") {
  SUBCASE("rows are sorted by descending score in scientific notation") {
    std::vector<chi2::FeatureScore> scores = {
        {0, "swin", 1.72e6}, {1, "rate", 2.48e4}, {2, "sttl", 1.19e6}};
    const std::string csv = chi2::score_report(scores);
    CHECK(csv == "rank,feature,score\n"
                 "1,swin,1.72e+06\n"
                 "2,sttl,1.19e+06\n"
                 "3,rate,2.48e+04\n");
  }

  SUBCASE("empty score list renders only the header") {
    CHECK(chi2::score_report({}) == "rank,feature,score\n");
  }
}

TEST_CASE("drop_categorical removes proto/service/state entries") {
  std::vector<chi2::FeatureScore> scores;
  for (std::size_t c = 0; c < data::kFeatureCount; ++c)
    scores.push_back({c, data::feature_names()[c], 1.0});
  auto numeric = chi2::drop_categorical(scores);
  CHECK(numeric.size() == data::kFeatureCount - 3);
  for (const auto& s : numeric) {
    CHECK(s.feature != "proto");
    CHECK(s.feature != "service");
    CHECK(s.feature != "state");
  }
}

TEST_CASE("selection mask round trip") {
  chi2::SelectionMask mask;
  mask.indices = {2, 5, 9};
  mask.names = {"a", "b", "c"};
  auto back = chi2::SelectionMask::from_json_string(mask.to_json_string());
  CHECK(back.indices == mask.indices);
  CHECK(back.names == mask.names);
  CHECK_THROWS_AS(chi2::SelectionMask::from_json_string("{}"), io_error);
}
