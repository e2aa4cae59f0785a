#include <benchmark/benchmark.h>

#include "eids/baselines.hpp"
#include "eids/chi2.hpp"
#include "eids/model.hpp"
#include "eids/nn/ops.hpp"
#include "eids/rng.hpp"

using namespace eids;

namespace {

nn::Tensor random_tensor(std::vector<std::size_t> shape, std::uint64_t seed) {
  RngStream rng(seed, "bench");
  nn::Tensor t(std::move(shape));
  for (auto& v : t.data) v = static_cast<float>(rng.uniform(0.0, 1.0));
  return t;
}

data::FeatureFrame random_frame(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  RngStream rng(seed, "bench/frame");
  data::FeatureFrame f;
  f.n_rows = rows;
  f.n_cols = cols;
  f.matrix.resize(rows * cols);
  for (auto& v : f.matrix) v = static_cast<float>(rng.uniform(0.0, 1.0));
  f.binary_labels.resize(rows);
  f.class_labels.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    f.class_labels[r] = static_cast<std::uint8_t>(rng.next_below(10));
    f.binary_labels[r] = f.class_labels[r] == 0 ? 0 : 1;
  }
  for (std::size_t c = 0; c < cols; ++c) f.feature_names.push_back("f" + std::to_string(c));
  return f;
}

void BM_DenseForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto x = random_tensor({n, 64}, 1);
  auto w = random_tensor({64, 64}, 2);
  auto b = random_tensor({64}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(nn::dense_forward(x, w, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_DenseForward)->Arg(64)->Arg(256)->Arg(1024);

void BM_Conv1dForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto x = random_tensor({n, 20, 1}, 4);
  auto k = random_tensor({3, 1, 32}, 5);
  auto b = random_tensor({32}, 6);
  for (auto _ : state) benchmark::DoNotOptimize(nn::conv1d_forward(x, k, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Conv1dForward)->Arg(64)->Arg(256)->Arg(1024);

void BM_BilstmForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  nn::LstmCellParams<float> fwd{random_tensor({128, 32}, 7), random_tensor({128, 32}, 8),
                                random_tensor({128}, 9)};
  nn::LstmCellParams<float> bwd{random_tensor({128, 32}, 10), random_tensor({128, 32}, 11),
                                random_tensor({128}, 12)};
  auto x = random_tensor({n, 10, 32}, 13);
  for (auto _ : state) benchmark::DoNotOptimize(nn::bilstm_forward(x, fwd, bwd));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_BilstmForward)->Arg(32)->Arg(128);

void BM_ModelPredict(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  auto m = model::build_model(model::ArchitectureSpec{}, 42);
  auto frame = random_frame(rows, 20, 14);
  for (auto _ : state) benchmark::DoNotOptimize(model::predict(m, frame));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows));
}
BENCHMARK(BM_ModelPredict)->Arg(1024)->Arg(4096);

void BM_Chi2Scores(benchmark::State& state) {
  auto frame = random_frame(static_cast<std::size_t>(state.range(0)), 42, 15);
  for (auto _ : state)
    benchmark::DoNotOptimize(chi2::chi2_scores(frame, chi2::LabelView::multiclass));
}
BENCHMARK(BM_Chi2Scores)->Arg(4096)->Arg(16384);

void BM_KnnPredict(benchmark::State& state) {
  auto train = random_frame(static_cast<std::size_t>(state.range(0)), 20, 16);
  auto queries = random_frame(256, 20, 17);
  auto m = baselines::knn_fit(train, 5);
  for (auto _ : state)
    benchmark::DoNotOptimize(baselines::knn_predict(m, queries, model::Task::binary, 1));
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_KnnPredict)->Arg(4096)->Arg(16384);

}  // namespace
