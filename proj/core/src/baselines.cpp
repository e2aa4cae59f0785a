#include "eids/baselines.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>
#include <utility>

#include "eids/nn/adam.hpp"
#include "eids/nn/loss.hpp"
#include "eids/nn/ops.hpp"
#include "eids/rng.hpp"

namespace eids::baselines {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

LogisticModel logistic_train(const data::FeatureFrame& frame, model::Task task,
                             const LogisticConfig& cfg) {
  if (frame.n_rows == 0) throw contract_error("logistic_train requires a nonempty frame");
  if (cfg.lr <= 0.0 || cfg.batch_size == 0)
    throw config_error("logistic training needs positive lr and batch size");

  const std::size_t d = frame.n_cols;
  const std::size_t c = task == model::Task::binary ? 1 : data::kClassCount;

  LogisticModel m;
  m.task = task;
  m.w = nn::Tensor({d, c});
  m.b = nn::Tensor({c});
  m.config = cfg;

  nn::Tensor mw({d, c}), vw({d, c}), mb({c}), vb({c});
  nn::AdamConfig adam;
  adam.lr = cfg.lr;

  std::vector<std::size_t> order(frame.n_rows);
  std::iota(order.begin(), order.end(), 0);
  RngStream rng(cfg.seed, "logistic/shuffle");

  std::uint64_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    deterministic_shuffle(order, rng);
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(begin + cfg.batch_size, order.size());
      const std::size_t n = end - begin;
      nn::Tensor x({n, d});
      std::vector<int> y(n);
      for (std::size_t i = 0; i < n; ++i) {
        const float* src = frame.row(order[begin + i]);
        std::copy(src, src + d, x.data.data() + i * d);
        y[i] = task == model::Task::binary ? frame.binary_labels[order[begin + i]]
                                           : frame.class_labels[order[begin + i]];
      }
      nn::Tensor z = nn::dense_forward(x, m.w, m.b);
      nn::Tensor p = task == model::Task::binary ? nn::sigmoid(z) : nn::softmax_rows(z);

      // closed-form gradient of mean cross-entropy w.r.t. the logits:
      // dz = (p - onehot(y)) / n
      nn::Tensor dz({n, c});
      const float inv_n = 1.0f / static_cast<float>(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (c == 1) {
          dz(i, 0) = (p(i, 0) - static_cast<float>(y[i])) * inv_n;
        } else {
          for (std::size_t j = 0; j < c; ++j)
            dz(i, j) = (p(i, j) - (static_cast<int>(j) == y[i] ? 1.0f : 0.0f)) * inv_n;
        }
      }
      nn::Tensor gw({d, c}), gb({c});
      nn::detail::gemm_tn_add(x.data.data(), dz.data.data(), gw.data.data(), n, d, c);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) gb.data[j] += dz(i, j);

      ++step;
      nn::adam_update(m.w, gw, mw, vw, step, adam);
      nn::adam_update(m.b, gb, mb, vb, step, adam);
    }
  }
  m.trained = cfg.epochs > 0;
  return m;
}

model::Prediction logistic_predict(const LogisticModel& m, const data::FeatureFrame& frame) {
  if (frame.n_cols != m.w.dim(0))
    throw contract_error("frame width does not match the logistic model");
  if (frame.n_rows == 0) throw contract_error("cannot predict on an empty frame");

  model::Prediction out;
  const double t0 = now_seconds();
  nn::Tensor x({frame.n_rows, frame.n_cols});
  std::copy(frame.matrix.begin(), frame.matrix.end(), x.data.begin());
  nn::Tensor z = nn::dense_forward(x, m.w, m.b);
  out.probs = m.task == model::Task::binary ? nn::sigmoid(z) : nn::softmax_rows(z);
  out.seconds = now_seconds() - t0;
  return out;
}

KnnModel knn_fit(const data::FeatureFrame& frame, std::size_t k) {
  if (frame.n_rows == 0) throw contract_error("knn_fit requires a nonempty frame");
  if (k < 1 || k > frame.n_rows)
    throw contract_error("k must be in [1, n_train], got " + std::to_string(k));
  KnnModel m;
  m.k = k;
  m.n_cols = frame.n_cols;
  m.matrix = frame.matrix;
  m.binary_labels = frame.binary_labels;
  m.class_labels = frame.class_labels;
  return m;
}

namespace {

void knn_scan_range(const KnnModel& m, const data::FeatureFrame& queries, model::Task task,
                    std::size_t begin, std::size_t end, std::vector<std::uint8_t>& out) {
  const std::size_t n_train = m.n_rows(), d = m.n_cols;
  const std::size_t n_classes = task == model::Task::binary ? 2 : data::kClassCount;
  const std::vector<std::uint8_t>& labels =
      task == model::Task::binary ? m.binary_labels : m.class_labels;

  // (distance^2, train row) pairs; lexicographic order makes ties stable
  std::vector<std::pair<double, std::size_t>> best;
  for (std::size_t q = begin; q < end; ++q) {
    const float* qrow = queries.row(q);
    best.clear();
    best.reserve(m.k + 1);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < n_train; ++r) {
      const float* trow = m.matrix.data() + r * d;
      double dist = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = static_cast<double>(qrow[j]) - static_cast<double>(trow[j]);
        dist += diff * diff;
      }
      if (best.size() == m.k && dist >= worst) continue;
      const std::pair<double, std::size_t> cand{dist, r};
      auto pos = std::lower_bound(best.begin(), best.end(), cand);
      best.insert(pos, cand);
      if (best.size() > m.k) best.pop_back();
      worst = best.back().first;
    }
    std::array<std::size_t, data::kClassCount> votes{};
    for (const auto& [dist, row] : best) ++votes[labels[row]];
    std::size_t winner = 0;
    for (std::size_t cls = 1; cls < n_classes; ++cls)
      if (votes[cls] > votes[winner]) winner = cls;  // ties keep the smaller id
    out[q] = static_cast<std::uint8_t>(winner);
  }
}

}  // namespace

KnnResult knn_predict(const KnnModel& m, const data::FeatureFrame& queries, model::Task task,
                      std::size_t threads) {
  if (m.n_rows() == 0) throw contract_error("knn model has no training rows");
  if (queries.n_cols != m.n_cols)
    throw contract_error("query width does not match the knn training matrix");

  KnnResult result;
  result.labels.assign(queries.n_rows, 0);
  if (threads == 0) threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(1, queries.n_rows));

  const double t0 = now_seconds();
  if (threads <= 1 || queries.n_rows < 2) {
    knn_scan_range(m, queries, task, 0, queries.n_rows, result.labels);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (queries.n_rows + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(begin + chunk, queries.n_rows);
      if (begin >= end) break;
      pool.emplace_back([&, begin, end] {
        knn_scan_range(m, queries, task, begin, end, result.labels);
      });
    }
    for (std::thread& th : pool) th.join();
  }
  result.seconds = now_seconds() - t0;
  return result;
}

}  // namespace eids::baselines
