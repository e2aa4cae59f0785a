#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "eids/nn/ops.hpp"
#include "eids/rng.hpp"

namespace eids::nn {

template <typename T>
struct Param {
  std::string name;
  TensorT<T> value;
  TensorT<T> grad;

  Param(std::string n, std::vector<std::size_t> shape)
      : name(std::move(n)), value(shape), grad(std::move(shape)) {}

  void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), T(0)); }
};

/// One stage of the sequential network. forward() caches whatever the
/// matching backward() needs; backward() consumes the cache and accumulates
/// parameter gradients.
template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual TensorT<T> forward(const TensorT<T>& x, bool training, RngStream* rng) = 0;
  virtual TensorT<T> backward(const TensorT<T>& grad_out) = 0;
  virtual std::vector<Param<T>*> params() { return {}; }
  virtual const char* kind() const = 0;
};

// ---- shape adapters ---------------------------------------------------------

/// (n x d) -> (n x L x c). sequence axis mode: L = d, c = 1; flat mode keeps
/// the literal (1 x d) layout: L = 1, c = d.
template <typename T>
class SequenceReshape final : public Layer<T> {
 public:
  explicit SequenceReshape(bool features_as_steps) : features_as_steps_(features_as_steps) {}

  TensorT<T> forward(const TensorT<T>& x, bool, RngStream*) override {
    require_shape(x.rank() == 2, "SequenceReshape");
    width_ = x.dim(1);
    if (features_as_steps_) return x.reshaped({x.dim(0), width_, 1});
    return x.reshaped({x.dim(0), 1, width_});
  }

  TensorT<T> backward(const TensorT<T>& g) override {
    return g.reshaped({g.dim(0), width_});
  }

  const char* kind() const override { return "reshape"; }

 private:
  bool features_as_steps_;
  std::size_t width_ = 0;
};

/// (n x L x c) -> (n x c): keeps the final sequence position.
template <typename T>
class LastStep final : public Layer<T> {
 public:
  TensorT<T> forward(const TensorT<T>& x, bool, RngStream*) override {
    require_shape(x.rank() == 3, "LastStep");
    n_ = x.dim(0);
    len_ = x.dim(1);
    c_ = x.dim(2);
    TensorT<T> y({n_, c_});
    for (std::size_t s = 0; s < n_; ++s)
      for (std::size_t j = 0; j < c_; ++j) y(s, j) = x(s, len_ - 1, j);
    return y;
  }

  TensorT<T> backward(const TensorT<T>& g) override {
    TensorT<T> dx({n_, len_, c_});
    for (std::size_t s = 0; s < n_; ++s)
      for (std::size_t j = 0; j < c_; ++j) dx(s, len_ - 1, j) = g(s, j);
    return dx;
  }

  const char* kind() const override { return "last_step"; }

 private:
  std::size_t n_ = 0, len_ = 0, c_ = 0;
};

// ---- parameterized layers ----------------------------------------------------

template <typename T>
class DenseLayer final : public Layer<T> {
 public:
  DenseLayer(std::string name, std::size_t in, std::size_t out)
      : w_(name + ".w", {in, out}), b_(name + ".b", {out}) {}

  TensorT<T> forward(const TensorT<T>& x, bool, RngStream*) override {
    x_ = x;
    return dense_forward(x, w_.value, b_.value);
  }

  TensorT<T> backward(const TensorT<T>& g) override {
    const std::size_t n = x_.dim(0), d = x_.dim(1), m = w_.value.dim(1);
    // dW += x^T g, db += column sums, dx = g W^T
    detail::gemm_tn_add(x_.data.data(), g.data.data(), w_.grad.data.data(), n, d, m);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) b_.grad.data[j] += g(i, j);
    TensorT<T> dx({n, d});
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < d; ++k) {
        T acc = T(0);
        const T* wrow = w_.value.data.data() + k * m;
        for (std::size_t j = 0; j < m; ++j) acc += g(i, j) * wrow[j];
        dx(i, k) = acc;
      }
    }
    return dx;
  }

  std::vector<Param<T>*> params() override { return {&w_, &b_}; }
  const char* kind() const override { return "dense"; }

  Param<T> w_, b_;

 private:
  TensorT<T> x_;
};

template <typename T>
class Conv1dLayer final : public Layer<T> {
 public:
  Conv1dLayer(std::string name, std::size_t kernel, std::size_t cin, std::size_t cout)
      : kernels_(name + ".kernels", {kernel, cin, cout}), bias_(name + ".bias", {cout}) {}

  TensorT<T> forward(const TensorT<T>& x, bool, RngStream*) override {
    x_ = x;
    return conv1d_forward(x, kernels_.value, bias_.value);
  }

  TensorT<T> backward(const TensorT<T>& g) override {
    const std::size_t n = x_.dim(0), len = x_.dim(1);
    const std::size_t k = kernels_.value.dim(0), cin = kernels_.value.dim(1),
                      cout = kernels_.value.dim(2);
    const std::size_t pad = (k - 1) / 2;
    TensorT<T> dx({n, len, cin});
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t t = 0; t < len; ++t) {
        const T* grow = &g(s, t, 0);
        for (std::size_t co = 0; co < cout; ++co) bias_.grad.data[co] += grow[co];
        for (std::size_t dk = 0; dk < k; ++dk) {
          const std::ptrdiff_t src =
              static_cast<std::ptrdiff_t>(t + dk) - static_cast<std::ptrdiff_t>(pad);
          if (src < 0 || src >= static_cast<std::ptrdiff_t>(len)) continue;
          const T* xrow = &x_(s, static_cast<std::size_t>(src), 0);
          T* dxrow = &dx(s, static_cast<std::size_t>(src), 0);
          for (std::size_t ci = 0; ci < cin; ++ci) {
            const T xv = xrow[ci];
            const T* krow = &kernels_.value(dk, ci, 0);
            T* kgrow = &kernels_.grad(dk, ci, 0);
            T acc = T(0);
            for (std::size_t co = 0; co < cout; ++co) {
              kgrow[co] += xv * grow[co];
              acc += krow[co] * grow[co];
            }
            dxrow[ci] += acc;
          }
        }
      }
    }
    return dx;
  }

  std::vector<Param<T>*> params() override { return {&kernels_, &bias_}; }
  const char* kind() const override { return "conv1d"; }

  Param<T> kernels_, bias_;

 private:
  TensorT<T> x_;
};

template <typename T>
class MaxPool1dLayer final : public Layer<T> {
 public:
  TensorT<T> forward(const TensorT<T>& x, bool, RngStream*) override {
    in_shape_ = x.shape;
    return maxpool1d(x, &argmax_);
  }

  TensorT<T> backward(const TensorT<T>& g) override {
    TensorT<T> dx(in_shape_);
    for (std::size_t i = 0; i < g.size(); ++i) dx.data[argmax_[i]] += g.data[i];
    return dx;
  }

  const char* kind() const override { return "maxpool1d"; }

 private:
  std::vector<std::uint32_t> argmax_;
  std::vector<std::size_t> in_shape_;
};

template <typename T>
class ReluLayer final : public Layer<T> {
 public:
  TensorT<T> forward(const TensorT<T>& x, bool, RngStream*) override {
    x_ = x;
    return relu(x);
  }

  TensorT<T> backward(const TensorT<T>& g) override {
    TensorT<T> dx(g.shape);
    for (std::size_t i = 0; i < g.size(); ++i)
      dx.data[i] = x_.data[i] > T(0) ? g.data[i] : T(0);
    return dx;
  }

  const char* kind() const override { return "relu"; }

 private:
  TensorT<T> x_;
};

template <typename T>
class SigmoidLayer final : public Layer<T> {
 public:
  TensorT<T> forward(const TensorT<T>& x, bool, RngStream*) override {
    y_ = sigmoid(x);
    return y_;
  }

  TensorT<T> backward(const TensorT<T>& g) override {
    TensorT<T> dx(g.shape);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const T y = y_.data[i];
      dx.data[i] = g.data[i] * y * (T(1) - y);
    }
    return dx;
  }

  const char* kind() const override { return "sigmoid"; }

 private:
  TensorT<T> y_;
};

template <typename T>
class SoftmaxLayer final : public Layer<T> {
 public:
  TensorT<T> forward(const TensorT<T>& x, bool, RngStream*) override {
    y_ = softmax_rows(x);
    return y_;
  }

  TensorT<T> backward(const TensorT<T>& g) override {
    const std::size_t n = y_.dim(0), c = y_.dim(1);
    TensorT<T> dx({n, c});
    for (std::size_t i = 0; i < n; ++i) {
      T dot = T(0);
      for (std::size_t j = 0; j < c; ++j) dot += g(i, j) * y_(i, j);
      for (std::size_t j = 0; j < c; ++j) dx(i, j) = y_(i, j) * (g(i, j) - dot);
    }
    return dx;
  }

  const char* kind() const override { return "softmax"; }

 private:
  TensorT<T> y_;
};

/// Inverted dropout: training scales kept activations by 1/(1-rate) so
/// inference is a plain forward pass.
template <typename T>
class DropoutLayer final : public Layer<T> {
 public:
  explicit DropoutLayer(double rate) : rate_(rate) {
    if (rate < 0.0 || rate >= 1.0) throw contract_error("dropout rate must be in [0, 1)");
  }

  TensorT<T> forward(const TensorT<T>& x, bool training, RngStream* rng) override {
    if (!training || rate_ == 0.0) {
      mask_.data.clear();
      return x;
    }
    if (!rng) throw contract_error("dropout in training mode requires an rng stream");
    const T scale = static_cast<T>(1.0 / (1.0 - rate_));
    mask_ = TensorT<T>(x.shape);
    TensorT<T> y(x.shape);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const T m = rng->next_double() >= rate_ ? scale : T(0);
      mask_.data[i] = m;
      y.data[i] = x.data[i] * m;
    }
    return y;
  }

  TensorT<T> backward(const TensorT<T>& g) override {
    if (mask_.data.empty()) return g;  // identity pass
    TensorT<T> dx(g.shape);
    for (std::size_t i = 0; i < g.size(); ++i) dx.data[i] = g.data[i] * mask_.data[i];
    return dx;
  }

  const char* kind() const override { return "dropout"; }
  double rate() const { return rate_; }

 private:
  double rate_;
  TensorT<T> mask_;
};

// ---- BiLSTM -------------------------------------------------------------------

/// Bidirectional LSTM over (n x L x d) producing (n x L x 2h) per-position
/// concatenations; backward() runs truncation-free BPTT through both
/// directions.
template <typename T>
class BiLstmLayer final : public Layer<T> {
 public:
  BiLstmLayer(std::string name, std::size_t input, std::size_t hidden)
      : dirs_{DirParams(name + ".fwd", input, hidden), DirParams(name + ".bwd", input, hidden)},
        input_(input),
        hidden_(hidden) {}

  TensorT<T> forward(const TensorT<T>& x, bool, RngStream*) override {
    require_shape(x.rank() == 3 && x.dim(2) == input_, "BiLstmLayer");
    x_ = x;
    const std::size_t n = x.dim(0), len = x.dim(1), h = hidden_, d = input_;
    TensorT<T> y({n, len, 2 * h});
    std::vector<T> z(4 * h);
    const std::vector<T> zeros(h, T(0));

    for (int dir = 0; dir < 2; ++dir) {
      DirParams& dp = dirs_[dir];
      dp.cache.resize(len);
      for (auto& c : dp.cache) c.resize(n, h);
      // transposed weight copies make the k-outer accumulation below run on
      // contiguous rows; each z element still sums its terms in ascending k
      // order, bitwise identical to lstm_step
      std::vector<T> wt(d * 4 * h), ut(h * 4 * h);
      for (std::size_t r = 0; r < 4 * h; ++r) {
        for (std::size_t k = 0; k < d; ++k) wt[k * 4 * h + r] = dp.w.value.data[r * d + k];
        for (std::size_t k = 0; k < h; ++k) ut[k * 4 * h + r] = dp.u.value.data[r * h + k];
      }
      for (std::size_t s = 0; s < n; ++s) {
        const T* h_prev = zeros.data();
        const T* c_prev = zeros.data();
        for (std::size_t step = 0; step < len; ++step) {
          const std::size_t t = dir == 0 ? step : len - 1 - step;
          StepCache& sc = dp.cache[step];
          std::copy(dp.b.value.data.begin(), dp.b.value.data.end(), z.begin());
          const T* xrow = &x(s, t, 0);
          for (std::size_t k = 0; k < d; ++k) {
            const T xv = xrow[k];
            const T* wrow = wt.data() + k * 4 * h;
            for (std::size_t r = 0; r < 4 * h; ++r) z[r] += xv * wrow[r];
          }
          for (std::size_t k = 0; k < h; ++k) {
            const T hv = h_prev[k];
            const T* urow = ut.data() + k * 4 * h;
            for (std::size_t r = 0; r < 4 * h; ++r) z[r] += hv * urow[r];
          }
          for (std::size_t j = 0; j < h; ++j) {
            const T gi = detail::stable_sigmoid(z[j]);
            const T gf = detail::stable_sigmoid(z[h + j]);
            const T gg = std::tanh(z[2 * h + j]);
            const T go = detail::stable_sigmoid(z[3 * h + j]);
            const T c = gf * c_prev[j] + gi * gg;
            const T tc = std::tanh(c);
            const std::size_t idx = s * h + j;
            sc.i[idx] = gi;
            sc.f[idx] = gf;
            sc.g[idx] = gg;
            sc.o[idx] = go;
            sc.c[idx] = c;
            sc.tc[idx] = tc;
            const T hv = go * tc;
            sc.h[idx] = hv;
            y(s, t, static_cast<std::size_t>(dir) * h + j) = hv;
          }
          h_prev = sc.h.data() + s * h;
          c_prev = sc.c.data() + s * h;
        }
      }
    }
    check_finite(y, "bilstm_forward");
    return y;
  }

  TensorT<T> backward(const TensorT<T>& g) override {
    const std::size_t n = x_.dim(0), len = x_.dim(1), d = input_, h = hidden_;
    require_shape(g.rank() == 3 && g.dim(0) == n && g.dim(1) == len && g.dim(2) == 2 * h,
                  "BiLstmLayer::backward");
    TensorT<T> dx({n, len, d});
    std::vector<T> dh(n * h), dc(n * h), dz(n * 4 * h);
    std::vector<T> x_rows(n * d), hprev_rows(n * h);

    for (int dir = 0; dir < 2; ++dir) {
      DirParams& dp = dirs_[dir];
      std::fill(dh.begin(), dh.end(), T(0));
      std::fill(dc.begin(), dc.end(), T(0));
      for (std::size_t step = len; step-- > 0;) {
        const std::size_t t = dir == 0 ? step : len - 1 - step;
        const StepCache& sc = dp.cache[step];
        const StepCache* prev = step > 0 ? &dp.cache[step - 1] : nullptr;
        for (std::size_t s = 0; s < n; ++s) {
          for (std::size_t j = 0; j < h; ++j) {
            const std::size_t idx = s * h + j;
            const T up = g(s, t, static_cast<std::size_t>(dir) * h + j) + dh[idx];
            const T o = sc.o[idx], tc = sc.tc[idx];
            const T dct = dc[idx] + up * o * (T(1) - tc * tc);
            const T c_prev = prev ? prev->c[idx] : T(0);
            const T i = sc.i[idx], f = sc.f[idx], gg = sc.g[idx];
            dz[s * 4 * h + j] = dct * gg * i * (T(1) - i);
            dz[s * 4 * h + h + j] = dct * c_prev * f * (T(1) - f);
            dz[s * 4 * h + 2 * h + j] = dct * i * (T(1) - gg * gg);
            dz[s * 4 * h + 3 * h + j] = up * tc * o * (T(1) - o);
            dc[idx] = dct * f;
          }
        }
        // parameter gradients: dW += dz^T x_t, dU += dz^T h_prev, db += sum dz
        for (std::size_t s = 0; s < n; ++s)
          for (std::size_t k = 0; k < d; ++k) x_rows[s * d + k] = x_(s, t, k);
        detail::gemm_tn_add(dz.data(), x_rows.data(), dp.w.grad.data.data(), n, 4 * h, d);
        if (prev) {
          detail::gemm_tn_add(dz.data(), prev->h.data(), dp.u.grad.data.data(), n, 4 * h, h);
        }
        for (std::size_t s = 0; s < n; ++s)
          for (std::size_t r = 0; r < 4 * h; ++r) dp.b.grad.data[r] += dz[s * 4 * h + r];
        // recurrent and input gradients: dh_prev = dz U, dx_t += dz W
        std::fill(dh.begin(), dh.end(), T(0));
        detail::gemm_nn_add(dz.data(), dp.u.value.data.data(), dh.data(), n, 4 * h, h);
        for (std::size_t s = 0; s < n; ++s) {
          T* dxrow = &dx(s, t, 0);
          const T* dzrow = dz.data() + s * 4 * h;
          const T* w = dp.w.value.data.data();
          for (std::size_t r = 0; r < 4 * h; ++r) {
            const T dv = dzrow[r];
            const T* wrow = w + r * d;
            for (std::size_t k = 0; k < d; ++k) dxrow[k] += dv * wrow[k];
          }
        }
      }
    }
    return dx;
  }

  std::vector<Param<T>*> params() override {
    return {&dirs_[0].w, &dirs_[0].u, &dirs_[0].b, &dirs_[1].w, &dirs_[1].u, &dirs_[1].b};
  }
  const char* kind() const override { return "bilstm"; }

  std::size_t hidden() const { return hidden_; }

  LstmCellParams<T> direction_params(int dir) const { return dirs_[dir].cell(); }

 private:
  struct StepCache {
    std::vector<T> i, f, g, o, c, tc, h;
    void resize(std::size_t n, std::size_t hidden) {
      const std::size_t m = n * hidden;
      i.assign(m, T(0));
      f.assign(m, T(0));
      g.assign(m, T(0));
      o.assign(m, T(0));
      c.assign(m, T(0));
      tc.assign(m, T(0));
      h.assign(m, T(0));
    }
  };

  struct DirParams {
    Param<T> w, u, b;
    std::vector<StepCache> cache;

    DirParams(const std::string& name, std::size_t input, std::size_t hidden)
        : w(name + ".w", {4 * hidden, input}),
          u(name + ".u", {4 * hidden, hidden}),
          b(name + ".b", {4 * hidden}) {}

    LstmCellParams<T> cell() const { return LstmCellParams<T>{w.value, u.value, b.value}; }
  };

  DirParams dirs_[2];
  TensorT<T> x_;
  std::size_t input_, hidden_;
};

// ---- network -------------------------------------------------------------------

/// Record of the live forward pass; backward() requires one and consumes it.
struct GradientTape {
  bool recorded = false;
  std::size_t batch = 0;
};

template <typename T>
class Network {
 public:
  void add(std::unique_ptr<Layer<T>> layer) { layers_.push_back(std::move(layer)); }

  TensorT<T> forward(const TensorT<T>& x, bool training = false, RngStream* rng = nullptr) {
    TensorT<T> cur = x;
    for (auto& layer : layers_) {
      cur = layer->forward(cur, training, rng);
      check_finite(cur, layer->kind());
    }
    tape_.recorded = true;
    tape_.batch = x.dim(0);
    return cur;
  }

  /// Backpropagates d(loss)/d(output), accumulating into parameter grads.
  void backward(const TensorT<T>& loss_grad) {
    if (!tape_.recorded) throw contract_error("backward called before forward");
    TensorT<T> g = loss_grad;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
      g = (*it)->backward(g);
      check_finite(g, (*it)->kind());
    }
    tape_.recorded = false;
  }

  std::vector<Param<T>*> parameters() {
    std::vector<Param<T>*> out;
    for (auto& layer : layers_)
      for (Param<T>* p : layer->params()) out.push_back(p);
    return out;
  }

  void zero_grads() {
    for (Param<T>* p : parameters()) p->zero_grad();
  }

  std::size_t param_count() {
    std::size_t n = 0;
    for (Param<T>* p : parameters()) n += p->value.size();
    return n;
  }

  const GradientTape& tape() const { return tape_; }
  std::vector<std::unique_ptr<Layer<T>>>& layers() { return layers_; }

 private:
  std::vector<std::unique_ptr<Layer<T>>> layers_;
  GradientTape tape_;
};

}  // namespace eids::nn
