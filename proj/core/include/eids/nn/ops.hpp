#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "eids/tensor.hpp"

namespace eids::nn {

namespace detail {

// C (n x m) += A (n x k) * B (k x m). ikj order: every C element accumulates
// its k-terms in ascending order, so results are bitwise identical to the
// scalar dot product regardless of vectorization.
template <typename T>
void gemm_nn_add(const T* a, const T* b, T* c, std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const T* arow = a + i * k;
    T* crow = c + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = arow[p];
      const T* brow = b + p * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

// C (k x m) += A^T * B with A (n x k), B (n x m).
template <typename T>
void gemm_tn_add(const T* a, const T* b, T* c, std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const T* arow = a + i * k;
    const T* brow = b + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = arow[p];
      T* crow = c + p * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename T>
T stable_sigmoid(T z) {
  if (z >= T(0)) {
    const T e = std::exp(-z);
    return T(1) / (T(1) + e);
  }
  const T e = std::exp(z);
  return e / (T(1) + e);
}

}  // namespace detail

// ---- dense -----------------------------------------------------------------

/// y = x W + b with x (n x d), W (d x m), b (m).
template <typename T>
TensorT<T> dense_forward(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b) {
  require_shape(x.rank() == 2 && w.rank() == 2 && b.rank() == 1, "dense_forward");
  require_shape(x.dim(1) == w.dim(0) && w.dim(1) == b.dim(0), "dense_forward");
  const std::size_t n = x.dim(0), m = w.dim(1);
  TensorT<T> y({n, m});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) y(i, j) = b.data[j];
  detail::gemm_nn_add(x.data.data(), w.data.data(), y.data.data(), n, x.dim(1), m);
  check_finite(y, "dense_forward");
  return y;
}

// ---- conv1d ----------------------------------------------------------------

/// Length-preserving 1-D cross-correlation. x (n x L x c_in),
/// kernels (k x c_in x c_out) with odd k, bias (c_out); zero padding
/// (k-1)/2 on each side, stride 1.
template <typename T>
TensorT<T> conv1d_forward(const TensorT<T>& x, const TensorT<T>& kernels, const TensorT<T>& bias) {
  require_shape(x.rank() == 3 && kernels.rank() == 3 && bias.rank() == 1, "conv1d_forward");
  const std::size_t k = kernels.dim(0), cin = kernels.dim(1), cout = kernels.dim(2);
  if (k % 2 == 0) throw contract_error("conv1d kernel width must be odd");
  require_shape(x.dim(2) == cin && bias.dim(0) == cout, "conv1d_forward");
  const std::size_t n = x.dim(0), len = x.dim(1);
  const std::size_t pad = (k - 1) / 2;

  TensorT<T> y({n, len, cout});
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < len; ++t) {
      T* yrow = &y(s, t, 0);
      for (std::size_t co = 0; co < cout; ++co) yrow[co] = bias.data[co];
      for (std::size_t dk = 0; dk < k; ++dk) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + dk) - static_cast<std::ptrdiff_t>(pad);
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(len)) continue;
        const T* xrow = &x(s, static_cast<std::size_t>(src), 0);
        const T* krow = &kernels(dk, 0, 0);
        for (std::size_t ci = 0; ci < cin; ++ci) {
          const T xv = xrow[ci];
          const T* kk = krow + ci * cout;
          for (std::size_t co = 0; co < cout; ++co) yrow[co] += xv * kk[co];
        }
      }
    }
  }
  check_finite(y, "conv1d_forward");
  return y;
}

// ---- maxpool ---------------------------------------------------------------

/// Window 2, stride 2 max pooling over the length axis; an odd trailing
/// element is dropped. Optionally records the flat source index of each
/// maximum (ties take the earlier element) for the backward pass.
template <typename T>
TensorT<T> maxpool1d(const TensorT<T>& x, std::vector<std::uint32_t>* argmax = nullptr) {
  require_shape(x.rank() == 3, "maxpool1d");
  const std::size_t n = x.dim(0), len = x.dim(1), c = x.dim(2);
  if (len < 2) throw contract_error("maxpool1d requires sequence length >= 2");
  const std::size_t out_len = len / 2;
  TensorT<T> y({n, out_len, c});
  if (argmax) argmax->assign(y.size(), 0);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < out_len; ++t) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        const std::size_t i0 = (s * len + 2 * t) * c + ch;
        const std::size_t i1 = i0 + c;
        const bool second = x.data[i1] > x.data[i0];
        const std::size_t src = second ? i1 : i0;
        const std::size_t dst = (s * out_len + t) * c + ch;
        y.data[dst] = x.data[src];
        if (argmax) (*argmax)[dst] = static_cast<std::uint32_t>(src);
      }
    }
  }
  check_finite(y, "maxpool1d");
  return y;
}

// ---- activations -------------------------------------------------------------

template <typename T>
TensorT<T> relu(const TensorT<T>& x) {
  TensorT<T> y = x;
  for (T& v : y.data) v = v > T(0) ? v : T(0);
  return y;
}

template <typename T>
TensorT<T> sigmoid(const TensorT<T>& x) {
  TensorT<T> y = x;
  for (T& v : y.data) v = detail::stable_sigmoid(v);
  check_finite(y, "sigmoid");
  return y;
}

template <typename T>
TensorT<T> tanh_act(const TensorT<T>& x) {
  TensorT<T> y = x;
  for (T& v : y.data) v = std::tanh(v);
  return y;
}

/// Row-wise softmax with max-subtraction; rows sum to 1 within 1e-6.
template <typename T>
TensorT<T> softmax_rows(const TensorT<T>& x) {
  require_shape(x.rank() == 2, "softmax_rows");
  const std::size_t n = x.dim(0), c = x.dim(1);
  TensorT<T> y({n, c});
  for (std::size_t i = 0; i < n; ++i) {
    T mx = x(i, 0);
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, x(i, j));
    T sum = T(0);
    for (std::size_t j = 0; j < c; ++j) {
      const T e = std::exp(x(i, j) - mx);
      y(i, j) = e;
      sum += e;
    }
    for (std::size_t j = 0; j < c; ++j) y(i, j) /= sum;
  }
  check_finite(y, "softmax_rows");
  return y;
}

// ---- LSTM --------------------------------------------------------------------

/// Gate parameters of one LSTM direction. Row blocks of w/u/b are ordered
/// input, forget, candidate, output.
template <typename T>
struct LstmCellParams {
  TensorT<T> w;  // (4h x d)
  TensorT<T> u;  // (4h x h)
  TensorT<T> b;  // (4h)

  std::size_t hidden() const { return b.dim(0) / 4; }
  std::size_t input() const { return w.dim(1); }

  void validate() const {
    require_shape(w.rank() == 2 && u.rank() == 2 && b.rank() == 1, "LstmCellParams");
    const std::size_t h4 = b.dim(0);
    require_shape(h4 % 4 == 0 && w.dim(0) == h4 && u.dim(0) == h4 && u.dim(1) == h4 / 4,
                  "LstmCellParams");
  }
};

template <typename T>
struct LstmState {
  std::vector<T> h, c;
};

template <typename T>
struct LstmGates {
  std::vector<T> i, f, g, o;
};

namespace detail {

// z = b + W x + U h, accumulated in that order so the batched layer and the
// single-step function agree bitwise.
template <typename T>
void lstm_preact(const LstmCellParams<T>& p, const T* x, const T* h, T* z) {
  const std::size_t rows = p.b.dim(0), d = p.w.dim(1), hs = p.u.dim(1);
  for (std::size_t r = 0; r < rows; ++r) {
    T acc = p.b.data[r];
    const T* wrow = p.w.data.data() + r * d;
    for (std::size_t k = 0; k < d; ++k) acc += wrow[k] * x[k];
    const T* urow = p.u.data.data() + r * hs;
    for (std::size_t k = 0; k < hs; ++k) acc += urow[k] * h[k];
    z[r] = acc;
  }
}

}  // namespace detail

/// One LSTM step: i,f,o = sigmoid, g = tanh, c' = f*c + i*g, h' = o*tanh(c').
template <typename T>
LstmState<T> lstm_step(const std::vector<T>& x_t, const LstmState<T>& prev,
                       const LstmCellParams<T>& p, LstmGates<T>* gates = nullptr) {
  p.validate();
  const std::size_t h = p.hidden();
  require_shape(x_t.size() == p.input() && prev.h.size() == h && prev.c.size() == h, "lstm_step");

  std::vector<T> z(4 * h);
  detail::lstm_preact(p, x_t.data(), prev.h.data(), z.data());

  LstmState<T> next;
  next.h.resize(h);
  next.c.resize(h);
  if (gates) {
    gates->i.resize(h);
    gates->f.resize(h);
    gates->g.resize(h);
    gates->o.resize(h);
  }
  for (std::size_t j = 0; j < h; ++j) {
    const T gi = detail::stable_sigmoid(z[j]);
    const T gf = detail::stable_sigmoid(z[h + j]);
    const T gg = std::tanh(z[2 * h + j]);
    const T go = detail::stable_sigmoid(z[3 * h + j]);
    const T c = gf * prev.c[j] + gi * gg;
    next.c[j] = c;
    next.h[j] = go * std::tanh(c);
    if (!std::isfinite(next.h[j]) || !std::isfinite(c))
      throw contract_error("non-finite value produced by lstm_step");
    if (gates) {
      gates->i[j] = gi;
      gates->f[j] = gf;
      gates->g[j] = gg;
      gates->o[j] = go;
    }
  }
  return next;
}

/// Full bidirectional pass over x (n x L x d); position t of the output holds
/// the concatenation [h_t(forward); h_t(backward)], both directions starting
/// from zero states, so the result is (n x L x 2h).
template <typename T>
TensorT<T> bilstm_forward(const TensorT<T>& x, const LstmCellParams<T>& fwd,
                          const LstmCellParams<T>& bwd) {
  require_shape(x.rank() == 3, "bilstm_forward");
  fwd.validate();
  bwd.validate();
  require_shape(fwd.hidden() == bwd.hidden(), "bilstm_forward");
  require_shape(fwd.input() == x.dim(2) && bwd.input() == x.dim(2), "bilstm_forward");

  const std::size_t n = x.dim(0), len = x.dim(1), d = x.dim(2), h = fwd.hidden();
  TensorT<T> y({n, len, 2 * h});
  std::vector<T> x_t(d);
  for (std::size_t s = 0; s < n; ++s) {
    for (int dir = 0; dir < 2; ++dir) {
      const LstmCellParams<T>& p = dir == 0 ? fwd : bwd;
      LstmState<T> state;
      state.h.assign(h, T(0));
      state.c.assign(h, T(0));
      for (std::size_t step = 0; step < len; ++step) {
        const std::size_t t = dir == 0 ? step : len - 1 - step;
        for (std::size_t k = 0; k < d; ++k) x_t[k] = x(s, t, k);
        state = lstm_step(x_t, state, p);
        for (std::size_t j = 0; j < h; ++j) y(s, t, dir * h + j) = state.h[j];
      }
    }
  }
  return y;
}

}  // namespace eids::nn
