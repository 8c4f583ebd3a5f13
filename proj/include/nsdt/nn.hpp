#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "nsdt/common.hpp"
#include "nsdt/rng.hpp"
#include "nsdt/tensor.hpp"

namespace nsdt {

// Named flat parameter storage. Segments live contiguously in one buffer, so
// optimizers and finite-difference probes can treat the model as a vector.
template <typename T>
class ParamStore {
 public:
  struct Segment {
    std::string name;
    std::vector<int64_t> shape;
    size_t offset = 0;
    size_t size = 0;
  };

  int add(const std::string& name, std::vector<int64_t> shape) {
    if (index_.contains(name)) throw UsageError("duplicate parameter segment: " + name);
    size_t n = 1;
    for (int64_t d : shape) n *= size_t(d);
    Segment seg{name, std::move(shape), values_.size(), n};
    values_.resize(values_.size() + n, T(0));
    index_.emplace(name, int(segments_.size()));
    segments_.push_back(std::move(seg));
    return int(segments_.size()) - 1;
  }

  std::span<T> view(int id) {
    const Segment& s = segments_[size_t(id)];
    return {values_.data() + s.offset, s.size};
  }
  std::span<const T> view(int id) const {
    const Segment& s = segments_[size_t(id)];
    return {values_.data() + s.offset, s.size};
  }
  T* ptr(int id) { return values_.data() + segments_[size_t(id)].offset; }
  const T* ptr(int id) const { return values_.data() + segments_[size_t(id)].offset; }

  int find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
  }

  const std::vector<Segment>& segments() const { return segments_; }
  std::vector<T>& values() { return values_; }
  const std::vector<T>& values() const { return values_; }
  size_t size() const { return values_.size(); }

  // Same segment layout with zeroed values; the shape gradients are stored in.
  ParamStore<T> zeros_like() const {
    ParamStore<T> g;
    g.segments_ = segments_;
    g.index_ = index_;
    g.values_.assign(values_.size(), T(0));
    return g;
  }

  template <typename U>
  ParamStore<U> cast() const {
    ParamStore<U> out;
    out.segments_raw() = segments_;
    out.index_raw() = index_;
    out.values().resize(values_.size());
    for (size_t i = 0; i < values_.size(); ++i) out.values()[i] = U(values_[i]);
    return out;
  }

  // Internal accessors for cast(); segment metadata is shared across dtypes.
  std::vector<Segment>& segments_raw() { return segments_; }
  std::unordered_map<std::string, int>& index_raw() { return index_; }

 private:
  std::vector<Segment> segments_;
  std::unordered_map<std::string, int> index_;
  std::vector<T> values_;
};

// Gradients share the ParamStore layout.
template <typename T>
using GradStore = ParamStore<T>;

template <typename T>
void fill_normal(std::span<T> dst, Rng& rng, double stddev) {
  for (T& x : dst) x = T(rng.next_normal() * stddev);
}

template <typename T>
void fill_const(std::span<T> dst, T value) {
  for (T& x : dst) x = value;
}

// ---- forward/backward primitives ----
// All matrices are row-major; batch and sequence dimensions are flattened by
// the callers. Backward functions accumulate (+=) into parameter gradients.

template <typename T>
void affine_forward(const T* x, int64_t n, int64_t din, const T* W, const T* b, T* y,
                    int64_t dout) {
  gemm<T>(false, false, n, dout, din, T(1), x, din, W, dout, T(0), y, dout);
  if (b)
    for (int64_t i = 0; i < n; ++i)
      for (int64_t j = 0; j < dout; ++j) y[i * dout + j] += b[j];
}

template <typename T>
void affine_backward(const T* dy, const T* x, const T* W, int64_t n, int64_t din, int64_t dout,
                     T* dx, T* dW, T* db) {
  if (dx) gemm<T>(false, true, n, din, dout, T(1), dy, dout, W, dout, T(0), dx, din);
  if (dW) gemm<T>(true, false, din, dout, n, T(1), x, din, dy, dout, T(1), dW, dout);
  if (db)
    for (int64_t i = 0; i < n; ++i)
      for (int64_t j = 0; j < dout; ++j) db[j] += dy[i * dout + j];
}

template <typename T>
void layer_norm_forward(const T* x, int64_t n, int64_t d, const T* gain, const T* bias, T* y,
                        T* mean, T* rstd, T eps = T(1e-5)) {
  for (int64_t i = 0; i < n; ++i) {
    const T* xi = x + i * d;
    T mu = T(0);
    for (int64_t j = 0; j < d; ++j) mu += xi[j];
    mu /= T(d);
    T var = T(0);
    for (int64_t j = 0; j < d; ++j) {
      T c = xi[j] - mu;
      var += c * c;
    }
    var /= T(d);
    T rs = T(1) / std::sqrt(var + eps);
    mean[i] = mu;
    rstd[i] = rs;
    T* yi = y + i * d;
    for (int64_t j = 0; j < d; ++j) {
      T xhat = (xi[j] - mu) * rs;
      yi[j] = gain ? xhat * gain[j] + bias[j] : xhat;
    }
  }
}

template <typename T>
void layer_norm_backward(const T* dy, const T* x, const T* gain, const T* mean, const T* rstd,
                         int64_t n, int64_t d, T* dx, T* dgain, T* dbias) {
  for (int64_t i = 0; i < n; ++i) {
    const T* xi = x + i * d;
    const T* dyi = dy + i * d;
    T mu = mean[i], rs = rstd[i];
    T sum_dxhat = T(0), sum_dxhat_xhat = T(0);
    for (int64_t j = 0; j < d; ++j) {
      T xhat = (xi[j] - mu) * rs;
      T dxhat = gain ? dyi[j] * gain[j] : dyi[j];
      sum_dxhat += dxhat;
      sum_dxhat_xhat += dxhat * xhat;
      if (dgain) dgain[j] += dyi[j] * xhat;
      if (dbias) dbias[j] += dyi[j];
    }
    T inv_d = T(1) / T(d);
    T* dxi = dx + i * d;
    for (int64_t j = 0; j < d; ++j) {
      T xhat = (xi[j] - mu) * rs;
      T dxhat = gain ? dyi[j] * gain[j] : dyi[j];
      dxi[j] = rs * (dxhat - inv_d * sum_dxhat - xhat * inv_d * sum_dxhat_xhat);
    }
  }
}

// Exact GELU: x * Phi(x).
template <typename T>
void gelu_forward(const T* x, int64_t n, T* y) {
  const T inv_sqrt2 = T(1) / std::numbers::sqrt2_v<T>;
  for (int64_t i = 0; i < n; ++i) y[i] = x[i] * T(0.5) * (T(1) + std::erf(x[i] * inv_sqrt2));
}

template <typename T>
void gelu_backward(const T* dy, const T* x, int64_t n, T* dx) {
  const T inv_sqrt2 = T(1) / std::numbers::sqrt2_v<T>;
  const T inv_sqrt2pi = T(1) / std::sqrt(T(2) * std::numbers::pi_v<T>);
  for (int64_t i = 0; i < n; ++i) {
    T phi = T(0.5) * (T(1) + std::erf(x[i] * inv_sqrt2));
    T pdf = inv_sqrt2pi * std::exp(T(-0.5) * x[i] * x[i]);
    dx[i] = dy[i] * (phi + x[i] * pdf);
  }
}

template <typename T>
void relu_forward(const T* x, int64_t n, T* y) {
  for (int64_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void relu_backward(const T* dy, const T* x, int64_t n, T* dx) {
  for (int64_t i = 0; i < n; ++i) dx[i] = x[i] > T(0) ? dy[i] : T(0);
}

// Row-wise softmax with max subtraction. Rows whose entries are all -inf
// (fully masked) come out as all zeros.
template <typename T>
void softmax_rows(const T* x, int64_t n, int64_t d, T* y) {
  for (int64_t i = 0; i < n; ++i) {
    const T* xi = x + i * d;
    T* yi = y + i * d;
    T mx = -std::numeric_limits<T>::infinity();
    for (int64_t j = 0; j < d; ++j) mx = std::max(mx, xi[j]);
    if (!(mx > -std::numeric_limits<T>::infinity())) {
      for (int64_t j = 0; j < d; ++j) yi[j] = T(0);
      continue;
    }
    T sum = T(0);
    for (int64_t j = 0; j < d; ++j) {
      yi[j] = std::exp(xi[j] - mx);
      sum += yi[j];
    }
    T inv = T(1) / sum;
    for (int64_t j = 0; j < d; ++j) yi[j] *= inv;
  }
}

// dx = y ⊙ (dy − <dy, y>) per row, where y = softmax(x).
template <typename T>
void softmax_backward(const T* dy, const T* y, int64_t n, int64_t d, T* dx) {
  for (int64_t i = 0; i < n; ++i) {
    const T* dyi = dy + i * d;
    const T* yi = y + i * d;
    T dot = T(0);
    for (int64_t j = 0; j < d; ++j) dot += dyi[j] * yi[j];
    T* dxi = dx + i * d;
    for (int64_t j = 0; j < d; ++j) dxi[j] = yi[j] * (dyi[j] - dot);
  }
}

// Mean NLL over rows with integer targets; writes softmax probabilities and
// the loss gradient d(loss)/d(logits) = (p - onehot)/n.
template <typename T>
T cross_entropy_from_logits(const T* logits, int64_t n, int64_t c, const int* targets, T* probs,
                            T* dlogits) {
  if (n <= 0) throw UsageError("cross_entropy_from_logits: empty batch");
  softmax_rows(logits, n, c, probs);
  T loss = T(0);
  const T tiny = std::numeric_limits<T>::min();
  for (int64_t i = 0; i < n; ++i) {
    T p = probs[i * c + targets[i]];
    loss -= std::log(std::max(p, tiny));
  }
  loss /= T(n);
  if (dlogits) {
    T inv_n = T(1) / T(n);
    for (int64_t i = 0; i < n; ++i) {
      for (int64_t j = 0; j < c; ++j) dlogits[i * c + j] = probs[i * c + j] * inv_n;
      dlogits[i * c + targets[i]] -= inv_n;
    }
  }
  return loss;
}

// ---- causal multi-head self-attention ----

// Saved activations for one attention call; inputs x are [B*S, d].
template <typename T>
struct AttentionContext {
  int64_t batch = 0, seq = 0, dim = 0, heads = 0;
  Matrix<T> q, k, v;        // [B*S, d]
  Matrix<T> probs;          // [B*H, S*S] softmax rows per (b, h, i)
  Matrix<T> concat;         // [B*S, d] heads merged, pre output-projection
};

// key_allowed[b*S + j] gates which keys can be attended; a query position can
// always see itself, so padded rows stay finite.
template <typename T>
void causal_attention_forward(const T* x, int64_t B, int64_t S, int64_t d, int64_t H, const T* Wq,
                              const T* bq, const T* Wk, const T* bk, const T* Wv, const T* bv,
                              const T* Wo, const T* bo, const uint8_t* key_allowed, T* y,
                              AttentionContext<T>& ctx) {
  if (d % H != 0) throw ShapeError("embedding dim must be divisible by head count");
  const int64_t dh = d / H;
  const int64_t n = B * S;
  ctx.batch = B;
  ctx.seq = S;
  ctx.dim = d;
  ctx.heads = H;
  ctx.q = Matrix<T>(n, d);
  ctx.k = Matrix<T>(n, d);
  ctx.v = Matrix<T>(n, d);
  ctx.probs = Matrix<T>(B * H, S * S);
  ctx.concat = Matrix<T>(n, d);

  affine_forward(x, n, d, Wq, bq, ctx.q.data(), d);
  affine_forward(x, n, d, Wk, bk, ctx.k.data(), d);
  affine_forward(x, n, d, Wv, bv, ctx.v.data(), d);

  const T scale = T(1) / std::sqrt(T(dh));
  std::vector<T> scores(size_t(S * S));
  for (int64_t b = 0; b < B; ++b) {
    for (int64_t h = 0; h < H; ++h) {
      const T* Qbh = ctx.q.data() + b * S * d + h * dh;
      const T* Kbh = ctx.k.data() + b * S * d + h * dh;
      const T* Vbh = ctx.v.data() + b * S * d + h * dh;
      gemm<T>(false, true, S, S, dh, scale, Qbh, d, Kbh, d, T(0), scores.data(), S);
      const T neg_inf = -std::numeric_limits<T>::infinity();
      for (int64_t i = 0; i < S; ++i)
        for (int64_t j = 0; j < S; ++j) {
          bool ok = (j <= i) && (j == i || !key_allowed || key_allowed[b * S + j]);
          if (!ok) scores[size_t(i * S + j)] = neg_inf;
        }
      T* P = ctx.probs.data() + (b * H + h) * S * S;
      softmax_rows(scores.data(), S, S, P);
      T* Cbh = ctx.concat.data() + b * S * d + h * dh;
      gemm<T>(false, false, S, dh, S, T(1), P, S, Vbh, d, T(0), Cbh, d);
    }
  }
  affine_forward(ctx.concat.data(), n, d, Wo, bo, y, d);
}

// Accumulates parameter gradients; writes dx (same shape as x).
template <typename T>
void causal_attention_backward(const T* dy, const T* x, const AttentionContext<T>& ctx, const T* Wq,
                               const T* Wk, const T* Wv, const T* Wo, T* dx, T* dWq, T* dbq, T* dWk,
                               T* dbk, T* dWv, T* dbv, T* dWo, T* dbo) {
  const int64_t B = ctx.batch, S = ctx.seq, d = ctx.dim, H = ctx.heads;
  const int64_t dh = d / H;
  const int64_t n = B * S;
  const T scale = T(1) / std::sqrt(T(dh));

  Matrix<T> dconcat(n, d);
  affine_backward(dy, ctx.concat.data(), Wo, n, d, d, dconcat.data(), dWo, dbo);

  Matrix<T> dq(n, d), dk(n, d), dv(n, d);
  std::vector<T> dP(size_t(S * S)), dS(size_t(S * S));
  for (int64_t b = 0; b < B; ++b) {
    for (int64_t h = 0; h < H; ++h) {
      const T* P = ctx.probs.data() + (b * H + h) * S * S;
      const T* Qbh = ctx.q.data() + b * S * d + h * dh;
      const T* Kbh = ctx.k.data() + b * S * d + h * dh;
      const T* Vbh = ctx.v.data() + b * S * d + h * dh;
      const T* dCbh = dconcat.data() + b * S * d + h * dh;
      // dP = dC V^T ; dV += P^T dC
      gemm<T>(false, true, S, S, dh, T(1), dCbh, d, Vbh, d, T(0), dP.data(), S);
      gemm<T>(true, false, S, dh, S, T(1), P, S, dCbh, d, T(1), dv.data() + b * S * d + h * dh, d);
      softmax_backward(dP.data(), P, S, S, dS.data());
      for (auto& s : dS) s *= scale;
      // dQ = dS K ; dK = dS^T Q
      gemm<T>(false, false, S, dh, S, T(1), dS.data(), S, Kbh, d, T(1),
              dq.data() + b * S * d + h * dh, d);
      gemm<T>(true, false, S, dh, S, T(1), dS.data(), S, Qbh, d, T(1),
              dk.data() + b * S * d + h * dh, d);
    }
  }

  // Through the input projections; dx accumulates all three paths.
  Matrix<T> tmp(n, d);
  affine_backward(dq.data(), x, Wq, n, d, d, dx, dWq, dbq);
  affine_backward(dk.data(), x, Wk, n, d, d, tmp.data(), dWk, dbk);
  for (int64_t i = 0; i < n * d; ++i) dx[i] += tmp.data()[i];
  affine_backward(dv.data(), x, Wv, n, d, d, tmp.data(), dWv, dbv);
  for (int64_t i = 0; i < n * d; ++i) dx[i] += tmp.data()[i];
}

// ---- Adam ----

template <typename T>
struct AdamState {
  std::vector<T> m;
  std::vector<T> v;
  int64_t step = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon_num = 1e-8;

  static AdamState like(const ParamStore<T>& params, double lr) {
    AdamState s;
    s.m.assign(params.size(), T(0));
    s.v.assign(params.size(), T(0));
    s.learning_rate = lr;
    return s;
  }
};

// Standard Adam with bias correction.
template <typename T>
void adam_step(ParamStore<T>& params, const GradStore<T>& grads, AdamState<T>& st) {
  if (params.size() != grads.size() || params.size() != st.m.size())
    throw ShapeError("adam_step: store shapes disagree");
  st.step += 1;
  const T b1 = T(st.beta1), b2 = T(st.beta2);
  const T lr = T(st.learning_rate), eps = T(st.epsilon_num);
  const T bc1 = T(1) - std::pow(b1, T(st.step));
  const T bc2 = T(1) - std::pow(b2, T(st.step));
  T* p = params.values().data();
  const T* g = grads.values().data();
  for (size_t i = 0; i < params.size(); ++i) {
    st.m[i] = b1 * st.m[i] + (T(1) - b1) * g[i];
    st.v[i] = b2 * st.v[i] + (T(1) - b2) * g[i] * g[i];
    T mhat = st.m[i] / bc1;
    T vhat = st.v[i] / bc2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace nsdt
