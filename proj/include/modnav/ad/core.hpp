#pragma once

// Reverse-mode gradient tape over small dense tensors (rank 1 or 2).
// Ops append nodes in topological order; backward() replays the tape in
// reverse exactly once and accumulates into Param::grad.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "modnav/common.hpp"

namespace modnav::ad {

using Shape = std::vector<int>;

inline int64_t shape_numel(const Shape& s) {
  int64_t n = 1;
  for (int d : s) {
    if (d <= 0) throw shape_error("non-positive dimension");
    n *= d;
  }
  return n;
}

// Persistent trainable tensor; outlives any tape. Gradients accumulate
// here across backward passes until explicitly zeroed.
template <class T>
struct Param {
  std::string name;
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;

  Param() = default;
  Param(std::string n, Shape s)
      : name(std::move(n)), shape(std::move(s)) {
    value.assign(shape_numel(shape), T(0));
    grad.assign(value.size(), T(0));
  }
  int64_t size() const { return static_cast<int64_t>(value.size()); }
};

template <class T>
struct Node {
  Shape shape;
  int64_t n = 0;
  std::vector<T> store;        // owned values; empty for param leaves
  const T* val = nullptr;      // -> store or Param::value
  std::vector<T> grad;         // allocated iff requires_grad
  bool requires_grad = false;
  Param<T>* param = nullptr;
  std::function<void()> back;  // null for leaves

  int rows() const { return shape.size() == 2 ? shape[0] : 1; }
  int cols() const { return shape.empty() ? 1 : shape.back(); }
};

template <class T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Node<T>* n) : node_(n) {}

  bool ok() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int rows() const { return node_->rows(); }
  int cols() const { return node_->cols(); }
  int64_t size() const { return node_->n; }
  const T* data() const { return node_->val; }
  T operator[](int64_t i) const { return node_->val[i]; }
  T scalar() const {
    if (node_->n != 1) throw shape_error("scalar() on non-scalar tensor");
    return node_->val[0];
  }
  bool requires_grad() const { return node_->requires_grad; }
  const T* grad() const { return node_->grad.data(); }
  Node<T>* node() const { return node_; }

 private:
  Node<T>* node_ = nullptr;
};

enum class Activation { Tanh, Relu };

template <class T>
class Tape {
 public:
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool grad_enabled() const { return grad_enabled_; }
  size_t size() const { return nodes_.size(); }

  void reset() {
    nodes_.clear();
    leaves_.clear();
    used_ = false;
  }

  // ---- leaves ----

  Tensor<T> constant(std::span<const double> data, Shape shape) {
    Node<T>* n = make(std::move(shape), false);
    if (static_cast<int64_t>(data.size()) != n->n)
      throw shape_error("constant: data length does not match shape");
    for (int64_t i = 0; i < n->n; ++i) n->store[i] = static_cast<T>(data[i]);
    return Tensor<T>(n);
  }

  Tensor<T> full(Shape shape, double v) {
    Node<T>* n = make(std::move(shape), false);
    std::fill(n->store.begin(), n->store.end(), static_cast<T>(v));
    return Tensor<T>(n);
  }

  Tensor<T> zeros(Shape shape) { return full(std::move(shape), 0.0); }

  // Trainable leaf; one node per Param per tape so gradients from every
  // use accumulate in one place.
  Tensor<T> leaf(Param<T>& p) {
    auto it = leaves_.find(&p);
    if (it != leaves_.end()) return Tensor<T>(it->second);
    auto node = std::make_unique<Node<T>>();
    node->shape = p.shape;
    node->n = p.size();
    node->val = p.value.data();
    node->param = &p;
    node->requires_grad = grad_enabled_;
    if (node->requires_grad) node->grad.assign(node->n, T(0));
    Node<T>* raw = node.get();
    nodes_.push_back(std::move(node));
    leaves_.emplace(&p, raw);
    return Tensor<T>(raw);
  }

  // ---- affine maps ----

  // y = x W^T + b with W [m,n], x [B,n] or [n], optional b [m]
  Tensor<T> dense(Tensor<T> x, Tensor<T> w, Tensor<T> b = {}) {
    if (w.shape().size() != 2) throw shape_error("dense: W must be rank 2");
    const int m = w.shape()[0], n = w.shape()[1];
    if (x.cols() != n) throw shape_error("dense: input width mismatch");
    if (b.ok() && b.size() != m) throw shape_error("dense: bias mismatch");
    const int B = x.rows();
    Node<T>* out = make(like(x, m), any_grad({x, w, b}));
    const T* xv = x.data();
    const T* wv = w.data();
    const T* bv = b.ok() ? b.data() : nullptr;
    T* yv = out->store.data();
    for (int r = 0; r < B; ++r) {
      const T* xr = xv + int64_t(r) * n;
      T* yr = yv + int64_t(r) * m;
      for (int j = 0; j < m; ++j) {
        const T* wj = wv + int64_t(j) * n;
        T acc = bv ? bv[j] : T(0);
        for (int i = 0; i < n; ++i) acc += xr[i] * wj[i];
        yr[j] = acc;
      }
    }
    if (out->requires_grad) {
      Node<T>*xn = x.node(), *wn = w.node(), *bn = b.ok() ? b.node() : nullptr;
      out->back = [out, xn, wn, bn, B, m, n] {
        const T* g = out->grad.data();
        if (xn->requires_grad) {
          const T* wv2 = wn->val;
          for (int r = 0; r < B; ++r) {
            const T* gr = g + int64_t(r) * m;
            T* dxr = xn->grad.data() + int64_t(r) * n;
            for (int j = 0; j < m; ++j) {
              const T gj = gr[j];
              const T* wj = wv2 + int64_t(j) * n;
              for (int i = 0; i < n; ++i) dxr[i] += gj * wj[i];
            }
          }
        }
        if (wn->requires_grad) {
          const T* xv2 = xn->val;
          for (int r = 0; r < B; ++r) {
            const T* gr = g + int64_t(r) * m;
            const T* xr = xv2 + int64_t(r) * n;
            for (int j = 0; j < m; ++j) {
              const T gj = gr[j];
              T* dwj = wn->grad.data() + int64_t(j) * n;
              for (int i = 0; i < n; ++i) dwj[i] += gj * xr[i];
            }
          }
        }
        if (bn && bn->requires_grad) {
          for (int r = 0; r < B; ++r) {
            const T* gr = g + int64_t(r) * m;
            for (int j = 0; j < m; ++j) bn->grad[j] += gr[j];
          }
        }
      };
    }
    return Tensor<T>(out);
  }

  // y = x M with M [n,m] (right multiplication, used by the ring kernel)
  Tensor<T> matmul(Tensor<T> x, Tensor<T> mops) {
    if (mops.shape().size() != 2) throw shape_error("matmul: M must be rank 2");
    const int n = mops.shape()[0], m = mops.shape()[1];
    if (x.cols() != n) throw shape_error("matmul: input width mismatch");
    const int B = x.rows();
    Node<T>* out = make(like(x, m), any_grad({x, mops}));
    const T* xv = x.data();
    const T* mv = mops.data();
    T* yv = out->store.data();
    for (int r = 0; r < B; ++r) {
      const T* xr = xv + int64_t(r) * n;
      T* yr = yv + int64_t(r) * m;
      std::fill(yr, yr + m, T(0));
      for (int i = 0; i < n; ++i) {
        const T xi = xr[i];
        const T* mi = mv + int64_t(i) * m;
        for (int j = 0; j < m; ++j) yr[j] += xi * mi[j];
      }
    }
    if (out->requires_grad) {
      Node<T>*xn = x.node(), *mn = mops.node();
      out->back = [out, xn, mn, B, m, n] {
        const T* g = out->grad.data();
        if (xn->requires_grad) {
          for (int r = 0; r < B; ++r) {
            const T* gr = g + int64_t(r) * m;
            T* dxr = xn->grad.data() + int64_t(r) * n;
            for (int i = 0; i < n; ++i) {
              const T* mi = mn->val + int64_t(i) * m;
              T acc = T(0);
              for (int j = 0; j < m; ++j) acc += gr[j] * mi[j];
              dxr[i] += acc;
            }
          }
        }
        if (mn->requires_grad) {
          for (int r = 0; r < B; ++r) {
            const T* gr = g + int64_t(r) * m;
            const T* xr = xn->val + int64_t(r) * n;
            for (int i = 0; i < n; ++i) {
              const T xi = xr[i];
              T* dmi = mn->grad.data() + int64_t(i) * m;
              for (int j = 0; j < m; ++j) dmi[j] += xi * gr[j];
            }
          }
        }
      };
    }
    return Tensor<T>(out);
  }

  // ---- elementwise ----

  Tensor<T> add(Tensor<T> a, Tensor<T> b) {
    Node<T>* out = elementwise_prep(a, b);
    for (int64_t i = 0; i < out->n; ++i)
      out->store[i] = a.data()[i] + b.data()[i];
    if (out->requires_grad) {
      Node<T>*an = a.node(), *bn = b.node();
      out->back = [out, an, bn] {
        for (int64_t i = 0; i < out->n; ++i) {
          const T g = out->grad[i];
          if (an->requires_grad) an->grad[i] += g;
          if (bn->requires_grad) bn->grad[i] += g;
        }
      };
    }
    return Tensor<T>(out);
  }

  Tensor<T> sub(Tensor<T> a, Tensor<T> b) {
    Node<T>* out = elementwise_prep(a, b);
    for (int64_t i = 0; i < out->n; ++i)
      out->store[i] = a.data()[i] - b.data()[i];
    if (out->requires_grad) {
      Node<T>*an = a.node(), *bn = b.node();
      out->back = [out, an, bn] {
        for (int64_t i = 0; i < out->n; ++i) {
          const T g = out->grad[i];
          if (an->requires_grad) an->grad[i] += g;
          if (bn->requires_grad) bn->grad[i] -= g;
        }
      };
    }
    return Tensor<T>(out);
  }

  Tensor<T> mul(Tensor<T> a, Tensor<T> b) {
    Node<T>* out = elementwise_prep(a, b);
    const T* av = a.data();
    const T* bv = b.data();
    for (int64_t i = 0; i < out->n; ++i) out->store[i] = av[i] * bv[i];
    if (out->requires_grad) {
      Node<T>*an = a.node(), *bn = b.node();
      out->back = [out, an, bn] {
        for (int64_t i = 0; i < out->n; ++i) {
          const T g = out->grad[i];
          if (an->requires_grad) an->grad[i] += g * bn->val[i];
          if (bn->requires_grad) bn->grad[i] += g * an->val[i];
        }
      };
    }
    return Tensor<T>(out);
  }

  Tensor<T> scale(Tensor<T> a, double c) {
    const T cc = static_cast<T>(c);
    return unary(a, [cc](T x) { return cc * x; },
                 [cc](T, T y, T g) { (void)y; return cc * g; });
  }

  Tensor<T> add_scalar(Tensor<T> a, double c) {
    const T cc = static_cast<T>(c);
    return unary(a, [cc](T x) { return x + cc; },
                 [](T, T, T g) { return g; });
  }

  Tensor<T> tanh(Tensor<T> a) {
    return unary(a, [](T x) { return std::tanh(x); },
                 [](T, T y, T g) { return g * (T(1) - y * y); });
  }

  Tensor<T> relu(Tensor<T> a) {
    return unary(a, [](T x) { return x > T(0) ? x : T(0); },
                 [](T x, T, T g) { return x > T(0) ? g : T(0); });
  }

  Tensor<T> sigmoid(Tensor<T> a) {
    return unary(a, [](T x) { return T(1) / (T(1) + std::exp(-x)); },
                 [](T, T y, T g) { return g * y * (T(1) - y); });
  }

  Tensor<T> exp(Tensor<T> a) {
    return unary(a, [](T x) { return std::exp(x); },
                 [](T, T y, T g) { return g * y; });
  }

  Tensor<T> log(Tensor<T> a) {
    return unary(a, [](T x) { return std::log(x); },
                 [](T x, T, T g) { return g / x; });
  }

  Tensor<T> abs(Tensor<T> a) {
    return unary(a, [](T x) { return std::abs(x); },
                 [](T x, T, T g) {
                   return x > T(0) ? g : (x < T(0) ? -g : T(0));
                 });
  }

  Tensor<T> activation(Tensor<T> a, Activation kind) {
    return kind == Activation::Tanh ? tanh(a) : relu(a);
  }

  // zero gradient outside (lo, hi)
  Tensor<T> clip(Tensor<T> a, double lo, double hi) {
    const T l = static_cast<T>(lo), h = static_cast<T>(hi);
    if (!(l < h)) throw shape_error("clip: lo must be < hi");
    return unary(a, [l, h](T x) { return std::clamp(x, l, h); },
                 [l, h](T x, T, T g) { return (x > l && x < h) ? g : T(0); });
  }

  // ties go to the first argument
  Tensor<T> minimum(Tensor<T> a, Tensor<T> b) {
    Node<T>* out = elementwise_prep(a, b);
    const T* av = a.data();
    const T* bv = b.data();
    for (int64_t i = 0; i < out->n; ++i)
      out->store[i] = av[i] <= bv[i] ? av[i] : bv[i];
    if (out->requires_grad) {
      Node<T>*an = a.node(), *bn = b.node();
      out->back = [out, an, bn] {
        for (int64_t i = 0; i < out->n; ++i) {
          const T g = out->grad[i];
          if (an->val[i] <= bn->val[i]) {
            if (an->requires_grad) an->grad[i] += g;
          } else if (bn->requires_grad) {
            bn->grad[i] += g;
          }
        }
      };
    }
    return Tensor<T>(out);
  }

  // ---- row-wise ops ----

  // (x - mean)/sqrt(var + eps) * gain + offset per row, eps = 1e-5
  Tensor<T> layer_norm(Tensor<T> x, Tensor<T> gain, Tensor<T> offset) {
    const int B = x.rows(), n = x.cols();
    if (n < 2) throw shape_error("layer_norm: needs at least 2 features");
    if (gain.size() != n || offset.size() != n)
      throw shape_error("layer_norm: gain/offset width mismatch");
    Node<T>* out = make(x.shape(), any_grad({x, gain, offset}));
    constexpr T eps = T(1e-5);
    std::vector<T> xhat(size_t(B) * n);
    std::vector<T> inv_std(B);
    const T* xv = x.data();
    const T* gv = gain.data();
    const T* ov = offset.data();
    for (int r = 0; r < B; ++r) {
      const T* xr = xv + int64_t(r) * n;
      T mean = T(0);
      for (int i = 0; i < n; ++i) mean += xr[i];
      mean /= T(n);
      T var = T(0);
      for (int i = 0; i < n; ++i) {
        const T d = xr[i] - mean;
        var += d * d;
      }
      var /= T(n);
      const T inv = T(1) / std::sqrt(var + eps);
      inv_std[r] = inv;
      T* xh = xhat.data() + int64_t(r) * n;
      T* yr = out->store.data() + int64_t(r) * n;
      for (int i = 0; i < n; ++i) {
        xh[i] = (xr[i] - mean) * inv;
        yr[i] = xh[i] * gv[i] + ov[i];
      }
    }
    if (out->requires_grad) {
      Node<T>*xn = x.node(), *gn = gain.node(), *on = offset.node();
      out->back = [out, xn, gn, on, B, n, xhat = std::move(xhat),
                   inv_std = std::move(inv_std)] {
        for (int r = 0; r < B; ++r) {
          const T* g = out->grad.data() + int64_t(r) * n;
          const T* xh = xhat.data() + int64_t(r) * n;
          if (gn->requires_grad)
            for (int i = 0; i < n; ++i) gn->grad[i] += g[i] * xh[i];
          if (on->requires_grad)
            for (int i = 0; i < n; ++i) on->grad[i] += g[i];
          if (xn->requires_grad) {
            T sum_gy = T(0), sum_gy_xh = T(0);
            for (int i = 0; i < n; ++i) {
              const T gy = g[i] * gn->val[i];
              sum_gy += gy;
              sum_gy_xh += gy * xh[i];
            }
            const T inv = inv_std[r];
            T* dx = xn->grad.data() + int64_t(r) * n;
            for (int i = 0; i < n; ++i) {
              const T gy = g[i] * gn->val[i];
              dx[i] += inv * (gy - sum_gy / T(n) - xh[i] * sum_gy_xh / T(n));
            }
          }
        }
      };
    }
    return Tensor<T>(out);
  }

  // keeps the k largest entries per row, zeros the rest; gradient flows
  // only through kept positions; ties break toward the lowest index
  Tensor<T> top_k_sparsify(Tensor<T> x, int k) {
    const int B = x.rows(), n = x.cols();
    if (k < 1 || k > n) throw shape_error("top_k_sparsify: k out of range");
    Node<T>* out = make(x.shape(), x.requires_grad());
    std::vector<int> kept(size_t(B) * k);
    std::vector<int> idx(n);
    const T* xv = x.data();
    for (int r = 0; r < B; ++r) {
      const T* xr = xv + int64_t(r) * n;
      std::iota(idx.begin(), idx.end(), 0);
      std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                        [xr](int a, int b) {
                          if (xr[a] != xr[b]) return xr[a] > xr[b];
                          return a < b;
                        });
      T* yr = out->store.data() + int64_t(r) * n;
      std::fill(yr, yr + n, T(0));
      for (int j = 0; j < k; ++j) {
        const int i = idx[j];
        yr[i] = xr[i];
        kept[size_t(r) * k + j] = i;
      }
    }
    if (out->requires_grad) {
      Node<T>* xn = x.node();
      out->back = [out, xn, B, n, k, kept = std::move(kept)] {
        for (int r = 0; r < B; ++r)
          for (int j = 0; j < k; ++j) {
            const int i = kept[size_t(r) * k + j];
            xn->grad[int64_t(r) * n + i] += out->grad[int64_t(r) * n + i];
          }
      };
    }
    return Tensor<T>(out);
  }

  // max-subtracted softmax per row
  Tensor<T> softmax(Tensor<T> x) {
    const int B = x.rows(), n = x.cols();
    Node<T>* out = make(x.shape(), x.requires_grad());
    const T* xv = x.data();
    for (int r = 0; r < B; ++r) {
      const T* xr = xv + int64_t(r) * n;
      T* yr = out->store.data() + int64_t(r) * n;
      T mx = xr[0];
      for (int i = 1; i < n; ++i) mx = std::max(mx, xr[i]);
      T sum = T(0);
      for (int i = 0; i < n; ++i) {
        yr[i] = std::exp(xr[i] - mx);
        sum += yr[i];
      }
      for (int i = 0; i < n; ++i) yr[i] /= sum;
    }
    if (out->requires_grad) {
      Node<T>* xn = x.node();
      out->back = [out, xn, B, n] {
        for (int r = 0; r < B; ++r) {
          const T* y = out->val + int64_t(r) * n;
          const T* g = out->grad.data() + int64_t(r) * n;
          T dot = T(0);
          for (int i = 0; i < n; ++i) dot += y[i] * g[i];
          T* dx = xn->grad.data() + int64_t(r) * n;
          for (int i = 0; i < n; ++i) dx[i] += y[i] * (g[i] - dot);
        }
      };
    }
    return Tensor<T>(out);
  }

  Tensor<T> concat(const std::vector<Tensor<T>>& parts) {
    if (parts.empty()) throw shape_error("concat: empty input");
    const int B = parts[0].rows();
    int total = 0;
    bool rg = false;
    for (const auto& p : parts) {
      if (p.rows() != B) throw shape_error("concat: row mismatch");
      total += p.cols();
      rg = rg || p.requires_grad();
    }
    Shape shape = parts[0].shape().size() == 2 ? Shape{B, total} : Shape{total};
    Node<T>* out = make(std::move(shape), rg && grad_enabled_);
    int off = 0;
    std::vector<Node<T>*> srcs;
    std::vector<int> offs, widths;
    for (const auto& p : parts) {
      const int w = p.cols();
      for (int r = 0; r < B; ++r)
        std::copy(p.data() + int64_t(r) * w, p.data() + int64_t(r) * w + w,
                  out->store.data() + int64_t(r) * total + off);
      srcs.push_back(p.node());
      offs.push_back(off);
      widths.push_back(w);
      off += w;
    }
    if (out->requires_grad) {
      out->back = [out, B, total, srcs = std::move(srcs), offs = std::move(offs),
                   widths = std::move(widths)] {
        for (size_t s = 0; s < srcs.size(); ++s) {
          if (!srcs[s]->requires_grad) continue;
          const int w = widths[s], o = offs[s];
          for (int r = 0; r < B; ++r) {
            const T* g = out->grad.data() + int64_t(r) * total + o;
            T* dg = srcs[s]->grad.data() + int64_t(r) * w;
            for (int i = 0; i < w; ++i) dg[i] += g[i];
          }
        }
      };
    }
    return Tensor<T>(out);
  }

  Tensor<T> slice_cols(Tensor<T> x, int start, int len) {
    const int B = x.rows(), n = x.cols();
    if (start < 0 || len < 1 || start + len > n)
      throw shape_error("slice_cols: range out of bounds");
    Shape shape = x.shape().size() == 2 ? Shape{B, len} : Shape{len};
    Node<T>* out = make(std::move(shape), x.requires_grad());
    for (int r = 0; r < B; ++r)
      std::copy(x.data() + int64_t(r) * n + start,
                x.data() + int64_t(r) * n + start + len,
                out->store.data() + int64_t(r) * len);
    if (out->requires_grad) {
      Node<T>* xn = x.node();
      out->back = [out, xn, B, n, start, len] {
        for (int r = 0; r < B; ++r) {
          const T* g = out->grad.data() + int64_t(r) * len;
          T* dx = xn->grad.data() + int64_t(r) * n + start;
          for (int i = 0; i < len; ++i) dx[i] += g[i];
        }
      };
    }
    return Tensor<T>(out);
  }

  // y[r,:] = s[r] * x[r,:], s of shape [B] or [B,1]
  Tensor<T> scale_rows(Tensor<T> s, Tensor<T> x) {
    const int B = x.rows(), n = x.cols();
    if (s.size() != B) throw shape_error("scale_rows: scale length mismatch");
    Node<T>* out = make(x.shape(), any_grad({s, x}));
    for (int r = 0; r < B; ++r) {
      const T sr = s.data()[r];
      const T* xr = x.data() + int64_t(r) * n;
      T* yr = out->store.data() + int64_t(r) * n;
      for (int i = 0; i < n; ++i) yr[i] = sr * xr[i];
    }
    if (out->requires_grad) {
      Node<T>*sn = s.node(), *xn = x.node();
      out->back = [out, sn, xn, B, n] {
        for (int r = 0; r < B; ++r) {
          const T* g = out->grad.data() + int64_t(r) * n;
          const T* xr = xn->val + int64_t(r) * n;
          if (xn->requires_grad) {
            const T sr = sn->val[r];
            T* dx = xn->grad.data() + int64_t(r) * n;
            for (int i = 0; i < n; ++i) dx[i] += sr * g[i];
          }
          if (sn->requires_grad) {
            T acc = T(0);
            for (int i = 0; i < n; ++i) acc += g[i] * xr[i];
            sn->grad[r] += acc;
          }
        }
      };
    }
    return Tensor<T>(out);
  }

  // ---- reductions ----

  Tensor<T> sum(Tensor<T> x) {
    Node<T>* out = make(Shape{1}, x.requires_grad());
    T acc = T(0);
    for (int64_t i = 0; i < x.size(); ++i) acc += x.data()[i];
    out->store[0] = acc;
    if (out->requires_grad) {
      Node<T>* xn = x.node();
      out->back = [out, xn] {
        const T g = out->grad[0];
        for (int64_t i = 0; i < xn->n; ++i) xn->grad[i] += g;
      };
    }
    return Tensor<T>(out);
  }

  Tensor<T> mean(Tensor<T> x) { return scale(sum(x), 1.0 / double(x.size())); }

  // ---- distribution helpers ----

  // Diagonal-Gaussian log density per row; log_std [d] broadcasts over rows.
  // Returns [B,1] (or [1] for rank-1 mean).
  Tensor<T> gaussian_log_prob(Tensor<T> mean, Tensor<T> log_std,
                              Tensor<T> actions) {
    const int B = mean.rows(), d = mean.cols();
    if (log_std.size() != d)
      throw shape_error("gaussian_log_prob: log_std width mismatch");
    if (actions.rows() != B || actions.cols() != d)
      throw shape_error("gaussian_log_prob: action shape mismatch");
    static const T kHalfLog2Pi = T(0.5) * std::log(T(2) * T(3.14159265358979323846));
    Shape shape = mean.shape().size() == 2 ? Shape{B, 1} : Shape{1};
    Node<T>* out = make(std::move(shape), any_grad({mean, log_std}));
    for (int r = 0; r < B; ++r) {
      const T* mu = mean.data() + int64_t(r) * d;
      const T* a = actions.data() + int64_t(r) * d;
      T acc = T(0);
      for (int i = 0; i < d; ++i) {
        const T ls = log_std.data()[i];
        const T inv_var = std::exp(T(-2) * ls);
        const T diff = a[i] - mu[i];
        acc += -T(0.5) * diff * diff * inv_var - ls - kHalfLog2Pi;
      }
      out->store[r] = acc;
    }
    if (out->requires_grad) {
      Node<T>*mn = mean.node(), *ln = log_std.node(), *an = actions.node();
      out->back = [out, mn, ln, an, B, d] {
        for (int r = 0; r < B; ++r) {
          const T g = out->grad[r];
          const T* mu = mn->val + int64_t(r) * d;
          const T* a = an->val + int64_t(r) * d;
          for (int i = 0; i < d; ++i) {
            const T ls = ln->val[i];
            const T inv_var = std::exp(T(-2) * ls);
            const T diff = a[i] - mu[i];
            if (mn->requires_grad)
              mn->grad[int64_t(r) * d + i] += g * diff * inv_var;
            if (ln->requires_grad)
              ln->grad[i] += g * (diff * diff * inv_var - T(1));
          }
        }
      };
    }
    return Tensor<T>(out);
  }

  // Shannon entropy of each row of a probability matrix, natural log.
  Tensor<T> categorical_entropy(Tensor<T> probs) {
    const int B = probs.rows(), n = probs.cols();
    constexpr T eps = T(1e-12);
    Shape shape = probs.shape().size() == 2 ? Shape{B, 1} : Shape{1};
    Node<T>* out = make(std::move(shape), probs.requires_grad());
    for (int r = 0; r < B; ++r) {
      const T* p = probs.data() + int64_t(r) * n;
      T acc = T(0);
      for (int i = 0; i < n; ++i) acc -= p[i] * std::log(std::max(p[i], eps));
      out->store[r] = acc;
    }
    if (out->requires_grad) {
      Node<T>* pn = probs.node();
      out->back = [out, pn, B, n] {
        for (int r = 0; r < B; ++r) {
          const T g = out->grad[r];
          const T* p = pn->val + int64_t(r) * n;
          T* dp = pn->grad.data() + int64_t(r) * n;
          for (int i = 0; i < n; ++i) {
            const T lp = std::log(std::max(p[i], eps));
            dp[i] += g * (-(lp + (p[i] > eps ? T(1) : T(0))));
          }
        }
      };
    }
    return Tensor<T>(out);
  }

  // ---- backward ----

  void backward(Tensor<T> loss) {
    if (!grad_enabled_) throw usage_error("tape: backward on a no-grad tape");
    if (used_) throw usage_error("tape: backward called twice without reset");
    if (!loss.ok() || loss.size() != 1)
      throw shape_error("tape: loss must be a scalar on this tape");
    used_ = true;
    if (!loss.requires_grad()) return;  // no parameters involved
    loss.node()->grad[0] = T(1);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
      Node<T>* n = it->get();
      if (n->requires_grad && n->back) n->back();
    }
    for (auto& [p, node] : leaves_)
      for (int64_t i = 0; i < node->n; ++i) p->grad[i] += node->grad[i];
  }

 private:
  Node<T>* make(Shape shape, bool requires_grad) {
    auto node = std::make_unique<Node<T>>();
    node->shape = std::move(shape);
    node->n = shape_numel(node->shape);
    node->store.assign(node->n, T(0));
    node->val = node->store.data();
    node->requires_grad = requires_grad && grad_enabled_;
    if (node->requires_grad) node->grad.assign(node->n, T(0));
    Node<T>* raw = node.get();
    nodes_.push_back(std::move(node));
    return raw;
  }

  static Shape like(const Tensor<T>& x, int new_cols) {
    return x.shape().size() == 2 ? Shape{x.rows(), new_cols} : Shape{new_cols};
  }

  bool any_grad(std::initializer_list<Tensor<T>> ts) const {
    if (!grad_enabled_) return false;
    for (const auto& t : ts)
      if (t.ok() && t.requires_grad()) return true;
    return false;
  }

  Node<T>* elementwise_prep(Tensor<T>& a, Tensor<T>& b) {
    if (a.size() != b.size() || a.rows() != b.rows())
      throw shape_error("elementwise: shape mismatch");
    return make(a.shape(), any_grad({a, b}));
  }

  template <class F, class G>
  Tensor<T> unary(Tensor<T> a, F fwd, G bwd) {
    Node<T>* out = make(a.shape(), a.requires_grad());
    const T* av = a.data();
    for (int64_t i = 0; i < out->n; ++i) out->store[i] = fwd(av[i]);
    if (out->requires_grad) {
      Node<T>* an = a.node();
      out->back = [out, an, bwd] {
        for (int64_t i = 0; i < out->n; ++i)
          an->grad[i] += bwd(an->val[i], out->val[i], out->grad[i]);
      };
    }
    return Tensor<T>(out);
  }

  std::vector<std::unique_ptr<Node<T>>> nodes_;
  std::unordered_map<Param<T>*, Node<T>*> leaves_;
  bool grad_enabled_ = true;
  bool used_ = false;
};

}  // namespace modnav::ad
