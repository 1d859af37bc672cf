#pragma once

#include <string>
#include <vector>

#include "modnav/ad/core.hpp"

namespace modnav::ad {

template <class T>
struct DenseLayer {
  Param<T> w, b;

  DenseLayer() = default;
  DenseLayer(const std::string& name, int out_dim, int in_dim)
      : w(name + ".w", {out_dim, in_dim}), b(name + ".b", {out_dim}) {}

  Tensor<T> operator()(Tape<T>& tp, Tensor<T> x) {
    return tp.dense(x, tp.leaf(w), tp.leaf(b));
  }
  void collect(std::vector<Param<T>*>& out) {
    out.push_back(&w);
    out.push_back(&b);
  }
};

// Gated recurrent unit with reset/update gates and a tanh candidate:
//   r = sig(Wr x + Ur h + br)
//   u = sig(Wu x + Uu h + bu)
//   c = tanh(Wc x + Uc (r*h) + bc)
//   h' = (1-u)*h + u*c
template <class T>
struct GruCell {
  Param<T> w_r, u_r, b_r, w_u, u_u, b_u, w_c, u_c, b_c;
  int input_dim = 0, hidden_dim = 0;

  GruCell() = default;
  GruCell(const std::string& name, int in_dim, int h_dim)
      : w_r(name + ".w_r", {h_dim, in_dim}),
        u_r(name + ".u_r", {h_dim, h_dim}),
        b_r(name + ".b_r", {h_dim}),
        w_u(name + ".w_u", {h_dim, in_dim}),
        u_u(name + ".u_u", {h_dim, h_dim}),
        b_u(name + ".b_u", {h_dim}),
        w_c(name + ".w_c", {h_dim, in_dim}),
        u_c(name + ".u_c", {h_dim, h_dim}),
        b_c(name + ".b_c", {h_dim}),
        input_dim(in_dim),
        hidden_dim(h_dim) {}

  Tensor<T> operator()(Tape<T>& tp, Tensor<T> x, Tensor<T> h) {
    if (x.cols() != input_dim || h.cols() != hidden_dim)
      throw shape_error("gru_cell: width mismatch");
    auto r = tp.sigmoid(tp.add(tp.dense(x, tp.leaf(w_r), tp.leaf(b_r)),
                               tp.dense(h, tp.leaf(u_r))));
    auto u = tp.sigmoid(tp.add(tp.dense(x, tp.leaf(w_u), tp.leaf(b_u)),
                               tp.dense(h, tp.leaf(u_u))));
    auto c = tp.tanh(tp.add(tp.dense(x, tp.leaf(w_c), tp.leaf(b_c)),
                            tp.dense(tp.mul(r, h), tp.leaf(u_c))));
    auto keep = tp.sub(tp.full(u.shape(), 1.0), u);
    return tp.add(tp.mul(keep, h), tp.mul(u, c));
  }

  void collect(std::vector<Param<T>*>& out) {
    for (Param<T>* p : {&w_r, &u_r, &b_r, &w_u, &u_u, &b_u, &w_c, &u_c, &b_c})
      out.push_back(p);
  }
};

template <class T>
int64_t count_parameters(const std::vector<Param<T>*>& params) {
  int64_t n = 0;
  for (const Param<T>* p : params) n += p->size();
  return n;
}

template <class T>
void zero_grads(const std::vector<Param<T>*>& params) {
  for (Param<T>* p : params) std::fill(p->grad.begin(), p->grad.end(), T(0));
}

}  // namespace modnav::ad
