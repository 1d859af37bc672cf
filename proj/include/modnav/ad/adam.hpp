#pragma once

#include <cmath>
#include <vector>

#include "modnav/ad/core.hpp"

namespace modnav::ad {

// Scales all gradients so their global L2 norm is at most max_norm.
// Returns the pre-clip norm. max_norm <= 0 disables clipping.
template <class T>
double clip_grad_norm(const std::vector<Param<T>*>& params, double max_norm) {
  double sq = 0.0;
  for (const Param<T>* p : params)
    for (T g : p->grad) sq += double(g) * double(g);
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const T s = static_cast<T>(max_norm / norm);
    for (Param<T>* p : params)
      for (T& g : p->grad) g *= s;
  }
  return norm;
}

// Adam with bias correction; beta1=0.9, beta2=0.999, eps=1e-8.
template <class T>
class Adam {
 public:
  explicit Adam(const std::vector<Param<T>*>& params, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8)
      : params_(params), beta1_(beta1), beta2_(beta2), eps_(eps) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (size_t i = 0; i < params.size(); ++i) {
      m_[i].assign(params[i]->size(), T(0));
      v_[i].assign(params[i]->size(), T(0));
    }
  }

  void step(double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (size_t i = 0; i < params_.size(); ++i) {
      Param<T>& p = *params_[i];
      for (int64_t k = 0; k < p.size(); ++k) {
        const double g = double(p.grad[k]);
        const double m = beta1_ * double(m_[i][k]) + (1.0 - beta1_) * g;
        const double v = beta2_ * double(v_[i][k]) + (1.0 - beta2_) * g * g;
        m_[i][k] = static_cast<T>(m);
        v_[i][k] = static_cast<T>(v);
        const double mhat = m / bc1;
        const double vhat = v / bc2;
        p.value[k] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + eps_));
      }
    }
  }

  int64_t steps_taken() const { return t_; }

 private:
  std::vector<Param<T>*> params_;
  double beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<std::vector<T>> m_, v_;
};

}  // namespace modnav::ad
