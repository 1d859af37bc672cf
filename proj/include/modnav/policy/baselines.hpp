#pragma once

// Centralized baselines: a recurrent encoder-GRU policy and a monolithic
// feedforward policy, both with separate mean/value heads and a global
// learnable log-std.

#include <cmath>

#include "modnav/ad/init.hpp"
#include "modnav/ad/nn.hpp"
#include "modnav/policy/policy.hpp"

namespace modnav::policy {

template <class T>
class GruPolicy final : public Policy<T> {
 public:
  explicit GruPolicy(const ArchitectureSpec& spec) : spec_(spec) {
    enc0_ = {"enc.l0", spec.gru_encoder_hidden, sim::kObsDim};
    enc1_ = {"enc.l1", spec.gru_encoder_out, spec.gru_encoder_hidden};
    core_ = {"core.gru", spec.gru_encoder_out, spec.gru_hidden};
    mean_head_ = {"heads.mean", kActionDim, spec.gru_hidden};
    value_head_ = {"heads.value", 1, spec.gru_hidden};
    log_std_ = {"action.log_std", {kActionDim}};
  }

  Arch kind() const override { return Arch::CentralizedGru; }
  const ArchitectureSpec& spec() const override { return spec_; }

  std::vector<ad::Param<T>*> parameters() override {
    std::vector<ad::Param<T>*> out;
    enc0_.collect(out);
    enc1_.collect(out);
    core_.collect(out);
    mean_head_.collect(out);
    value_head_.collect(out);
    out.push_back(&log_std_);
    return out;
  }

  void init_weights(uint64_t seed) override {
    std::mt19937_64 rng(seed);
    for (auto* layer : {&enc0_, &enc1_, &value_head_}) {
      ad::init_orthogonal(layer->w, 1.0, rng);
      ad::init_constant(layer->b, 0.0);
    }
    for (ad::Param<T>* p : {&core_.w_r, &core_.u_r, &core_.w_u, &core_.u_u,
                            &core_.w_c, &core_.u_c})
      ad::init_orthogonal(*p, 1.0, rng);
    for (ad::Param<T>* p : {&core_.b_r, &core_.b_u, &core_.b_c})
      ad::init_constant(*p, 0.0);
    ad::init_orthogonal(mean_head_.w, 0.01, rng);
    ad::init_constant(mean_head_.b, 0.0);
    ad::init_constant(log_std_, 0.0);
  }

  PolicyStep<T> step(ad::Tape<T>& tp, ad::Tensor<T> obs,
                     const StateTensors<T>& state) override {
    auto enc = tp.tanh(enc1_(tp, tp.tanh(enc0_(tp, obs))));
    auto hidden = core_(tp, enc, state.hidden);
    PolicyStep<T> out;
    out.mean = mean_head_(tp, hidden);
    out.log_std = tp.clip(tp.leaf(log_std_), kLogStdMin, kLogStdMax);
    out.value = value_head_(tp, hidden);
    out.next_state.hidden = hidden;
    return out;
  }

  StateBatch initial_state(int batch) const override {
    StateBatch s;
    s.batch = batch;
    s.hidden.assign(size_t(batch) * spec_.gru_hidden, 0.0);
    return s;
  }

  StateTensors<T> inject_state(ad::Tape<T>& tp,
                               const StateBatch& s) const override {
    StateTensors<T> ts;
    ts.hidden = tp.constant(s.hidden, {s.batch, spec_.gru_hidden});
    return ts;
  }

  StateBatch extract_state(const StateTensors<T>& ts) const override {
    StateBatch s;
    s.batch = ts.hidden.rows();
    s.hidden.resize(ts.hidden.size());
    for (int64_t i = 0; i < ts.hidden.size(); ++i)
      s.hidden[i] = double(ts.hidden.data()[i]);
    return s;
  }

 private:
  ArchitectureSpec spec_;
  ad::DenseLayer<T> enc0_, enc1_;
  ad::GruCell<T> core_;
  ad::DenseLayer<T> mean_head_, value_head_;
  ad::Param<T> log_std_;
};

template <class T>
class MlpPolicy final : public Policy<T> {
 public:
  explicit MlpPolicy(const ArchitectureSpec& spec) : spec_(spec) {
    l0_ = {"trunk.l0", spec.mlp_h1, sim::kObsDim};
    l1_ = {"trunk.l1", spec.mlp_h2, spec.mlp_h1};
    l2_ = {"trunk.l2", spec.mlp_h3, spec.mlp_h2};
    mean_head_ = {"heads.mean", kActionDim, spec.mlp_h3};
    value_head_ = {"heads.value", 1, spec.mlp_h3};
    log_std_ = {"action.log_std", {kActionDim}};
  }

  Arch kind() const override { return Arch::CentralizedMlp; }
  const ArchitectureSpec& spec() const override { return spec_; }

  std::vector<ad::Param<T>*> parameters() override {
    std::vector<ad::Param<T>*> out;
    l0_.collect(out);
    l1_.collect(out);
    l2_.collect(out);
    mean_head_.collect(out);
    value_head_.collect(out);
    out.push_back(&log_std_);
    return out;
  }

  void init_weights(uint64_t seed) override {
    std::mt19937_64 rng(seed);
    for (auto* layer : {&l0_, &l1_, &l2_, &value_head_}) {
      ad::init_orthogonal(layer->w, 1.0, rng);
      ad::init_constant(layer->b, 0.0);
    }
    ad::init_orthogonal(mean_head_.w, 0.01, rng);
    ad::init_constant(mean_head_.b, 0.0);
    ad::init_constant(log_std_, 0.0);
  }

  PolicyStep<T> step(ad::Tape<T>& tp, ad::Tensor<T> obs,
                     const StateTensors<T>&) override {
    auto t = tp.tanh(l0_(tp, obs));
    t = tp.tanh(l1_(tp, t));
    t = tp.tanh(l2_(tp, t));
    PolicyStep<T> out;
    out.mean = mean_head_(tp, t);
    out.log_std = tp.clip(tp.leaf(log_std_), kLogStdMin, kLogStdMax);
    out.value = value_head_(tp, t);
    return out;
  }

  StateBatch initial_state(int batch) const override {
    StateBatch s;
    s.batch = batch;
    return s;
  }

  StateTensors<T> inject_state(ad::Tape<T>&, const StateBatch&) const override {
    return {};
  }

  StateBatch extract_state(const StateTensors<T>&) const override {
    return {};
  }

 private:
  ArchitectureSpec spec_;
  ad::DenseLayer<T> l0_, l1_, l2_;
  ad::DenseLayer<T> mean_head_, value_head_;
  ad::Param<T> log_std_;
};

}  // namespace modnav::policy
