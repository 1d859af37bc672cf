#pragma once

// Distributed modular controller: per-stream sensory encoders feeding a
// fused representation, a ring-kernel heading state, a sparse associative
// memory, a recurrent command core emitting behavioral-mode probabilities
// and a low-dimensional command vector, and four local controllers whose
// action proposals are blended by a learned softmax arbiter.

#include <cmath>

#include "modnav/ad/init.hpp"
#include "modnav/ad/nn.hpp"
#include "modnav/policy/policy.hpp"

namespace modnav::policy {

template <class T>
class InsectPolicy final : public Policy<T> {
 public:
  explicit InsectPolicy(const ArchitectureSpec& spec) : spec_(spec) {
    const int obs = sim::kObsDim;
    const int sh = spec.stream_hidden;
    enc_v0_ = {"enc_v.l0", sh, 4};
    enc_v1_ = {"enc_v.l1", spec.vision_dim, sh};
    enc_p0_ = {"enc_p.l0", sh, 2};
    enc_p1_ = {"enc_p.l1", spec.proprio_dim, sh};
    enc_x0_ = {"enc_x.l0", sh, 4};
    enc_x1_ = {"enc_x.l1", spec.task_dim, sh};
    const int stream_total = spec.vision_dim + spec.proprio_dim + spec.task_dim;
    fuse_ = {"fuse", spec.fused_dim, stream_total};

    head_in_ = {"heading.w_in", spec.heading_dim, spec.fused_dim + 2};
    head_kernel_ = {"heading.kernel", {spec.heading_dim, spec.heading_dim}};
    head_cmd_ = {"heading.w_cmd", {spec.heading_dim, spec.command_dim}};
    head_ln_gain_ = {"heading.ln_gain", {spec.heading_dim}};
    head_ln_offset_ = {"heading.ln_offset", {spec.heading_dim}};

    mem_expand_ = {"memory.expand", spec.memory_expand, spec.fused_dim};
    mem_read_ = {"memory.read", spec.memory_dim, spec.memory_expand};
    mem_ctx_ = {"memory.w_ctx",
                {spec.memory_dim, spec.command_dim + spec.n_modes}};

    const int core_in = spec.fused_dim + spec.heading_dim + spec.memory_dim;
    core_ = {"core.gru", core_in, spec.core_dim};

    head_mode_ = {"heads.mode", spec.n_modes, spec.core_dim};
    head_command_ = {"heads.command", spec.command_dim, spec.core_dim};
    head_value_ = {"heads.value", 1, spec.core_dim};

    const int shared = spec.command_dim + spec.n_modes;
    const int ch = spec.controller_hidden;
    static constexpr const char* kNames[kControllers] = {"stabilize", "avoid",
                                                         "approach", "explore"};
    const int local_dims[kControllers] = {2, 5, 3, spec.fused_dim};
    for (int j = 0; j < kControllers; ++j) {
      const std::string base = std::string("ctl.") + kNames[j];
      const int in = local_dims[j] + shared;
      ctl_prop_h_[j] = {base + ".prop_h", ch, in};
      ctl_prop_out_[j] = {base + ".prop_out", kActionDim, ch};
      ctl_prio_h_[j] = {base + ".prio_h", ch, in};
      ctl_prio_out_[j] = {base + ".prio_out", 1, ch};
    }

    action_head_ = {"action.affine", kActionDim, kActionDim};
    log_std_ = {"action.log_std", {kActionDim}};
    (void)obs;
  }

  Arch kind() const override { return Arch::Insect; }
  const ArchitectureSpec& spec() const override { return spec_; }

  std::vector<ad::Param<T>*> parameters() override {
    std::vector<ad::Param<T>*> out;
    for (auto* layer : {&enc_v0_, &enc_v1_, &enc_p0_, &enc_p1_, &enc_x0_,
                        &enc_x1_, &fuse_, &head_in_})
      layer->collect(out);
    out.push_back(&head_kernel_);
    out.push_back(&head_cmd_);
    out.push_back(&head_ln_gain_);
    out.push_back(&head_ln_offset_);
    mem_expand_.collect(out);
    mem_read_.collect(out);
    out.push_back(&mem_ctx_);
    core_.collect(out);
    head_mode_.collect(out);
    head_command_.collect(out);
    head_value_.collect(out);
    for (int j = 0; j < kControllers; ++j) {
      ctl_prop_h_[j].collect(out);
      ctl_prop_out_[j].collect(out);
      ctl_prio_h_[j].collect(out);
      ctl_prio_out_[j].collect(out);
    }
    action_head_.collect(out);
    out.push_back(&log_std_);
    return out;
  }

  void init_weights(uint64_t seed) override {
    std::mt19937_64 rng(seed);
    const double tanh_gain = 1.0;
    for (auto* layer : {&enc_v0_, &enc_v1_, &enc_p0_, &enc_p1_, &enc_x0_,
                        &enc_x1_, &fuse_, &head_in_}) {
      ad::init_orthogonal(layer->w, tanh_gain, rng);
      ad::init_constant(layer->b, 0.0);
    }
    ad::init_ring_kernel(head_kernel_, 0.1);
    ad::init_orthogonal(head_cmd_, tanh_gain, rng);
    ad::init_constant(head_ln_gain_, 1.0);
    ad::init_constant(head_ln_offset_, 0.0);

    ad::init_orthogonal(mem_expand_.w, std::sqrt(2.0), rng);  // ReLU stream
    ad::init_constant(mem_expand_.b, 0.0);
    ad::init_orthogonal(mem_read_.w, tanh_gain, rng);
    ad::init_constant(mem_read_.b, 0.0);
    ad::init_orthogonal(mem_ctx_, tanh_gain, rng);

    for (ad::Param<T>* p : {&core_.w_r, &core_.u_r, &core_.w_u, &core_.u_u,
                            &core_.w_c, &core_.u_c})
      ad::init_orthogonal(*p, tanh_gain, rng);
    for (ad::Param<T>* p : {&core_.b_r, &core_.b_u, &core_.b_c})
      ad::init_constant(*p, 0.0);

    for (auto* layer : {&head_mode_, &head_command_, &head_value_}) {
      ad::init_orthogonal(layer->w, tanh_gain, rng);
      ad::init_constant(layer->b, 0.0);
    }
    for (int j = 0; j < kControllers; ++j) {
      ad::init_orthogonal(ctl_prop_h_[j].w, tanh_gain, rng);
      ad::init_constant(ctl_prop_h_[j].b, 0.0);
      ad::init_orthogonal(ctl_prop_out_[j].w, 0.01, rng);  // action path
      ad::init_constant(ctl_prop_out_[j].b, 0.0);
      ad::init_orthogonal(ctl_prio_h_[j].w, tanh_gain, rng);
      ad::init_constant(ctl_prio_h_[j].b, 0.0);
      ad::init_orthogonal(ctl_prio_out_[j].w, tanh_gain, rng);
      ad::init_constant(ctl_prio_out_[j].b, 0.0);
    }
    ad::init_identity(action_head_.w);
    ad::init_constant(action_head_.b, 0.0);
    ad::init_constant(log_std_, 0.0);
  }

  PolicyStep<T> step(ad::Tape<T>& tp, ad::Tensor<T> obs,
                     const StateTensors<T>& state) override {
    auto o_v = tp.slice_cols(obs, 0, 4);
    auto o_p = tp.slice_cols(obs, 4, 2);
    auto o_x = tp.slice_cols(obs, 6, 4);

    auto v = tp.tanh(enc_v1_(tp, tp.tanh(enc_v0_(tp, o_v))));
    auto p = tp.tanh(enc_p1_(tp, tp.tanh(enc_p0_(tp, o_p))));
    auto x = tp.tanh(enc_x1_(tp, tp.tanh(enc_x0_(tp, o_x))));
    auto fused = tp.tanh(fuse_(tp, tp.concat({v, p, x})));

    // heading: sensory drive + ring recurrence + command-dependent turn input
    auto head_pre =
        tp.add(tp.add(head_in_(tp, tp.concat({fused, o_p})),
                      tp.matmul(state.heading_state, tp.leaf(head_kernel_))),
               tp.dense(state.prev_command, tp.leaf(head_cmd_)));
    auto heading = tp.layer_norm(tp.tanh(head_pre), tp.leaf(head_ln_gain_),
                                 tp.leaf(head_ln_offset_));

    // sparse expansion code and context-gated readout
    auto code =
        tp.top_k_sparsify(tp.relu(mem_expand_(tp, fused)), spec_.memory_k);
    auto ctx = tp.concat({state.prev_command, state.prev_mode_probs});
    auto memory = tp.tanh(
        tp.add(mem_read_(tp, code), tp.dense(ctx, tp.leaf(mem_ctx_))));

    auto core_state =
        core_(tp, tp.concat({fused, heading, memory}), state.command_state);

    auto mode_probs = tp.softmax(head_mode_(tp, core_state));
    auto command = tp.tanh(head_command_(tp, core_state));
    auto value = head_value_(tp, core_state);

    ad::Tensor<T> locals[kControllers] = {
        o_p,
        tp.concat({tp.slice_cols(obs, 2, 2), tp.slice_cols(obs, 7, 1),
                   tp.slice_cols(obs, 8, 2)}),
        tp.concat({tp.slice_cols(obs, 0, 2), tp.slice_cols(obs, 6, 1)}),
        fused};

    ad::Tensor<T> proposals[kControllers];
    std::vector<ad::Tensor<T>> priorities(kControllers);
    for (int j = 0; j < kControllers; ++j) {
      auto in = tp.concat({locals[j], command, mode_probs});
      proposals[j] =
          tp.tanh(ctl_prop_out_[j](tp, tp.tanh(ctl_prop_h_[j](tp, in))));
      priorities[j] = ctl_prio_out_[j](tp, tp.tanh(ctl_prio_h_[j](tp, in)));
    }
    auto arbiter = tp.softmax(tp.concat(priorities));

    ad::Tensor<T> blended;
    for (int j = 0; j < kControllers; ++j) {
      auto contrib =
          tp.scale_rows(tp.slice_cols(arbiter, j, 1), proposals[j]);
      blended = j == 0 ? contrib : tp.add(blended, contrib);
    }

    PolicyStep<T> out;
    out.mean = action_head_(tp, blended);
    out.log_std = tp.clip(tp.leaf(log_std_), kLogStdMin, kLogStdMax);
    out.value = value;
    out.mode_probs = mode_probs;
    out.arbiter_weights = arbiter;
    out.command = command;
    out.next_state.heading_state = heading;
    out.next_state.command_state = core_state;
    out.next_state.prev_command = command;
    out.next_state.prev_mode_probs = mode_probs;
    return out;
  }

  StateBatch initial_state(int batch) const override {
    StateBatch s;
    s.batch = batch;
    s.heading_state.assign(size_t(batch) * spec_.heading_dim, 0.0);
    s.command_state.assign(size_t(batch) * spec_.core_dim, 0.0);
    s.prev_command.assign(size_t(batch) * spec_.command_dim, 0.0);
    s.prev_mode_probs.assign(size_t(batch) * spec_.n_modes,
                             1.0 / spec_.n_modes);
    return s;
  }

  StateTensors<T> inject_state(ad::Tape<T>& tp,
                               const StateBatch& s) const override {
    StateTensors<T> ts;
    ts.heading_state =
        tp.constant(s.heading_state, {s.batch, spec_.heading_dim});
    ts.command_state =
        tp.constant(s.command_state, {s.batch, spec_.core_dim});
    ts.prev_command = tp.constant(s.prev_command, {s.batch, spec_.command_dim});
    ts.prev_mode_probs =
        tp.constant(s.prev_mode_probs, {s.batch, spec_.n_modes});
    return ts;
  }

  StateBatch extract_state(const StateTensors<T>& ts) const override {
    StateBatch s;
    s.batch = ts.heading_state.rows();
    auto copy_out = [](const ad::Tensor<T>& t, std::vector<double>& dst) {
      dst.resize(t.size());
      for (int64_t i = 0; i < t.size(); ++i) dst[i] = double(t.data()[i]);
    };
    copy_out(ts.heading_state, s.heading_state);
    copy_out(ts.command_state, s.command_state);
    copy_out(ts.prev_command, s.prev_command);
    copy_out(ts.prev_mode_probs, s.prev_mode_probs);
    return s;
  }

  static constexpr int kControllers = 4;

 private:
  ArchitectureSpec spec_;

  ad::DenseLayer<T> enc_v0_, enc_v1_, enc_p0_, enc_p1_, enc_x0_, enc_x1_;
  ad::DenseLayer<T> fuse_;
  ad::DenseLayer<T> head_in_;
  ad::Param<T> head_kernel_, head_cmd_, head_ln_gain_, head_ln_offset_;
  ad::DenseLayer<T> mem_expand_, mem_read_;
  ad::Param<T> mem_ctx_;
  ad::GruCell<T> core_;
  ad::DenseLayer<T> head_mode_, head_command_, head_value_;
  ad::DenseLayer<T> ctl_prop_h_[kControllers], ctl_prop_out_[kControllers];
  ad::DenseLayer<T> ctl_prio_h_[kControllers], ctl_prio_out_[kControllers];
  ad::DenseLayer<T> action_head_;
  ad::Param<T> log_std_;
};

}  // namespace modnav::policy
