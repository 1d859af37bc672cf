#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "modnav/ad/adam.hpp"
#include "modnav/ad/nn.hpp"
#include "modnav/policy/policy.hpp"
#include "modnav/train/config.hpp"
#include "modnav/train/gae.hpp"
#include "modnav/train/rollout.hpp"

namespace modnav::train {

inline constexpr double kLn2Pi = 1.8378770664093453;

// Entropy of a diagonal Gaussian with the given log-stds (closed form).
inline double gaussian_entropy(std::span<const double> log_std) {
  double h = 0.5 * double(log_std.size()) * (1.0 + kLn2Pi);
  for (double ls : log_std) h += ls;
  return h;
}

namespace detail {

// Applies the same episode-boundary resets the rollout applied: rows that
// terminated at step t are re-initialized before step t+1.
template <class T>
policy::StateTensors<T> mask_state(ad::Tape<T>& tp,
                                   const policy::StateTensors<T>& next,
                                   const std::vector<double>& keep,
                                   const policy::StateBatch& fresh) {
  const int B = static_cast<int>(keep.size());
  auto keep_t = tp.constant(keep, {B});
  auto apply = [&](const ad::Tensor<T>& x,
                   const std::vector<double>& init_row) -> ad::Tensor<T> {
    if (!x.ok()) return {};
    auto kept = tp.scale_rows(keep_t, x);
    bool has_init = false;
    for (double v : init_row) has_init = has_init || v != 0.0;
    if (!has_init) return kept;
    const int dim = static_cast<int>(init_row.size());
    std::vector<double> fill(size_t(B) * dim);
    for (int r = 0; r < B; ++r)
      for (int i = 0; i < dim; ++i)
        fill[size_t(r) * dim + i] = (1.0 - keep[r]) * init_row[i];
    return tp.add(kept, tp.constant(fill, {B, dim}));
  };
  policy::StateTensors<T> out;
  out.heading_state = apply(next.heading_state, fresh.heading_state);
  out.command_state = apply(next.command_state, fresh.command_state);
  out.prev_command = apply(next.prev_command, fresh.prev_command);
  out.prev_mode_probs = apply(next.prev_mode_probs, fresh.prev_mode_probs);
  out.hidden = apply(next.hidden, fresh.hidden);
  return out;
}

}  // namespace detail

// One PPO update: GAE + advantage normalization, then `n_epochs` passes of
// full-sequence backpropagation through time over every env sequence,
// starting from the stored initial recurrent state. KL/clip statistics are
// measured on the last epoch's forward pass.
template <class T>
MetricsRecord ppo_update(policy::Policy<T>& pol, const RolloutBuffer& buf,
                         ad::Adam<T>& opt, const TrainConfig& cfg) {
  const int B = buf.n_envs, L = buf.len;
  const int64_t N = int64_t(B) * L;
  const bool modular = pol.kind() == policy::Arch::Insect;

  std::vector<double> advantages(N), returns(N);
  for (int e = 0; e < B; ++e) {
    GaeResult g = compute_gae(
        std::span(buf.rewards).subspan(size_t(e) * L, L),
        std::span(buf.values).subspan(size_t(e) * L, L),
        std::span(buf.terminated).subspan(size_t(e) * L, L),
        buf.bootstrap_values[e], cfg.gamma, cfg.gae_lambda);
    std::copy(g.advantages.begin(), g.advantages.end(),
              advantages.begin() + size_t(e) * L);
    std::copy(g.returns.begin(), g.returns.end(),
              returns.begin() + size_t(e) * L);
  }
  normalize_advantages(advantages);

  auto params = pol.parameters();
  const policy::StateBatch fresh = pol.initial_state(1);

  std::vector<double> logp_new(N), ratios(N);
  double epoch_value_loss = 0.0, epoch_entropy = 0.0;

  std::vector<double> col_obs(size_t(B) * sim::kObsDim);
  std::vector<double> col_act(size_t(B) * policy::kActionDim);
  std::vector<double> col_scalar(B), col_adv(B), col_ret(B), keep(B);

  for (int epoch = 0; epoch < cfg.n_epochs; ++epoch) {
    ad::Tape<T> tp(/*grad_enabled=*/true);
    policy::StateTensors<T> st = pol.inject_state(tp, buf.initial_state);

    ad::Tensor<T> surr_sum, vloss_sum, l1_sum, mode_ent_sum, arb_ent_sum;
    ad::Tensor<T> log_std_t;
    auto accum = [&tp](ad::Tensor<T>& acc, ad::Tensor<T> x) {
      acc = acc.ok() ? tp.add(acc, x) : x;
    };

    for (int t = 0; t < L; ++t) {
      for (int e = 0; e < B; ++e) {
        const int64_t i = buf.flat(e, t);
        std::copy(buf.obs.begin() + i * sim::kObsDim,
                  buf.obs.begin() + (i + 1) * sim::kObsDim,
                  col_obs.begin() + size_t(e) * sim::kObsDim);
        std::copy(buf.actions.begin() + i * policy::kActionDim,
                  buf.actions.begin() + (i + 1) * policy::kActionDim,
                  col_act.begin() + size_t(e) * policy::kActionDim);
        col_scalar[e] = buf.log_probs[i];
        col_adv[e] = advantages[i];
        col_ret[e] = returns[i];
        keep[e] = buf.terminated[i] ? 0.0 : 1.0;
      }
      auto obs_t = tp.constant(col_obs, {B, sim::kObsDim});
      policy::PolicyStep<T> out = pol.step(tp, obs_t, st);
      log_std_t = out.log_std;

      auto acts_t = tp.constant(col_act, {B, policy::kActionDim});
      auto logp = tp.gaussian_log_prob(out.mean, out.log_std, acts_t);
      auto ratio = tp.exp(tp.sub(logp, tp.constant(col_scalar, {B, 1})));
      auto adv_t = tp.constant(col_adv, {B, 1});
      auto surr = tp.minimum(
          tp.mul(ratio, adv_t),
          tp.mul(tp.clip(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps),
                 adv_t));
      accum(surr_sum, tp.sum(surr));

      auto verr = tp.sub(tp.constant(col_ret, {B, 1}), out.value);
      accum(vloss_sum, tp.sum(tp.mul(verr, verr)));

      if (modular) {
        accum(l1_sum, tp.sum(tp.abs(out.command)));
        accum(mode_ent_sum, tp.sum(tp.categorical_entropy(out.mode_probs)));
        accum(arb_ent_sum,
              tp.sum(tp.categorical_entropy(out.arbiter_weights)));
      }

      for (int e = 0; e < B; ++e) {
        const int64_t i = buf.flat(e, t);
        logp_new[i] = double(logp.data()[e]);
        ratios[i] = double(ratio.data()[e]);
      }

      if (t + 1 < L) st = detail::mask_state(tp, out.next_state, keep, fresh);
    }

    const double inv_n = 1.0 / double(N);
    auto entropy = tp.add_scalar(
        tp.sum(log_std_t), 0.5 * policy::kActionDim * (1.0 + kLn2Pi));
    auto loss = tp.add(tp.scale(surr_sum, -inv_n),
                       tp.scale(vloss_sum, cfg.value_coef * inv_n));
    loss = tp.sub(loss, tp.scale(entropy, cfg.entropy_coef));
    if (modular) {
      loss = tp.add(loss, tp.scale(l1_sum, cfg.command_l1_coef * inv_n));
      loss = tp.sub(loss, tp.scale(mode_ent_sum,
                                   cfg.mode_entropy_coef * inv_n));
      loss = tp.add(loss, tp.scale(arb_ent_sum,
                                   cfg.arbiter_entropy_coef * inv_n));
    }

    const double loss_v = double(loss.scalar());
    if (!std::isfinite(loss_v))
      throw numeric_fault("trainer", "non-finite loss at epoch " +
                                         std::to_string(epoch));
    epoch_value_loss = double(vloss_sum.scalar()) * inv_n;
    epoch_entropy = double(entropy.scalar());

    ad::zero_grads(params);
    tp.backward(loss);
    ad::clip_grad_norm(params, cfg.grad_clip);
    opt.step(cfg.lr);
  }

  MetricsRecord rec;
  rec.value_loss = epoch_value_loss;
  rec.policy_entropy = epoch_entropy;
  double kl = 0.0;
  int64_t clipped = 0;
  for (int64_t i = 0; i < N; ++i) {
    kl += buf.log_probs[i] - logp_new[i];
    if (std::abs(ratios[i] - 1.0) > cfg.clip_eps) ++clipped;
  }
  rec.approx_kl = kl / double(N);
  rec.clip_fraction = double(clipped) / double(N);

  Diagnostics d = diagnostics(buf);
  rec.command_l1 = d.command_l1;
  rec.mode_entropy = d.mode_entropy;
  rec.module_entropy = d.module_entropy;

  if (!buf.completed_returns.empty()) {
    double s = 0.0;
    for (double r : buf.completed_returns) s += r;
    rec.mean_return = s / double(buf.completed_returns.size());
  } else {
    double s = 0.0;
    for (double r : buf.partial_returns_end) s += r;
    rec.mean_return = s / double(buf.partial_returns_end.size());
    rec.return_provisional = true;
  }
  return rec;
}

}  // namespace modnav::train
