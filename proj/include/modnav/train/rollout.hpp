#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "modnav/policy/policy.hpp"
#include "modnav/sim/env.hpp"
#include "modnav/train/config.hpp"

namespace modnav::train {

// Env-major storage: sample (e, t) lives at index e*len + t.
struct RolloutBuffer {
  int n_envs = 0;
  int len = 0;
  std::vector<double> obs;        // [n_envs*len*10]
  std::vector<double> actions;    // [n_envs*len*2]
  std::vector<double> log_probs;  // [n_envs*len]
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<uint8_t> terminated;
  std::vector<double> bootstrap_values;  // per env, value of the obs after the last step
  policy::StateBatch initial_state;      // recurrent state at rollout start

  // modular-model diagnostics, empty for baselines
  std::vector<double> mode_probs;       // [n_envs*len*6]
  std::vector<double> arbiter_weights;  // [n_envs*len*4]
  std::vector<double> command;          // [n_envs*len*16]

  std::vector<double> completed_returns;    // episodes finished this rollout
  std::vector<double> partial_returns_end;  // per env, running return at end

  int64_t flat(int e, int t) const { return int64_t(e) * len + t; }
};

struct Diagnostics {
  std::optional<double> command_l1;      // mean absolute command component
  std::optional<double> mode_entropy;    // batch-mean Shannon entropy, nats
  std::optional<double> module_entropy;  // arbiter-weight entropy, nats
};

// Batch-mean diagnostics over every step of an insect-model buffer;
// absent values for baselines.
Diagnostics diagnostics(const RolloutBuffer& buffer);

inline void reset_state_row(policy::StateBatch& state,
                            const policy::StateBatch& fresh, int row) {
  auto apply = [&](std::vector<double>& dst, const std::vector<double>& src) {
    if (dst.empty()) return;
    const size_t dim = src.size();
    std::copy(src.begin(), src.end(), dst.begin() + size_t(row) * dim);
  };
  apply(state.heading_state, fresh.heading_state);
  apply(state.command_state, fresh.command_state);
  apply(state.prev_command, fresh.prev_command);
  apply(state.prev_mode_probs, fresh.prev_mode_probs);
  apply(state.hidden, fresh.hidden);
}

// Steps all envs `rollout_len` times in lockstep, sampling from the current
// policy. Terminated envs auto-reset (carrying their rng) and their recurrent
// state re-initializes. `state` and `partial_returns` persist across calls.
template <class T>
RolloutBuffer collect_rollout(std::vector<sim::Env>& envs,
                              policy::Policy<T>& pol,
                              policy::StateBatch& state,
                              std::vector<double>& partial_returns,
                              Rng& action_rng, const TrainConfig& cfg) {
  const int B = static_cast<int>(envs.size());
  const int L = cfg.rollout_len;
  const bool modular = pol.kind() == policy::Arch::Insect;

  RolloutBuffer buf;
  buf.n_envs = B;
  buf.len = L;
  buf.obs.resize(size_t(B) * L * sim::kObsDim);
  buf.actions.resize(size_t(B) * L * policy::kActionDim);
  buf.log_probs.resize(size_t(B) * L);
  buf.rewards.resize(size_t(B) * L);
  buf.values.resize(size_t(B) * L);
  buf.terminated.assign(size_t(B) * L, 0);
  buf.bootstrap_values.resize(B);
  buf.initial_state = state;
  if (modular) {
    buf.mode_probs.resize(size_t(B) * L * 6);
    buf.arbiter_weights.resize(size_t(B) * L * 4);
    buf.command.resize(size_t(B) * L * 16);
  }

  const policy::StateBatch fresh = pol.initial_state(1);
  std::vector<double> obs_row(size_t(B) * sim::kObsDim);

  auto forward = [&](ad::Tape<T>& tp) {
    for (int e = 0; e < B; ++e) {
      const sim::Observation o = envs[e].observe();
      std::copy(o.values.begin(), o.values.end(),
                obs_row.begin() + size_t(e) * sim::kObsDim);
    }
    auto obs_t = tp.constant(obs_row, {B, sim::kObsDim});
    auto st = pol.inject_state(tp, state);
    return pol.step(tp, obs_t, st);
  };

  for (int t = 0; t < L; ++t) {
    ad::Tape<T> tp(/*grad_enabled=*/false);
    policy::PolicyStep<T> out = forward(tp);

    // sample in env-major, component-minor order
    std::vector<double> acts(size_t(B) * policy::kActionDim);
    for (int e = 0; e < B; ++e)
      for (int d = 0; d < policy::kActionDim; ++d) {
        const double mu = double(out.mean.data()[e * policy::kActionDim + d]);
        const double sigma = std::exp(double(out.log_std.data()[d]));
        acts[size_t(e) * policy::kActionDim + d] =
            mu + sigma * action_rng.normal();
      }
    auto acts_t = tp.constant(acts, {B, policy::kActionDim});
    auto logp_t = tp.gaussian_log_prob(out.mean, out.log_std, acts_t);

    for (int e = 0; e < B; ++e) {
      const int64_t i = buf.flat(e, t);
      std::copy(obs_row.begin() + size_t(e) * sim::kObsDim,
                obs_row.begin() + size_t(e + 1) * sim::kObsDim,
                buf.obs.begin() + i * sim::kObsDim);
      for (int d = 0; d < policy::kActionDim; ++d)
        buf.actions[i * policy::kActionDim + d] =
            acts[size_t(e) * policy::kActionDim + d];
      buf.log_probs[i] = double(logp_t.data()[e]);
      buf.values[i] = double(out.value.data()[e]);
      if (modular) {
        for (int k = 0; k < 6; ++k)
          buf.mode_probs[i * 6 + k] = double(out.mode_probs.data()[e * 6 + k]);
        for (int k = 0; k < 4; ++k)
          buf.arbiter_weights[i * 4 + k] =
              double(out.arbiter_weights.data()[e * 4 + k]);
        for (int k = 0; k < 16; ++k)
          buf.command[i * 16 + k] = double(out.command.data()[e * 16 + k]);
      }
      if (!std::isfinite(buf.log_probs[i]) || !std::isfinite(buf.values[i]) ||
          !std::isfinite(acts[size_t(e) * policy::kActionDim]) ||
          !std::isfinite(acts[size_t(e) * policy::kActionDim + 1]))
        throw numeric_fault("rollout", "non-finite policy output at step " +
                                           std::to_string(t));
    }

    // advance the recurrent state, then step the envs
    state = pol.extract_state(out.next_state);
    for (int e = 0; e < B; ++e) {
      const int64_t i = buf.flat(e, t);
      sim::StepResult r =
          envs[e].step(buf.actions[i * policy::kActionDim],
                       buf.actions[i * policy::kActionDim + 1]);
      if (!std::isfinite(r.reward))
        throw numeric_fault("rollout", "non-finite reward");
      buf.rewards[i] = r.reward;
      buf.terminated[i] = r.terminated ? 1 : 0;
      partial_returns[e] += r.reward;
      if (r.terminated) {
        buf.completed_returns.push_back(partial_returns[e]);
        partial_returns[e] = 0.0;
        envs[e].reset();
        reset_state_row(state, fresh, e);
      }
    }
  }

  // bootstrap value of the final observation (terminal masking is in GAE)
  {
    ad::Tape<T> tp(/*grad_enabled=*/false);
    policy::PolicyStep<T> out = forward(tp);
    for (int e = 0; e < B; ++e)
      buf.bootstrap_values[e] = double(out.value.data()[e]);
  }
  buf.partial_returns_end = partial_returns;
  return buf;
}

}  // namespace modnav::train
