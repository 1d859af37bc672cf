#pragma once

#include <cstdint>
#include <optional>

#include "modnav/common.hpp"

namespace modnav::train {

// Defaults are the paper-protocol settings: 16 envs, rollout 256, 75 updates,
// gamma 0.99, lambda 0.95, clip 0.2, lr 3e-4, 4 epochs per update.
struct TrainConfig {
  int n_envs = 16;
  int rollout_len = 256;
  int n_updates = 75;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  double lr = 3e-4;
  int n_epochs = 4;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double command_l1_coef = 0.01;       // modular model only
  double mode_entropy_coef = 0.01;     // encourages diffuse modes
  double arbiter_entropy_coef = 0.01;  // penalizes diffuse arbitration
  double grad_clip = 0.5;              // global L2 norm; <= 0 disables
  uint64_t seed = 0;

  void validate() const {
    if (n_envs < 1 || rollout_len < 1 || n_updates < 0 || n_epochs < 1)
      throw config_error("train: counts must be positive");
    if (gamma <= 0 || gamma > 1 || gae_lambda < 0 || gae_lambda > 1)
      throw config_error("train: gamma/lambda out of range");
    if (clip_eps <= 0 || lr < 0)
      throw config_error("train: clip_eps must be > 0, lr >= 0");
  }
};

// One row of training diagnostics per PPO update.
struct MetricsRecord {
  int update_index = 0;
  double mean_return = 0.0;
  bool return_provisional = false;  // no episode finished in this rollout
  double value_loss = 0.0;
  double policy_entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  std::optional<double> command_l1;
  std::optional<double> mode_entropy;
  std::optional<double> module_entropy;
};

}  // namespace modnav::train
