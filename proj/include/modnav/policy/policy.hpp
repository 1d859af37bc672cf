#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "modnav/ad/core.hpp"
#include "modnav/sim/env.hpp"

namespace modnav::policy {

enum class Arch { Insect, CentralizedGru, CentralizedMlp };

const char* arch_name(Arch a);
std::optional<Arch> parse_arch(const std::string& name);

// Widths for the three controllers. Defaults land each realized parameter
// count within 15% of its target.
struct ArchitectureSpec {
  Arch kind = Arch::Insect;

  // modular controller
  int stream_hidden = 128;
  int vision_dim = 96;
  int proprio_dim = 48;
  int task_dim = 96;
  int fused_dim = 192;
  int heading_dim = 32;
  int memory_expand = 512;
  int memory_k = 32;
  int memory_dim = 64;
  int command_dim = 16;
  int n_modes = 6;
  int core_dim = 160;
  int controller_hidden = 64;

  // recurrent baseline
  int gru_encoder_hidden = 192;
  int gru_encoder_out = 192;
  int gru_hidden = 288;

  // feedforward baseline
  int mlp_h1 = 512;
  int mlp_h2 = 512;
  int mlp_h3 = 256;

  int64_t target_param_count() const;

  static ArchitectureSpec make(Arch kind) {
    ArchitectureSpec s;
    s.kind = kind;
    return s;
  }
};

inline constexpr int kActionDim = 2;

// global log-std parameter is clamped to this range
inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

struct PolicyOutput {
  std::array<double, kActionDim> action_mean{};
  std::array<double, kActionDim> action_log_std{};
  double value = 0.0;
  std::optional<std::vector<double>> mode_probs;       // 6-way simplex
  std::optional<std::vector<double>> arbiter_weights;  // 4-way simplex
  std::optional<std::vector<double>> command;          // tanh range
};

// Single-sample recurrent state. Baselines use `hidden` (GRU) or nothing.
struct RecurrentState {
  std::vector<double> heading_state;
  std::vector<double> command_state;
  std::vector<double> prev_command;
  std::vector<double> prev_mode_probs;
  std::vector<double> hidden;
};

// Row-major [batch, dim] recurrent state for vectorized rollouts.
struct StateBatch {
  int batch = 0;
  std::vector<double> heading_state;
  std::vector<double> command_state;
  std::vector<double> prev_command;
  std::vector<double> prev_mode_probs;
  std::vector<double> hidden;
};

template <class T>
struct StateTensors {
  ad::Tensor<T> heading_state, command_state, prev_command, prev_mode_probs,
      hidden;
};

template <class T>
struct PolicyStep {
  ad::Tensor<T> mean;      // [B,2]
  ad::Tensor<T> log_std;   // [2], clamped global parameter
  ad::Tensor<T> value;     // [B,1]
  ad::Tensor<T> mode_probs, arbiter_weights, command;  // modular model only
  StateTensors<T> next_state;
};

// o_v = obs[0..4) directions, o_p = obs[4..6) heading features,
// o_x = obs[6..10) distances + predator direction.
struct ObservationStreams {
  std::array<double, 4> vision;
  std::array<double, 2> proprio;
  std::array<double, 4> task;
};
ObservationStreams split_observation(const sim::Observation& obs);

template <class T>
class Policy {
 public:
  virtual ~Policy() = default;

  virtual Arch kind() const = 0;
  virtual const ArchitectureSpec& spec() const = 0;
  virtual std::vector<ad::Param<T>*> parameters() = 0;
  virtual void init_weights(uint64_t seed) = 0;

  // Appends one control step to the tape. `obs` is [B,10]; state tensors are
  // those returned by inject_state or by the previous step.
  virtual PolicyStep<T> step(ad::Tape<T>& tp, ad::Tensor<T> obs,
                             const StateTensors<T>& state) = 0;

  virtual StateBatch initial_state(int batch) const = 0;
  virtual StateTensors<T> inject_state(ad::Tape<T>& tp,
                                       const StateBatch& state) const = 0;
  virtual StateBatch extract_state(const StateTensors<T>& ts) const = 0;

  int64_t count_parameters() {
    int64_t n = 0;
    for (const ad::Param<T>* p : parameters()) n += p->size();
    return n;
  }

  // Convenience single-sample forward without gradients.
  std::pair<PolicyOutput, RecurrentState> act(const sim::Observation& obs,
                                              const RecurrentState& state);

  RecurrentState initial_recurrent_state() const;
};

template <class T>
std::unique_ptr<Policy<T>> make_policy(const ArchitectureSpec& spec,
                                       uint64_t init_seed);

StateBatch state_batch_from_single(const RecurrentState& s);
RecurrentState state_single_from_batch(const StateBatch& b, int row);

template <class T>
std::pair<PolicyOutput, RecurrentState> Policy<T>::act(
    const sim::Observation& obs, const RecurrentState& state) {
  ad::Tape<T> tp(/*grad_enabled=*/false);
  auto obs_t = tp.constant(obs.values, {1, sim::kObsDim});
  auto st = inject_state(tp, state_batch_from_single(state));
  PolicyStep<T> ps = step(tp, obs_t, st);

  PolicyOutput out;
  for (int i = 0; i < kActionDim; ++i) {
    out.action_mean[i] = double(ps.mean.data()[i]);
    out.action_log_std[i] = double(ps.log_std.data()[i]);
  }
  out.value = double(ps.value.data()[0]);
  auto grab = [](const ad::Tensor<T>& t) {
    std::vector<double> v(t.size());
    for (int64_t i = 0; i < t.size(); ++i) v[i] = double(t.data()[i]);
    return v;
  };
  if (ps.mode_probs.ok()) out.mode_probs = grab(ps.mode_probs);
  if (ps.arbiter_weights.ok()) out.arbiter_weights = grab(ps.arbiter_weights);
  if (ps.command.ok()) out.command = grab(ps.command);

  StateBatch next = extract_state(ps.next_state);
  return {out, state_single_from_batch(next, 0)};
}

template <class T>
RecurrentState Policy<T>::initial_recurrent_state() const {
  return state_single_from_batch(initial_state(1), 0);
}

// ---- helpers shared by the implementations ----

inline void state_row_copy(const std::vector<double>& row_major, int batch,
                           int row, std::vector<double>& out) {
  if (row_major.empty()) {
    out.clear();
    return;
  }
  const size_t dim = row_major.size() / batch;
  out.assign(row_major.begin() + row * dim, row_major.begin() + (row + 1) * dim);
}

}  // namespace modnav::policy
