#include "modnav/policy/policy.hpp"

namespace modnav::policy {

const char* arch_name(Arch a) {
  switch (a) {
    case Arch::Insect: return "insect";
    case Arch::CentralizedGru: return "gru";
    case Arch::CentralizedMlp: return "mlp";
  }
  return "?";
}

std::optional<Arch> parse_arch(const std::string& name) {
  if (name == "insect") return Arch::Insect;
  if (name == "gru") return Arch::CentralizedGru;
  if (name == "mlp") return Arch::CentralizedMlp;
  return std::nullopt;
}

int64_t ArchitectureSpec::target_param_count() const {
  switch (kind) {
    case Arch::Insect: return 476063;
    case Arch::CentralizedGru: return 464133;
    case Arch::CentralizedMlp: return 438021;
  }
  return 0;
}

ObservationStreams split_observation(const sim::Observation& obs) {
  ObservationStreams s;
  std::copy(obs.values.begin(), obs.values.begin() + 4, s.vision.begin());
  std::copy(obs.values.begin() + 4, obs.values.begin() + 6, s.proprio.begin());
  std::copy(obs.values.begin() + 6, obs.values.end(), s.task.begin());
  return s;
}

StateBatch state_batch_from_single(const RecurrentState& s) {
  StateBatch b;
  b.batch = 1;
  b.heading_state = s.heading_state;
  b.command_state = s.command_state;
  b.prev_command = s.prev_command;
  b.prev_mode_probs = s.prev_mode_probs;
  b.hidden = s.hidden;
  return b;
}

RecurrentState state_single_from_batch(const StateBatch& b, int row) {
  RecurrentState s;
  if (b.batch == 0) return s;
  state_row_copy(b.heading_state, b.batch, row, s.heading_state);
  state_row_copy(b.command_state, b.batch, row, s.command_state);
  state_row_copy(b.prev_command, b.batch, row, s.prev_command);
  state_row_copy(b.prev_mode_probs, b.batch, row, s.prev_mode_probs);
  state_row_copy(b.hidden, b.batch, row, s.hidden);
  return s;
}

}  // namespace modnav::policy
