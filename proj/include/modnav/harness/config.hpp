#pragma once

#include <map>
#include <string>
#include <vector>

#include "modnav/policy/policy.hpp"
#include "modnav/sim/env.hpp"
#include "modnav/train/config.hpp"

namespace modnav::harness {

// Plain-text `key = value` file; '#' starts a comment, lists are
// comma-separated. Later assignments win, as do explicit set() overrides.
class KeyValueConfig {
 public:
  static KeyValueConfig from_file(const std::string& path);
  static KeyValueConfig from_string(const std::string& text);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key, double def) const;
  int get_int(const std::string& key, int def) const;
  uint64_t get_u64(const std::string& key, uint64_t def) const;
  std::vector<std::string> get_list(const std::string& key,
                                    const std::string& def) const;

  std::string serialize() const;  // deterministic, key-sorted
  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

struct ExperimentConfig {
  std::vector<policy::ArchitectureSpec> architectures;
  std::vector<uint64_t> seeds;
  sim::EnvConfig env;
  train::TrainConfig train;
  std::string output_dir = "runs";
  int workers = 0;  // 0 -> hardware concurrency

  void validate() const;
  static ExperimentConfig defaults();  // paper protocol
  static ExperimentConfig from_kv(const KeyValueConfig& kv);
  KeyValueConfig to_kv() const;
};

sim::EnvConfig env_config_from_kv(const KeyValueConfig& kv);
train::TrainConfig train_config_from_kv(const KeyValueConfig& kv);
policy::ArchitectureSpec arch_spec_from_kv(const KeyValueConfig& kv,
                                           policy::Arch kind);

}  // namespace modnav::harness
