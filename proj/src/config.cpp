#include "modnav/harness/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace modnav::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot read config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

KeyValueConfig KeyValueConfig::from_string(const std::string& text) {
  KeyValueConfig kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("config line " + std::to_string(lineno) +
                         ": expected key = value");
    kv.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return kv;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  if (key.empty()) throw config_error("config: empty key");
  values_[key] = value;
}

bool KeyValueConfig::has(const std::string& key) const {
  return values_.count(key) > 0;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& def) const {
  auto it = values_.find(key);
  return it == values_.end() ? def : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  try {
    size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw config_error("config: bad number for " + key + ": " + it->second);
  }
}

int KeyValueConfig::get_int(const std::string& key, int def) const {
  const double v = get_double(key, double(def));
  const int i = static_cast<int>(v);
  if (double(i) != v) throw config_error("config: expected integer for " + key);
  return i;
}

uint64_t KeyValueConfig::get_u64(const std::string& key, uint64_t def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  try {
    return std::stoull(it->second);
  } catch (const std::exception&) {
    throw config_error("config: bad unsigned for " + key + ": " + it->second);
  }
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& key,
                                                  const std::string& def) const {
  const std::string raw = get_string(key, def);
  std::vector<std::string> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string KeyValueConfig::serialize() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

sim::EnvConfig env_config_from_kv(const KeyValueConfig& kv) {
  sim::EnvConfig c;
  c.world_half_extent = kv.get_double("env.world_half_extent", c.world_half_extent);
  c.n_obstacles = kv.get_int("env.n_obstacles", c.n_obstacles);
  c.obstacle_radius = kv.get_double("env.obstacle_radius", c.obstacle_radius);
  c.food_radius = kv.get_double("env.food_radius", c.food_radius);
  c.agent_radius = kv.get_double("env.agent_radius", c.agent_radius);
  c.predator_speed = kv.get_double("env.predator_speed", c.predator_speed);
  c.agent_speed_scale = kv.get_double("env.agent_speed_scale", c.agent_speed_scale);
  c.turn_gain = kv.get_double("env.turn_gain", c.turn_gain);
  c.max_steps = kv.get_int("env.max_steps", c.max_steps);
  c.predator_penalty_radius =
      kv.get_double("env.predator_penalty_radius", c.predator_penalty_radius);
  c.predator_proximity_radius = kv.get_double("env.predator_proximity_radius",
                                              c.predator_proximity_radius);
  c.obstacle_proximity_radius = kv.get_double("env.obstacle_proximity_radius",
                                              c.obstacle_proximity_radius);
  c.seed = kv.get_u64("env.seed", c.seed);
  return c;
}

train::TrainConfig train_config_from_kv(const KeyValueConfig& kv) {
  train::TrainConfig c;
  c.n_envs = kv.get_int("train.n_envs", c.n_envs);
  c.rollout_len = kv.get_int("train.rollout_len", c.rollout_len);
  c.n_updates = kv.get_int("train.n_updates", c.n_updates);
  c.gamma = kv.get_double("train.gamma", c.gamma);
  c.gae_lambda = kv.get_double("train.gae_lambda", c.gae_lambda);
  c.clip_eps = kv.get_double("train.clip_eps", c.clip_eps);
  c.lr = kv.get_double("train.lr", c.lr);
  c.n_epochs = kv.get_int("train.n_epochs", c.n_epochs);
  c.value_coef = kv.get_double("train.value_coef", c.value_coef);
  c.entropy_coef = kv.get_double("train.entropy_coef", c.entropy_coef);
  c.command_l1_coef = kv.get_double("train.command_l1_coef", c.command_l1_coef);
  c.mode_entropy_coef =
      kv.get_double("train.mode_entropy_coef", c.mode_entropy_coef);
  c.arbiter_entropy_coef =
      kv.get_double("train.arbiter_entropy_coef", c.arbiter_entropy_coef);
  c.grad_clip = kv.get_double("train.grad_clip", c.grad_clip);
  c.seed = kv.get_u64("train.seed", c.seed);
  return c;
}

policy::ArchitectureSpec arch_spec_from_kv(const KeyValueConfig& kv,
                                           policy::Arch kind) {
  policy::ArchitectureSpec s = policy::ArchitectureSpec::make(kind);
  auto geti = [&](const char* key, int& field) {
    field = kv.get_int(std::string("arch.") + key, field);
  };
  geti("stream_hidden", s.stream_hidden);
  geti("vision_dim", s.vision_dim);
  geti("proprio_dim", s.proprio_dim);
  geti("task_dim", s.task_dim);
  geti("fused_dim", s.fused_dim);
  geti("heading_dim", s.heading_dim);
  geti("memory_expand", s.memory_expand);
  geti("memory_k", s.memory_k);
  geti("memory_dim", s.memory_dim);
  geti("command_dim", s.command_dim);
  geti("n_modes", s.n_modes);
  geti("core_dim", s.core_dim);
  geti("controller_hidden", s.controller_hidden);
  geti("gru_encoder_hidden", s.gru_encoder_hidden);
  geti("gru_encoder_out", s.gru_encoder_out);
  geti("gru_hidden", s.gru_hidden);
  geti("mlp_h1", s.mlp_h1);
  geti("mlp_h2", s.mlp_h2);
  geti("mlp_h3", s.mlp_h3);
  return s;
}

void ExperimentConfig::validate() const {
  if (architectures.empty())
    throw config_error("experiment: no architectures selected");
  if (seeds.empty()) throw config_error("experiment: no seeds");
  for (size_t i = 0; i < seeds.size(); ++i)
    for (size_t j = i + 1; j < seeds.size(); ++j)
      if (seeds[i] == seeds[j])
        throw config_error("experiment: duplicate seed " +
                           std::to_string(seeds[i]));
  if (output_dir.empty()) throw config_error("experiment: empty output dir");
  env.validate();
  train.validate();
}

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  c.architectures = {policy::ArchitectureSpec::make(policy::Arch::Insect),
                     policy::ArchitectureSpec::make(policy::Arch::CentralizedGru),
                     policy::ArchitectureSpec::make(policy::Arch::CentralizedMlp)};
  c.seeds = {0, 1, 2, 3, 4, 5};
  return c;
}

ExperimentConfig ExperimentConfig::from_kv(const KeyValueConfig& kv) {
  ExperimentConfig c;
  for (const std::string& name :
       kv.get_list("experiment.architectures", "insect,gru,mlp")) {
    auto kind = policy::parse_arch(name);
    if (!kind) throw config_error("unknown architecture: " + name);
    c.architectures.push_back(arch_spec_from_kv(kv, *kind));
  }
  for (const std::string& s : kv.get_list("experiment.seeds", "0,1,2,3,4,5")) {
    try {
      c.seeds.push_back(std::stoull(s));
    } catch (const std::exception&) {
      throw config_error("bad seed: " + s);
    }
  }
  c.env = env_config_from_kv(kv);
  c.train = train_config_from_kv(kv);
  c.output_dir = kv.get_string("experiment.output_dir", c.output_dir);
  c.workers = kv.get_int("experiment.workers", c.workers);
  c.validate();
  return c;
}

KeyValueConfig ExperimentConfig::to_kv() const {
  KeyValueConfig kv;
  auto num = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  std::string archs;
  for (const auto& a : architectures) {
    if (!archs.empty()) archs += ",";
    archs += policy::arch_name(a.kind);
  }
  kv.set("experiment.architectures", archs);
  std::string seed_list;
  for (uint64_t s : seeds) {
    if (!seed_list.empty()) seed_list += ",";
    seed_list += std::to_string(s);
  }
  kv.set("experiment.seeds", seed_list);
  kv.set("experiment.output_dir", output_dir);
  kv.set("experiment.workers", std::to_string(workers));

  kv.set("env.world_half_extent", num(env.world_half_extent));
  kv.set("env.n_obstacles", std::to_string(env.n_obstacles));
  kv.set("env.obstacle_radius", num(env.obstacle_radius));
  kv.set("env.food_radius", num(env.food_radius));
  kv.set("env.agent_radius", num(env.agent_radius));
  kv.set("env.predator_speed", num(env.predator_speed));
  kv.set("env.agent_speed_scale", num(env.agent_speed_scale));
  kv.set("env.turn_gain", num(env.turn_gain));
  kv.set("env.max_steps", std::to_string(env.max_steps));
  kv.set("env.predator_penalty_radius", num(env.predator_penalty_radius));
  kv.set("env.predator_proximity_radius", num(env.predator_proximity_radius));
  kv.set("env.obstacle_proximity_radius", num(env.obstacle_proximity_radius));

  kv.set("train.n_envs", std::to_string(train.n_envs));
  kv.set("train.rollout_len", std::to_string(train.rollout_len));
  kv.set("train.n_updates", std::to_string(train.n_updates));
  kv.set("train.gamma", num(train.gamma));
  kv.set("train.gae_lambda", num(train.gae_lambda));
  kv.set("train.clip_eps", num(train.clip_eps));
  kv.set("train.lr", num(train.lr));
  kv.set("train.n_epochs", std::to_string(train.n_epochs));
  kv.set("train.value_coef", num(train.value_coef));
  kv.set("train.entropy_coef", num(train.entropy_coef));
  kv.set("train.command_l1_coef", num(train.command_l1_coef));
  kv.set("train.mode_entropy_coef", num(train.mode_entropy_coef));
  kv.set("train.arbiter_entropy_coef", num(train.arbiter_entropy_coef));
  kv.set("train.grad_clip", num(train.grad_clip));
  kv.set("train.seed", std::to_string(train.seed));
  return kv;
}

}  // namespace modnav::harness
