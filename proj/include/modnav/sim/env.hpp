#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "modnav/common.hpp"

namespace modnav::sim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double dist(const Vec2& a, const Vec2& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

struct EnvConfig {
  double world_half_extent = 10.0;
  int n_obstacles = 5;
  double obstacle_radius = 1.0;
  double food_radius = 0.5;
  double agent_radius = 0.3;
  double predator_speed = 0.15;        // units per step, pure pursuit
  double agent_speed_scale = 0.2;      // units per step at full thrust
  double turn_gain = 0.15;             // radians per step at full turn rate
  int max_steps = 256;
  double predator_penalty_radius = 2.5;
  double predator_proximity_radius = 3.0;
  double obstacle_proximity_radius = 1.5;
  uint64_t seed = 0;

  void validate() const;
};

struct EnvState {
  Vec2 agent_pos;
  double heading = 0.0;  // radians
  Vec2 food_pos;
  std::vector<Vec2> obstacles;
  Vec2 predator_pos;
  int step_count = 0;
  std::mt19937_64 rng;

  friend bool operator==(const EnvState&, const EnvState&) = default;
};

// Layout: [0..2) food dir (agent frame), [2..4) nearest-obstacle dir,
// [4..6) (cos h, sin h), [6] food dist, [7] obstacle dist, [8..10) predator dir.
struct Observation {
  std::array<double, 10> values{};
  friend bool operator==(const Observation&, const Observation&) = default;
};

inline constexpr int kObsDim = 10;

enum class Termination { Running, FoodReached, Collision, Timeout };

const char* to_string(Termination t);

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool terminated = false;
  Termination reason = Termination::Running;
  double predator_distance = 0.0;
  double obstacle_distance = 0.0;
};

// Bounded 2D world: one agent chasing food, static circular obstacles,
// a pursuing predator. Deterministic given the seed.
class Env {
 public:
  explicit Env(EnvConfig cfg);

  Observation reset(uint64_t seed);  // reseed and place everything
  Observation reset();               // re-place with the carried rng (auto-reset)

  // Advances one step; throws usage_error if the episode already ended.
  StepResult step(double thrust, double turn_rate);

  Observation observe() const { return observe(state_, cfg_); }
  static Observation observe(const EnvState& s, const EnvConfig& cfg);

  const EnvState& state() const { return state_; }
  const EnvConfig& config() const { return cfg_; }
  bool done() const { return done_; }

  // Installs an arbitrary non-terminated state (replay and verification).
  void set_state(EnvState s) {
    state_ = std::move(s);
    done_ = false;
  }

 private:
  void place();

  EnvConfig cfg_;
  EnvState state_;
  bool done_ = true;
};

// One row per step of a greedy/replayed trajectory.
struct TrajectoryRow {
  int step;
  double x, y, heading, u, omega, reward, d_pred, d_obs;
  bool terminated;
};

void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectoryRow>& rows);

}  // namespace modnav::sim
