#include "modnav/sim/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace modnav::sim {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kPlacementRetries = 1000;
constexpr double kWallMargin = 1.0;       // placements keep this clear of walls
constexpr double kSpawnSeparation = 6.0;  // agent vs food and predator
constexpr double kObstacleSeparation = 2.5;

double draw(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vec2 draw_point(std::mt19937_64& rng, double half_extent) {
  const double lim = std::max(half_extent - kWallMargin, 0.0);
  const double x = draw(rng, -lim, lim);
  const double y = draw(rng, -lim, lim);
  return {x, y};
}

}  // namespace

const char* to_string(Termination t) {
  switch (t) {
    case Termination::Running: return "running";
    case Termination::FoodReached: return "food_reached";
    case Termination::Collision: return "collision";
    case Termination::Timeout: return "timeout";
  }
  return "?";
}

void EnvConfig::validate() const {
  if (world_half_extent <= 0 || obstacle_radius <= 0 || food_radius <= 0 ||
      agent_radius <= 0 || predator_speed <= 0 || agent_speed_scale <= 0 ||
      turn_gain <= 0 || predator_penalty_radius <= 0 ||
      predator_proximity_radius <= 0 || obstacle_proximity_radius <= 0)
    throw config_error("env: radii and speeds must be strictly positive");
  if (max_steps < 1) throw config_error("env: max_steps must be >= 1");
  if (n_obstacles < 0) throw config_error("env: n_obstacles must be >= 0");
}

Env::Env(EnvConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  state_.rng.seed(cfg_.seed);
}

Observation Env::reset(uint64_t seed) {
  state_.rng.seed(seed);
  place();
  return observe();
}

Observation Env::reset() {
  place();
  return observe();
}

void Env::place() {
  auto& rng = state_.rng;
  state_.heading = draw(rng, -kPi, kPi);
  state_.agent_pos = draw_point(rng, cfg_.world_half_extent);

  auto try_place = [&](auto&& accept) {
    for (int i = 0; i < kPlacementRetries; ++i) {
      Vec2 p = draw_point(rng, cfg_.world_half_extent);
      if (accept(p)) return p;
    }
    throw config_error("env: placement failed, world too crowded");
  };

  state_.food_pos = try_place([&](const Vec2& p) {
    return dist(p, state_.agent_pos) >= kSpawnSeparation;
  });
  state_.predator_pos = try_place([&](const Vec2& p) {
    return dist(p, state_.agent_pos) >= kSpawnSeparation;
  });

  state_.obstacles.clear();
  state_.obstacles.reserve(cfg_.n_obstacles);
  for (int k = 0; k < cfg_.n_obstacles; ++k) {
    state_.obstacles.push_back(try_place([&](const Vec2& p) {
      if (dist(p, state_.agent_pos) < kObstacleSeparation) return false;
      if (dist(p, state_.food_pos) < kObstacleSeparation) return false;
      for (const Vec2& o : state_.obstacles)
        if (dist(p, o) < kObstacleSeparation) return false;
      return true;
    }));
  }

  state_.step_count = 0;
  done_ = false;
}

StepResult Env::step(double thrust, double turn_rate) {
  if (done_) throw usage_error("env: step on a terminated episode");
  const double h = cfg_.world_half_extent;

  state_.heading += cfg_.turn_gain * std::tanh(turn_rate);
  const double speed = cfg_.agent_speed_scale * std::tanh(thrust);
  const double raw_x = state_.agent_pos.x + speed * std::cos(state_.heading);
  const double raw_y = state_.agent_pos.y + speed * std::sin(state_.heading);
  const bool boundary_hit = std::abs(raw_x) >= h || std::abs(raw_y) >= h;
  state_.agent_pos.x = std::clamp(raw_x, -h, h);
  state_.agent_pos.y = std::clamp(raw_y, -h, h);

  // pure pursuit, never overshooting the agent
  {
    const double d = dist(state_.predator_pos, state_.agent_pos);
    if (d > 1e-12) {
      const double move = std::min(cfg_.predator_speed, d);
      state_.predator_pos.x +=
          move * (state_.agent_pos.x - state_.predator_pos.x) / d;
      state_.predator_pos.y +=
          move * (state_.agent_pos.y - state_.predator_pos.y) / d;
      state_.predator_pos.x = std::clamp(state_.predator_pos.x, -h, h);
      state_.predator_pos.y = std::clamp(state_.predator_pos.y, -h, h);
    }
  }

  state_.step_count += 1;

  const double d_pred = dist(state_.agent_pos, state_.predator_pos);
  double d_obs = 2.0 * h;
  for (const Vec2& o : state_.obstacles)
    d_obs = std::min(d_obs, dist(state_.agent_pos, o));

  const bool food_reached = dist(state_.agent_pos, state_.food_pos) < cfg_.food_radius;
  bool obstacle_hit = false;
  for (const Vec2& o : state_.obstacles)
    if (dist(state_.agent_pos, o) < cfg_.agent_radius + cfg_.obstacle_radius)
      obstacle_hit = true;
  const bool collision = obstacle_hit || boundary_hit;

  double reward = -0.01;
  if (food_reached) reward += 10.0;
  if (d_pred < cfg_.predator_penalty_radius) reward -= 25.0;
  reward -= 2.0 * std::max(0.0, cfg_.predator_proximity_radius - d_pred);
  if (collision) reward -= 10.0;
  reward -= 1.5 * std::max(0.0, cfg_.obstacle_proximity_radius - d_obs);

  Termination reason = Termination::Running;
  if (food_reached)
    reason = Termination::FoodReached;
  else if (collision)
    reason = Termination::Collision;
  else if (state_.step_count >= cfg_.max_steps)
    reason = Termination::Timeout;

  StepResult res;
  res.reward = reward;
  res.terminated = reason != Termination::Running;
  res.reason = reason;
  res.predator_distance = d_pred;
  res.obstacle_distance = d_obs;
  done_ = res.terminated;
  res.observation = observe();
  return res;
}

Observation Env::observe(const EnvState& s, const EnvConfig& cfg) {
  Observation obs;
  const double c = std::cos(s.heading), sn = std::sin(s.heading);

  // world-frame direction rotated into the agent frame (by -heading)
  auto to_agent_frame = [&](const Vec2& target, double& out_x, double& out_y,
                            double& out_dist) {
    const double dx = target.x - s.agent_pos.x;
    const double dy = target.y - s.agent_pos.y;
    out_dist = std::sqrt(dx * dx + dy * dy);
    if (out_dist > 1e-12) {
      const double ux = dx / out_dist, uy = dy / out_dist;
      out_x = c * ux + sn * uy;
      out_y = -sn * ux + c * uy;
    } else {
      out_x = 0.0;
      out_y = 0.0;
    }
  };

  double d_food = 0.0;
  to_agent_frame(s.food_pos, obs.values[0], obs.values[1], d_food);

  double d_obs = 2.0 * cfg.world_half_extent;
  obs.values[2] = 0.0;
  obs.values[3] = 0.0;
  const Vec2* nearest = nullptr;
  for (const Vec2& o : s.obstacles) {
    const double d = dist(s.agent_pos, o);
    if (d < d_obs) {
      d_obs = d;
      nearest = &o;
    }
  }
  if (nearest) {
    double d_tmp = 0.0;
    to_agent_frame(*nearest, obs.values[2], obs.values[3], d_tmp);
  }

  obs.values[4] = c;
  obs.values[5] = sn;
  obs.values[6] = d_food;
  obs.values[7] = d_obs;

  double d_pred = 0.0;
  to_agent_frame(s.predator_pos, obs.values[8], obs.values[9], d_pred);
  return obs;
}

void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectoryRow>& rows) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open trajectory file: " + path);
  out << "step,x,y,heading,u,omega,reward,d_pred,d_obs,terminated\n";
  char buf[256];
  for (const TrajectoryRow& r : rows) {
    std::snprintf(buf, sizeof(buf),
                  "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                  r.step, r.x, r.y, r.heading, r.u, r.omega, r.reward, r.d_pred,
                  r.d_obs, r.terminated ? 1 : 0);
    out << buf;
  }
}

}  // namespace modnav::sim
