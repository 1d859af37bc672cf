#include <algorithm>
#include <cmath>
#include <cstdio>

#include "modnav/checks/checks.hpp"
#include "modnav/sim/env.hpp"

namespace modnav::checks {

namespace {

using sim::EnvConfig;
using sim::EnvState;
using sim::Vec2;

// Scalar reimplementation of one simulator step, kept independent of the
// simulator so reward disagreements cannot cancel out.
double oracle_step_reward(const EnvState& before, const EnvConfig& cfg,
                          double thrust, double turn) {
  const double h = cfg.world_half_extent;
  const double heading = before.heading + cfg.turn_gain * std::tanh(turn);
  const double step_len = cfg.agent_speed_scale * std::tanh(thrust);
  const double rx = before.agent_pos.x + step_len * std::cos(heading);
  const double ry = before.agent_pos.y + step_len * std::sin(heading);
  const bool boundary = std::abs(rx) >= h || std::abs(ry) >= h;
  const double ax = std::clamp(rx, -h, h);
  const double ay = std::clamp(ry, -h, h);

  double px = before.predator_pos.x, py = before.predator_pos.y;
  const double pd = std::hypot(ax - px, ay - py);
  if (pd > 1e-12) {
    const double move = std::min(cfg.predator_speed, pd);
    px = std::clamp(px + move * (ax - px) / pd, -h, h);
    py = std::clamp(py + move * (ay - py) / pd, -h, h);
  }

  const double d_pred = std::hypot(ax - px, ay - py);
  double d_obs = 2.0 * h;
  bool obstacle_hit = false;
  for (const Vec2& o : before.obstacles) {
    const double d = std::hypot(ax - o.x, ay - o.y);
    d_obs = std::min(d_obs, d);
    obstacle_hit = obstacle_hit || d < cfg.agent_radius + cfg.obstacle_radius;
  }
  const bool food =
      std::hypot(ax - before.food_pos.x, ay - before.food_pos.y) <
      cfg.food_radius;
  const bool collision = obstacle_hit || boundary;

  return -0.01 + (food ? 10.0 : 0.0) +
         (d_pred < cfg.predator_penalty_radius ? -25.0 : 0.0) -
         2.0 * std::max(0.0, cfg.predator_proximity_radius - d_pred) +
         (collision ? -10.0 : 0.0) -
         1.5 * std::max(0.0, cfg.obstacle_proximity_radius - d_obs);
}

EnvState random_state(const EnvConfig& cfg, Rng& rng) {
  const double lim = cfg.world_half_extent * 0.95;
  EnvState s;
  s.heading = rng.uniform(-3.14159265358979, 3.14159265358979);
  s.agent_pos = {rng.uniform(-lim, lim), rng.uniform(-lim, lim)};
  s.food_pos = {rng.uniform(-lim, lim), rng.uniform(-lim, lim)};
  s.predator_pos = {rng.uniform(-lim, lim), rng.uniform(-lim, lim)};
  for (int i = 0; i < cfg.n_obstacles; ++i)
    s.obstacles.push_back({rng.uniform(-lim, lim), rng.uniform(-lim, lim)});
  s.step_count = rng.uniform_int(0, cfg.max_steps - 2);
  s.rng.seed(rng.next());
  return s;
}

}  // namespace

std::vector<CheckResult> env_checks(uint64_t seed) {
  constexpr int kPairs = 1000;
  EnvConfig cfg;
  cfg.seed = seed;
  Rng rng(derive_seed(seed, 0xe27c));

  CheckResult reward_check{"reward_oracle_1000_pairs", true, 0.0, ""};
  CheckResult heading_check{"heading_change_bound", true, 0.0, ""};

  sim::Env env(cfg);
  for (int i = 0; i < kPairs; ++i) {
    EnvState st = random_state(cfg, rng);
    const double thrust = rng.uniform(-4.0, 4.0);
    const double turn = rng.uniform(-4.0, 4.0);

    const double expected = oracle_step_reward(st, cfg, thrust, turn);
    const double heading_before = st.heading;
    env.set_state(st);
    sim::StepResult res = env.step(thrust, turn);

    const double err = std::abs(res.reward - expected);
    reward_check.worst = std::max(reward_check.worst, err);
    if (err > 1e-9 && reward_check.pass) {
      reward_check.pass = false;
      char buf[128];
      std::snprintf(buf, sizeof(buf), "pair %d: env %.12g vs oracle %.12g", i,
                    res.reward, expected);
      reward_check.detail = buf;
    }

    const double dh = std::abs(env.state().heading - heading_before);
    heading_check.worst = std::max(heading_check.worst, dh);
    if (dh > cfg.turn_gain && heading_check.pass) {
      heading_check.pass = false;
      heading_check.detail = "heading moved more than the turn gain";
    }
  }
  return {reward_check, heading_check};
}

}  // namespace modnav::checks
