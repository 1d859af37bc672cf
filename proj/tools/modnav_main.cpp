// modnav: train and compare the modular navigation controller against
// centralized baselines on the 2D predator-navigation simulator.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "modnav/checks/checks.hpp"
#include "modnav/harness/config.hpp"
#include "modnav/harness/experiment.hpp"
#include "modnav/harness/plots.hpp"
#include "modnav/train/lane.hpp"
#include "modnav/train/run.hpp"

namespace fs = std::filesystem;
using namespace modnav;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitIncomplete = 3;

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value
};

harness::KeyValueConfig load_kv(const CommonOpts& opts) {
  harness::KeyValueConfig kv;
  if (!opts.config_path.empty())
    kv = harness::KeyValueConfig::from_file(opts.config_path);
  for (const std::string& kvpair : opts.overrides) {
    const auto eq = kvpair.find('=');
    if (eq == std::string::npos)
      throw config_error("--set expects key=value, got: " + kvpair);
    kv.set(kvpair.substr(0, eq), kvpair.substr(eq + 1));
  }
  return kv;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path,
                  "key = value config file (see README)");
  cmd->add_option("--set", opts.overrides,
                  "override any config key, e.g. --set train.lr=1e-4");
}

void write_snapshot(const std::string& dir,
                    const harness::ExperimentConfig& cfg) {
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / train::kSnapshotFileName);
  out << cfg.to_kv().serialize();
}

int cmd_train(const CommonOpts& common, const std::string& arch_name,
              uint64_t seed, int updates, const std::string& out_dir) {
  auto kv = load_kv(common);
  auto kind = policy::parse_arch(arch_name);
  if (!kind) throw config_error("unknown architecture: " + arch_name);

  harness::ExperimentConfig cfg;
  cfg.architectures = {harness::arch_spec_from_kv(kv, *kind)};
  cfg.seeds = {seed};
  cfg.env = harness::env_config_from_kv(kv);
  cfg.train = harness::train_config_from_kv(kv);
  cfg.train.seed = seed;
  if (updates >= 0) cfg.train.n_updates = updates;
  cfg.output_dir = out_dir;
  cfg.validate();

  const std::string dir = harness::run_dir(out_dir, *kind, seed);
  write_snapshot(dir, cfg);
  train::RunResult res = train::train_run<train::train_real>(
      cfg.architectures[0], cfg.env, cfg.train, dir,
      [](const train::MetricsRecord& rec) {
        std::fprintf(stderr, "update %d: return %.2f value_loss %.1f kl %.4g clip %.3f\n",
                     rec.update_index, rec.mean_return, rec.value_loss,
                     rec.approx_kl, rec.clip_fraction);
      });
  std::printf("run dir: %s (%zu updates%s)\n", dir.c_str(),
              res.metrics.size(), res.diverged ? ", diverged" : "");
  return res.diverged ? kExitNumeric : kExitOk;
}

int cmd_experiment(const CommonOpts& common, const std::string& out_dir,
                   int updates, const std::string& seeds_arg, int workers) {
  auto kv = load_kv(common);
  if (!out_dir.empty()) kv.set("experiment.output_dir", out_dir);
  if (!seeds_arg.empty()) kv.set("experiment.seeds", seeds_arg);
  if (updates >= 0) kv.set("train.n_updates", std::to_string(updates));
  if (workers > 0) kv.set("experiment.workers", std::to_string(workers));
  auto cfg = harness::ExperimentConfig::from_kv(kv);

  harness::SummaryTable table = harness::run_experiment(cfg);
  std::printf("%s", table.to_text().c_str());
  std::printf("summary written to %s/summary.csv\n", cfg.output_dir.c_str());
  return table.complete ? kExitOk : kExitIncomplete;
}

int cmd_summarize(const std::string& out_dir, const std::string& csv_out) {
  harness::SummaryTable table = harness::summarize_dir(out_dir);
  if (table.archs.empty()) {
    std::fprintf(stderr, "no runs found under %s\n", out_dir.c_str());
    return kExitIncomplete;
  }
  std::printf("%s", table.to_text().c_str());
  if (!csv_out.empty()) {
    std::ofstream out(csv_out);
    out << table.to_csv();
  }
  return table.complete ? kExitOk : kExitIncomplete;
}

int cmd_plot(const std::string& out_dir) {
  auto written = harness::emit_plots(out_dir, out_dir);
  if (written.empty()) {
    std::fprintf(stderr, "no plottable runs under %s\n", out_dir.c_str());
    return kExitIncomplete;
  }
  for (const std::string& p : written) std::printf("wrote %s\n", p.c_str());
  return kExitOk;
}

int cmd_rollout(const CommonOpts& common, const std::string& arch_name,
                const std::string& checkpoint, uint64_t seed,
                const std::string& out_path) {
  auto kv = load_kv(common);
  auto kind = policy::parse_arch(arch_name);
  if (!kind) throw config_error("unknown architecture: " + arch_name);
  auto spec = harness::arch_spec_from_kv(kv, *kind);
  auto pol = policy::make_policy<train::train_real>(spec, 0);
  auto params = pol->parameters();
  ad::load_checkpoint(checkpoint, params);

  sim::EnvConfig env_cfg = harness::env_config_from_kv(kv);
  sim::Env env(env_cfg);
  env.reset(seed);
  policy::RecurrentState state = pol->initial_recurrent_state();

  std::vector<sim::TrajectoryRow> rows;
  for (int t = 0; !env.done(); ++t) {
    auto [out, next_state] = pol->act(env.observe(), state);
    state = std::move(next_state);
    const double u = out.action_mean[0], w = out.action_mean[1];
    sim::StepResult r = env.step(u, w);  // greedy: mean action
    rows.push_back({t, env.state().agent_pos.x, env.state().agent_pos.y,
                    env.state().heading, u, w, r.reward, r.predator_distance,
                    r.obstacle_distance, r.terminated});
  }
  sim::write_trajectory_csv(out_path, rows);
  std::printf("wrote %zu steps to %s (%s)\n", rows.size(), out_path.c_str(),
              rows.empty() ? "?" : "episode finished");
  return kExitOk;
}

int run_checks(std::vector<checks::CheckResult> results) {
  std::printf("%s", checks::render_report(results).c_str());
  return checks::all_pass(results) ? kExitOk : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"modular vs centralized RL controllers on 2D predator navigation"};
  app.require_subcommand(1);

  CommonOpts train_common, exp_common, roll_common;
  std::string arch = "insect", out_dir = "runs", seeds_arg, csv_out;
  std::string checkpoint, traj_out = "trajectory.csv";
  uint64_t seed = 0;
  int updates = -1, workers = 0;
  uint64_t check_seed = 0;

  auto* train_cmd = app.add_subcommand("train", "train one architecture on one seed");
  train_cmd->add_option("--arch", arch, "insect | gru | mlp")->required();
  train_cmd->add_option("--seed", seed, "run seed")->required();
  train_cmd->add_option("--updates", updates, "PPO update count override");
  train_cmd->add_option("--out", out_dir, "output root directory");
  add_common(train_cmd, train_common);

  auto* exp_cmd = app.add_subcommand("experiment", "full architecture x seed grid");
  exp_cmd->add_option("--out", out_dir, "output root directory");
  exp_cmd->add_option("--updates", updates, "PPO update count override");
  exp_cmd->add_option("--seeds", seeds_arg, "comma-separated seed list");
  exp_cmd->add_option("--workers", workers, "parallel run workers");
  add_common(exp_cmd, exp_common);

  auto* sum_cmd = app.add_subcommand("summarize", "final-update statistics across runs");
  sum_cmd->add_option("--out", out_dir, "runs root directory")->required();
  sum_cmd->add_option("--csv", csv_out, "also write the table as CSV");

  auto* plot_cmd = app.add_subcommand("plot", "learning-curve SVGs from metrics CSVs");
  plot_cmd->add_option("--out", out_dir, "runs root directory")->required();

  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference gradient suite");
  grad_cmd->add_option("--seed", check_seed, "check seed");

  auto* env_cmd = app.add_subcommand("envcheck", "simulator reward-oracle suite");
  env_cmd->add_option("--seed", check_seed, "check seed");

  auto* roll_cmd = app.add_subcommand("rollout", "dump one greedy trajectory CSV");
  roll_cmd->add_option("--arch", arch, "insect | gru | mlp")->required();
  roll_cmd->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  roll_cmd->add_option("--seed", seed, "environment seed")->required();
  roll_cmd->add_option("--out", traj_out, "trajectory CSV path");
  add_common(roll_cmd, roll_common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (train_cmd->parsed())
      return cmd_train(train_common, arch, seed, updates, out_dir);
    if (exp_cmd->parsed())
      return cmd_experiment(exp_common, out_dir, updates, seeds_arg, workers);
    if (sum_cmd->parsed()) return cmd_summarize(out_dir, csv_out);
    if (plot_cmd->parsed()) return cmd_plot(out_dir);
    if (grad_cmd->parsed())
      return run_checks(checks::gradient_checks(check_seed));
    if (env_cmd->parsed()) return run_checks(checks::env_checks(check_seed));
    if (roll_cmd->parsed())
      return cmd_rollout(roll_common, arch, checkpoint, seed, traj_out);
  } catch (const numeric_fault& e) {
    std::fprintf(stderr, "numeric fault: %s\n", e.what());
    return kExitNumeric;
  } catch (const config_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const usage_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
