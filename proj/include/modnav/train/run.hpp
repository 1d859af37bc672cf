#pragma once

// Drives one (architecture, seed) training run end to end: seeded envs,
// policy, optimizer, rollout/update loop, incremental metrics CSV, final
// checkpoint, and a status marker. A run that hits a numeric fault keeps its
// rows so far and is flagged rather than retried.

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "modnav/ad/checkpoint.hpp"
#include "modnav/policy/factory.hpp"
#include "modnav/train/metrics_io.hpp"
#include "modnav/train/ppo.hpp"

namespace modnav::train {

struct RunResult {
  std::vector<MetricsRecord> metrics;
  bool diverged = false;
  std::string note;
};

inline constexpr const char* kMetricsFileName = "metrics.csv";
inline constexpr const char* kCheckpointFileName = "checkpoint.bin";
inline constexpr const char* kStatusFileName = "status";
inline constexpr const char* kSnapshotFileName = "config.snapshot";

// A run directory counts as complete once its status marker exists
// (diverged runs are complete: they are kept and flagged, not retried).
inline bool run_complete(const std::string& run_dir) {
  return std::filesystem::exists(
      std::filesystem::path(run_dir) / kStatusFileName);
}

template <class T>
RunResult train_run(const policy::ArchitectureSpec& arch,
                    sim::EnvConfig env_cfg, const TrainConfig& cfg,
                    const std::string& run_dir,
                    const std::function<void(const MetricsRecord&)>& on_update = {}) {
  cfg.validate();
  env_cfg.validate();

  std::ofstream csv;
  if (!run_dir.empty()) {
    std::filesystem::create_directories(run_dir);
    csv.open(std::filesystem::path(run_dir) / kMetricsFileName);
    if (!csv) throw config_error("cannot write metrics under " + run_dir);
    csv << kMetricsCsvHeader << "\n" << std::flush;
  }

  auto pol = policy::make_policy<T>(arch, derive_seed(cfg.seed, 1));
  auto params = pol->parameters();
  ad::Adam<T> opt(params);
  Rng action_rng(derive_seed(cfg.seed, 2));

  std::vector<sim::Env> envs;
  envs.reserve(cfg.n_envs);
  for (int e = 0; e < cfg.n_envs; ++e) {
    envs.emplace_back(env_cfg);
    envs.back().reset(derive_seed(cfg.seed, 100 + uint64_t(e)));
  }

  policy::StateBatch state = pol->initial_state(cfg.n_envs);
  std::vector<double> partial_returns(cfg.n_envs, 0.0);

  RunResult result;

  auto finish = [&](const std::string& status) {
    if (run_dir.empty()) return;
    ad::save_checkpoint(
        (std::filesystem::path(run_dir) / kCheckpointFileName).string(),
        params);
    std::ofstream st(std::filesystem::path(run_dir) / kStatusFileName);
    st << status << "\n";
  };

  for (int u = 1; u <= cfg.n_updates; ++u) {
    MetricsRecord rec;
    try {
      RolloutBuffer buf = collect_rollout(envs, *pol, state, partial_returns,
                                          action_rng, cfg);
      rec = ppo_update(*pol, buf, opt, cfg);
    } catch (const numeric_fault& nf) {
      result.diverged = true;
      result.note = "diverged update=" + std::to_string(u) + " (" +
                    nf.what() + ")";
      finish(result.note);
      return result;
    }
    rec.update_index = u;
    result.metrics.push_back(rec);
    if (csv.is_open()) csv << metrics_csv_row(rec) << "\n" << std::flush;
    if (on_update) on_update(rec);
  }
  finish("ok");
  return result;
}

}  // namespace modnav::train
