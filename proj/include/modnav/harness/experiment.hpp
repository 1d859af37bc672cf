#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "modnav/harness/config.hpp"
#include "modnav/train/metrics_io.hpp"

namespace modnav::harness {

struct RunRecord {
  policy::Arch arch;
  uint64_t seed = 0;
  std::string dir;
  bool diverged = false;
  bool skipped = false;  // already complete before this invocation
  std::optional<train::MetricsRecord> final_row;
  int rows = 0;
};

struct MetricStat {
  double mean = 0.0;
  double stddev = 0.0;  // sample std across seeds
  int n = 0;
};

struct ArchSummary {
  policy::Arch arch;
  int n_runs = 0;
  int n_diverged = 0;
  std::map<std::string, MetricStat> metrics;  // keyed by csv column name
};

// Final-update statistics per architecture plus relative improvements of the
// modular model over each baseline, signed by each metric's better direction.
struct SummaryTable {
  std::vector<ArchSummary> archs;
  // keys like "mean_return_vs_mlp"; values in percent
  std::map<std::string, double> improvements;
  std::vector<std::string> flagged;  // diverged or short runs, for the report
  bool complete = true;              // every requested run had a final row

  const ArchSummary* find(policy::Arch a) const;
  std::string to_text() const;
  std::string to_csv() const;
};

std::string run_dir(const std::string& root, policy::Arch arch, uint64_t seed);

// Trains every (architecture, seed) pair into output_dir/<arch>/<seed>/,
// skipping completed runs, fanning out across worker threads, then
// summarizes the final rows.
SummaryTable run_experiment(const ExperimentConfig& cfg);

// Summary from explicit metrics CSV paths laid out as <root>/<arch>/<seed>/.
SummaryTable summarize(const std::vector<std::string>& csv_paths);

// Convenience: discovers <root>/<arch>/<seed>/metrics.csv.
SummaryTable summarize_dir(const std::string& root);

std::vector<RunRecord> collect_runs(const std::string& root);

}  // namespace modnav::harness
