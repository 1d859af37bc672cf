#include "modnav/harness/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "modnav/train/lane.hpp"
#include "modnav/train/run.hpp"

namespace fs = std::filesystem;

namespace modnav::harness {

namespace {

const char* kImprovementMetrics[] = {"mean_return", "return_std", "value_loss",
                                     "clip_fraction"};

std::string fmt(double v, int prec = 6) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
  return buf;
}

std::optional<double> metric_by_name(const train::MetricsRecord& r,
                                     const std::string& name) {
  if (name == "mean_return") return r.mean_return;
  if (name == "value_loss") return r.value_loss;
  if (name == "policy_entropy") return r.policy_entropy;
  if (name == "approx_kl") return r.approx_kl;
  if (name == "clip_fraction") return r.clip_fraction;
  if (name == "command_l1") return r.command_l1;
  if (name == "mode_entropy") return r.mode_entropy;
  if (name == "module_entropy") return r.module_entropy;
  return std::nullopt;
}

const char* kMetricNames[] = {"mean_return",   "value_loss", "policy_entropy",
                              "approx_kl",     "clip_fraction", "command_l1",
                              "mode_entropy",  "module_entropy"};

MetricStat stat_of(const std::vector<double>& xs) {
  MetricStat s;
  s.n = static_cast<int>(xs.size());
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= xs.size();
  if (xs.size() > 1) {
    double var = 0.0;
    for (double x : xs) var += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(var / (xs.size() - 1));
  }
  return s;
}

bool read_run_status(const std::string& dir, bool& diverged) {
  std::ifstream st(fs::path(dir) / train::kStatusFileName);
  if (!st) return false;
  std::string line;
  std::getline(st, line);
  diverged = line.rfind("diverged", 0) == 0;
  return true;
}

SummaryTable summarize_records(std::vector<RunRecord> runs) {
  SummaryTable table;
  std::map<policy::Arch, std::vector<const RunRecord*>> by_arch;
  for (const RunRecord& r : runs) by_arch[r.arch].push_back(&r);

  for (auto& [arch, rs] : by_arch) {
    ArchSummary summary;
    summary.arch = arch;
    for (const char* name : kMetricNames) {
      std::vector<double> xs;
      for (const RunRecord* r : rs) {
        if (!r->final_row) continue;
        if (auto v = metric_by_name(*r->final_row, name)) xs.push_back(*v);
      }
      if (!xs.empty()) summary.metrics[name] = stat_of(xs);
    }
    for (const RunRecord* r : rs) {
      if (r->final_row) ++summary.n_runs;
      if (r->diverged) ++summary.n_diverged;
      if (r->diverged)
        table.flagged.push_back(std::string(policy::arch_name(arch)) + "/" +
                                std::to_string(r->seed) + ": diverged");
      if (!r->final_row) {
        table.flagged.push_back(std::string(policy::arch_name(arch)) + "/" +
                                std::to_string(r->seed) + ": no data");
        table.complete = false;
      }
    }
    table.archs.push_back(std::move(summary));
  }

  // relative improvements of the modular model over each baseline, using
  // each metric's better direction (return: higher; losses/clip: lower)
  const ArchSummary* insect = table.find(policy::Arch::Insect);
  for (policy::Arch base :
       {policy::Arch::CentralizedMlp, policy::Arch::CentralizedGru}) {
    const ArchSummary* b = table.find(base);
    if (!insect || !b) continue;
    const std::string suffix =
        std::string("_vs_") + policy::arch_name(base);
    for (const char* name : kImprovementMetrics) {
      const bool is_std = std::string(name) == "return_std";
      const std::string key = is_std ? "mean_return" : name;
      auto ii = insect->metrics.find(key);
      auto bi = b->metrics.find(key);
      if (ii == insect->metrics.end() || bi == b->metrics.end()) continue;
      const double iv = is_std ? ii->second.stddev : ii->second.mean;
      const double bv = is_std ? bi->second.stddev : bi->second.mean;
      double pct = 0.0;
      if (std::string(name) == "mean_return") {
        if (bv != 0.0) pct = 100.0 * (iv - bv) / std::abs(bv);  // higher better
      } else {
        if (bv != 0.0) pct = 100.0 * (bv - iv) / bv;  // lower better
      }
      table.improvements[std::string(name) + suffix] = pct;
    }
  }
  return table;
}

}  // namespace

const ArchSummary* SummaryTable::find(policy::Arch a) const {
  for (const ArchSummary& s : archs)
    if (s.arch == a) return &s;
  return nullptr;
}

std::string SummaryTable::to_text() const {
  std::string out;
  for (const ArchSummary& s : archs) {
    out += std::string(policy::arch_name(s.arch)) + " (" +
           std::to_string(s.n_runs) + " runs";
    if (s.n_diverged > 0)
      out += ", " + std::to_string(s.n_diverged) + " diverged";
    out += ")\n";
    for (const char* name : kMetricNames) {
      auto it = s.metrics.find(name);
      if (it == s.metrics.end()) continue;
      out += "  " + std::string(name) + ": " + fmt(it->second.mean) + " +- " +
             fmt(it->second.stddev) + "\n";
    }
  }
  if (!improvements.empty()) {
    out += "relative improvement of insect (percent):\n";
    for (const auto& [k, v] : improvements)
      out += "  " + k + ": " + fmt(v, 4) + "\n";
  }
  for (const std::string& f : flagged) out += "flagged: " + f + "\n";
  return out;
}

std::string SummaryTable::to_csv() const {
  std::string out = "arch,metric,mean,stddev,n\n";
  for (const ArchSummary& s : archs)
    for (const char* name : kMetricNames) {
      auto it = s.metrics.find(name);
      if (it == s.metrics.end()) continue;
      out += std::string(policy::arch_name(s.arch)) + "," + name + "," +
             fmt(it->second.mean, 17) + "," + fmt(it->second.stddev, 17) +
             "," + std::to_string(it->second.n) + "\n";
    }
  for (const auto& [k, v] : improvements)
    out += "improvement," + k + "," + fmt(v, 17) + ",,\n";
  return out;
}

std::string run_dir(const std::string& root, policy::Arch arch,
                    uint64_t seed) {
  return (fs::path(root) / policy::arch_name(arch) / std::to_string(seed))
      .string();
}

SummaryTable run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.output_dir);

  struct Task {
    policy::ArchitectureSpec arch;
    uint64_t seed;
    std::string dir;
  };
  std::vector<Task> tasks;
  for (const auto& arch : cfg.architectures)
    for (uint64_t seed : cfg.seeds)
      tasks.push_back({arch, seed, run_dir(cfg.output_dir, arch.kind, seed)});

  std::atomic<size_t> next{0};
  std::mutex io_mutex;
  int workers = cfg.workers > 0
                    ? cfg.workers
                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<int>(workers, static_cast<int>(tasks.size()));

  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];
      if (train::run_complete(task.dir)) {
        std::lock_guard lk(io_mutex);
        std::fprintf(stderr, "[experiment] %s/%llu already complete, skipped\n",
                     policy::arch_name(task.arch.kind),
                     (unsigned long long)task.seed);
        continue;
      }
      fs::create_directories(task.dir);
      {
        ExperimentConfig snap = cfg;
        snap.train.seed = task.seed;
        std::ofstream snap_out(fs::path(task.dir) / train::kSnapshotFileName);
        snap_out << snap.to_kv().serialize();
      }
      train::TrainConfig tc = cfg.train;
      tc.seed = task.seed;
      {
        std::lock_guard lk(io_mutex);
        std::fprintf(stderr, "[experiment] start %s seed %llu\n",
                     policy::arch_name(task.arch.kind),
                     (unsigned long long)task.seed);
      }
      train::RunResult res =
          train::train_run<train::train_real>(task.arch, cfg.env, tc, task.dir);
      std::lock_guard lk(io_mutex);
      std::fprintf(stderr, "[experiment] done %s seed %llu%s\n",
                   policy::arch_name(task.arch.kind),
                   (unsigned long long)task.seed,
                   res.diverged ? " (diverged, flagged)" : "");
    }
  };

  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  SummaryTable table = summarize_dir(cfg.output_dir);
  std::ofstream out(fs::path(cfg.output_dir) / "summary.csv");
  out << table.to_csv();
  return table;
}

std::vector<RunRecord> collect_runs(const std::string& root) {
  std::vector<RunRecord> runs;
  if (!fs::exists(root)) return runs;
  std::vector<fs::path> arch_dirs;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory() && policy::parse_arch(e.path().filename().string()))
      arch_dirs.push_back(e.path());
  std::sort(arch_dirs.begin(), arch_dirs.end());
  for (const fs::path& ad : arch_dirs) {
    std::vector<fs::path> seed_dirs;
    for (const auto& e : fs::directory_iterator(ad))
      if (e.is_directory()) seed_dirs.push_back(e.path());
    std::sort(seed_dirs.begin(), seed_dirs.end());
    for (const fs::path& sd : seed_dirs) {
      RunRecord r;
      r.arch = *policy::parse_arch(ad.filename().string());
      try {
        r.seed = std::stoull(sd.filename().string());
      } catch (const std::exception&) {
        continue;
      }
      r.dir = sd.string();
      read_run_status(r.dir, r.diverged);
      const fs::path csv = sd / train::kMetricsFileName;
      if (fs::exists(csv)) {
        auto rows = train::read_metrics_csv(csv.string());
        r.rows = static_cast<int>(rows.size());
        if (!rows.empty()) r.final_row = rows.back();
      }
      runs.push_back(std::move(r));
    }
  }
  return runs;
}

SummaryTable summarize(const std::vector<std::string>& csv_paths) {
  std::vector<RunRecord> runs;
  for (const std::string& path : csv_paths) {
    const fs::path p(path);
    RunRecord r;
    auto arch = policy::parse_arch(
        p.parent_path().parent_path().filename().string());
    if (!arch)
      throw config_error("cannot infer architecture from path: " + path);
    r.arch = *arch;
    try {
      r.seed = std::stoull(p.parent_path().filename().string());
    } catch (const std::exception&) {
      throw config_error("cannot infer seed from path: " + path);
    }
    r.dir = p.parent_path().string();
    read_run_status(r.dir, r.diverged);
    auto rows = train::read_metrics_csv(path);
    r.rows = static_cast<int>(rows.size());
    if (!rows.empty()) r.final_row = rows.back();
    runs.push_back(std::move(r));
  }
  return summarize_records(std::move(runs));
}

SummaryTable summarize_dir(const std::string& root) {
  return summarize_records(collect_runs(root));
}

}  // namespace modnav::harness
