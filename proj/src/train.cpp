#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "modnav/train/gae.hpp"
#include "modnav/train/metrics_io.hpp"
#include "modnav/train/rollout.hpp"

namespace modnav::train {

GaeResult compute_gae(std::span<const double> rewards,
                      std::span<const double> values,
                      std::span<const uint8_t> terminals,
                      double bootstrap_value, double gamma, double lambda) {
  const size_t n = rewards.size();
  if (values.size() != n || terminals.size() != n)
    throw shape_error("compute_gae: length mismatch");
  GaeResult out;
  out.advantages.resize(n);
  out.returns.resize(n);
  double gae = 0.0;
  for (size_t i = n; i-- > 0;) {
    const double not_done = terminals[i] ? 0.0 : 1.0;
    const double next_value = (i + 1 < n) ? values[i + 1] : bootstrap_value;
    const double delta =
        rewards[i] + gamma * next_value * not_done - values[i];
    gae = delta + gamma * lambda * not_done * gae;
    out.advantages[i] = gae;
    out.returns[i] = gae + values[i];
  }
  return out;
}

void normalize_advantages(std::span<double> advantages) {
  if (advantages.empty()) return;
  double mean = 0.0;
  for (double a : advantages) mean += a;
  mean /= double(advantages.size());
  double var = 0.0;
  for (double a : advantages) var += (a - mean) * (a - mean);
  var /= double(advantages.size());
  const double inv = 1.0 / (std::sqrt(var) + 1e-8);
  for (double& a : advantages) a = (a - mean) * inv;
}

namespace {

double mean_row_entropy(const std::vector<double>& probs, int width) {
  const size_t rows = probs.size() / width;
  double total = 0.0;
  for (size_t r = 0; r < rows; ++r) {
    double h = 0.0;
    for (int i = 0; i < width; ++i) {
      const double p = probs[r * width + i];
      if (p > 1e-12) h -= p * std::log(p);
    }
    total += h;
  }
  return total / double(rows);
}

}  // namespace

Diagnostics diagnostics(const RolloutBuffer& buffer) {
  Diagnostics d;
  if (buffer.command.empty()) return d;
  double l1 = 0.0;
  for (double c : buffer.command) l1 += std::abs(c);
  d.command_l1 = l1 / double(buffer.command.size());
  d.mode_entropy = mean_row_entropy(buffer.mode_probs, 6);
  d.module_entropy = mean_row_entropy(buffer.arbiter_weights, 4);
  return d;
}

std::string metrics_csv_row(const MetricsRecord& rec) {
  char buf[512];
  auto fmt = [](double v) {
    char tmp[40];
    std::snprintf(tmp, sizeof(tmp), "%.17g", v);
    return std::string(tmp);
  };
  auto opt = [&](const std::optional<double>& v) {
    return v ? fmt(*v) : std::string();
  };
  std::snprintf(buf, sizeof(buf), "%d,%s,%s,%s,%s,%s,%s,%s,%s",
                rec.update_index, fmt(rec.mean_return).c_str(),
                fmt(rec.value_loss).c_str(), fmt(rec.policy_entropy).c_str(),
                fmt(rec.approx_kl).c_str(), fmt(rec.clip_fraction).c_str(),
                opt(rec.command_l1).c_str(), opt(rec.mode_entropy).c_str(),
                opt(rec.module_entropy).c_str());
  return buf;
}

std::vector<MetricsRecord> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot read metrics csv: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kMetricsCsvHeader)
    throw config_error("unexpected metrics csv header in " + path);

  std::vector<MetricsRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    cells.resize(9);
    MetricsRecord rec;
    rec.update_index = std::stoi(cells[0]);
    rec.mean_return = std::stod(cells[1]);
    rec.value_loss = std::stod(cells[2]);
    rec.policy_entropy = std::stod(cells[3]);
    rec.approx_kl = std::stod(cells[4]);
    rec.clip_fraction = std::stod(cells[5]);
    if (!cells[6].empty()) rec.command_l1 = std::stod(cells[6]);
    if (!cells[7].empty()) rec.mode_entropy = std::stod(cells[7]);
    if (!cells[8].empty()) rec.module_entropy = std::stod(cells[8]);
    out.push_back(rec);
  }
  return out;
}

}  // namespace modnav::train
