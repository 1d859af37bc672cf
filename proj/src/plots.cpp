#include "modnav/harness/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

namespace fs = std::filesystem;

namespace modnav::harness {

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 70, kRight = 20, kTop = 36, kBottom = 48;

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Series {
  std::string label;
  std::string color;
  std::vector<double> x, mean, lo, hi;  // lo/hi: +-1 std band
};

struct AxisTicks {
  std::vector<double> at;
};

AxisTicks nice_ticks(double lo, double hi, int target = 6) {
  AxisTicks t;
  if (hi <= lo) hi = lo + 1.0;
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  }
  const double first = std::ceil(lo / step) * step;
  for (double v = first; v <= hi + 1e-9 * step; v += step) t.at.push_back(v);
  return t;
}

class SvgPlot {
 public:
  SvgPlot(std::string title, std::string x_label, std::string y_label)
      : title_(std::move(title)),
        x_label_(std::move(x_label)),
        y_label_(std::move(y_label)) {}

  void add(Series s) { series_.push_back(std::move(s)); }

  std::string render() const {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const Series& s : series_)
      for (size_t i = 0; i < s.x.size(); ++i) {
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        const double lo = s.lo.empty() ? s.mean[i] : s.lo[i];
        const double hi = s.hi.empty() ? s.mean[i] : s.hi[i];
        ymin = std::min(ymin, lo);
        ymax = std::max(ymax, hi);
      }
    if (xmin > xmax) {
      xmin = 0;
      xmax = 1;
      ymin = 0;
      ymax = 1;
    }
    if (ymin == ymax) {
      ymin -= 0.5;
      ymax += 0.5;
    }
    const double pad = 0.04 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;

    auto px = [&](double x) {
      return kLeft + (x - xmin) / (xmax - xmin) * (kWidth - kLeft - kRight);
    };
    auto py = [&](double y) {
      return kHeight - kBottom -
             (y - ymin) / (ymax - ymin) * (kHeight - kTop - kBottom);
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
           "\" height=\"" + num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) +
           " " + num(kHeight) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"20\" font-size=\"15\" "
           "text-anchor=\"middle\" font-family=\"sans-serif\">" +
           title_ + "</text>\n";

    for (double tx : nice_ticks(xmin, xmax).at) {
      svg += "<line x1=\"" + num(px(tx)) + "\" y1=\"" + num(py(ymin)) +
             "\" x2=\"" + num(px(tx)) + "\" y2=\"" + num(py(ymax)) +
             "\" stroke=\"#eeeeee\"/>\n";
      svg += "<text x=\"" + num(px(tx)) + "\" y=\"" +
             num(kHeight - kBottom + 18) +
             "\" font-size=\"11\" text-anchor=\"middle\" "
             "font-family=\"sans-serif\">" +
             num(tx) + "</text>\n";
    }
    for (double ty : nice_ticks(ymin, ymax).at) {
      svg += "<line x1=\"" + num(px(xmin)) + "\" y1=\"" + num(py(ty)) +
             "\" x2=\"" + num(px(xmax)) + "\" y2=\"" + num(py(ty)) +
             "\" stroke=\"#eeeeee\"/>\n";
      svg += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(py(ty) + 4) +
             "\" font-size=\"11\" text-anchor=\"end\" "
             "font-family=\"sans-serif\">" +
             num(ty) + "</text>\n";
    }
    svg += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" +
           num(kWidth - kLeft - kRight) + "\" height=\"" +
           num(kHeight - kTop - kBottom) +
           "\" fill=\"none\" stroke=\"#333333\"/>\n";
    svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"" + num(kHeight - 12) +
           "\" font-size=\"12\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\">" +
           x_label_ + "</text>\n";
    svg += "<text x=\"16\" y=\"" + num(kHeight / 2) +
           "\" font-size=\"12\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" transform=\"rotate(-90 16 " +
           num(kHeight / 2) + ")\">" + y_label_ + "</text>\n";

    for (const Series& s : series_) {
      if (!s.lo.empty()) {
        std::string d = "M";
        for (size_t i = 0; i < s.x.size(); ++i)
          d += num(px(s.x[i])) + "," + num(py(s.hi[i])) + " ";
        for (size_t i = s.x.size(); i-- > 0;)
          d += num(px(s.x[i])) + "," + num(py(s.lo[i])) + " ";
        d += "Z";
        svg += "<path d=\"" + d + "\" fill=\"" + s.color +
               "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
      }
    }
    for (const Series& s : series_) {
      std::string pts;
      for (size_t i = 0; i < s.x.size(); ++i)
        pts += num(px(s.x[i])) + "," + num(py(s.mean[i])) + " ";
      svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" +
             s.color + "\" stroke-width=\"1.8\"/>\n";
    }
    double ly = kTop + 14;
    for (const Series& s : series_) {
      svg += "<line x1=\"" + num(kLeft + 10) + "\" y1=\"" + num(ly - 4) +
             "\" x2=\"" + num(kLeft + 34) + "\" y2=\"" + num(ly - 4) +
             "\" stroke=\"" + s.color + "\" stroke-width=\"2\"/>\n";
      svg += "<text x=\"" + num(kLeft + 40) + "\" y=\"" + num(ly) +
             "\" font-size=\"12\" font-family=\"sans-serif\">" + s.label +
             "</text>\n";
      ly += 16;
    }
    svg += "</svg>\n";
    return svg;
  }

 private:
  std::string title_, x_label_, y_label_;
  std::vector<Series> series_;
};

// per-update mean and sample std across seeds, truncated to the shortest run
struct CurveStat {
  std::vector<double> x, mean, lo, hi;
};

CurveStat curve_across_seeds(const std::vector<std::vector<double>>& runs) {
  CurveStat c;
  size_t len = SIZE_MAX;
  for (const auto& r : runs) len = std::min(len, r.size());
  if (len == SIZE_MAX || len == 0) return c;
  for (size_t t = 0; t < len; ++t) {
    double mean = 0.0;
    for (const auto& r : runs) mean += r[t];
    mean /= runs.size();
    double sd = 0.0;
    if (runs.size() > 1) {
      for (const auto& r : runs) sd += (r[t] - mean) * (r[t] - mean);
      sd = std::sqrt(sd / (runs.size() - 1));
    }
    c.x.push_back(double(t + 1));
    c.mean.push_back(mean);
    c.lo.push_back(mean - sd);
    c.hi.push_back(mean + sd);
  }
  return c;
}

const char* arch_color(policy::Arch a) {
  switch (a) {
    case policy::Arch::Insect: return "#c0392b";
    case policy::Arch::CentralizedGru: return "#2980b9";
    case policy::Arch::CentralizedMlp: return "#7f8c8d";
  }
  return "#000000";
}

}  // namespace

std::vector<std::string> emit_plots(const std::string& runs_root,
                                    const std::string& output_dir) {
  auto runs = collect_runs(runs_root);
  std::map<policy::Arch, std::vector<std::vector<double>>> returns_by_arch;
  std::vector<std::vector<double>> mode_curves, module_curves;

  for (const RunRecord& r : runs) {
    const fs::path csv = fs::path(r.dir) / train::kMetricsFileName;
    if (!fs::exists(csv)) continue;
    auto rows = train::read_metrics_csv(csv.string());
    if (rows.empty()) {
      std::fprintf(stderr, "[plot] skipping empty csv: %s\n",
                   csv.string().c_str());
      continue;
    }
    std::vector<double> ret, mode, module;
    for (const auto& row : rows) {
      ret.push_back(row.mean_return);
      if (row.mode_entropy) mode.push_back(*row.mode_entropy);
      if (row.module_entropy) module.push_back(*row.module_entropy);
    }
    returns_by_arch[r.arch].push_back(std::move(ret));
    if (r.arch == policy::Arch::Insect) {
      if (!mode.empty()) mode_curves.push_back(std::move(mode));
      if (!module.empty()) module_curves.push_back(std::move(module));
    }
  }

  fs::create_directories(output_dir);
  std::vector<std::string> written;

  {
    SvgPlot plot("episodic return by update", "PPO update",
                 "mean episodic return");
    for (const auto& [arch, curves] : returns_by_arch) {
      CurveStat c = curve_across_seeds(curves);
      if (c.x.empty()) continue;
      plot.add({policy::arch_name(arch), arch_color(arch), c.x, c.mean, c.lo,
                c.hi});
    }
    const std::string path = (fs::path(output_dir) / "returns.svg").string();
    std::ofstream out(path);
    out << plot.render();
    written.push_back(path);
  }

  if (!mode_curves.empty() || !module_curves.empty()) {
    SvgPlot plot("insect controller entropies", "PPO update",
                 "entropy (nats)");
    CurveStat mode = curve_across_seeds(mode_curves);
    if (!mode.x.empty())
      plot.add({"mode entropy", "#8e44ad", mode.x, mode.mean, mode.lo,
                mode.hi});
    CurveStat module = curve_across_seeds(module_curves);
    if (!module.x.empty())
      plot.add({"module entropy", "#d35400", module.x, module.mean, module.lo,
                module.hi});
    const std::string path =
        (fs::path(output_dir) / "insect_entropies.svg").string();
    std::ofstream out(path);
    out << plot.render();
    written.push_back(path);
  }
  return written;
}

}  // namespace modnav::harness
