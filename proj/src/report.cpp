#include "hololink/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "hololink/common.hpp"

namespace hololink {

namespace {

constexpr double kWidth = 760.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0, kRight = 260.0, kTop = 40.0, kBottom = 60.0;
constexpr double kPlotW = kWidth - kLeft - kRight;
constexpr double kPlotH = kHeight - kTop - kBottom;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct SeriesKey {
  std::string codec;  // hdc | svd | small | quant
  std::string classifier;
  bool operator<(const SeriesKey& o) const {
    return codec != o.codec ? codec < o.codec : classifier < o.classifier;
  }
};

std::string series_color(const SeriesKey& key) {
  if (key.codec == "hdc") return "#1f77b4";
  if (key.codec == "svd") return "#d62728";
  if (key.codec == "small") return "#2ca02c";
  if (key.codec == "quant") return "#9467bd";
  return "#7f7f7f";
}

std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out.empty() ? std::string("dataset") : out;
}

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_chart_svg(const std::vector<ResultRow>& rows,
                             const std::string& dataset, int num_agents) {
  // series (codec, classifier) -> x -> accuracies of the repetitions
  std::map<SeriesKey, std::map<double, std::vector<double>>> series;
  std::map<std::string, std::vector<double>> baselines;  // classifier -> accs
  std::vector<double> lossless_ratios;

  for (const auto& row : rows) {
    if (row.dataset != dataset || row.num_agents != num_agents) continue;
    if (row.codec == "none") {
      baselines[row.classifier].push_back(row.mean_accuracy);
    } else if (row.codec == "deflate") {
      lossless_ratios.push_back(row.ratio_param);
      baselines[row.classifier];  // lossless equals the baseline accuracy
    } else {
      SeriesKey key{row.codec.rfind("quant", 0) == 0 ? "quant" : row.codec,
                    row.classifier};
      series[key][row.ratio_param].push_back(row.mean_accuracy);
    }
  }
  if (series.empty() && baselines.empty())
    throw IoError("no rows for dataset '" + dataset + "', N=" +
                  std::to_string(num_agents));

  double x_min = 1e300, x_max = -1e300, y_min = 1.0, y_max = 0.0;
  for (const auto& [key, pts] : series)
    for (const auto& [x, accs] : pts) {
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      for (double a : accs) {
        y_min = std::min(y_min, a);
        y_max = std::max(y_max, a);
      }
    }
  for (const auto& [cls, accs] : baselines)
    for (double a : accs) {
      y_min = std::min(y_min, a);
      y_max = std::max(y_max, a);
    }
  for (double r : lossless_ratios) {
    x_min = std::min(x_min, r);
    x_max = std::max(x_max, r);
  }
  if (x_min >= x_max) {
    x_min = x_min > 1e299 ? 0.0 : x_min - 1.0;
    x_max = x_min + 2.0;
  }
  y_min = std::max(0.0, y_min - 0.05);
  y_max = std::min(1.0, y_max + 0.05);
  if (y_min >= y_max) {
    y_min = 0.0;
    y_max = 1.0;
  }

  auto sx = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * kPlotW; };
  auto sy = [&](double y) { return kTop + (y_max - y) / (y_max - y_min) * kPlotH; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight
      << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kLeft << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">"
      << xml_escape(dataset) << " (N=" << num_agents
      << "): accuracy vs compression ratio</text>\n";

  // gridlines and ticks
  for (int i = 0; i <= 5; ++i) {
    const double y = y_min + (y_max - y_min) * i / 5.0;
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << sy(y) << "\" x2=\"" << kLeft + kPlotW
        << "\" y2=\"" << sy(y) << "\" stroke=\"#dddddd\"/>\n"
        << "<text x=\"" << kLeft - 8 << "\" y=\"" << sy(y) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(y)
        << "</text>\n";
  }
  for (int i = 0; i <= 6; ++i) {
    const double x = x_min + (x_max - x_min) * i / 6.0;
    svg << "<line x1=\"" << sx(x) << "\" y1=\"" << kTop << "\" x2=\"" << sx(x)
        << "\" y2=\"" << kTop + kPlotH << "\" stroke=\"#eeeeee\"/>\n"
        << "<text x=\"" << sx(x) << "\" y=\"" << kTop + kPlotH + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << fmt(x) << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + kPlotW / 2 << "\" y=\"" << kHeight - 16
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
         "compression ratio</text>\n"
      << "<text x=\"18\" y=\"" << kTop + kPlotH / 2
      << "\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 18 "
      << kTop + kPlotH / 2 << ")\" text-anchor=\"middle\">mean accuracy</text>\n";

  double legend_y = kTop + 10.0;
  auto legend_entry = [&](const std::string& color, const std::string& dash,
                          const std::string& label) {
    svg << "<line x1=\"" << kWidth - kRight + 20 << "\" y1=\"" << legend_y << "\" x2=\""
        << kWidth - kRight + 50 << "\" y2=\"" << legend_y << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"" << dash << "/>\n"
        << "<text x=\"" << kWidth - kRight + 58 << "\" y=\"" << legend_y + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << label << "</text>\n";
    legend_y += 18.0;
  };

  // lossless achieved-ratio bar
  if (!lossless_ratios.empty()) {
    double mean_ratio = 0.0;
    for (double r : lossless_ratios) mean_ratio += r;
    mean_ratio /= static_cast<double>(lossless_ratios.size());
    const double x = sx(std::clamp(mean_ratio, x_min, x_max));
    svg << "<rect x=\"" << x - 6 << "\" y=\"" << kTop << "\" width=\"12\" height=\""
        << kPlotH << "\" fill=\"#ffbb55\" fill-opacity=\"0.45\"/>\n";
    legend_entry("#ffbb55", "", "lossless ratio " + fmt(mean_ratio));
  }

  // baseline reference lines
  for (const auto& [cls, accs] : baselines) {
    if (accs.empty()) continue;
    double mean = 0.0;
    for (double a : accs) mean += a;
    mean /= static_cast<double>(accs.size());
    const std::string dash =
        cls == "centroid" ? " stroke-dasharray=\"6 3\"" : "";
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << sy(mean) << "\" x2=\""
        << kLeft + kPlotW << "\" y2=\"" << sy(mean)
        << "\" stroke=\"#444444\" stroke-width=\"1.5\"" << dash << "/>\n";
    legend_entry("#444444", dash, "uncompressed " + cls + " (" + fmt(mean) + ")");
  }

  // lossy series
  for (const auto& [key, pts] : series) {
    std::ostringstream poly;
    for (const auto& [x, accs] : pts) {
      double mean = 0.0;
      for (double a : accs) mean += a;
      mean /= static_cast<double>(accs.size());
      poly << sx(x) << "," << sy(mean) << " ";
    }
    const std::string dash =
        key.classifier == "centroid" ? " stroke-dasharray=\"6 3\"" : "";
    svg << "<polyline fill=\"none\" stroke=\"" << series_color(key)
        << "\" stroke-width=\"2\"" << dash << " points=\"" << poly.str() << "\"/>\n";
    for (const auto& [x, accs] : pts) {
      double mean = 0.0;
      for (double a : accs) mean += a;
      mean /= static_cast<double>(accs.size());
      svg << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(mean) << "\" r=\"3\" fill=\""
          << series_color(key) << "\"/>\n";
    }
    legend_entry(series_color(key), dash, key.codec + "-" + key.classifier);
  }

  // axes on top
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
      << "\" y2=\"" << kTop + kPlotH << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + kPlotH << "\" x2=\""
      << kLeft + kPlotW << "\" y2=\"" << kTop + kPlotH << "\" stroke=\"black\"/>\n"
      << "</svg>\n";
  return svg.str();
}

ReportFiles emit_report(const std::vector<ResultRow>& rows, const std::string& out_dir,
                        const std::string& basename) {
  if (rows.empty()) throw IoError("no results to report");

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());

  ReportFiles files;
  files.csv_path = (std::filesystem::path(out_dir) / (basename + ".csv")).string();
  write_results_csv(files.csv_path, rows);

  std::set<std::pair<std::string, int>> groups;
  for (const auto& row : rows) groups.emplace(row.dataset, row.num_agents);

  for (const auto& [dataset, n] : groups) {
    const std::string svg = render_chart_svg(rows, dataset, n);
    const std::string path =
        (std::filesystem::path(out_dir) /
         (basename + "_" + sanitize(dataset) + "_N" + std::to_string(n) + ".svg"))
            .string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << svg;
    if (!out) throw IoError("failed writing " + path);
    files.chart_paths.push_back(path);
  }
  return files;
}

}  // namespace hololink
