#pragma once

#include <string>
#include <vector>

#include "hololink/experiment.hpp"

namespace hololink {

struct ReportFiles {
  std::string csv_path;
  std::vector<std::string> chart_paths;
};

// Renders one self-contained SVG for a (dataset, N) group: mean accuracy vs
// ratio with one series per (codec, classifier), horizontal reference lines
// for the uncompressed baselines and a bar at the achieved lossless ratio.
std::string render_chart_svg(const std::vector<ResultRow>& rows,
                             const std::string& dataset, int num_agents);

// Writes the results CSV plus one SVG per (dataset, N) group into out_dir.
// Throws on empty input; no files are produced in that case.
ReportFiles emit_report(const std::vector<ResultRow>& rows, const std::string& out_dir,
                        const std::string& basename = "results");

}  // namespace hololink
