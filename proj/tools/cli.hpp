#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace rlcnet::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kUsage = 2,
    kDivergence = 3,
    kParse = 4,
    kMismatch = 5,
};

/// Runs one command line (args[0] is the program name) and returns the exit
/// code. Diagnostics go to stderr, summaries to stdout.
int run(const std::vector<std::string>& args);

struct PlotSeries {
    std::string label;
    std::string color;
    std::vector<double> t;
    std::vector<double> y;
};

/// Self-contained SVG line chart with axes and a legend.
std::string render_svg(std::span<const PlotSeries> series, const std::string& title);

/// `t,truth,prediction` rows.
std::string plot_csv(std::span<const double> t, std::span<const double> truth, std::span<const double> prediction);

}  // namespace rlcnet::cli
