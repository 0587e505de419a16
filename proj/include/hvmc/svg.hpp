#pragma once

// Self-contained SVG emitters for run artifacts: per-ansatz means with error
// bars, training curves with a best-energy envelope and optional zoom inset,
// and an ascending ranking bar chart. Output bytes are deterministic for a
// given input.

#include <string>
#include <vector>

namespace hvmc::svg {

struct RunPoint {
  std::string label;
  double mean = 0.0;
  double std_error = 0.0;
};

struct Curve {
  std::string label;
  std::vector<double> epochs;
  std::vector<double> energies;
};

struct PlotOptions {
  int width = 640;
  int height = 420;
  std::string title;
  double reference = 0.0;   // horizontal reference line (e.g. exact energy)
  bool has_reference = false;
  bool inset = false;       // curves style: zoom box over the final quarter
};

std::string plot_dots(const std::vector<RunPoint>& points, const PlotOptions& opts = {});
std::string plot_curves(const std::vector<Curve>& curves, const PlotOptions& opts = {});
std::string plot_ranking(std::vector<RunPoint> points, const PlotOptions& opts = {});

}  // namespace hvmc::svg
