#include "hvmc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hvmc::svg {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double x0, y0, w, h;        // pixel box
  double xmin, xmax, ymin, ymax;

  double px(double x) const {
    const double span = xmax > xmin ? xmax - xmin : 1.0;
    return x0 + (x - xmin) / span * w;
  }
  double py(double y) const {
    const double span = ymax > ymin ? ymax - ymin : 1.0;
    return y0 + h - (y - ymin) / span * h;
  }
};

void open_doc(std::ostringstream& out, const PlotOptions& opts) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width << "\" height=\""
      << opts.height << "\" viewBox=\"0 0 " << opts.width << " " << opts.height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!opts.title.empty()) {
    out << "<text x=\"" << opts.width / 2 << "\" y=\"18\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"14\">" << escape(opts.title) << "</text>\n";
  }
}

void draw_axes(std::ostringstream& out, const Frame& f, int y_ticks = 5) {
  out << "<g class=\"axes\" stroke=\"black\" fill=\"none\" stroke-width=\"1\">\n";
  out << "<line x1=\"" << fmt(f.x0) << "\" y1=\"" << fmt(f.y0 + f.h) << "\" x2=\""
      << fmt(f.x0 + f.w) << "\" y2=\"" << fmt(f.y0 + f.h) << "\"/>\n";
  out << "<line x1=\"" << fmt(f.x0) << "\" y1=\"" << fmt(f.y0) << "\" x2=\"" << fmt(f.x0)
      << "\" y2=\"" << fmt(f.y0 + f.h) << "\"/>\n";
  out << "</g>\n";
  for (int t = 0; t <= y_ticks; ++t) {
    const double y = f.ymin + (f.ymax - f.ymin) * t / y_ticks;
    out << "<line stroke=\"black\" x1=\"" << fmt(f.x0 - 4) << "\" y1=\"" << fmt(f.py(y))
        << "\" x2=\"" << fmt(f.x0) << "\" y2=\"" << fmt(f.py(y)) << "\"/>\n";
    out << "<text x=\"" << fmt(f.x0 - 7) << "\" y=\"" << fmt(f.py(y) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << fmt(y)
        << "</text>\n";
  }
}

void pad_range(double& lo, double& hi) {
  if (!(hi > lo)) {
    const double eps = std::max(1.0, std::abs(lo)) * 1e-3;
    lo -= eps;
    hi += eps;
  }
  const double pad = (hi - lo) * 0.08;
  lo -= pad;
  hi += pad;
}

std::string polyline(const Frame& f, const std::vector<double>& xs, const std::vector<double>& ys,
                     const char* color, const char* cls, const char* dash = nullptr) {
  std::ostringstream out;
  out << "<polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"1.5\"";
  if (dash != nullptr) out << " stroke-dasharray=\"" << dash << "\"";
  out << " points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i != 0) out << " ";
    out << fmt(f.px(xs[i])) << "," << fmt(f.py(ys[i]));
  }
  out << "\"/>\n";
  return out.str();
}

}  // namespace

std::string plot_dots(const std::vector<RunPoint>& points, const PlotOptions& opts) {
  if (points.empty()) throw std::invalid_argument("plot_dots: no runs");
  std::ostringstream out;
  open_doc(out, opts);
  double ymin = std::numeric_limits<double>::infinity();
  double ymax = -std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    ymin = std::min(ymin, p.mean - 3.0 * p.std_error);
    ymax = std::max(ymax, p.mean + 3.0 * p.std_error);
  }
  if (opts.has_reference) {
    ymin = std::min(ymin, opts.reference);
    ymax = std::max(ymax, opts.reference);
  }
  pad_range(ymin, ymax);
  Frame f{70, 30, opts.width - 100.0, opts.height - 90.0, 0.0,
          static_cast<double>(points.size() + 1), ymin, ymax};
  draw_axes(out, f);
  if (opts.has_reference) {
    out << "<line class=\"reference\" stroke=\"#555555\" stroke-dasharray=\"4 3\" x1=\""
        << fmt(f.x0) << "\" y1=\"" << fmt(f.py(opts.reference)) << "\" x2=\"" << fmt(f.x0 + f.w)
        << "\" y2=\"" << fmt(f.py(opts.reference)) << "\"/>\n";
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const double x = f.px(static_cast<double>(i + 1));
    const double ylo = f.py(p.mean - p.std_error);
    const double yhi = f.py(p.mean + p.std_error);
    const char* color = kPalette[i % kPaletteSize];
    out << "<g class=\"errbar\" stroke=\"" << color << "\" stroke-width=\"1.2\">\n"
        << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(ylo) << "\" x2=\"" << fmt(x)
        << "\" y2=\"" << fmt(yhi) << "\"/>\n"
        << "<line x1=\"" << fmt(x - 4) << "\" y1=\"" << fmt(ylo) << "\" x2=\"" << fmt(x + 4)
        << "\" y2=\"" << fmt(ylo) << "\"/>\n"
        << "<line x1=\"" << fmt(x - 4) << "\" y1=\"" << fmt(yhi) << "\" x2=\"" << fmt(x + 4)
        << "\" y2=\"" << fmt(yhi) << "\"/>\n"
        << "</g>\n";
    out << "<circle class=\"marker\" cx=\"" << fmt(x) << "\" cy=\"" << fmt(f.py(p.mean))
        << "\" r=\"3.5\" fill=\"" << color << "\"/>\n";
    out << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(f.y0 + f.h + 16)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
        << escape(p.label) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string plot_curves(const std::vector<Curve>& curves, const PlotOptions& opts) {
  if (curves.empty()) throw std::invalid_argument("plot_curves: no curves");
  std::ostringstream out;
  open_doc(out, opts);
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.epochs.size(); ++i) {
      xmin = std::min(xmin, c.epochs[i]);
      xmax = std::max(xmax, c.epochs[i]);
      if (std::isfinite(c.energies[i])) {
        ymin = std::min(ymin, c.energies[i]);
        ymax = std::max(ymax, c.energies[i]);
      }
    }
  }
  if (opts.has_reference) {
    ymin = std::min(ymin, opts.reference);
    ymax = std::max(ymax, opts.reference);
  }
  pad_range(ymin, ymax);
  Frame f{70, 30, opts.width - 100.0, opts.height - 70.0, xmin, xmax, ymin, ymax};
  draw_axes(out, f);
  if (opts.has_reference) {
    out << "<line class=\"reference\" stroke=\"#555555\" stroke-dasharray=\"4 3\" x1=\""
        << fmt(f.x0) << "\" y1=\"" << fmt(f.py(opts.reference)) << "\" x2=\"" << fmt(f.x0 + f.w)
        << "\" y2=\"" << fmt(f.py(opts.reference)) << "\"/>\n";
  }
  for (std::size_t k = 0; k < curves.size(); ++k) {
    const Curve& c = curves[k];
    const char* color = kPalette[k % kPaletteSize];
    out << polyline(f, c.epochs, c.energies, color, "curve");
    // running best-energy envelope
    std::vector<double> env(c.energies.size());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < c.energies.size(); ++i) {
      best = std::min(best, c.energies[i]);
      env[i] = best;
    }
    out << polyline(f, c.epochs, env, color, "envelope", "5 3");
    out << "<text x=\"" << fmt(f.x0 + f.w + 6) << "\" y=\""
        << fmt(f.y0 + 14.0 * static_cast<double>(k + 1)) << "\" fill=\"" << color
        << "\" font-family=\"sans-serif\" font-size=\"10\">" << escape(c.label) << "</text>\n";
  }
  if (opts.inset) {
    // zoom over the final quarter of the epochs
    double ixmin = xmin + 0.75 * (xmax - xmin), ixmax = xmax;
    double iymin = std::numeric_limits<double>::infinity(), iymax = -iymin;
    for (const auto& c : curves) {
      for (std::size_t i = 0; i < c.epochs.size(); ++i) {
        if (c.epochs[i] >= ixmin && std::isfinite(c.energies[i])) {
          iymin = std::min(iymin, c.energies[i]);
          iymax = std::max(iymax, c.energies[i]);
        }
      }
    }
    if (std::isfinite(iymin)) {
      pad_range(iymin, iymax);
      Frame g{f.x0 + f.w * 0.55, f.y0 + f.h * 0.08, f.w * 0.4, f.h * 0.35,
              ixmin, ixmax, iymin, iymax};
      out << "<rect class=\"inset\" x=\"" << fmt(g.x0) << "\" y=\"" << fmt(g.y0) << "\" width=\""
          << fmt(g.w) << "\" height=\"" << fmt(g.h)
          << "\" fill=\"white\" stroke=\"#999999\"/>\n";
      for (std::size_t k = 0; k < curves.size(); ++k) {
        const Curve& c = curves[k];
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < c.epochs.size(); ++i) {
          if (c.epochs[i] >= ixmin) {
            xs.push_back(c.epochs[i]);
            ys.push_back(c.energies[i]);
          }
        }
        if (!xs.empty()) out << polyline(g, xs, ys, kPalette[k % kPaletteSize], "inset-curve");
      }
    }
  }
  out << "</svg>\n";
  return out.str();
}

std::string plot_ranking(std::vector<RunPoint> points, const PlotOptions& opts) {
  if (points.empty()) throw std::invalid_argument("plot_ranking: no runs");
  std::sort(points.begin(), points.end(),
            [](const RunPoint& a, const RunPoint& b) { return a.mean < b.mean; });
  std::ostringstream out;
  open_doc(out, opts);
  double ymin = points.front().mean, ymax = points.back().mean;
  if (opts.has_reference) ymin = std::min(ymin, opts.reference);
  pad_range(ymin, ymax);
  const double left = 130.0;
  const double row_h = (opts.height - 60.0) / static_cast<double>(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const double y = 40.0 + row_h * static_cast<double>(i);
    const double frac = (p.mean - ymin) / (ymax - ymin);
    const double wpx = (opts.width - left - 20.0) * (1.0 - frac);
    out << "<rect class=\"bar\" x=\"" << fmt(left) << "\" y=\"" << fmt(y + row_h * 0.15)
        << "\" width=\"" << fmt(std::max(wpx, 1.0)) << "\" height=\"" << fmt(row_h * 0.7)
        << "\" fill=\"" << kPalette[i % kPaletteSize] << "\"/>\n";
    out << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(y + row_h * 0.62)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
        << escape(p.label) << "</text>\n";
    out << "<text class=\"bar-value\" x=\"" << fmt(left + std::max(wpx, 1.0) + 5) << "\" y=\""
        << fmt(y + row_h * 0.62) << "\" font-family=\"sans-serif\" font-size=\"10\">"
        << fmt(p.mean) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace hvmc::svg
