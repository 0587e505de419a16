#pragma once

// Flat parameter vector with a named-segment index. The segment table is the
// single source of truth for parameter layout: cell weights, optimizer
// routing (which segments are manifold points) and checkpoint files all go
// through it.

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hvmc {

enum class CellVariant {
  euclidean_rnn,
  poincare_rnn,
  lorentz_rnn,
  euclidean_gru,
  poincare_gru,
  lorentz_gru,
};

enum class Geometry { euclidean, poincare, lorentz };

enum class SegmentRole { weight, bias };

inline bool is_gru(CellVariant v) {
  return v == CellVariant::euclidean_gru || v == CellVariant::poincare_gru ||
         v == CellVariant::lorentz_gru;
}

inline Geometry geometry_of(CellVariant v) {
  switch (v) {
    case CellVariant::euclidean_rnn:
    case CellVariant::euclidean_gru: return Geometry::euclidean;
    case CellVariant::poincare_rnn:
    case CellVariant::poincare_gru: return Geometry::poincare;
    case CellVariant::lorentz_rnn:
    case CellVariant::lorentz_gru: return Geometry::lorentz;
  }
  throw std::invalid_argument("unknown cell variant");
}

inline const char* to_string(CellVariant v) {
  switch (v) {
    case CellVariant::euclidean_rnn: return "euclidean_rnn";
    case CellVariant::poincare_rnn: return "poincare_rnn";
    case CellVariant::lorentz_rnn: return "lorentz_rnn";
    case CellVariant::euclidean_gru: return "euclidean_gru";
    case CellVariant::poincare_gru: return "poincare_gru";
    case CellVariant::lorentz_gru: return "lorentz_gru";
  }
  throw std::invalid_argument("unknown cell variant");
}

inline CellVariant parse_variant(std::string_view s) {
  if (s == "euclidean_rnn") return CellVariant::euclidean_rnn;
  if (s == "poincare_rnn") return CellVariant::poincare_rnn;
  if (s == "lorentz_rnn") return CellVariant::lorentz_rnn;
  if (s == "euclidean_gru") return CellVariant::euclidean_gru;
  if (s == "poincare_gru") return CellVariant::poincare_gru;
  if (s == "lorentz_gru") return CellVariant::lorentz_gru;
  throw std::invalid_argument("unknown cell variant: " + std::string(s));
}

struct ParamSegment {
  std::string name;
  SegmentRole role;
  Geometry geometry;  // how the optimizer must treat the segment
  Eigen::Index offset;
  Eigen::Index rows;
  Eigen::Index cols;

  Eigen::Index size() const { return rows * cols; }
};

struct ParamLayout {
  CellVariant variant;
  int hidden = 0;
  int input_dim = 2;
  std::vector<ParamSegment> segments;
  Eigen::Index total = 0;

  const ParamSegment& find(std::string_view name) const {
    for (const auto& s : segments) {
      if (s.name == name) return s;
    }
    throw std::out_of_range("no parameter segment named " + std::string(name));
  }
};

inline ParamLayout make_layout(CellVariant variant, int hidden, int input_dim = 2) {
  if (hidden < 1) throw std::invalid_argument("hidden size must be >= 1");
  if (input_dim < 1) throw std::invalid_argument("input dim must be >= 1");
  ParamLayout layout{variant, hidden, input_dim, {}, 0};
  const Geometry geo = geometry_of(variant);
  const auto h = static_cast<Eigen::Index>(hidden);
  const auto d = static_cast<Eigen::Index>(input_dim);

  auto add = [&](std::string name, SegmentRole role, Geometry g, Eigen::Index r,
                 Eigen::Index c) {
    layout.segments.push_back(ParamSegment{std::move(name), role, g, layout.total, r, c});
    layout.total += r * c;
  };
  auto add_gate = [&](const std::string& suffix) {
    add("W_" + suffix, SegmentRole::weight, Geometry::euclidean, h, h);
    add("U_" + suffix, SegmentRole::weight, Geometry::euclidean, h, d);
    add("b_" + suffix, SegmentRole::bias, geo, h, 1);
  };

  if (is_gru(variant)) {
    add_gate("r");
    add_gate("z");
  }
  add_gate("h");
  add("amp_W", SegmentRole::weight, Geometry::euclidean, 2, h);
  add("amp_b", SegmentRole::bias, Geometry::euclidean, 2, 1);
  add("phase_W", SegmentRole::weight, Geometry::euclidean, 2, h);
  add("phase_b", SegmentRole::bias, Geometry::euclidean, 2, 1);
  return layout;
}

// Total trainable parameter count; identical across the three geometries of
// an architecture (Lorentz weights act on the spatial tangent coordinates, so
// their shapes match the Euclidean ones).
inline Eigen::Index param_count(CellVariant variant, int hidden, int input_dim = 2) {
  return make_layout(variant, hidden, input_dim).total;
}

}  // namespace hvmc
