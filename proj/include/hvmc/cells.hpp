#pragma once

// The six recurrent cell variants as single-step functions over the hidden
// state and a one-hot input, plus the two dense output heads. Hyperbolic
// cells take the raw one-hot and lift it onto the manifold with the origin
// exponential map; no extra activation is applied after hyperbolic affine
// maps (the geometry supplies the nonlinearity).

#include "hvmc/autodiff.hpp"
#include "hvmc/lorentz.hpp"
#include "hvmc/params.hpp"
#include "hvmc/poincare.hpp"

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <stdexcept>

namespace hvmc {

enum class ClampMode { single, double_clamp };

struct GeoConfig {
  double curvature = 1.0;  // Poincare ball curvature, fixed to 1 in all runs
  double r_max = 1.0;      // Poincare radial bound; 1.0 leaves interior points alone
  double l_max = 0.0;      // Lorentz spatial bound; <= 0 disables the clamp
  ClampMode clamp_mode = ClampMode::single;
};

// Per-rollout numerical diagnostics: how often the spatial constraint fired,
// the largest post-step state norm (ball radius / Lorentz spatial norm /
// euclidean norm) and the worst manifold-membership violation seen.
struct RolloutStats {
  long clamp_hits = 0;
  double max_state_norm = 0.0;
  double max_manifold_violation = 0.0;

  void merge(const RolloutStats& o) {
    clamp_hits += o.clamp_hits;
    max_state_norm = std::max(max_state_norm, o.max_state_norm);
    max_manifold_violation = std::max(max_manifold_violation, o.max_manifold_violation);
  }
};

template <class S>
struct CellWeights {
  MatX<S> w_h, u_h;
  VecX<S> b_h;
  MatX<S> w_r, u_r, w_z, u_z;  // empty for plain RNN variants
  VecX<S> b_r, b_z;
  MatX<S> amp_w, phase_w;
  VecX<S> amp_b, phase_b;
};

namespace detail {

inline Eigen::Map<const Eigen::MatrixXd> seg_map(const ParamLayout& layout,
                                                 const Eigen::VectorXd& params,
                                                 const char* name) {
  const ParamSegment& s = layout.find(name);
  return {params.data() + s.offset, s.rows, s.cols};
}

inline MatX<ad::Var> seg_trace(const ParamLayout& layout, const Eigen::VectorXd& params,
                               const char* name, ad::Tape& tape) {
  const ParamSegment& s = layout.find(name);
  MatX<ad::Var> m(s.rows, s.cols);
  for (Eigen::Index j = 0; j < s.cols; ++j) {
    for (Eigen::Index i = 0; i < s.rows; ++i) {
      m(i, j) = tape.input(params[s.offset + j * s.rows + i]);
    }
  }
  return m;
}

}  // namespace detail

inline CellWeights<double> map_weights(const ParamLayout& layout,
                                       const Eigen::VectorXd& params) {
  if (params.size() != layout.total) {
    throw std::invalid_argument("parameter vector does not match layout");
  }
  CellWeights<double> w;
  auto get = [&](const char* n) { return detail::seg_map(layout, params, n); };
  if (is_gru(layout.variant)) {
    w.w_r = get("W_r"); w.u_r = get("U_r"); w.b_r = get("b_r");
    w.w_z = get("W_z"); w.u_z = get("U_z"); w.b_z = get("b_z");
  }
  w.w_h = get("W_h"); w.u_h = get("U_h"); w.b_h = get("b_h");
  w.amp_w = get("amp_W"); w.amp_b = get("amp_b");
  w.phase_w = get("phase_W"); w.phase_b = get("phase_b");
  return w;
}

// Registers every parameter as a tape input, in flat layout order, so the
// gradient returned by the tape aligns with the parameter vector.
inline CellWeights<ad::Var> trace_weights(const ParamLayout& layout,
                                          const Eigen::VectorXd& params, ad::Tape& tape) {
  if (params.size() != layout.total) {
    throw std::invalid_argument("parameter vector does not match layout");
  }
  CellWeights<ad::Var> w;
  auto get = [&](const char* n) { return detail::seg_trace(layout, params, n, tape); };
  if (is_gru(layout.variant)) {
    w.w_r = get("W_r"); w.u_r = get("U_r"); w.b_r = get("b_r");
    w.w_z = get("W_z"); w.u_z = get("U_z"); w.b_z = get("b_z");
  }
  w.w_h = get("W_h"); w.u_h = get("U_h"); w.b_h = get("b_h");
  w.amp_w = get("amp_W"); w.amp_b = get("amp_b");
  w.phase_w = get("phase_W"); w.phase_b = get("phase_b");
  return w;
}

// Initial hidden state: zero vector / ball origin / hyperboloid origin.
template <class S>
VecX<S> initial_hidden(CellVariant variant, int hidden) {
  if (geometry_of(variant) == Geometry::lorentz) {
    return lorentz::origin<S>(hidden + 1);
  }
  return VecX<S>::Zero(hidden);
}

namespace detail {
template <class S>
S tanh_scalar(const S& t) {
  using std::tanh;
  return tanh(t);
}
}  // namespace detail

template <class S>
VecX<S> step_euclidean_rnn(const CellWeights<S>& w, const VecX<S>& h, const VecX<S>& x) {
  if (w.w_h.cols() != h.size() || w.u_h.cols() != x.size()) {
    throw std::invalid_argument("euclidean rnn: shape mismatch");
  }
  return VecX<S>((w.w_h * h + w.u_h * x + w.b_h).unaryExpr(&detail::tanh_scalar<S>));
}

template <class S>
VecX<S> step_euclidean_gru(const CellWeights<S>& w, const VecX<S>& h, const VecX<S>& x) {
  if (w.w_h.cols() != h.size() || w.u_h.cols() != x.size()) {
    throw std::invalid_argument("euclidean gru: shape mismatch");
  }
  const VecX<S> r = (w.w_r * h + w.u_r * x + w.b_r).unaryExpr([](const S& t) { return sigmoid(t); });
  const VecX<S> z = (w.w_z * h + w.u_z * x + w.b_z).unaryExpr([](const S& t) { return sigmoid(t); });
  const VecX<S> cand =
      (w.w_h * r.cwiseProduct(h) + w.u_h * x + w.b_h).unaryExpr(&detail::tanh_scalar<S>);
  return (VecX<S>::Ones(h.size()) - z).cwiseProduct(h) + z.cwiseProduct(cand);
}

template <class S>
VecX<S> step_poincare_rnn(const CellWeights<S>& w, const VecX<S>& h, const VecX<S>& x,
                          const GeoConfig& geo, RolloutStats* stats = nullptr) {
  namespace p = poincare;
  const double c = geo.curvature;
  const VecX<S> xb = p::exp0<S>(x, c);
  const VecX<S> out = p::mobius_add<S>(
      p::mobius_add<S>(p::matvec<S>(w.w_h, h, c), p::matvec<S>(w.u_h, xb, c), c), w.b_h, c);
  return p::clamp_radius<S>(out, geo.r_max, stats ? &stats->clamp_hits : nullptr);
}

template <class S>
VecX<S> step_poincare_gru(const CellWeights<S>& w, const VecX<S>& h, const VecX<S>& x,
                          const GeoConfig& geo, RolloutStats* stats = nullptr) {
  namespace p = poincare;
  const double c = geo.curvature;
  const VecX<S> xb = p::exp0<S>(x, c);
  auto gate = [&](const MatX<S>& wm, const MatX<S>& um, const VecX<S>& b) {
    const VecX<S> pre = p::mobius_add<S>(
        p::mobius_add<S>(p::matvec<S>(wm, h, c), p::matvec<S>(um, xb, c), c), b, c);
    return VecX<S>(p::log0<S>(pre, c).unaryExpr([](const S& t) { return sigmoid(t); }));
  };
  const VecX<S> r = gate(w.w_r, w.u_r, w.b_r);
  const VecX<S> z = gate(w.w_z, w.u_z, w.b_z);
  const VecX<S> cand = p::mobius_add<S>(
      p::mobius_add<S>(p::matvec<S>(w.w_h, p::pointwise<S>(r, h, c), c),
                       p::matvec<S>(w.u_h, xb, c), c),
      w.b_h, c);
  const VecX<S> delta = p::mobius_add<S>(VecX<S>(-h), cand, c);
  const VecX<S> out = p::mobius_add<S>(h, p::pointwise<S>(z, delta, c), c);
  return p::clamp_radius<S>(out, geo.r_max, stats ? &stats->clamp_hits : nullptr);
}

template <class S>
VecX<S> step_lorentz_rnn(const CellWeights<S>& w, const VecX<S>& h, const VecX<S>& x,
                         const GeoConfig& geo, RolloutStats* stats = nullptr) {
  namespace l = lorentz;
  long* hits = stats ? &stats->clamp_hits : nullptr;
  const bool clamp = geo.l_max > 0.0;
  const VecX<S> hc = clamp ? l::clamp_spatial<S>(h, geo.l_max, hits) : h;
  const VecX<S> xb = l::exp0_spatial<S>(x);
  const VecX<S> bh = l::exp0_spatial<S>(w.b_h);
  VecX<S> out = l::add<S>(l::add<S>(l::matvec<S>(w.w_h, hc), l::matvec<S>(w.u_h, xb)), bh);
  if (clamp && geo.clamp_mode == ClampMode::double_clamp) {
    out = l::clamp_spatial<S>(out, geo.l_max, hits);
  }
  return out;
}

template <class S>
VecX<S> step_lorentz_gru(const CellWeights<S>& w, const VecX<S>& h, const VecX<S>& x,
                         const GeoConfig& geo, RolloutStats* stats = nullptr) {
  namespace l = lorentz;
  long* hits = stats ? &stats->clamp_hits : nullptr;
  const bool clamp = geo.l_max > 0.0;
  const VecX<S> hc = clamp ? l::clamp_spatial<S>(h, geo.l_max, hits) : h;
  const VecX<S> xb = l::exp0_spatial<S>(x);
  auto gate = [&](const MatX<S>& wm, const MatX<S>& um, const VecX<S>& b) {
    const VecX<S> pre = l::add<S>(l::add<S>(l::matvec<S>(wm, hc), l::matvec<S>(um, xb)),
                                  l::exp0_spatial<S>(b));
    return VecX<S>(l::log0_spatial<S>(pre).unaryExpr([](const S& t) { return sigmoid(t); }));
  };
  const VecX<S> r = gate(w.w_r, w.u_r, w.b_r);
  const VecX<S> z = gate(w.w_z, w.u_z, w.b_z);
  const VecX<S> cand = l::add<S>(
      l::add<S>(l::matvec<S>(w.w_h, l::pointwise<S>(r, hc)), l::matvec<S>(w.u_h, xb)),
      l::exp0_spatial<S>(w.b_h));
  const VecX<S> delta = l::add<S>(l::neg<S>(hc), cand);
  VecX<S> out = l::add<S>(hc, l::pointwise<S>(z, delta));
  if (clamp && geo.clamp_mode == ClampMode::double_clamp) {
    out = l::clamp_spatial<S>(out, geo.l_max, hits);
  }
  return out;
}

template <class S>
VecX<S> step_cell(CellVariant variant, const CellWeights<S>& w, const VecX<S>& h,
                  const VecX<S>& x, const GeoConfig& geo, RolloutStats* stats = nullptr) {
  switch (variant) {
    case CellVariant::euclidean_rnn: return step_euclidean_rnn<S>(w, h, x);
    case CellVariant::euclidean_gru: return step_euclidean_gru<S>(w, h, x);
    case CellVariant::poincare_rnn: return step_poincare_rnn<S>(w, h, x, geo, stats);
    case CellVariant::poincare_gru: return step_poincare_gru<S>(w, h, x, geo, stats);
    case CellVariant::lorentz_rnn: return step_lorentz_rnn<S>(w, h, x, geo, stats);
    case CellVariant::lorentz_gru: return step_lorentz_gru<S>(w, h, x, geo, stats);
  }
  throw std::invalid_argument("unknown cell variant");
}

// Dense heads read the tangent-space image of the hidden state (identity for
// the euclidean cells; for Lorentz the zero time component is dropped).
template <class S>
VecX<S> head_input(CellVariant variant, const VecX<S>& h, double curvature) {
  switch (geometry_of(variant)) {
    case Geometry::euclidean: return h;
    case Geometry::poincare: return poincare::log0<S>(h, curvature);
    case Geometry::lorentz: return lorentz::log0_spatial<S>(h);
  }
  throw std::invalid_argument("unknown geometry");
}

// Softmax over the two amplitude logits, evaluated in shifted form.
template <class S>
VecX<S> head_softmax(const MatX<S>& w, const VecX<S>& b, const VecX<S>& t) {
  using std::exp;
  if (w.cols() != t.size()) throw std::invalid_argument("softmax head: shape mismatch");
  const VecX<S> logits = w * t + b;
  const S m = ad::max(logits[0], logits[1]);  // resolves for both Var and double
  const S e0 = exp(logits[0] - m);
  const S e1 = exp(logits[1] - m);
  const S den = e0 + e1;
  VecX<S> p(2);
  p[0] = e0 / den;
  p[1] = e1 / den;
  return p;
}

template <class S>
S softsign(const S& x) {
  using std::abs;
  return x / (S(1.0) + abs(x));
}

template <class S>
VecX<S> head_softsign(const MatX<S>& w, const VecX<S>& b, const VecX<S>& t) {
  if (w.cols() != t.size()) throw std::invalid_argument("softsign head: shape mismatch");
  const VecX<S> y = w * t + b;
  return y.unaryExpr([](const S& v) { return softsign(v); });
}

// State norm used for diagnostics: ball radius, Lorentz spatial norm, or
// euclidean norm. Also reports how far the state sits from its manifold.
inline void observe_state(CellVariant variant, const Eigen::VectorXd& h, RolloutStats& stats) {
  double norm = 0.0;
  double violation = 0.0;
  switch (geometry_of(variant)) {
    case Geometry::euclidean:
      norm = h.norm();
      break;
    case Geometry::poincare:
      norm = h.norm();
      violation = std::max(0.0, norm - 1.0);
      break;
    case Geometry::lorentz:
      norm = h.tail(h.size() - 1).norm();
      violation = std::abs(h.tail(h.size() - 1).squaredNorm() - h[0] * h[0] + 1.0);
      break;
  }
  stats.max_state_norm = std::max(stats.max_state_norm, norm);
  stats.max_manifold_violation = std::max(stats.max_manifold_violation, violation);
}

}  // namespace hvmc
