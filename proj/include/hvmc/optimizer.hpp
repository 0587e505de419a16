#pragma once

// Parameter updates routed by segment: Adam for euclidean parameters
// (weights, heads, and the Lorentz biases, which are stored as euclidean
// tangent coordinates), Riemannian SGD with conformal rescaling and exp-map
// retraction for the Poincare bias points.

#include "hvmc/params.hpp"
#include "hvmc/poincare.hpp"

#include <Eigen/Core>

#include <cmath>

namespace hvmc {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct OptimizerState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long t = 0;
  double lr_euclidean = 5e-3;
  double lr_hyperbolic = 5e-3;

  static OptimizerState make(const ParamLayout& layout, double lr_e, double lr_h) {
    OptimizerState st;
    st.m = Eigen::VectorXd::Zero(layout.total);
    st.v = Eigen::VectorXd::Zero(layout.total);
    st.lr_euclidean = lr_e;
    st.lr_hyperbolic = lr_h;
    return st;
  }
};

// Rescales g to the given global euclidean norm if it exceeds it; returns the
// factor applied.
inline double clip_global_norm(Eigen::VectorXd& g, double max_norm) {
  const double n = g.norm();
  if (max_norm <= 0.0 || n <= max_norm) return 1.0;
  const double scale = max_norm / n;
  g *= scale;
  return scale;
}

inline void optimizer_step(const ParamLayout& layout, const AdamConfig& adam,
                           OptimizerState& st, Eigen::VectorXd& params,
                           const Eigen::VectorXd& grads, double curvature = 1.0) {
  st.t += 1;
  const double bc1 = 1.0 - std::pow(adam.beta1, static_cast<double>(st.t));
  const double bc2 = 1.0 - std::pow(adam.beta2, static_cast<double>(st.t));
  for (const ParamSegment& seg : layout.segments) {
    const bool poincare_bias = seg.geometry == Geometry::poincare && seg.role == SegmentRole::bias;
    if (poincare_bias) {
      // b <- exp_b(-lr * grad / lambda_b^2)
      Eigen::VectorXd b = params.segment(seg.offset, seg.size());
      const Eigen::VectorXd g = grads.segment(seg.offset, seg.size());
      const double lam = poincare::conformal_factor<double>(b, curvature);
      const Eigen::VectorXd riem = g / (lam * lam);
      b = poincare::exp_at<double>(b, -st.lr_hyperbolic * riem, curvature);
      params.segment(seg.offset, seg.size()) = b;
      continue;
    }
    const bool lorentz_bias = seg.geometry == Geometry::lorentz && seg.role == SegmentRole::bias;
    const double lr = lorentz_bias ? st.lr_hyperbolic : st.lr_euclidean;
    for (Eigen::Index k = seg.offset; k < seg.offset + seg.size(); ++k) {
      st.m[k] = adam.beta1 * st.m[k] + (1.0 - adam.beta1) * grads[k];
      st.v[k] = adam.beta2 * st.v[k] + (1.0 - adam.beta2) * grads[k] * grads[k];
      const double mhat = st.m[k] / bc1;
      const double vhat = st.v[k] / bc2;
      params[k] -= lr * mhat / (std::sqrt(vhat) + adam.eps);
    }
  }
}

}  // namespace hvmc
