#pragma once

// Gyrovector operations on the Poincare ball of curvature -c. Points are
// plain Eigen vectors with euclidean norm < 1/sqrt(c); tangent vectors at the
// origin share the same coordinates. Every function is templated on the
// scalar so the same code path serves plain evaluation and tape-recorded
// differentiation.
//
// Singular limits (zero inputs, log at the base point) are handled by
// clamping norms away from zero; the clamp carries the usual subgradient so
// gradients stay finite and match the limit maps.

#include "hvmc/autodiff.hpp"

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>

namespace hvmc {

template <class S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

using ad::clamp_max;
using ad::clamp_min;
using ad::sigmoid;
using ad::val;

inline constexpr double kMinNorm = 1e-15;
inline constexpr double kAtanhArgMax = 1.0 - 1e-16;
inline constexpr double kBallTol = 1e-9;

namespace poincare {

template <class S>
void check_in_ball(const VecX<S>& x, double c) {
  if (c * val(x.squaredNorm()) >= 1.0 + kBallTol) {
    throw std::domain_error("poincare: point outside the open ball");
  }
}

inline bool in_ball(const Eigen::VectorXd& x, double c, double tol = 0.0) {
  return c * x.squaredNorm() < 1.0 + tol;
}

template <class S>
S conformal_factor(const VecX<S>& x, double c) {
  return S(2.0) / (S(1.0) - c * x.squaredNorm());
}

template <class S>
VecX<S> mobius_add(const VecX<S>& x, const VecX<S>& y, double c) {
  check_in_ball(x, c);
  check_in_ball(y, c);
  const S xy = x.dot(y);
  const S x2 = x.squaredNorm();
  const S y2 = y.squaredNorm();
  const S den = S(1.0) + 2.0 * c * xy + c * c * x2 * y2;
  return ((S(1.0) + 2.0 * c * xy + c * y2) * x + (S(1.0) - c * x2) * y) / den;
}

// tanh(sqrt(c)||v||) * v / (sqrt(c)||v||); maps v = 0 to the origin.
template <class S>
VecX<S> exp0(const VecX<S>& v, double c) {
  using std::tanh;
  const double rc = std::sqrt(c);
  const S n = clamp_min(v.norm(), kMinNorm);
  return (tanh(rc * n) / (rc * n)) * v;
}

template <class S>
VecX<S> log0(const VecX<S>& y, double c) {
  using std::atanh;
  check_in_ball(y, c);
  const double rc = std::sqrt(c);
  const S n = clamp_min(y.norm(), kMinNorm);
  return (atanh(clamp_max(rc * n, kAtanhArgMax)) / (rc * n)) * y;
}

template <class S>
VecX<S> exp_at(const VecX<S>& x, const VecX<S>& v, double c) {
  using std::tanh;
  check_in_ball(x, c);
  const double rc = std::sqrt(c);
  const S n = clamp_min(v.norm(), kMinNorm);
  const S lam = conformal_factor(x, c);
  const VecX<S> step = (tanh(rc * lam * n / 2.0) / (rc * n)) * v;
  return mobius_add(x, step, c);
}

template <class S>
VecX<S> log_at(const VecX<S>& x, const VecX<S>& y, double c) {
  using std::atanh;
  check_in_ball(x, c);
  const double rc = std::sqrt(c);
  const VecX<S> w = mobius_add<S>(-x, y, c);
  const S n = clamp_min(w.norm(), kMinNorm);
  const S lam = conformal_factor(x, c);
  return (2.0 / (rc * lam) * atanh(clamp_max(rc * n, kAtanhArgMax)) / n) * w;
}

// Parallel transport of a tangent vector at the origin into T_x, defined as
// log_x(x (+) exp_0(v)).
template <class S>
VecX<S> transport_from_origin(const VecX<S>& v, const VecX<S>& x, double c) {
  return log_at<S>(x, mobius_add<S>(x, exp0<S>(v, c), c), c);
}

// W (*) x, the matrix action through the origin tangent space, in the closed
// form tanh(||Wx||/||x|| * atanh(sqrt(c)||x||)) * Wx / (sqrt(c)||Wx||).
// The origin is a fixed point: W (*) 0 = 0.
template <class S>
VecX<S> matvec(const MatX<S>& m, const VecX<S>& x, double c) {
  using std::atanh;
  using std::tanh;
  if (m.cols() != x.size()) throw std::invalid_argument("poincare: matvec shape mismatch");
  check_in_ball(x, c);
  const double rc = std::sqrt(c);
  const VecX<S> mx = m * x;
  const S nx = clamp_min(x.norm(), kMinNorm);
  const S nmx = clamp_min(mx.norm(), kMinNorm);
  const S arg = (nmx / nx) * atanh(clamp_max(rc * nx, kAtanhArgMax));
  return (tanh(arg) / (rc * nmx)) * mx;
}

// r (.) x with a componentwise gate vector, read as diag(r) (*) x. A uniform
// r recovers the scalar multiplication formula.
template <class S>
VecX<S> pointwise(const VecX<S>& r, const VecX<S>& x, double c) {
  using std::atanh;
  using std::tanh;
  if (r.size() != x.size()) throw std::invalid_argument("poincare: pointwise shape mismatch");
  check_in_ball(x, c);
  const double rc = std::sqrt(c);
  const VecX<S> rx = r.cwiseProduct(x);
  const S nx = clamp_min(x.norm(), kMinNorm);
  const S nrx = clamp_min(rx.norm(), kMinNorm);
  const S arg = (nrx / nx) * atanh(clamp_max(rc * nx, kAtanhArgMax));
  return (tanh(arg) / (rc * nrx)) * rx;
}

// Radial projection onto the closed ball of radius r_max. The rescale is
// repeated if rounding leaves the norm above the bound, so the result always
// satisfies ||out|| <= r_max and the projection is exactly idempotent.
template <class S>
VecX<S> clamp_radius(VecX<S> x, double r_max, long* hits = nullptr) {
  if (!(r_max > 0.0)) throw std::invalid_argument("poincare: r_max must be positive");
  bool hit = false;
  for (int pass = 0; pass < 4; ++pass) {
    const S n = x.norm();
    if (!(val(n) > r_max)) break;
    x = (S(r_max) / n) * x.eval();
    hit = true;
  }
  if (hit && hits != nullptr) ++*hits;
  return x;
}

}  // namespace poincare
}  // namespace hvmc
