#pragma once

// Operations on the Lorentz hyperboloid <x,x>_L = -1, x0 > 0, embedded in
// Minkowski space with the time component stored first. Addition, scalar and
// matrix actions are defined through the origin tangent space; matrices act
// on the n spatial tangent coordinates (the time component of an
// origin-based tangent vector is zero and is dropped around the product).

#include "hvmc/autodiff.hpp"
#include "hvmc/poincare.hpp"  // VecX/MatX aliases, clamp helpers

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>

namespace hvmc::lorentz {

inline constexpr double kHyperboloidTol = 1e-8;

template <class S>
S inner(const VecX<S>& x, const VecX<S>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("lorentz: dimension mismatch");
  return x.tail(x.size() - 1).dot(y.tail(y.size() - 1)) - x[0] * y[0];
}

// Membership tolerance scales with x0^2: computing <x,x> for a point at
// distance d from the origin carries an intrinsic rounding error of order
// cosh(d)^2 * eps, so the absolute 1e-8 bound is only meaningful on the
// near region the spatial clamps maintain.
template <class S>
void check_on_hyperboloid(const VecX<S>& x) {
  const double x0 = val(x[0]);
  const double scale = ad::max(1.0, x0 * x0);
  if (std::abs(val(inner(x, x)) + 1.0) > kHyperboloidTol * scale || x0 <= 0.0) {
    throw std::domain_error("lorentz: point off the hyperboloid");
  }
}

inline bool on_hyperboloid(const Eigen::VectorXd& x, double tol = kHyperboloidTol) {
  return std::abs(x.tail(x.size() - 1).squaredNorm() - x[0] * x[0] + 1.0) <= tol && x[0] > 0.0;
}

template <class S>
VecX<S> origin(Eigen::Index ambient_dim) {
  VecX<S> o = VecX<S>::Zero(ambient_dim);
  o[0] = S(1.0);
  return o;
}

// Lorentzian norm of a tangent vector; <v,v>_L is clamped at zero so
// round-off on spacelike vectors cannot produce a NaN.
template <class S>
S norm(const VecX<S>& v) {
  using std::sqrt;
  return sqrt(clamp_min(inner(v, v), 0.0));
}

// arcosh(-<x,y>_L); the argument is clamped to the domain boundary, and
// rejected if it is below 1 beyond tolerance.
template <class S>
S dist(const VecX<S>& x, const VecX<S>& y) {
  using std::acosh;
  const S m = -inner(x, y);
  if (val(m) < 1.0 - kBallTol) {
    throw std::domain_error("lorentz: arcosh argument below 1");
  }
  return acosh(clamp_min(m, 1.0));
}

template <class S>
VecX<S> exp_at(const VecX<S>& x, const VecX<S>& v) {
  using std::cosh;
  using std::sinh;
  const S n = clamp_min(norm(v), kMinNorm);
  return cosh(n) * x + (sinh(n) / n) * v;
}

template <class S>
VecX<S> log_at(const VecX<S>& x, const VecX<S>& y) {
  const VecX<S> u = y + inner(x, y) * x;
  const S n = clamp_min(norm(u), kMinNorm);
  return (dist(x, y) / n) * u;
}

// Origin-based maps. exp0 takes the spatial coordinates of a tangent vector
// at the origin and returns the ambient point; log0 inverts it. Written in
// terms of asinh of the spatial norm, which is the smooth on-manifold form of
// the general log map.
template <class S>
VecX<S> exp0_spatial(const VecX<S>& v_spatial) {
  using std::cosh;
  using std::sinh;
  const S n = clamp_min(v_spatial.norm(), kMinNorm);
  VecX<S> out(v_spatial.size() + 1);
  out[0] = cosh(n);
  out.tail(v_spatial.size()) = (sinh(n) / n) * v_spatial;
  return out;
}

template <class S>
VecX<S> log0_spatial(const VecX<S>& y) {
  using std::asinh;
  const auto n_sp = y.size() - 1;
  const VecX<S> ys = y.tail(n_sp);
  const S n = clamp_min(ys.norm(), kMinNorm);
  return VecX<S>((asinh(n) / n) * ys);
}

// Ambient-vector forms of the origin maps (tangent vectors carry an explicit
// zero time component).
template <class S>
VecX<S> exp0(const VecX<S>& v) {
  return exp0_spatial<S>(VecX<S>(v.tail(v.size() - 1)));
}

template <class S>
VecX<S> log0(const VecX<S>& y) {
  VecX<S> out = VecX<S>::Zero(y.size());
  out.tail(y.size() - 1) = log0_spatial<S>(y);
  return out;
}

template <class S>
VecX<S> transport(const VecX<S>& x, const VecX<S>& y, const VecX<S>& z) {
  const S coeff = inner(y, z) / (S(1.0) - inner(x, y));
  return z + coeff * (x + y);
}

// Recomputes the time component from the spatial part when accumulated
// round-off pushes the point off the hyperboloid.
template <class S>
VecX<S> reproject(const VecX<S>& x) {
  using std::sqrt;
  const double x0 = val(x[0]);
  const double scale = ad::max(1.0, x0 * x0);
  if (std::abs(val(inner(x, x)) + 1.0) <= kHyperboloidTol * scale) return x;
  VecX<S> out = x;
  out[0] = sqrt(S(1.0) + x.tail(x.size() - 1).squaredNorm());
  return out;
}

template <class S>
VecX<S> add(const VecX<S>& x, const VecX<S>& y) {
  check_on_hyperboloid(x);
  check_on_hyperboloid(y);
  VecX<S> z = VecX<S>::Zero(x.size());
  z.tail(x.size() - 1) = log0_spatial<S>(y);
  const VecX<S> o = origin<S>(x.size());
  return reproject<S>(exp_at<S>(x, transport<S>(o, x, z)));
}

template <class S>
VecX<S> scalar_mul(const S& r, const VecX<S>& x) {
  check_on_hyperboloid(x);
  return exp0_spatial<S>(VecX<S>(r * log0_spatial<S>(x)));
}

template <class S>
VecX<S> matvec(const MatX<S>& m, const VecX<S>& x) {
  if (m.cols() != x.size() - 1) throw std::invalid_argument("lorentz: matvec shape mismatch");
  check_on_hyperboloid(x);
  return exp0_spatial<S>(VecX<S>(m * log0_spatial<S>(x)));
}

template <class S>
VecX<S> pointwise(const VecX<S>& r, const VecX<S>& x) {
  if (r.size() != x.size() - 1) throw std::invalid_argument("lorentz: pointwise shape mismatch");
  check_on_hyperboloid(x);
  return exp0_spatial<S>(VecX<S>(r.cwiseProduct(log0_spatial<S>(x))));
}

// -h on the hyperboloid keeps the time component: (x0, -x_spatial), so that
// add(x, neg(x)) returns the origin.
template <class S>
VecX<S> neg(const VecX<S>& x) {
  VecX<S> out = x;
  out.tail(x.size() - 1) = -x.tail(x.size() - 1);
  return out;
}

// Projects the spatial part onto the closed ball of radius l_max and rebuilds
// the time component, so the hyperboloid constraint holds by construction.
template <class S>
VecX<S> clamp_spatial(VecX<S> x, double l_max, long* hits = nullptr) {
  using std::sqrt;
  if (!(l_max > 0.0)) throw std::invalid_argument("lorentz: l_max must be positive");
  const auto n_sp = x.size() - 1;
  bool hit = false;
  for (int pass = 0; pass < 4; ++pass) {
    const S n = x.tail(n_sp).norm();
    if (!(val(n) > l_max)) break;
    x.tail(n_sp) = (S(l_max) / n) * x.tail(n_sp).eval();
    hit = true;
  }
  if (hit) {
    x[0] = sqrt(S(1.0) + x.tail(n_sp).squaredNorm());
    if (hits != nullptr) ++*hits;
  }
  return x;
}

}  // namespace hvmc::lorentz
