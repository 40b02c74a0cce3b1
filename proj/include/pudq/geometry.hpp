#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "pudq/core.hpp"

namespace pudq {

// Stacked 4N-vectors: points of M^N and their (ambient) tangent vectors.
using ProductPoint = Eigen::VectorXd;
using ProductTangent = Eigen::VectorXd;

inline Eigen::Index num_poses(const ProductPoint& X) { return X.size() / 4; }

inline Pudq block(const Eigen::VectorXd& X, Eigen::Index i) { return X.segment<4>(4 * i); }

inline ProductPoint stack(const std::vector<Pudq>& xs) {
  ProductPoint X(4 * static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) X.segment<4>(4 * static_cast<Eigen::Index>(i)) = xs[i];
  return X;
}

inline std::vector<Pudq> unstack(const ProductPoint& X) {
  std::vector<Pudq> xs(static_cast<std::size_t>(num_poses(X)));
  for (Eigen::Index i = 0; i < num_poses(X); ++i) xs[static_cast<std::size_t>(i)] = block(X, i);
  return xs;
}

// P~ x = (x0, x1, 0, 0)
inline Eigen::Vector4d rot_part(const Eigen::Vector4d& x) { return Eigen::Vector4d(x[0], x[1], 0.0, 0.0); }

// P_x^perp u = P~ x x^T P~ u
inline Eigen::Vector4d normal_project(const Pudq& x, const Eigen::Vector4d& u) {
  return rot_part(x) * (x[0] * u[0] + x[1] * u[1]);
}

// P_x u = (I - P~ x x^T P~) u
inline Eigen::Vector4d project_tangent(const Pudq& x, const Eigen::Vector4d& u) {
  return u - normal_project(x, u);
}

inline Mat4 tangent_projector(const Pudq& x) {
  const Eigen::Vector4d p = rot_part(x);
  return Mat4::Identity() - p * p.transpose();
}

inline Mat4 normal_projector(const Pudq& x) {
  const Eigen::Vector4d p = rot_part(x);
  return p * p.transpose();
}

inline bool is_tangent(const Pudq& x, const Eigen::Vector4d& u, double tol = 1e-10) {
  return std::abs(x[0] * u[0] + x[1] * u[1]) <= tol;
}

inline ProductTangent product_project(const ProductPoint& X, const Eigen::VectorXd& U) {
  ProductTangent out(U.size());
  for (Eigen::Index i = 0; i < num_poses(X); ++i) out.segment<4>(4 * i) = project_tangent(block(X, i), U.segment<4>(4 * i));
  return out;
}

// wrap to (-pi/2, pi/2]
inline double wrap_half(double a) {
  if (a <= -kHalfPi) return a + kPi;
  if (a > kHalfPi) return a - kPi;
  return a;
}

inline double half_angle(const Pudq& x) { return wrap_half(std::atan2(x[1], x[0])); }

inline double sinc(double phi) {
  if (std::abs(phi) < 1e-6) {
    const double p2 = phi * phi;
    return 1.0 - p2 / 6.0 + p2 * p2 / 120.0;
  }
  return std::sin(phi) / phi;
}

// x and -x give the same log, so Exp_1(Log_1(x)) = x up to sign
inline Vec3 log_identity(const Pudq& x) {
  const double g = sinc(half_angle(x));
  const double s = x[0] < 0.0 ? -1.0 : 1.0;
  return s * Vec3(x[1], x[2], x[3]) / g;
}

inline Pudq exp_identity(const Vec3& v) {
  const double g = sinc(v[0]);
  return Pudq(std::cos(v[0]), g * v[0], g * v[1], g * v[2]);
}

// Log_x(y) = x (+) [0, Log_1(x^-1 (+) y)]
inline Eigen::Vector4d log_at(const Pudq& x, const Pudq& y) {
  const Vec3 v = log_identity(compose(inverse(x), y));
  return mul(x, Eigen::Vector4d(0.0, v[0], v[1], v[2]));
}

struct ExpDiagnostics {
  // first component of x^-1 (+) v, discarded by the slice
  double discarded = 0.0;
};

// Exp_x(v) = x (+) Exp_1((x^-1 (+) P_x v)_{1:3})
inline Pudq exp_at(const Pudq& x, const Eigen::Vector4d& v, ExpDiagnostics* diag = nullptr) {
  const Eigen::Vector4d w = mul(inverse(x), project_tangent(x, v));
  if (diag) diag->discarded = w[0];
  return compose(x, exp_identity(w.tail<3>()));
}

inline ProductPoint product_exp(const ProductPoint& X, const ProductTangent& S) {
  if (X.size() != S.size() || X.size() % 4 != 0)
    throw Error(ErrorKind::usage, "product_exp dimension mismatch");
  ProductPoint Y(X.size());
  for (Eigen::Index i = 0; i < num_poses(X); ++i) Y.segment<4>(4 * i) = exp_at(block(X, i), S.segment<4>(4 * i));
  return Y;
}

inline ProductTangent product_log(const ProductPoint& X, const ProductPoint& Y) {
  if (X.size() != Y.size() || X.size() % 4 != 0)
    throw Error(ErrorKind::usage, "product_log dimension mismatch");
  ProductTangent S(X.size());
  for (Eigen::Index i = 0; i < num_poses(X); ++i) S.segment<4>(4 * i) = log_at(block(X, i), block(Y, i));
  return S;
}

// y (+) (x^-1 (+) u)
inline Eigen::Vector4d parallel_transport(const Pudq& x, const Pudq& y, const Eigen::Vector4d& u) {
  return mul(y, mul(inverse(x), u));
}

// <u, w> in the left-trivialized chart: <x^-1 (+) u, x^-1 (+) w>
inline double group_inner(const Pudq& x, const Eigen::Vector4d& u, const Eigen::Vector4d& w) {
  return mul(inverse(x), u).dot(mul(inverse(x), w));
}

inline double geodesic_distance(const ProductPoint& X, const ProductPoint& Y) {
  if (X.size() != Y.size() || X.size() % 4 != 0)
    throw Error(ErrorKind::usage, "geodesic_distance dimension mismatch");
  double s = 0.0;
  for (Eigen::Index i = 0; i < num_poses(X); ++i)
    s += log_identity(compose(inverse(block(X, i)), block(Y, i))).squaredNorm();
  return std::sqrt(s);
}

// A_x(u, w) = -P_x P~ u x^T w
inline Eigen::Vector4d weingarten(const Pudq& x, const Eigen::Vector4d& u, const Eigen::Vector4d& w) {
  return -project_tangent(x, rot_part(u)) * x.dot(w);
}

}  // namespace pudq
