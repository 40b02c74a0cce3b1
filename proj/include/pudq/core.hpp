#pragma once

#include <Eigen/Dense>
#include <cassert>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "pudq/error.hpp"

namespace pudq {

// [q0, q1, q2, q3]: rotation part (cos phi, sin phi), dual part 0.5 * R_phi * t
using Pudq = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;
using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr double kUnitTol = 1e-9;

inline Pudq identity() { return Pudq(1.0, 0.0, 0.0, 0.0); }

// defining function h(x) = q0^2 + q1^2 - 1
inline double unit_residual(const Pudq& x) { return x[0] * x[0] + x[1] * x[1] - 1.0; }

inline bool is_unit(const Pudq& x, double tol = kUnitTol) { return std::abs(unit_residual(x)) <= tol; }

// bilinear dual-quaternion product, valid for arbitrary 4-vectors (tangent vectors included)
inline Eigen::Vector4d mul(const Eigen::Vector4d& x, const Eigen::Vector4d& y) {
  return Eigen::Vector4d(x[0] * y[0] - x[1] * y[1],
                         x[0] * y[1] + x[1] * y[0],
                         x[0] * y[2] - x[1] * y[3] + x[2] * y[0] + x[3] * y[1],
                         x[0] * y[3] + x[1] * y[2] - x[2] * y[1] + x[3] * y[0]);
}

inline Pudq compose(const Pudq& x, const Pudq& y) {
  assert(is_unit(x, 1e-6) && is_unit(y, 1e-6));
  return mul(x, y);
}

inline Pudq inverse(const Pudq& x) { return Pudq(x[0], -x[1], -x[2], -x[3]); }

// scale rotation and dual part together so that the rotation part is unit
inline Pudq renormalize(const Pudq& x) {
  const double n = std::hypot(x[0], x[1]);
  if (!(n > 0.0)) throw Error(ErrorKind::numerical, "cannot renormalize a PUDQ with zero rotation part");
  return x / n;
}

// composes a chain, renormalizing every `every` products
inline Pudq compose_chain(const std::vector<Pudq>& xs, int every = 100) {
  Pudq acc = identity();
  int count = 0;
  for (const auto& x : xs) {
    acc = compose(acc, x);
    if (++count % every == 0) acc = renormalize(acc);
  }
  return acc;
}

// equality as rigid motions (x and -x encode the same pose)
inline bool same_pose(const Pudq& x, const Pudq& y, double tol) {
  return (x - y).cwiseAbs().maxCoeff() <= tol || (x + y).cwiseAbs().maxCoeff() <= tol;
}

enum class CompositionKind { L, R, LL_inv, RR_inv, RL_inv, LR_inv, L_inv_inv, R_inv_inv };

// Q_L(x) y = x (+) y
inline Mat4 q_left(const Pudq& x) {
  Mat4 m;
  m << x[0], -x[1], 0, 0,
       x[1], x[0], 0, 0,
       x[2], x[3], x[0], -x[1],
       x[3], -x[2], x[1], x[0];
  return m;
}

// Q_R(y) x = x (+) y
inline Mat4 q_right(const Pudq& y) {
  Mat4 m;
  m << y[0], -y[1], 0, 0,
       y[1], y[0], 0, 0,
       y[2], -y[3], y[0], y[1],
       y[3], y[2], -y[1], y[0];
  return m;
}

// y -> y^{-1}
inline Mat4 inversion_matrix() { return Eigen::Vector4d(1, -1, -1, -1).asDiagonal(); }

// kind      product
// L         Q(x) y = x (+) y
// R         Q(x) y = y (+) x
// LL_inv    Q(x) y = x^-1 (+) y
// RR_inv    Q(x) y = y (+) x^-1
// RL_inv    Q(x) y = x (+) y^-1
// LR_inv    Q(x) y = y^-1 (+) x
// L_inv_inv Q(x) y = x^-1 (+) y^-1
// R_inv_inv Q(x) y = y^-1 (+) x^-1
inline Mat4 composition_matrix(const Pudq& x, CompositionKind kind) {
  const Mat4 I = inversion_matrix();
  switch (kind) {
    case CompositionKind::L: return q_left(x);
    case CompositionKind::R: return q_right(x);
    case CompositionKind::LL_inv: return q_left(inverse(x));
    case CompositionKind::RR_inv: return q_right(inverse(x));
    case CompositionKind::RL_inv: return q_left(x) * I;
    case CompositionKind::LR_inv: return q_right(x) * I;
    case CompositionKind::L_inv_inv: return q_left(inverse(x)) * I;
    case CompositionKind::R_inv_inv: return q_right(inverse(x)) * I;
  }
  throw Error(ErrorKind::usage, "invalid composition kind");
}

inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

// R_phi = [[c, s], [-s, c]]
inline Eigen::Matrix2d half_rotation(double c, double s) {
  Eigen::Matrix2d r;
  r << c, s, -s, c;
  return r;
}

struct EuclideanPose {
  double tx = 0.0;
  double ty = 0.0;
  double theta = 0.0;
};

inline Pudq from_euclidean(const EuclideanPose& p) {
  const double phi = 0.5 * wrap_angle(p.theta);
  const double c = std::cos(phi), s = std::sin(phi);
  const Vec2 d = 0.5 * half_rotation(c, s) * Vec2(p.tx, p.ty);
  return Pudq(c, s, d[0], d[1]);
}

inline EuclideanPose to_euclidean(const Pudq& x) {
  double theta = std::atan2(2.0 * x[0] * x[1], x[0] * x[0] - x[1] * x[1]);
  if (theta <= -kPi) theta += 2.0 * kPi;
  const Vec2 t = 2.0 * half_rotation(x[0], x[1]).transpose() * Vec2(x[2], x[3]);
  return {t[0], t[1], theta};
}

using Se2Matrix = Eigen::Matrix3d;

inline void validate_se2(const Se2Matrix& T, double tol = 1e-9) {
  const Eigen::Matrix2d R = T.topLeftCorner<2, 2>();
  if ((R.transpose() * R - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() > tol)
    throw Error(ErrorKind::validation, "SE(2) rotation block is not orthogonal");
  if (std::abs(R.determinant() - 1.0) > tol)
    throw Error(ErrorKind::validation, "SE(2) rotation block determinant is not 1");
  if (T(2, 0) != 0.0 || T(2, 1) != 0.0 || T(2, 2) != 1.0)
    throw Error(ErrorKind::validation, "SE(2) bottom row is not [0 0 1]");
}

inline Se2Matrix to_se2(const Pudq& x) {
  const EuclideanPose p = to_euclidean(x);
  // cos(2 phi), sin(2 phi) straight from the rotation part
  const double c = x[0] * x[0] - x[1] * x[1], s = 2.0 * x[0] * x[1];
  Se2Matrix T;
  T << c, -s, p.tx,
       s, c, p.ty,
       0, 0, 1;
  return T;
}

inline Pudq from_se2(const Se2Matrix& T) {
  validate_se2(T);
  return from_euclidean({T(0, 2), T(1, 2), std::atan2(T(1, 0), T(0, 0))});
}

enum class Frame { pudq_tangent, se2_algebra, euclidean };

inline const char* to_string(Frame f) {
  switch (f) {
    case Frame::pudq_tangent: return "pudq_tangent";
    case Frame::se2_algebra: return "se2_algebra";
    case Frame::euclidean: return "euclidean";
  }
  return "unknown";
}

inline Frame frame_from_string(const std::string& s) {
  if (s == "pudq_tangent" || s == "pudq") return Frame::pudq_tangent;
  if (s == "se2_algebra" || s == "se2") return Frame::se2_algebra;
  if (s == "euclidean") return Frame::euclidean;
  throw Error(ErrorKind::usage, "unknown frame '" + s + "'");
}

inline void validate_spd(const Mat3& m, const std::string& what = "matrix") {
  if (!m.allFinite()) throw Error(ErrorKind::validation, what + " has non-finite entries");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw Error(ErrorKind::validation, what + " is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat3> es(m, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 0.0)) throw Error(ErrorKind::validation, what + " is not positive definite");
}

// A covariance or information matrix tagged with the chart it is expressed in.
struct TangentCovariance {
  Mat3 m = Mat3::Identity();
  Frame frame = Frame::pudq_tangent;
};

// pudq tangent (k, ei, ej) <- se2 algebra (x, y, theta) coordinates: pudq = 0.5 * B_p * se2
inline Mat3 b_p() {
  Mat3 b;
  b << 0, 0, 1,
       1, 0, 0,
       0, 1, 0;
  return b;
}

inline double half_cot(double h) {
  // h cot h = cos(h) / sinc(h)
  if (std::abs(h) < 1e-6) return 1.0 - h * h / 3.0;
  return h * std::cos(h) / std::sin(h);
}

// v_p = 1/2 B_p M_p(theta) x_e for a euclidean perturbation x_e = (tx, ty, theta)
inline Mat3 m_p(double theta) {
  const double h = 0.5 * theta;
  Mat3 m;
  m << half_cot(h), h, 0,
       -h, half_cot(h), 0,
       0, 0, 1;
  return m;
}

// x_e = M_s(theta) v_s for v_s in se(2) coordinates
inline Mat3 m_s(double theta) {
  double sc = 1.0, vc = 0.0;
  if (std::abs(theta) < 1e-6) {
    sc = 1.0 - theta * theta / 6.0;
    vc = theta / 2.0;
  } else {
    sc = std::sin(theta) / theta;
    vc = (1.0 - std::cos(theta)) / theta;
  }
  Mat3 m;
  m << sc, -vc, 0,
       vc, sc, 0,
       0, 0, 1;
  return m;
}

namespace detail {

// v_p = to_pudq(f) v_f
inline Mat3 to_pudq(Frame f, double theta) {
  switch (f) {
    case Frame::pudq_tangent: return Mat3::Identity();
    case Frame::se2_algebra: return 0.5 * b_p();
    case Frame::euclidean: return 0.5 * b_p() * m_p(theta);
  }
  return Mat3::Identity();
}

// v_f = from_pudq(f) v_p, the exact inverse of to_pudq
inline Mat3 from_pudq(Frame f, double theta) {
  switch (f) {
    case Frame::pudq_tangent: return Mat3::Identity();
    case Frame::se2_algebra: return 2.0 * b_p().transpose();
    case Frame::euclidean: return 2.0 * m_s(theta) * b_p().transpose();
  }
  return Mat3::Identity();
}

inline double frame_theta(const TangentCovariance& c, Frame target, std::optional<double> theta) {
  if ((c.frame == Frame::euclidean || target == Frame::euclidean) && !theta)
    throw Error(ErrorKind::missing_parameter, "euclidean frame conversion requires theta");
  return theta.value_or(0.0);
}

inline Mat3 symmetrized(const Mat3& m) { return 0.5 * (m + m.transpose()); }

}  // namespace detail

// Omega_p = K^T Omega_f K with K = from_pudq(f); then Omega_t = L^T Omega_p L with L = to_pudq(t)
inline TangentCovariance transform_information(const TangentCovariance& omega, Frame target,
                                               std::optional<double> theta = std::nullopt) {
  validate_spd(omega.m, "information matrix");
  const double th = detail::frame_theta(omega, target, theta);
  if (omega.frame == target) return omega;
  const Mat3 K = detail::from_pudq(omega.frame, th);
  const Mat3 L = detail::to_pudq(target, th);
  const Mat3 op = K.transpose() * omega.m * K;
  return {detail::symmetrized(L.transpose() * op * L), target};
}

inline TangentCovariance transform_covariance(const TangentCovariance& sigma, Frame target,
                                              std::optional<double> theta = std::nullopt) {
  validate_spd(sigma.m, "covariance matrix");
  const double th = detail::frame_theta(sigma, target, theta);
  if (sigma.frame == target) return sigma;
  const Mat3 L = detail::to_pudq(sigma.frame, th);
  const Mat3 K = detail::from_pudq(target, th);
  const Mat3 sp = L * sigma.m * L.transpose();
  return {detail::symmetrized(K * sp * K.transpose()), target};
}

}  // namespace pudq
