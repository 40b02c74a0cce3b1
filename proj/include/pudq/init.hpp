#pragma once

#include <Eigen/Sparse>
#include <string>
#include <vector>

#include "pudq/core.hpp"
#include "pudq/geometry.hpp"
#include "pudq/graph.hpp"

namespace pudq {

// x_0 = 1, x_{k+1} = x_k (+) z_{k,k+1}, then re-gauged so the anchor is the identity
inline ProductPoint init_odometry(const PoseGraph& g) {
  const int n = g.num_vertices();
  std::vector<const Edge*> step(static_cast<std::size_t>(std::max(0, n - 1)), nullptr);
  for (const Edge& e : g.edges)
    if (is_odometry(e) && !step[static_cast<std::size_t>(std::min(e.i, e.j))]) step[static_cast<std::size_t>(std::min(e.i, e.j))] = &e;
  ProductPoint X(4 * n);
  Pudq x = identity();
  X.segment<4>(0) = x;
  for (int k = 0; k + 1 < n; ++k) {
    const Edge* e = step[static_cast<std::size_t>(k)];
    if (!e) throw Error(ErrorKind::structure, "missing odometry edge between " + std::to_string(k) + " and " + std::to_string(k + 1));
    x = compose(x, e->i == k ? e->z : inverse(e->z));
    if ((k + 1) % 100 == 0) x = renormalize(x);
    X.segment<4>(4 * (k + 1)) = x;
  }
  return regauge(X, g.anchor);
}

struct ChordalInfo {
  bool fell_back = false;
  std::string warning;
};

namespace detail {

// min ||A x - b|| through the sparse normal equations; false if singular
inline bool sparse_least_squares(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b, Eigen::VectorXd& x) {
  const Eigen::SparseMatrix<double> AtA = A.transpose() * A;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(AtA);
  if (ldlt.info() != Eigen::Success) return false;
  const Eigen::VectorXd d = ldlt.vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  if (!(d.minCoeff() > 1e-12 * std::max(1.0, dmax))) return false;
  x = ldlt.solve(A.transpose() * b);
  return ldlt.info() == Eigen::Success && x.allFinite();
}

inline Eigen::Matrix2d rot2(double theta) {
  Eigen::Matrix2d r;
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

}  // namespace detail

// Rotations from min sum ||c_j - R(theta_ij) c_i||^2 with c_anchor = (1, 0), normalized;
// translations from min sum ||t_j - t_i - R(theta_i) t_ij||^2 with t_anchor = 0.
inline ProductPoint init_chordal(const PoseGraph& g, ChordalInfo* info = nullptr) {
  validate_graph(g);
  const int n = g.num_vertices();
  const int a = g.anchor;
  auto col = [a](int v) { return v < a ? v : v - 1; };
  auto fallback = [&](const std::string& why) {
    if (info) *info = {true, "chordal initialization fell back to odometry: " + why};
    return init_odometry(g);
  };
  if (n == 1) {
    ProductPoint X(4);
    X = identity();
    return X;
  }
  const int m = g.num_edges();
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(2 * m);
  for (int k = 0; k < m; ++k) {
    const Edge& e = g.edges[static_cast<std::size_t>(k)];
    const Eigen::Matrix2d R = detail::rot2(to_euclidean(e.z).theta);
    for (int r = 0; r < 2; ++r) {
      if (e.j != a) trip.emplace_back(2 * k + r, 2 * col(e.j) + r, 1.0);
      if (e.i != a) {
        for (int c = 0; c < 2; ++c) trip.emplace_back(2 * k + r, 2 * col(e.i) + c, -R(r, c));
      } else {
        b[2 * k + r] += R(r, 0);
      }
    }
  }
  Eigen::SparseMatrix<double> A(2 * m, 2 * (n - 1));
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd c;
  if (!detail::sparse_least_squares(A, b, c)) return fallback("singular rotation system");

  std::vector<double> theta(static_cast<std::size_t>(n), 0.0);
  for (int v = 0; v < n; ++v) {
    if (v == a) continue;
    const Vec2 cv = c.segment<2>(2 * col(v));
    if (!(cv.norm() > 1e-12)) return fallback("degenerate rotation estimate at vertex " + std::to_string(v));
    theta[static_cast<std::size_t>(v)] = std::atan2(cv[1], cv[0]);
  }

  trip.clear();
  b.setZero();
  for (int k = 0; k < m; ++k) {
    const Edge& e = g.edges[static_cast<std::size_t>(k)];
    const EuclideanPose p = to_euclidean(e.z);
    const Vec2 rhs = detail::rot2(theta[static_cast<std::size_t>(e.i)]) * Vec2(p.tx, p.ty);
    for (int r = 0; r < 2; ++r) {
      if (e.j != a) trip.emplace_back(2 * k + r, 2 * col(e.j) + r, 1.0);
      if (e.i != a) trip.emplace_back(2 * k + r, 2 * col(e.i) + r, -1.0);
      b[2 * k + r] = rhs[r];
    }
  }
  A.setZero();
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd t;
  if (!detail::sparse_least_squares(A, b, t)) return fallback("singular translation system");

  ProductPoint X(4 * n);
  for (int v = 0; v < n; ++v) {
    if (v == a) {
      X.segment<4>(4 * v) = identity();
      continue;
    }
    const Vec2 tv = t.segment<2>(2 * col(v));
    X.segment<4>(4 * v) = from_euclidean({tv[0], tv[1], theta[static_cast<std::size_t>(v)]});
  }
  if (info) *info = {};
  return X;
}

}  // namespace pudq
