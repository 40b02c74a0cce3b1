#pragma once

#include <cmath>
#include <vector>

#include "pudq/core.hpp"
#include "pudq/geometry.hpp"
#include "pudq/graph.hpp"

namespace pudq {

struct EdgeError {
  int i = 0;
  int j = 0;
  double lie = 0.0;          // ||Log_1(z_hat^-1 (+) z_true)||
  double translation = 0.0;  // ||t_hat - t_true|| in the frame of i
  double angle = 0.0;        // minimal angle between theta_hat and theta_true
};

struct RpeReport {
  double rpe_l = 0.0;
  double rpe_e = 0.0;
  std::vector<EdgeError> per_edge;
};

inline double minimal_angle(double a, double b) { return std::abs(wrap_angle(a - b)); }

inline EdgeError edge_error(const ProductPoint& est, const ProductPoint& gt, int i, int j) {
  const Pudq zh = compose(inverse(block(est, i)), block(est, j));
  const Pudq zt = compose(inverse(block(gt, i)), block(gt, j));
  const EuclideanPose ph = to_euclidean(zh), pt = to_euclidean(zt);
  EdgeError e;
  e.i = i;
  e.j = j;
  e.lie = zh == zt ? 0.0 : log_identity(compose(inverse(zh), zt)).norm();
  e.translation = std::hypot(ph.tx - pt.tx, ph.ty - pt.ty);
  e.angle = minimal_angle(ph.theta, pt.theta);
  return e;
}

inline RpeReport rpe_report(const ProductPoint& est, const ProductPoint& gt, const std::vector<Edge>& edges) {
  if (est.size() != gt.size()) throw Error(ErrorKind::validation, "estimate and ground truth have different vertex counts");
  RpeReport r;
  if (edges.empty()) return r;
  double sl = 0.0, se = 0.0;
  for (const Edge& e : edges) {
    const EdgeError ee = edge_error(est, gt, e.i, e.j);
    sl += ee.lie * ee.lie;
    se += ee.translation * ee.translation + ee.angle * ee.angle;
    r.per_edge.push_back(ee);
  }
  r.rpe_l = std::sqrt(sl / static_cast<double>(edges.size()));
  r.rpe_e = std::sqrt(se / static_cast<double>(edges.size()));
  return r;
}

inline double rpe_lie(const ProductPoint& est, const ProductPoint& gt, const std::vector<Edge>& edges) {
  return rpe_report(est, gt, edges).rpe_l;
}

inline double rpe_euclidean(const ProductPoint& est, const ProductPoint& gt, const std::vector<Edge>& edges) {
  return rpe_report(est, gt, edges).rpe_e;
}

// 100 (baseline - candidate) / baseline; zero when both vanish
inline double percent_reduction(double baseline, double candidate) {
  if (baseline == 0.0) return candidate == 0.0 ? 0.0 : -100.0;
  return 100.0 * (baseline - candidate) / baseline;
}

}  // namespace pudq
