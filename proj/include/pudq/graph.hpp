#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pudq/core.hpp"
#include "pudq/geometry.hpp"

namespace pudq {

struct Edge {
  int i = 0;
  int j = 0;
  Pudq z = identity();
  // information matrix, always in the pudq tangent frame
  Mat3 omega = Mat3::Identity();
};

struct PoseGraph {
  std::vector<Pudq> vertices;
  std::vector<Edge> edges;
  int anchor = 0;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
};

inline bool is_odometry(const Edge& e) { return std::abs(e.i - e.j) == 1; }

inline void validate_graph(const PoseGraph& g) {
  const int n = g.num_vertices();
  if (n < 1) throw Error(ErrorKind::structure, "graph has no vertices");
  if (g.anchor < 0 || g.anchor >= n) throw Error(ErrorKind::structure, "anchor id " + std::to_string(g.anchor) + " out of range");
  std::vector<char> chain(static_cast<std::size_t>(std::max(0, n - 1)), 0);
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const Edge& e = g.edges[k];
    if (e.i < 0 || e.i >= n || e.j < 0 || e.j >= n || e.i == e.j)
      throw Error(ErrorKind::structure, "edge " + std::to_string(k) + " has invalid endpoints (" +
                                            std::to_string(e.i) + ", " + std::to_string(e.j) + ")");
    if (!is_unit(e.z, 1e-6)) throw Error(ErrorKind::validation, "edge " + std::to_string(k) + " measurement violates the unit constraint");
    validate_spd(e.omega, "information matrix of edge " + std::to_string(k));
    if (is_odometry(e)) chain[static_cast<std::size_t>(std::min(e.i, e.j))] = 1;
  }
  for (std::size_t k = 0; k < chain.size(); ++k)
    if (!chain[k]) throw Error(ErrorKind::structure, "missing odometry edge between " + std::to_string(k) + " and " + std::to_string(k + 1));
}

inline int find_edge(const PoseGraph& g, int i, int j) {
  for (std::size_t k = 0; k < g.edges.size(); ++k)
    if (g.edges[k].i == i && g.edges[k].j == j) return static_cast<int>(k);
  throw Error(ErrorKind::lookup, "no edge (" + std::to_string(i) + ", " + std::to_string(j) + ")");
}

// left-multiplies every pose by x_anchor^-1 so that the anchor becomes the identity
inline ProductPoint regauge(const ProductPoint& X, int anchor) {
  const Pudq a = inverse(block(X, anchor));
  ProductPoint Y(X.size());
  for (Eigen::Index i = 0; i < num_poses(X); ++i) Y.segment<4>(4 * i) = compose(a, block(X, i));
  Y.segment<4>(4 * anchor) = identity();
  return Y;
}

}  // namespace pudq
