#pragma once

#include <algorithm>
#include <cmath>

#include "pudq/graph.hpp"

namespace pudq {

struct BoundConstants {
  double T_bar = 0, z_bar = 0, t_x = 0, t_r = 0, z2 = 0, z3 = 0, z23 = 0;
  double e_bar = 0, rho = 0, J_bar = 0, g_bar = 0;
  double tau1 = 0, tau2 = 0, tau3 = 0, tau4 = 0;
  double h_ii = 0, h_ij = 0, Omega_bar = 0, L_g = 0, beta = 0;
};

// Constants valid on the set {X : ||X|| <= T_bar}; T_bar is supplied by the caller.
inline BoundConstants compute_bounds(const PoseGraph& g, double T_bar) {
  const double n = g.num_vertices();
  if (!(T_bar * T_bar >= n))
    throw Error(ErrorKind::invalid_region, "radius T_bar^2 = " + std::to_string(T_bar * T_bar) +
                                               " is smaller than the vertex count " + std::to_string(g.num_vertices()));
  constexpr double hp = kHalfPi;
  const double r2 = std::sqrt(2.0);
  BoundConstants b;
  b.T_bar = T_bar;
  for (const Edge& e : g.edges) {
    b.z_bar = std::max(b.z_bar, e.z.norm());
    b.z2 = std::max(b.z2, std::abs(e.z[2]));
    b.z3 = std::max(b.z3, std::abs(e.z[3]));
    b.Omega_bar += e.omega.norm();
  }
  b.z23 = b.z2 + b.z3;
  b.t_x = std::sqrt(T_bar * T_bar - n);
  b.t_r = (b.t_x * b.t_x + 3.0) * b.z_bar;
  b.e_bar = hp * std::sqrt(b.t_r * b.t_r + 1.0);
  b.rho = hp * (b.z23 + r2 * b.t_x) + r2 * b.t_r;
  b.J_bar = std::sqrt(2.0 * (hp + 1.0) * (hp + 1.0) + 4.0 * b.rho * b.rho + 4.0 * hp * hp);
  for (const Edge& e : g.edges) {
    const double row1 = e.omega.row(0).cwiseAbs().sum();
    const double row23 = e.omega.row(1).cwiseAbs().sum() + e.omega.row(2).cwiseAbs().sum();
    b.g_bar = std::max(b.g_bar, r2 * ((hp + 1.0) * row1 + b.rho * row23) * b.e_bar);
  }
  const double base = 2.0 * (b.z23 + r2 * b.t_x);
  b.tau1 = base + r2 * (hp + 2.0) * b.t_r;
  b.tau2 = base + r2 * (hp + 3.0) * b.t_r;
  b.tau3 = hp * b.z2 + base + r2 * (hp + 4.0) * b.t_r;
  b.tau4 = hp * b.z3 + base + r2 * (hp + 4.0) * b.t_r;
  const double jj = b.e_bar + b.J_bar * b.J_bar;
  b.h_ii = std::sqrt(4.0 * (b.tau1 * b.tau1 + b.tau2 * b.tau2) + hp * hp + 2.0 * (hp + 1.0) * (hp + 1.0) +
                     (hp + 2.0) * (hp + 2.0) + 16.0) * jj;
  b.h_ij = std::sqrt(4.0 * (b.tau3 * b.tau3 + b.tau4 * b.tau4) + 16.0 * (hp + 1.0) * (hp + 1.0) +
                     4.0 * (kPi + 4.0) * (kPi + 4.0)) * jj;
  b.L_g = r2 * (b.h_ii + b.h_ij) * b.Omega_bar + 2.0 * g.num_edges() * b.g_bar;
  b.beta = 4.0 * b.J_bar * b.J_bar * b.Omega_bar;
  return b;
}

}  // namespace pudq
