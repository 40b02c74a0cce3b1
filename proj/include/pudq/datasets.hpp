#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pudq/core.hpp"
#include "pudq/geometry.hpp"
#include "pudq/graph.hpp"
#include "pudq/init.hpp"
#include "pudq/random.hpp"

namespace pudq {

struct SynthConfig {
  int n_vertices = 1000;
  double grid_step = 1.0;
  double loop_closure_prob = 0.03;
  double loop_closure_radius = 2.0;
  double sigma_w = 1e-3;
  int wishart_dof = 10;
  // probability of keeping the heading at each step; turns split the rest evenly
  double straight_prob = 0.5;
  std::uint64_t rng_seed = 0;
};

inline void validate_synth(const SynthConfig& c) {
  if (c.n_vertices < 2) throw Error(ErrorKind::usage, "n_vertices must be at least 2");
  if (!(c.grid_step > 0.0)) throw Error(ErrorKind::usage, "grid_step must be positive");
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(c.loop_closure_prob) || !prob(c.straight_prob)) throw Error(ErrorKind::usage, "probabilities must lie in [0, 1]");
  if (!(c.loop_closure_radius >= 0.0)) throw Error(ErrorKind::usage, "loop_closure_radius must be nonnegative");
  if (!(c.sigma_w > 0.0)) throw Error(ErrorKind::usage, "sigma_w must be positive");
  if (c.wishart_dof < 3) throw Error(ErrorKind::usage, "wishart_dof must be at least 3");
}

// Axis-aligned random walk: turn by 0 or +-pi/2, then advance one grid step.
inline std::vector<Pudq> synth_grid_trajectory(const SynthConfig& c) {
  validate_synth(c);
  Rng rng(c.rng_seed, Stream::trajectory);
  std::vector<Pudq> poses;
  poses.reserve(static_cast<std::size_t>(c.n_vertices));
  // heading as a quarter-turn count keeps positions exact multiples of grid_step
  int heading = 0;
  long gx = 0, gy = 0;
  poses.push_back(identity());
  static constexpr int dx[4] = {1, 0, -1, 0};
  static constexpr int dy[4] = {0, 1, 0, -1};
  for (int k = 1; k < c.n_vertices; ++k) {
    const double u = rng.uniform();
    if (u >= c.straight_prob) heading = (heading + (u < c.straight_prob + 0.5 * (1.0 - c.straight_prob) ? 1 : 3)) % 4;
    gx += dx[heading];
    gy += dy[heading];
    poses.push_back(from_euclidean({c.grid_step * gx, c.grid_step * gy, wrap_angle(heading * kHalfPi)}));
  }
  return poses;
}

// Odometry edges (k, k+1) followed by loop closures (i, j), j > i + 1, within the radius.
inline std::vector<std::pair<int, int>> synth_edges(const std::vector<Pudq>& gt, const SynthConfig& c) {
  const int n = static_cast<int>(gt.size());
  std::vector<std::pair<int, int>> edges;
  for (int k = 0; k + 1 < n; ++k) edges.emplace_back(k, k + 1);
  if (c.loop_closure_prob <= 0.0 || c.loop_closure_radius <= 0.0) return edges;

  std::vector<Vec2> pos(gt.size());
  for (std::size_t k = 0; k < gt.size(); ++k) {
    const EuclideanPose p = to_euclidean(gt[k]);
    pos[k] = Vec2(p.tx, p.ty);
  }
  // cells slightly wider than the match radius so rounding in the positions cannot push a pair two cells apart
  const double cell = c.loop_closure_radius * (1.0 + 1e-6);
  auto key = [](long a, long b) { return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b); };
  std::unordered_map<std::uint64_t, std::vector<int>> grid;
  Rng rng(c.rng_seed, Stream::loop_closure);
  const double r2 = c.loop_closure_radius * c.loop_closure_radius * (1.0 + 1e-9);
  for (int j = 0; j < n; ++j) {
    const long cx = static_cast<long>(std::floor(pos[static_cast<std::size_t>(j)][0] / cell));
    const long cy = static_cast<long>(std::floor(pos[static_cast<std::size_t>(j)][1] / cell));
    std::vector<int> cand;
    for (long ox = -1; ox <= 1; ++ox)
      for (long oy = -1; oy <= 1; ++oy) {
        auto it = grid.find(key(cx + ox, cy + oy));
        if (it == grid.end()) continue;
        for (int i : it->second)
          if (i < j - 1 && (pos[static_cast<std::size_t>(i)] - pos[static_cast<std::size_t>(j)]).squaredNorm() <= r2) cand.push_back(i);
      }
    std::sort(cand.begin(), cand.end());
    for (int i : cand)
      if (rng.bernoulli(c.loop_closure_prob)) edges.emplace_back(i, j);
    grid[key(cx, cy)].push_back(j);
  }
  return edges;
}

// W_3(V, dof) by summing outer products of N(0, V) draws
inline Mat3 sample_wishart(const Mat3& V, int dof, Rng& rng) {
  const Eigen::LLT<Mat3> llt(V);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::validation, "Wishart scale matrix is not SPD");
  const Mat3 L = llt.matrixL();
  Mat3 S = Mat3::Zero();
  for (int m = 0; m < dof; ++m) {
    const Vec3 y = L * Vec3(rng.normal(), rng.normal(), rng.normal());
    S += y * y.transpose();
  }
  return 0.5 * (S + S.transpose());
}

struct WishartSample {
  Mat3 sigma_w;  // J3 + diag(u)
  Mat3 sigma;    // ~ W_3(sigma_w_scale * sigma_w, dof)
};

inline WishartSample sample_wishart_covariance(double sigma_w, Rng& rng, int dof = 10) {
  if (!(sigma_w > 0.0)) throw Error(ErrorKind::usage, "sigma_w must be positive");
  WishartSample w;
  // u in (0, 1]
  const Vec3 u(1.0 - rng.uniform(), 1.0 - rng.uniform(), 1.0 - rng.uniform());
  w.sigma_w = Mat3::Ones() + Mat3(u.asDiagonal());
  w.sigma = sample_wishart(sigma_w * w.sigma_w, dof, rng);
  return w;
}

inline WishartSample sample_wishart_covariance(double sigma_w, std::uint64_t seed, int dof = 10) {
  Rng rng(seed, Stream::covariance);
  return sample_wishart_covariance(sigma_w, rng, dof);
}

// eta ~ N(0, sigma), returned as z = (x_i^-1 (+) x_j) (+) Exp_1(eta)
inline Pudq corrupt_measurement(const Pudq& xi, const Pudq& xj, const Mat3& sigma, Rng& rng) {
  const Eigen::LLT<Mat3> llt(sigma);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::validation, "edge covariance is not SPD");
  const Vec3 eta = llt.matrixL() * Vec3(rng.normal(), rng.normal(), rng.normal());
  return compose(compose(inverse(xi), xj), exp_identity(eta));
}

inline PoseGraph corrupt_edges(const std::vector<Pudq>& gt, const std::vector<std::pair<int, int>>& edges,
                               const std::vector<Mat3>& covariances, std::uint64_t seed) {
  if (edges.size() != covariances.size()) throw Error(ErrorKind::usage, "one covariance per edge is required");
  PoseGraph g;
  g.vertices = gt;
  g.anchor = 0;
  g.edges.reserve(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    Rng rng(seed, Stream::noise, k);
    const auto [i, j] = edges[k];
    const Mat3& sigma = covariances[k];
    Edge e;
    e.i = i;
    e.j = j;
    e.z = corrupt_measurement(gt[static_cast<std::size_t>(i)], gt[static_cast<std::size_t>(j)], sigma, rng);
    const Mat3 omega = sigma.inverse();
    e.omega = 0.5 * (omega + omega.transpose());
    validate_spd(e.omega, "information matrix of edge " + std::to_string(k));
    g.edges.push_back(e);
  }
  return g;
}

struct TrialDataset {
  std::vector<Pudq> ground_truth;
  PoseGraph graph;
  SynthConfig config;
};

// ground truth, corrupted measurements, and odometry-chained initial vertices
inline TrialDataset synthesize_trial(const SynthConfig& c) {
  validate_synth(c);
  TrialDataset t;
  t.config = c;
  t.ground_truth = synth_grid_trajectory(c);
  const auto edges = synth_edges(t.ground_truth, c);
  std::vector<Mat3> cov;
  cov.reserve(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    Rng rng(c.rng_seed, Stream::covariance, k);
    cov.push_back(sample_wishart_covariance(c.sigma_w, rng, c.wishart_dof).sigma);
  }
  t.graph = corrupt_edges(t.ground_truth, edges, cov, c.rng_seed);
  t.graph.vertices = unstack(init_odometry(t.graph));
  return t;
}

}  // namespace pudq

