#pragma once

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "pudq/bounds.hpp"
#include "pudq/objective.hpp"
#include "pudq/random.hpp"

// Independent numerical oracles for the analytic derivatives, plus the check
// suite behind `pudq_pgo check`.

namespace pudq {

inline double rel_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& ref, double floor = 0.0) {
  return (a - ref).norm() / std::max(ref.norm(), floor);
}

inline Vec3 ambient_residual(const Edge& e, const ProductPoint& X) {
  return log_identity(mul(mul(inverse(e.z), inverse(block(X, e.i))), block(X, e.j)));
}

inline Eigen::VectorXd fd_gradient(const PoseGraph& g, const ProductPoint& X, double h = 1e-6) {
  Eigen::VectorXd out(X.size());
  ProductPoint Y = X;
  for (Eigen::Index c = 0; c < X.size(); ++c) {
    Y[c] = X[c] + h;
    const double fp = cost(g, Y);
    Y[c] = X[c] - h;
    const double fm = cost(g, Y);
    Y[c] = X[c];
    out[c] = (fp - fm) / (2.0 * h);
  }
  return out;
}

// columns 0..3 differentiate x_i, 4..7 differentiate x_j
inline Mat38 fd_jacobian(const Edge& e, const ProductPoint& X, double h = 1e-6) {
  Mat38 J;
  ProductPoint Y = X;
  for (int c = 0; c < 8; ++c) {
    const Eigen::Index idx = c < 4 ? 4 * e.i + c : 4 * e.j + (c - 4);
    Y[idx] = X[idx] + h;
    const Vec3 ep = ambient_residual(e, Y);
    Y[idx] = X[idx] - h;
    const Vec3 em = ambient_residual(e, Y);
    Y[idx] = X[idx];
    J.col(c) = (ep - em) / (2.0 * h);
  }
  return J;
}

using FactorFn = std::function<EdgeFactor(const Edge&, const ProductPoint&)>;

inline EdgeFactor default_factor(const Edge& e, const ProductPoint& X) { return edge_factor(e, X); }

// T[k](c, c') by central differences of the analytic Jacobian (general off-manifold form)
inline std::array<Mat8, 3> fd_tensor(const Edge& e, const ProductPoint& X, double h = 1e-6,
                                     const FactorFn& factor = default_factor) {
  std::array<Mat8, 3> T;
  ProductPoint Y = X;
  for (int cp = 0; cp < 8; ++cp) {
    const Eigen::Index idx = cp < 4 ? 4 * e.i + cp : 4 * e.j + (cp - 4);
    Y[idx] = X[idx] + h;
    const EdgeFactor fp = factor(e, Y);
    Y[idx] = X[idx] - h;
    const EdgeFactor fm = factor(e, Y);
    Y[idx] = X[idx];
    Mat38 D;
    D << (fp.A - fm.A) / (2.0 * h), (fp.B - fm.B) / (2.0 * h);
    for (int k = 0; k < 3; ++k)
      for (int c = 0; c < 8; ++c) T[static_cast<std::size_t>(k)](c, cp) = D(k, c);
  }
  return T;
}

// P_X (grad F(Exp_X(t v)) - grad F(Exp_X(-t v))) / 2t
inline ProductTangent fd_hessian_vec(const PoseGraph& g, const ProductPoint& X, const ProductTangent& v, double t = 1e-6,
                                     bool anchored = true) {
  const ProductTangent gp = riemannian_gradient(g, product_exp(X, t * v), anchored);
  const ProductTangent gm = riemannian_gradient(g, product_exp(X, -t * v), anchored);
  ProductTangent out = product_project(X, (gp - gm) / (2.0 * t));
  if (anchored) zero_block(out, g.anchor);
  return out;
}

inline ProductTangent random_tangent(const ProductPoint& X, Rng& rng, int anchor = -1) {
  Eigen::VectorXd u(X.size());
  for (Eigen::Index k = 0; k < u.size(); ++k) u[k] = rng.normal();
  ProductTangent t = product_project(X, u);
  if (anchor >= 0) zero_block(t, anchor);
  return t / t.norm();
}

inline std::string entry_name(char mat, int row, int col) {
  return std::string(1, mat) + std::to_string(row + 1) + std::to_string(col + 1);
}

struct CheckResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

struct CheckTolerances {
  double gradient = 1e-6;
  double jacobian = 1e-5;
  double tensor = 1e-5;
  double hessian_fd = 1e-4;
  double self_adjoint = 1e-9;
  double psd = -1e-10;
};

inline Eigen::VectorXd analytic_gradient(const PoseGraph& g, const ProductPoint& X, const FactorFn& factor) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(X.size());
  for (const Edge& e : g.edges) {
    const EdgeFactor f = factor(e, X);
    const Vec3 w = e.omega * f.e;
    grad.segment<4>(4 * e.i) += f.A.transpose() * w;
    grad.segment<4>(4 * e.j) += f.B.transpose() * w;
  }
  return grad;
}

// Finite-difference and operator checks at X. `factor` supplies the analytic
// Jacobians under test so that a mutated implementation can be checked too.
inline std::vector<CheckResult> run_derivative_checks(const PoseGraph& g, const ProductPoint& X, std::uint64_t seed,
                                                      const FactorFn& factor = default_factor,
                                                      const CheckTolerances& tol = {}) {
  std::vector<CheckResult> out;
  {
    const Eigen::VectorXd an = analytic_gradient(g, X, factor), fd = fd_gradient(g, X);
    const double err = rel_error(an, fd, 1e-12);
    out.push_back({"euclidean_gradient", err, tol.gradient, err <= tol.gradient, ""});
  }
  double worst_j = 0.0, worst_t = 0.0;
  std::string jd, td;
  bool jac_ok = true;
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const Edge& e = g.edges[k];
    const EdgeFactor f = factor(e, X);
    Mat38 an;
    an << f.A, f.B;
    const Mat38 fd = fd_jacobian(e, X);
    const double err = rel_error(an, fd, 1e-12);
    if (err > tol.jacobian) {
      jac_ok = false;
      Eigen::Index r, c;
      (an - fd).cwiseAbs().maxCoeff(&r, &c);
      const std::string entry = c < 4 ? entry_name('A', static_cast<int>(r), static_cast<int>(c))
                                      : entry_name('B', static_cast<int>(r), static_cast<int>(c - 4));
      jd += (jd.empty() ? "" : "; ") + std::string("edge (") + std::to_string(e.i) + "," + std::to_string(e.j) +
            ") entry " + entry;
    }
    worst_j = std::max(worst_j, err);
    const auto T = edge_tensor(edge_factor(e, X), e.z);
    const auto Tfd = fd_tensor(e, X, 1e-6, factor);
    for (int kk = 0; kk < 3; ++kk)
      for (int cp = 0; cp < 8; ++cp) {
        const double te = rel_error(T[static_cast<std::size_t>(kk)].col(cp), Tfd[static_cast<std::size_t>(kk)].col(cp), 1.0);
        if (te > worst_t) {
          worst_t = te;
          td = "edge (" + std::to_string(e.i) + "," + std::to_string(e.j) + ") d/d" + (cp < 4 ? "x_i," : "x_j,") +
               std::to_string(cp % 4) + " of row " + std::to_string(kk + 1);
        }
      }
  }
  out.push_back({"edge_jacobians", worst_j, tol.jacobian, jac_ok, jd});
  out.push_back({"hessian_tensors", worst_t, tol.tensor, worst_t <= tol.tensor, worst_t > tol.tensor ? td : ""});

  Rng rng(seed, Stream::test, 7);
  const Linearization ex = linearize(g, X, {true, HessianMode::exact});
  const Linearization gn = linearize(g, X, {true, HessianMode::rgn});
  double sa_exact = 0.0, sa_rgn = 0.0, min_rq = std::numeric_limits<double>::infinity(), worst_h = 0.0;
  for (int s = 0; s < 20; ++s) {
    const ProductTangent u = random_tangent(X, rng, g.anchor), w = random_tangent(X, rng, g.anchor);
    const ProductTangent Hu = riemannian_hessian_vec(g, ex, u), Hw = riemannian_hessian_vec(g, ex, w);
    sa_exact = std::max(sa_exact, std::abs(Hu.dot(w) - u.dot(Hw)) / std::max(1.0, Hu.norm() * w.norm()));
    const ProductTangent Gu = rgn_hessian_vec(g, gn, u), Gw = rgn_hessian_vec(g, gn, w);
    sa_rgn = std::max(sa_rgn, std::abs(Gu.dot(w) - u.dot(Gw)) / std::max(1.0, Gu.norm() * w.norm()));
    min_rq = std::min(min_rq, u.dot(Gu));
    if (s < 5) worst_h = std::max(worst_h, rel_error(Hu, fd_hessian_vec(g, X, u), 1e-8));
  }
  out.push_back({"riemannian_hessian_fd", worst_h, tol.hessian_fd, worst_h <= tol.hessian_fd, ""});
  out.push_back({"riemannian_hessian_self_adjoint", sa_exact, tol.self_adjoint, sa_exact <= tol.self_adjoint, ""});
  out.push_back({"rgn_self_adjoint", sa_rgn, tol.self_adjoint, sa_rgn <= tol.self_adjoint, ""});
  out.push_back({"rgn_min_rayleigh", min_rq, tol.psd, min_rq >= tol.psd, ""});
  return out;
}

// Samples points with ||X|| <= T_bar and unit tangents; compares operator norms with L_g and beta.
struct BoundSample {
  double max_hess = 0.0;
  double max_rgn = 0.0;
  double max_e = 0.0;
  double max_jac = 0.0;
  double max_g01 = 0.0;
};

inline ProductPoint random_point_in_ball(int n, double T_bar, int anchor, Rng& rng) {
  // rotation parts are unit, so the dual parts share the budget T_bar^2 - N
  const double budget = std::sqrt(std::max(0.0, T_bar * T_bar - n));
  ProductPoint X(4 * n);
  Eigen::VectorXd dual(2 * n);
  for (Eigen::Index k = 0; k < dual.size(); ++k) dual[k] = rng.normal();
  dual *= budget * std::pow(rng.uniform(), 1.0 / static_cast<double>(dual.size())) / dual.norm();
  for (int i = 0; i < n; ++i) {
    const double phi = kPi * (2.0 * rng.uniform() - 1.0);
    X.segment<4>(4 * i) << std::cos(phi), std::sin(phi), dual[2 * i], dual[2 * i + 1];
  }
  if (anchor >= 0) X.segment<4>(4 * anchor) = identity();
  return X;
}

inline BoundSample sample_bounds(const PoseGraph& g, double T_bar, int points, int tangents, std::uint64_t seed) {
  BoundSample s;
  Rng rng(seed, Stream::test, 11);
  for (int p = 0; p < points; ++p) {
    const ProductPoint X = random_point_in_ball(g.num_vertices(), T_bar, -1, rng);
    const Linearization ex = linearize(g, X, {false, HessianMode::exact});
    const Linearization gn = linearize(g, X, {false, HessianMode::rgn});
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
      const EdgeFactor& f = gn.factors[k];
      s.max_e = std::max(s.max_e, f.e.norm());
      s.max_jac = std::max({s.max_jac, f.A.norm(), f.B.norm()});
      const Vec3 w = g.edges[k].omega * f.e;
      const Eigen::Vector4d gi = f.A.transpose() * w, gj = f.B.transpose() * w;
      s.max_g01 = std::max({s.max_g01, std::abs(gi[0]), std::abs(gi[1]), std::abs(gj[0]), std::abs(gj[1])});
    }
    for (int t = 0; t < tangents; ++t) {
      const ProductTangent u = random_tangent(X, rng);
      s.max_hess = std::max(s.max_hess, riemannian_hessian_vec(g, ex, u).norm());
      s.max_rgn = std::max(s.max_rgn, rgn_hessian_vec(g, gn, u).norm());
    }
  }
  return s;
}

}  // namespace pudq
