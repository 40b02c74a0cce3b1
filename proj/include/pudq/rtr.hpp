#pragma once

#include <Eigen/Sparse>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pudq/geometry.hpp"
#include "pudq/objective.hpp"

namespace pudq {

enum class Preconditioner { none, gauss_newton };

inline const char* to_string(Preconditioner p) { return p == Preconditioner::none ? "none" : "gauss_newton"; }

struct SolverConfig {
  double eps_g = 1e-2;
  double delta0 = 100.0;
  double delta_max = 1e6;
  double rho_prime = 1e-2;
  double tcg_kappa = 0.05;
  double tcg_theta = 0.25;
  int max_outer_iters = 500;
  // 0 selects the tangent-space dimension 3N
  int max_inner_iters = 0;
  HessianMode hessian = HessianMode::rgn;
  Preconditioner preconditioner = Preconditioner::gauss_newton;
};

inline void validate_config(const SolverConfig& c) {
  if (!(c.eps_g > 0.0)) throw Error(ErrorKind::validation, "eps_g must be positive");
  if (!(c.delta0 > 0.0 && c.delta0 <= c.delta_max)) throw Error(ErrorKind::validation, "need 0 < delta0 <= delta_max");
  if (!(c.rho_prime > 0.0 && c.rho_prime < 0.25)) throw Error(ErrorKind::validation, "rho_prime must lie in (0, 1/4)");
  if (!(c.tcg_kappa > 0.0 && c.tcg_kappa < 1.0)) throw Error(ErrorKind::validation, "tcg_kappa must lie in (0, 1)");
  if (!(c.tcg_theta > 0.0)) throw Error(ErrorKind::validation, "tcg_theta must be positive");
  if (c.max_outer_iters < 0 || c.max_inner_iters < 0) throw Error(ErrorKind::validation, "iteration caps must be nonnegative");
}

enum class TcgTermination { gradient_tol, negative_curvature, boundary_hit, max_iters };

inline const char* to_string(TcgTermination t) {
  switch (t) {
    case TcgTermination::gradient_tol: return "gradient_tol";
    case TcgTermination::negative_curvature: return "negative_curvature";
    case TcgTermination::boundary_hit: return "boundary_hit";
    case TcgTermination::max_iters: return "max_iters";
  }
  return "unknown";
}

struct TcgOutcome {
  ProductTangent step;
  TcgTermination termination = TcgTermination::max_iters;
  double model_decrease = 0.0;
  // decrease achieved by the Cauchy point along -grad inside the same radius
  double cauchy_decrease = 0.0;
  int iterations = 0;
  bool used_cauchy = false;
  bool on_boundary() const {
    return termination == TcgTermination::boundary_hit || termination == TcgTermination::negative_curvature;
  }
};

using LinearOp = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// largest tau >= 0 with ||s + tau d|| = delta
inline double boundary_step(const Eigen::VectorXd& s, const Eigen::VectorXd& d, double delta) {
  const double a = d.squaredNorm(), b = 2.0 * s.dot(d), c = s.squaredNorm() - delta * delta;
  const double disc = std::sqrt(std::max(0.0, b * b - 4.0 * a * c));
  if (b > 0.0) return -2.0 * c / (b + disc);
  return (-b + disc) / (2.0 * a);
}

// Steihaug-Toint truncated CG for min g^T s + 1/2 s^T H s, ||s|| <= delta.
// `project` keeps iterates in the tangent space; pass identity for flat problems.
// With a preconditioner the radius is still the Euclidean one, and the Cauchy point
// replaces the CG step if it achieves more model decrease.
inline TcgOutcome tcg_solve(const LinearOp& H, const Eigen::VectorXd& grad, double delta, double kappa, double theta,
                            int max_iters, const LinearOp& project = nullptr, const LinearOp& precond = nullptr) {
  auto P = [&](const Eigen::VectorXd& v) { return project ? project(v) : v; };
  auto M = [&](const Eigen::VectorXd& v) { return precond ? P(precond(v)) : v; };
  auto check = [](const Eigen::VectorXd& v, int it) {
    if (!v.allFinite()) throw Error(ErrorKind::numerical, "non-finite Hessian-vector product in tCG iteration " + std::to_string(it));
  };
  TcgOutcome out;
  const double r0 = grad.norm();
  double cauchy_t = 0.0;
  auto cauchy = [&](const Eigen::VectorXd& Hg) {
    const double gHg = grad.dot(Hg);
    cauchy_t = delta / r0;
    if (gHg > 0.0) cauchy_t = std::min(cauchy_t, r0 * r0 / gHg);
    out.cauchy_decrease = cauchy_t * r0 * r0 - 0.5 * cauchy_t * cauchy_t * gHg;
  };
  if (precond && r0 > 0.0) {
    const Eigen::VectorXd Hg = P(H(grad));
    check(Hg, 0);
    cauchy(Hg);
  }

  Eigen::VectorXd s = Eigen::VectorXd::Zero(grad.size());
  Eigen::VectorXd r = grad;
  Eigen::VectorXd z = M(r);
  check(z, 0);
  Eigen::VectorXd d = -z;
  double rz = r.dot(z);
  const double target = r0 * std::min(kappa, std::pow(r0, theta));
  int it = 0;
  for (; it < max_iters; ++it) {
    const Eigen::VectorXd Hd = P(H(d));
    check(Hd, it);
    const double dHd = d.dot(Hd);
    if (it == 0 && !precond) cauchy(Hd);
    if (dHd <= 0.0) {
      s += boundary_step(s, d, delta) * d;
      out.termination = TcgTermination::negative_curvature;
      ++it;
      break;
    }
    const double alpha = rz / dHd;
    const Eigen::VectorXd s_next = s + alpha * d;
    if (s_next.norm() >= delta) {
      s += boundary_step(s, d, delta) * d;
      out.termination = TcgTermination::boundary_hit;
      ++it;
      break;
    }
    s = s_next;
    r = P(r + alpha * Hd);
    if (r.norm() <= target) {
      out.termination = TcgTermination::gradient_tol;
      ++it;
      break;
    }
    z = M(r);
    check(z, it);
    const double rz_next = r.dot(z);
    d = -z + (rz_next / rz) * d;
    rz = rz_next;
  }
  out.iterations = it;
  s = P(s);
  const double sn = s.norm();
  if (sn > delta) s *= delta / sn;
  const Eigen::VectorXd Hs = P(H(s));
  check(Hs, it);
  out.model_decrease = -(grad.dot(s) + 0.5 * s.dot(Hs));
  if (precond && out.model_decrease < out.cauchy_decrease) {
    s = -cauchy_t * grad;
    out.model_decrease = out.cauchy_decrease;
    out.used_cauchy = true;
    out.termination = cauchy_t * r0 >= delta * (1.0 - 1e-12) ? TcgTermination::boundary_hit : TcgTermination::gradient_tol;
  }
  out.step = std::move(s);
  return out;
}

// Inverse of the Gauss-Newton Hessian in orthonormal per-pose tangent coordinates,
// factored once per outer iteration.
class GaussNewtonPreconditioner {
 public:
  GaussNewtonPreconditioner(const PoseGraph& g, const Linearization& lin) : n_(g.num_vertices()), anchor_(lin.anchor) {
    basis_.resize(static_cast<std::size_t>(n_));
    col_.assign(static_cast<std::size_t>(n_), -1);
    int dim = 0;
    for (int i = 0; i < n_; ++i) {
      const Pudq x = block(lin.X, i);
      Mat43 E;
      for (int k = 0; k < 3; ++k) {
        Pudq ek = Pudq::Zero();
        ek[k + 1] = 1.0;
        E.col(k) = mul(x, ek);
      }
      basis_[static_cast<std::size_t>(i)] = Eigen::HouseholderQR<Mat43>(E).householderQ() * Mat43::Identity();
      if (i != anchor_) {
        col_[static_cast<std::size_t>(i)] = dim;
        dim += 3;
      }
    }
    std::vector<Eigen::Triplet<double>> trip;
    auto add = [&](int a, int b, const Mat3& m) {
      const int ca = col_[static_cast<std::size_t>(a)], cb = col_[static_cast<std::size_t>(b)];
      if (ca < 0 || cb < 0) return;
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) trip.emplace_back(ca + r, cb + c, m(r, c));
    };
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
      const Edge& e = g.edges[k];
      const EdgeFactor& f = lin.factors[k];
      const Mat3 JA = f.A * basis_[static_cast<std::size_t>(e.i)];
      const Mat3 JB = f.B * basis_[static_cast<std::size_t>(e.j)];
      add(e.i, e.i, JA.transpose() * e.omega * JA);
      add(e.j, e.j, JB.transpose() * e.omega * JB);
      const Mat3 C = JA.transpose() * e.omega * JB;
      add(e.i, e.j, C);
      add(e.j, e.i, C.transpose());
    }
    Eigen::SparseMatrix<double> Hb(dim, dim);
    Hb.setFromTriplets(trip.begin(), trip.end());
    ldlt_.compute(Hb);
    ok_ = ldlt_.info() == Eigen::Success && dim > 0 && ldlt_.vectorD().minCoeff() > 0.0;
    dim_ = dim;
  }

  bool ok() const { return ok_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    Eigen::VectorXd c(dim_);
    for (int i = 0; i < n_; ++i)
      if (col_[static_cast<std::size_t>(i)] >= 0)
        c.segment<3>(col_[static_cast<std::size_t>(i)]) = basis_[static_cast<std::size_t>(i)].transpose() * v.segment<4>(4 * i);
    const Eigen::VectorXd y = ldlt_.solve(c);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
    for (int i = 0; i < n_; ++i)
      if (col_[static_cast<std::size_t>(i)] >= 0)
        out.segment<4>(4 * i) = basis_[static_cast<std::size_t>(i)] * y.segment<3>(col_[static_cast<std::size_t>(i)]);
    return out;
  }

 private:
  using Mat43 = Eigen::Matrix<double, 4, 3>;
  int n_ = 0;
  int anchor_ = -1;
  int dim_ = 0;
  bool ok_ = false;
  std::vector<Mat43> basis_;
  std::vector<int> col_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

// m(S) = F + <grad, S> + 1/2 <S, H S>
inline double model_value(const PoseGraph& g, const Linearization& lin, const ProductTangent& S) {
  return lin.cost + lin.rgrad.dot(S) + 0.5 * S.dot(hessian_vec(g, lin, S));
}

enum class SolveStatus { converged, max_iterations };

inline const char* to_string(SolveStatus s) { return s == SolveStatus::converged ? "converged" : "max_iterations"; }

struct TraceRow {
  int k = 0;
  double cost = 0.0;       // F(X_k)
  double grad_norm = 0.0;  // ||grad F(X_k)||
  double delta = 0.0;      // radius used for the step
  double rho = std::numeric_limits<double>::quiet_NaN();
  bool accepted = false;
  double step_norm = 0.0;
  double model_decrease = 0.0;
  double cauchy_decrease = 0.0;
  double cost_trial = 0.0;
  int inner_iters = 0;
  TcgTermination termination = TcgTermination::max_iters;
};

struct SolverState {
  ProductPoint X;
  double delta = 0.0;
  int k = 0;
  double rho = std::numeric_limits<double>::quiet_NaN();
  double grad_norm = 0.0;
  double cost = 0.0;
  bool step_accepted = false;
  Linearization lin;
  std::vector<TraceRow> trace;
};

struct SolveResult {
  ProductPoint X;
  SolveStatus status = SolveStatus::max_iterations;
  int iterations = 0;
  double cost = 0.0;
  double grad_norm = 0.0;
  double seconds = 0.0;
  std::vector<TraceRow> trace;
};

using ProgressCallback = std::function<void(const TraceRow&)>;

inline SolverState make_state(const PoseGraph& g, const SolverConfig& cfg, const ProductPoint& X0) {
  SolverState st;
  st.X = X0;
  st.delta = cfg.delta0;
  st.lin = linearize(g, X0, {true, cfg.hessian});
  st.cost = st.lin.cost;
  st.grad_norm = st.lin.rgrad.norm();
  return st;
}

// One outer iteration: tCG, ratio test, radius update, accept/reject.
inline SolverState rtr_step(const PoseGraph& g, const SolverConfig& cfg, SolverState st) {
  const int n = static_cast<int>(num_poses(st.X));
  const int inner = cfg.max_inner_iters > 0 ? cfg.max_inner_iters : 3 * n;
  const Linearization& lin = st.lin;
  const LinearOp H = [&](const Eigen::VectorXd& v) { return hessian_vec(g, lin, v); };
  const LinearOp P = [&](const Eigen::VectorXd& v) {
    ProductTangent u = product_project(lin.X, v);
    zero_block(u, lin.anchor);
    return u;
  };
  LinearOp M = nullptr;
  std::optional<GaussNewtonPreconditioner> pre;
  if (cfg.preconditioner == Preconditioner::gauss_newton) {
    pre.emplace(g, lin);
    if (pre->ok()) M = [&](const Eigen::VectorXd& v) { return pre->apply(v); };
  }
  const TcgOutcome tcg = tcg_solve(H, lin.rgrad, st.delta, cfg.tcg_kappa, cfg.tcg_theta, inner, P, M);
  if (!(tcg.model_decrease > 0.0))
    throw Error(ErrorKind::internal, "tCG produced non-positive model decrease at outer iteration " + std::to_string(st.k));

  const ProductPoint X_trial = product_exp(st.X, tcg.step);
  const double F_trial = cost(g, X_trial);
  if (!std::isfinite(F_trial)) throw Error(ErrorKind::numerical, "non-finite cost at outer iteration " + std::to_string(st.k));

  const double num = st.cost - F_trial;
  const double den = tcg.model_decrease;
  const double guard = 1e-13 * (1.0 + std::abs(st.cost));
  const bool tiny = std::abs(num) < guard && std::abs(den) < guard;
  const double rho = tiny ? 1.0 : num / den;

  TraceRow row;
  row.k = st.k;
  row.cost = st.cost;
  row.grad_norm = st.grad_norm;
  row.delta = st.delta;
  row.rho = rho;
  row.step_norm = tcg.step.norm();
  row.model_decrease = tcg.model_decrease;
  row.cauchy_decrease = tcg.cauchy_decrease;
  row.cost_trial = F_trial;
  row.inner_iters = tcg.iterations;
  row.termination = tcg.termination;

  if (rho < 0.25)
    st.delta = 0.25 * st.delta;
  else if (rho > 0.75 && tcg.on_boundary())
    st.delta = std::min(2.0 * st.delta, cfg.delta_max);

  // the guarded branch never lets the cost go up
  const bool accept = rho > cfg.rho_prime && (!tiny || F_trial <= st.cost);
  row.accepted = accept;
  st.rho = rho;
  st.step_accepted = accept;
  if (accept) {
    st.X = X_trial;
    st.lin = linearize(g, st.X, {true, cfg.hessian});
    st.cost = st.lin.cost;
    st.grad_norm = st.lin.rgrad.norm();
  }
  st.trace.push_back(row);
  ++st.k;
  return st;
}

inline SolveResult solve(const PoseGraph& g, const SolverConfig& cfg, const ProductPoint& X0,
                         const ProgressCallback& progress = nullptr) {
  validate_config(cfg);
  validate_graph(g);
  if (X0.size() != 4 * g.num_vertices()) throw Error(ErrorKind::usage, "initial point has the wrong dimension");
  for (Eigen::Index i = 0; i < num_poses(X0); ++i)
    if (!is_unit(block(X0, i))) throw Error(ErrorKind::validation, "initial pose " + std::to_string(i) + " violates the unit constraint");
  if ((block(X0, g.anchor) - identity()).cwiseAbs().maxCoeff() > 1e-12)
    throw Error(ErrorKind::validation, "anchored vertex of the initial point is not the identity");

  const auto t0 = std::chrono::steady_clock::now();
  SolverState st = make_state(g, cfg, X0);
  if (!std::isfinite(st.cost)) throw Error(ErrorKind::numerical, "non-finite initial cost");
  SolveResult res;
  res.status = SolveStatus::max_iterations;
  while (true) {
    if (st.grad_norm <= cfg.eps_g) {
      res.status = SolveStatus::converged;
      break;
    }
    if (st.k >= cfg.max_outer_iters) break;
    st = rtr_step(g, cfg, std::move(st));
    if (progress) progress(st.trace.back());
  }
  res.X = st.X;
  res.iterations = st.k;
  res.cost = st.cost;
  res.grad_norm = st.grad_norm;
  res.trace = std::move(st.trace);
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

struct IterationBound {
  bool applicable = false;
  double lambda_g = 0.0;
  double value = std::numeric_limits<double>::infinity();
  std::string reason;
};

inline double lambda_g(double L_g, double beta) { return 0.25 * std::min(1.0 / beta, 1.0 / (2.0 * (L_g + beta))); }

// K <= (F0 - F*) / (rho' lambda_g) * 3 / eps_g^2 + 1/2 log2(delta0 / (lambda_g eps_g))
inline IterationBound iteration_bound(double F0, double Fstar_lower, const SolverConfig& cfg, double L_g, double beta) {
  IterationBound b;
  b.lambda_g = lambda_g(L_g, beta);
  if (Fstar_lower < 0.0 || F0 < Fstar_lower) {
    b.reason = "need 0 <= Fstar_lower <= F0";
    return b;
  }
  if (!(cfg.eps_g <= cfg.delta0 / b.lambda_g)) {
    b.reason = "eps_g exceeds delta0 / lambda_g";
    return b;
  }
  b.applicable = true;
  b.value = (F0 - Fstar_lower) / (cfg.rho_prime * b.lambda_g) * 3.0 / (cfg.eps_g * cfg.eps_g) +
            0.5 * std::log2(cfg.delta0 / (b.lambda_g * cfg.eps_g));
  return b;
}

}  // namespace pudq
