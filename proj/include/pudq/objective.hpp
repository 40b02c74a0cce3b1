#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "pudq/core.hpp"
#include "pudq/geometry.hpp"
#include "pudq/graph.hpp"

namespace pudq {

using Mat34 = Eigen::Matrix<double, 3, 4>;
using Mat38 = Eigen::Matrix<double, 3, 8>;
using Mat8 = Eigen::Matrix<double, 8, 8>;

// f1(phi) = d(1/sinc)/dphi = (sin phi - phi cos phi) / sin^2 phi
inline double f1(double phi) {
  if (std::abs(phi) < 1e-2) {
    const double p2 = phi * phi;
    return phi * (1.0 / 3.0 + p2 * (7.0 / 90.0 + p2 * (31.0 / 2520.0 + p2 * 127.0 / 75600.0)));
  }
  const double s = std::sin(phi);
  return (s - phi * std::cos(phi)) / (s * s);
}

// f2(phi) = df1/dphi = csc phi (phi - 2 cot phi + 2 phi cot^2 phi)
inline double f2(double phi) {
  if (std::abs(phi) < 1e-2) {
    const double p2 = phi * phi;
    return 1.0 / 3.0 + p2 * (7.0 / 30.0 + p2 * (31.0 / 504.0 + p2 * 127.0 / 10800.0));
  }
  const double s = std::sin(phi), cot = std::cos(phi) / s;
  return (phi - 2.0 * cot + 2.0 * phi * cot * cot) / s;
}

struct EdgeFactor {
  Pudq r = identity();
  Vec3 e = Vec3::Zero();
  Mat34 A = Mat34::Zero();
  Mat34 B = Mat34::Zero();
  // r = Qi x_i = Qj x_j
  Mat4 Qi = Mat4::Identity();
  Mat4 Qj = Mat4::Identity();
  double phi = 0.0, gamma = 1.0, f1 = 0.0, f2 = 1.0 / 3.0;
  // -1 when r0 < 0: e, A, B and the tensor are taken for -r, which is the same pose
  double sign = 1.0;
  double mu_i = 0, omega_i = 0, eta_i = 0, kappa_i = 0, xi_1 = 0, zeta_1 = 0, alpha_1 = 0, beta_1 = 0, alpha_2 = 0, beta_2 = 0;
  double mu_j = 0, omega_j = 0, eta_j = 0, kappa_j = 0, alpha_3 = 0, beta_3 = 0;
};

// Qi = Q_R(x_j) Q_L--(z),  Qj = Q_LL-(z) Q_LL-(x_i)
inline EdgeFactor edge_factor(const Pudq& z, const Pudq& xi, const Pudq& xj) {
  EdgeFactor f;
  f.Qi = q_right(xj) * composition_matrix(z, CompositionKind::L_inv_inv);
  f.Qj = composition_matrix(z, CompositionKind::LL_inv) * composition_matrix(xi, CompositionKind::LL_inv);
  f.r = f.Qj * xj;
  const Pudq& r = f.r;
  f.mu_i = f.Qi(0, 0), f.omega_i = f.Qi(0, 1), f.eta_i = f.Qi(1, 0), f.kappa_i = f.Qi(1, 1);
  f.alpha_1 = f.Qi(2, 0), f.beta_1 = f.Qi(2, 1), f.xi_1 = f.Qi(2, 2), f.zeta_1 = f.Qi(2, 3);
  f.alpha_2 = f.Qi(3, 0), f.beta_2 = f.Qi(3, 1);
  f.mu_j = f.Qj(0, 0), f.omega_j = f.Qj(0, 1), f.eta_j = f.Qj(1, 0), f.kappa_j = f.Qj(1, 1);
  f.alpha_3 = f.Qj(2, 0), f.beta_3 = f.Qj(2, 1);

  f.phi = wrap_half(std::atan2(r[1], r[0]));
  f.gamma = sinc(f.phi);
  f.f1 = pudq::f1(f.phi);
  f.f2 = pudq::f2(f.phi);
  f.e = Vec3(r[1], r[2], r[3]) / f.gamma;

  // d e_k / d y_c = d_{k+1,c} / gamma + r_{k+1} N_c f1 / (r0^2 + r1^2),  N_c = d_{1c} r0 - d_{0c} r1
  const double s = r[0] * r[0] + r[1] * r[1];
  for (int c = 0; c < 4; ++c) {
    const double ni = (f.Qi(1, c) * r[0] - f.Qi(0, c) * r[1]) * f.f1 / s;
    const double nj = (f.Qj(1, c) * r[0] - f.Qj(0, c) * r[1]) * f.f1 / s;
    for (int k = 0; k < 3; ++k) {
      f.A(k, c) = f.Qi(k + 1, c) / f.gamma + r[k + 1] * ni;
      f.B(k, c) = f.Qj(k + 1, c) / f.gamma + r[k + 1] * nj;
    }
  }
  if (r[0] < 0.0) {
    f.sign = -1.0;
    f.e = -f.e;
    f.A = -f.A;
    f.B = -f.B;
  }
  return f;
}

inline EdgeFactor edge_factor(const Edge& e, const ProductPoint& X) {
  return edge_factor(e.z, block(X, e.i), block(X, e.j));
}

struct Residual {
  Pudq r;
  Vec3 e;
};

inline Residual residual(const PoseGraph& g, const ProductPoint& X, int i, int j) {
  const Edge& e = g.edges[static_cast<std::size_t>(find_edge(g, i, j))];
  const Pudq r = compose(compose(inverse(e.z), inverse(block(X, i))), block(X, j));
  return {r, log_identity(r)};
}

inline std::pair<Mat34, Mat34> edge_jacobians(const PoseGraph& g, const ProductPoint& X, int i, int j) {
  const EdgeFactor f = edge_factor(g.edges[static_cast<std::size_t>(find_edge(g, i, j))], X);
  return {f.A, f.B};
}

inline double edge_cost(const Edge& e, const ProductPoint& X) {
  const Vec3 r = log_identity(mul(mul(inverse(e.z), inverse(block(X, e.i))), block(X, e.j)));
  return 0.5 * r.dot(e.omega * r);
}

inline double cost(const PoseGraph& g, const ProductPoint& X) {
  double c = 0.0;
  for (const Edge& e : g.edges) c += edge_cost(e, X);
  return c;
}

inline double cost(const PoseGraph& g) { return cost(g, stack(g.vertices)); }

struct HessianTensorBundle {
  // dA_dxi[l](k, m) = d A(k, m) / d x_{i,l}
  std::array<Mat34, 4> dA_dxi, dA_dxj, dB_dxi, dB_dxj;
  Mat4 C_ii, C_ij, C_ji, C_jj;
  Mat4 h_ii, h_ij, h_ji, h_jj;
};

// second derivatives of e_k with respect to y = (x_i, x_j), evaluated on the manifold
// T[k](c, c') = d^2 e_k / dy_c dy_c'
inline std::array<Mat8, 3> edge_tensor(const EdgeFactor& f, const Pudq& z) {
  const Pudq& r = f.r;
  Eigen::Matrix<double, 4, 8> d;
  d << f.Qi, f.Qj;
  // r is bilinear in (x_i, x_j): only cross-block second derivatives survive
  std::array<Mat8, 4> M;
  for (auto& m : M) m.setZero();
  const Pudq zi = inverse(z);
  const Mat4 inv = inversion_matrix();
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n) {
      const Eigen::Vector4d rr = mul(mul(zi, inv.col(m)), Eigen::Vector4d::Unit(n));
      for (int k = 0; k < 4; ++k) {
        M[static_cast<std::size_t>(k)](m, 4 + n) = rr[k];
        M[static_cast<std::size_t>(k)](4 + n, m) = rr[k];
      }
    }
  Eigen::Matrix<double, 1, 8> N;
  for (int c = 0; c < 8; ++c) N[c] = d(1, c) * r[0] - d(0, c) * r[1];
  std::array<Mat8, 3> T;
  for (int k = 0; k < 3; ++k) {
    Mat8& t = T[static_cast<std::size_t>(k)];
    const double rk = r[k + 1];
    for (int c = 0; c < 8; ++c)
      for (int cp = 0; cp < 8; ++cp) {
        const double dN = M[1](c, cp) * r[0] + d(1, c) * d(0, cp) - M[0](c, cp) * r[1] - d(0, c) * d(1, cp);
        const double ds = r[0] * d(0, cp) + r[1] * d(1, cp);
        t(c, cp) = M[static_cast<std::size_t>(k + 1)](c, cp) / f.gamma + d(k + 1, c) * f.f1 * N[cp] +
                   (d(k + 1, cp) - 2.0 * rk * ds) * N[c] * f.f1 + rk * dN * f.f1 + rk * N[c] * N[cp] * f.f2;
      }
    t *= f.sign;
  }
  return T;
}

inline HessianTensorBundle hessian_tensors(const EdgeFactor& f, const Edge& e) {
  const auto T = edge_tensor(f, e.z);
  HessianTensorBundle b;
  for (int l = 0; l < 4; ++l)
    for (int k = 0; k < 3; ++k)
      for (int m = 0; m < 4; ++m) {
        const Mat8& t = T[static_cast<std::size_t>(k)];
        b.dA_dxi[static_cast<std::size_t>(l)](k, m) = t(m, l);
        b.dA_dxj[static_cast<std::size_t>(l)](k, m) = t(m, 4 + l);
        b.dB_dxi[static_cast<std::size_t>(l)](k, m) = t(4 + m, l);
        b.dB_dxj[static_cast<std::size_t>(l)](k, m) = t(4 + m, 4 + l);
      }
  const Vec3 w = e.omega * f.e;
  Mat8 C = Mat8::Zero();
  for (int k = 0; k < 3; ++k) C += w[k] * T[static_cast<std::size_t>(k)];
  Mat38 J;
  J << f.A, f.B;
  const Mat8 H = C + J.transpose() * e.omega * J;
  b.C_ii = C.topLeftCorner<4, 4>(), b.C_ij = C.topRightCorner<4, 4>();
  b.C_ji = C.bottomLeftCorner<4, 4>(), b.C_jj = C.bottomRightCorner<4, 4>();
  b.h_ii = H.topLeftCorner<4, 4>(), b.h_ij = H.topRightCorner<4, 4>();
  b.h_ji = H.bottomLeftCorner<4, 4>(), b.h_jj = H.bottomRightCorner<4, 4>();
  return b;
}

inline HessianTensorBundle hessian_tensors(const PoseGraph& g, const ProductPoint& X, int i, int j) {
  const Edge& e = g.edges[static_cast<std::size_t>(find_edge(g, i, j))];
  return hessian_tensors(edge_factor(e, X), e);
}

// raw Euclidean gradient of the cost in the ambient 4N space, no anchoring
inline Eigen::VectorXd euclidean_gradient(const PoseGraph& g, const ProductPoint& X) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(X.size());
  for (const Edge& e : g.edges) {
    const EdgeFactor f = edge_factor(e, X);
    const Vec3 w = e.omega * f.e;
    grad.segment<4>(4 * e.i) += f.A.transpose() * w;
    grad.segment<4>(4 * e.j) += f.B.transpose() * w;
  }
  return grad;
}

inline Eigen::VectorXd euclidean_gradient(const PoseGraph& g) { return euclidean_gradient(g, stack(g.vertices)); }

inline void zero_block(Eigen::VectorXd& v, int anchor) {
  if (anchor >= 0) v.segment<4>(4 * anchor).setZero();
}

enum class HessianMode { rgn, exact };

struct EvalOptions {
  bool anchored = true;
  HessianMode mode = HessianMode::rgn;
};

// Everything a Hessian-vector product needs at a fixed iterate.
struct Linearization {
  ProductPoint X;
  std::vector<EdgeFactor> factors;
  std::vector<Mat8> edge_hessians;  // exact mode only
  Eigen::VectorXd egrad;
  ProductTangent rgrad;
  double cost = 0.0;
  int anchor = -1;
  HessianMode mode = HessianMode::rgn;
};

inline Linearization linearize(const PoseGraph& g, const ProductPoint& X, const EvalOptions& opt = {}) {
  Linearization lin;
  lin.X = X;
  lin.anchor = opt.anchored ? g.anchor : -1;
  lin.mode = opt.mode;
  lin.factors.reserve(g.edges.size());
  lin.egrad = Eigen::VectorXd::Zero(X.size());
  for (const Edge& e : g.edges) {
    EdgeFactor f = edge_factor(e, X);
    const Vec3 w = e.omega * f.e;
    lin.egrad.segment<4>(4 * e.i) += f.A.transpose() * w;
    lin.egrad.segment<4>(4 * e.j) += f.B.transpose() * w;
    if (opt.mode == HessianMode::exact) {
      const auto T = edge_tensor(f, e.z);
      Mat38 J;
      J << f.A, f.B;
      Mat8 H = J.transpose() * e.omega * J;
      for (int k = 0; k < 3; ++k) H += w[k] * T[static_cast<std::size_t>(k)];
      lin.edge_hessians.push_back(H);
    }
    lin.factors.push_back(f);
  }
  lin.rgrad = product_project(X, lin.egrad);
  zero_block(lin.rgrad, lin.anchor);
  // same evaluation as cost() so that ratio tests and traces compare identical numbers
  lin.cost = cost(g, X);
  return lin;
}

inline ProductTangent riemannian_gradient(const PoseGraph& g, const ProductPoint& X, bool anchored = true) {
  ProductTangent rg = product_project(X, euclidean_gradient(g, X));
  if (anchored) zero_block(rg, g.anchor);
  return rg;
}

inline ProductTangent riemannian_gradient(const PoseGraph& g) { return riemannian_gradient(g, stack(g.vertices)); }

namespace detail {

inline ProductTangent prepare_input(const Linearization& lin, const ProductTangent& v) {
  ProductTangent u = product_project(lin.X, v);
  zero_block(u, lin.anchor);
  return u;
}

inline void finish_output(const Linearization& lin, ProductTangent& out) {
  out = product_project(lin.X, out);
  zero_block(out, lin.anchor);
}

}  // namespace detail

// sum over edges of P R_ij P v with R_ij = [A B]^T Omega [A B]
inline ProductTangent rgn_hessian_vec(const PoseGraph& g, const Linearization& lin, const ProductTangent& v) {
  const ProductTangent u = detail::prepare_input(lin, v);
  ProductTangent out = ProductTangent::Zero(v.size());
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const Edge& e = g.edges[k];
    const EdgeFactor& f = lin.factors[k];
    const Vec3 w = e.omega * (f.A * u.segment<4>(4 * e.i) + f.B * u.segment<4>(4 * e.j));
    out.segment<4>(4 * e.i) += f.A.transpose() * w;
    out.segment<4>(4 * e.j) += f.B.transpose() * w;
  }
  detail::finish_output(lin, out);
  return out;
}

// P d2F P v + Weingarten(P v, P^perp dF)
inline ProductTangent riemannian_hessian_vec(const PoseGraph& g, const Linearization& lin, const ProductTangent& v) {
  if (lin.edge_hessians.size() != g.edges.size())
    throw Error(ErrorKind::usage, "riemannian_hessian_vec needs a linearization built in exact mode");
  const ProductTangent u = detail::prepare_input(lin, v);
  ProductTangent out = ProductTangent::Zero(v.size());
  Eigen::Matrix<double, 8, 1> ue;
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const Edge& e = g.edges[k];
    ue << u.segment<4>(4 * e.i), u.segment<4>(4 * e.j);
    const Eigen::Matrix<double, 8, 1> he = lin.edge_hessians[k] * ue;
    out.segment<4>(4 * e.i) += he.head<4>();
    out.segment<4>(4 * e.j) += he.tail<4>();
  }
  out = product_project(lin.X, out);
  for (Eigen::Index i = 0; i < num_poses(lin.X); ++i) {
    const Pudq x = block(lin.X, i);
    const Eigen::Vector4d gn = normal_project(x, lin.egrad.segment<4>(4 * i));
    out.segment<4>(4 * i) += weingarten(x, u.segment<4>(4 * i), gn);
  }
  detail::finish_output(lin, out);
  return out;
}

inline ProductTangent hessian_vec(const PoseGraph& g, const Linearization& lin, const ProductTangent& v) {
  return lin.mode == HessianMode::exact ? riemannian_hessian_vec(g, lin, v) : rgn_hessian_vec(g, lin, v);
}

inline ProductTangent rgn_hessian_vec(const PoseGraph& g, const ProductPoint& X, const ProductTangent& v, bool anchored = true) {
  return rgn_hessian_vec(g, linearize(g, X, {anchored, HessianMode::rgn}), v);
}

inline ProductTangent riemannian_hessian_vec(const PoseGraph& g, const ProductPoint& X, const ProductTangent& v,
                                             bool anchored = true) {
  return riemannian_hessian_vec(g, linearize(g, X, {anchored, HessianMode::exact}), v);
}

}  // namespace pudq
