#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace pudq;
using pudq::testing::random_pose;
using pudq::testing::random_tangent_at;

namespace {

using V4 = Eigen::Vector4d;

double max_abs(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Projector, IdentityCases) {
  EXPECT_LE(max_abs(project_tangent(identity(), V4(1, 0, 0, 0))), 0.0);
  EXPECT_LE(max_abs(project_tangent(identity(), V4(0, 0, 1, 0)) - V4(0, 0, 1, 0)), 0.0);
  EXPECT_LE(max_abs(project_tangent(identity(), V4(0, 1, 0, 0)) - V4(0, 1, 0, 0)), 0.0);
}

TEST(Projector, IdempotentAndComplementary) {
  Rng rng(20, Stream::test);
  for (int k = 0; k < 500; ++k) {
    const Pudq x = random_pose(rng);
    const V4 u(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    const V4 p = project_tangent(x, u);
    EXPECT_LE(max_abs(project_tangent(x, p) - p), 1e-14);
    EXPECT_LE(max_abs(p + normal_project(x, u) - u), 1e-14);
    EXPECT_TRUE(is_tangent(x, p));
    EXPECT_LE(max_abs(tangent_projector(x) * u - p), 1e-14);
    EXPECT_LE((tangent_projector(x) + normal_projector(x) - Mat4::Identity()).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(LogIdentity, KnownValues) {
  EXPECT_LE(max_abs(log_identity(identity())), 0.0);
  const Vec3 r = log_identity(Pudq(std::cos(kPi / 4), std::sin(kPi / 4), 0, 0));
  EXPECT_LE(max_abs(r - Vec3(kPi / 4, 0, 0)), 1e-15);
  EXPECT_LE(max_abs(log_identity(Pudq(1, 0, 1, 0)) - Vec3(0, 1, 0)), 0.0);
}

TEST(LogIdentity, NegatedPoseHasSameLog) {
  Rng rng(21, Stream::test);
  for (int k = 0; k < 200; ++k) {
    const Pudq x = random_pose(rng);
    EXPECT_LE(max_abs(log_identity(x) - log_identity(-x)), 1e-12);
  }
}

TEST(LogIdentity, ExpRecoversPoseForNegativeScalarPart) {
  Rng rng(34, Stream::test);
  for (int k = 0; k < 500; ++k) {
    const Pudq x = compose(random_pose(rng), random_pose(rng));
    EXPECT_TRUE(same_pose(exp_identity(log_identity(x)), x, 1e-12));
    EXPECT_LE(std::abs(log_identity(x)[0]), kHalfPi + 1e-15);
  }
}

TEST(ExpIdentity, ZeroAndRoundTrip) {
  EXPECT_LE(max_abs(exp_identity(Vec3::Zero()) - identity()), 0.0);
  Rng rng(22, Stream::test);
  for (int k = 0; k < 1000; ++k) {
    const Vec3 v((kHalfPi - 1e-6) * (2 * rng.uniform() - 1), 3 * rng.normal(), 3 * rng.normal());
    const Pudq x = exp_identity(v);
    EXPECT_LE(std::abs(unit_residual(x)), 1e-13);
    EXPECT_LE(max_abs(log_identity(x) - v), 1e-11 * (1 + v.norm()));
  }
}

TEST(ExpIdentity, TinyAngleUsesSeries) {
  const Pudq x = exp_identity(Vec3(1e-9, 2, 0));
  EXPECT_NEAR(x[2], 2.0, 1e-15);
  EXPECT_NEAR(x[1], 1e-9, 1e-24);
}

TEST(LogAt, SelfIsZeroAndReducesAtIdentity) {
  Rng rng(23, Stream::test);
  for (int k = 0; k < 200; ++k) {
    const Pudq x = random_pose(rng), y = random_pose(rng);
    EXPECT_LE(max_abs(log_at(x, x)), 1e-13);
    const Vec3 v = log_identity(y);
    EXPECT_LE(max_abs(log_at(identity(), y) - V4(0, v[0], v[1], v[2])), 1e-14);
    EXPECT_TRUE(is_tangent(x, log_at(x, y), 1e-10));
  }
}

TEST(LogAt, ExpInvertsLog) {
  Rng rng(24, Stream::test);
  for (int k = 0; k < 1000; ++k) {
    const Pudq x = random_pose(rng), y = random_pose(rng);
    EXPECT_TRUE(same_pose(exp_at(x, log_at(x, y)), y, 1e-10));
  }
}

TEST(ExpAt, DiscardedComponentVanishesForTangents) {
  Rng rng(25, Stream::test);
  for (int k = 0; k < 200; ++k) {
    const Pudq x = random_pose(rng);
    ExpDiagnostics d;
    exp_at(x, random_tangent_at(x, rng), &d);
    EXPECT_LE(std::abs(d.discarded), 1e-12);
  }
}

TEST(ExpAt, IsFirstOrderRetraction) {
  Rng rng(26, Stream::test);
  for (int k = 0; k < 100; ++k) {
    const Pudq x = random_pose(rng);
    const V4 v = random_tangent_at(x, rng);
    const double h = 1e-6;
    const V4 d = (exp_at(x, h * v) - exp_at(x, -h * v)) / (2 * h);
    EXPECT_LE(max_abs(d - v), 1e-7 * (1 + v.norm()));
  }
}

TEST(ProductExp, ZeroSingleAndBlockwise) {
  Rng rng(27, Stream::test);
  std::vector<Pudq> xs;
  for (int i = 0; i < 5; ++i) xs.push_back(random_pose(rng));
  const ProductPoint X = stack(xs);
  EXPECT_LE(max_abs(product_exp(X, ProductTangent::Zero(X.size())) - X), 1e-14);

  ProductTangent S(X.size());
  for (int i = 0; i < 5; ++i) S.segment<4>(4 * i) = random_tangent_at(xs[static_cast<std::size_t>(i)], rng);
  const ProductPoint Y = product_exp(X, S);
  for (int i = 0; i < 5; ++i) {
    EXPECT_LE(max_abs(block(Y, i) - exp_at(xs[static_cast<std::size_t>(i)], S.segment<4>(4 * i))), 0.0);
  }
  const ProductPoint one = product_exp(xs[0], S.head<4>());
  EXPECT_LE(max_abs(one - block(Y, 0)), 0.0);
  EXPECT_THROW(product_exp(X, S.head(8)), Error);
  EXPECT_LE(max_abs(product_exp(X, product_log(X, Y)) - Y), 1e-10);
}

TEST(Transport, FixedPointsAndIdentityBase) {
  Rng rng(28, Stream::test);
  for (int k = 0; k < 200; ++k) {
    const Pudq x = random_pose(rng), y = random_pose(rng);
    const V4 u = random_tangent_at(x, rng);
    EXPECT_LE(max_abs(parallel_transport(x, x, u) - u), 1e-12);
    const V4 w = random_tangent_at(identity(), rng);
    EXPECT_LE(max_abs(parallel_transport(identity(), y, w) - mul(y, w)), 1e-14);
    EXPECT_TRUE(is_tangent(y, parallel_transport(x, y, u), 1e-10));
  }
}

TEST(Transport, PreservesGroupInnerProduct) {
  Rng rng(29, Stream::test);
  for (int k = 0; k < 500; ++k) {
    const Pudq x = random_pose(rng), y = random_pose(rng);
    const V4 u = random_tangent_at(x, rng), w = random_tangent_at(x, rng);
    const double a = group_inner(x, u, w);
    const double b = group_inner(y, parallel_transport(x, y, u), parallel_transport(x, y, w));
    EXPECT_NEAR(a, b, 1e-10 * (1 + std::abs(a)));
  }
}

TEST(Transport, EuclideanIsometryForPureRotation) {
  Rng rng(30, Stream::test);
  for (int k = 0; k < 500; ++k) {
    const Pudq x = random_pose(rng);
    const Pudq y = compose(exp_identity(Vec3(rng.uniform() - 0.5, 0, 0)), x);
    const V4 u = random_tangent_at(x, rng);
    EXPECT_NEAR(parallel_transport(x, y, u).norm(), u.norm(), 1e-10 * (1 + u.norm()));
  }
}

// with a translation between the base points the ambient norm is not preserved
TEST(Transport, EuclideanNormChangesUnderTranslation) {
  const Pudq x = identity();
  const Pudq y = from_euclidean({4, 0, 0});
  const V4 u(0, 1, 0, 0);
  EXPECT_GT(std::abs(parallel_transport(x, y, u).norm() - u.norm()), 0.1);
}

TEST(GeodesicDistance, Basics) {
  Rng rng(31, Stream::test);
  std::vector<Pudq> a, b;
  for (int i = 0; i < 4; ++i) {
    a.push_back(random_pose(rng));
    b.push_back(random_pose(rng));
  }
  const ProductPoint X = stack(a), Y = stack(b);
  EXPECT_NEAR(geodesic_distance(X, X), 0.0, 1e-14);
  EXPECT_NEAR(geodesic_distance(X, Y), geodesic_distance(Y, X), 1e-10);
  EXPECT_NEAR(geodesic_distance(identity(), from_euclidean({0, 0, kHalfPi})), kPi / 4, 1e-15);
  EXPECT_THROW(geodesic_distance(X, Y.head(8)), Error);
}

TEST(Weingarten, ZeroAndLinear) {
  Rng rng(32, Stream::test);
  for (int k = 0; k < 100; ++k) {
    const Pudq x = random_pose(rng);
    const V4 u = random_tangent_at(x, rng), u2 = random_tangent_at(x, rng);
    const V4 w = normal_project(x, V4(rng.normal(), rng.normal(), rng.normal(), rng.normal()));
    EXPECT_LE(max_abs(weingarten(x, u, V4::Zero())), 0.0);
    EXPECT_LE(max_abs(weingarten(x, u + 2 * u2, w) - weingarten(x, u, w) - 2 * weingarten(x, u2, w)), 1e-12);
    EXPECT_TRUE(is_tangent(x, weingarten(x, u, w), 1e-10));
  }
}

// oracle: P_x (d/dt P_{c(t)}) w along c(t) = Exp_x(t u)
TEST(Weingarten, MatchesProjectorDerivative) {
  Rng rng(33, Stream::test);
  for (int k = 0; k < 200; ++k) {
    const Pudq x = random_pose(rng);
    const V4 u = random_tangent_at(x, rng);
    const V4 w = normal_project(x, V4(rng.normal(), rng.normal(), rng.normal(), rng.normal()));
    const double h = 1e-6;
    const Mat4 dP = (tangent_projector(exp_at(x, h * u)) - tangent_projector(exp_at(x, -h * u))) / (2 * h);
    const V4 oracle = tangent_projector(x) * dP * w;
    EXPECT_LE(max_abs(weingarten(x, u, w) - oracle), 1e-7 * (1 + u.norm() * w.norm()));
  }
}
