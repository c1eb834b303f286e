#include <random>

#include <gtest/gtest.h>

#include "hbpolyak/hbpolyak.hpp"
#include "test_support.hpp"

using namespace hbpolyak;
using testing_support::diag13;
using testing_support::geometric;

namespace {

RunOptions<double> kept() {
  RunOptions<double> o;
  o.keep_iterates = true;
  return o;
}

}  // namespace

TEST(KrylovProject, IdentityReachesTheMinimizerAtOnce) {
  const QuadraticProblem<double> id(Matrix<double>::Identity(3, 3), Vector<double>::Zero(3), 0.0);
  const Vector<double> x0 = Eigen::Vector3d(1.0, -2.0, 0.5);
  EXPECT_LT(krylov_project(id, x0, 0, QPolynomial<double>()).norm(), 1e-15);
}

TEST(KrylovProject, TwoDimensionalRunningExample) {
  const auto p = diag13();
  const Vector<double> x0 = Eigen::Vector2d(1.0, 1.0);
  const auto x1 = krylov_project(p, x0, 0, QPolynomial<double>());
  EXPECT_NEAR(x1(0), 0.6, 1e-15);
  EXPECT_NEAR(x1(1), -0.2, 1e-15);
  EXPECT_LT(krylov_project(p, x0, 1, QPolynomial<double>()).norm(), 1e-14);
  EXPECT_LT(krylov_project(p, x0, 5, QPolynomial<double>()).norm(), 1e-14);
}

TEST(KrylovProject, MatchesDenseLeastSquares) {
  const auto p = geometric(14, 20.0, 2);
  const Vector<double> x0 = random_start(p, 2);
  for (const auto& coeffs : {std::vector<double>{1.0}, std::vector<double>{0.0, 1.0},
                             std::vector<double>{0.0, 0.0, 1.0}, std::vector<double>{0.5, 0.0, 1.0}}) {
    for (Index t = 0; t < 6; ++t)
      EXPECT_LT((krylov_project(p, x0, t, QPolynomial<double>(coeffs)) -
                 testing_support::projection_oracle(p, x0, t, coeffs))
                    .norm(),
                1e-9)
          << "t = " << t;
  }
}

TEST(KrylovProject, ExhaustedSpaceGivesTheMinimizer) {
  const auto p = make_problem<double>(SpectrumSpec::explicit_list({1, 1, 2, 2, 2, 5, 5, 9}, 3));
  const Vector<double> x0 = random_start(p, 3);
  const auto basis = krylov_basis(p, Vector<double>(x0 - p.x_star()), 8, QPolynomial<double>());
  EXPECT_EQ(basis.effective_rank, 4);
  EXPECT_EQ(basis.requested_order, 8);
  EXPECT_LT((krylov_project(p, x0, 3, QPolynomial<double>()) - p.x_star()).norm(), 1e-12);
  EXPECT_LT((krylov_project(p, x0, 20, QPolynomial<double>()) - p.x_star()).norm(), 1e-12);
}

TEST(KrylovProject, RejectsInvalidInput) {
  const auto p = diag13();
  const Vector<double> x0 = Eigen::Vector2d(1.0, 1.0);
  EXPECT_THROW(krylov_project(p, x0, 0, QPolynomial<double>({2.0, -1.0})), InvalidQError);
  EXPECT_THROW(krylov_project(p, x0, -1, QPolynomial<double>()), ValidationError);
  EXPECT_THROW(krylov_project(p, Vector<double>(Eigen::Vector3d::Ones()), 0, QPolynomial<double>()),
               ValidationError);
}

TEST(KrylovBasis, IsOrthonormalInTheQMetric) {
  const auto p = geometric(20, 30.0, 4);
  const Vector<double> e0 = random_start(p, 4) - p.x_star();
  const QPolynomial<double> q({1.0, 0.5});
  const auto basis = krylov_basis(p, e0, 10, q);
  ASSERT_EQ(basis.effective_rank, 10);
  const Matrix<double> Q = p.eigenvectors() *
                           p.eigenvalues().unaryExpr([&](double l) { return q(l); }).asDiagonal() *
                           p.eigenvectors().transpose();
  for (std::size_t i = 0; i < basis.columns.size(); ++i)
    for (std::size_t j = 0; j < basis.columns.size(); ++j)
      EXPECT_NEAR(basis.columns[i].dot(Q * basis.columns[j]), i == j ? 1.0 : 0.0, 1e-10);
}

TEST(KrylovProject, BeatsRandomPointsOfTheSameAffineSpace) {
  const auto p = geometric(12, 10.0, 7);
  const Vector<double> x0 = random_start(p, 7);
  const QPolynomial<double> q = QPolynomial<double>::monomial(1);
  const Index t = 3;
  const Vector<double> best = krylov_project(p, x0, t, q);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  Vector<double> g = grad_f(p, x0);
  std::vector<Vector<double>> span;
  for (Index k = 0; k <= t; ++k) {
    span.push_back(g / g.norm());
    g = p.hessian() * g;
  }
  for (int trial = 0; trial < 50; ++trial) {
    Vector<double> x = best;
    for (const auto& v : span) x += 0.1 * normal(rng) * v;
    EXPECT_GE(q_metric(p, x, q), q_metric(p, best, q));
  }
}

TEST(InstanceReport, AdaptiveHbFollowsTheOracle) {
  const auto p = geometric(25, 10.0, 3);
  const Vector<double> x0 = random_start(p, 3);
  const auto traj = run(MethodConfig<double>{MethodKind::hb_polyak}, p, x0, 25, kept());
  const auto report = instance_optimality_report(p, x0, 25, QPolynomial<double>(), traj);
  ASSERT_EQ(report.size(), traj.records.size());
  EXPECT_EQ(report[0].distance, 0.0);
  for (const auto& d : report) EXPECT_LE(d.distance, 1e-6) << "t = " << d.t;
}

TEST(InstanceReport, ConjugateGradientMinimizesTheXMetric) {
  const auto p = geometric(25, 10.0, 3);
  const Vector<double> x0 = random_start(p, 3);
  const auto traj = run(MethodConfig<double>{MethodKind::cg}, p, x0, 25, kept());
  for (const auto& d : instance_optimality_report(p, x0, 25, QPolynomial<double>::monomial(1), traj))
    EXPECT_LE(std::abs(d.q_gap_relative), 1e-8) << "t = " << d.t;
}

TEST(InstanceReport, GradientDescentIsNotTheProjection) {
  const auto p = geometric(10, 10.0, 3);
  const Vector<double> x0 = random_start(p, 3);
  const auto traj = run(MethodConfig<double>{MethodKind::gd_constant}, p, x0, 6, kept());
  const auto report = instance_optimality_report(p, x0, 6, QPolynomial<double>(), traj);
  for (std::size_t t = 2; t < report.size(); ++t) {
    EXPECT_GT(report[t].distance, 1e-6);
    EXPECT_GT(report[t].q_gap, 0.0);
  }
}

TEST(InstanceReport, NeedsStoredIterates) {
  const auto p = geometric(5, 10.0, 3);
  const Vector<double> x0 = random_start(p, 3);
  const auto traj = run(MethodConfig<double>{MethodKind::hb_polyak}, p, x0, 3);
  EXPECT_THROW(instance_optimality_report(p, x0, 3, QPolynomial<double>(), traj), InvalidTrajectoryError);
}
