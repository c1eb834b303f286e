#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hbpolyak/hbpolyak.hpp"
#include "test_support.hpp"

using namespace hbpolyak;
using testing_support::diag13;
using testing_support::geometric;

namespace {

using Measure = SpectralMeasure<double>;
using Poly = ResidualPolynomial<double>;

Measure two_atoms() { return Measure{{{1.0, 1.0}, {3.0, 1.0}}}; }

Measure random_measure(std::mt19937_64& rng, std::size_t atoms) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Measure m;
  for (std::size_t i = 0; i < atoms; ++i) m.atoms.push_back({0.05 + unit(rng), 0.1 + unit(rng)});
  return m;
}

}  // namespace

TEST(ResidualPolynomial, Construction) {
  EXPECT_EQ(Poly().degree(), 0u);
  EXPECT_EQ(Poly()(7.0), 1.0);
  EXPECT_DOUBLE_EQ(Poly({1.0, -0.5, 0.25})(2.0), 1.0);
  EXPECT_THROW(Poly({0.5, 1.0}), ValidationError);
  EXPECT_THROW(Poly(std::vector<double>{}), ValidationError);
  EXPECT_THROW(Poly(std::vector<double>(62, 1.0)), ValidationError);
}

TEST(MeasureFromProblem, RepeatedEigenvalueIsOneAtom) {
  const QuadraticProblem<double> id(Matrix<double>::Identity(2, 2), Vector<double>::Zero(2), 0.0);
  const auto m = measure_from_problem(id, Vector<double>(Eigen::Vector2d(1.0, 1.0)), QPolynomial<double>());
  ASSERT_EQ(m.atoms.size(), 1u);
  EXPECT_DOUBLE_EQ(m.atoms[0].lambda, 1.0);
  EXPECT_NEAR(m.atoms[0].weight, 2.0, 1e-15);
}

TEST(MeasureFromProblem, DiagonalExample) {
  const Vector<double> x0 = Eigen::Vector2d(1.0, 1.0);
  const auto m1 = measure_from_problem(diag13(), x0, QPolynomial<double>());
  ASSERT_EQ(m1.atoms.size(), 2u);
  EXPECT_NEAR(m1.atoms[0].lambda, 1.0, 1e-15);
  EXPECT_NEAR(m1.atoms[0].weight, 1.0, 1e-15);
  EXPECT_NEAR(m1.atoms[1].lambda, 3.0, 1e-15);
  EXPECT_NEAR(m1.atoms[1].weight, 1.0, 1e-15);
  const auto mx = measure_from_problem(diag13(), x0, QPolynomial<double>::monomial(1));
  EXPECT_NEAR(mx.atoms[0].weight, 1.0, 1e-15);
  EXPECT_NEAR(mx.atoms[1].weight, 3.0, 1e-15);
}

TEST(MeasureFromProblem, TotalMassIsTheQMetric) {
  const auto p = make_problem<double>(SpectrumSpec::explicit_list({1, 2, 2, 4, 4, 4, 8}, 2));
  const Vector<double> x0 = random_start(p, 2);
  const QPolynomial<double> q({1.0, 1.0});
  const auto m = measure_from_problem(p, x0, q);
  EXPECT_EQ(m.support_size(), 4u);
  EXPECT_NEAR(m.total_mass(), q_metric(p, x0, q), 1e-10 * q_metric(p, x0, q));
}

TEST(InnerProduct, Values) {
  EXPECT_DOUBLE_EQ(inner_product(Poly(), Poly(), two_atoms()), 2.0);
  // <1, X> under m equals <1, 1> under X m.
  EXPECT_DOUBLE_EQ(inner_product(Poly(), Poly(), two_atoms().times_x()), 4.0);
}

TEST(RecursionCoeffs, FirstStepOfTheRunningExample) {
  const auto mxq = two_atoms().times_x();
  const auto c = recursion_coeffs(Poly(), static_cast<const Poly*>(nullptr), mxq);
  EXPECT_DOUBLE_EQ(c.a_tilde, 2.5);
  EXPECT_EQ(c.b_tilde, 0.0);
  EXPECT_DOUBLE_EQ(c.natural_step(), 0.4);
  const auto P1 = next_residual_polynomial(Poly(), Poly(), c);
  EXPECT_EQ(P1.coeffs()[0], 1.0);
  EXPECT_DOUBLE_EQ(P1.coeffs()[1], -0.4);
}

TEST(RecursionCoeffs, SingleAtomIsAnnihilatedInOneStep) {
  const Measure m{{{2.7, 0.3}}};
  const auto c = recursion_coeffs(Poly(), static_cast<const Poly*>(nullptr), m.times_x());
  EXPECT_DOUBLE_EQ(c.a_tilde, 2.7);
  const auto P1 = next_residual_polynomial(Poly(), Poly(), c);
  EXPECT_NEAR(P1(2.7), 0.0, 1e-15);
  EXPECT_THROW(recursion_coeffs(P1, static_cast<const Poly*>(nullptr), m.times_x()), MeasureExhausted);
}

TEST(RecursionCoeffs, ProducesOrthogonalPairsWithUnitConstant) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = random_measure(rng, 6);
    const auto mxq = m.times_x();
    const auto family = orthogonal_residual_family(m, 5);
    for (std::size_t t = 0; t < family.size(); ++t) {
      EXPECT_EQ(family[t].coeffs()[0], 1.0);
      EXPECT_EQ(family[t].degree(), t);
    }
    for (std::size_t s = 0; s < family.size(); ++s)
      for (std::size_t t = s + 1; t < family.size(); ++t) {
        const double ns = std::sqrt(inner_product(family[s], family[s], mxq));
        const double nt = std::sqrt(inner_product(family[t], family[t], mxq));
        EXPECT_LE(std::abs(inner_product(family[s], family[t], mxq)), 1e-9 * ns * nt);
      }
  }
}

TEST(OrthogonalFamily, StopsWhenTheSupportIsExhausted) {
  const Measure m{{{1.0, 0.5}, {2.0, 1.0}, {4.0, 0.25}}};
  const auto family = orthogonal_residual_family(m, 10);
  ASSERT_EQ(family.size(), 4u);
  for (const auto& a : m.atoms) EXPECT_NEAR(family.back()(a.lambda), 0.0, 1e-12);
}

TEST(OrthogonalFamily, MatchesDirectLeastSquares) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t atoms = 1 + static_cast<std::size_t>(trial % 5);
    const auto m = random_measure(rng, atoms);
    const auto family = orthogonal_residual_family(m, std::min<std::size_t>(3, atoms - 1));
    for (std::size_t t = 0; t < family.size(); ++t) {
      const auto direct = least_squares_residual_polynomial(m, t);
      const double a = inner_product(family[t], family[t], m);
      const double b = inner_product(direct, direct, m);
      EXPECT_NEAR(a, b, 1e-8 * b);
      for (std::size_t k = 0; k <= t; ++k)
        EXPECT_NEAR(family[t].coeffs()[k], direct.coeffs()[k], 1e-6 * (1 + std::abs(direct.coeffs()[k])));
    }
  }
}

TEST(OrthogonalFamily, RecursionStepsMatchQMinParameters) {
  const auto p = geometric(10, 10.0, 4);
  const Vector<double> x0 = random_start(p, 4);
  const QPolynomial<double> q = QPolynomial<double>::monomial(2);
  const auto family = orthogonal_residual_family(measure_from_problem(p, x0, q), 6);
  const auto traj = run(MethodConfig<double>{MethodKind::q_min, q}, p, x0, 6);
  const auto rebuilt = polys_from_trajectory(step_coefficients(traj));
  ASSERT_EQ(rebuilt.size(), family.size());
  for (std::size_t t = 0; t < family.size(); ++t)
    for (std::size_t k = 0; k <= t; ++k)
      EXPECT_NEAR(rebuilt[t].coeffs()[k], family[t].coeffs()[k],
                  1e-8 * (1 + std::abs(family[t].coeffs()[k])));
}

TEST(PolysFromTrajectory, GradientDescentGivesPowers) {
  const double gamma = 0.3;
  const std::vector<std::pair<double, double>> steps(4, {gamma, 0.0});
  const auto polys = polys_from_trajectory(steps);
  ASSERT_EQ(polys.size(), 5u);
  EXPECT_EQ(polys[0].degree(), 0u);
  for (std::size_t t = 0; t < polys.size(); ++t)
    for (double x : {0.0, 0.5, 1.7, 3.0})
      EXPECT_NEAR(polys[t](x), std::pow(1.0 - gamma * x, static_cast<double>(t)), 1e-13);
}

TEST(PolysFromTrajectory, AdaptiveHbOnTheRunningExample) {
  const auto traj = run(MethodConfig<double>{MethodKind::hb_polyak}, diag13(),
                        Vector<double>(Eigen::Vector2d(1.0, 1.0)), 2);
  const auto polys = polys_from_trajectory(step_coefficients(traj));
  ASSERT_EQ(polys.size(), 3u);
  EXPECT_NEAR(polys[2](1.0), 0.0, 1e-12);
  EXPECT_NEAR(polys[2](3.0), 0.0, 1e-12);
}

TEST(PolysFromTrajectory, ReproducesIterates) {
  const auto p = geometric(15, 10.0, 6);
  const Vector<double> x0 = random_start(p, 6);
  RunOptions<double> o;
  o.keep_iterates = true;
  for (auto kind : {MethodKind::hb_polyak, MethodKind::chebyshev, MethodKind::cg, MethodKind::gd_polyak}) {
    const auto traj = run(MethodConfig<double>{kind}, p, x0, 8, o);
    const auto polys = polys_from_trajectory(step_coefficients(traj));
    for (std::size_t t = 0; t < polys.size(); ++t)
      EXPECT_LT(polynomial_mismatch(p, x0, polys[t], traj.iterates[t]), 1e-9) << traj.method << " " << t;
  }
}

TEST(PolysFromTrajectory, RejectsUnusableSteps) {
  EXPECT_THROW(polys_from_trajectory<double>({{0.0, 0.1}}), InvalidTrajectoryError);
  EXPECT_THROW(polys_from_trajectory<double>({{0.5, -1.0}}), InvalidTrajectoryError);
  EXPECT_THROW(polys_from_trajectory<double>({{NAN, 0.0}}), InvalidTrajectoryError);
}
