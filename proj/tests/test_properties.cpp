#include <cmath>
#include <random>
#include <tuple>

#include <gtest/gtest.h>

#include "hbpolyak/diagnostics.hpp"
#include "hbpolyak/hbpolyak.hpp"
#include "test_support.hpp"

using namespace hbpolyak;
using testing_support::geometric;

namespace {

RunOptions<double> kept() {
  RunOptions<double> o;
  o.keep_iterates = true;
  return o;
}

double e0_norm(const QuadraticProblem<double>& p, const Vector<double>& x0) {
  return (x0 - p.x_star()).norm();
}

// (dimension, condition number, seed)
using Instance = std::tuple<Index, double, std::uint64_t>;

std::string instance_name(const ::testing::TestParamInfo<Instance>& info) {
  const auto [d, kappa, seed] = info.param;
  return "d" + std::to_string(d) + "_k" + std::to_string(static_cast<long>(kappa)) + "_s" +
         std::to_string(seed);
}

class Wellconditioned : public ::testing::TestWithParam<Instance> {
 protected:
  QuadraticProblem<double> problem() const {
    const auto [d, kappa, seed] = GetParam();
    return geometric(d, kappa, seed);
  }
  Vector<double> start(const QuadraticProblem<double>& p) const {
    return random_start(p, std::get<2>(GetParam()));
  }
};

class AnyConditioning : public Wellconditioned {};

std::vector<MethodConfig<double>> every_method() {
  std::vector<MethodConfig<double>> configs;
  for (auto kind : {MethodKind::gd_constant, MethodKind::gd_polyak, MethodKind::gd_polyak_2x,
                    MethodKind::hb_constant, MethodKind::chebyshev, MethodKind::hb_polyak,
                    MethodKind::cg})
    configs.push_back(MethodConfig<double>{kind});
  configs.push_back(MethodConfig<double>{MethodKind::q_min, QPolynomial<double>::monomial(1)});
  return configs;
}

}  // namespace

TEST_P(Wellconditioned, AdaptiveHbMatchesTheOracle) {
  const auto p = problem();
  const Vector<double> x0 = start(p);
  const Index T = p.dim();
  const auto traj = run(MethodConfig<double>{MethodKind::hb_polyak}, p, x0, T, kept());
  for (const auto& r : instance_optimality_report(p, x0, T, QPolynomial<double>(), traj))
    EXPECT_LE(r.distance, 1e-6) << "t = " << r.t;
}

TEST_P(Wellconditioned, QMinMatchesTheOracleForEachQ) {
  const auto p = problem();
  const Vector<double> x0 = start(p);
  const Index T = std::min<Index>(p.dim(), 8);
  for (int k = 0; k <= 2; ++k) {
    const auto q = QPolynomial<double>::monomial(k);
    const auto traj = run(MethodConfig<double>{MethodKind::q_min, q}, p, x0, T, kept());
    for (const auto& r : instance_optimality_report(p, x0, T, q, traj))
      EXPECT_LE(r.distance, 1e-6) << "Q = X^" << k << ", t = " << r.t;
  }
}

TEST_P(Wellconditioned, ConjugateGradientGradientsAreOrthogonal) {
  const auto p = problem();
  const Vector<double> x0 = start(p);
  const auto traj = run(MethodConfig<double>{MethodKind::cg}, p, x0, p.dim(), kept());
  EXPECT_LE(gradient_orthogonality(p, traj, p.dim()).value, 1e-8);
}

TEST_P(Wellconditioned, PolynomialNormIsTheQMetric) {
  const auto p = problem();
  const Vector<double> x0 = start(p);
  const auto q = QPolynomial<double>::monomial(1);
  const auto traj = run(MethodConfig<double>{MethodKind::q_min, q}, p, x0, std::min<Index>(6, p.dim() - 2), kept());
  const auto measure = measure_from_problem(p, x0, q);
  const auto polys = polys_from_trajectory(step_coefficients(traj));
  for (std::size_t t = 0; t < polys.size(); ++t) {
    const double direct = q_metric(p, traj.iterates[t], q);
    EXPECT_NEAR(inner_product(polys[t], polys[t], measure), direct, 1e-9 * direct) << "t = " << t;
  }
}

INSTANTIATE_TEST_SUITE_P(Sweep, Wellconditioned,
                         ::testing::Combine(::testing::Values<Index>(5, 10, 20),
                                            ::testing::Values(3.0, 10.0),
                                            ::testing::Values<std::uint64_t>(0, 1, 2)),
                         instance_name);

TEST_P(AnyConditioning, AdaptiveHbIsMonotoneInDistance) {
  const auto p = problem();
  const auto traj = run(MethodConfig<double>{MethodKind::hb_polyak}, p, start(p), 3 * p.dim());
  EXPECT_LE(distance_growth(traj).value, 1e-10);
}

TEST_P(AnyConditioning, AdaptiveHbDominatesFixedRateMethods) {
  const auto p = problem();
  const Vector<double> x0 = start(p);
  const Index T = 50;
  const auto hb = run(MethodConfig<double>{MethodKind::hb_polyak}, p, x0, T);
  for (auto kind : {MethodKind::gd_constant, MethodKind::gd_polyak, MethodKind::gd_polyak_2x,
                    MethodKind::hb_constant, MethodKind::chebyshev}) {
    const auto other = run(MethodConfig<double>{kind}, p, x0, T);
    EXPECT_LE(distance_excess_over(hb, other, T, e0_norm(p, x0)).value, 1e-8) << other.method;
  }
}

TEST_P(AnyConditioning, EffectiveStepIsOnePlusMomentumTimesNaturalStep) {
  const auto p = problem();
  const Vector<double> x0 = start(p);
  for (const auto& config : every_method()) {
    const auto traj = run(config, p, x0, 30);
    for (std::size_t t = 1; t < traj.records.size(); ++t) {
      const auto& r = traj.records[t];
      EXPECT_NEAR(r.gamma, (1.0 + r.m) * r.h, 1e-14 * std::abs(r.gamma)) << traj.method << " " << t;
    }
  }
}

TEST_P(AnyConditioning, NaturalStepOfFixedTunings) {
  const auto p = problem();
  const double natural = 2.0 / (p.L() + p.mu());
  RunOptions<double> o;
  o.grad_tol = 0.0;
  for (auto kind : {MethodKind::hb_constant, MethodKind::chebyshev}) {
    const auto traj = run(MethodConfig<double>{kind}, p, start(p), 40, o);
    for (std::size_t t = 2; t < traj.records.size(); ++t)
      EXPECT_NEAR(traj.records[t].h, natural, 1e-12 * natural) << traj.method << " " << t;
  }
}

TEST_P(AnyConditioning, RunsAreDeterministic) {
  const auto p = problem();
  const Vector<double> x0 = start(p);
  const auto a = run(MethodConfig<double>{MethodKind::hb_polyak}, p, x0, 20, kept());
  const auto b = run(MethodConfig<double>{MethodKind::hb_polyak}, p, x0, 20, kept());
  ASSERT_EQ(a.iterates.size(), b.iterates.size());
  for (std::size_t t = 0; t < a.iterates.size(); ++t) EXPECT_EQ(a.iterates[t], b.iterates[t]);
}

TEST_P(AnyConditioning, ProblemInvariants) {
  const auto p = problem();
  const auto& H = p.hessian();
  EXPECT_LE((H - H.transpose()).norm(), 1e-12 * H.norm());
  EXPECT_GT(p.mu(), 0.0);
  EXPECT_LE(p.mu(), p.L());
  EXPECT_EQ(eval_f(p, p.x_star()), p.f_star());
  EXPECT_NEAR(p.L() / p.mu(), std::get<1>(GetParam()), 1e-9 * p.L() / p.mu());
}

INSTANTIATE_TEST_SUITE_P(Sweep, AnyConditioning,
                         ::testing::Combine(::testing::Values<Index>(10, 50, 100),
                                            ::testing::Values(10.0, 1e3, 1e5),
                                            ::testing::Values<std::uint64_t>(0, 1, 2)),
                         instance_name);

TEST(FiniteTime, FewDistinctEigenvaluesAreSolvedInThatManySteps) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> distinct(2, 15);
  std::uniform_int_distribution<int> copies(1, 4);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = distinct(rng);
    std::vector<double> values;
    for (int i = 0; i < n; ++i) {
      const double lambda = std::pow(10.0, static_cast<double>(i) / (n - 1));
      for (int c = copies(rng); c > 0; --c) values.push_back(lambda);
    }
    const auto p = make_problem<double>(SpectrumSpec::explicit_list(values, rng()));
    ASSERT_EQ(distinct_eigenvalue_count(p), n);
    const Vector<double> x0 = random_start(p, rng());
    const double scale = e0_norm(p, x0);
    std::vector<MethodConfig<double>> configs{MethodConfig<double>{MethodKind::hb_polyak}};
    for (int k = 0; k <= 2; ++k)
      configs.push_back(MethodConfig<double>{MethodKind::q_min, QPolynomial<double>::monomial(k)});
    for (const auto& config : configs) {
      const auto traj = run(config, p, x0, n);
      EXPECT_LE(distance_at(traj, n), 1e-9 * scale) << traj.method << " with " << n << " eigenvalues";
    }
  }
}

TEST(ResidualPolynomials, HaveUnitConstantTermForAnySteps) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> gamma(0.01, 2.0), momentum(-0.2, 0.9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<double, double>> steps(10);
    for (auto& s : steps) s = {gamma(rng), momentum(rng)};
    for (const auto& P : polys_from_trajectory(steps)) EXPECT_EQ(P(0.0), 1.0);
  }
}
