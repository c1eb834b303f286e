#include <cmath>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "hbpolyak/diagnostics.hpp"
#include "hbpolyak/harness.hpp"
#include "hbpolyak/krylov_oracle.hpp"

namespace hbpolyak::harness {

namespace {

using json = nlohmann::ordered_json;

constexpr Index kMaxVerifyDim = 50;

struct Check {
  std::string name;
  std::string method;
  Worst worst;
  double tolerance;
  bool applicable = true;

  bool pass() const { return !applicable || worst.value <= tolerance; }

  json to_json() const {
    json j;
    j["check"] = name;
    j["method"] = method;
    j["value"] = worst.value;
    j["tolerance"] = tolerance;
    j["t"] = worst.t;
    if (worst.s >= 0) j["s"] = worst.s;
    j["applicable"] = applicable;
    j["pass"] = pass();
    return j;
  }
};

Trajectory<double> run_kept(const MethodConfig<double>& m, const QuadraticProblem<double>& p,
                            const Vector<double>& x0, Index T, double grad_tol) {
  RunOptions<double> options;
  options.grad_tol = grad_tol;
  options.keep_iterates = true;
  return run(m, p, x0, T, options);
}

Worst oracle_distance(const QuadraticProblem<double>& p, const Vector<double>& x0, Index T,
                      const QPolynomial<double>& q, const Trajectory<double>& traj) {
  Worst w;
  for (const auto& d : instance_optimality_report(p, x0, T, q, traj)) w.update(d.distance, d.t);
  return w;
}

Worst oracle_q_gap(const QuadraticProblem<double>& p, const Vector<double>& x0, Index T,
                   const QPolynomial<double>& q, const Trajectory<double>& traj) {
  Worst w;
  for (const auto& d : instance_optimality_report(p, x0, T, q, traj))
    w.update(std::abs(d.q_gap_relative), d.t);
  return w;
}

Worst parametrization_gap(const QuadraticProblem<double>& p, const Vector<double>& x0,
                          Index T, const QPolynomial<double>& q, double grad_tol) {
  Worst w;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
  SolverState<double> s = init_state(p, x0, grad_tol);
  while (s.t < T && !s.converged) {
    s = q_min_hb_step(std::move(s), p, q);
    if (!s.coeffs) break;
    const auto& c = *s.coeffs;
    w.update(std::max({rel(c.natural_step(), s.h_curr), rel(c.effective_step(), s.gamma_curr),
                       std::abs(c.momentum() - s.m_curr) / std::max(1.0, std::abs(s.m_curr))}),
             s.t - 1);
    s.coeffs.reset();
  }
  return w;
}

Worst natural_step_gap(const Trajectory<double>& traj, double expected) {
  Worst w;
  for (std::size_t i = 1; i < traj.records.size(); ++i)
    w.update(std::abs(traj.records[i].h - expected) / expected, static_cast<Index>(i - 1));
  return w;
}

}  // namespace

int cmd_verify(const ExperimentConfig& config, std::ostream& out, std::ostream& log) {
  config.validate();
  const auto p = build_problem(config);
  if (p.dim() > kMaxVerifyDim)
    throw UsageError("verify is limited to dimension <= 50 (oracle cost)");
  const auto x0 = start_point(p, config);
  const Index d = p.dim();
  const double e0 = (x0 - p.x_star()).norm();
  const double grad_tol = config.grad_tol * grad_f(p, x0).norm();
  const Index distinct = distinct_eigenvalue_count(p);
  const double kappa = p.condition_number();
  const bool finite_time_applies = distinct <= 15 && kappa <= 100.0;

  const QPolynomial<double> q_one, q_x = QPolynomial<double>::monomial(1),
                                   q_x2 = QPolynomial<double>::monomial(2);
  MethodConfig<double> alg1{MethodKind::hb_polyak};
  alg1.f_star = config.f_star;

  std::vector<Check> checks;
  json runs = json::array();
  bool degenerate = false;

  auto guarded = [&](const MethodConfig<double>& m, Index T) -> std::optional<Trajectory<double>> {
    try {
      return run_kept(m, p, x0, T, grad_tol);
    } catch (const RunError<double>& e) {
      degenerate = true;
      runs.push_back({{"method", m.name()}, {"error", e.what()}});
      return std::nullopt;
    }
  };

  // Adaptive Heavy-ball against the Q = 1 oracle.
  if (auto traj = guarded(alg1, d)) {
    checks.push_back({"oracle_distance", traj->method, oracle_distance(p, x0, d, q_one, *traj), 1e-6});
    checks.push_back({"monotone_distance", traj->method, distance_growth(*traj), 1e-10});
    checks.push_back({"error_orthogonality", traj->method, error_orthogonality(p, *traj, d), 1e-8});
    Worst final;
    final.update(distance_at(*traj, distinct) / e0, std::min<Index>(distinct, traj->iterations()));
    checks.push_back({"finite_time_distance", traj->method, final, 1e-9, finite_time_applies});
  }

  for (const auto& q : {q_one, q_x, q_x2}) {
    const MethodConfig<double> m{MethodKind::q_min, q};
    if (auto traj = guarded(m, d)) {
      checks.push_back({"oracle_distance", traj->method, oracle_distance(p, x0, d, q, *traj), 1e-6});
      checks.push_back({"parametrization_cross_check", traj->method,
                        parametrization_gap(p, x0, d, q, grad_tol), 1e-10});
      Worst final;
      final.update(distance_at(*traj, distinct) / e0, std::min<Index>(distinct, traj->iterations()));
      checks.push_back({"finite_time_distance", traj->method, final, 1e-9, finite_time_applies});
      if (q.degree() == 1)
        checks.push_back({"gradient_orthogonality", traj->method, gradient_orthogonality(p, *traj, d), 1e-8});
    }
  }

  if (auto traj = guarded({MethodKind::cg}, d))
    checks.push_back({"oracle_q_gap", traj->method, oracle_q_gap(p, x0, d, q_x, *traj), 1e-8});

  // Instance optimality against the competitors over the configured horizon.
  const Index T = std::max(config.iterations, d);
  if (auto ref = guarded(alg1, T)) {
    for (auto kind : {MethodKind::gd_constant, MethodKind::gd_polyak, MethodKind::gd_polyak_2x,
                      MethodKind::hb_constant, MethodKind::chebyshev}) {
      MethodConfig<double> competitor{kind};
      competitor.f_star = config.f_star;
      if (auto other = guarded(competitor, T)) {
        checks.push_back({"dominates_" + other->method, ref->method,
                          distance_excess_over(*ref, *other, T, e0), 1e-8});
        if (kind == MethodKind::hb_constant || kind == MethodKind::chebyshev)
          checks.push_back({"natural_step_identity", other->method,
                            natural_step_gap(*other, 2.0 / (p.L() + p.mu())), 1e-12});
      }
    }
  }

  bool all_pass = !degenerate;
  json report;
  report["problem"] = {{"dim", d},
                       {"condition_number", kappa},
                       {"distinct_eigenvalues", distinct},
                       {"spectrum", config.spectrum},
                       {"seed", config.seed},
                       {"x0_distance", e0}};
  report["checks"] = json::array();
  for (const auto& c : checks) {
    report["checks"].push_back(c.to_json());
    all_pass = all_pass && c.pass();
    if (!c.pass())
      log << "FAIL " << c.name << " [" << c.method << "] t=" << c.worst.t << " value=" << c.worst.value
          << " > " << c.tolerance << '\n';
  }
  if (!runs.empty()) report["errors"] = runs;
  report["status"] = all_pass ? "PASS" : "FAIL";

  if (config.output) {
    std::ofstream file(*config.output);
    if (!file) throw UsageError("cannot write " + config.output->string());
    file << report.dump(2) << '\n';
  } else {
    out << report.dump(2) << '\n';
  }
  log << "verify: " << (all_pass ? "PASS" : "FAIL") << '\n';
  if (degenerate) return kExitDegenerate;
  return all_pass ? kExitOk : kExitViolation;
}

}  // namespace hbpolyak::harness
