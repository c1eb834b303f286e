#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hbpolyak/errors.hpp"
#include "hbpolyak/quadratic_problem.hpp"
#include "hbpolyak/solvers.hpp"

namespace hbpolyak::harness {

/// Bad command-line input; maps to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDegenerate = 3;
inline constexpr int kExitViolation = 4;

/// Methods in registration order; `all` expands to these.
const std::vector<std::string>& registered_methods();

/// Accepts the registered names, "all", and qmin:<Q> where <Q> is X, X2, X^2
/// or colon-separated coefficients lowest degree first (qmin:0:1 is Q = X).
std::vector<MethodConfig<double>> parse_methods(const std::vector<std::string>& names);
QPolynomial<double> parse_q(const std::string& spec);

struct ExperimentConfig {
  Index dim = 25;
  double condition_number = 10.0;
  /// geometric | uniform | file:<path>
  std::string spectrum = "geometric";
  std::uint64_t seed = 0;
  Index iterations = 50;
  std::vector<std::string> methods{"all"};
  /// Stopping threshold relative to ||grad f(x0)||.
  double grad_tol = 1e-13;
  std::optional<std::filesystem::path> output;
  bool plot = false;
  /// Optimal value handed to the Polyak-step methods. The generated problem
  /// always has f* = 0, so anything else is a misspecified f*.
  double f_star = 0.0;

  void validate() const;
};

/// Geometric/uniform spectra use mu = 1 and L = condition_number; the
/// minimizer is 0 and the optimal value is 0.
QuadraticProblem<double> build_problem(const ExperimentConfig& config);
/// x* plus a random direction of norm 10 drawn from the config seed.
Vector<double> start_point(const QuadraticProblem<double>& p,
                           const ExperimentConfig& config);

struct MethodOutcome {
  Trajectory<double> trajectory;
  /// Set when the method stopped on a solver error.
  std::optional<std::string> error;
};

struct ExperimentResult {
  std::vector<MethodOutcome> outcomes;  // registration order
  bool any_error() const;
};

/// Runs every configured method, concurrently, over one shared problem.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const QuadraticProblem<double>& p,
                                const Vector<double>& x0);

/// Header `method,t,dist_sq,excess,grad_norm_sq,h_t,m_t,gamma_t,error`,
/// preceded by '#' metadata lines, then one row per (method, t).
void write_csv(std::ostream& out, const ExperimentConfig& config,
               const ExperimentResult& result);

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

/// Static semi-log line chart as SVG.
void write_semilog_svg(const std::filesystem::path& path, const std::string& title,
                       const std::string& y_label, const std::vector<PlotSeries>& series);

/// `run` subcommand: CSV to config.output (or `out`), optional plots.
int cmd_run(const ExperimentConfig& config, std::ostream& out, std::ostream& log);

/// `verify` subcommand: JSON report to config.output (or `out`).
int cmd_verify(const ExperimentConfig& config, std::ostream& out, std::ostream& log);

}  // namespace hbpolyak::harness
