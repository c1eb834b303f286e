#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hbpolyak/harness.hpp"

namespace hh = hbpolyak::harness;

namespace {

void add_experiment_flags(CLI::App& cmd, hh::ExperimentConfig& config, std::string& out) {
  cmd.add_option("--dim", config.dim, "Problem dimension")->check(CLI::PositiveNumber);
  cmd.add_option("--cond", config.condition_number, "Condition number L/mu (mu = 1)");
  cmd.add_option("--spectrum", config.spectrum, "geometric | uniform | file:<path>");
  cmd.add_option("--seed", config.seed, "Seed for the rotation and the starting point");
  cmd.add_option("--iters", config.iterations, "Iteration budget T");
  cmd.add_option("--methods", config.methods,
                 "Comma-separated methods, 'all', or qmin:<Q> (Q = X, X2 or c0:c1:...)")
      ->delimiter(',');
  cmd.add_option("--grad-tol", config.grad_tol, "Stop when ||grad f|| <= tol * ||grad f(x0)||");
  cmd.add_option("--out", out, "Output file (stdout when omitted)");
  cmd.add_option("--fstar", config.f_star, "Optimal value supplied to the Polyak-step methods (true value is 0)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive Heavy-ball with Polyak step-sizes on convex quadratics"};
  app.require_subcommand(1);

  hh::ExperimentConfig run_config, verify_config;
  verify_config.dim = 10;
  std::string run_out, verify_out;

  auto* run = app.add_subcommand("run", "Run methods and write a CSV trace");
  add_experiment_flags(*run, run_config, run_out);
  run->add_flag("--plot", run_config.plot, "Also write semi-log SVG plots next to --out");

  auto* verify = app.add_subcommand("verify", "Check convergence and optimality properties against the Krylov oracle");
  add_experiment_flags(*verify, verify_config, verify_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return hh::kExitUsage;
  }

  try {
    if (run->parsed()) {
      if (!run_out.empty()) run_config.output = run_out;
      return hh::cmd_run(run_config, std::cout, std::cerr);
    }
    if (!verify_out.empty()) verify_config.output = verify_out;
    return hh::cmd_verify(verify_config, std::cout, std::cerr);
  } catch (const hh::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return hh::kExitUsage;
  } catch (const hbpolyak::ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return hh::kExitUsage;
  } catch (const hbpolyak::InvalidQError& e) {
    std::cerr << "invalid Q: " << e.what() << '\n';
    return hh::kExitUsage;
  } catch (const hbpolyak::SolverError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return hh::kExitDegenerate;
  }
}
