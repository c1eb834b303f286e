#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>

#include "hbpolyak/harness.hpp"

namespace hbpolyak::harness {

const std::vector<std::string>& registered_methods() {
  static const std::vector<std::string> names{
      "gd-constant", "gd-polyak", "gd-polyak-2x", "hb-constant",
      "chebyshev",   "hb-polyak", "cg"};
  return names;
}

namespace {

double parse_double(const std::string& text, const std::string& what) {
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size())
    throw UsageError("cannot parse " + what + " '" + text + "'");
  return value;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string current;
  std::istringstream in(text);
  while (std::getline(in, current, sep)) parts.push_back(current);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

MethodConfig<double> parse_one(const std::string& name) {
  if (name == "gd-constant") return {MethodKind::gd_constant};
  if (name == "gd-polyak") return {MethodKind::gd_polyak};
  if (name == "gd-polyak-2x") return {MethodKind::gd_polyak_2x};
  if (name == "hb-constant") return {MethodKind::hb_constant};
  if (name == "chebyshev") return {MethodKind::chebyshev};
  if (name == "hb-polyak") return {MethodKind::hb_polyak};
  if (name == "cg") return {MethodKind::cg};
  if (name.rfind("qmin:", 0) == 0) return {MethodKind::q_min, parse_q(name.substr(5))};
  throw UsageError("unknown method '" + name + "'");
}

}  // namespace

QPolynomial<double> parse_q(const std::string& spec) {
  if (spec == "X" || spec == "x") return QPolynomial<double>::monomial(1);
  if (spec == "X2" || spec == "x2" || spec == "X^2" || spec == "x^2")
    return QPolynomial<double>::monomial(2);
  std::vector<double> coeffs;
  for (const auto& part : split(spec, ':')) {
    if (part.empty()) throw UsageError("empty coefficient in Q spec '" + spec + "'");
    coeffs.push_back(parse_double(part, "Q coefficient"));
  }
  if (coeffs.empty()) throw UsageError("empty Q spec");
  try {
    return QPolynomial<double>(std::move(coeffs));
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
}

std::vector<MethodConfig<double>> parse_methods(const std::vector<std::string>& names) {
  std::vector<MethodConfig<double>> out;
  for (const auto& raw : names) {
    for (const auto& name : split(raw, ',')) {
      if (name.empty()) continue;
      if (name == "all") {
        for (const auto& n : registered_methods()) out.push_back(parse_one(n));
      } else {
        out.push_back(parse_one(name));
      }
    }
  }
  if (out.empty()) throw UsageError("no methods selected");
  return out;
}

void ExperimentConfig::validate() const {
  if (!(condition_number >= 1.0) || !std::isfinite(condition_number))
    throw UsageError("--cond must be a finite number >= 1");
  if (iterations < 0) throw UsageError("--iters must be >= 0");
  if (spectrum.rfind("file:", 0) != 0 && dim < 1) throw UsageError("--dim must be >= 1");
  if (spectrum != "geometric" && spectrum != "uniform" && spectrum.rfind("file:", 0) != 0)
    throw UsageError("--spectrum must be geometric, uniform or file:<path>");
  if (!(grad_tol >= 0.0)) throw UsageError("--grad-tol must be >= 0");
  if (!std::isfinite(f_star)) throw UsageError("--fstar must be finite");
  if (plot && !output) throw UsageError("--plot needs --out");
  parse_methods(methods);
}

QuadraticProblem<double> build_problem(const ExperimentConfig& config) {
  SpectrumSpec spec;
  if (config.spectrum.rfind("file:", 0) == 0) {
    spec = SpectrumSpec::explicit_list(read_spectrum_file(config.spectrum.substr(5)),
                                       config.seed);
  } else if (config.spectrum == "uniform") {
    spec = SpectrumSpec::uniform(config.dim, 1.0, config.condition_number, config.seed);
  } else {
    spec = SpectrumSpec::geometric(config.dim, 1.0, config.condition_number, config.seed);
  }
  const Index d = spec.kind == SpectrumKind::explicit_list
                      ? static_cast<Index>(spec.values.size())
                      : spec.dim;
  return make_problem<double>(spec, Vector<double>::Zero(d), 0.0);
}

Vector<double> start_point(const QuadraticProblem<double>& p,
                           const ExperimentConfig& config) {
  return random_start<double>(p, config.seed, 10.0);
}

bool ExperimentResult::any_error() const {
  return std::any_of(outcomes.begin(), outcomes.end(),
                     [](const MethodOutcome& o) { return o.error.has_value(); });
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const QuadraticProblem<double>& p,
                                const Vector<double>& x0) {
  auto methods = parse_methods(config.methods);
  for (auto& m : methods) m.f_star = config.f_star;
  RunOptions<double> options;
  options.grad_tol = config.grad_tol * grad_f(p, x0).norm();
  std::vector<std::future<MethodOutcome>> pending;
  pending.reserve(methods.size());
  for (const auto& method : methods) {
    pending.push_back(std::async(std::launch::async, [&, method] {
      try {
        return MethodOutcome{run(method, p, x0, config.iterations, options), std::nullopt};
      } catch (const RunError<double>& e) {
        return MethodOutcome{e.partial(), e.cause()};
      }
    }));
  }
  ExperimentResult result;
  for (auto& f : pending) result.outcomes.push_back(f.get());
  return result;
}

namespace {

std::string format_number(double v) {
  if (std::isnan(v)) return {};
  if (v == 0.0) v = 0.0;
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::string csv_quote(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + '"';
}

}  // namespace

void write_csv(std::ostream& out, const ExperimentConfig& config,
               const ExperimentResult& result) {
  out << "# hbpolyak run: spectrum=" << config.spectrum << " dim=" << config.dim
      << " cond=" << format_number(config.condition_number) << " seed=" << config.seed
      << " iters=" << config.iterations << " fstar=" << format_number(config.f_star)
      << " (true optimum 0)\n";
  out << "# x0 = x* + 10 * uniform random unit direction (seed " << config.seed
      << "); stop when ||grad f|| <= " << format_number(config.grad_tol)
      << " * ||grad f(x0)||\n";
  out << "# h_t, m_t, gamma_t are the parameters of the step that produced x_t\n";
  out << "method,t,dist_sq,excess,grad_norm_sq,h_t,m_t,gamma_t,error\n";
  for (const auto& outcome : result.outcomes) {
    const auto& traj = outcome.trajectory;
    for (std::size_t i = 0; i < traj.records.size(); ++i) {
      const auto& r = traj.records[i];
      out << traj.method << ',' << r.t << ',' << format_number(r.dist_sq) << ','
          << format_number(r.excess) << ',' << format_number(r.grad_norm_sq) << ','
          << format_number(r.h) << ',' << format_number(r.m) << ','
          << format_number(r.gamma) << ',';
      if (outcome.error && i + 1 == traj.records.size()) out << csv_quote(*outcome.error);
      out << '\n';
    }
  }
}

int cmd_run(const ExperimentConfig& config, std::ostream& out, std::ostream& log) {
  config.validate();
  const auto problem = build_problem(config);
  const auto x0 = start_point(problem, config);
  const auto result = run_experiment(config, problem, x0);

  if (config.output) {
    std::ofstream file(*config.output);
    if (!file) throw UsageError("cannot write " + config.output->string());
    write_csv(file, config, result);
  } else {
    write_csv(out, config, result);
  }

  if (config.plot) {
    std::vector<PlotSeries> dist, excess;
    for (const auto& o : result.outcomes) {
      PlotSeries ds{o.trajectory.method, {}}, es{o.trajectory.method, {}};
      for (const auto& r : o.trajectory.records) {
        ds.points.emplace_back(static_cast<double>(r.t), r.dist_sq);
        es.points.emplace_back(static_cast<double>(r.t), r.excess);
      }
      dist.push_back(std::move(ds));
      excess.push_back(std::move(es));
    }
    auto stem = *config.output;
    stem.replace_extension();
    write_semilog_svg(stem.string() + "_dist_sq.svg", "Distance to optimum",
                      "||x_t - x*||^2", dist);
    write_semilog_svg(stem.string() + "_excess.svg", "Excess loss", "f(x_t) - f*",
                      excess);
  }

  for (const auto& o : result.outcomes) {
    log << o.trajectory.method << ": " << o.trajectory.iterations() << " iterations"
        << (o.trajectory.converged ? " (converged)" : "");
    if (o.error) log << " ERROR " << *o.error;
    log << '\n';
  }
  return result.any_error() ? kExitDegenerate : kExitOk;
}

}  // namespace hbpolyak::harness
