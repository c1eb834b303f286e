#pragma once

#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hbpolyak/errors.hpp"
#include "hbpolyak/q_polynomial.hpp"
#include "hbpolyak/quadratic_problem.hpp"

namespace hbpolyak {

template <typename Scalar>
constexpr Scalar unset() {
  return std::numeric_limits<Scalar>::quiet_NaN();
}

/// Coefficients of P_{t+1} = ((a - X) P_t + b P_{t-1}) / c with c = a + b.
/// In Heavy-ball form: natural step 1/a, effective step 1/c, momentum -b/c.
template <typename Scalar>
struct RecursionCoeffs {
  Scalar a_tilde{};
  Scalar b_tilde{};
  Scalar c_tilde{};
  /// b_t of the moment-ratio parametrization; equal to b_tilde.
  Scalar b_ratio{};

  static RecursionCoeffs from(Scalar a, Scalar b) { return {a, b, a + b, b}; }

  Scalar natural_step() const { return Scalar(1) / a_tilde; }
  Scalar effective_step() const { return Scalar(1) / c_tilde; }
  Scalar momentum() const { return -b_tilde / c_tilde; }
};

/// Iteration state shared by every Heavy-ball-family method.
///
/// h_curr, m_curr and gamma_curr describe the step that produced x_curr and
/// are NaN at t = 0. m_next is the momentum the next step will use; it starts
/// at 0 and only the adaptive method fills it ahead of time.
template <typename Scalar>
struct SolverState {
  Index t = 0;
  Vector<Scalar> x_curr;
  Vector<Scalar> x_prev;
  Scalar f_curr{};
  Vector<Scalar> grad_curr;
  Scalar h_curr = unset<Scalar>();
  Scalar m_curr = unset<Scalar>();
  Scalar gamma_curr = unset<Scalar>();
  Scalar m_next = Scalar(0);
  Scalar grad_tol = Scalar(0);
  bool converged = false;
  /// Filled by q_min_hb_step.
  std::optional<RecursionCoeffs<Scalar>> coeffs;
};

/// 1e-13 * ||grad f(x0)||.
template <typename Scalar>
Scalar default_grad_tol(const QuadraticProblem<Scalar>& p, const Vector<Scalar>& x0) {
  return Scalar(1e-13) * grad_f(p, x0).norm();
}

template <typename Scalar>
SolverState<Scalar> init_state(const QuadraticProblem<Scalar>& p,
                               const Vector<Scalar>& x0, Scalar grad_tol) {
  SolverState<Scalar> s;
  s.x_curr = x0;
  s.x_prev = x0;
  s.grad_curr = grad_f(p, x0);
  s.f_curr = eval_f_with_grad(p, x0, s.grad_curr);
  s.grad_tol = grad_tol;
  s.converged = s.grad_curr.norm() <= grad_tol;
  return s;
}

template <typename Scalar>
SolverState<Scalar> init_state(const QuadraticProblem<Scalar>& p,
                               const Vector<Scalar>& x0) {
  return init_state(p, x0, default_grad_tol(p, x0));
}

namespace detail {

/// x+ = x - gamma g + m (x - x_prev), then refresh f, grad and the
/// convergence flag. h is the natural step gamma / (1 + m).
template <typename Scalar>
void heavy_ball_move(SolverState<Scalar>& s, const QuadraticProblem<Scalar>& p,
                     Scalar gamma, Scalar m, Scalar h) {
  Vector<Scalar> next = s.x_curr - gamma * s.grad_curr;
  if (m != Scalar(0)) next += m * (s.x_curr - s.x_prev);
  s.x_prev = std::move(s.x_curr);
  s.x_curr = std::move(next);
  s.grad_curr = grad_f(p, s.x_curr);
  s.f_curr = eval_f_with_grad(p, s.x_curr, s.grad_curr);
  s.h_curr = h;
  s.m_curr = m;
  s.gamma_curr = gamma;
  s.t += 1;
  s.converged = s.grad_curr.norm() <= s.grad_tol;
}

}  // namespace detail

/// factor * (f - f*) / ||g||^2; factor 1 is the classical Polyak step and
/// factor 2 the step along g closest to x* on a quadratic.
template <typename Scalar>
Scalar polyak_stepsize(Scalar f_val, Scalar f_star, const Vector<Scalar>& grad,
                       Scalar variant_factor) {
  if (f_val < f_star)
    throw InvalidFStarError(static_cast<double>(f_val), static_cast<double>(f_star));
  const Scalar g2 = grad.squaredNorm();
  if (!(g2 > Scalar(0)))
    throw SolverError("Polyak step requested at a zero gradient");
  return variant_factor * (f_val - f_star) / g2;
}

template <typename Scalar>
SolverState<Scalar> gd_constant_step(SolverState<Scalar> s,
                                     const QuadraticProblem<Scalar>& p,
                                     Scalar gamma) {
  if (s.converged) return s;
  detail::heavy_ball_move(s, p, gamma, Scalar(0), gamma);
  return s;
}

/// Gradient step with the Polyak step-size computed from `f_star`.
template <typename Scalar>
SolverState<Scalar> gd_polyak_step(SolverState<Scalar> s,
                                   const QuadraticProblem<Scalar>& p,
                                   Scalar variant_factor, Scalar f_star) {
  if (s.converged) return s;
  const Scalar gamma = polyak_stepsize(s.f_curr, f_star, s.grad_curr, variant_factor);
  detail::heavy_ball_move(s, p, gamma, Scalar(0), gamma);
  return s;
}

/// Heavy-ball with Polyak step-sizes. Uses only f, grad f and f*:
///   h_t = 2 (f(x_t) - f*) / ||g_t||^2
///   x_{t+1} = x_t - (1 + m_t) h_t g_t + m_t (x_t - x_{t-1})
///   m_{t+1} = -(f_{t+1} - f*) <g_{t+1}, g_t>
///             / ((f_t - f*) ||g_{t+1}||^2 + (f_{t+1} - f*) <g_{t+1}, g_t>)
/// with m_0 = 0. Its iterates are the Euclidean projections of x* onto
/// x_0 + span{g_0, ..., g_t}.
template <typename Scalar>
SolverState<Scalar> adaptive_hb_step(SolverState<Scalar> s,
                                     const QuadraticProblem<Scalar>& p,
                                     Scalar f_star) {
  if (s.converged) return s;
  const Scalar gap = s.f_curr - f_star;
  const Scalar h = polyak_stepsize(s.f_curr, f_star, s.grad_curr, Scalar(2));
  const Scalar m = s.m_next;
  const Vector<Scalar> grad_old = s.grad_curr;
  detail::heavy_ball_move(s, p, (Scalar(1) + m) * h, m, h);
  if (s.converged) {
    s.m_next = Scalar(0);
    return s;
  }
  const Scalar gap_next = s.f_curr - f_star;
  const Scalar cross = s.grad_curr.dot(grad_old);
  const Scalar positive = gap * s.grad_curr.squaredNorm();
  const Scalar numerator = -gap_next * cross;
  const Scalar denominator = positive + gap_next * cross;
  using std::abs;
  if (!(abs(denominator) > Scalar(1e-14) * positive))
    throw DegenerateMomentumError("adaptive momentum denominator vanished",
                                  static_cast<double>(numerator),
                                  static_cast<double>(denominator),
                                  static_cast<double>(positive));
  s.m_next = numerator / denominator;
  return s;
}

template <typename Scalar>
SolverState<Scalar> adaptive_hb_step(SolverState<Scalar> s,
                                     const QuadraticProblem<Scalar>& p) {
  return adaptive_hb_step(std::move(s), p, p.f_star());
}

/// Heavy-ball step that minimizes <x - x*, Q(H)(x - x*)> over
/// x_0 + span{g_0, ..., g_t}. Reference method: it reads x* and H directly.
///
/// With e = x - x* and w = H Q(H) e:
///   h_t = <e_t, w_t> / <H e_t, w_t>
///   b_t = <H e_t, w_{t-1}> / <e_{t-1}, w_{t-1}>      (b_0 = 0)
///   m_t = -b_t h_t / (1 + b_t h_t)
template <typename Scalar>
SolverState<Scalar> q_min_hb_step(SolverState<Scalar> s,
                                  const QuadraticProblem<Scalar>& p,
                                  const QPolynomial<Scalar>& q) {
  if (s.converged) return s;
  q.check_positive_on(p);
  const Matrix<Scalar>& H = p.hessian();
  const Vector<Scalar> e = s.x_curr - p.x_star();
  const Vector<Scalar> he = H * e;
  const Vector<Scalar> w = H * q.apply(H, e);
  const Scalar num_h = e.dot(w);
  const Scalar den_h = he.dot(w);
  if (!(den_h > Scalar(0)) || !(num_h > Scalar(0))) {
    // e_t carries no weight outside the kernel of H Q(H).
    s.converged = true;
    return s;
  }
  const Scalar h = num_h / den_h;
  Scalar b = Scalar(0);
  if (s.t > 0) {
    const Vector<Scalar> e_prev = s.x_prev - p.x_star();
    const Vector<Scalar> w_prev = H * q.apply(H, e_prev);
    b = he.dot(w_prev) / e_prev.dot(w_prev);
  }
  const Scalar bh = b * h;
  using std::abs;
  if (!(abs(Scalar(1) + bh) > Scalar(1e-14) * (Scalar(1) + abs(bh))))
    throw DegenerateMomentumError("1 + b_t h_t vanished in Q-minimization",
                                  static_cast<double>(-bh),
                                  static_cast<double>(Scalar(1) + bh), 1.0);
  const Scalar m = -bh / (Scalar(1) + bh);
  const Scalar gamma = (Scalar(1) + m) * h;

  const auto coeffs = RecursionCoeffs<Scalar>::from(den_h / num_h, b);
  assert(abs(coeffs.effective_step() - gamma) <= Scalar(1e-10) * abs(gamma));
  assert(abs(coeffs.momentum() - m) <= Scalar(1e-10) * (Scalar(1) + abs(m)));

  detail::heavy_ball_move(s, p, gamma, m, h);
  s.coeffs = coeffs;
  return s;
}

/// x+ = x - gamma g + m (x - x_prev) with fixed parameters. The first step
/// is a plain gradient step since x_{-1} = x_0.
template <typename Scalar>
SolverState<Scalar> hb_constant_step(SolverState<Scalar> s,
                                     const QuadraticProblem<Scalar>& p,
                                     Scalar gamma, Scalar m) {
  if (s.converged) return s;
  detail::heavy_ball_move(s, p, gamma, m, gamma / (Scalar(1) + m));
  return s;
}

template <typename Scalar>
struct HeavyBallParams {
  Scalar gamma;
  Scalar momentum;
};

/// Asymptotically optimal fixed tuning: gamma = (2 / (sqrt L + sqrt mu))^2,
/// m = ((sqrt L - sqrt mu) / (sqrt L + sqrt mu))^2.
template <typename Scalar>
HeavyBallParams<Scalar> stationary_hb_params(Scalar mu, Scalar L) {
  using std::sqrt;
  const Scalar sl = sqrt(L), sm = sqrt(mu);
  const Scalar rho = (sl - sm) / (sl + sm);
  const Scalar root = Scalar(2) / (sl + sm);
  return {root * root, rho * rho};
}

/// Chebyshev tuning at iteration t. t = 0 is a gradient step with 2/(L+mu).
template <typename Scalar>
HeavyBallParams<Scalar> chebyshev_params(Scalar mu, Scalar L, Index t) {
  using std::pow;
  using std::sqrt;
  const Scalar h = Scalar(2) / (L + mu);
  if (t == 0) return {h, Scalar(0)};
  const Scalar sl = sqrt(L), sm = sqrt(mu);
  const Scalar rho = (sl - sm) / (sl + sm);
  const Scalar r2 = rho * rho;
  const Scalar m = r2 * (Scalar(1) + pow(r2, Scalar(t - 1))) /
                   (Scalar(1) + pow(r2, Scalar(t + 1)));
  return {h * (Scalar(1) + m), m};
}

template <typename Scalar>
SolverState<Scalar> chebyshev_step(SolverState<Scalar> s,
                                   const QuadraticProblem<Scalar>& p) {
  if (s.converged) return s;
  const auto params = chebyshev_params(p.mu(), p.L(), s.t);
  detail::heavy_ball_move(s, p, params.gamma, params.momentum,
                          Scalar(2) / (p.L() + p.mu()));
  return s;
}

// ---------------------------------------------------------------------------
// Runs and trajectories

enum class MethodKind {
  gd_constant,
  gd_polyak,
  gd_polyak_2x,
  hb_constant,
  chebyshev,
  hb_polyak,
  q_min,
  cg,
};

template <typename Scalar>
struct MethodConfig {
  MethodKind kind = MethodKind::hb_polyak;
  /// Only used by q_min.
  QPolynomial<Scalar> q{};
  /// Value handed to the Polyak-type methods; the problem's f* when empty.
  std::optional<Scalar> f_star{};

  std::string name() const {
    switch (kind) {
      case MethodKind::gd_constant: return "gd-constant";
      case MethodKind::gd_polyak: return "gd-polyak";
      case MethodKind::gd_polyak_2x: return "gd-polyak-2x";
      case MethodKind::hb_constant: return "hb-constant";
      case MethodKind::chebyshev: return "chebyshev";
      case MethodKind::hb_polyak: return "hb-polyak";
      case MethodKind::q_min: return "qmin:" + q.to_string();
      case MethodKind::cg: return "cg";
    }
    return "unknown";
  }
};

template <typename Scalar>
struct IterationRecord {
  Index t = 0;
  Scalar dist_sq{};
  Scalar excess{};
  Scalar grad_norm_sq{};
  /// Parameters of the step that produced x_t; NaN at t = 0.
  Scalar h = unset<Scalar>();
  Scalar m = unset<Scalar>();
  Scalar gamma = unset<Scalar>();
};

template <typename Scalar>
struct Trajectory {
  std::string method;
  std::vector<IterationRecord<Scalar>> records;
  /// x_0, x_1, ... when RunOptions::keep_iterates is set.
  std::vector<Vector<Scalar>> iterates;
  bool converged = false;
  double wall_time_seconds = 0.0;

  Index iterations() const { return static_cast<Index>(records.size()) - 1; }
};

template <typename Scalar>
struct RunOptions {
  /// Absolute stopping threshold on ||grad f||; NaN selects
  /// default_grad_tol.
  Scalar grad_tol = unset<Scalar>();
  bool keep_iterates = false;
};

/// A solver error raised inside run(), tagged with the failing iteration and
/// carrying everything recorded before it.
template <typename Scalar>
class RunError : public SolverError {
 public:
  RunError(Trajectory<Scalar> partial, Index iteration, const std::string& cause)
      : SolverError(partial.method + ": iteration " + std::to_string(iteration) +
                    ": " + cause),
        partial_(std::move(partial)),
        iteration_(iteration),
        cause_(cause) {}

  const Trajectory<Scalar>& partial() const noexcept { return partial_; }
  Index iteration() const noexcept { return iteration_; }
  const std::string& cause() const noexcept { return cause_; }

 private:
  Trajectory<Scalar> partial_;
  Index iteration_;
  std::string cause_;
};

namespace detail {

template <typename Scalar>
IterationRecord<Scalar> make_record(const QuadraticProblem<Scalar>& p, Index t,
                                    const Vector<Scalar>& x, Scalar f,
                                    const Vector<Scalar>& grad, Scalar h,
                                    Scalar m, Scalar gamma) {
  IterationRecord<Scalar> r;
  r.t = t;
  r.dist_sq = (x - p.x_star()).squaredNorm();
  r.excess = f - p.f_star();
  r.grad_norm_sq = grad.squaredNorm();
  r.h = h;
  r.m = m;
  r.gamma = gamma;
  return r;
}

template <typename Scalar>
void record(Trajectory<Scalar>& traj, const QuadraticProblem<Scalar>& p,
            const SolverState<Scalar>& s, bool keep_iterates) {
  traj.records.push_back(make_record(p, s.t, s.x_curr, s.f_curr, s.grad_curr,
                                     s.h_curr, s.m_curr, s.gamma_curr));
  if (keep_iterates) traj.iterates.push_back(s.x_curr);
}

/// Hestenes-Stiefel conjugate gradient on H x = H x*. Each step is also
/// recorded in Heavy-ball form: gamma_t = alpha_t and
/// m_t = alpha_t beta_{t-1} / alpha_{t-1}.
template <typename Scalar>
void cg_loop(Trajectory<Scalar>& traj, const QuadraticProblem<Scalar>& p,
             const Vector<Scalar>& x0, Index T, Scalar grad_tol,
             bool keep_iterates) {
  using std::sqrt;
  const Matrix<Scalar>& H = p.hessian();
  Vector<Scalar> x = x0;
  Vector<Scalar> g = grad_f(p, x);
  Vector<Scalar> dir = -g;
  Scalar gg = g.squaredNorm();
  Scalar alpha_prev = Scalar(0), beta_prev = Scalar(0);
  traj.records.push_back(make_record(p, Index(0), x, eval_f_with_grad(p, x, g), g,
                                     unset<Scalar>(), unset<Scalar>(),
                                     unset<Scalar>()));
  if (keep_iterates) traj.iterates.push_back(x);
  traj.converged = sqrt(gg) <= grad_tol;
  for (Index t = 0; t < T && !traj.converged; ++t) {
    const Vector<Scalar> hd = H * dir;
    const Scalar curvature = dir.dot(hd);
    if (!(curvature > Scalar(0)))
      throw BreakdownError("conjugate gradient direction has non-positive curvature");
    const Scalar alpha = gg / curvature;
    const Scalar m = t == 0 ? Scalar(0) : alpha * beta_prev / alpha_prev;
    x += alpha * dir;
    g = grad_f(p, x);
    const Scalar gg_next = g.squaredNorm();
    const Scalar beta = gg_next / gg;
    dir = -g + beta * dir;
    traj.records.push_back(make_record(p, t + 1, x, eval_f_with_grad(p, x, g), g,
                                       alpha / (Scalar(1) + m), m, alpha));
    if (keep_iterates) traj.iterates.push_back(x);
    gg = gg_next;
    alpha_prev = alpha;
    beta_prev = beta;
    traj.converged = sqrt(gg) <= grad_tol;
  }
}

}  // namespace detail

/// Applies one method for T steps or until ||grad f(x_t)|| <= grad_tol.
/// Solver errors come back as RunError with the partial trajectory.
template <typename Scalar>
Trajectory<Scalar> run(const MethodConfig<Scalar>& config,
                       const QuadraticProblem<Scalar>& p, const Vector<Scalar>& x0,
                       Index T, const RunOptions<Scalar>& options = {}) {
  if (T < 0) throw ValidationError("iteration count must be >= 0");
  check_dim(p, x0);
  const Scalar grad_tol = std::isnan(static_cast<double>(options.grad_tol))
                              ? default_grad_tol(p, x0)
                              : options.grad_tol;
  const Scalar f_star = config.f_star.value_or(p.f_star());
  Trajectory<Scalar> traj;
  traj.method = config.name();
  const auto start = std::chrono::steady_clock::now();
  const auto finish = [&] {
    traj.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  if (config.kind == MethodKind::cg) {
    try {
      detail::cg_loop(traj, p, x0, T, grad_tol, options.keep_iterates);
    } catch (const SolverError& e) {
      finish();
      const Index at = traj.iterations();
      throw RunError<Scalar>(std::move(traj), at, e.what());
    }
    finish();
    return traj;
  }

  const auto hb = stationary_hb_params(p.mu(), p.L());
  const Scalar gd_gamma = Scalar(2) / (p.L() + p.mu());
  SolverState<Scalar> s = init_state(p, x0, grad_tol);
  detail::record(traj, p, s, options.keep_iterates);
  try {
    while (s.t < T && !s.converged) {
      switch (config.kind) {
        case MethodKind::gd_constant: s = gd_constant_step(std::move(s), p, gd_gamma); break;
        case MethodKind::gd_polyak: s = gd_polyak_step(std::move(s), p, Scalar(1), f_star); break;
        case MethodKind::gd_polyak_2x: s = gd_polyak_step(std::move(s), p, Scalar(2), f_star); break;
        case MethodKind::hb_constant: s = hb_constant_step(std::move(s), p, hb.gamma, hb.momentum); break;
        case MethodKind::chebyshev: s = chebyshev_step(std::move(s), p); break;
        case MethodKind::hb_polyak: s = adaptive_hb_step(std::move(s), p, f_star); break;
        case MethodKind::q_min: {
          const Index before = s.t;
          s = q_min_hb_step(std::move(s), p, config.q);
          if (s.t == before) continue;  // flagged converged without moving
          break;
        }
        case MethodKind::cg: break;
      }
      detail::record(traj, p, s, options.keep_iterates);
    }
  } catch (const SolverError& e) {
    finish();
    traj.converged = false;
    throw RunError<Scalar>(std::move(traj), s.t, e.what());
  }
  traj.converged = s.converged;
  finish();
  return traj;
}

/// Classical conjugate gradient, recorded like every other method.
template <typename Scalar>
Trajectory<Scalar> cg_classic(const QuadraticProblem<Scalar>& p,
                              const Vector<Scalar>& x0, Index T,
                              const RunOptions<Scalar>& options = {}) {
  return run(MethodConfig<Scalar>{MethodKind::cg, {}, {}}, p, x0, T, options);
}

/// (h_t, m_t) of every step t -> t+1 of a trajectory.
template <typename Scalar>
std::vector<std::pair<Scalar, Scalar>> step_coefficients(const Trajectory<Scalar>& traj) {
  std::vector<std::pair<Scalar, Scalar>> out;
  for (std::size_t i = 1; i < traj.records.size(); ++i)
    out.emplace_back(traj.records[i].h, traj.records[i].m);
  return out;
}

}  // namespace hbpolyak
