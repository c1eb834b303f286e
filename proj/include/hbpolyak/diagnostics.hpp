#pragma once

#include <algorithm>
#include <cmath>

#include "hbpolyak/quadratic_problem.hpp"
#include "hbpolyak/solvers.hpp"

namespace hbpolyak {

/// Largest normalized residual of a property check and where it occurred.
struct Worst {
  double value = 0.0;
  Index t = -1;
  Index s = -1;

  void update(double v, Index at_t, Index at_s = -1) {
    if (v > value || t < 0) {
      value = v;
      t = at_t;
      s = at_s;
    }
  }
};

/// Eigenvalues of H that differ by more than rel_tol * L.
template <typename Scalar>
Index distinct_eigenvalue_count(const QuadraticProblem<Scalar>& p, Scalar rel_tol = Scalar(1e-12)) {
  const auto& v = p.eigenvalues();
  Index n = 1;
  Scalar anchor = v(0);
  for (Index i = 1; i < v.size(); ++i) {
    if (v(i) - anchor > rel_tol * p.L()) {
      ++n;
      anchor = v(i);
    }
  }
  return n;
}

/// max over s < t <= T of |<g_s, g_t>| / (||g_s|| ||g_0||). Vanishes for the
/// Q = X method (conjugate gradient).
template <typename Scalar>
Worst gradient_orthogonality(const QuadraticProblem<Scalar>& p,
                             const Trajectory<Scalar>& traj, Index T) {
  Worst w;
  const Index last = std::min<Index>(T, static_cast<Index>(traj.iterates.size()) - 1);
  if (last < 1) return w;
  std::vector<Vector<Scalar>> g;
  for (Index t = 0; t <= last; ++t) g.push_back(grad_f(p, traj.iterates[static_cast<std::size_t>(t)]));
  const double g0 = static_cast<double>(g[0].norm());
  for (Index t = 1; t <= last; ++t) {
    for (Index s = 0; s < t; ++s) {
      const double gs = static_cast<double>(g[static_cast<std::size_t>(s)].norm());
      if (gs == 0.0) continue;
      const double r = std::abs(static_cast<double>(
                           g[static_cast<std::size_t>(s)].dot(g[static_cast<std::size_t>(t)]))) /
                       (gs * g0);
      w.update(r, t, s);
    }
  }
  return w;
}

/// max over s < t <= T of |<g_t, x_s - x*>| / (||g_t|| ||x_0 - x*||).
/// Vanishes for the Q = 1 method. The final iterate of a converged run has a
/// gradient at rounding level and is skipped.
template <typename Scalar>
Worst error_orthogonality(const QuadraticProblem<Scalar>& p,
                          const Trajectory<Scalar>& traj, Index T) {
  Worst w;
  const Index stored = static_cast<Index>(traj.iterates.size()) - 1;
  const Index last = std::min<Index>(T, traj.converged ? stored - 1 : stored);
  if (last < 1) return w;
  const double e0 = static_cast<double>((traj.iterates[0] - p.x_star()).norm());
  for (Index t = 1; t <= last; ++t) {
    const Vector<Scalar> gt = grad_f(p, traj.iterates[static_cast<std::size_t>(t)]);
    const double gn = static_cast<double>(gt.norm());
    if (gn == 0.0) continue;
    for (Index s = 0; s < t; ++s) {
      const Vector<Scalar> es = traj.iterates[static_cast<std::size_t>(s)] - p.x_star();
      w.update(std::abs(static_cast<double>(gt.dot(es))) / (gn * e0), t, s);
    }
  }
  return w;
}

/// Largest ||x_{t+1} - x*|| / ||x_t - x*|| - 1 (zero or less when monotone).
template <typename Scalar>
Worst distance_growth(const Trajectory<Scalar>& traj) {
  Worst w;
  for (std::size_t i = 1; i < traj.records.size(); ++i) {
    const double before = std::sqrt(static_cast<double>(traj.records[i - 1].dist_sq));
    const double after = std::sqrt(static_cast<double>(traj.records[i].dist_sq));
    if (before == 0.0) continue;
    w.update(after / before - 1.0, static_cast<Index>(i));
  }
  return w;
}

/// ||x_t - x*|| of a trajectory, holding the last value after it stopped.
template <typename Scalar>
double distance_at(const Trajectory<Scalar>& traj, Index t) {
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), traj.records.size() - 1);
  return std::sqrt(static_cast<double>(traj.records[i].dist_sq));
}

/// max over t <= T of (||x_t^ref - x*|| - ||x_t^other - x*||) / scale.
/// Nonpositive when `reference` is never farther from x* than `other`.
template <typename Scalar>
Worst distance_excess_over(const Trajectory<Scalar>& reference,
                           const Trajectory<Scalar>& other, Index T, double scale) {
  Worst w;
  for (Index t = 0; t <= T; ++t)
    w.update((distance_at(reference, t) - distance_at(other, t)) / scale, t);
  return w;
}

}  // namespace hbpolyak
