#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "hbpolyak/errors.hpp"
#include "hbpolyak/q_polynomial.hpp"
#include "hbpolyak/quadratic_problem.hpp"
#include "hbpolyak/solvers.hpp"

namespace hbpolyak {

/// Q(H)-orthonormal basis of span{H e0, H^2 e0, ..., H^order e0}.
///
/// Each new direction is H applied to the latest basis vector, which spans
/// the same space as the raw powers but keeps the Gram-Schmidt step well
/// conditioned. A direction whose weighted norm after two orthogonalization
/// passes is below rank_tol times the largest weighted norm seen so far is
/// dropped, and the space is then invariant under H so the basis stops
/// growing.
template <typename Scalar>
struct KrylovBasis {
  std::vector<Vector<Scalar>> columns;
  /// Q(H) applied to each column.
  std::vector<Vector<Scalar>> weighted;
  Index effective_rank = 0;
  Index requested_order = 0;
  Scalar rank_tol{};

  /// <u, v>_Q against column i, v arbitrary.
  template <typename Derived>
  Scalar weighted_dot(std::size_t i, const Eigen::MatrixBase<Derived>& v) const {
    return weighted[i].dot(v);
  }

  /// Two passes of modified Gram-Schmidt in the Q(H) inner product; the
  /// second pass cleans up what cancellation left behind in the first.
  template <typename Derived>
  Vector<Scalar> orthogonalize(const Eigen::MatrixBase<Derived>& v) const {
    Vector<Scalar> r = v;
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t i = 0; i < columns.size(); ++i)
        r -= weighted_dot(i, r) * columns[i];
    return r;
  }
};

template <typename Scalar>
KrylovBasis<Scalar> krylov_basis(const QuadraticProblem<Scalar>& p,
                                 const Vector<Scalar>& e0, Index order,
                                 const QPolynomial<Scalar>& q,
                                 Scalar rank_tol = Scalar(1e-12)) {
  using std::sqrt;
  check_dim(p, e0);
  const Matrix<Scalar>& H = p.hessian();
  KrylovBasis<Scalar> basis;
  basis.requested_order = order;
  basis.rank_tol = rank_tol;
  Scalar largest = Scalar(0);
  Vector<Scalar> candidate = H * e0;
  for (Index k = 0; k < order; ++k) {
    if (k > 0) candidate = H * basis.columns.back();
    const Scalar before2 = candidate.dot(q.apply(H, candidate));
    const Scalar before = before2 > Scalar(0) ? sqrt(before2) : Scalar(0);
    largest = std::max(largest, before);
    Vector<Scalar> r = basis.orthogonalize(candidate);
    Vector<Scalar> qr = q.apply(H, r);
    const Scalar after2 = r.dot(qr);
    const Scalar after = after2 > Scalar(0) ? sqrt(after2) : Scalar(0);
    if (!(largest > Scalar(0)) || after <= rank_tol * largest) break;
    basis.columns.push_back(r / after);
    basis.weighted.push_back(qr / after);
  }
  basis.effective_rank = static_cast<Index>(basis.columns.size());
  return basis;
}

/// Minimizer of <x - x*, Q(H)(x - x*)> over x0 + span{g_0, ..., g_t}, i.e.
/// the iterate x_{t+1} of the Q-minimization method, computed directly from
/// an explicit Krylov basis. When the Krylov space is exhausted before order
/// t + 1 the projection onto the full reachable space is returned.
template <typename Scalar>
Vector<Scalar> krylov_project(const QuadraticProblem<Scalar>& p,
                              const Vector<Scalar>& x0, Index t,
                              const QPolynomial<Scalar>& q,
                              Scalar rank_tol = Scalar(1e-12)) {
  if (t < 0) throw ValidationError("projection order must be >= 0");
  check_dim(p, x0);
  q.check_positive_on(p);
  const Vector<Scalar> e0 = x0 - p.x_star();
  const KrylovBasis<Scalar> basis = krylov_basis(p, e0, t + 1, q, rank_tol);
  return p.x_star() + basis.orthogonalize(e0);
}

/// <x - x*, Q(H)(x - x*)>.
template <typename Scalar>
Scalar q_metric(const QuadraticProblem<Scalar>& p, const Vector<Scalar>& x,
                const QPolynomial<Scalar>& q) {
  const Vector<Scalar> e = x - p.x_star();
  return e.dot(q.apply(p.hessian(), e));
}

template <typename Scalar>
struct OracleDeviation {
  Index t = 0;
  /// ||x_t - oracle_t|| / ||x0 - x*||.
  Scalar distance{};
  /// Q-metric of x_t minus Q-metric of oracle_t. Nonnegative up to roundoff.
  Scalar q_gap{};
  /// q_gap / Q-metric of x0.
  Scalar q_gap_relative{};
};

/// Compares every stored iterate of `traj` against the oracle. The
/// trajectory must have been run with keep_iterates.
template <typename Scalar>
std::vector<OracleDeviation<Scalar>> instance_optimality_report(
    const QuadraticProblem<Scalar>& p, const Vector<Scalar>& x0, Index T,
    const QPolynomial<Scalar>& q, const Trajectory<Scalar>& traj) {
  if (traj.iterates.size() != traj.records.size())
    throw InvalidTrajectoryError("trajectory has no stored iterates");
  const Scalar e0_norm = (x0 - p.x_star()).norm();
  const Scalar metric0 = q_metric(p, x0, q);
  const Scalar dist_scale = e0_norm > Scalar(0) ? e0_norm : Scalar(1);
  const Scalar metric_scale = metric0 > Scalar(0) ? metric0 : Scalar(1);
  const Index last = std::min<Index>(T, static_cast<Index>(traj.iterates.size()) - 1);
  std::vector<OracleDeviation<Scalar>> out;
  for (Index t = 0; t <= last; ++t) {
    const Vector<Scalar>& x = traj.iterates[static_cast<std::size_t>(t)];
    const Vector<Scalar> oracle = t == 0 ? x0 : krylov_project(p, x0, t - 1, q);
    OracleDeviation<Scalar> d;
    d.t = t;
    d.distance = (x - oracle).norm() / dist_scale;
    d.q_gap = q_metric(p, x, q) - q_metric(p, oracle, q);
    d.q_gap_relative = d.q_gap / metric_scale;
    out.push_back(d);
  }
  return out;
}

}  // namespace hbpolyak
