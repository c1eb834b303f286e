#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "hbpolyak/errors.hpp"
#include "hbpolyak/q_polynomial.hpp"
#include "hbpolyak/quadratic_problem.hpp"
#include "hbpolyak/solvers.hpp"

namespace hbpolyak {

/// P with P(0) = 1 such that x_t - x* = P(H)(x0 - x*). Monomial basis,
/// constant term first.
template <typename Scalar>
class ResidualPolynomial {
 public:
  /// Beyond this the monomial basis is useless in double precision.
  static constexpr std::size_t max_degree = 60;

  ResidualPolynomial() : coeffs_{Scalar(1)} {}

  explicit ResidualPolynomial(std::vector<Scalar> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty() || coeffs_[0] != Scalar(1))
      throw ValidationError("residual polynomial must satisfy P(0) = 1");
    if (coeffs_.size() > max_degree + 1)
      throw ValidationError("residual polynomial degree exceeds the cap of 60");
  }

  const std::vector<Scalar>& coeffs() const noexcept { return coeffs_; }
  std::size_t degree() const noexcept { return coeffs_.size() - 1; }

  Scalar operator()(Scalar x) const {
    Scalar acc = coeffs_.back();
    for (std::size_t k = coeffs_.size() - 1; k-- > 0;) acc = acc * x + coeffs_[k];
    return acc;
  }

 private:
  std::vector<Scalar> coeffs_;
};

/// Discrete measure sum_i w_i delta_{lambda_i}.
template <typename Scalar>
struct SpectralMeasure {
  struct Atom {
    Scalar lambda;
    Scalar weight;
  };
  std::vector<Atom> atoms;

  Scalar total_mass() const {
    Scalar s = Scalar(0);
    for (const auto& a : atoms) s += a.weight;
    return s;
  }

  /// Atoms carrying positive weight.
  std::size_t support_size() const {
    std::size_t n = 0;
    for (const auto& a : atoms) n += a.weight > Scalar(0) ? 1 : 0;
    return n;
  }

  /// lambda -> lambda * w(lambda); turns the Q measure into the XQ measure.
  SpectralMeasure times_x() const {
    SpectralMeasure out;
    out.atoms.reserve(atoms.size());
    for (const auto& a : atoms) out.atoms.push_back({a.lambda, a.lambda * a.weight});
    return out;
  }
};

/// Atoms at the distinct eigenvalues of H with weights Q(lambda) times the
/// squared norm of the projection of x0 - x* on the eigenspace. Eigenvalues
/// closer than 1e-12 L are merged.
template <typename Scalar>
SpectralMeasure<Scalar> measure_from_problem(const QuadraticProblem<Scalar>& p,
                                             const Vector<Scalar>& x0,
                                             const QPolynomial<Scalar>& q) {
  check_dim(p, x0);
  const Vector<Scalar> coords = p.eigenvectors().transpose() * (x0 - p.x_star());
  const auto& values = p.eigenvalues();
  const Scalar merge_tol = Scalar(1e-12) * p.L();
  SpectralMeasure<Scalar> m;
  Index i = 0;
  while (i < values.size()) {
    const Scalar lambda = values(i);
    Scalar mass = Scalar(0);
    while (i < values.size() && values(i) - lambda <= merge_tol) {
      mass += coords(i) * coords(i);
      ++i;
    }
    m.atoms.push_back({lambda, q(lambda) * mass});
  }
  return m;
}

template <typename Scalar>
Scalar inner_product(const ResidualPolynomial<Scalar>& P,
                     const ResidualPolynomial<Scalar>& R,
                     const SpectralMeasure<Scalar>& m) {
  Scalar s = Scalar(0);
  for (const auto& a : m.atoms) s += a.weight * P(a.lambda) * R(a.lambda);
  return s;
}

namespace detail {

template <typename Scalar>
Scalar x_inner_product(const ResidualPolynomial<Scalar>& P,
                       const ResidualPolynomial<Scalar>& R,
                       const SpectralMeasure<Scalar>& m) {
  Scalar s = Scalar(0);
  for (const auto& a : m.atoms) s += a.weight * a.lambda * P(a.lambda) * R(a.lambda);
  return s;
}

template <typename Scalar>
bool exhausted(Scalar norm_sq, const SpectralMeasure<Scalar>& m) {
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  return !(norm_sq > Scalar(256) * eps * eps * m.total_mass());
}

}  // namespace detail

/// Coefficients making P_{t+1} = ((a - X) P_t + b P_{t-1}) / (a + b) orthogonal
/// to P_t and P_{t-1} under `m_xq`:
///   a = <X P_t, P_t> / <P_t, P_t>,  b = <X P_t, P_{t-1}> / <P_{t-1}, P_{t-1}>.
/// Without P_{t-1} (t = 0), b = 0. Throws MeasureExhausted when a norm
/// vanishes.
template <typename Scalar>
RecursionCoeffs<Scalar> recursion_coeffs(const ResidualPolynomial<Scalar>& P_t,
                                         const ResidualPolynomial<Scalar>* P_tm1,
                                         const SpectralMeasure<Scalar>& m_xq) {
  const Scalar nt = inner_product(P_t, P_t, m_xq);
  if (detail::exhausted(nt, m_xq))
    throw MeasureExhausted("measure exhausted at degree " + std::to_string(P_t.degree()));
  const Scalar a = detail::x_inner_product(P_t, P_t, m_xq) / nt;
  Scalar b = Scalar(0);
  if (P_tm1 != nullptr) {
    const Scalar np = inner_product(*P_tm1, *P_tm1, m_xq);
    if (detail::exhausted(np, m_xq))
      throw MeasureExhausted("measure exhausted at degree " + std::to_string(P_tm1->degree()));
    b = detail::x_inner_product(P_t, *P_tm1, m_xq) / np;
  }
  return RecursionCoeffs<Scalar>::from(a, b);
}

/// ((a - X) P_t + b P_{t-1}) / c. The constant term is (a + b) / c, which is
/// exactly 1 since c is computed as a + b.
template <typename Scalar>
ResidualPolynomial<Scalar> next_residual_polynomial(
    const ResidualPolynomial<Scalar>& P_t, const ResidualPolynomial<Scalar>& P_tm1,
    const RecursionCoeffs<Scalar>& c) {
  const auto& p = P_t.coeffs();
  const auto& r = P_tm1.coeffs();
  std::vector<Scalar> out(p.size() + 1, Scalar(0));
  for (std::size_t k = 0; k < p.size(); ++k) {
    out[k] += c.a_tilde * p[k];
    out[k + 1] -= p[k];
  }
  for (std::size_t k = 0; k < r.size(); ++k) out[k] += c.b_tilde * r[k];
  for (auto& v : out) v /= c.c_tilde;
  return ResidualPolynomial<Scalar>(std::move(out));
}

/// P_0, ..., P_T minimizing ||P_t||_Q under P_t(0) = 1, generated by the
/// three-term recursion under the XQ measure. Stops early once the support of
/// the measure is exhausted; the last polynomial then vanishes on it.
template <typename Scalar>
std::vector<ResidualPolynomial<Scalar>> orthogonal_residual_family(
    const SpectralMeasure<Scalar>& m_q, std::size_t T) {
  const SpectralMeasure<Scalar> m_xq = m_q.times_x();
  const std::size_t support = m_xq.support_size();
  std::vector<ResidualPolynomial<Scalar>> family{ResidualPolynomial<Scalar>()};
  while (family.size() <= T && family.size() <= support) {
    const std::size_t t = family.size() - 1;
    const ResidualPolynomial<Scalar>* prev = t > 0 ? &family[t - 1] : nullptr;
    RecursionCoeffs<Scalar> c;
    try {
      c = recursion_coeffs(family[t], prev, m_xq);
    } catch (const MeasureExhausted&) {
      break;
    }
    family.push_back(next_residual_polynomial(family[t], prev ? *prev : family[t], c));
  }
  return family;
}

/// Rebuilds P_0, ..., P_T from the (natural step, momentum) pairs of a
/// Heavy-ball-family run: gamma = (1 + m) h, c = 1 / gamma, b = -m c,
/// a = c - b.
template <typename Scalar>
std::vector<ResidualPolynomial<Scalar>> polys_from_trajectory(
    const std::vector<std::pair<Scalar, Scalar>>& steps) {
  std::vector<ResidualPolynomial<Scalar>> out{ResidualPolynomial<Scalar>()};
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const auto [h, m] = steps[t];
    if (!std::isfinite(static_cast<double>(h)) || !std::isfinite(static_cast<double>(m)) ||
        h == Scalar(0) || m == Scalar(-1))
      throw InvalidTrajectoryError("step " + std::to_string(t) +
                                   " has an unusable natural step or momentum");
    const Scalar c = Scalar(1) / ((Scalar(1) + m) * h);
    const Scalar b = -m * c;
    RecursionCoeffs<Scalar> coeffs{c - b, b, Scalar(0), b};
    coeffs.c_tilde = coeffs.a_tilde + coeffs.b_tilde;
    const auto& prev = t > 0 ? out[t - 1] : out[t];
    out.push_back(next_residual_polynomial(out[t], prev, coeffs));
  }
  return out;
}

/// Direct solution of min ||P||_Q^2 s.t. P(0) = 1, deg P <= t: with
/// P = 1 + sum_k c_k X^k the normal equations are
///   sum_k <X^j, X^k>_Q c_k = -<X^j, 1>_Q,  j = 1..t.
/// Small sizes only.
template <typename Scalar>
ResidualPolynomial<Scalar> least_squares_residual_polynomial(
    const SpectralMeasure<Scalar>& m_q, std::size_t t) {
  using std::pow;
  if (t == 0) return ResidualPolynomial<Scalar>();
  const auto n = static_cast<Index>(t);
  Matrix<Scalar> gram = Matrix<Scalar>::Zero(n, n);
  Vector<Scalar> rhs = Vector<Scalar>::Zero(n);
  for (const auto& a : m_q.atoms) {
    for (Index j = 0; j < n; ++j) {
      const Scalar lj = pow(a.lambda, Scalar(j + 1));
      rhs(j) -= a.weight * lj;
      for (Index k = 0; k < n; ++k)
        gram(j, k) += a.weight * lj * pow(a.lambda, Scalar(k + 1));
    }
  }
  const Vector<Scalar> c = gram.ldlt().solve(rhs);
  std::vector<Scalar> coeffs(t + 1);
  coeffs[0] = Scalar(1);
  for (Index k = 0; k < n; ++k) coeffs[static_cast<std::size_t>(k + 1)] = c(k);
  return ResidualPolynomial<Scalar>(std::move(coeffs));
}

/// max_i |P(lambda_i) <e0, v_i> - <x - x*, v_i>| over the eigenbasis of H,
/// i.e. how far x - x* is from P(H)(x0 - x*).
template <typename Scalar>
Scalar polynomial_mismatch(const QuadraticProblem<Scalar>& p, const Vector<Scalar>& x0,
                           const ResidualPolynomial<Scalar>& P, const Vector<Scalar>& x) {
  using std::abs;
  const Vector<Scalar> c0 = p.eigenvectors().transpose() * (x0 - p.x_star());
  const Vector<Scalar> ct = p.eigenvectors().transpose() * (x - p.x_star());
  Scalar worst = Scalar(0);
  for (Index i = 0; i < c0.size(); ++i)
    worst = std::max(worst, abs(P(p.eigenvalues()(i)) * c0(i) - ct(i)));
  return worst;
}

}  // namespace hbpolyak
