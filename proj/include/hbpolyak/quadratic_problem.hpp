#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hbpolyak/errors.hpp"

namespace hbpolyak {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

enum class SpectrumKind { geometric, uniform, explicit_list };

/// Describes the eigenvalues of a generated Hessian plus the seed of the
/// random rotation applied to them.
struct SpectrumSpec {
  SpectrumKind kind = SpectrumKind::geometric;
  Index dim = 1;
  double mu = 1.0;
  double L = 1.0;
  std::vector<double> values;  // explicit_list only
  std::uint64_t seed = 0;

  static SpectrumSpec geometric(Index dim, double mu, double L,
                                std::uint64_t seed = 0);
  static SpectrumSpec uniform(Index dim, double mu, double L,
                              std::uint64_t seed = 0);
  static SpectrumSpec explicit_list(std::vector<double> values,
                                    std::uint64_t seed = 0);

  /// Throws ValidationError when the fields are inconsistent.
  void validate() const;

  /// Eigenvalues in ascending order. Geometric spectra hit mu and L exactly
  /// at both ends.
  std::vector<double> eigenvalues() const;
};

/// One nonnegative eigenvalue per line; blank lines and lines starting with
/// '#' are skipped.
std::vector<double> parse_spectrum(std::istream& in);
std::vector<double> read_spectrum_file(const std::filesystem::path& path);

/// Tag requesting a Gaussian random minimizer in make_problem.
struct RandomOptimum {};

/// f(x) = 1/2 <x - x*, H (x - x*)> + f*, with H symmetric positive
/// semi-definite. Immutable once built; the eigendecomposition of H is kept
/// alongside it.
template <typename Scalar>
class QuadraticProblem {
 public:
  using VectorType = Vector<Scalar>;
  using MatrixType = Matrix<Scalar>;

  /// Builds H = V diag(eigenvalues) V^T. V must have orthonormal columns.
  QuadraticProblem(const VectorType& eigenvalues, const MatrixType& eigenvectors,
                   VectorType x_star, Scalar f_star)
      : x_star_(std::move(x_star)), f_star_(f_star) {
    if (eigenvalues.size() < 1) throw ValidationError("dimension must be >= 1");
    if (eigenvectors.rows() != eigenvalues.size() ||
        eigenvectors.cols() != eigenvalues.size())
      throw ValidationError("eigenvector matrix does not match eigenvalue count");
    hessian_ = eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
    hessian_ = (hessian_ + hessian_.transpose()).eval() / Scalar(2);
    set_spectrum(eigenvalues, eigenvectors);
    check_dims();
  }

  /// Builds the problem from an explicit symmetric H.
  QuadraticProblem(MatrixType hessian, VectorType x_star, Scalar f_star)
      : hessian_(std::move(hessian)), x_star_(std::move(x_star)), f_star_(f_star) {
    using std::abs;
    if (hessian_.rows() < 1) throw ValidationError("dimension must be >= 1");
    if (hessian_.rows() != hessian_.cols())
      throw ValidationError("Hessian must be square");
    const Scalar scale = hessian_.norm();
    if ((hessian_ - hessian_.transpose()).norm() > Scalar(1e-12) * scale)
      throw ValidationError("Hessian is not symmetric");
    Eigen::SelfAdjointEigenSolver<MatrixType> eig(hessian_);
    VectorType values = eig.eigenvalues();
    for (Index i = 0; i < values.size(); ++i) {
      if (values(i) < -Scalar(1e-12) * scale)
        throw ValidationError("Hessian has a negative eigenvalue");
      if (values(i) < Scalar(0)) values(i) = Scalar(0);
    }
    set_spectrum(values, eig.eigenvectors());
    check_dims();
  }

  Index dim() const noexcept { return hessian_.rows(); }
  const MatrixType& hessian() const noexcept { return hessian_; }
  const VectorType& x_star() const noexcept { return x_star_; }
  Scalar f_star() const noexcept { return f_star_; }
  /// Ascending.
  const VectorType& eigenvalues() const noexcept { return eigenvalues_; }
  /// Column i pairs with eigenvalues()(i).
  const MatrixType& eigenvectors() const noexcept { return eigenvectors_; }
  Scalar mu() const noexcept { return mu_; }
  Scalar L() const noexcept { return L_; }
  Scalar condition_number() const noexcept { return L_ / mu_; }

  /// h in f(x) = 1/2 <x, Hx> + <h, x> + const.
  VectorType linear_term() const { return -(hessian_ * x_star_); }

 private:
  void set_spectrum(const VectorType& values, const MatrixType& vectors) {
    std::vector<Index> order(static_cast<std::size_t>(values.size()));
    for (Index i = 0; i < values.size(); ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return values(a) < values(b); });
    eigenvalues_.resize(values.size());
    eigenvectors_.resize(vectors.rows(), vectors.cols());
    for (Index i = 0; i < values.size(); ++i) {
      const Index src = order[static_cast<std::size_t>(i)];
      if (values(src) < Scalar(0))
        throw ValidationError("eigenvalues must be nonnegative");
      eigenvalues_(i) = values(src);
      eigenvectors_.col(i) = vectors.col(src);
    }
    L_ = eigenvalues_(eigenvalues_.size() - 1);
    // Eigenvalues at roundoff level relative to L are treated as the kernel.
    const Scalar zero_tol = Scalar(64) * Eigen::NumTraits<Scalar>::epsilon() * L_;
    mu_ = Scalar(0);
    for (Index i = 0; i < eigenvalues_.size(); ++i) {
      if (eigenvalues_(i) > zero_tol) {
        mu_ = eigenvalues_(i);
        break;
      }
    }
  }

  void check_dims() const {
    if (x_star_.size() != hessian_.rows())
      throw ValidationError("x* dimension does not match the Hessian");
  }

  MatrixType hessian_;
  VectorType x_star_;
  Scalar f_star_;
  VectorType eigenvalues_;
  MatrixType eigenvectors_;
  Scalar mu_{};
  Scalar L_{};
};

/// Haar-distributed orthogonal matrix: QR of a standard Gaussian matrix with
/// the columns of Q flipped so that R has a positive diagonal.
template <typename Scalar, typename Rng>
Matrix<Scalar> random_orthogonal(Index dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix<Scalar> gaussian(dim, dim);
  for (Index j = 0; j < dim; ++j)
    for (Index i = 0; i < dim; ++i) gaussian(i, j) = Scalar(normal(rng));
  Eigen::HouseholderQR<Matrix<Scalar>> qr(gaussian);
  Matrix<Scalar> q = qr.householderQ() * Matrix<Scalar>::Identity(dim, dim);
  const Matrix<Scalar>& r = qr.matrixQR();
  for (Index j = 0; j < dim; ++j)
    if (r(j, j) < Scalar(0)) q.col(j) = -q.col(j);
  return q;
}

namespace detail {

template <typename Scalar>
Vector<Scalar> spectrum_vector(const SpectrumSpec& spec) {
  spec.validate();
  const std::vector<double> values = spec.eigenvalues();
  Vector<Scalar> out(static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i)
    out(static_cast<Index>(i)) = Scalar(values[i]);
  return out;
}

}  // namespace detail

/// Random rotation of the spectrum in `spec`, with an explicit minimizer.
template <typename Scalar>
QuadraticProblem<Scalar> make_problem(const SpectrumSpec& spec,
                                      const Vector<Scalar>& x_star,
                                      Scalar f_star) {
  const Vector<Scalar> values = detail::spectrum_vector<Scalar>(spec);
  std::mt19937_64 rng(spec.seed);
  const Matrix<Scalar> rotation = random_orthogonal<Scalar>(values.size(), rng);
  return QuadraticProblem<Scalar>(values, rotation, x_star, f_star);
}

/// Same as above with a standard Gaussian minimizer drawn after the rotation.
template <typename Scalar>
QuadraticProblem<Scalar> make_problem(const SpectrumSpec& spec, RandomOptimum,
                                      Scalar f_star) {
  const Vector<Scalar> values = detail::spectrum_vector<Scalar>(spec);
  std::mt19937_64 rng(spec.seed);
  const Matrix<Scalar> rotation = random_orthogonal<Scalar>(values.size(), rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector<Scalar> x_star(values.size());
  for (Index i = 0; i < values.size(); ++i) x_star(i) = Scalar(normal(rng));
  return QuadraticProblem<Scalar>(values, rotation, x_star, f_star);
}

/// x* = 0, f* = 0.
template <typename Scalar = double>
QuadraticProblem<Scalar> make_problem(const SpectrumSpec& spec) {
  spec.validate();
  return make_problem<Scalar>(spec, Vector<Scalar>::Zero(spec.kind == SpectrumKind::explicit_list
                                                             ? static_cast<Index>(spec.values.size())
                                                             : spec.dim),
                              Scalar(0));
}

/// x* plus a uniformly random direction of length `radius`, seeded
/// independently of the problem.
template <typename Scalar>
Vector<Scalar> random_start(const QuadraticProblem<Scalar>& p, std::uint64_t seed,
                            Scalar radius = Scalar(10)) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector<Scalar> direction(p.dim());
  do {
    for (Index i = 0; i < p.dim(); ++i) direction(i) = Scalar(normal(rng));
  } while (direction.norm() == Scalar(0));
  return p.x_star() + radius * direction / direction.norm();
}

template <typename Scalar, typename Derived>
void check_dim(const QuadraticProblem<Scalar>& p,
               const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != p.dim())
    throw ValidationError("vector has dimension " + std::to_string(x.size()) +
                          ", problem has dimension " + std::to_string(p.dim()));
}

template <typename Scalar, typename Derived>
Scalar eval_f(const QuadraticProblem<Scalar>& p,
              const Eigen::MatrixBase<Derived>& x) {
  check_dim(p, x);
  const Vector<Scalar> e = x - p.x_star();
  return Scalar(0.5) * e.dot(p.hessian() * e) + p.f_star();
}

template <typename Scalar, typename Derived>
Vector<Scalar> grad_f(const QuadraticProblem<Scalar>& p,
                      const Eigen::MatrixBase<Derived>& x) {
  check_dim(p, x);
  return p.hessian() * (x - p.x_star());
}

/// f(x) given grad f(x); saves the second product with H.
template <typename Scalar, typename Derived>
Scalar eval_f_with_grad(const QuadraticProblem<Scalar>& p,
                        const Eigen::MatrixBase<Derived>& x, const Vector<Scalar>& grad) {
  check_dim(p, x);
  return Scalar(0.5) * (x - p.x_star()).dot(grad) + p.f_star();
}

}  // namespace hbpolyak
