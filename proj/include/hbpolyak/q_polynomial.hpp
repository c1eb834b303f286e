#pragma once

#include <charconv>
#include <string>
#include <utility>
#include <vector>

#include "hbpolyak/quadratic_problem.hpp"

namespace hbpolyak {

/// The metric-defining polynomial Q of <x - x*, Q(H)(x - x*)>. Coefficients
/// are stored lowest degree first.
template <typename Scalar>
class QPolynomial {
 public:
  QPolynomial() : coeffs_{Scalar(1)} {}
  explicit QPolynomial(std::vector<Scalar> coeffs) : coeffs_(std::move(coeffs)) {
    while (coeffs_.size() > 1 && coeffs_.back() == Scalar(0)) coeffs_.pop_back();
    if (coeffs_.empty()) throw ValidationError("Q needs at least one coefficient");
  }

  /// Q = X^k.
  static QPolynomial monomial(std::size_t k) {
    std::vector<Scalar> c(k + 1, Scalar(0));
    c.back() = Scalar(1);
    return QPolynomial(std::move(c));
  }

  const std::vector<Scalar>& coeffs() const noexcept { return coeffs_; }
  std::size_t degree() const noexcept { return coeffs_.size() - 1; }

  Scalar operator()(Scalar x) const {
    Scalar acc = coeffs_.back();
    for (std::size_t k = coeffs_.size() - 1; k-- > 0;) acc = acc * x + coeffs_[k];
    return acc;
  }

  /// Q(H) v by Horner's rule; Q(H) itself is never formed.
  template <typename Derived>
  Vector<Scalar> apply(const Matrix<Scalar>& H,
                       const Eigen::MatrixBase<Derived>& v) const {
    Vector<Scalar> acc = coeffs_.back() * v;
    for (std::size_t k = coeffs_.size() - 1; k-- > 0;)
      acc = (H * acc).eval() + coeffs_[k] * v;
    return acc;
  }

  /// Throws InvalidQError unless Q > 0 at every strictly positive eigenvalue
  /// of the problem.
  void check_positive_on(const QuadraticProblem<Scalar>& p) const {
    const auto& values = p.eigenvalues();
    for (Index i = 0; i < values.size(); ++i) {
      if (values(i) > Scalar(0) && !((*this)(values(i)) > Scalar(0)))
        throw InvalidQError("Q is not positive at eigenvalue " +
                            std::to_string(static_cast<double>(values(i))));
    }
  }

  std::string to_string() const {
    std::string out;
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
      if (k) out += ':';
      char buf[32];
      const auto res = std::to_chars(buf, buf + sizeof buf, static_cast<double>(coeffs_[k]));
      out.append(buf, res.ptr);
    }
    return out;
  }

 private:
  std::vector<Scalar> coeffs_;
};

}  // namespace hbpolyak
