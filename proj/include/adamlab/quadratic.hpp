#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <utility>

namespace adamlab {

// f(theta) = 1/2 (theta - theta*)^T H (theta - theta*).
// H is stored either densely or as a symmetric factor S with H = S^2; the
// factored form never materializes S^2, which keeps curvature evaluations at
// one matrix-vector product.
template <typename Scalar = double>
class QuadraticObjective {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  enum class Form { Dense, SquareOf };

  QuadraticObjective() = default;

  static QuadraticObjective dense(Matrix h, Vector theta_star) {
    return QuadraticObjective(std::move(h), std::move(theta_star), Form::Dense);
  }
  static QuadraticObjective square_of(Matrix s, Vector theta_star) {
    return QuadraticObjective(std::move(s), std::move(theta_star), Form::SquareOf);
  }

  Eigen::Index size() const { return theta_star_.size(); }
  Form form() const { return form_; }
  const Matrix& matrix() const { return matrix_; }
  const Vector& theta_star() const { return theta_star_; }

  Vector hessian_times(const Eigen::Ref<const Vector>& x) const {
    check(x.size());
    if (form_ == Form::Dense) return matrix_ * x;
    return matrix_ * (matrix_ * x);
  }

  /// u^T H u.
  Scalar curvature(const Eigen::Ref<const Vector>& u) const {
    check(u.size());
    if (form_ == Form::Dense) return u.dot(matrix_ * u);
    return (matrix_ * u).squaredNorm();
  }

  Scalar value(const Eigen::Ref<const Vector>& theta) const {
    return Scalar(0.5) * curvature(theta - theta_star_);
  }

  Vector gradient(const Eigen::Ref<const Vector>& theta) const {
    return hessian_times(theta - theta_star_);
  }

  Matrix hessian() const {
    if (form_ == Form::Dense) return matrix_;
    return matrix_ * matrix_;
  }

 private:
  QuadraticObjective(Matrix m, Vector theta_star, Form form)
      : matrix_(std::move(m)), theta_star_(std::move(theta_star)), form_(form) {
    if (matrix_.rows() != matrix_.cols())
      throw std::invalid_argument("quadratic objective needs a square matrix");
    if (matrix_.rows() != theta_star_.size())
      throw std::invalid_argument("theta* length does not match the Hessian");
  }

  void check(Eigen::Index n) const {
    if (n != size())
      throw std::invalid_argument("vector length does not match objective dimension");
  }

  Matrix matrix_;
  Vector theta_star_;
  Form form_ = Form::Dense;
};

}  // namespace adamlab
