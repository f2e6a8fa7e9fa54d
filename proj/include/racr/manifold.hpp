#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace racr {

using Matrix = Eigen::MatrixXd;

/// Raised when a caller breaks an operation's precondition (shape, base point,
/// tangency).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when U + xi has (numerically) dependent columns so qf is undefined.
class SingularRetraction : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Immutable point on a manifold. Copies share storage, so a tangent vector can
/// cheaply remember which point it is attached to.
class ManifoldPoint {
 public:
  ManifoldPoint() = default;
  explicit ManifoldPoint(Matrix data);

  const Matrix& data() const { return *data_; }
  Eigen::Index rows() const { return data_->rows(); }
  Eigen::Index cols() const { return data_->cols(); }
  bool empty() const { return data_ == nullptr; }

  /// Same storage or equal entries.
  bool same_as(const ManifoldPoint& other) const;

 private:
  std::shared_ptr<const Matrix> data_;
};

/// Element of the tangent space at `base`.
class TangentVector {
 public:
  TangentVector() = default;
  TangentVector(ManifoldPoint base, Matrix data);

  const Matrix& data() const { return data_; }
  const ManifoldPoint& base() const { return base_; }

  double norm() const { return data_.norm(); }

  TangentVector operator+(const TangentVector& other) const;
  TangentVector operator-(const TangentVector& other) const;
  TangentVector operator-() const;
  TangentVector& operator+=(const TangentVector& other);
  TangentVector& operator*=(double s);
  friend TangentVector operator*(double s, const TangentVector& v);
  friend TangentVector operator*(const TangentVector& v, double s) { return s * v; }

 private:
  void require_same_base(const TangentVector& other) const;

  ManifoldPoint base_;
  Matrix data_;
};

/// (A + A^T) / 2.
Matrix sym(const Matrix& A);

/// Orthogonal factor of the thin QR decomposition with nonnegative diagonal in
/// R. Throws SingularRetraction when a column is numerically dependent.
Matrix qf(const Matrix& A);

class Manifold {
 public:
  virtual ~Manifold() = default;

  virtual Eigen::Index rows() const = 0;
  virtual Eigen::Index cols() const = 0;
  /// Dimension of each tangent space.
  virtual Eigen::Index dimension() const = 0;
  virtual std::string name() const = 0;

  double inner(const ManifoldPoint& x, const TangentVector& eta, const TangentVector& xi) const;
  double norm(const ManifoldPoint& x, const TangentVector& xi) const;

  virtual TangentVector project(const ManifoldPoint& x, const Matrix& W) const = 0;
  virtual ManifoldPoint retract(const ManifoldPoint& x, const TangentVector& xi) const = 0;

  /// Riemannian gradient from the Euclidean gradient of an extension.
  virtual TangentVector egrad_to_rgrad(const ManifoldPoint& x, const Matrix& egrad) const;
  /// Riemannian Hessian applied to xi, given egrad and the directional derivative
  /// of egrad along xi.
  virtual TangentVector ehess_to_rhess(const ManifoldPoint& x, const Matrix& egrad,
                                       const Matrix& ehess_xi, const TangentVector& xi) const = 0;

  /// Distance from the constraint set; zero on Euclidean space.
  virtual double feasibility_residual(const Matrix& X) const = 0;
  /// How far W is from the tangent space at x.
  virtual double tangency_residual(const ManifoldPoint& x, const Matrix& W) const = 0;

  virtual ManifoldPoint random_point(std::uint64_t seed) const = 0;
  /// Unit-norm random tangent vector at x.
  TangentVector random_tangent(const ManifoldPoint& x, std::uint64_t seed) const;

  TangentVector zero_vector(const ManifoldPoint& x) const;
  ManifoldPoint make_point(Matrix X) const;

 protected:
  void require_shape(const Matrix& M, const char* what) const;
  void require_attached(const ManifoldPoint& x, const TangentVector& v) const;
};

/// R^{rows x cols} with retraction x + xi.
class Euclidean final : public Manifold {
 public:
  explicit Euclidean(Eigen::Index rows, Eigen::Index cols = 1);

  Eigen::Index rows() const override { return rows_; }
  Eigen::Index cols() const override { return cols_; }
  Eigen::Index dimension() const override { return rows_ * cols_; }
  std::string name() const override;

  TangentVector project(const ManifoldPoint& x, const Matrix& W) const override;
  ManifoldPoint retract(const ManifoldPoint& x, const TangentVector& xi) const override;
  TangentVector ehess_to_rhess(const ManifoldPoint& x, const Matrix& egrad, const Matrix& ehess_xi,
                               const TangentVector& xi) const override;
  double feasibility_residual(const Matrix& X) const override;
  double tangency_residual(const ManifoldPoint& x, const Matrix& W) const override;
  ManifoldPoint random_point(std::uint64_t seed) const override;

 private:
  Eigen::Index rows_;
  Eigen::Index cols_;
};

/// St(r, d): d x r matrices with orthonormal columns, embedded metric, qf
/// retraction.
class Stiefel final : public Manifold {
 public:
  /// Drift above which a retracted point is orthonormalized again.
  static constexpr double kReorthTolerance = 1e-8;

  Stiefel(Eigen::Index d, Eigen::Index r);

  Eigen::Index rows() const override { return d_; }
  Eigen::Index cols() const override { return r_; }
  Eigen::Index dimension() const override { return d_ * r_ - r_ * (r_ + 1) / 2; }
  std::string name() const override;

  TangentVector project(const ManifoldPoint& U, const Matrix& W) const override;
  ManifoldPoint retract(const ManifoldPoint& U, const TangentVector& xi) const override;
  TangentVector ehess_to_rhess(const ManifoldPoint& U, const Matrix& egrad, const Matrix& ehess_xi,
                               const TangentVector& xi) const override;
  double feasibility_residual(const Matrix& X) const override;
  double tangency_residual(const ManifoldPoint& U, const Matrix& W) const override;
  ManifoldPoint random_point(std::uint64_t seed) const override;

 private:
  Eigen::Index d_;
  Eigen::Index r_;
};

}  // namespace racr
