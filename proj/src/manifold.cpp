#include "racr/manifold.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "racr/rng.hpp"

namespace racr {

ManifoldPoint::ManifoldPoint(Matrix data) : data_(std::make_shared<const Matrix>(std::move(data))) {
  if (!data_->allFinite()) throw ContractViolation("manifold point has non-finite entries");
}

bool ManifoldPoint::same_as(const ManifoldPoint& other) const {
  if (data_ == other.data_) return true;
  if (!data_ || !other.data_) return false;
  return data_->rows() == other.data_->rows() && data_->cols() == other.data_->cols() &&
         *data_ == *other.data_;
}

TangentVector::TangentVector(ManifoldPoint base, Matrix data) : base_(std::move(base)), data_(std::move(data)) {
  if (base_.empty()) throw ContractViolation("tangent vector needs a base point");
  if (data_.rows() != base_.rows() || data_.cols() != base_.cols())
    throw ContractViolation(fmt::format("tangent vector is {}x{} but base point is {}x{}", data_.rows(),
                                        data_.cols(), base_.rows(), base_.cols()));
}

void TangentVector::require_same_base(const TangentVector& other) const {
  if (!base_.same_as(other.base_)) throw ContractViolation("tangent vectors live at different base points");
}

TangentVector TangentVector::operator+(const TangentVector& other) const {
  require_same_base(other);
  return {base_, data_ + other.data_};
}

TangentVector TangentVector::operator-(const TangentVector& other) const {
  require_same_base(other);
  return {base_, data_ - other.data_};
}

TangentVector TangentVector::operator-() const { return {base_, -data_}; }

TangentVector& TangentVector::operator+=(const TangentVector& other) {
  require_same_base(other);
  data_ += other.data_;
  return *this;
}

TangentVector& TangentVector::operator*=(double s) {
  data_ *= s;
  return *this;
}

TangentVector operator*(double s, const TangentVector& v) { return {v.base_, s * v.data_}; }

Matrix sym(const Matrix& A) {
  if (A.rows() != A.cols())
    throw ContractViolation(fmt::format("sym needs a square matrix, got {}x{}", A.rows(), A.cols()));
  return 0.5 * (A + A.transpose());
}

Matrix qf(const Matrix& A) {
  const Eigen::Index m = A.rows();
  const Eigen::Index k = A.cols();
  if (k > m) throw ContractViolation("qf needs at least as many rows as columns");
  Eigen::HouseholderQR<Matrix> qr(A);
  const Matrix R = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const double scale = std::max(1.0, A.norm());
  Matrix Q = qr.householderQ() * Matrix::Identity(m, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double rjj = R(j, j);
    if (!(std::abs(rjj) > 1e-13 * scale))
      throw SingularRetraction(fmt::format("qf: column {} is numerically dependent (|R_jj| = {:.3e})", j,
                                           std::abs(rjj)));
    if (rjj < 0) Q.col(j) = -Q.col(j);
  }
  return Q;
}

double Manifold::inner(const ManifoldPoint& x, const TangentVector& eta, const TangentVector& xi) const {
  require_attached(x, eta);
  require_attached(x, xi);
  return (eta.data().array() * xi.data().array()).sum();
}

double Manifold::norm(const ManifoldPoint& x, const TangentVector& xi) const {
  return std::sqrt(inner(x, xi, xi));
}

TangentVector Manifold::egrad_to_rgrad(const ManifoldPoint& x, const Matrix& egrad) const {
  return project(x, egrad);
}

TangentVector Manifold::random_tangent(const ManifoldPoint& x, std::uint64_t seed) const {
  auto engine = rng::stream(seed, 0, "random_tangent");
  for (;;) {
    TangentVector v = project(x, rng::gaussian(engine, rows(), cols()));
    const double n = v.norm();
    if (n > 1e-8) {
      v *= 1.0 / n;
      return v;
    }
  }
}

TangentVector Manifold::zero_vector(const ManifoldPoint& x) const {
  return {x, Matrix::Zero(x.rows(), x.cols())};
}

ManifoldPoint Manifold::make_point(Matrix X) const {
  require_shape(X, "point");
  return ManifoldPoint(std::move(X));
}

void Manifold::require_shape(const Matrix& M, const char* what) const {
  if (M.rows() != rows() || M.cols() != cols())
    throw ContractViolation(
        fmt::format("{} is {}x{} but {} expects {}x{}", what, M.rows(), M.cols(), name(), rows(), cols()));
}

void Manifold::require_attached(const ManifoldPoint& x, const TangentVector& v) const {
  require_shape(x.data(), "base point");
  require_shape(v.data(), "tangent vector");
  if (!v.base().same_as(x)) throw ContractViolation("tangent vector is attached to a different point");
}

// Euclidean ----------------------------------------------------------------

Euclidean::Euclidean(Eigen::Index rows, Eigen::Index cols) : rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1) throw ContractViolation("Euclidean space needs positive dimensions");
}

std::string Euclidean::name() const { return fmt::format("R^({}x{})", rows_, cols_); }

TangentVector Euclidean::project(const ManifoldPoint& x, const Matrix& W) const {
  require_shape(W, "ambient matrix");
  return {x, W};
}

ManifoldPoint Euclidean::retract(const ManifoldPoint& x, const TangentVector& xi) const {
  require_attached(x, xi);
  return ManifoldPoint(x.data() + xi.data());
}

TangentVector Euclidean::ehess_to_rhess(const ManifoldPoint& x, const Matrix&, const Matrix& ehess_xi,
                                        const TangentVector& xi) const {
  require_attached(x, xi);
  return {x, ehess_xi};
}

double Euclidean::feasibility_residual(const Matrix& X) const {
  require_shape(X, "point");
  return 0.0;
}

double Euclidean::tangency_residual(const ManifoldPoint&, const Matrix& W) const {
  require_shape(W, "ambient matrix");
  return 0.0;
}

ManifoldPoint Euclidean::random_point(std::uint64_t seed) const {
  auto engine = rng::stream(seed, 0, "euclidean_point");
  return ManifoldPoint(rng::gaussian(engine, rows_, cols_));
}

// Stiefel ------------------------------------------------------------------

Stiefel::Stiefel(Eigen::Index d, Eigen::Index r) : d_(d), r_(r) {
  if (r < 1 || d < r) throw ContractViolation(fmt::format("St({}, {}) needs 1 <= r <= d", r, d));
}

std::string Stiefel::name() const { return fmt::format("St({}, {})", r_, d_); }

TangentVector Stiefel::project(const ManifoldPoint& U, const Matrix& W) const {
  require_shape(U.data(), "base point");
  require_shape(W, "ambient matrix");
  const Matrix& X = U.data();
  return {U, W - X * sym(X.transpose() * W)};
}

ManifoldPoint Stiefel::retract(const ManifoldPoint& U, const TangentVector& xi) const {
  require_attached(U, xi);
  if (xi.data().isZero(0.0)) return U;
  Matrix Q = qf(U.data() + xi.data());
  if (feasibility_residual(Q) > kReorthTolerance) Q = qf(Q);
  return ManifoldPoint(std::move(Q));
}

TangentVector Stiefel::ehess_to_rhess(const ManifoldPoint& U, const Matrix& egrad, const Matrix& ehess_xi,
                                      const TangentVector& xi) const {
  require_attached(U, xi);
  require_shape(egrad, "euclidean gradient");
  require_shape(ehess_xi, "euclidean hessian-vector product");
  if (tangency_residual(U, xi.data()) > 1e-8 * std::max(1.0, xi.norm()))
    throw ContractViolation(fmt::format("hessian direction is not tangent at the base point ({:.3e}, norm {:.3e})", tangency_residual(U, xi.data()), xi.norm()));
  const Matrix& X = U.data();
  const Matrix& Z = xi.data();
  const Matrix W = ehess_xi - Z * sym(X.transpose() * egrad) - X * sym(Z.transpose() * egrad) -
                   X * sym(X.transpose() * ehess_xi);
  return project(U, W);
}

double Stiefel::feasibility_residual(const Matrix& X) const {
  require_shape(X, "point");
  return (X.transpose() * X - Matrix::Identity(r_, r_)).norm();
}

double Stiefel::tangency_residual(const ManifoldPoint& U, const Matrix& W) const {
  require_shape(W, "ambient matrix");
  const Matrix S = W.transpose() * U.data();
  return (S + S.transpose()).norm();
}

ManifoldPoint Stiefel::random_point(std::uint64_t seed) const {
  auto engine = rng::stream(seed, 0, "stiefel_point");
  for (;;) {
    try {
      return ManifoldPoint(qf(rng::gaussian(engine, d_, r_)));
    } catch (const SingularRetraction&) {
    }
  }
}

}  // namespace racr
