#pragma once

// Test-only objectives and independent oracles (grid search, finite
// differences, dense eigensolvers).

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "racr/cubic.hpp"
#include "racr/manifold.hpp"
#include "racr/objective.hpp"

namespace testing {

using racr::ComponentIndex;
using racr::Manifold;
using racr::ManifoldPoint;
using racr::Matrix;
using racr::TangentVector;
using Vector = Eigen::VectorXd;

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> N;
  Matrix A(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) A(i, j) = N(rng);
  return A;
}

inline Matrix random_symmetric(std::mt19937_64& rng, Eigen::Index d) {
  const Matrix A = random_matrix(rng, d, d);
  return 0.5 * (A + A.transpose());
}

// f_i(x) = 1/2 x^T A_i x + b_i^T x on R^d.
class QuadraticComponents final : public racr::SeparableObjective {
 public:
  QuadraticComponents(std::vector<Matrix> A, std::vector<Vector> b)
      : A_(std::move(A)), b_(std::move(b)), space_(A_.front().rows()) {}

  const Manifold& manifold() const override { return space_; }
  std::size_t size() const override { return A_.size(); }
  double component_value(const ManifoldPoint& x, ComponentIndex i) const override {
    const Vector v = x.data().col(0);
    return 0.5 * v.dot(A_[i] * v) + b_[i].dot(v);
  }
  Matrix component_egrad(const ManifoldPoint& x, ComponentIndex i) const override {
    return A_[i] * x.data() + b_[i];
  }
  Matrix component_ehess(const ManifoldPoint&, const Matrix& xi, ComponentIndex i) const override {
    return A_[i] * xi;
  }
  Matrix mean_A() const {
    Matrix S = Matrix::Zero(A_[0].rows(), A_[0].cols());
    for (const auto& A : A_) S += A;
    return S / static_cast<double>(A_.size());
  }
  Vector mean_b() const {
    Vector s = Vector::Zero(b_[0].size());
    for (const auto& b : b_) s += b;
    return s / static_cast<double>(b_.size());
  }

 private:
  std::vector<Matrix> A_;
  std::vector<Vector> b_;
  racr::Euclidean space_;
};

// f_i(x) = a_i^T x; component gradients are the fixed vectors a_i.
class LinearComponents final : public racr::SeparableObjective {
 public:
  explicit LinearComponents(std::vector<Vector> a) : a_(std::move(a)), space_(a_.front().size()) {}
  const Manifold& manifold() const override { return space_; }
  std::size_t size() const override { return a_.size(); }
  double component_value(const ManifoldPoint& x, ComponentIndex i) const override {
    return a_[i].dot(x.data().col(0));
  }
  Matrix component_egrad(const ManifoldPoint&, ComponentIndex i) const override { return a_[i]; }
  Matrix component_ehess(const ManifoldPoint&, const Matrix& xi, ComponentIndex) const override {
    return Matrix::Zero(xi.rows(), xi.cols());
  }

 private:
  std::vector<Vector> a_;
  racr::Euclidean space_;
};

// Single-component nonconvex function on R^d:
//   f(x) = sum_j [ x_j^4 / 4 - x_j^2 / 2 ] + 1/2 x^T B x
// with a small symmetric coupling B. Saddle at the origin, minima near +-1.
class DoubleWell final : public racr::SeparableObjective {
 public:
  DoubleWell(Eigen::Index d, double coupling, std::uint64_t seed) : space_(d) {
    std::mt19937_64 rng(seed);
    B_ = coupling * random_symmetric(rng, d);
  }
  const Manifold& manifold() const override { return space_; }
  std::size_t size() const override { return 1; }
  double component_value(const ManifoldPoint& x, ComponentIndex) const override {
    const Vector v = x.data().col(0);
    return (v.array().pow(4) / 4.0 - v.array().square() / 2.0).sum() + 0.5 * v.dot(B_ * v);
  }
  Matrix component_egrad(const ManifoldPoint& x, ComponentIndex) const override {
    const Vector v = x.data().col(0);
    return Vector(v.array().cube() - v.array()) + B_ * v;
  }
  Matrix component_ehess(const ManifoldPoint& x, const Matrix& xi, ComponentIndex) const override {
    const Vector v = x.data().col(0);
    return Vector((3.0 * v.array().square() - 1.0) * xi.col(0).array()) + B_ * xi;
  }
  Matrix hessian(const Vector& v) const {
    Matrix H = B_;
    H.diagonal().array() += 3.0 * v.array().square() - 1.0;
    return H;
  }

 private:
  racr::Euclidean space_;
  Matrix B_;
};

// Cubic model on R^d with explicit G and dense H.
struct DenseModel {
  std::shared_ptr<racr::Euclidean> space;
  ManifoldPoint base;
  Matrix H;
  racr::CubicModel model;
};

inline DenseModel dense_model(const Vector& g, const Matrix& H, double sigma) {
  DenseModel m;
  m.space = std::make_shared<racr::Euclidean>(g.size());
  m.base = ManifoldPoint(Vector::Zero(g.size()));
  m.H = H;
  const Matrix Hc = H;
  const ManifoldPoint base = m.base;
  m.model = racr::CubicModel{m.space.get(), base, TangentVector(base, g),
                             [Hc, base](const TangentVector& v) { return TangentVector(base, Hc * v.data()); },
                             sigma};
  return m;
}

inline double cubic_value(const Vector& g, const Matrix& H, double sigma, const Vector& eta) {
  const double n = eta.norm();
  return g.dot(eta) + 0.5 * eta.dot(H * eta) + sigma / 3.0 * n * n * n;
}

// Minimum of phi over [lo, hi] on a uniform grid.
inline double grid_min_1d(const std::function<double(double)>& phi, double lo, double hi, double step,
                          double* argmin = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  double at = lo;
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 0.5));
  for (long i = 0; i <= count; ++i) {
    const double t = lo + static_cast<double>(i) * step;
    const double v = phi(t);
    if (v < best) {
      best = v;
      at = t;
    }
  }
  if (argmin) *argmin = at;
  return best;
}

inline double grid_min_2d(const Vector& g, const Matrix& H, double sigma, double half_width, double step) {
  double best = std::numeric_limits<double>::infinity();
  const auto count = static_cast<long>(std::floor(2.0 * half_width / step + 0.5));
  Vector eta(2);
  for (long i = 0; i <= count; ++i) {
    eta(0) = -half_width + static_cast<double>(i) * step;
    for (long j = 0; j <= count; ++j) {
      eta(1) = -half_width + static_cast<double>(j) * step;
      best = std::min(best, cubic_value(g, H, sigma, eta));
    }
  }
  return best;
}

inline double central_difference(const std::function<double(double)>& phi, double h) {
  return (phi(h) - phi(-h)) / (2.0 * h);
}

inline Eigen::SelfAdjointEigenSolver<Matrix> dense_eig(const Matrix& H) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (H + H.transpose()));
}

inline double rel_err(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(1e-300, std::max(a.norm(), b.norm()));
}

// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace testing
