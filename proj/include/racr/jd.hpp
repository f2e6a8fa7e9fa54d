#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "racr/objective.hpp"

namespace racr::jd {

/// n symmetric d x d target matrices for the joint-diagonalization cost
/// f(U) = -(1/n) sum_i ||diag(U^T C_i U)||_F^2 over St(r, d).
struct Instance {
  std::size_t n = 0;
  Eigen::Index d = 0;
  Eigen::Index r = 0;
  std::uint64_t seed = 0;
  double noise = 0.0;
  std::vector<Matrix> C;
  /// Shared diagonalizer used by generate(); empty for loaded instances.
  Matrix Q;
  /// Diagonals D_i used by generate(); empty for loaded instances.
  std::vector<Eigen::VectorXd> D;

  /// Throws ContractViolation on bad dimensions or asymmetric C_i (> 1e-12).
  void validate() const;
};

/// C_i = Q D_i Q^T + noise sym(E_i) with one random orthogonal Q, D_i uniform
/// on [0.5, 1.5) and Gaussian E_i. Deterministic per seed.
Instance generate(std::size_t n, Eigen::Index d, Eigen::Index r, std::uint64_t seed, double noise);

class InstanceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text format: "jd-instance 1", then "n d r seed noise", then each C_i as d
/// rows of d values.
void write_instance(std::ostream& os, const Instance& inst);
/// Symmetrizes each C_i; rejects asymmetry above 1e-8.
Instance read_instance(std::istream& is);

/// -||diag(U^T C U)||^2.
double component_value(const Matrix& C, const Matrix& U);
/// -4 C U diag(U^T C U).
Matrix component_egrad(const Matrix& C, const Matrix& U);
/// -4 C (xi diag(U^T C U) + U diag(xi^T C U) + U diag(U^T C xi)).
Matrix component_ehess(const Matrix& C, const Matrix& U, const Matrix& xi);

namespace kernels {

enum class Backend { Serial, OpenMP };

/// True when the library was built with OpenMP.
bool openmp_available();
int max_threads();

// Straight sequential loops; the reference the parallel kernels are tested
// against.
double value_sum_serial(const Instance& inst, const Matrix& U, std::span<const ComponentIndex> sample);
Matrix egrad_sum_serial(const Instance& inst, const Matrix& U, std::span<const ComponentIndex> sample);
Matrix ehess_sum_serial(const Instance& inst, const Matrix& U, const Matrix& xi,
                        std::span<const ComponentIndex> sample);

/// Components are summed in fixed blocks of this size; block partials are
/// added in block order, so results do not depend on the thread count.
inline constexpr std::size_t kBlock = 32;

double value_sum_omp(const Instance& inst, const Matrix& U, std::span<const ComponentIndex> sample);
Matrix egrad_sum_omp(const Instance& inst, const Matrix& U, std::span<const ComponentIndex> sample);
Matrix ehess_sum_omp(const Instance& inst, const Matrix& U, const Matrix& xi, std::span<const ComponentIndex> sample);

}  // namespace kernels

/// f_ica as a separable objective on St(r, d).
class Objective final : public SeparableObjective {
 public:
  explicit Objective(std::shared_ptr<const Instance> inst, kernels::Backend backend = default_backend());

  static kernels::Backend default_backend();

  const Manifold& manifold() const override { return stiefel_; }
  std::size_t size() const override { return inst_->n; }
  const Instance& instance() const { return *inst_; }
  kernels::Backend backend() const { return backend_; }

  double component_value(const ManifoldPoint& U, ComponentIndex i) const override;
  Matrix component_egrad(const ManifoldPoint& U, ComponentIndex i) const override;
  Matrix component_ehess(const ManifoldPoint& U, const Matrix& xi, ComponentIndex i) const override;

  double value_sum(const ManifoldPoint& U, std::span<const ComponentIndex> sample) const override;
  Matrix egrad_sum(const ManifoldPoint& U, std::span<const ComponentIndex> sample) const override;
  Matrix ehess_sum(const ManifoldPoint& U, const Matrix& xi, std::span<const ComponentIndex> sample) const override;

 private:
  std::shared_ptr<const Instance> inst_;
  Stiefel stiefel_;
  kernels::Backend backend_;
};

}  // namespace racr::jd
