#include "racr/jd.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <string>

#include <fmt/format.h>

#include "racr/rng.hpp"

namespace racr::jd {

void Instance::validate() const {
  if (n < 1) throw ContractViolation("instance needs at least one matrix");
  if (r < 1 || d < r) throw ContractViolation(fmt::format("need 1 <= r <= d, got r={}, d={}", r, d));
  if (C.size() != n) throw ContractViolation(fmt::format("expected {} matrices, found {}", n, C.size()));
  for (std::size_t i = 0; i < n; ++i) {
    if (C[i].rows() != d || C[i].cols() != d) throw ContractViolation(fmt::format("C_{} is not {}x{}", i, d, d));
    if ((C[i] - C[i].transpose()).norm() > 1e-12) throw ContractViolation(fmt::format("C_{} is not symmetric", i));
  }
}

Instance generate(std::size_t n, Eigen::Index d, Eigen::Index r, std::uint64_t seed, double noise) {
  if (n < 1 || r < 1 || d < r) throw ContractViolation(fmt::format("invalid JD dimensions n={} d={} r={}", n, d, r));
  if (!(noise >= 0.0)) throw ContractViolation("noise level must be nonnegative");
  Instance inst;
  inst.n = n;
  inst.d = d;
  inst.r = r;
  inst.seed = seed;
  inst.noise = noise;
  auto qstream = rng::stream(seed, 0, "jd_diagonalizer");
  for (;;) {
    try {
      inst.Q = qf(rng::gaussian(qstream, d, d));
      break;
    } catch (const SingularRetraction&) {
    }
  }
  inst.C.resize(n);
  inst.D.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto engine = rng::stream(seed, i, "jd_component");
    std::uniform_real_distribution<double> diag(0.5, 1.5);
    Eigen::VectorXd Di(d);
    for (Eigen::Index j = 0; j < d; ++j) Di(j) = diag(engine);
    Matrix Ci = inst.Q * Di.asDiagonal() * inst.Q.transpose();
    if (noise > 0.0) Ci += noise * sym(rng::gaussian(engine, d, d));
    inst.C[i] = sym(Ci);
    inst.D[i] = std::move(Di);
  }
  return inst;
}

void write_instance(std::ostream& os, const Instance& inst) {
  inst.validate();
  os << "jd-instance 1\n";
  os << fmt::format("{} {} {} {} {:.17g}\n", inst.n, inst.d, inst.r, inst.seed, inst.noise);
  for (const auto& C : inst.C) {
    for (Eigen::Index i = 0; i < inst.d; ++i) {
      for (Eigen::Index j = 0; j < inst.d; ++j) os << (j ? " " : "") << fmt::format("{:.17g}", C(i, j));
      os << '\n';
    }
  }
}

Instance read_instance(std::istream& is) {
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != "jd-instance" || version != 1)
    throw InstanceFormatError("not a 'jd-instance 1' file");
  Instance inst;
  long long d = 0, r = 0;
  if (!(is >> inst.n >> d >> r >> inst.seed >> inst.noise)) throw InstanceFormatError("malformed instance header");
  inst.d = d;
  inst.r = r;
  if (inst.n < 1 || r < 1 || d < r) throw InstanceFormatError(fmt::format("invalid dimensions n={} d={} r={}", inst.n, d, r));
  inst.C.reserve(inst.n);
  for (std::size_t k = 0; k < inst.n; ++k) {
    Matrix C(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j)
        if (!(is >> C(i, j))) throw InstanceFormatError(fmt::format("matrix {} is truncated", k));
    if (!C.allFinite()) throw InstanceFormatError(fmt::format("matrix {} has non-finite entries", k));
    const double asym = (C - C.transpose()).norm();
    if (asym > 1e-8) throw InstanceFormatError(fmt::format("matrix {} is not symmetric (||C - C^T|| = {:.3e})", k, asym));
    inst.C.push_back(sym(C));
  }
  std::string extra;
  if (is >> extra) throw InstanceFormatError("trailing data after the last matrix");
  return inst;
}

double component_value(const Matrix& C, const Matrix& U) {
  const Matrix CU = C * U;
  double s = 0.0;
  for (Eigen::Index j = 0; j < U.cols(); ++j) {
    const double a = U.col(j).dot(CU.col(j));
    s += a * a;
  }
  return -s;
}

Matrix component_egrad(const Matrix& C, const Matrix& U) {
  Matrix CU = C * U;
  for (Eigen::Index j = 0; j < U.cols(); ++j) CU.col(j) *= -4.0 * U.col(j).dot(CU.col(j));
  return CU;
}

Matrix component_ehess(const Matrix& C, const Matrix& U, const Matrix& xi) {
  const Matrix CU = C * U;
  const Matrix Cxi = C * xi;
  Matrix out(U.rows(), U.cols());
  for (Eigen::Index j = 0; j < U.cols(); ++j) {
    const double a = U.col(j).dot(CU.col(j));   // diag(U^T C U)
    const double b = xi.col(j).dot(CU.col(j));  // diag(xi^T C U)
    const double c = U.col(j).dot(Cxi.col(j));  // diag(U^T C xi)
    out.col(j) = -4.0 * (a * Cxi.col(j) + (b + c) * CU.col(j));
  }
  return out;
}

// Objective ----------------------------------------------------------------

Objective::Objective(std::shared_ptr<const Instance> inst, kernels::Backend backend)
    : inst_(std::move(inst)), stiefel_(inst_->d, inst_->r), backend_(backend) {
  inst_->validate();
  if (backend_ == kernels::Backend::OpenMP && !kernels::openmp_available()) backend_ = kernels::Backend::Serial;
}

kernels::Backend Objective::default_backend() {
  return kernels::openmp_available() ? kernels::Backend::OpenMP : kernels::Backend::Serial;
}

double Objective::component_value(const ManifoldPoint& U, ComponentIndex i) const {
  return jd::component_value(inst_->C.at(i), U.data());
}

Matrix Objective::component_egrad(const ManifoldPoint& U, ComponentIndex i) const {
  return jd::component_egrad(inst_->C.at(i), U.data());
}

Matrix Objective::component_ehess(const ManifoldPoint& U, const Matrix& xi, ComponentIndex i) const {
  return jd::component_ehess(inst_->C.at(i), U.data(), xi);
}

double Objective::value_sum(const ManifoldPoint& U, std::span<const ComponentIndex> sample) const {
  return backend_ == kernels::Backend::OpenMP ? kernels::value_sum_omp(*inst_, U.data(), sample)
                                              : kernels::value_sum_serial(*inst_, U.data(), sample);
}

Matrix Objective::egrad_sum(const ManifoldPoint& U, std::span<const ComponentIndex> sample) const {
  return backend_ == kernels::Backend::OpenMP ? kernels::egrad_sum_omp(*inst_, U.data(), sample)
                                              : kernels::egrad_sum_serial(*inst_, U.data(), sample);
}

Matrix Objective::ehess_sum(const ManifoldPoint& U, const Matrix& xi, std::span<const ComponentIndex> sample) const {
  return backend_ == kernels::Backend::OpenMP ? kernels::ehess_sum_omp(*inst_, U.data(), xi, sample)
                                              : kernels::ehess_sum_serial(*inst_, U.data(), xi, sample);
}

}  // namespace racr::jd
