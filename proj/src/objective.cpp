#include "racr/objective.hpp"

#include <numeric>

namespace racr {

double SeparableObjective::value_sum(const ManifoldPoint& x, std::span<const ComponentIndex> sample) const {
  double s = 0.0;
  for (ComponentIndex i : sample) s += component_value(x, i);
  return s;
}

Matrix SeparableObjective::egrad_sum(const ManifoldPoint& x, std::span<const ComponentIndex> sample) const {
  Matrix s = Matrix::Zero(x.rows(), x.cols());
  for (ComponentIndex i : sample) s += component_egrad(x, i);
  return s;
}

Matrix SeparableObjective::ehess_sum(const ManifoldPoint& x, const Matrix& xi,
                                     std::span<const ComponentIndex> sample) const {
  Matrix s = Matrix::Zero(x.rows(), x.cols());
  for (ComponentIndex i : sample) s += component_ehess(x, xi, i);
  return s;
}

std::vector<ComponentIndex> SeparableObjective::all_components() const {
  std::vector<ComponentIndex> all(size());
  std::iota(all.begin(), all.end(), ComponentIndex{0});
  return all;
}

double SeparableObjective::value(const ManifoldPoint& x) const {
  return value_sum(x, all_components()) / static_cast<double>(size());
}

Matrix SeparableObjective::egrad(const ManifoldPoint& x) const {
  return egrad_sum(x, all_components()) / static_cast<double>(size());
}

TangentVector SeparableObjective::rgrad(const ManifoldPoint& x) const { return rgrad(x, all_components()); }

TangentVector SeparableObjective::rhess(const ManifoldPoint& x, const TangentVector& xi) const {
  return rhess(x, xi, all_components());
}

TangentVector SeparableObjective::rgrad(const ManifoldPoint& x, std::span<const ComponentIndex> sample) const {
  if (sample.empty()) throw ContractViolation("gradient sample is empty");
  return manifold().egrad_to_rgrad(x, egrad_sum(x, sample) / static_cast<double>(sample.size()));
}

TangentVector SeparableObjective::rhess(const ManifoldPoint& x, const TangentVector& xi,
                                        std::span<const ComponentIndex> sample) const {
  if (sample.empty()) throw ContractViolation("hessian sample is empty");
  const double m = static_cast<double>(sample.size());
  return manifold().ehess_to_rhess(x, egrad_sum(x, sample) / m, ehess_sum(x, xi.data(), sample) / m, xi);
}

}  // namespace racr
