#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "racr/manifold.hpp"

namespace racr {

using ComponentIndex = std::size_t;

/// f(x) = (1/n) sum_i f_i(x) over a manifold. Implementations supply the
/// per-component Euclidean quantities; the *_sum hooks may be overridden with
/// faster (e.g. parallel) kernels as long as they stay deterministic.
class SeparableObjective {
 public:
  virtual ~SeparableObjective() = default;

  virtual const Manifold& manifold() const = 0;
  virtual std::size_t size() const = 0;

  virtual double component_value(const ManifoldPoint& x, ComponentIndex i) const = 0;
  virtual Matrix component_egrad(const ManifoldPoint& x, ComponentIndex i) const = 0;
  /// Directional derivative of the component's Euclidean gradient along xi.
  virtual Matrix component_ehess(const ManifoldPoint& x, const Matrix& xi, ComponentIndex i) const = 0;

  virtual double value_sum(const ManifoldPoint& x, std::span<const ComponentIndex> sample) const;
  virtual Matrix egrad_sum(const ManifoldPoint& x, std::span<const ComponentIndex> sample) const;
  virtual Matrix ehess_sum(const ManifoldPoint& x, const Matrix& xi, std::span<const ComponentIndex> sample) const;

  /// Exact mean over all n components.
  double value(const ManifoldPoint& x) const;
  Matrix egrad(const ManifoldPoint& x) const;
  TangentVector rgrad(const ManifoldPoint& x) const;
  TangentVector rhess(const ManifoldPoint& x, const TangentVector& xi) const;

  /// Riemannian gradient / Hessian-vector product averaged over a sample (with
  /// repetitions counted).
  TangentVector rgrad(const ManifoldPoint& x, std::span<const ComponentIndex> sample) const;
  TangentVector rhess(const ManifoldPoint& x, const TangentVector& xi, std::span<const ComponentIndex> sample) const;

  /// 0, 1, ..., n-1.
  std::vector<ComponentIndex> all_components() const;
};

}  // namespace racr
