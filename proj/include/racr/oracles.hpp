#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "racr/objective.hpp"

namespace racr {

enum class OracleMode {
  Exact,                  // grad f and Hess f
  SubsampledHessianOnly,  // grad f, sub-sampled Hessian
  SubsampledBoth,         // sub-sampled gradient and Hessian
};

std::string_view to_string(OracleMode mode);

/// Thrown when a derivative is requested before the per-iteration samples were
/// drawn, or at a point other than the one they were drawn for.
class StaleSample : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct OracleCounters {
  std::uint64_t grad_evals = 0;        // component gradients behind G_k
  std::uint64_t hess_evals = 0;        // component Hessian-vector products
  std::uint64_t hess_setup_evals = 0;  // component gradients needed to form Hess f_i
  std::uint64_t value_evals = 0;       // component values (full objective evaluations)
};

/// Gradient and Hessian-vector providers for one run. Samples S_g and S_H are
/// drawn uniformly with replacement, once per outer iteration, from streams
/// keyed by (seed, iteration, purpose); the Hessian stream does not depend on
/// whether the gradient is sampled.
class OracleBundle {
 public:
  OracleBundle(const SeparableObjective& objective, OracleMode mode, std::size_t grad_sample_size,
               std::size_t hess_sample_size, std::uint64_t seed);

  /// Draw the samples for iteration k at x. Must precede gradient() and hvp().
  void begin_iteration(const ManifoldPoint& x, std::uint64_t k);

  /// G_k. Counts |S_g| (or n) component gradients on every call.
  TangentVector gradient(const ManifoldPoint& x);
  /// H_k[eta]. Counts |S_H| (or n) component Hessian-vector products.
  TangentVector hvp(const ManifoldPoint& x, const TangentVector& eta);
  /// Exact f(x) over all n components.
  double value(const ManifoldPoint& x);

  /// Use grad f regardless of mode (SSRACR with the gradient sample replaced
  /// by the exact gradient).
  void force_exact_gradient(bool on) { exact_gradient_override_ = on; }

  OracleMode mode() const { return mode_; }
  bool samples_gradient() const;
  bool samples_hessian() const;
  /// Components that enter one gradient()/hvp() call.
  std::size_t effective_grad_sample_size() const;
  std::size_t effective_hess_sample_size() const;

  const std::vector<ComponentIndex>& gradient_sample() const { return grad_sample_; }
  const std::vector<ComponentIndex>& hessian_sample() const { return hess_sample_; }
  const OracleCounters& counters() const { return counters_; }
  const SeparableObjective& objective() const { return objective_; }
  std::uint64_t seed() const { return seed_; }

 private:
  void require_prepared(const ManifoldPoint& x, const char* what) const;

  const SeparableObjective& objective_;
  OracleMode mode_;
  std::size_t grad_size_;
  std::size_t hess_size_;
  std::uint64_t seed_;
  bool exact_gradient_override_ = false;

  std::vector<ComponentIndex> all_;
  std::vector<ComponentIndex> grad_sample_;
  std::vector<ComponentIndex> hess_sample_;
  std::optional<ManifoldPoint> prepared_at_;
  std::optional<Matrix> hess_egrad_;  // mean egrad over S_H at prepared_at_
  OracleCounters counters_;
};

/// Draw `size` indices uniformly with replacement from {0..n-1}.
std::vector<ComponentIndex> draw_sample(std::size_t n, std::size_t size, std::uint64_t seed, std::uint64_t k,
                                        std::string_view purpose);

struct SampleSizeParams {
  double delta = 0.01;    // failure probability
  double delta_g = 0.1;   // gradient accuracy
  double delta_H = 0.1;   // Hessian accuracy
  double K_g_max = 1.0;   // bound on component gradient norms
  double K_H_max = 1.0;   // bound on component Hessian norms
};

struct SampleSizes {
  std::size_t gradient = 0;
  std::size_t hessian = 0;
};

/// Pre-ceiling bound (32 K^2 ln(1/delta) + 1/4) / accuracy^2.
double sample_size_bound(double K_max, double delta, double accuracy);

/// Smallest integer sample sizes meeting the concentration bounds. Throws
/// std::domain_error outside 0 < delta, delta_g, delta_H < 1, K > 0.
SampleSizes required_sample_sizes(const SampleSizeParams& p);

/// Fraction of `trials` independent gradient samples of size `sample_size` that
/// land within delta_g of grad f(x).
double concentration_trial(const SeparableObjective& objective, const ManifoldPoint& x, std::size_t sample_size,
                           double delta_g, std::size_t trials, std::uint64_t seed);

}  // namespace racr
