#include "racr/oracles.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "racr/rng.hpp"

namespace racr {

std::string_view to_string(OracleMode mode) {
  switch (mode) {
    case OracleMode::Exact:
      return "exact";
    case OracleMode::SubsampledHessianOnly:
      return "subsampled-hessian";
    case OracleMode::SubsampledBoth:
      return "subsampled-both";
  }
  return "?";
}

std::vector<ComponentIndex> draw_sample(std::size_t n, std::size_t size, std::uint64_t seed, std::uint64_t k,
                                        std::string_view purpose) {
  auto engine = rng::stream(seed, k, purpose);
  std::uniform_int_distribution<ComponentIndex> pick(0, n - 1);
  std::vector<ComponentIndex> out(size);
  for (auto& i : out) i = pick(engine);
  return out;
}

OracleBundle::OracleBundle(const SeparableObjective& objective, OracleMode mode, std::size_t grad_sample_size,
                           std::size_t hess_sample_size, std::uint64_t seed)
    : objective_(objective),
      mode_(mode),
      grad_size_(grad_sample_size),
      hess_size_(hess_sample_size),
      seed_(seed),
      all_(objective.all_components()) {
  const std::size_t n = objective.size();
  if (n == 0) throw ContractViolation("objective has no components");
  if (samples_gradient() && (grad_size_ < 1 || grad_size_ > n))
    throw ContractViolation(fmt::format("gradient sample size {} outside [1, {}]", grad_size_, n));
  if (samples_hessian() && (hess_size_ < 1 || hess_size_ > n))
    throw ContractViolation(fmt::format("hessian sample size {} outside [1, {}]", hess_size_, n));
}

bool OracleBundle::samples_gradient() const {
  return mode_ == OracleMode::SubsampledBoth && !exact_gradient_override_;
}

bool OracleBundle::samples_hessian() const { return mode_ != OracleMode::Exact; }

std::size_t OracleBundle::effective_grad_sample_size() const {
  return samples_gradient() ? grad_size_ : objective_.size();
}

std::size_t OracleBundle::effective_hess_sample_size() const {
  return samples_hessian() ? hess_size_ : objective_.size();
}

void OracleBundle::begin_iteration(const ManifoldPoint& x, std::uint64_t k) {
  const std::size_t n = objective_.size();
  grad_sample_ = samples_gradient() ? draw_sample(n, grad_size_, seed_, k, "gradient_sample") : all_;
  hess_sample_ = samples_hessian() ? draw_sample(n, hess_size_, seed_, k, "hessian_sample") : all_;
  prepared_at_ = x;
  hess_egrad_.reset();
}

void OracleBundle::require_prepared(const ManifoldPoint& x, const char* what) const {
  if (!prepared_at_) throw StaleSample(fmt::format("{} requested before begin_iteration", what));
  if (!prepared_at_->same_as(x)) throw StaleSample(fmt::format("{} requested at a point with no drawn sample", what));
}

TangentVector OracleBundle::gradient(const ManifoldPoint& x) {
  require_prepared(x, "gradient");
  counters_.grad_evals += grad_sample_.size();
  const Matrix eg = objective_.egrad_sum(x, grad_sample_) / static_cast<double>(grad_sample_.size());
  // Exact gradient and exact Hessian share the full-sum egrad.
  if (!samples_gradient() && !samples_hessian()) hess_egrad_ = eg;
  return objective_.manifold().egrad_to_rgrad(x, eg);
}

TangentVector OracleBundle::hvp(const ManifoldPoint& x, const TangentVector& eta) {
  require_prepared(x, "hessian-vector product");
  if (!hess_egrad_) {
    counters_.hess_setup_evals += hess_sample_.size();
    hess_egrad_ = objective_.egrad_sum(x, hess_sample_) / static_cast<double>(hess_sample_.size());
  }
  counters_.hess_evals += hess_sample_.size();
  const double m = static_cast<double>(hess_sample_.size());
  return objective_.manifold().ehess_to_rhess(x, *hess_egrad_, objective_.ehess_sum(x, eta.data(), hess_sample_) / m,
                                              eta);
}

double OracleBundle::value(const ManifoldPoint& x) {
  counters_.value_evals += objective_.size();
  return objective_.value(x);
}

double sample_size_bound(double K_max, double delta, double accuracy) {
  return (32.0 * K_max * K_max * std::log(1.0 / delta) + 0.25) / (accuracy * accuracy);
}

SampleSizes required_sample_sizes(const SampleSizeParams& p) {
  auto open_unit = [](double v, const char* name) {
    if (!(v > 0.0 && v < 1.0)) throw std::domain_error(fmt::format("{} = {} must lie in (0, 1)", name, v));
  };
  open_unit(p.delta, "delta");
  open_unit(p.delta_g, "delta_g");
  open_unit(p.delta_H, "delta_H");
  if (!(p.K_g_max > 0.0)) throw std::domain_error("K_g_max must be positive");
  if (!(p.K_H_max > 0.0)) throw std::domain_error("K_H_max must be positive");
  return {static_cast<std::size_t>(std::ceil(sample_size_bound(p.K_g_max, p.delta, p.delta_g))),
          static_cast<std::size_t>(std::ceil(sample_size_bound(p.K_H_max, p.delta, p.delta_H)))};
}

double concentration_trial(const SeparableObjective& objective, const ManifoldPoint& x, std::size_t sample_size,
                           double delta_g, std::size_t trials, std::uint64_t seed) {
  if (trials == 0) return 0.0;
  const TangentVector exact = objective.rgrad(x);
  std::size_t hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto sample = draw_sample(objective.size(), sample_size, seed, t, "concentration");
    if ((objective.rgrad(x, sample) - exact).norm() <= delta_g) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(trials);
}

}  // namespace racr
