#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>

#include "racr/manifold.hpp"

namespace racr {

using HvpOperator = std::function<TangentVector(const TangentVector&)>;

class ZeroGradient : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// m(eta) = <G, eta> + 1/2 <H[eta], eta> + sigma/3 ||eta||^3 on T_x M.
struct CubicModel {
  const Manifold* manifold = nullptr;
  ManifoldPoint base;
  TangentVector gradient;
  HvpOperator hvp;
  double sigma = 1.0;

  /// Checks sigma > 0 and that the gradient is attached to base.
  void validate() const;
};

double eval_model(const CubicModel& model, const TangentVector& eta);

/// Value of the model along a direction from the scalars <G,d>, <d,H[d]>, ||d||.
double model_along(double g_dot_d, double curvature, double norm_d, double sigma, double t);

struct CauchyStep {
  TangentVector eta;
  double alpha = 0.0;      // eta = -alpha G
  double curvature = 0.0;  // <G, H[G]>
  double model_value = 0.0;
};

/// Exact minimizer of m along -G: alpha is the positive root of
/// sigma ||G||^3 a^2 + <G,H[G]> a - ||G||^2 = 0. Throws ZeroGradient if G = 0.
CauchyStep cauchy_point(const CubicModel& model);

/// Positive root of sigma ||G||^3 a^2 + curvature a - ||G||^2 = 0.
double cauchy_alpha(double grad_norm, double curvature, double sigma);

struct EigenEstimate {
  double lambda = 0.0;    // Rayleigh quotient <v, H[v]> of v
  TangentVector vector;   // unit norm
  double residual = 0.0;  // ||H[v] - lambda v||
  double hess_norm = 0.0; // largest |Ritz value| seen
  int iterations = 0;
  bool converged = false;
};

struct LanczosOptions {
  double tol = 1e-6;
  int max_iters = 0;  // 0: 5 * tangent dimension
  std::uint64_t seed = 0;
};

/// Smallest eigenvalue of H restricted to T_x M by Lanczos with full
/// reorthogonalization. The estimate is a Rayleigh quotient, so it never lies
/// below the true minimum.
EigenEstimate min_eig_estimate(const CubicModel& model, const LanczosOptions& opts);

struct EigenStep {
  TangentVector eta;
  double beta = 0.0;        // step length along s v
  double direction = 1.0;   // s = -sign(<G,v>), +1 when <G,v> = 0
  double model_value = 0.0;
};

/// Exact minimizer of m along s v over beta >= 0 where v has curvature
/// `curvature` = <v, H[v]> < 0. Throws std::domain_error when curvature >= 0.
EigenStep eigen_point(const CubicModel& model, const TangentVector& v, double curvature);

/// Minimizer over beta >= 0 of -|g| beta + 1/2 c beta^2 + sigma/3 beta^3.
double eigen_beta(double abs_g_dot_v, double curvature, double sigma);

struct SubsolverOptions {
  bool probe_curvature = true;
  LanczosOptions lanczos;
  /// Estimates below -threshold * max(1, ||H||) count as negative curvature.
  double negative_curvature_threshold = 1e-10;
  int refine_steps = 0;  // gradient steps on m after the Cauchy/eigen choice (<= 20)
  /// Reuse an eigen estimate already computed at this iterate.
  std::optional<EigenEstimate> precomputed;
};

struct SubsolverResult {
  TangentVector eta;
  double model_value = 0.0;
  double cauchy_value = 0.0;
  std::optional<double> eigen_value;
  std::optional<double> lambda_min_est;
  std::optional<double> nu;  // lambda_est / certified lower bound on nearby eigenvalue
  bool used_eigen_step = false;
  bool refined = false;
  bool lanczos_converged = true;
  int hvp_calls = 0;
};

/// Best of the Cauchy step and, when negative curvature is found, the eigen
/// step, optionally improved by gradient steps on m. The result never has a
/// larger model value than either candidate.
SubsolverResult solve_subproblem(const CubicModel& model, const SubsolverOptions& opts = {});

}  // namespace racr
