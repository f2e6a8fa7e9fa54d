#pragma once

#include "racr/arc.hpp"

namespace racr {

struct TcgResult {
  TangentVector eta;
  double model_value = 0.0;  // <G,eta> + 1/2 <H[eta],eta>
  int iterations = 0;
  int hvp_calls = 0;
  bool hit_boundary = false;
  bool negative_curvature = false;
};

/// Steihaug-Toint truncated CG for min <G,eta> + 1/2 <H[eta],eta> s.t.
/// ||eta|| <= radius. Stops on negative curvature or a radius breach (moving
/// to the boundary), when ||r|| <= min(0.1, sqrt||G||) ||G||, or after
/// dimension iterations.
TcgResult tr_subproblem(const Manifold& manifold, const ManifoldPoint& x, const TangentVector& G,
                        const HvpOperator& hvp, double radius);

/// Cauchy point of the quadratic trust-region model.
TangentVector tr_cauchy_point(const Manifold& manifold, const ManifoldPoint& x, const TangentVector& G,
                              const HvpOperator& hvp, double radius);

struct TrustRegionState {
  ManifoldPoint x;
  double f = 0.0;
  double delta = 1.0;
  double delta_max = 10.0;
  std::uint64_t k = 0;
};

/// Accept: min(gamma Delta, Delta_max). Reject: Delta / gamma.
double update_radius(double delta, bool success, double gamma, double delta_max);

/// One trust-region iteration; the same result shape as arc_step with the
/// record's sigma field holding Delta_k.
ArcStepResult tr_step(TrustRegionState& state, OracleBundle& oracle, const SolverConfig& cfg);

RunTrace run_trust_region(const SeparableObjective& objective, const ManifoldPoint& x0, const SolverConfig& cfg);

}  // namespace racr
