#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>

#include "racr/cubic.hpp"
#include "racr/objective.hpp"
#include "racr/oracles.hpp"
#include "racr/trace.hpp"

namespace racr {

enum class EigencheckPolicy { EveryIteration, OnSmallGradient };

struct StoppingRule {
  enum class Kind { SecondOrder, GradSquaredThreshold };
  Kind kind = Kind::SecondOrder;
  double tau = 1e-3;  // used by GradSquaredThreshold

  static StoppingRule second_order() { return {}; }
  static StoppingRule grad_squared(double tau) { return {Kind::GradSquaredThreshold, tau}; }
};

/// Tunables for the cubic-regularization driver and the trust-region baseline.
struct SolverConfig {
  double eps_g = 1e-3;
  double eps_H = 1e-3;
  double rho_th = 0.9;
  double gamma = 2.0;
  double sigma0 = 1e-3;
  double sigma_floor = 1e-12;
  std::uint64_t max_iters = 0;  // 0: 50 max{eps_g^-2, eps_H^-3}, capped at 1e6

  OracleMode oracle_mode = OracleMode::Exact;
  std::size_t grad_sample = 1;
  std::size_t hess_sample = 1;
  std::uint64_t seed = 0;

  EigencheckPolicy eigencheck = EigencheckPolicy::OnSmallGradient;
  StoppingRule stopping;
  SubsolverOptions subsolver;

  // Trust-region baseline.
  double delta0 = 1.0;
  double delta_max = 0.0;  // 0: 10 delta0

  /// Record a per-iteration empirical cubic-remainder constant using exact
  /// oracles (extra cost; test diagnostics).
  bool track_lipschitz = false;

  /// Throws ContractViolation when a field is out of range.
  void validate() const;
  std::uint64_t iteration_budget() const;
  double effective_delta_max() const { return delta_max > 0.0 ? delta_max : 10.0 * delta0; }
};

/// RACR: exact G and H; SRACR: exact G, sub-sampled H; SSRACR: both
/// sub-sampled; SSRTR: sub-sampled trust-region baseline.
enum class Variant { RACR, SRACR, SSRACR, SSRTR };

std::string_view to_string(Variant v);
/// Throws std::invalid_argument for an unknown name.
Variant parse_variant(std::string_view name);
OracleMode oracle_mode_for(Variant v);
/// Copy of cfg with the variant's oracle mode.
SolverConfig configure_variant(SolverConfig cfg, Variant v);

class MissingEigenEstimate : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// ||G|| <= eps_g and lambda_min >= -eps_H, or ||G||^2 <= tau under GradSquaredThreshold.
bool should_terminate(double grad_norm, std::optional<double> lambda_min, const SolverConfig& cfg);

/// (f(x_k) - f(R(eta))) / (-m_k(eta)).
double acceptance_ratio(double f_current, double f_trial, double model_value);

struct SigmaUpdate {
  double sigma;
  bool clamped;
};
SigmaUpdate update_sigma(double sigma, bool success, const SolverConfig& cfg);

struct ArcState {
  ManifoldPoint x;
  double f = 0.0;
  double sigma = 0.0;
  std::uint64_t k = 0;
};

struct ArcStepResult {
  enum class Status { Continue, Terminated, SubsolverFailure, NumericalFailure };
  Status status = Status::Continue;
  std::optional<IterationRecord> record;  // absent when Terminated before a step
};

/// One iteration: oracles, termination test, sub-problem, ratio test and sigma update. Updates `state` in place.
ArcStepResult arc_step(ArcState& state, OracleBundle& oracle, const SolverConfig& cfg);

/// Runs until the stopping rule fires or the budget is spent.
RunTrace run_arc(const SeparableObjective& objective, const ManifoldPoint& x0, const SolverConfig& cfg);

/// Largest lipschitz_sample on the trace, if any were recorded.
std::optional<double> empirical_lipschitz(const RunTrace& trace);

/// Cubic-remainder ratio 2 |f(R(eta)) - f - <grad f, eta> - 1/2 <Hess f[eta], eta>| / ||eta||^3.
double cubic_remainder_ratio(const SeparableObjective& objective, const ManifoldPoint& x, const TangentVector& eta);

}  // namespace racr
