#include "racr/arc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "racr/rng.hpp"

namespace racr {

void SolverConfig::validate() const {
  auto open_unit = [](double v, const char* name) {
    if (!(v > 0.0 && v < 1.0)) throw ContractViolation(fmt::format("{} = {} must lie in (0, 1)", name, v));
  };
  open_unit(eps_g, "eps_g");
  open_unit(eps_H, "eps_H");
  open_unit(rho_th, "rho_th");
  if (!(gamma > 1.0)) throw ContractViolation(fmt::format("gamma = {} must exceed 1", gamma));
  if (!(sigma0 > 0.0)) throw ContractViolation(fmt::format("sigma0 = {} must be positive", sigma0));
  if (!(sigma_floor > 0.0)) throw ContractViolation("sigma_floor must be positive");
  if (!(delta0 > 0.0)) throw ContractViolation(fmt::format("delta0 = {} must be positive", delta0));
  if (delta_max != 0.0 && !(delta_max >= delta0)) throw ContractViolation("delta_max must be at least delta0");
  if (stopping.kind == StoppingRule::Kind::GradSquaredThreshold && !(stopping.tau > 0.0))
    throw ContractViolation(fmt::format("tau = {} must be positive", stopping.tau));
}

std::uint64_t SolverConfig::iteration_budget() const {
  if (max_iters > 0) return max_iters;
  const double bound = 50.0 * std::max(1.0 / (eps_g * eps_g), 1.0 / (eps_H * eps_H * eps_H));
  return static_cast<std::uint64_t>(std::ceil(std::min(bound, 1e6) - 1e-9));
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::RACR:
      return "RACR";
    case Variant::SRACR:
      return "SRACR";
    case Variant::SSRACR:
      return "SSRACR";
    case Variant::SSRTR:
      return "SSRTR";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::RACR, Variant::SRACR, Variant::SSRACR, Variant::SSRTR})
    if (name == to_string(v)) return v;
  throw std::invalid_argument(fmt::format("unknown solver '{}' (expected RACR, SRACR, SSRACR or SSRTR)", name));
}

OracleMode oracle_mode_for(Variant v) {
  switch (v) {
    case Variant::RACR:
      return OracleMode::Exact;
    case Variant::SRACR:
      return OracleMode::SubsampledHessianOnly;
    case Variant::SSRACR:
    case Variant::SSRTR:
      return OracleMode::SubsampledBoth;
  }
  return OracleMode::Exact;
}

SolverConfig configure_variant(SolverConfig cfg, Variant v) {
  cfg.oracle_mode = oracle_mode_for(v);
  return cfg;
}

bool should_terminate(double grad_norm, std::optional<double> lambda_min, const SolverConfig& cfg) {
  if (cfg.stopping.kind == StoppingRule::Kind::GradSquaredThreshold) return grad_norm * grad_norm <= cfg.stopping.tau;
  if (grad_norm > cfg.eps_g) return false;
  if (!lambda_min) throw MissingEigenEstimate("optimality test needs a smallest-eigenvalue estimate");
  return *lambda_min >= -cfg.eps_H;
}

double acceptance_ratio(double f_current, double f_trial, double model_value) {
  return (f_current - f_trial) / (-model_value);
}

SigmaUpdate update_sigma(double sigma, bool success, const SolverConfig& cfg) {
  if (!success) return {cfg.gamma * sigma, false};
  const double next = sigma / cfg.gamma;
  if (next < cfg.sigma_floor) return {cfg.sigma_floor, true};
  return {next, false};
}

double cubic_remainder_ratio(const SeparableObjective& objective, const ManifoldPoint& x, const TangentVector& eta) {
  const Manifold& M = objective.manifold();
  const double n = M.norm(x, eta);
  if (!(n > 0.0)) return 0.0;
  const double f0 = objective.value(x);
  const double f1 = objective.value(M.retract(x, eta));
  const double lin = M.inner(x, objective.rgrad(x), eta);
  const double quad = 0.5 * M.inner(x, objective.rhess(x, eta), eta);
  return 2.0 * std::abs(f1 - f0 - lin - quad) / (n * n * n);
}

ArcStepResult arc_step(ArcState& state, OracleBundle& oracle, const SolverConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  const SeparableObjective& objective = oracle.objective();
  const Manifold& M = objective.manifold();
  const ManifoldPoint x = state.x;

  oracle.begin_iteration(x, state.k);
  const TangentVector G = oracle.gradient(x);
  const double gn = M.norm(x, G);
  if (!std::isfinite(gn)) return {ArcStepResult::Status::NumericalFailure, std::nullopt};

  CubicModel model{&M, x, G, [&oracle, x](const TangentVector& v) { return oracle.hvp(x, v); }, state.sigma};

  LanczosOptions lanczos = cfg.subsolver.lanczos;
  lanczos.seed = rng::derive(cfg.seed, state.k, "lanczos");

  std::optional<EigenEstimate> eig;
  const bool second_order = cfg.stopping.kind == StoppingRule::Kind::SecondOrder;
  if (cfg.eigencheck == EigencheckPolicy::EveryIteration || (second_order && gn <= cfg.eps_g))
    eig = min_eig_estimate(model, lanczos);

  if (should_terminate(gn, eig ? std::optional<double>(eig->lambda) : std::nullopt, cfg))
    return {ArcStepResult::Status::Terminated, std::nullopt};

  SubsolverOptions sub = cfg.subsolver;
  sub.lanczos = lanczos;
  sub.precomputed = eig;
  SubsolverResult res;
  try {
    res = solve_subproblem(model, sub);
  } catch (const ZeroGradient&) {
    return {ArcStepResult::Status::SubsolverFailure, std::nullopt};
  }
  if (!(-res.model_value >= 1e-16 * std::max(1.0, std::abs(state.f))))
    return {ArcStepResult::Status::SubsolverFailure, std::nullopt};

  ManifoldPoint trial;
  try {
    trial = M.retract(x, res.eta);
  } catch (const SingularRetraction&) {
    return {ArcStepResult::Status::NumericalFailure, std::nullopt};
  }
  const double f_trial = oracle.value(trial);
  if (!std::isfinite(f_trial)) return {ArcStepResult::Status::NumericalFailure, std::nullopt};

  IterationRecord rec;
  rec.k = state.k;
  rec.f = state.f;
  rec.grad_norm = gn;
  rec.sigma = state.sigma;
  rec.model_value = res.model_value;
  rec.rho = acceptance_ratio(state.f, f_trial, res.model_value);
  rec.success = rec.rho >= cfg.rho_th;
  rec.lambda_min = res.lambda_min_est;
  rec.step_norm = M.norm(x, res.eta);
  if (cfg.track_lipschitz) rec.lipschitz_sample = cubic_remainder_ratio(objective, x, res.eta);

  if (rec.success) {
    state.x = trial;
    state.f = f_trial;
  }
  const SigmaUpdate next = update_sigma(state.sigma, rec.success, cfg);
  state.sigma = next.sigma;
  rec.sigma_clamped = next.clamped;
  ++state.k;

  rec.grad_evals = oracle.counters().grad_evals;
  rec.hess_evals = oracle.counters().hess_evals;
  rec.millis = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  return {ArcStepResult::Status::Continue, rec};
}

namespace {

Outcome outcome_of(ArcStepResult::Status s) {
  switch (s) {
    case ArcStepResult::Status::Terminated:
      return Outcome::OptimalityReached;
    case ArcStepResult::Status::SubsolverFailure:
      return Outcome::SubsolverFailure;
    case ArcStepResult::Status::NumericalFailure:
      return Outcome::NumericalFailure;
    case ArcStepResult::Status::Continue:
      break;
  }
  return Outcome::MaxIters;
}

}  // namespace

RunTrace run_arc(const SeparableObjective& objective, const ManifoldPoint& x0, const SolverConfig& cfg) {
  cfg.validate();
  const Manifold& M = objective.manifold();
  if (M.feasibility_residual(x0.data()) > 1e-10) throw ContractViolation("initial point is not on the manifold");

  OracleBundle oracle(objective, cfg.oracle_mode, cfg.grad_sample, cfg.hess_sample, cfg.seed);
  ArcState state{x0, oracle.value(x0), cfg.sigma0, 0};

  RunTrace trace;
  trace.kind = TraceKind::CubicRegularization;
  trace.meta = {{"oracle_mode", std::string(to_string(cfg.oracle_mode))},
                {"gamma", fmt::format("{:.17g}", cfg.gamma)},
                {"sigma0", fmt::format("{:.17g}", cfg.sigma0)},
                {"sigma_floor", fmt::format("{:.17g}", cfg.sigma_floor)},
                {"rho_th", fmt::format("{:.17g}", cfg.rho_th)},
                {"grad_sample", std::to_string(oracle.effective_grad_sample_size())},
                {"hess_sample", std::to_string(oracle.effective_hess_sample_size())},
                {"seed", std::to_string(cfg.seed)}};

  const std::uint64_t budget = cfg.iteration_budget();
  trace.outcome = Outcome::MaxIters;
  while (state.k < budget) {
    ArcStepResult r = arc_step(state, oracle, cfg);
    if (r.record) {
      (r.record->success ? trace.n_succ : trace.n_fail) += 1;
      trace.records.push_back(std::move(*r.record));
    }
    if (r.status != ArcStepResult::Status::Continue) {
      trace.outcome = outcome_of(r.status);
      break;
    }
  }
  trace.final_grad_evals = oracle.counters().grad_evals;
  trace.final_hess_evals = oracle.counters().hess_evals;
  trace.final_point = state.x;
  return trace;
}

std::optional<double> empirical_lipschitz(const RunTrace& trace) {
  std::optional<double> out;
  for (const auto& r : trace.records)
    if (r.lipschitz_sample) out = std::max(out.value_or(0.0), *r.lipschitz_sample);
  return out;
}

}  // namespace racr
