#include "racr/trust_region.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "racr/rng.hpp"

namespace racr {

namespace {

// tau >= 0 with ||eta + tau d|| = radius.
double boundary_step(const Manifold& M, const ManifoldPoint& x, const TangentVector& eta, const TangentVector& d,
                     double radius) {
  const double ed = M.inner(x, eta, d);
  const double dd = M.inner(x, d, d);
  const double ee = M.inner(x, eta, eta);
  const double disc = std::sqrt(std::max(0.0, ed * ed + dd * (radius * radius - ee)));
  return (disc - ed) / dd;
}

}  // namespace

TcgResult tr_subproblem(const Manifold& M, const ManifoldPoint& x, const TangentVector& G, const HvpOperator& hvp,
                        double radius) {
  if (!(radius > 0.0)) throw ContractViolation(fmt::format("trust radius {} must be positive", radius));
  TcgResult out;
  out.eta = M.zero_vector(x);
  TangentVector Heta = M.zero_vector(x);
  const double g0 = M.norm(x, G);
  if (!(g0 > 0.0)) return out;

  const double stop = g0 * std::min(0.1, std::sqrt(g0));
  TangentVector r = G;
  TangentVector d = -G;
  double rr = g0 * g0;
  const int max_iters = static_cast<int>(M.dimension());
  for (int j = 0; j < max_iters; ++j) {
    const TangentVector Hd = hvp(d);
    ++out.hvp_calls;
    out.iterations = j + 1;
    const double dHd = M.inner(x, d, Hd);
    if (dHd <= 0.0) {
      const double tau = boundary_step(M, x, out.eta, d, radius);
      out.eta += tau * d;
      Heta += tau * Hd;
      out.negative_curvature = out.hit_boundary = true;
      break;
    }
    const double a = rr / dHd;
    TangentVector next = out.eta + a * d;
    if (M.norm(x, next) >= radius) {
      const double tau = boundary_step(M, x, out.eta, d, radius);
      out.eta += tau * d;
      Heta += tau * Hd;
      out.hit_boundary = true;
      break;
    }
    out.eta = std::move(next);
    Heta += a * Hd;
    r += a * Hd;
    const double rr_next = M.inner(x, r, r);
    if (std::sqrt(rr_next) <= stop) break;
    d = (rr_next / rr) * d - r;
    rr = rr_next;
  }
  out.model_value = M.inner(x, G, out.eta) + 0.5 * M.inner(x, Heta, out.eta);
  return out;
}

TangentVector tr_cauchy_point(const Manifold& M, const ManifoldPoint& x, const TangentVector& G,
                              const HvpOperator& hvp, double radius) {
  const double gn = M.norm(x, G);
  if (!(gn > 0.0)) return M.zero_vector(x);
  const double kappa = M.inner(x, G, hvp(G));
  double tau = 1.0;
  if (kappa > 0.0) tau = std::min(gn * gn * gn / (radius * kappa), 1.0);
  return (-tau * radius / gn) * G;
}

double update_radius(double delta, bool success, double gamma, double delta_max) {
  return success ? std::min(gamma * delta, delta_max) : delta / gamma;
}

ArcStepResult tr_step(TrustRegionState& state, OracleBundle& oracle, const SolverConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  const SeparableObjective& objective = oracle.objective();
  const Manifold& M = objective.manifold();
  const ManifoldPoint x = state.x;

  oracle.begin_iteration(x, state.k);
  const TangentVector G = oracle.gradient(x);
  const double gn = M.norm(x, G);
  if (!std::isfinite(gn)) return {ArcStepResult::Status::NumericalFailure, std::nullopt};
  const HvpOperator hvp = [&oracle, x](const TangentVector& v) { return oracle.hvp(x, v); };

  std::optional<double> lambda;
  const bool second_order = cfg.stopping.kind == StoppingRule::Kind::SecondOrder;
  if (cfg.eigencheck == EigencheckPolicy::EveryIteration || (second_order && gn <= cfg.eps_g)) {
    LanczosOptions lanczos = cfg.subsolver.lanczos;
    lanczos.seed = rng::derive(cfg.seed, state.k, "lanczos");
    lambda = min_eig_estimate(CubicModel{&M, x, G, hvp, 1.0}, lanczos).lambda;
  }
  if (should_terminate(gn, lambda, cfg)) return {ArcStepResult::Status::Terminated, std::nullopt};

  const TcgResult tcg = tr_subproblem(M, x, G, hvp, state.delta);
  if (!(-tcg.model_value >= 1e-16 * std::max(1.0, std::abs(state.f))))
    return {ArcStepResult::Status::SubsolverFailure, std::nullopt};

  ManifoldPoint trial;
  try {
    trial = M.retract(x, tcg.eta);
  } catch (const SingularRetraction&) {
    return {ArcStepResult::Status::NumericalFailure, std::nullopt};
  }
  const double f_trial = oracle.value(trial);
  if (!std::isfinite(f_trial)) return {ArcStepResult::Status::NumericalFailure, std::nullopt};

  IterationRecord rec;
  rec.k = state.k;
  rec.f = state.f;
  rec.grad_norm = gn;
  rec.sigma = state.delta;
  rec.model_value = tcg.model_value;
  rec.rho = acceptance_ratio(state.f, f_trial, tcg.model_value);
  rec.success = rec.rho >= cfg.rho_th;
  rec.lambda_min = lambda;
  rec.step_norm = M.norm(x, tcg.eta);
  if (cfg.track_lipschitz) rec.lipschitz_sample = cubic_remainder_ratio(objective, x, tcg.eta);

  if (rec.success) {
    state.x = trial;
    state.f = f_trial;
  }
  state.delta = update_radius(state.delta, rec.success, cfg.gamma, state.delta_max);
  ++state.k;

  rec.grad_evals = oracle.counters().grad_evals;
  rec.hess_evals = oracle.counters().hess_evals;
  rec.millis = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  return {ArcStepResult::Status::Continue, rec};
}

RunTrace run_trust_region(const SeparableObjective& objective, const ManifoldPoint& x0, const SolverConfig& cfg) {
  cfg.validate();
  const Manifold& M = objective.manifold();
  if (M.feasibility_residual(x0.data()) > 1e-10) throw ContractViolation("initial point is not on the manifold");

  OracleBundle oracle(objective, cfg.oracle_mode, cfg.grad_sample, cfg.hess_sample, cfg.seed);
  TrustRegionState state{x0, oracle.value(x0), cfg.delta0, cfg.effective_delta_max(), 0};

  RunTrace trace;
  trace.kind = TraceKind::TrustRegion;
  trace.meta = {{"oracle_mode", std::string(to_string(cfg.oracle_mode))},
                {"gamma", fmt::format("{:.17g}", cfg.gamma)},
                {"delta0", fmt::format("{:.17g}", cfg.delta0)},
                {"delta_max", fmt::format("{:.17g}", state.delta_max)},
                {"rho_th", fmt::format("{:.17g}", cfg.rho_th)},
                {"grad_sample", std::to_string(oracle.effective_grad_sample_size())},
                {"hess_sample", std::to_string(oracle.effective_hess_sample_size())},
                {"seed", std::to_string(cfg.seed)}};

  const std::uint64_t budget = cfg.iteration_budget();
  trace.outcome = Outcome::MaxIters;
  while (state.k < budget) {
    ArcStepResult r = tr_step(state, oracle, cfg);
    if (r.record) {
      (r.record->success ? trace.n_succ : trace.n_fail) += 1;
      trace.records.push_back(std::move(*r.record));
    }
    if (r.status != ArcStepResult::Status::Continue) {
      switch (r.status) {
        case ArcStepResult::Status::Terminated:
          trace.outcome = Outcome::OptimalityReached;
          break;
        case ArcStepResult::Status::SubsolverFailure:
          trace.outcome = Outcome::SubsolverFailure;
          break;
        default:
          trace.outcome = Outcome::NumericalFailure;
          break;
      }
      break;
    }
  }
  trace.final_grad_evals = oracle.counters().grad_evals;
  trace.final_hess_evals = oracle.counters().hess_evals;
  trace.final_point = state.x;
  return trace;
}

}  // namespace racr
