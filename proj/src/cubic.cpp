#include "racr/cubic.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/format.h>

namespace racr {

void CubicModel::validate() const {
  if (manifold == nullptr) throw ContractViolation("cubic model has no manifold");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ContractViolation(fmt::format("sigma = {} must be > 0", sigma));
  if (!hvp) throw ContractViolation("cubic model has no Hessian operator");
  if (!gradient.base().same_as(base)) throw ContractViolation("model gradient is not attached to the base point");
}

double eval_model(const CubicModel& model, const TangentVector& eta) {
  model.validate();
  const Manifold& M = *model.manifold;
  const double n = M.norm(model.base, eta);
  return M.inner(model.base, model.gradient, eta) + 0.5 * M.inner(model.base, model.hvp(eta), eta) +
         model.sigma / 3.0 * n * n * n;
}

double model_along(double g_dot_d, double curvature, double norm_d, double sigma, double t) {
  const double tn = t * norm_d;
  return t * g_dot_d + 0.5 * t * t * curvature + sigma / 3.0 * tn * tn * tn;
}

double cauchy_alpha(double grad_norm, double curvature, double sigma) {
  const double g2 = grad_norm * grad_norm;
  const double a = sigma * g2 * grad_norm;
  const double disc = std::sqrt(curvature * curvature + 4.0 * a * g2);
  if (curvature >= 0.0) return 2.0 * g2 / (curvature + disc);
  return (disc - curvature) / (2.0 * a);
}

CauchyStep cauchy_point(const CubicModel& model) {
  model.validate();
  const Manifold& M = *model.manifold;
  const double gn = M.norm(model.base, model.gradient);
  if (!(gn > 0.0)) throw ZeroGradient("Cauchy point is undefined for a zero gradient");
  CauchyStep out;
  out.curvature = M.inner(model.base, model.hvp(model.gradient), model.gradient);
  out.alpha = cauchy_alpha(gn, out.curvature, model.sigma);
  out.eta = -out.alpha * model.gradient;
  out.model_value = model_along(-gn * gn, out.curvature, gn, model.sigma, out.alpha);
  return out;
}

EigenEstimate min_eig_estimate(const CubicModel& model, const LanczosOptions& opts) {
  model.validate();
  const Manifold& M = *model.manifold;
  const ManifoldPoint& x = model.base;
  const int dim = static_cast<int>(M.dimension());
  if (dim < 1) throw ContractViolation("tangent space is zero-dimensional");
  const int budget = std::min(opts.max_iters > 0 ? opts.max_iters : 5 * dim, dim);

  std::vector<TangentVector> Q;
  std::vector<TangentVector> HQ;
  std::vector<double> alpha;
  std::vector<double> beta;
  Q.push_back(M.random_tangent(x, opts.seed));

  EigenEstimate est;
  Eigen::VectorXd ritz;
  for (int j = 0; j < budget; ++j) {
    TangentVector w = model.hvp(Q[j]);
    HQ.push_back(w);
    alpha.push_back(M.inner(x, Q[j], w));
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : Q) w += (-M.inner(x, q, w)) * q;
    w = M.project(x, w.data());  // roundoff leaves the tangent space once beta is small
    const double b = M.norm(x, w);

    const int m = j + 1;
    Matrix T = Matrix::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(T);
    ritz = eig.eigenvectors().col(0);
    est.hess_norm = std::max(est.hess_norm, eig.eigenvalues().cwiseAbs().maxCoeff());
    est.iterations = m;

    const double residual = b * std::abs(ritz(m - 1));
    if (residual <= opts.tol * std::max(1.0, est.hess_norm) || m == dim || b <= 1e-14 * std::max(1.0, est.hess_norm)) {
      est.converged = true;
      break;
    }
    beta.push_back(b);
    Q.push_back((1.0 / b) * w);
  }

  const int m = static_cast<int>(ritz.size());
  TangentVector v = M.zero_vector(x);
  TangentVector Hv = M.zero_vector(x);
  for (int i = 0; i < m; ++i) {
    v += ritz(i) * Q[i];
    Hv += ritz(i) * HQ[i];
  }
  const double vn = M.norm(x, v);
  v *= 1.0 / vn;
  Hv *= 1.0 / vn;
  est.lambda = M.inner(x, v, Hv);
  est.residual = (Hv - est.lambda * v).norm();
  est.vector = std::move(v);
  return est;
}

double eigen_beta(double abs_g_dot_v, double curvature, double sigma) {
  const double disc = std::sqrt(curvature * curvature + 4.0 * sigma * abs_g_dot_v);
  if (curvature < 0.0) return (disc - curvature) / (2.0 * sigma);
  if (abs_g_dot_v == 0.0) return 0.0;
  return 2.0 * abs_g_dot_v / (curvature + disc);
}

EigenStep eigen_point(const CubicModel& model, const TangentVector& v, double curvature) {
  model.validate();
  if (!(curvature < 0.0))
    throw std::domain_error(fmt::format("eigen point needs negative curvature, got {}", curvature));
  const Manifold& M = *model.manifold;
  const double vn = M.norm(model.base, v);
  const TangentVector u = (1.0 / vn) * v;
  const double c = curvature;
  const double gv = M.inner(model.base, model.gradient, u);
  EigenStep out;
  out.direction = gv > 0.0 ? -1.0 : 1.0;
  out.beta = eigen_beta(std::abs(gv), c, model.sigma);
  out.eta = (out.direction * out.beta) * u;
  out.model_value = model_along(-std::abs(gv), c, 1.0, model.sigma, out.beta);
  return out;
}

namespace {

struct Refinement {
  TangentVector eta;
  double value;
  int hvp_calls;
  bool improved;
};

// Normalized gradient steps on m with halving backtracking. A step is kept
// only if it strictly lowers m below `ceiling`.
Refinement refine(const CubicModel& model, TangentVector eta, double ceiling, int steps) {
  const Manifold& M = *model.manifold;
  const ManifoldPoint& x = model.base;
  const double sigma = model.sigma;
  int calls = 1;
  TangentVector Heta = model.hvp(eta);
  auto value = [&](const TangentVector& e, const TangentVector& He) {
    const double n = M.norm(x, e);
    return M.inner(x, model.gradient, e) + 0.5 * M.inner(x, He, e) + sigma / 3.0 * n * n * n;
  };
  double current = std::min(value(eta, Heta), ceiling);
  bool improved = false;
  for (int s = 0; s < steps; ++s) {
    TangentVector g = model.gradient + Heta + (sigma * M.norm(x, eta)) * eta;
    const double gn = M.norm(x, g);
    if (!(gn > 0.0)) break;
    const TangentVector d = (-1.0 / gn) * g;
    const TangentVector Hd = model.hvp(d);
    ++calls;
    double t = std::max(M.norm(x, eta), 1e-8);
    bool moved = false;
    for (int k = 0; k < 40; ++k, t *= 0.5) {
      TangentVector trial = eta + t * d;
      TangentVector Htrial = Heta + t * Hd;
      const double v = value(trial, Htrial);
      if (v < current) {
        eta = std::move(trial);
        Heta = std::move(Htrial);
        current = v;
        moved = improved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return {std::move(eta), current, calls, improved};
}

}  // namespace

SubsolverResult solve_subproblem(const CubicModel& model, const SubsolverOptions& opts) {
  model.validate();
  const Manifold& M = *model.manifold;
  SubsolverResult out;

  std::optional<EigenEstimate> eig = opts.precomputed;
  if (!eig && opts.probe_curvature) {
    int calls = 0;
    CubicModel counted = model;
    counted.hvp = [&](const TangentVector& v) {
      ++calls;
      return model.hvp(v);
    };
    eig = min_eig_estimate(counted, opts.lanczos);
    out.hvp_calls += calls;
  }
  bool negative = false;
  if (eig) {
    out.lambda_min_est = eig->lambda;
    out.lanczos_converged = eig->converged;
    negative = eig->lambda < -opts.negative_curvature_threshold * std::max(1.0, eig->hess_norm);
    if (eig->lambda < 0.0) out.nu = eig->lambda / (eig->lambda - eig->residual);
  }

  const double gn = M.norm(model.base, model.gradient);
  if (gn > 0.0) {
    CauchyStep c = cauchy_point(model);
    ++out.hvp_calls;
    out.eta = std::move(c.eta);
    out.cauchy_value = c.model_value;
  } else {
    if (!negative) throw ZeroGradient("zero gradient and no negative curvature: nothing to solve");
    out.eta = M.zero_vector(model.base);
    out.cauchy_value = 0.0;
  }
  out.model_value = out.cauchy_value;

  if (negative) {
    EigenStep e = eigen_point(model, eig->vector, eig->lambda);
    out.eigen_value = e.model_value;
    if (e.model_value < out.cauchy_value) {
      out.eta = std::move(e.eta);
      out.model_value = e.model_value;
      out.used_eigen_step = true;
    }
  }

  const int steps = std::clamp(opts.refine_steps, 0, 20);
  if (steps > 0) {
    Refinement r = refine(model, out.eta, out.model_value, steps);
    out.hvp_calls += r.hvp_calls;
    if (r.improved && r.value < out.model_value) {
      out.eta = std::move(r.eta);
      out.model_value = r.value;
      out.refined = true;
    }
  }
  return out;
}

}  // namespace racr
