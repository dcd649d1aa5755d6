#include "aadmm/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace aadmm {

void ProblemInstance::validate() const {
  require_same_size(A.rows(), B.rows(), "ProblemInstance A/B rows");
  require_same_size(A.rows(), b.size(), "ProblemInstance b");
  require_finite(A, "ProblemInstance A");
  require_finite(B, "ProblemInstance B");
  require_finite(b, "ProblemInstance b");
  if (!u_solver || !v_solver) {
    throw std::invalid_argument("ProblemInstance: missing subproblem solver");
  }
}

double Residuals::primal_normalizer() const {
  return std::max({norm_Au, norm_Bv, norm_b});
}

void StoppingConfig::validate() const {
  if (!(eps_tol > 0.0)) throw std::invalid_argument("StoppingConfig: eps_tol must be > 0");
  if (max_iters < 0) throw std::invalid_argument("StoppingConfig: max_iters must be >= 0");
}

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::kConverged: return "converged";
    case RunStatus::kMaxIters: return "max_iters";
    case RunStatus::kError: return "error";
  }
  return "unknown";
}

IterateState initial_state(const ProblemInstance& problem, const Initialization& init) {
  require_same_size(init.v0.size(), problem.m(), "initial v0");
  require_same_size(init.lambda0.size(), problem.p(), "initial lambda0");
  require_finite(init.v0, "initial v0");
  require_finite(init.lambda0, "initial lambda0");
  if (!(init.tau0 > 0.0) || !std::isfinite(init.tau0)) {
    throw std::invalid_argument("initial tau0 must be positive and finite");
  }
  IterateState s;
  s.k = 0;
  s.u = Vector::Zero(problem.n());
  s.v = init.v0;
  s.lambda = init.lambda0;
  s.lambda_hat = init.lambda0;
  s.tau = init.tau0;
  s.v_prev = init.v0;
  s.Au = Vector::Zero(problem.p());
  s.Bv = problem.B * init.v0;
  return s;
}

IterateState admm_step(const ProblemInstance& problem, const IterateState& state) {
  const double tau = state.tau;
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw std::invalid_argument("admm_step: tau must be positive and finite");
  }
  IterateState next;
  next.k = state.k + 1;
  next.tau = tau;

  next.u = problem.u_solver(state.v, state.lambda, tau);
  require_same_size(next.u.size(), problem.n(), "u_solver output");
  require_finite(next.u, "u iterate");
  next.Au = problem.A * next.u;

  next.v = problem.v_solver(next.u, state.lambda, tau);
  require_same_size(next.v.size(), problem.m(), "v_solver output");
  require_finite(next.v, "v iterate");
  next.Bv = problem.B * next.v;

  const Vector base = problem.b - next.Au;
  next.lambda_hat = state.lambda + tau * (base - state.Bv);
  next.lambda = state.lambda + tau * (base - next.Bv);
  require_finite(next.lambda, "lambda iterate");
  next.v_prev = state.v;
  return next;
}

Residuals compute_residuals(const ProblemInstance& problem, const IterateState& state) {
  Residuals res;
  res.r = problem.b - state.Au - state.Bv;
  res.d = state.tau * (problem.A.transpose() * (problem.B * (state.v - state.v_prev)));
  res.r_norm = res.r.norm();
  res.d_norm = res.d.norm();
  res.norm_Au = state.Au.norm();
  res.norm_Bv = state.Bv.norm();
  res.norm_b = problem.b.norm();
  res.norm_ATlambda = (problem.A.transpose() * state.lambda).norm();

  const double pn = res.primal_normalizer();
  double primal_rel = res.r_norm;
  if (pn > 0.0) {
    primal_rel /= pn;
  } else {
    res.primal_absolute = true;
  }
  double dual_rel = res.d_norm;
  if (res.norm_ATlambda > 0.0) {
    dual_rel /= res.norm_ATlambda;
  } else {
    res.dual_absolute = true;
  }
  res.rel_residual = std::max(primal_rel, dual_rel);
  return res;
}

StopDecision check_stop(const Residuals& residuals, const IterateState& state,
                        const StoppingConfig& config) {
  // A vanished normalizer turns the corresponding test into an absolute one.
  const double pn = residuals.primal_absolute ? 1.0 : residuals.primal_normalizer();
  const double dn = residuals.dual_absolute ? 1.0 : residuals.norm_ATlambda;
  const bool primal_ok = residuals.r_norm <= config.eps_tol * pn;
  const bool dual_ok = residuals.d_norm <= config.eps_tol * dn;
  if (primal_ok && dual_ok) return StopDecision::kConverged;
  if (state.k >= config.max_iters) return StopDecision::kMaxIters;
  return StopDecision::kContinue;
}

RunResult run(const ProblemInstance& problem, PenaltyPolicy& policy,
              const Initialization& init, const StoppingConfig& config,
              const RunOptions& options) {
  problem.validate();
  config.validate();

  // Copying the instance copies the solver closures, and with them any
  // factorization caches, so concurrent runs never share mutable state.
  const ProblemInstance local = problem;

  RunResult result;
  result.trace.problem = problem.name;
  result.trace.policy = policy.name();
  result.state = initial_state(local, init);
  policy.reset(init.tau0);

  if (config.max_iters == 0) {
    result.trace.status = RunStatus::kMaxIters;
    return result;
  }

  const auto start = std::chrono::steady_clock::now();
  while (true) {
    IterateState next;
    Residuals res;
    try {
      next = admm_step(local, result.state);
      res = compute_residuals(local, next);
    } catch (const std::exception& e) {
      result.trace.status = RunStatus::kError;
      result.trace.message = e.what();
      return result;
    }
    const StopDecision decision = check_stop(res, next, config);
    if (options.observer) options.observer(next, res);

    PolicyUpdate update = policy.update(next, res);

    TraceRecord rec;
    rec.k = next.k;
    rec.tau = next.tau;
    rec.r_norm = res.r_norm;
    rec.d_norm = res.d_norm;
    rec.rel_residual = res.rel_residual;
    rec.norm_Au = res.norm_Au;
    rec.norm_Bv = res.norm_Bv;
    rec.norm_b = res.norm_b;
    rec.norm_ATlambda = res.norm_ATlambda;
    rec.absolute_fallback = res.primal_absolute || res.dual_absolute;
    rec.diagnostics = std::move(update.diagnostics);
    rec.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.trace.records.push_back(std::move(rec));

    result.state = std::move(next);
    if (decision == StopDecision::kConverged) {
      result.trace.status = RunStatus::kConverged;
      return result;
    }
    if (decision == StopDecision::kMaxIters) {
      result.trace.status = RunStatus::kMaxIters;
      return result;
    }
    if (!(update.tau > 0.0) || !std::isfinite(update.tau)) {
      result.trace.status = RunStatus::kError;
      result.trace.message = "policy produced a non-positive or non-finite tau";
      return result;
    }
    result.state.tau = update.tau;
  }
}

}  // namespace aadmm
