#include "aadmm/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace aadmm::oracle {

double drs_residual_ratio(double alpha, double beta, double tau) {
  return (1.0 + alpha * beta * tau * tau) / ((1.0 + alpha * tau) * (1.0 + beta * tau));
}

DrsStep drs_step_linear(const DrsLinearModel& model, const Vector& zeta, double tau) {
  require_same_size(model.a.size(), zeta.size(), "drs_step_linear a");
  require_same_size(model.b.size(), zeta.size(), "drs_step_linear b");
  const double a = model.alpha;
  const double b = model.beta;
  const Vector offset = model.a + model.b;
  DrsStep out;
  out.zeta_hat = ((1.0 - b * tau) * zeta - tau * offset) / (1.0 + a * tau);
  out.zeta = ((1.0 + a * b * tau * tau) * zeta - tau * offset) /
             ((1.0 + a * tau) * (1.0 + b * tau));
  return out;
}

double drs_residual(const DrsLinearModel& model, const Vector& zeta) {
  return ((model.alpha + model.beta) * zeta + model.a + model.b).norm();
}

GridScan drs_grid_scan(double alpha, double beta, double lo, double hi, std::size_t points) {
  if (points < 2 || !(lo > 0.0) || !(hi > lo)) {
    throw std::invalid_argument("drs_grid_scan: bad grid");
  }
  GridScan scan;
  const double llo = std::log10(lo);
  scan.log10_step = (std::log10(hi) - llo) / static_cast<double>(points - 1);
  scan.min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points; ++i) {
    const double tau = std::pow(10.0, llo + scan.log10_step * static_cast<double>(i));
    const double ratio = drs_residual_ratio(alpha, beta, tau);
    if (ratio < scan.min_ratio) {
      scan.min_ratio = ratio;
      scan.argmin_tau = tau;
      scan.index = i;
    }
  }
  return scan;
}

// ---------------------------------------------------------------------------

QuadraticConsensus random_quadratic_consensus(Eigen::Index dim, std::uint64_t seed,
                                              double alpha_star, double beta_star) {
  if (!(alpha_star > 0.0) || !(beta_star > 0.0)) {
    throw std::invalid_argument("random_quadratic_consensus: curvatures must be positive");
  }
  SeededRng rng(seed);
  QuadraticConsensus q;
  q.A = rng.orthogonal_matrix(dim);
  q.h = 1.0 / alpha_star;
  q.g = 1.0 / beta_star;
  q.u_center = rng.normal_vector(dim);
  q.v_center = rng.normal_vector(dim);
  q.b = rng.normal_vector(dim);
  return q;
}

ProblemInstance build_quadratic_consensus(const QuadraticConsensus& q) {
  const Eigen::Index p = q.A.rows();
  ProblemInstance inst;
  inst.name = "quadratic_consensus";
  inst.A = q.A;
  inst.B = -Matrix::Identity(p, p);
  inst.b = q.b;
  // u: h (u - u_c) = A^T (lambda + tau (b - A u + v)), with A^T A = I.
  inst.u_solver = [q](const Vector& v, const Vector& lambda, double tau) {
    return Vector((q.h * q.u_center + q.A.transpose() * (lambda + tau * (q.b + v))) /
                  (q.h + tau));
  };
  // v: g (v - v_c) = -(lambda + tau (b - A u + v)).
  inst.v_solver = [q](const Vector& u, const Vector& lambda, double tau) {
    return Vector((q.g * q.v_center - lambda + tau * (q.A * u - q.b)) / (q.g + tau));
  };
  inst.objective = [q](const Vector& u, const Vector& v) {
    return 0.5 * q.h * (u - q.u_center).squaredNorm() +
           0.5 * q.g * (v - q.v_center).squaredNorm();
  };
  inst.solution = [](const Vector& u, const Vector&) { return u; };
  return inst;
}

DrsLinearModel dual_model(const QuadraticConsensus& q) {
  return {q.alpha_star(), q.beta_star(), q.A * q.u_center - q.b, -q.v_center};
}

Vector consistent_v0(const QuadraticConsensus& q, const Vector& lambda0) {
  // B v0 = -v0 must equal lambda0 / g - v_c.
  return q.v_center - lambda0 / q.g;
}

namespace {

struct StepRecord {
  IterateState state;  // post-step iterate
  PolicyUpdate update;
};

// Exactly `iterations` ADMM steps with no stopping test; an exact-zero
// residual would otherwise end the run early.
std::vector<StepRecord> drive(const ProblemInstance& inst, PenaltyPolicy& policy,
                              const Initialization& init, long iterations, const char* who) {
  std::vector<StepRecord> out;
  IterateState state = initial_state(inst, init);
  policy.reset(init.tau0);
  for (long i = 0; i < iterations; ++i) {
    try {
      IterateState next = admm_step(inst, state);
      const Residuals res = compute_residuals(inst, next);
      PolicyUpdate update = policy.update(next, res);
      if (!(update.tau > 0.0) || !std::isfinite(update.tau)) {
        throw std::runtime_error("policy produced a non-positive or non-finite tau");
      }
      state = next;
      state.tau = update.tau;
      out.push_back({std::move(next), std::move(update)});
    } catch (const std::exception& e) {
      throw OracleError(std::string(who) + ": ADMM run failed: " + e.what());
    }
  }
  return out;
}

}  // namespace

EquivalenceReport admm_drs_equivalence(const QuadraticConsensus& q, PenaltyPolicy& policy,
                                       const Vector& lambda0, double tau0, long iterations) {
  const ProblemInstance inst = build_quadratic_consensus(q);
  const Initialization init{consistent_v0(q, lambda0), lambda0, tau0};
  const auto steps = drive(inst, policy, init, iterations, "admm_drs_equivalence");

  EquivalenceReport report;
  const DrsLinearModel model = dual_model(q);
  Vector zeta = lambda0;
  for (const StepRecord& s : steps) {
    report.taus.push_back(s.state.tau);
    const DrsStep step = drs_step_linear(model, zeta, s.state.tau);
    report.max_lambda_hat_deviation =
        std::max(report.max_lambda_hat_deviation, (s.state.lambda_hat - step.zeta_hat).norm());
    report.max_lambda_deviation =
        std::max(report.max_lambda_deviation, (s.state.lambda - step.zeta).norm());
    zeta = step.zeta;
  }
  report.iterations = static_cast<long>(steps.size());
  return report;
}

ExactnessReport spectral_exactness(const QuadraticConsensus& q, const PolicyConfig& config,
                                   const Vector& lambda0, double tau0) {
  const ProblemInstance inst = build_quadratic_consensus(q);
  SpectralPolicy policy(config);
  const Initialization init{consistent_v0(q, lambda0), lambda0, tau0};
  const auto steps = drive(inst, policy, init, 4L * config.T_f + 8, "spectral_exactness");

  ExactnessReport report;
  report.tau_expected = 1.0 / std::sqrt(q.alpha_star() * q.beta_star());
  for (const StepRecord& s : steps) {
    const PolicyDiagnostics& d = s.update.diagnostics;
    if (!d.alpha_hybrid || !d.beta_hybrid) continue;
    report.adapted = true;
    report.adaptation_k = s.state.k;
    report.alpha_hat = *d.alpha_hybrid;
    report.beta_hat = *d.beta_hybrid;
    report.alpha_cor = d.alpha_cor.value_or(0.0);
    report.beta_cor = d.beta_cor.value_or(0.0);
    report.tau_after = s.update.tau;
    break;
  }
  return report;
}

}  // namespace aadmm::oracle
