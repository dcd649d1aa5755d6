#pragma once

// Verification machinery kept independent of the solver path: the linear
// DRS model and its residual contraction, quadratic instances with exactly
// linear dual subgradients, reference solvers (accelerated proximal
// gradient, primal-dual interior point), and optimality checkers.

#include "aadmm/engine.hpp"
#include "aadmm/policies.hpp"
#include "aadmm/problems.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <stdexcept>
#include <variant>

namespace aadmm::oracle {

struct OracleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Linear DRS model: dH(z) = alpha z + a, dG(z) = beta z + b.

struct DrsLinearModel {
  double alpha = 1.0;
  double beta = 1.0;
  Vector a;
  Vector b;
};

// (1 + alpha beta tau^2) / ((1 + alpha tau)(1 + beta tau))
double drs_residual_ratio(double alpha, double beta, double tau);

struct DrsStep {
  Vector zeta_hat;
  Vector zeta;
};

DrsStep drs_step_linear(const DrsLinearModel& model, const Vector& zeta, double tau);

// || (alpha + beta) zeta + a + b ||
double drs_residual(const DrsLinearModel& model, const Vector& zeta);

struct GridScan {
  double argmin_tau = 0.0;
  double min_ratio = 0.0;
  std::size_t index = 0;
  double log10_step = 0.0;  // grid spacing in decades
};

// Scans tau over `points` log-spaced values in [lo, hi].
GridScan drs_grid_scan(double alpha, double beta, double lo = 1e-3, double hi = 1e3,
                       std::size_t points = 601);

// ---------------------------------------------------------------------------
// Quadratic consensus instances
//
//   H(u) = h/2 ||u - u_c||^2,  G(v) = g/2 ||v - v_c||^2,  A u - v = b
//
// with A orthogonal. The dual subgradients are exactly linear:
//   dH^(z) = z / h + (A u_c - b),   dG^(z) = z / g - v_c,
// so the dual curvatures are alpha* = 1/h and beta* = 1/g.

struct QuadraticConsensus {
  Matrix A;
  double h = 1.0;
  double g = 1.0;
  Vector u_center;
  Vector v_center;
  Vector b;

  double alpha_star() const { return 1.0 / h; }
  double beta_star() const { return 1.0 / g; }
};

QuadraticConsensus random_quadratic_consensus(Eigen::Index dim, std::uint64_t seed,
                                              double alpha_star, double beta_star);
ProblemInstance build_quadratic_consensus(const QuadraticConsensus& q);
DrsLinearModel dual_model(const QuadraticConsensus& q);
// v0 with B v0 = dG^(lambda0), so that ADMM and DRS start from the same point.
Vector consistent_v0(const QuadraticConsensus& q, const Vector& lambda0);

struct EquivalenceReport {
  double max_lambda_deviation = 0.0;      // max_k ||lambda_k - zeta_k||
  double max_lambda_hat_deviation = 0.0;  // max_k ||lambda_hat_k - zeta_hat_k||
  long iterations = 0;
  std::vector<double> taus;
};

// Runs ADMM under `policy` for `iterations` steps and the closed-form DRS
// recursion with the same tau sequence from zeta_0 = lambda_0.
EquivalenceReport admm_drs_equivalence(const QuadraticConsensus& q, PenaltyPolicy& policy,
                                       const Vector& lambda0, double tau0, long iterations);

struct ExactnessReport {
  bool adapted = false;
  long adaptation_k = 0;
  double alpha_hat = 0.0;  // hybrid spectral step, estimate of 1/alpha*
  double beta_hat = 0.0;
  double alpha_cor = 0.0;
  double beta_cor = 0.0;
  double tau_after = 0.0;
  double tau_expected = 0.0;  // 1 / sqrt(alpha* beta*)
};

// Runs the spectral policy and reports the first adaptation that produced
// defined estimates.
ExactnessReport spectral_exactness(const QuadraticConsensus& q, const PolicyConfig& config,
                                   const Vector& lambda0, double tau0);

// ---------------------------------------------------------------------------
// Reference solvers

struct ReferenceSolution {
  Vector x;  // for LRLS the column-major vec of X
  double objective = 0.0;
  long iterations = 0;
};

struct ProxGradOptions {
  long max_iters = 500000;
  // Stop when the gradient-mapping norm falls below tol * max(1, ||grad f(x)||).
  double tol = 1e-11;
};

ReferenceSolution reference_elastic_net(const ElasticNetSpec& spec, const ProxGradOptions& = {});
ReferenceSolution reference_lrls(const LRLSSpec& spec, const ProxGradOptions& = {});
ReferenceSolution reference_logreg(const ConsensusLogRegSpec& spec, const ProxGradOptions& = {});

// min 1/2 x^T Q x + q^T x  s.t.  E x = e,  G x <= h
struct QpProblem {
  Matrix Q;
  Vector q;
  Matrix E;
  Vector e;
  Matrix G;
  Vector h;
};

struct QpSolution {
  Vector x;
  Vector y;  // equality multipliers
  Vector z;  // inequality multipliers, >= 0
  double objective = 0.0;
  int iterations = 0;
};

// Mehrotra predictor-corrector interior point method, dense.
QpSolution solve_qp_interior_point(const QpProblem& problem, int max_iters = 200,
                                   double tol = 1e-10);

ReferenceSolution reference_qp(const QPSpec& spec);
// LP reformulation x = x+ - x-, min 1^T (x+ + x-) s.t. D (x+ - x-) = c.
ReferenceSolution reference_basis_pursuit(const BasisPursuitSpec& spec);

using AnySpec =
    std::variant<ElasticNetSpec, QPSpec, BasisPursuitSpec, ConsensusLogRegSpec, LRLSSpec>;

ReferenceSolution reference_solve(const AnySpec& spec);

// Spec matching build_synthetic(request, scale).
AnySpec synthetic_spec(const SyntheticRequest& request, double scale = 1.0);

// ---------------------------------------------------------------------------
// Optimality checks

struct KktReport {
  double primal = 0.0;           // max (D x - c)_+
  double dual = 0.0;             // max (-mu)_+
  double stationarity = 0.0;     // ||Q x + q + D^T mu||_inf
  double complementarity = 0.0;  // max |mu_i (D x - c)_i|
  double max() const;
};

// Multipliers mu = -lambda (ADMM's lambda for the constraint D u - v = 0).
KktReport kkt_check(const QPSpec& spec, const Vector& x, const Vector& lambda);
// Multipliers estimated by least squares on the active set.
KktReport kkt_check(const QPSpec& spec, const Vector& x);

// Scaled violation of the first-order conditions of one subproblem
// solve, given the subproblem's inputs and the returned minimizer.
double l1_prox_violation(const Vector& w, double kappa, const Vector& x);
double elastic_net_u_violation(const ElasticNetSpec&, const Vector& v, const Vector& lambda,
                               double tau, const Vector& u);
double elastic_net_v_violation(const ElasticNetSpec&, const Vector& u, const Vector& lambda,
                               double tau, const Vector& v);
double qp_u_violation(const QPSpec&, const Vector& v, const Vector& lambda, double tau,
                      const Vector& u);
double qp_v_violation(const QPSpec&, const Vector& u, const Vector& lambda, double tau,
                      const Vector& v);
double basis_pursuit_u_violation(const BasisPursuitSpec&, const Vector& v, const Vector& lambda,
                                 double tau, const Vector& u);
double basis_pursuit_v_violation(const Vector& u, const Vector& lambda, double tau,
                                 const Vector& v);
double logreg_u_violation(const ConsensusLogRegSpec&, const Vector& z, const Vector& lambda,
                          double tau, const Vector& u);
double logreg_v_violation(const ConsensusLogRegSpec&, const Vector& u, const Vector& lambda,
                          double tau, const Vector& z);
double lrls_u_violation(const LRLSSpec&, const Vector& v, const Vector& lambda, double tau,
                        const Vector& u);
double lrls_v_violation(const LRLSSpec&, const Vector& u, const Vector& lambda, double tau,
                        const Vector& v);

struct OptimalityReport {
  double max_u_violation = 0.0;
  double max_v_violation = 0.0;
  int samples = 0;
};

// Feeds `samples` random (v, lambda, tau) / (u, lambda, tau) inputs to the
// default synthetic instance of `kind` and checks every output.
OptimalityReport subproblem_optimality(ProblemKind kind, int samples, std::uint64_t seed);

// ---------------------------------------------------------------------------

struct SuiteOptions {
  std::uint64_t seed = 2024;
  int optimality_samples = 200;
};

// Runs the verification checks and returns a JSON report with a per-check
// "pass" flag and an overall "pass".
nlohmann::json verification_suite(const SuiteOptions& options = {});

}  // namespace aadmm::oracle
