#pragma once

// Generic ADMM loop for
//
//     min H(u) + G(v)   subject to   A u + B v = b
//
// with the multiplier update lambda += tau (b - A u - B v). Problems supply
// the two subproblem minimizers; penalty policies decide tau between
// iterations. The engine knows nothing about either beyond these interfaces.

#include "aadmm/numkit.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace aadmm {

// u = argmin_u H(u) + tau/2 || b - A u - B v + lambda/tau ||^2
using USolver = std::function<Vector(const Vector& v, const Vector& lambda, double tau)>;
// v = argmin_v G(v) + tau/2 || b - A u - B v + lambda/tau ||^2
using VSolver = std::function<Vector(const Vector& u, const Vector& lambda, double tau)>;

struct ProblemInstance {
  std::string name;
  Matrix A;  // p x n
  Matrix B;  // p x m
  Vector b;  // p
  USolver u_solver;
  VSolver v_solver;
  // Objective of the original problem evaluated at the recovered solution.
  std::function<double(const Vector& u, const Vector& v)> objective;
  // Recovered primal solution (e.g. the sparse split copy); defaults to u.
  std::function<Vector(const Vector& u, const Vector& v)> solution;

  Eigen::Index n() const { return A.cols(); }
  Eigen::Index m() const { return B.cols(); }
  Eigen::Index p() const { return A.rows(); }

  // Throws DimensionError / std::invalid_argument on an inconsistent instance.
  void validate() const;
};

struct IterateState {
  long k = 0;
  Vector u;
  Vector v;
  Vector lambda;
  Vector lambda_hat;  // lambda_{k-1} + tau_{k-1} (b - A u_k - B v_{k-1})
  double tau = 1.0;   // penalty used to produce the current iterate
  Vector v_prev;
  Vector Au;  // cached A u
  Vector Bv;  // cached B v
};

struct Residuals {
  Vector r;  // b - A u - B v
  Vector d;  // tau A^T B (v - v_prev)
  double r_norm = 0.0;
  double d_norm = 0.0;
  double rel_residual = 0.0;
  double norm_Au = 0.0;
  double norm_Bv = 0.0;
  double norm_b = 0.0;
  double norm_ATlambda = 0.0;
  // Set when a normalizer vanished and the absolute residual was used.
  bool primal_absolute = false;
  bool dual_absolute = false;

  double primal_normalizer() const;
};

// Per-iteration policy output. Fields that a policy does not produce, or
// that were undefined on this iteration, stay empty.
struct PolicyDiagnostics {
  std::optional<double> alpha_sd, alpha_mg, alpha_hybrid, alpha_cor;
  std::optional<double> beta_sd, beta_mg, beta_hybrid, beta_cor;
  std::optional<int> tau_case;
  std::optional<long> snapshot_k0;
  bool clamped = false;
  bool frozen = false;
  double eta_sq_sum = 0.0;
  double theta_sq_sum = 0.0;
};

struct PolicyUpdate {
  double tau;
  PolicyDiagnostics diagnostics;
};

class PenaltyPolicy {
 public:
  virtual ~PenaltyPolicy() = default;
  virtual std::string name() const = 0;
  // Called once before the first iteration of a run.
  virtual void reset(double tau0) = 0;
  // Called after every completed iteration; returns the next penalty.
  virtual PolicyUpdate update(const IterateState& state, const Residuals& residuals) = 0;
};

struct StoppingConfig {
  double eps_tol = 1e-5;
  long max_iters = 2000;

  void validate() const;
};

enum class RunStatus { kConverged, kMaxIters, kError };
const char* to_string(RunStatus status);

struct TraceRecord {
  long k = 0;
  double tau = 0.0;
  double r_norm = 0.0;
  double d_norm = 0.0;
  double rel_residual = 0.0;
  double norm_Au = 0.0;
  double norm_Bv = 0.0;
  double norm_b = 0.0;
  double norm_ATlambda = 0.0;
  bool absolute_fallback = false;
  PolicyDiagnostics diagnostics;
  double wall_time_s = 0.0;  // cumulative since the run started
};

struct ConvergenceTrace {
  std::string problem;
  std::string policy;
  std::vector<TraceRecord> records;
  RunStatus status = RunStatus::kMaxIters;
  std::string message;  // error detail when status == kError

  long iterations() const { return static_cast<long>(records.size()); }
};

struct Initialization {
  Vector v0;
  Vector lambda0;
  double tau0 = 0.1;
};

// Builds the k = 0 state: u is zero (no u_0 exists until the first step),
// v_prev = v0, lambda_hat = lambda0.
IterateState initial_state(const ProblemInstance& problem, const Initialization& init);

// One ADMM iteration at the state's current tau. Throws NonFiniteError if
// an iterate becomes non-finite; subproblem exceptions propagate.
IterateState admm_step(const ProblemInstance& problem, const IterateState& state);

Residuals compute_residuals(const ProblemInstance& problem, const IterateState& state);

enum class StopDecision { kContinue, kConverged, kMaxIters };

StopDecision check_stop(const Residuals& residuals, const IterateState& state,
                        const StoppingConfig& config);

struct RunOptions {
  // Invoked after each iteration with the post-step state (before tau changes).
  std::function<void(const IterateState&, const Residuals&)> observer;
};

struct RunResult {
  IterateState state;
  ConvergenceTrace trace;
};

// Iterates admm_step, consulting the policy after every iteration, until
// check_stop fires. The problem's subproblem solvers are copied first so
// solver caches stay local to this run.
RunResult run(const ProblemInstance& problem, PenaltyPolicy& policy,
              const Initialization& init, const StoppingConfig& config,
              const RunOptions& options = {});

}  // namespace aadmm
