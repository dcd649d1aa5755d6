#pragma once

// Penalty-parameter policies: fixed, residual balancing, and the spectral
// (Barzilai-Borwein style) rule with correlation safeguarding. Every
// adaptive policy also feeds a ConvergenceGuard that tracks the summed
// squared tau excursions.

#include "aadmm/engine.hpp"

#include <memory>
#include <optional>
#include <string>

namespace aadmm {

enum class PolicyKind { kFixed, kResidualBalance, kSpectral };

const char* to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(const std::string& name);

struct PolicyConfig {
  PolicyKind kind = PolicyKind::kSpectral;
  // Spectral schedule: adapt when (k mod T_f) == (2 mod T_f), k the index
  // of the just-completed iteration; T_f = 1 adapts every iteration.
  int T_f = 2;
  double eps_cor = 0.2;
  // Residual balancing.
  double mu = 10.0;
  double eta = 2.0;
  // tau freezes once k >= cutoff. Empty means never.
  std::optional<long> adaptivity_cutoff;
  double tau_min = 1e-10;
  double tau_max = 1e10;
  // Guard budget on sum(eta_k^2) and sum(theta_k^2).
  double guard_budget = 1e3;
  bool guard_enforce = false;

  static PolicyConfig fixed();
  static PolicyConfig residual_balance();  // mu = 10, eta = 2, cutoff 1000
  static PolicyConfig spectral();          // eps_cor = 0.2, T_f = 2

  // Human-readable label, e.g. "spectral(eps_cor=0.2)".
  std::string label() const;
  void validate() const;
};

// tau_{k+1} = tau_k.
double fixed_policy(double tau);

// Residual balancing: eta * tau if ||r|| > mu ||d||, tau / eta if
// ||d|| > mu ||r||, otherwise tau.
double residual_balance(double r_norm, double d_norm, double tau, double mu, double eta);

// Least-squares curvature fit of gradient change against variable change.
// step_sd = <dvar, dvar> / <dgrad, dvar>, step_mg = <dgrad, dvar> / <dgrad, dgrad>,
// hybrid = step_mg if 2 step_mg > step_sd else step_sd - step_mg / 2.
// Degenerate input (a near-zero vector or <dgrad, dvar> <= 0) leaves the
// steps empty and the correlation at 0.
struct SpectralStep {
  std::optional<double> sd;
  std::optional<double> mg;
  std::optional<double> hybrid;
  double correlation = 0.0;

  bool defined() const { return hybrid.has_value(); }
};

SpectralStep spectral_stepsize(const Vector& dgrad, const Vector& dvar);

// Quantities stored at the last adaptation iteration.
struct AdaptSnapshot {
  long k0 = 0;
  Vector lambda_hat;
  Vector lambda;
  Vector Au;
  Vector Bv;

  static AdaptSnapshot capture(const IterateState& state);
};

struct SpectralDeltas {
  Vector d_lambda_hat;  // lambda_hat_k - lambda_hat_k0
  Vector d_H;           // A u_k - A u_k0
  Vector d_lambda;      // lambda_k - lambda_k0
  Vector d_G;           // B v_k - B v_k0
};

SpectralDeltas spectral_deltas(const IterateState& state, const AdaptSnapshot& snapshot);

struct SpectralEstimate {
  SpectralDeltas deltas;
  SpectralStep alpha;  // from (d_H, d_lambda_hat)
  SpectralStep beta;   // from (d_G, d_lambda)
};

SpectralEstimate estimate_spectral(const IterateState& state, const AdaptSnapshot& snapshot);

// Safeguarded combination of the two curvature estimates.
//   case 1: both correlations > eps_cor          -> sqrt(alpha * beta)
//   case 2: only alpha passes                     -> alpha
//   case 3: only beta passes                      -> beta
//   case 4: neither                               -> tau (unchanged)
// An undefined step always fails its test.
struct SafeguardedTau {
  double tau;
  int tau_case;
};

SafeguardedTau safeguarded_tau(const SpectralEstimate& estimate, double tau, double eps_cor);

// Running sums of eta_k^2 and theta_k^2 with
//   eta_k   = sqrt(max(tau_k / tau_{k-1}, 1) - 1)
//   theta_k = sqrt(max(tau_{k-1} / tau_k, 1) - 1).
struct ConvergenceGuard {
  double eta_sq_sum = 0.0;
  double theta_sq_sum = 0.0;
  double budget = 1e3;
  bool enforce = false;
  bool frozen = false;

  static double eta(double tau_prev, double tau_new);
  static double theta(double tau_prev, double tau_new);

  bool exceeded() const { return eta_sq_sum > budget || theta_sq_sum > budget; }
};

// Accounts for the move tau_prev -> tau_new and returns the tau actually
// applied: in enforcement mode a move that would push either sum past the
// budget is rejected and tau stays frozen from then on.
double guard_update(ConvergenceGuard& guard, double tau_prev, double tau_new);

class FixedPolicy final : public PenaltyPolicy {
 public:
  std::string name() const override { return "fixed"; }
  void reset(double) override {}
  PolicyUpdate update(const IterateState& state, const Residuals& residuals) override;
};

class ResidualBalancePolicy final : public PenaltyPolicy {
 public:
  explicit ResidualBalancePolicy(PolicyConfig config);
  std::string name() const override;
  void reset(double tau0) override;
  PolicyUpdate update(const IterateState& state, const Residuals& residuals) override;

 private:
  PolicyConfig config_;
  ConvergenceGuard guard_;
};

class SpectralPolicy final : public PenaltyPolicy {
 public:
  explicit SpectralPolicy(PolicyConfig config);
  std::string name() const override;
  void reset(double tau0) override;
  PolicyUpdate update(const IterateState& state, const Residuals& residuals) override;

  bool scheduled(long k) const;
  const std::optional<AdaptSnapshot>& snapshot() const { return snapshot_; }

 private:
  PolicyConfig config_;
  ConvergenceGuard guard_;
  std::optional<AdaptSnapshot> snapshot_;
};

std::unique_ptr<PenaltyPolicy> make_policy(const PolicyConfig& config);

}  // namespace aadmm
