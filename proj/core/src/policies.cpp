#include "aadmm/policies.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace aadmm {

namespace {

// Vectors at or below this norm carry no curvature information.
constexpr double kDegenerateNorm = 1e-300;

double clamp_tau(double tau, const PolicyConfig& config, bool& clamped) {
  const double out = std::clamp(tau, config.tau_min, config.tau_max);
  clamped = out != tau;
  return out;
}

}  // namespace

const char* to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kFixed: return "fixed";
    case PolicyKind::kResidualBalance: return "residual_balance";
    case PolicyKind::kSpectral: return "spectral";
  }
  return "unknown";
}

PolicyKind policy_kind_from_string(const std::string& name) {
  if (name == "fixed" || name == "vanilla") return PolicyKind::kFixed;
  if (name == "residual_balance" || name == "rb") return PolicyKind::kResidualBalance;
  if (name == "spectral" || name == "aadmm" || name == "adaptive") return PolicyKind::kSpectral;
  throw std::invalid_argument("unknown policy kind: " + name);
}

PolicyConfig PolicyConfig::fixed() {
  PolicyConfig c;
  c.kind = PolicyKind::kFixed;
  return c;
}

PolicyConfig PolicyConfig::residual_balance() {
  PolicyConfig c;
  c.kind = PolicyKind::kResidualBalance;
  c.adaptivity_cutoff = 1000;
  return c;
}

PolicyConfig PolicyConfig::spectral() {
  PolicyConfig c;
  c.kind = PolicyKind::kSpectral;
  return c;
}

std::string PolicyConfig::label() const {
  std::ostringstream os;
  switch (kind) {
    case PolicyKind::kFixed:
      os << "fixed";
      break;
    case PolicyKind::kResidualBalance:
      os << "residual_balance(mu=" << mu << ",eta=" << eta << ")";
      break;
    case PolicyKind::kSpectral:
      os << "spectral(eps_cor=" << eps_cor << ",T_f=" << T_f << ")";
      break;
  }
  return os.str();
}

void PolicyConfig::validate() const {
  if (T_f < 1) throw std::invalid_argument("PolicyConfig: T_f must be >= 1");
  if (!(eps_cor >= 0.0 && eps_cor <= 1.0)) {
    throw std::invalid_argument("PolicyConfig: eps_cor must lie in [0, 1]");
  }
  if (!(mu > 1.0)) throw std::invalid_argument("PolicyConfig: mu must be > 1");
  if (!(eta > 1.0)) throw std::invalid_argument("PolicyConfig: eta must be > 1");
  if (!(tau_min > 0.0) || !(tau_max >= tau_min)) {
    throw std::invalid_argument("PolicyConfig: need 0 < tau_min <= tau_max");
  }
  if (!(guard_budget >= 0.0)) {
    throw std::invalid_argument("PolicyConfig: guard_budget must be >= 0");
  }
}

double fixed_policy(double tau) { return tau; }

double residual_balance(double r_norm, double d_norm, double tau, double mu, double eta) {
  if (r_norm > mu * d_norm) return eta * tau;
  if (d_norm > mu * r_norm) return tau / eta;
  return tau;
}

SpectralStep spectral_stepsize(const Vector& dgrad, const Vector& dvar) {
  require_same_size(dgrad.size(), dvar.size(), "spectral_stepsize");
  SpectralStep out;
  const double grad_norm = dgrad.norm();
  const double var_norm = dvar.norm();
  if (!(grad_norm > kDegenerateNorm) || !(var_norm > kDegenerateNorm)) return out;

  const double cross = dgrad.dot(dvar);
  if (!(cross > 0.0)) return out;

  const double sd = dvar.squaredNorm() / cross;
  const double mg = cross / dgrad.squaredNorm();
  if (!std::isfinite(sd) || !std::isfinite(mg)) return out;

  out.sd = sd;
  out.mg = mg;
  out.hybrid = (2.0 * mg > sd) ? mg : sd - mg / 2.0;
  // Rounding can land a hair above 1 for parallel inputs, which would let
  // eps_cor = 1 adapt.
  out.correlation = std::min(cross / (grad_norm * var_norm), 1.0);
  return out;
}

AdaptSnapshot AdaptSnapshot::capture(const IterateState& state) {
  return {state.k, state.lambda_hat, state.lambda, state.Au, state.Bv};
}

SpectralDeltas spectral_deltas(const IterateState& state, const AdaptSnapshot& snapshot) {
  return {state.lambda_hat - snapshot.lambda_hat, state.Au - snapshot.Au,
          state.lambda - snapshot.lambda, state.Bv - snapshot.Bv};
}

SpectralEstimate estimate_spectral(const IterateState& state, const AdaptSnapshot& snapshot) {
  SpectralEstimate est;
  est.deltas = spectral_deltas(state, snapshot);
  est.alpha = spectral_stepsize(est.deltas.d_H, est.deltas.d_lambda_hat);
  // The beta side pairs B v with lambda itself, not lambda_hat.
  est.beta = spectral_stepsize(est.deltas.d_G, est.deltas.d_lambda);
  return est;
}

SafeguardedTau safeguarded_tau(const SpectralEstimate& estimate, double tau, double eps_cor) {
  const bool alpha_ok = estimate.alpha.defined() && estimate.alpha.correlation > eps_cor;
  const bool beta_ok = estimate.beta.defined() && estimate.beta.correlation > eps_cor;
  if (alpha_ok && beta_ok) {
    return {std::sqrt(*estimate.alpha.hybrid * *estimate.beta.hybrid), 1};
  }
  if (alpha_ok) return {*estimate.alpha.hybrid, 2};
  if (beta_ok) return {*estimate.beta.hybrid, 3};
  return {tau, 4};
}

double ConvergenceGuard::eta(double tau_prev, double tau_new) {
  return std::sqrt(std::max(tau_new / tau_prev, 1.0) - 1.0);
}

double ConvergenceGuard::theta(double tau_prev, double tau_new) {
  return std::sqrt(std::max(tau_prev / tau_new, 1.0) - 1.0);
}

double guard_update(ConvergenceGuard& guard, double tau_prev, double tau_new) {
  if (!(tau_prev > 0.0) || !(tau_new > 0.0)) {
    throw std::invalid_argument("guard_update: tau values must be positive");
  }
  if (guard.frozen) return tau_prev;
  const double e = ConvergenceGuard::eta(tau_prev, tau_new);
  const double t = ConvergenceGuard::theta(tau_prev, tau_new);
  const double eta_sum = guard.eta_sq_sum + e * e;
  const double theta_sum = guard.theta_sq_sum + t * t;
  if (guard.enforce && (eta_sum > guard.budget || theta_sum > guard.budget)) {
    guard.frozen = true;
    return tau_prev;
  }
  guard.eta_sq_sum = eta_sum;
  guard.theta_sq_sum = theta_sum;
  return tau_new;
}

// ---------------------------------------------------------------------------

PolicyUpdate FixedPolicy::update(const IterateState& state, const Residuals&) {
  return {fixed_policy(state.tau), {}};
}

ResidualBalancePolicy::ResidualBalancePolicy(PolicyConfig config) : config_(config) {
  config_.validate();
  reset(1.0);
}

std::string ResidualBalancePolicy::name() const { return config_.label(); }

void ResidualBalancePolicy::reset(double) {
  guard_ = {};
  guard_.budget = config_.guard_budget;
  guard_.enforce = config_.guard_enforce;
}

PolicyUpdate ResidualBalancePolicy::update(const IterateState& state, const Residuals& res) {
  PolicyUpdate out{state.tau, {}};
  const bool cut = config_.adaptivity_cutoff && state.k >= *config_.adaptivity_cutoff;
  if (!cut) {
    const double proposed =
        residual_balance(res.r_norm, res.d_norm, state.tau, config_.mu, config_.eta);
    const double bounded = clamp_tau(proposed, config_, out.diagnostics.clamped);
    out.tau = guard_update(guard_, state.tau, bounded);
  }
  out.diagnostics.frozen = guard_.frozen || cut;
  out.diagnostics.eta_sq_sum = guard_.eta_sq_sum;
  out.diagnostics.theta_sq_sum = guard_.theta_sq_sum;
  return out;
}

SpectralPolicy::SpectralPolicy(PolicyConfig config) : config_(config) {
  config_.validate();
  reset(1.0);
}

std::string SpectralPolicy::name() const { return config_.label(); }

void SpectralPolicy::reset(double) {
  guard_ = {};
  guard_.budget = config_.guard_budget;
  guard_.enforce = config_.guard_enforce;
  snapshot_.reset();
}

// k indexes the iterate just produced, one past the loop counter in the
// usual "loop k mod T_f == 1" test.
bool SpectralPolicy::scheduled(long k) const {
  if (config_.T_f == 1) return true;
  return k % config_.T_f == 2 % config_.T_f;
}

PolicyUpdate SpectralPolicy::update(const IterateState& state, const Residuals&) {
  PolicyUpdate out{state.tau, {}};
  PolicyDiagnostics& diag = out.diagnostics;

  const bool cut = config_.adaptivity_cutoff && state.k >= *config_.adaptivity_cutoff;
  if (scheduled(state.k) && !cut) {
    if (!snapshot_) {
      // First firing: nothing to difference against yet.
      snapshot_ = AdaptSnapshot::capture(state);
    } else {
      const SpectralEstimate est = estimate_spectral(state, *snapshot_);
      diag.alpha_sd = est.alpha.sd;
      diag.alpha_mg = est.alpha.mg;
      diag.alpha_hybrid = est.alpha.hybrid;
      diag.alpha_cor = est.alpha.correlation;
      diag.beta_sd = est.beta.sd;
      diag.beta_mg = est.beta.mg;
      diag.beta_hybrid = est.beta.hybrid;
      diag.beta_cor = est.beta.correlation;

      const SafeguardedTau choice = safeguarded_tau(est, state.tau, config_.eps_cor);
      diag.tau_case = choice.tau_case;
      const double bounded = clamp_tau(choice.tau, config_, diag.clamped);
      out.tau = guard_update(guard_, state.tau, bounded);
      snapshot_ = AdaptSnapshot::capture(state);
    }
  }
  if (snapshot_) diag.snapshot_k0 = snapshot_->k0;
  diag.frozen = guard_.frozen || cut;
  diag.eta_sq_sum = guard_.eta_sq_sum;
  diag.theta_sq_sum = guard_.theta_sq_sum;
  return out;
}

std::unique_ptr<PenaltyPolicy> make_policy(const PolicyConfig& config) {
  config.validate();
  switch (config.kind) {
    case PolicyKind::kFixed: return std::make_unique<FixedPolicy>();
    case PolicyKind::kResidualBalance: return std::make_unique<ResidualBalancePolicy>(config);
    case PolicyKind::kSpectral: return std::make_unique<SpectralPolicy>(config);
  }
  throw std::invalid_argument("make_policy: unknown kind");
}

}  // namespace aadmm
