#include "aadmm/oracle.hpp"

#include <cmath>

namespace aadmm::oracle {

namespace {

using nlohmann::json;

json grid_check(SeededRng& rng) {
  double worst_cells = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double alpha = std::pow(10.0, rng.uniform(-2.0, 2.0));
    const double beta = std::pow(10.0, rng.uniform(-2.0, 2.0));
    const GridScan scan = drs_grid_scan(alpha, beta);
    const double cells =
        std::abs(std::log10(scan.argmin_tau * std::sqrt(alpha * beta))) / scan.log10_step;
    worst_cells = std::max(worst_cells, cells);
  }
  return {{"pairs", 50}, {"max_offset_cells", worst_cells}, {"pass", worst_cells <= 1.0}};
}

json equivalence_check(std::uint64_t seed) {
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    SeededRng rng(seed + static_cast<std::uint64_t>(i));
    const double a = std::pow(10.0, rng.uniform(-1.0, 1.0));
    const double b = std::pow(10.0, rng.uniform(-1.0, 1.0));
    const QuadraticConsensus q = random_quadratic_consensus(8, seed + 100 + i, a, b);
    const Vector lambda0 = rng.normal_vector(8);
    for (const PolicyConfig& cfg : {PolicyConfig::fixed(), PolicyConfig::spectral()}) {
      auto policy = make_policy(cfg);
      const EquivalenceReport rep = admm_drs_equivalence(q, *policy, lambda0, 0.1, 100);
      worst = std::max({worst, rep.max_lambda_deviation, rep.max_lambda_hat_deviation});
    }
  }
  return {{"instances", 5}, {"max_deviation", worst}, {"pass", worst <= 1e-8}};
}

json exactness_check(std::uint64_t seed) {
  SeededRng rng(seed);
  const QuadraticConsensus q = random_quadratic_consensus(8, seed + 7, 0.3, 4.0);
  const ExactnessReport rep =
      spectral_exactness(q, PolicyConfig::spectral(), rng.normal_vector(8), 0.1);
  const double err_a = std::abs(rep.alpha_hat * q.alpha_star() - 1.0);
  const double err_b = std::abs(rep.beta_hat * q.beta_star() - 1.0);
  const double err_tau = std::abs(rep.tau_after / rep.tau_expected - 1.0);
  const bool pass = rep.adapted && err_a <= 1e-6 && err_b <= 1e-6 && err_tau <= 1e-6 &&
                    std::abs(rep.alpha_cor - 1.0) <= 1e-10 &&
                    std::abs(rep.beta_cor - 1.0) <= 1e-10;
  return {{"adapted", rep.adapted},
          {"alpha_rel_error", err_a},
          {"beta_rel_error", err_b},
          {"tau_rel_error", err_tau},
          {"alpha_cor", rep.alpha_cor},
          {"beta_cor", rep.beta_cor},
          {"pass", pass}};
}

json optimality_check(int samples, std::uint64_t seed) {
  json out = json::object();
  bool pass = true;
  for (ProblemKind kind : {ProblemKind::kElasticNet, ProblemKind::kQP, ProblemKind::kBasisPursuit,
                           ProblemKind::kConsensusLogReg, ProblemKind::kLRLS}) {
    const OptimalityReport rep = subproblem_optimality(kind, samples, seed);
    const bool ok = rep.max_u_violation <= 1e-8 && rep.max_v_violation <= 1e-8;
    pass = pass && ok;
    out[to_string(kind)] = {{"samples", rep.samples},
                            {"max_u_violation", rep.max_u_violation},
                            {"max_v_violation", rep.max_v_violation},
                            {"pass", ok}};
  }
  out["pass"] = pass;
  return out;
}

}  // namespace

nlohmann::json verification_suite(const SuiteOptions& options) {
  SeededRng rng(options.seed);
  json report;
  auto guarded = [&](const char* name, auto&& fn) {
    try {
      report[name] = fn();
    } catch (const std::exception& e) {
      report[name] = {{"pass", false}, {"error", e.what()}};
    }
  };
  guarded("residual_ratio_grid", [&] { return grid_check(rng); });
  guarded("drs_equivalence", [&] { return equivalence_check(options.seed); });
  guarded("spectral_exactness", [&] { return exactness_check(options.seed); });
  guarded("subproblem_optimality",
          [&] { return optimality_check(options.optimality_samples, options.seed); });
  bool pass = true;
  for (const auto& [key, value] : report.items()) pass = pass && value.value("pass", false);
  report["pass"] = pass;
  return report;
}

}  // namespace aadmm::oracle
