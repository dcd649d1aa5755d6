#pragma once

// ConvergenceTrace serialization.
//
// CSV: one row per iteration. Column order is fixed:
//   k, tau, r_norm, d_norm, rel_residual,
//   alpha_sd, alpha_mg, alpha_hybrid, alpha_cor,
//   beta_sd, beta_mg, beta_hybrid, beta_cor, tau_case, snapshot_k0,
//   norm_Au, norm_Bv, norm_b, norm_ATlambda, absolute_fallback, clamped,
//   eta_sq_sum, theta_sq_sum, wall_time_s
// Reals are written with 17 significant digits; undefined diagnostics are
// empty fields. wall_time_s is the only non-deterministic column.

#include "aadmm/engine.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace aadmm {

const std::vector<std::string>& trace_csv_columns();

void write_trace_csv(std::ostream& os, const ConvergenceTrace& trace,
                     bool include_timing = true);
std::string trace_csv(const ConvergenceTrace& trace, bool include_timing = true);

nlohmann::json to_json(const TraceRecord& record);
nlohmann::json to_json(const ConvergenceTrace& trace);

// Shortest round-trip-exact formatting used by every emitted CSV.
std::string format_real(double x);

}  // namespace aadmm
