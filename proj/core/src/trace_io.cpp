#include "aadmm/trace_io.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

namespace aadmm {

namespace {

template <class T>
std::string optional_field(const std::optional<T>& value) {
  if (!value) return {};
  if constexpr (std::is_floating_point_v<T>) {
    return format_real(*value);
  } else {
    return std::to_string(*value);
  }
}

template <class T>
nlohmann::json optional_json(const std::optional<T>& value) {
  if (!value) return nullptr;
  return *value;
}

}  // namespace

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

const std::vector<std::string>& trace_csv_columns() {
  static const std::vector<std::string> columns = {
      "k",            "tau",          "r_norm",        "d_norm",
      "rel_residual", "alpha_sd",     "alpha_mg",      "alpha_hybrid",
      "alpha_cor",    "beta_sd",      "beta_mg",       "beta_hybrid",
      "beta_cor",     "tau_case",     "snapshot_k0",   "norm_Au",
      "norm_Bv",      "norm_b",       "norm_ATlambda", "absolute_fallback",
      "clamped",      "eta_sq_sum",   "theta_sq_sum",  "wall_time_s"};
  return columns;
}

void write_trace_csv(std::ostream& os, const ConvergenceTrace& trace, bool include_timing) {
  const auto& cols = trace_csv_columns();
  const std::size_t ncols = include_timing ? cols.size() : cols.size() - 1;
  for (std::size_t i = 0; i < ncols; ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const TraceRecord& r : trace.records) {
    const PolicyDiagnostics& d = r.diagnostics;
    os << r.k << ',' << format_real(r.tau) << ',' << format_real(r.r_norm) << ','
       << format_real(r.d_norm) << ',' << format_real(r.rel_residual) << ','
       << optional_field(d.alpha_sd) << ',' << optional_field(d.alpha_mg) << ','
       << optional_field(d.alpha_hybrid) << ',' << optional_field(d.alpha_cor) << ','
       << optional_field(d.beta_sd) << ',' << optional_field(d.beta_mg) << ','
       << optional_field(d.beta_hybrid) << ',' << optional_field(d.beta_cor) << ','
       << optional_field(d.tau_case) << ',' << optional_field(d.snapshot_k0) << ','
       << format_real(r.norm_Au) << ',' << format_real(r.norm_Bv) << ','
       << format_real(r.norm_b) << ',' << format_real(r.norm_ATlambda) << ','
       << (r.absolute_fallback ? 1 : 0) << ',' << (d.clamped ? 1 : 0) << ','
       << format_real(d.eta_sq_sum) << ',' << format_real(d.theta_sq_sum);
    if (include_timing) os << ',' << format_real(r.wall_time_s);
    os << '\n';
  }
}

std::string trace_csv(const ConvergenceTrace& trace, bool include_timing) {
  std::ostringstream os;
  write_trace_csv(os, trace, include_timing);
  return os.str();
}

nlohmann::json to_json(const TraceRecord& r) {
  const PolicyDiagnostics& d = r.diagnostics;
  return {
      {"k", r.k},
      {"tau", r.tau},
      {"r_norm", r.r_norm},
      {"d_norm", r.d_norm},
      {"rel_residual", r.rel_residual},
      {"norm_Au", r.norm_Au},
      {"norm_Bv", r.norm_Bv},
      {"norm_b", r.norm_b},
      {"norm_ATlambda", r.norm_ATlambda},
      {"absolute_fallback", r.absolute_fallback},
      {"wall_time_s", r.wall_time_s},
      {"diagnostics",
       {{"alpha_sd", optional_json(d.alpha_sd)},
        {"alpha_mg", optional_json(d.alpha_mg)},
        {"alpha_hybrid", optional_json(d.alpha_hybrid)},
        {"alpha_cor", optional_json(d.alpha_cor)},
        {"beta_sd", optional_json(d.beta_sd)},
        {"beta_mg", optional_json(d.beta_mg)},
        {"beta_hybrid", optional_json(d.beta_hybrid)},
        {"beta_cor", optional_json(d.beta_cor)},
        {"tau_case", optional_json(d.tau_case)},
        {"snapshot_k0", optional_json(d.snapshot_k0)},
        {"clamped", d.clamped},
        {"frozen", d.frozen},
        {"eta_sq_sum", d.eta_sq_sum},
        {"theta_sq_sum", d.theta_sq_sum}}},
  };
}

nlohmann::json to_json(const ConvergenceTrace& trace) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : trace.records) records.push_back(to_json(r));
  return {{"problem", trace.problem},
          {"policy", trace.policy},
          {"status", to_string(trace.status)},
          {"message", trace.message},
          {"iterations", trace.iterations()},
          {"records", std::move(records)}};
}

}  // namespace aadmm
