#pragma once

// Experiment harness: manifests describing a problem and a list of
// policies, the (policy x repetition) run matrix, one-parameter sweeps,
// and report emission (summary CSV, aligned text, per-run traces, JSON
// echo of the manifest with a content hash).

#include "aadmm/engine.hpp"
#include "aadmm/policies.hpp"
#include "aadmm/problems.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace aadmm::bench {

nlohmann::json to_json(const PolicyConfig& config);
PolicyConfig policy_config_from_json(const nlohmann::json& j);

// A LIBSVM file used instead of generated data. Supported for the elastic
// net (labels become the response) and consensus logistic regression
// (labels must be +-1; the samples are split into `blocks` blocks).
struct LibsvmSource {
  std::string path;
  FeatureScaling scaling = FeatureScaling::kStandardize;
};

struct ExperimentManifest {
  std::string name = "experiment";
  SyntheticRequest problem;
  std::optional<LibsvmSource> libsvm;
  double scale = 1.0;
  std::vector<PolicyConfig> policies = {PolicyConfig::fixed(), PolicyConfig::residual_balance(),
                                        PolicyConfig::spectral()};
  double tau0 = 0.1;
  double eps_tol = 1e-5;
  long max_iters = 2000;
  std::string output_dir = "results";
  // One repetition per seed; the seed draws the shared v0 and lambda0.
  std::vector<std::uint64_t> seeds = {1};

  void validate() const;
};

nlohmann::json to_json(const ExperimentManifest& manifest);
ExperimentManifest manifest_from_json(const nlohmann::json& j);
ExperimentManifest load_manifest(const std::filesystem::path& path);

ProblemInstance build_problem(const ExperimentManifest& manifest);

// v0 and lambda0 with i.i.d. N(0, 1) entries, shared by every policy.
Initialization shared_initialization(const ProblemInstance& problem, std::uint64_t seed,
                                     double tau0);

struct RunSummary {
  std::string problem;
  std::string policy;
  std::size_t policy_index = 0;
  std::uint64_t seed = 0;
  std::optional<double> sweep_value;
  long iterations = 0;
  double wall_time_s = 0.0;
  double final_rel_residual = 0.0;
  double objective = 0.0;
  bool converged = false;
  RunStatus status = RunStatus::kMaxIters;
  std::string message;

  // "n" when converged, "n+" otherwise.
  std::string iterations_label() const;
};

struct RunRecord {
  RunSummary summary;
  ConvergenceTrace trace;
};

struct MatrixResult {
  ExperimentManifest manifest;
  std::vector<RunRecord> runs;  // sorted by (policy_index, seed)

  bool all_completed() const;  // no run ended in an error status
};

// Runs every (policy, seed) pair on up to `threads` workers.
MatrixResult run_matrix(const ExperimentManifest& manifest, unsigned threads = 1);

enum class SweepParameter { kTau0, kScale, kEpsCor };
const char* to_string(SweepParameter p);
SweepParameter sweep_parameter_from_string(const std::string& name);

struct SweepSpec {
  SweepParameter parameter = SweepParameter::kTau0;
  std::vector<double> values;
  ExperimentManifest base;

  void validate() const;
};

// points values from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t points);
std::vector<double> linear_grid(double lo, double hi, std::size_t points);

// Accepts either "values": [...] or "grid": {"lo", "hi", "points",
// "spacing": "log" | "linear"}, plus "parameter" and "base" (a manifest).
SweepSpec sweep_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SweepSpec& sweep);
SweepSpec load_sweep(const std::filesystem::path& path);

// The manifest that a single grid value turns the base into.
ExperimentManifest apply_sweep_value(const ExperimentManifest& base, SweepParameter p,
                                     double value);

struct SweepResult {
  SweepSpec sweep;
  std::vector<RunRecord> runs;  // sorted by (value index, policy_index, seed)

  bool all_completed() const;
};

SweepResult run_sweep(const SweepSpec& sweep, unsigned threads = 1);

// ---------------------------------------------------------------------------
// Reports

const std::vector<std::string>& summary_columns();
void write_summary_csv(std::ostream& os, const std::vector<RunRecord>& runs,
                       bool include_timing = true);
// Table-style text: one line per run, iteration counts with "n+" markers.
void write_summary_text(std::ostream& os, const std::vector<RunRecord>& runs);

// git blob object id: SHA-1 of "blob <size>\0<content>", lowercase hex.
std::string git_blob_hash(const std::string& content);

struct ReportFiles {
  std::filesystem::path summary_csv;
  std::filesystem::path summary_text;
  std::filesystem::path manifest_json;
  std::vector<std::filesystem::path> traces;
};

// Writes summary.csv, summary.txt, manifest.json and traces/*.csv under
// `dir`, creating it if needed. Throws std::runtime_error on I/O failure.
ReportFiles emit_report(const MatrixResult& result, const std::filesystem::path& dir,
                        bool include_timing = true);
ReportFiles emit_report(const SweepResult& result, const std::filesystem::path& dir,
                        bool include_timing = true);

}  // namespace aadmm::bench
