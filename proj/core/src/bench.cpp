#include "aadmm/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace aadmm::bench {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Policy configs

json to_json(const PolicyConfig& c) {
  json j = {{"kind", to_string(c.kind)},
            {"T_f", c.T_f},
            {"eps_cor", c.eps_cor},
            {"mu", c.mu},
            {"eta", c.eta},
            {"tau_min", c.tau_min},
            {"tau_max", c.tau_max},
            {"guard_budget", c.guard_budget},
            {"guard_enforce", c.guard_enforce}};
  j["adaptivity_cutoff"] = c.adaptivity_cutoff ? json(*c.adaptivity_cutoff) : json(nullptr);
  return j;
}

PolicyConfig policy_config_from_json(const json& j) {
  if (j.is_string()) {
    switch (policy_kind_from_string(j.get<std::string>())) {
      case PolicyKind::kFixed: return PolicyConfig::fixed();
      case PolicyKind::kResidualBalance: return PolicyConfig::residual_balance();
      case PolicyKind::kSpectral: return PolicyConfig::spectral();
    }
  }
  if (!j.is_object()) throw std::invalid_argument("policy must be a name or an object");
  PolicyConfig c;
  switch (policy_kind_from_string(j.at("kind").get<std::string>())) {
    case PolicyKind::kFixed: c = PolicyConfig::fixed(); break;
    case PolicyKind::kResidualBalance: c = PolicyConfig::residual_balance(); break;
    case PolicyKind::kSpectral: c = PolicyConfig::spectral(); break;
  }
  c.T_f = j.value("T_f", c.T_f);
  c.eps_cor = j.value("eps_cor", c.eps_cor);
  c.mu = j.value("mu", c.mu);
  c.eta = j.value("eta", c.eta);
  c.tau_min = j.value("tau_min", c.tau_min);
  c.tau_max = j.value("tau_max", c.tau_max);
  c.guard_budget = j.value("guard_budget", c.guard_budget);
  c.guard_enforce = j.value("guard_enforce", c.guard_enforce);
  if (auto it = j.find("adaptivity_cutoff"); it != j.end()) {
    c.adaptivity_cutoff = it->is_null() ? std::nullopt : std::optional<long>(it->get<long>());
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Manifests

namespace {

const char* to_string(FeatureScaling s) {
  switch (s) {
    case FeatureScaling::kNone: return "none";
    case FeatureScaling::kStandardize: return "standardize";
    case FeatureScaling::kUnitRange: return "unit_range";
  }
  return "none";
}

FeatureScaling scaling_from_string(const std::string& s) {
  if (s == "none") return FeatureScaling::kNone;
  if (s == "standardize") return FeatureScaling::kStandardize;
  if (s == "unit_range") return FeatureScaling::kUnitRange;
  throw std::invalid_argument("unknown feature scaling: " + s);
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace

void ExperimentManifest::validate() const {
  if (policies.empty()) throw std::invalid_argument("manifest: no policies");
  for (const PolicyConfig& p : policies) p.validate();
  if (!(tau0 > 0.0) || !std::isfinite(tau0)) {
    throw std::invalid_argument("manifest: tau0 must be positive");
  }
  StoppingConfig{eps_tol, max_iters}.validate();
  if (!std::isfinite(scale) || scale == 0.0) {
    throw std::invalid_argument("manifest: scale must be finite and non-zero");
  }
  if (seeds.empty()) throw std::invalid_argument("manifest: no repetition seeds");
  if (libsvm && problem.kind != ProblemKind::kElasticNet &&
      problem.kind != ProblemKind::kConsensusLogReg) {
    throw std::invalid_argument("manifest: LIBSVM input needs elastic_net or consensus_logreg");
  }
}

json to_json(const ExperimentManifest& m) {
  json policies = json::array();
  for (const PolicyConfig& p : m.policies) policies.push_back(to_json(p));
  json j = {{"name", m.name},         {"problem", aadmm::to_json(m.problem)},
            {"scale", m.scale},       {"policies", policies},
            {"tau0", m.tau0},         {"eps_tol", m.eps_tol},
            {"max_iters", m.max_iters}, {"output_dir", m.output_dir},
            {"seeds", m.seeds}};
  if (m.libsvm) {
    j["libsvm"] = {{"path", m.libsvm->path}, {"scaling", to_string(m.libsvm->scaling)}};
  }
  return j;
}

ExperimentManifest manifest_from_json(const json& j) {
  ExperimentManifest m;
  m.name = j.value("name", m.name);
  m.problem = synthetic_request_from_json(j.at("problem"));
  if (auto it = j.find("libsvm"); it != j.end() && !it->is_null()) {
    LibsvmSource src;
    src.path = it->at("path").get<std::string>();
    src.scaling = scaling_from_string(it->value("scaling", std::string("standardize")));
    m.libsvm = src;
  }
  m.scale = j.value("scale", m.scale);
  if (auto it = j.find("policies"); it != j.end()) {
    m.policies.clear();
    for (const json& p : *it) m.policies.push_back(policy_config_from_json(p));
  }
  m.tau0 = j.value("tau0", m.tau0);
  m.eps_tol = j.value("eps_tol", m.eps_tol);
  m.max_iters = j.value("max_iters", m.max_iters);
  m.output_dir = j.value("output_dir", m.output_dir);
  if (auto it = j.find("seeds"); it != j.end()) {
    m.seeds = it->get<std::vector<std::uint64_t>>();
  }
  m.validate();
  return m;
}

ExperimentManifest load_manifest(const std::filesystem::path& path) {
  return manifest_from_json(read_json_file(path));
}

ProblemInstance build_problem(const ExperimentManifest& m) {
  if (!m.libsvm) return build_synthetic(m.problem, m.scale);

  LibsvmOptions opts;
  opts.scaling = m.libsvm->scaling;
  const LibsvmData data = read_libsvm(m.libsvm->path, opts);
  if (m.problem.kind == ProblemKind::kElasticNet) {
    ElasticNetSpec spec{data.features, data.labels, m.problem.rho1, m.problem.rho2};
    return build_elastic_net(spec, m.scale);
  }
  ConsensusLogRegSpec spec;
  spec.rho = m.problem.rho1;
  const Eigen::Index rows = data.features.rows();
  const auto nb = static_cast<Eigen::Index>(m.problem.blocks);
  if (nb < 1 || rows < nb) throw std::invalid_argument("manifest: bad block count for data");
  Eigen::Index start = 0;
  for (Eigen::Index b = 0; b < nb; ++b) {
    const Eigen::Index len = rows / nb + (b < rows % nb ? 1 : 0);
    spec.blocks.push_back(data.features.middleRows(start, len));
    spec.labels.push_back(data.labels.segment(start, len));
    start += len;
  }
  return build_consensus_logreg(spec, m.scale);
}

Initialization shared_initialization(const ProblemInstance& problem, std::uint64_t seed,
                                     double tau0) {
  SeededRng rng(seed);
  Initialization init;
  init.v0 = rng.normal_vector(problem.m());
  init.lambda0 = rng.normal_vector(problem.p());
  init.tau0 = tau0;
  return init;
}

// ---------------------------------------------------------------------------
// Running

std::string RunSummary::iterations_label() const {
  return std::to_string(iterations) + (converged ? "" : "+");
}

bool MatrixResult::all_completed() const {
  return std::none_of(runs.begin(), runs.end(),
                      [](const RunRecord& r) { return r.summary.status == RunStatus::kError; });
}

bool SweepResult::all_completed() const {
  return std::none_of(runs.begin(), runs.end(),
                      [](const RunRecord& r) { return r.summary.status == RunStatus::kError; });
}

namespace {

RunRecord run_one(const ProblemInstance& problem, const ExperimentManifest& m,
                  std::size_t policy_index, std::uint64_t seed) {
  auto policy = make_policy(m.policies[policy_index]);
  const Initialization init = shared_initialization(problem, seed, m.tau0);
  const RunResult res = run(problem, *policy, init, StoppingConfig{m.eps_tol, m.max_iters});

  RunRecord rec;
  rec.trace = res.trace;
  RunSummary& s = rec.summary;
  s.problem = problem.name;
  s.policy = m.policies[policy_index].label();
  s.policy_index = policy_index;
  s.seed = seed;
  s.iterations = res.trace.iterations();
  s.status = res.trace.status;
  s.converged = res.trace.status == RunStatus::kConverged;
  s.message = res.trace.message;
  if (!res.trace.records.empty()) {
    s.wall_time_s = res.trace.records.back().wall_time_s;
    s.final_rel_residual = res.trace.records.back().rel_residual;
  }
  if (s.status != RunStatus::kError && res.state.u.size() > 0) {
    s.objective = problem.objective(res.state.u, res.state.v);
  }
  return rec;
}

// Runs tasks[0..n) on up to `threads` workers.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& task) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

MatrixResult run_matrix(const ExperimentManifest& manifest, unsigned threads) {
  manifest.validate();
  const ProblemInstance problem = build_problem(manifest);
  MatrixResult result;
  result.manifest = manifest;
  const std::size_t ns = manifest.seeds.size();
  result.runs.resize(manifest.policies.size() * ns);
  // Slot (policy, seed) is fixed up front, so the order does not depend on
  // which worker finishes first.
  parallel_for(result.runs.size(), threads, [&](std::size_t i) {
    result.runs[i] = run_one(problem, manifest, i / ns, manifest.seeds[i % ns]);
  });
  std::stable_sort(result.runs.begin(), result.runs.end(),
                   [](const RunRecord& a, const RunRecord& b) {
                     return std::tie(a.summary.policy_index, a.summary.seed) <
                            std::tie(b.summary.policy_index, b.summary.seed);
                   });
  return result;
}

// ---------------------------------------------------------------------------
// Sweeps

const char* to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::kTau0: return "tau0";
    case SweepParameter::kScale: return "scale";
    case SweepParameter::kEpsCor: return "eps_cor";
  }
  return "unknown";
}

SweepParameter sweep_parameter_from_string(const std::string& name) {
  if (name == "tau0") return SweepParameter::kTau0;
  if (name == "scale") return SweepParameter::kScale;
  if (name == "eps_cor") return SweepParameter::kEpsCor;
  throw std::invalid_argument("unknown sweep parameter: " + name);
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0) || !(hi > 0.0)) throw std::invalid_argument("log_grid: bounds must be positive");
  if (points == 0) throw std::invalid_argument("log_grid: need at least one point");
  if (points == 1) return {lo};
  std::vector<double> out(points);
  const double a = std::log10(lo);
  const double step = (std::log10(hi) - a) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) out[i] = std::pow(10.0, a + step * static_cast<double>(i));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
  if (points == 0) throw std::invalid_argument("linear_grid: need at least one point");
  if (points == 1) return {lo};
  std::vector<double> out(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

ExperimentManifest apply_sweep_value(const ExperimentManifest& base, SweepParameter p,
                                     double value) {
  ExperimentManifest m = base;
  switch (p) {
    case SweepParameter::kTau0: m.tau0 = value; break;
    case SweepParameter::kScale: m.scale = value; break;
    case SweepParameter::kEpsCor:
      for (PolicyConfig& c : m.policies) c.eps_cor = value;
      break;
  }
  return m;
}

void SweepSpec::validate() const {
  if (values.empty()) throw std::invalid_argument("sweep: empty value grid");
  base.validate();
  for (double v : values) apply_sweep_value(base, parameter, v).validate();
}

SweepSpec sweep_from_json(const json& j) {
  SweepSpec s;
  s.parameter = sweep_parameter_from_string(j.at("parameter").get<std::string>());
  s.base = manifest_from_json(j.at("base"));
  if (auto it = j.find("values"); it != j.end()) {
    s.values = it->get<std::vector<double>>();
  } else if (auto g = j.find("grid"); g != j.end()) {
    const double lo = g->at("lo").get<double>();
    const double hi = g->at("hi").get<double>();
    const auto points = g->at("points").get<std::size_t>();
    const std::string spacing = g->value("spacing", std::string("log"));
    if (spacing == "log") {
      s.values = log_grid(lo, hi, points);
    } else if (spacing == "linear") {
      s.values = linear_grid(lo, hi, points);
    } else {
      throw std::invalid_argument("sweep: spacing must be log or linear");
    }
  } else {
    throw std::invalid_argument("sweep: need \"values\" or \"grid\"");
  }
  s.validate();
  return s;
}

json to_json(const SweepSpec& s) {
  return {{"parameter", to_string(s.parameter)}, {"values", s.values}, {"base", to_json(s.base)}};
}

SweepSpec load_sweep(const std::filesystem::path& path) {
  return sweep_from_json(read_json_file(path));
}

SweepResult run_sweep(const SweepSpec& sweep, unsigned threads) {
  sweep.validate();
  std::vector<ExperimentManifest> manifests;
  std::vector<ProblemInstance> problems;
  for (double v : sweep.values) {
    manifests.push_back(apply_sweep_value(sweep.base, sweep.parameter, v));
    // Only the scale changes the data; reuse the build otherwise.
    if (problems.empty() || sweep.parameter == SweepParameter::kScale) {
      problems.push_back(build_problem(manifests.back()));
    }
  }
  const std::size_t np = sweep.base.policies.size();
  const std::size_t ns = sweep.base.seeds.size();
  const std::size_t per_value = np * ns;

  SweepResult result;
  result.sweep = sweep;
  result.runs.resize(sweep.values.size() * per_value);
  parallel_for(result.runs.size(), threads, [&](std::size_t i) {
    const std::size_t vi = i / per_value;
    const std::size_t rest = i % per_value;
    const ProblemInstance& prob = problems[problems.size() == 1 ? 0 : vi];
    RunRecord rec = run_one(prob, manifests[vi], rest / ns, sweep.base.seeds[rest % ns]);
    rec.summary.sweep_value = sweep.values[vi];
    result.runs[i] = std::move(rec);
  });
  return result;
}

}  // namespace aadmm::bench
