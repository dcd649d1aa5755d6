// aadmm: run experiment manifests, parameter sweeps and the oracle
// verification suite.
//
//   aadmm run manifest.json [--out DIR] [--threads N] [--seed S]
//   aadmm sweep sweep.json  [--out DIR] [--threads N] [--seed S]
//   aadmm oracle            [--out DIR] [--seed S] [--samples N]
//
// Without --out, results go to the manifest's output_dir, resolved
// against $AADMM_OUTPUT_ROOT when that is set and the path is relative.

#include "aadmm/bench.hpp"
#include "aadmm/oracle.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace aadmm;

namespace {

struct CommonFlags {
  std::string out;
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;
};

fs::path output_dir(const CommonFlags& flags, const std::string& manifest_dir) {
  if (!flags.out.empty()) return flags.out;
  fs::path dir = manifest_dir;
  if (dir.is_relative()) {
    if (const char* root = std::getenv("AADMM_OUTPUT_ROOT"); root && *root) dir = fs::path(root) / dir;
  }
  return dir;
}

void print_files(const bench::ReportFiles& files) {
  std::cout << "wrote " << files.summary_csv.string() << ", " << files.summary_text.string()
            << ", " << files.manifest_json.string() << " and " << files.traces.size()
            << " trace file(s)\n";
}

int run_command(const std::string& path, const CommonFlags& flags) {
  bench::ExperimentManifest manifest = bench::load_manifest(path);
  if (flags.seed) manifest.seeds = {*flags.seed};
  const bench::MatrixResult result = bench::run_matrix(manifest, flags.threads);
  bench::write_summary_text(std::cout, result.runs);
  print_files(bench::emit_report(result, output_dir(flags, manifest.output_dir)));
  return result.all_completed() ? 0 : 1;
}

int sweep_command(const std::string& path, const CommonFlags& flags) {
  bench::SweepSpec sweep = bench::load_sweep(path);
  if (flags.seed) sweep.base.seeds = {*flags.seed};
  const bench::SweepResult result = bench::run_sweep(sweep, flags.threads);
  bench::write_summary_text(std::cout, result.runs);
  print_files(bench::emit_report(result, output_dir(flags, sweep.base.output_dir)));
  return result.all_completed() ? 0 : 1;
}

int oracle_command(const CommonFlags& flags, int samples) {
  oracle::SuiteOptions options;
  if (flags.seed) options.seed = *flags.seed;
  options.optimality_samples = samples;
  const nlohmann::json report = oracle::verification_suite(options);
  std::cout << report.dump(2) << '\n';
  if (!flags.out.empty()) {
    fs::create_directories(flags.out);
    const fs::path p = fs::path(flags.out) / "oracle.json";
    std::ofstream os(p);
    os << report.dump(2) << '\n';
    if (!os) throw std::runtime_error("cannot write " + p.string());
  }
  return report.value("pass", false) ? 0 : 1;
}

void add_common(CLI::App* cmd, CommonFlags& flags, bool threads) {
  cmd->add_option("-o,--out", flags.out, "Output directory");
  if (threads) {
    cmd->add_option("-j,--threads", flags.threads, "Worker threads")
        ->check(CLI::Range(1u, 1024u));
  }
  cmd->add_option("--seed", flags.seed, "Use this single repetition seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive-penalty ADMM experiments"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string path;
  int samples = 200;

  auto* run = app.add_subcommand("run", "Run every (policy, seed) pair of a manifest");
  run->add_option("manifest", path, "Manifest JSON file")->required()->check(CLI::ExistingFile);
  add_common(run, flags, true);

  auto* sweep = app.add_subcommand("sweep", "Sweep tau0, scale or eps_cor over a grid");
  sweep->add_option("sweep", path, "Sweep JSON file")->required()->check(CLI::ExistingFile);
  add_common(sweep, flags, true);

  auto* orc = app.add_subcommand("oracle", "Run the verification suite");
  add_common(orc, flags, false);
  orc->add_option("--samples", samples, "Random inputs per subproblem check")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_command(path, flags);
    if (*sweep) return sweep_command(path, flags);
    return oracle_command(flags, samples);
  } catch (const std::exception& e) {
    std::cerr << "aadmm: " << e.what() << '\n';
    return 2;
  }
}
