#include "aadmm/bench.hpp"
#include "aadmm/numkit.hpp"
#include "aadmm/policies.hpp"
#include "aadmm/problems.hpp"

#include <benchmark/benchmark.h>

using namespace aadmm;

namespace {

// (D^T D + tau I) x = rhs with tau alternating, so every call refactors.
void BM_ShiftedSolveRefactor(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  SeededRng rng(1);
  const Matrix d = rng.normal_matrix(n + 10, n);
  ShiftedSolver solver(d.transpose() * d);
  const Vector rhs = rng.normal_vector(n);
  double tau = 0.1;
  for (auto _ : state) {
    tau = tau == 0.1 ? 0.2 : 0.1;
    benchmark::DoNotOptimize(solver.solve(tau, rhs));
  }
}
BENCHMARK(BM_ShiftedSolveRefactor)->Arg(40)->Arg(200);

// Same tau every call: the cached factorization is reused.
void BM_ShiftedSolveCached(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  SeededRng rng(1);
  const Matrix d = rng.normal_matrix(n + 10, n);
  ShiftedSolver solver(d.transpose() * d);
  const Vector rhs = rng.normal_vector(n);
  for (auto _ : state) benchmark::DoNotOptimize(solver.solve(0.1, rhs));
}
BENCHMARK(BM_ShiftedSolveCached)->Arg(40)->Arg(200);

void BM_ElasticNetProx(benchmark::State& state) {
  SeededRng rng(2);
  const Vector w = rng.normal_vector(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(elastic_net_prox(w, 1.0, 1.0, 0.5));
}
BENCHMARK(BM_ElasticNetProx)->Arg(40)->Arg(4000);

void BM_SingularValueProx(benchmark::State& state) {
  SeededRng rng(3);
  const Matrix w = rng.normal_matrix(state.range(0), state.range(0) / 2);
  for (auto _ : state) benchmark::DoNotOptimize(singular_value_prox(w, 1.0, 1.0, 0.5));
}
BENCHMARK(BM_SingularValueProx)->Arg(20)->Arg(100);

void BM_LogisticProx(benchmark::State& state) {
  const ConsensusLogRegSpec spec = generate_consensus_logreg(200, 25, 4, 2, 5, 1.0);
  SeededRng rng(4);
  const Vector y = rng.normal_vector(25);
  for (auto _ : state) {
    Vector x;
    benchmark::DoNotOptimize(
        logistic_prox(spec.blocks[0], spec.labels[0], y, 1.0, x, 1e-10, 100));
  }
}
BENCHMARK(BM_LogisticProx);

void BM_AdmmStep(benchmark::State& state) {
  const auto kind = static_cast<ProblemKind>(state.range(0));
  const ProblemInstance inst = build_synthetic(SyntheticRequest::defaults(kind));
  IterateState s = initial_state(inst, bench::shared_initialization(inst, 1, 0.1));
  for (auto _ : state) {
    s = admm_step(inst, s);
    benchmark::DoNotOptimize(compute_residuals(inst, s));
  }
  state.SetLabel(to_string(kind));
}
BENCHMARK(BM_AdmmStep)
    ->Arg(static_cast<int>(ProblemKind::kElasticNet))
    ->Arg(static_cast<int>(ProblemKind::kQP))
    ->Arg(static_cast<int>(ProblemKind::kBasisPursuit))
    ->Arg(static_cast<int>(ProblemKind::kConsensusLogReg))
    ->Arg(static_cast<int>(ProblemKind::kLRLS));

void BM_SpectralEstimate(benchmark::State& state) {
  const ProblemInstance inst = build_synthetic(SyntheticRequest::defaults(ProblemKind::kElasticNet));
  IterateState s = initial_state(inst, bench::shared_initialization(inst, 1, 0.1));
  s = admm_step(inst, s);
  const AdaptSnapshot snap = AdaptSnapshot::capture(s);
  for (int i = 0; i < 2; ++i) s = admm_step(inst, s);
  for (auto _ : state) {
    const SpectralEstimate est = estimate_spectral(s, snap);
    benchmark::DoNotOptimize(safeguarded_tau(est, s.tau, 0.2));
  }
}
BENCHMARK(BM_SpectralEstimate);

void BM_FullRun(benchmark::State& state) {
  const ProblemInstance inst = build_synthetic(SyntheticRequest::defaults(ProblemKind::kElasticNet));
  const Initialization init = bench::shared_initialization(inst, 1, 0.1);
  for (auto _ : state) {
    SpectralPolicy policy(PolicyConfig::spectral());
    benchmark::DoNotOptimize(run(inst, policy, init, StoppingConfig{}));
  }
}
BENCHMARK(BM_FullRun)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
