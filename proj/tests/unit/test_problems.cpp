#include "aadmm/oracle.hpp"
#include "aadmm/policies.hpp"
#include "aadmm/problems.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace aadmm;
using aadmm::testing::golden_min;
using aadmm::testing::log_uniform;

namespace {

RunResult run_fixed(const ProblemInstance& p, double tau, double eps = 1e-9, long iters = 20000) {
  FixedPolicy policy;
  const Initialization init{Vector::Zero(p.m()), Vector::Zero(p.p()), tau};
  return run(p, policy, init, StoppingConfig{eps, iters});
}

Vector solution_of(const ProblemInstance& p, const RunResult& r) {
  return p.solution(r.state.u, r.state.v);
}

}  // namespace

// ---------------------------------------------------------------------------
// Prox maps against brute-force minimization

TEST(ProxOracle, ElasticNetScalar) {
  SeededRng rng(3001);
  for (int s = 0; s < 1000; ++s) {
    const double w = rng.normal() * log_uniform(rng, -2.0, 2.0);
    const double rho1 = rng.below(10) == 0 ? 0.0 : log_uniform(rng, -2.0, 1.0);
    const double rho2 = rng.below(10) == 0 ? 0.0 : rng.uniform(0.0, 3.0);
    const double tau = log_uniform(rng, -2.0, 2.0);
    const auto f = [&](double x) {
      return rho1 * std::abs(x) + 0.5 * rho2 * x * x + 0.5 * tau * (x - w) * (x - w);
    };
    const double brute = golden_min(f, -std::abs(w) - 1.0, std::abs(w) + 1.0);
    const double closed = elastic_net_prox(Vector::Constant(1, w), rho1, rho2, tau)(0);
    ASSERT_NEAR(closed, brute, 1e-6) << "w " << w << " rho1 " << rho1 << " rho2 " << rho2;
  }
}

TEST(ProxOracle, SingularValue2x2) {
  // With x = (a + d, c - b)/sqrt2 and y = (a - d, b + c)/sqrt2 a 2x2 matrix
  // [a b; c d] has ||V||_F^2 = |x|^2 + |y|^2 and ||V||_* = sqrt2 max(|x|, |y|),
  // both from (s1 + s2)^2 = ||V||_F^2 + 2 |det V|. The objective then sees
  // x only through |x| and |x - x_w|, so x = s x_w/|x_w| and likewise y,
  // leaving a convex problem in (s, t) >= 0 for nested line searches.
  SeededRng rng(3002);
  const double h = 1.0 / std::sqrt(2.0);
  for (int s = 0; s < 1000; ++s) {
    const Matrix w = rng.normal_matrix(2, 2) * log_uniform(rng, -1.0, 1.0);
    const double rho1 = log_uniform(rng, -2.0, 1.0);
    const double rho2 = rng.uniform(0.0, 2.0);
    const double tau = log_uniform(rng, -1.0, 1.0);

    const Eigen::Vector2d xw(h * (w(0, 0) + w(1, 1)), h * (w(1, 0) - w(0, 1)));
    const Eigen::Vector2d yw(h * (w(0, 0) - w(1, 1)), h * (w(0, 1) + w(1, 0)));
    const double nx = xw.norm(), ny = yw.norm();
    const auto f = [&](double a, double b) {
      return rho1 * std::sqrt(2.0) * std::max(a, b) + 0.5 * rho2 * (a * a + b * b) +
             0.5 * tau * ((a - nx) * (a - nx) + (b - ny) * (b - ny));
    };
    const auto best_b = [&](double a) {
      return golden_min([&](double b) { return f(a, b); }, 0.0, ny + 1.0);
    };
    const double sa = golden_min([&](double a) { return f(a, best_b(a)); }, 0.0, nx + 1.0);
    const double sb = best_b(sa);
    const Eigen::Vector2d x = nx > 0.0 ? Eigen::Vector2d(xw * (sa / nx)) : Eigen::Vector2d::Zero();
    const Eigen::Vector2d y = ny > 0.0 ? Eigen::Vector2d(yw * (sb / ny)) : Eigen::Vector2d::Zero();
    Matrix brute(2, 2);
    brute << h * (x(0) + y(0)), h * (y(1) - x(1)), h * (x(1) + y(1)), h * (x(0) - y(0));

    const Matrix closed = singular_value_prox(w, rho1, rho2, tau);
    ASSERT_LE((closed - brute).norm(), 1e-6) << "sample " << s;
  }
}

TEST(ProxOracle, ConsensusAveraging1D) {
  SeededRng rng(3003);
  for (int s = 0; s < 1000; ++s) {
    const std::size_t nblocks = 1 + rng.below(4);
    ConsensusLogRegSpec spec;
    spec.rho = log_uniform(rng, -2.0, 1.0);
    for (std::size_t i = 0; i < nblocks; ++i) {
      spec.blocks.push_back(Matrix::Ones(1, 1));
      spec.labels.push_back(Vector::Ones(1));
    }
    const ProblemInstance p = build_consensus_logreg(spec);
    const auto n = static_cast<Eigen::Index>(nblocks);
    const Vector u = rng.normal_vector(n) * log_uniform(rng, -1.0, 1.0);
    const Vector lambda = rng.normal_vector(n);
    const double tau = log_uniform(rng, -1.0, 1.0);
    // z minimizes rho |z| + sum_i tau/2 (x_i - z + lambda_i/tau)^2
    const auto f = [&](double z) {
      double total = spec.rho * std::abs(z);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double t = u(i) - z - lambda(i) / tau;
        total += 0.5 * tau * t * t;
      }
      return total;
    };
    const double bound = (u.cwiseAbs() + lambda.cwiseAbs() / tau).maxCoeff() + 1.0;
    const double brute = golden_min(f, -bound, bound);
    ASSERT_NEAR(p.v_solver(u, lambda, tau)(0), brute, 1e-6) << "sample " << s;
  }
}

TEST(ProxOracle, SingularValueProxDegenerates) {
  SeededRng rng(3004);
  const Matrix w = rng.normal_matrix(4, 3);
  // rho1 = 0: pure scaling.
  EXPECT_LE((singular_value_prox(w, 0.0, 1.0, 2.0) - w * (2.0 / 3.0)).norm(), 1e-12);
  // Threshold above the top singular value: zero.
  EXPECT_EQ(singular_value_prox(w, 1e3, 1.0, 1.0).norm(), 0.0);
}

// ---------------------------------------------------------------------------
// Subproblem optimality across kinds

class SubproblemOptimality : public ::testing::TestWithParam<ProblemKind> {};

TEST_P(SubproblemOptimality, FirstOrderConditions) {
  const oracle::OptimalityReport rep = oracle::subproblem_optimality(GetParam(), 50, 77);
  EXPECT_EQ(rep.samples, 50);
  EXPECT_LE(rep.max_u_violation, 1e-8);
  EXPECT_LE(rep.max_v_violation, 1e-8);
}

INSTANTIATE_TEST_SUITE_P(AllKinds, SubproblemOptimality,
                         ::testing::Values(ProblemKind::kElasticNet, ProblemKind::kQP,
                                           ProblemKind::kBasisPursuit,
                                           ProblemKind::kConsensusLogReg, ProblemKind::kLRLS),
                         [](const auto& info) { return std::string(to_string(info.param)); });

// ---------------------------------------------------------------------------
// Builders

TEST(ElasticNetBuilder, ZeroData) {
  SeededRng rng(1);
  ElasticNetSpec spec{rng.normal_matrix(10, 6), Vector::Zero(10)};
  const ProblemInstance p = build_elastic_net(spec);
  const RunResult r = run_fixed(p, 1.0);
  EXPECT_LE(solution_of(p, r).norm(), 1e-6);
}

TEST(ElasticNetBuilder, LeastSquaresWhenUnregularized) {
  SeededRng rng(2);
  ElasticNetSpec spec{rng.normal_matrix(5, 5) + 3.0 * Matrix::Identity(5, 5), rng.normal_vector(5),
                      0.0, 0.0};
  const ProblemInstance p = build_elastic_net(spec);
  const RunResult r = run_fixed(p, 1.0, 1e-10);
  EXPECT_EQ(r.trace.status, RunStatus::kConverged);
  const Vector expected = spec.D.fullPivLu().solve(spec.c);
  EXPECT_LE((solution_of(p, r) - expected).norm(), 1e-6 * (1.0 + expected.norm()));
}

TEST(ElasticNetBuilder, DimensionMismatch) {
  ElasticNetSpec spec{Matrix::Ones(3, 2), Vector::Ones(4)};
  EXPECT_ANY_THROW(build_elastic_net(spec));
}

TEST(QPBuilder, OneDimensionalActiveConstraint) {
  QPSpec spec{Matrix::Ones(1, 1), Vector::Zero(1), Matrix::Ones(1, 1), Vector::Constant(1, -1.0)};
  const ProblemInstance p = build_qp(spec);
  const RunResult r = run_fixed(p, 1.0);
  EXPECT_NEAR(solution_of(p, r)(0), -1.0, 1e-6);
}

TEST(QPBuilder, InactiveConstraints) {
  SeededRng rng(4);
  const Matrix q = aadmm::testing::random_psd(rng, 4) + Matrix::Identity(4, 4);
  QPSpec spec{q, rng.normal_vector(4), rng.normal_matrix(3, 4),
              Vector::Constant(3, std::numeric_limits<double>::infinity())};
  const ProblemInstance p = build_qp(spec);
  const RunResult r = run_fixed(p, 1.0);
  const Vector expected = -q.llt().solve(spec.q);
  EXPECT_LE((solution_of(p, r) - expected).norm(), 1e-6 * (1.0 + expected.norm()));
}

TEST(QPBuilder, RejectsBadSpecs) {
  Matrix asym(2, 2);
  asym << 1.0, 1.0, 0.0, 1.0;
  EXPECT_ANY_THROW(build_qp(QPSpec{asym, Vector::Zero(2), Matrix::Identity(2, 2), Vector::Ones(2)}));
  EXPECT_ANY_THROW(build_qp(QPSpec{Matrix::Identity(2, 2), Vector::Zero(2),
                                   Matrix::Identity(2, 2),
                                   Vector::Constant(2, -std::numeric_limits<double>::infinity())}));
}

TEST(QPBuilder, OptimalPenalty) {
  Matrix q = Matrix::Zero(2, 2);
  q.diagonal() << 1.0, 4.0;
  QPSpec spec{q, Vector::Zero(2), Matrix::Identity(2, 2), Vector::Ones(2)};
  // D Q^-1 D^T = diag(1, 1/4)
  EXPECT_NEAR(qp_optimal_penalty(spec), 2.0, 1e-14);
  // A row with an infinite bound drops out.
  spec.c(1) = std::numeric_limits<double>::infinity();
  EXPECT_NEAR(qp_optimal_penalty(spec), 1.0, 1e-14);
  spec.Q(0, 0) = 0.0;
  EXPECT_THROW(qp_optimal_penalty(spec), std::invalid_argument);
}

TEST(BasisPursuitBuilder, ZeroData) {
  SeededRng rng(5);
  const ProblemInstance p = build_basis_pursuit({rng.normal_matrix(3, 6), Vector::Zero(3)});
  EXPECT_LE(solution_of(p, run_fixed(p, 1.0)).norm(), 1e-6);
}

TEST(BasisPursuitBuilder, UniqueFeasibleCoordinates) {
  Matrix d = Matrix::Zero(2, 3);
  d(0, 0) = 1.0;
  d(1, 1) = 1.0;
  const ProblemInstance p = build_basis_pursuit({d, Vector{{1.0, 1.0}}});
  const Vector x = solution_of(p, run_fixed(p, 1.0));
  EXPECT_NEAR(x(0), 1.0, 1e-6);
  EXPECT_NEAR(x(1), 1.0, 1e-6);
  EXPECT_NEAR(x(2), 0.0, 1e-6);
}

TEST(BasisPursuitBuilder, RankDeficient) {
  Matrix d(2, 3);
  d << 1, 2, 3, 2, 4, 6;
  EXPECT_ANY_THROW(build_basis_pursuit({d, Vector::Ones(2)}));
}

TEST(ConsensusLogRegBuilder, HugeRhoGivesZero) {
  ConsensusLogRegSpec spec = generate_consensus_logreg(40, 6, 8, 2, 3, 1e6);
  const ProblemInstance p = build_consensus_logreg(spec);
  EXPECT_LE(solution_of(p, run_fixed(p, 1.0, 1e-8, 2000)).norm(), 1e-6);
}

TEST(ConsensusLogRegBuilder, SingleBlockMatchesReference) {
  ConsensusLogRegSpec spec = generate_consensus_logreg(60, 8, 9, 1, 3, 1.0);
  const ProblemInstance p = build_consensus_logreg(spec);
  const RunResult r = run_fixed(p, 1.0, 1e-8);
  const double ref = oracle::reference_logreg(spec).objective;
  EXPECT_LE(std::abs(p.objective(r.state.u, r.state.v) - ref), 1e-4 * std::abs(ref));
}

TEST(ConsensusLogRegBuilder, RejectsBadLabels) {
  ConsensusLogRegSpec spec;
  spec.blocks = {Matrix::Ones(2, 1)};
  spec.labels = {Vector{{1.0, 0.5}}};
  EXPECT_ANY_THROW(build_consensus_logreg(spec));
}

TEST(LogisticProx, NewtonReachesTolerance) {
  SeededRng rng(10);
  const Matrix d = rng.normal_matrix(30, 5);
  Vector labels(30);
  for (Eigen::Index i = 0; i < 30; ++i) labels(i) = rng.below(2) ? 1.0 : -1.0;
  const Vector y = rng.normal_vector(5) * 10.0;
  Vector x = Vector::Zero(5);
  const NewtonReport rep = logistic_prox(d, labels, y, 0.05, x, 1e-10, 100);
  ASSERT_TRUE(rep.converged);
  EXPECT_LE((logistic_gradient(d, labels, x) + 0.05 * (x - y)).norm(), 1e-10);
}

TEST(LRLSBuilder, ZeroData) {
  SeededRng rng(11);
  const ProblemInstance p = build_lrls({rng.normal_matrix(8, 4), Matrix::Zero(8, 3)});
  EXPECT_LE(solution_of(p, run_fixed(p, 1.0)).norm(), 1e-6);
}

TEST(LRLSBuilder, RidgeWhenNuclearOff) {
  SeededRng rng(12);
  LRLSSpec spec{rng.normal_matrix(10, 4), rng.normal_matrix(10, 3), 0.0, 0.5};
  const ProblemInstance p = build_lrls(spec);
  const RunResult r = run_fixed(p, 1.0, 1e-10);
  const Matrix dtd = spec.D.transpose() * spec.D + 0.5 * Matrix::Identity(4, 4);
  const Matrix expected = dtd.llt().solve(spec.D.transpose() * spec.C);
  EXPECT_LE((unvec(solution_of(p, r), 4, 3) - expected).norm(), 1e-6 * (1.0 + expected.norm()));
}

TEST(LRLSBuilder, VecRoundTrip) {
  SeededRng rng(13);
  const Matrix x = rng.normal_matrix(3, 5);
  EXPECT_EQ(unvec(vec(x), 3, 5), x);
  EXPECT_EQ(vec(x)(1), x(1, 0));
}

TEST(Builders, ScaleMultipliesMeasurements) {
  SeededRng rng(14);
  const ElasticNetSpec spec{rng.normal_matrix(6, 4), rng.normal_vector(6)};
  ElasticNetSpec doubled = spec;
  doubled.c *= 2.0;
  const ProblemInstance a = build_elastic_net(spec, 2.0);
  const ProblemInstance b = build_elastic_net(doubled);
  const Vector v = rng.normal_vector(4);
  EXPECT_LE((a.u_solver(v, v, 0.7) - b.u_solver(v, v, 0.7)).norm(), 1e-14);
  EXPECT_THROW(build_elastic_net(spec, 0.0), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Generators

TEST(Generators, Deterministic) {
  for (ProblemKind kind : {ProblemKind::kElasticNet, ProblemKind::kQP, ProblemKind::kBasisPursuit,
                           ProblemKind::kConsensusLogReg, ProblemKind::kLRLS}) {
    const SyntheticRequest req = SyntheticRequest::defaults(kind);
    const ProblemInstance a = build_synthetic(req);
    const ProblemInstance b = build_synthetic(req);
    SeededRng rng(15);
    const Vector v = rng.normal_vector(a.m());
    const Vector lambda = rng.normal_vector(a.p());
    EXPECT_EQ(a.u_solver(v, lambda, 0.3), b.u_solver(v, lambda, 0.3)) << to_string(kind);
  }
  const ElasticNetSpec x = generate_elastic_net(50, 40, 42);
  EXPECT_EQ(x.D, generate_elastic_net(50, 40, 42).D);
  EXPECT_NE(x.D, generate_elastic_net(50, 40, 43).D);
}

TEST(Generators, QPConditionKnob) {
  const QPSpec spec = generate_qp(25, 50, 42, 1e5);
  const double cond = condition_number(spec.Q);
  EXPECT_GE(cond, 0.5e5);
  EXPECT_LE(cond, 2e5);
}

TEST(Generators, ElasticNetGroupedColumns) {
  const ElasticNetSpec spec = generate_elastic_net(50, 40, 42);
  ASSERT_EQ(spec.D.rows(), 50);
  ASSERT_EQ(spec.D.cols(), 40);
  const auto corr = [&](Eigen::Index i, Eigen::Index j) {
    const Vector a = spec.D.col(i).array() - spec.D.col(i).mean();
    const Vector b = spec.D.col(j).array() - spec.D.col(j).mean();
    return a.dot(b) / (a.norm() * b.norm());
  };
  // Columns within a group move together, across groups they do not.
  EXPECT_GT(corr(0, 4), 0.95);
  EXPECT_GT(corr(5, 9), 0.95);
  EXPECT_LT(std::abs(corr(0, 5)), 0.6);
  EXPECT_LT(std::abs(corr(20, 30)), 0.6);
}

TEST(Generators, KindNames) {
  for (ProblemKind kind : {ProblemKind::kElasticNet, ProblemKind::kQP, ProblemKind::kBasisPursuit,
                           ProblemKind::kConsensusLogReg, ProblemKind::kLRLS}) {
    EXPECT_EQ(problem_kind_from_string(to_string(kind)), kind);
  }
  EXPECT_THROW(problem_kind_from_string("sudoku"), std::invalid_argument);
}

TEST(Generators, RequestJsonRoundTrip) {
  SyntheticRequest req = SyntheticRequest::defaults(ProblemKind::kLRLS);
  req.seed = 99;
  req.rho1 = 0.25;
  const SyntheticRequest back = synthetic_request_from_json(to_json(req));
  EXPECT_EQ(to_json(back), to_json(req));
}

// ---------------------------------------------------------------------------
// LIBSVM

TEST(Libsvm, Example) {
  std::istringstream in("1 1:0.5 3:-2\n-1 2:1\n");
  const LibsvmData d = parse_libsvm(in);
  Matrix expected(2, 3);
  expected << 0.5, 0.0, -2.0, 0.0, 1.0, 0.0;
  EXPECT_EQ(d.features, expected);
  EXPECT_EQ(d.labels, (Vector{{1.0, -1.0}}));
}

TEST(Libsvm, EmptyInput) {
  std::istringstream in("");
  EXPECT_THROW(parse_libsvm(in), std::runtime_error);
}

TEST(Libsvm, MalformedLineReportsNumber) {
  std::istringstream in("1 1:0.5\n1 2-3\n");
  try {
    parse_libsvm(in);
    FAIL() << "expected a parse error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Libsvm, SizeCap) {
  std::istringstream in("1 1000:1\n-1 1:1\n");
  LibsvmOptions options;
  options.max_entries = 1000;
  EXPECT_THROW(parse_libsvm(in, options), std::runtime_error);
}

TEST(Libsvm, RoundTrip) {
  SeededRng rng(16);
  LibsvmData data{rng.normal_matrix(7, 5), Vector::Ones(7)};
  data.features(2, 3) = 0.0;
  data.labels(4) = -1.0;
  std::ostringstream out;
  write_libsvm(out, data);
  std::istringstream in(out.str());
  const LibsvmData back = parse_libsvm(in);
  EXPECT_LE((back.features - data.features).norm(), 1e-12);
  EXPECT_EQ(back.labels, data.labels);
}

TEST(Libsvm, Scaling) {
  Matrix x(3, 2);
  x << 1.0, -4.0, 2.0, 2.0, 3.0, 1.0;
  Matrix s = x;
  scale_features(s, FeatureScaling::kStandardize);
  EXPECT_NEAR(s.col(0).mean(), 0.0, 1e-15);
  EXPECT_NEAR(s.col(0).squaredNorm() / 3.0, 1.0, 1e-14);
  Matrix r = x;
  scale_features(r, FeatureScaling::kUnitRange);
  EXPECT_EQ(r.cwiseAbs().maxCoeff(), 1.0);
  EXPECT_EQ(r(0, 1), -1.0);
}
