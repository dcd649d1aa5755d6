#include "aadmm/oracle.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace aadmm;
using namespace aadmm::oracle;
using aadmm::testing::log_uniform;

TEST(DrsRatio, Examples) {
  EXPECT_DOUBLE_EQ(drs_residual_ratio(1.0, 1.0, 1.0), 0.5);
  EXPECT_NEAR(drs_residual_ratio(2.0, 3.0, 1e-12), 1.0, 1e-10);
  EXPECT_NEAR(drs_residual_ratio(2.0, 3.0, 1e12), 1.0, 1e-10);
}

TEST(DrsRatio, GridScanArgmin) {
  const GridScan scan = drs_grid_scan(2.0, 8.0);
  EXPECT_NEAR(std::log10(scan.argmin_tau), std::log10(0.25), scan.log10_step);
  EXPECT_NEAR(scan.log10_step, 0.01, 1e-12);
}

TEST(DrsRatio, OptimumOverRandomCurvatures) {
  SeededRng rng(5001);
  for (int i = 0; i < 200; ++i) {
    const double alpha = log_uniform(rng, -2.0, 2.0);
    const double beta = log_uniform(rng, -2.0, 2.0);
    const GridScan scan = drs_grid_scan(alpha, beta);
    ASSERT_LE(std::abs(std::log10(scan.argmin_tau * std::sqrt(alpha * beta))), scan.log10_step)
        << alpha << " " << beta;
  }
}

TEST(DrsRatio, DerivativeChangesSignAtOptimum) {
  SeededRng rng(5002);
  for (int i = 0; i < 200; ++i) {
    const double alpha = log_uniform(rng, -2.0, 2.0);
    const double beta = log_uniform(rng, -2.0, 2.0);
    const double star = 1.0 / std::sqrt(alpha * beta);
    // Contraction worsens moving away from tau* in either direction.
    for (double f : {0.5, 0.9, 0.99}) {
      ASSERT_GT(drs_residual_ratio(alpha, beta, star * f),
                drs_residual_ratio(alpha, beta, star * f * 1.001));
      ASSERT_LT(drs_residual_ratio(alpha, beta, star / f / 1.001),
                drs_residual_ratio(alpha, beta, star / f));
    }
  }
}

TEST(DrsStep, FixedPoint) {
  DrsLinearModel m{2.0, 3.0, Vector{{1.0, -1.0}}, Vector{{4.0, 0.5}}};
  const Vector fixed = -(m.a + m.b) / (m.alpha + m.beta);
  const DrsStep s = drs_step_linear(m, fixed, 0.7);
  EXPECT_LE((s.zeta - fixed).norm(), 1e-14);
  EXPECT_LE(drs_residual(m, fixed), 1e-14);
}

TEST(DrsStep, ScalarExample) {
  DrsLinearModel m{1.0, 1.0, Vector::Zero(1), Vector::Zero(1)};
  EXPECT_DOUBLE_EQ(drs_step_linear(m, Vector::Ones(1), 1.0).zeta(0), 0.5);
}

TEST(DrsStep, ResidualContractsByRatio) {
  SeededRng rng(5003);
  DrsLinearModel m{0.3, 5.0, rng.normal_vector(4), rng.normal_vector(4)};
  // Far from tau* so twenty steps keep the residual well above rounding.
  const double tau = 20.0;
  const double ratio = drs_residual_ratio(m.alpha, m.beta, tau);
  Vector z = rng.normal_vector(4);
  for (int k = 0; k < 20; ++k) {
    const Vector next = drs_step_linear(m, z, tau).zeta;
    ASSERT_NEAR(drs_residual(m, next) / drs_residual(m, z), ratio, 1e-12);
    z = next;
  }
}

TEST(Equivalence, OneDimensionalFixedTau) {
  QuadraticConsensus q;
  q.A = Matrix::Identity(1, 1);
  q.u_center = Vector::Constant(1, 2.0);
  q.v_center = Vector::Constant(1, -1.0);
  q.b = Vector::Zero(1);
  FixedPolicy policy;
  for (double tau : {0.01, 1.0, 50.0}) {
    const EquivalenceReport rep = admm_drs_equivalence(q, policy, Vector::Constant(1, 0.3), tau, 50);
    EXPECT_EQ(rep.iterations, 50);
    EXPECT_LE(rep.max_lambda_deviation, 1e-8) << tau;
    EXPECT_LE(rep.max_lambda_hat_deviation, 1e-8) << tau;
  }
}

TEST(Equivalence, AdaptiveTau) {
  const QuadraticConsensus q = random_quadratic_consensus(5, 12, 3.0, 0.2);
  SpectralPolicy policy(PolicyConfig::spectral());
  const EquivalenceReport rep = admm_drs_equivalence(q, policy, Vector::Ones(5), 0.1, 40);
  EXPECT_LE(rep.max_lambda_deviation, 1e-8);
  bool varied = false;
  for (double t : rep.taus) varied = varied || t != 0.1;
  EXPECT_TRUE(varied);
}

TEST(Equivalence, StationaryAtOptimum) {
  QuadraticConsensus q;
  q.A = Matrix::Identity(2, 2);
  q.u_center = Vector::Zero(2);
  q.v_center = Vector::Zero(2);
  q.b = Vector::Zero(2);
  FixedPolicy policy;
  const EquivalenceReport rep = admm_drs_equivalence(q, policy, Vector::Zero(2), 1.0, 10);
  EXPECT_EQ(rep.max_lambda_deviation, 0.0);
}

TEST(Equivalence, ConsistentStart) {
  const QuadraticConsensus q = random_quadratic_consensus(3, 3, 2.0, 0.5);
  const Vector lambda0{{1.0, -2.0, 0.5}};
  const DrsLinearModel m = dual_model(q);
  // B v0 = -v0 must equal dG^(lambda0) = beta lambda0 + b.
  EXPECT_LE((-consistent_v0(q, lambda0) - (m.beta * lambda0 + m.b)).norm(), 1e-14);
}

TEST(SpectralExactness, Symmetric) {
  const QuadraticConsensus q = random_quadratic_consensus(4, 21, 1.0, 1.0);
  const ExactnessReport rep = spectral_exactness(q, PolicyConfig::spectral(), Vector::Ones(4), 0.1);
  ASSERT_TRUE(rep.adapted);
  EXPECT_NEAR(rep.tau_after, 1.0, 1e-6);
  EXPECT_NEAR(rep.alpha_cor, 1.0, 1e-10);
  EXPECT_NEAR(rep.beta_cor, 1.0, 1e-10);
}

TEST(SpectralExactness, Asymmetric) {
  const QuadraticConsensus q = random_quadratic_consensus(4, 22, 4.0, 1.0);
  EXPECT_DOUBLE_EQ(q.alpha_star(), 4.0);
  const ExactnessReport rep = spectral_exactness(q, PolicyConfig::spectral(), Vector::Ones(4), 0.1);
  ASSERT_TRUE(rep.adapted);
  EXPECT_NEAR(1.0 / rep.alpha_hat, 4.0, 1e-6);
  EXPECT_NEAR(1.0 / rep.beta_hat, 1.0, 1e-6);
  EXPECT_NEAR(rep.tau_after, 0.5, 1e-6);
  EXPECT_NEAR(rep.tau_expected, 0.5, 1e-15);
}

TEST(SpectralExactness, RandomCurvatures) {
  SeededRng rng(5004);
  for (int i = 0; i < 20; ++i) {
    const double a = log_uniform(rng, -1.5, 1.5);
    const double b = log_uniform(rng, -1.5, 1.5);
    const QuadraticConsensus q = random_quadratic_consensus(5, 100 + i, a, b);
    const ExactnessReport rep =
        spectral_exactness(q, PolicyConfig::spectral(), rng.normal_vector(5), 0.1);
    ASSERT_TRUE(rep.adapted);
    ASSERT_LE(std::abs(1.0 / rep.alpha_hat - a), 1e-6 * std::max(1.0, a));
    ASSERT_LE(std::abs(1.0 / rep.beta_hat - b), 1e-6 * std::max(1.0, b));
    ASSERT_NEAR(rep.tau_after / rep.tau_expected, 1.0, 1e-6);
  }
}

TEST(ReferenceSolve, OneDimensionalLasso) {
  ElasticNetSpec spec{Matrix::Ones(1, 1), Vector::Constant(1, 3.0), 1.0, 0.0};
  const ReferenceSolution sol = reference_elastic_net(spec);
  EXPECT_NEAR(sol.x(0), 2.0, 1e-9);
  EXPECT_NEAR(sol.objective, 0.5 + 2.0, 1e-9);
}

TEST(ReferenceSolve, ZeroData) {
  SeededRng rng(5005);
  ElasticNetSpec spec{rng.normal_matrix(6, 4), Vector::Zero(6)};
  const ReferenceSolution sol = reference_elastic_net(spec);
  EXPECT_EQ(sol.x.norm(), 0.0);
  EXPECT_EQ(sol.objective, 0.0);
}

TEST(ReferenceSolve, TinyBasisPursuit) {
  // min |x1| + |x2| + |x3|  s.t.  x1 + x2 = 2,  x3 = 1
  Matrix d(2, 3);
  d << 1, 1, 0, 0, 0, 1;
  const ReferenceSolution sol = reference_basis_pursuit({d, Vector{{2.0, 1.0}}});
  EXPECT_NEAR(sol.objective, 3.0, 1e-8);
  EXPECT_LE((d * sol.x - Vector{{2.0, 1.0}}).norm(), 1e-8);
}

TEST(InteriorPoint, EqualityAndInequality) {
  QpProblem p;
  p.Q = Matrix::Identity(2, 2);
  p.q = Vector::Zero(2);
  p.E = Matrix::Ones(1, 2);
  p.e = Vector::Ones(1);
  p.G = Matrix::Zero(1, 2);
  p.G(0, 0) = 1.0;
  p.h = Vector::Constant(1, 0.2);
  // min 1/2 |x|^2  s.t.  x1 + x2 = 1,  x1 <= 0.2
  const QpSolution s = solve_qp_interior_point(p);
  EXPECT_NEAR(s.x(0), 0.2, 1e-8);
  EXPECT_NEAR(s.x(1), 0.8, 1e-8);
  EXPECT_GE(s.z.minCoeff(), 0.0);
}

TEST(Kkt, InteriorOptimum) {
  SeededRng rng(5006);
  const Matrix q = aadmm::testing::random_psd(rng, 3) + Matrix::Identity(3, 3);
  const QPSpec spec{q, rng.normal_vector(3), rng.normal_matrix(2, 3), Vector::Constant(2, 1e6)};
  const Vector x = -q.llt().solve(spec.q);
  EXPECT_LE(kkt_check(spec, x).max(), 1e-8);
  EXPECT_LE(kkt_check(spec, x, Vector::Zero(2)).max(), 1e-8);
}

TEST(Kkt, ActiveConstraint) {
  const QPSpec spec{Matrix::Ones(1, 1), Vector::Zero(1), Matrix::Ones(1, 1),
                    Vector::Constant(1, -1.0)};
  // mu = 1 balances x = -1; ADMM's lambda is -mu.
  EXPECT_LE(kkt_check(spec, Vector::Constant(1, -1.0), Vector::Constant(1, -1.0)).max(), 1e-8);
  EXPECT_LE(kkt_check(spec, Vector::Constant(1, -1.0)).max(), 1e-8);
  // A wrong point is caught.
  EXPECT_GT(kkt_check(spec, Vector::Constant(1, -0.5)).max(), 0.1);
}

TEST(Kkt, RandomTinyQPsAgainstReference) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const QPSpec spec = generate_qp(4, 6, seed, 50.0);
    const ReferenceSolution sol = reference_qp(spec);
    ASSERT_LE(kkt_check(spec, sol.x).max(), 1e-6) << "seed " << seed;
  }
}

TEST(VerificationSuite, Passes) {
  SuiteOptions options;
  options.optimality_samples = 20;
  const nlohmann::json report = verification_suite(options);
  EXPECT_TRUE(report.at("pass").get<bool>()) << report.dump(2);
}
