#include "aadmm/numkit.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <limits>

using namespace aadmm;
using aadmm::testing::random_psd;

TEST(ShiftedSolve, ZeroMatrixIsIdentitySolve) {
  ShiftedSolver cache;
  const Vector x = solve_shifted(Matrix::Zero(2, 2), 1.0, Vector{{3.0, 4.0}}, cache);
  EXPECT_DOUBLE_EQ(x(0), 3.0);
  EXPECT_DOUBLE_EQ(x(1), 4.0);
}

TEST(ShiftedSolve, IdentityPlusShift) {
  ShiftedSolver cache;
  const Vector x = solve_shifted(Matrix::Identity(2, 2), 1.0, Vector{{2.0, 2.0}}, cache);
  EXPECT_NEAR(x(0), 1.0, 1e-15);
  EXPECT_NEAR(x(1), 1.0, 1e-15);
}

TEST(ShiftedSolve, MatchesExplicitInverse) {
  SeededRng rng(7);
  const Matrix m = random_psd(rng, 5);
  const Matrix shifted = m + 0.1 * Matrix::Identity(5, 5);
  // Independent path: full-pivot LU inverse.
  const Vector expected = shifted.fullPivLu().inverse() * Vector::Ones(5);
  ShiftedSolver cache;
  const Vector x = solve_shifted(m, 0.1, Vector::Ones(5), cache);
  EXPECT_LE((x - expected).norm(), 1e-10 * expected.norm());
}

TEST(ShiftedSolve, CacheReusedUntilTauChanges) {
  SeededRng rng(3);
  ShiftedSolver solver(random_psd(rng, 6));
  const Vector rhs = rng.normal_vector(6);
  solver.solve(0.5, rhs);
  solver.solve(0.5, rhs);
  EXPECT_EQ(solver.factorizations(), 1);
  solver.solve(0.25, rhs);
  EXPECT_EQ(solver.factorizations(), 2);
  EXPECT_EQ(solver.cached_tau(), 0.25);
}

TEST(ShiftedSolve, GeneralShiftMatrix) {
  SeededRng rng(5);
  const Matrix m = random_psd(rng, 4);
  const Matrix n = random_psd(rng, 4);
  ShiftedSolver solver(m, n);
  const Vector rhs = rng.normal_vector(4);
  const Vector x = solver.solve(2.0, rhs);
  EXPECT_LE(((m + 2.0 * n) * x - rhs).norm(), 1e-10 * rhs.norm());
}

TEST(ShiftedSolve, SingularFallsBackThenThrows) {
  // Indefinite but invertible: Cholesky fails, LDLT handles it.
  Matrix m(2, 2);
  m << 1.0, 0.0, 0.0, -3.0;
  ShiftedSolver solver(m);
  const Vector x = solver.solve(1.0, Vector{{2.0, 4.0}});
  EXPECT_NEAR(x(0), 1.0, 1e-14);
  EXPECT_NEAR(x(1), -2.0, 1e-14);
  EXPECT_NE(solver.method(), ShiftedSolver::Method::kCholesky);
  // m + 3 I is singular.
  EXPECT_THROW(solver.solve(3.0, Vector{{1.0, 1.0}}), SingularError);
}

TEST(ShiftedSolve, RejectsBadInput) {
  ShiftedSolver cache;
  EXPECT_THROW(solve_shifted(Matrix::Identity(2, 2), 1.0, Vector::Ones(3), cache), DimensionError);
  Vector bad = Vector::Ones(2);
  bad(1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(solve_shifted(Matrix::Identity(2, 2), 1.0, bad, cache), NonFiniteError);
}

TEST(Svd, DiagonalAndZero) {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 3.0;
  const Svd s = svd(d);
  EXPECT_NEAR(s.singular_values(0), 3.0, 1e-15);
  EXPECT_NEAR(s.singular_values(1), 1.0, 1e-15);
  EXPECT_EQ(svd(Matrix::Zero(3, 2)).singular_values.norm(), 0.0);
}

TEST(Svd, Reconstruction) {
  SeededRng rng(11);
  const Matrix m = rng.normal_matrix(4, 3);
  const Svd s = svd(m);
  EXPECT_LE((s.u * s.singular_values.asDiagonal() * s.v.transpose() - m).norm(), 1e-8 * m.norm());
  for (Eigen::Index i = 1; i < s.singular_values.size(); ++i) {
    EXPECT_GE(s.singular_values(i - 1), s.singular_values(i));
  }
}

TEST(Projections, BoxAndAffineExamples) {
  const Vector b = box_project(Vector{{5.0, -1.0}}, Vector{{1.0, 1.0}});
  EXPECT_EQ(b, (Vector{{1.0, -1.0}}));

  Matrix d(1, 2);
  d << 1.0, 1.0;
  const Vector c{{4.0}};
  const Vector z = affine_project(d, c, Vector::Zero(2));
  EXPECT_NEAR(z(0), 2.0, 1e-14);
  EXPECT_NEAR(z(1), 2.0, 1e-14);
  EXPECT_NEAR((affine_project(d, c, z) - z).norm(), 0.0, 1e-14);
}

TEST(Projections, AffineRejectsRankDeficient) {
  Matrix d(2, 3);
  d << 1, 2, 3, 2, 4, 6;
  EXPECT_ANY_THROW(AffineProjector(d, Vector::Ones(2)));
}

TEST(Projections, SpdProjectClipsNegativeEigenvalues) {
  Matrix m(2, 2);
  m << 1.0, 0.0, 0.0, -2.0;
  const Matrix p = spd_project(m);
  EXPECT_NEAR(p(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(p(1, 1), 0.0, 1e-15);
}

TEST(SoftThreshold, Scalar) {
  EXPECT_EQ(soft_threshold(3.0, 1.0), 2.0);
  EXPECT_EQ(soft_threshold(-3.0, 1.0), -2.0);
  EXPECT_EQ(soft_threshold(0.5, 1.0), 0.0);
}

TEST(ConditionNumber, Diagonal) {
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 10.0, 2.0, 0.5;
  EXPECT_NEAR(condition_number(d), 20.0, 1e-12);
  EXPECT_TRUE(std::isinf(condition_number(Matrix::Zero(2, 2))));
}

TEST(SeededRng, EqualSeedsEqualStreams) {
  SeededRng a(99), b(99), c(100);
  bool differs = false;
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t x = a.next_u64();
    ASSERT_EQ(x, b.next_u64());
    differs = differs || x != c.next_u64();
  }
  EXPECT_TRUE(differs);
}

TEST(SeededRng, IsMt19937_64) {
  // The standard fixes the 10000th output for the default seed 5489.
  SeededRng rng(5489);
  for (int i = 0; i < 9999; ++i) rng.next_u64();
  EXPECT_EQ(rng.next_u64(), 9981545732273789042ull);
}

TEST(SeededRng, RangesAndOrthogonality) {
  SeededRng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(rng.below(7), 7u);
  }
  const Matrix q = rng.orthogonal_matrix(6);
  EXPECT_LE((q.transpose() * q - Matrix::Identity(6, 6)).norm(), 1e-12);
}

// ---------------------------------------------------------------------------
// Properties

TEST(NumkitProperty, ShiftedSolveResidual) {
  SeededRng rng(2001);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<Eigen::Index>(1 + rng.below(12));
    const Eigen::Index rank = static_cast<Eigen::Index>(rng.below(n + 1));
    const Matrix m = rank == 0 ? Matrix(Matrix::Zero(n, n)) : random_psd(rng, n, rank);
    const double tau = aadmm::testing::log_uniform(rng, -3.0, 3.0);
    const Vector rhs = rng.normal_vector(n);
    ShiftedSolver cache;
    const Vector x = solve_shifted(m, tau, rhs, cache);
    ASSERT_LE(((m + tau * Matrix::Identity(n, n)) * x - rhs).norm(), 1e-10 * rhs.norm())
        << "trial " << trial;
  }
}

TEST(NumkitProperty, SvdOrthonormalFactors) {
  SeededRng rng(2002);
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = static_cast<Eigen::Index>(1 + rng.below(8));
    const auto c = static_cast<Eigen::Index>(1 + rng.below(8));
    const Matrix m = rng.normal_matrix(r, c) * aadmm::testing::log_uniform(rng, -3.0, 3.0);
    const Svd s = svd(m);
    const Eigen::Index k = s.singular_values.size();
    ASSERT_LE((s.u * s.singular_values.asDiagonal() * s.v.transpose() - m).norm(), 1e-8 * m.norm());
    ASSERT_LE((s.u.transpose() * s.u - Matrix::Identity(k, k)).norm(), 1e-8);
    ASSERT_LE((s.v.transpose() * s.v - Matrix::Identity(k, k)).norm(), 1e-8);
    ASSERT_GE(s.singular_values.minCoeff(), 0.0);
  }
}

TEST(NumkitProperty, ProjectionsIdempotentAndNearest) {
  SeededRng rng(2003);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<Eigen::Index>(2 + rng.below(8));
    const auto m = static_cast<Eigen::Index>(1 + rng.below(n - 1));
    const Vector x = rng.normal_vector(n) * 3.0;

    const Vector upper = rng.normal_vector(n);
    const Vector pb = box_project(x, upper);
    ASSERT_EQ(box_project(pb, upper), pb);

    const Matrix d = rng.normal_matrix(m, n);
    const Vector c = rng.normal_vector(m);
    const AffineProjector proj(d, c);
    const Vector pa = proj(x);
    ASSERT_LE((proj(pa) - pa).norm(), 1e-10 * (1.0 + pa.norm()));
    ASSERT_LE((d * pa - c).norm(), 1e-10 * (1.0 + c.norm()));

    for (int s = 0; s < 5; ++s) {
      // Feasible points: box by clipping a random draw, affine by
      // projecting one.
      const Vector yb = box_project(rng.normal_vector(n) * 3.0, upper);
      ASSERT_LE((pb - x).norm(), (yb - x).norm() + 1e-12);
      const Vector ya = proj(rng.normal_vector(n) * 3.0);
      ASSERT_LE((pa - x).norm(), (ya - x).norm() + 1e-10);
    }

    const Matrix sym = rng.normal_matrix(n, n);
    const Matrix ps = spd_project(sym);
    ASSERT_LE((spd_project(ps) - ps).norm(), 1e-10 * (1.0 + ps.norm()));
  }
}
