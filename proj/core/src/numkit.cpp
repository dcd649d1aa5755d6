#include "aadmm/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace aadmm {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw NonFiniteError(std::string(what) + ": non-finite entry");
  }
}

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw NonFiniteError(std::string(what) + ": non-finite entry");
  }
}

void require_same_size(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw DimensionError(os.str());
  }
}

// ---------------------------------------------------------------------------
// ShiftedSolver

ShiftedSolver::ShiftedSolver(Matrix base) : base_(std::move(base)) {
  require_same_size(base_.rows(), base_.cols(), "ShiftedSolver base");
  require_finite(base_, "ShiftedSolver base");
}

ShiftedSolver::ShiftedSolver(Matrix base, Matrix shift)
    : base_(std::move(base)), shift_(std::move(shift)) {
  require_same_size(base_.rows(), base_.cols(), "ShiftedSolver base");
  require_same_size(base_.rows(), shift_->rows(), "ShiftedSolver shift");
  require_same_size(base_.cols(), shift_->cols(), "ShiftedSolver shift");
  require_finite(base_, "ShiftedSolver base");
  require_finite(*shift_, "ShiftedSolver shift");
}

void ShiftedSolver::refactor(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw std::invalid_argument("ShiftedSolver: tau must be positive and finite");
  }
  Matrix system = base_;
  if (shift_) {
    system.noalias() += tau * *shift_;
  } else {
    system.diagonal().array() += tau;
  }
  ++factorizations_;
  tau_ = tau;

  llt_.compute(system);
  if (llt_.info() == Eigen::Success) {
    method_ = Method::kCholesky;
    return;
  }
  ldlt_.compute(system);
  if (ldlt_.info() == Eigen::Success && ldlt_.isPositive()) {
    // LDLT succeeding does not imply invertibility; check the pivots.
    const Vector d = ldlt_.vectorD();
    const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
    if (d.cwiseAbs().minCoeff() > 1e-13 * scale) {
      method_ = Method::kLdlt;
      return;
    }
  }
  qr_.compute(system);
  if (qr_.rank() < system.rows()) {
    tau_.reset();
    method_ = Method::kNone;
    throw SingularError("ShiftedSolver: shifted system is singular");
  }
  method_ = Method::kQr;
}

Vector ShiftedSolver::solve(double tau, const Vector& rhs) {
  require_same_size(rhs.size(), base_.rows(), "ShiftedSolver::solve rhs");
  require_finite(rhs, "ShiftedSolver::solve rhs");
  if (!tau_ || *tau_ != tau) refactor(tau);
  switch (method_) {
    case Method::kCholesky: return llt_.solve(rhs);
    case Method::kLdlt: return ldlt_.solve(rhs);
    case Method::kQr: return qr_.solve(rhs);
    case Method::kNone: break;
  }
  throw SingularError("ShiftedSolver: no factorization available");
}

Matrix ShiftedSolver::solve(double tau, const Matrix& rhs) {
  require_same_size(rhs.rows(), base_.rows(), "ShiftedSolver::solve rhs");
  require_finite(rhs, "ShiftedSolver::solve rhs");
  if (!tau_ || *tau_ != tau) refactor(tau);
  switch (method_) {
    case Method::kCholesky: return llt_.solve(rhs);
    case Method::kLdlt: return ldlt_.solve(rhs);
    case Method::kQr: return qr_.solve(rhs);
    case Method::kNone: break;
  }
  throw SingularError("ShiftedSolver: no factorization available");
}

Vector solve_shifted(const Matrix& m, double tau, const Vector& rhs,
                     ShiftedSolver& cache) {
  require_same_size(m.rows(), m.cols(), "solve_shifted matrix");
  require_same_size(rhs.size(), m.rows(), "solve_shifted rhs");
  require_finite(m, "solve_shifted matrix");
  if (cache.key() != m.data() || cache.dim() != m.rows()) {
    cache = ShiftedSolver(m);
    cache.set_key(m.data());
  }
  return cache.solve(tau, rhs);
}

// ---------------------------------------------------------------------------
// Decompositions and projections

Svd svd(const Matrix& m) {
  require_finite(m, "svd");
  if (m.size() == 0) return {Matrix(m.rows(), 0), Vector(0), Matrix(m.cols(), 0)};
  Eigen::JacobiSVD<Matrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

Vector box_project(const Vector& v, const Vector& upper) {
  require_same_size(v.size(), upper.size(), "box_project");
  return v.cwiseMin(upper);
}

Matrix spd_project(const Matrix& m) {
  require_same_size(m.rows(), m.cols(), "spd_project");
  require_finite(m, "spd_project");
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  const Vector clipped = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
}

AffineProjector::AffineProjector(Matrix d, Vector c)
    : d_(std::move(d)), c_(std::move(c)) {
  require_same_size(d_.rows(), c_.size(), "AffineProjector");
  require_finite(d_, "AffineProjector D");
  require_finite(c_, "AffineProjector c");
  if (d_.rows() > d_.cols()) {
    throw SingularError("AffineProjector: D has more rows than columns");
  }
  const Matrix gram = d_ * d_.transpose();
  gram_.compute(gram);
  // Reject numerically rank-deficient D: Cholesky can succeed on a gram
  // matrix whose smallest pivot is pure round-off.
  const Vector sv = svd(d_).singular_values;
  const double smax = sv.size() ? sv(0) : 0.0;
  const double smin = sv.size() ? sv(sv.size() - 1) : 0.0;
  if (gram_.info() != Eigen::Success || smax == 0.0 ||
      smin <= 1e-10 * smax) {
    throw SingularError("AffineProjector: D is rank deficient");
  }
}

Vector AffineProjector::operator()(const Vector& z) const {
  require_same_size(z.size(), d_.cols(), "AffineProjector::operator()");
  const Vector correction = gram_.solve(c_ - d_ * z);
  return z + d_.transpose() * correction;
}

double soft_threshold(double x, double kappa) {
  if (x > kappa) return x - kappa;
  if (x < -kappa) return x + kappa;
  return 0.0;
}

Vector soft_threshold(const Vector& x, double kappa) {
  return x.unaryExpr([kappa](double xi) { return soft_threshold(xi, kappa); });
}

double condition_number(const Matrix& m) {
  const Vector s = svd(m).singular_values;
  if (s.size() == 0) return std::numeric_limits<double>::infinity();
  const double smin = s(s.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

// ---------------------------------------------------------------------------
// SeededRng

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

std::uint64_t SeededRng::next_u64() { return engine_(); }

double SeededRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double SeededRng::normal() {
  if (spare_normal_) {
    const double z = *spare_normal_;
    spare_normal_.reset();
    return z;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

double SeededRng::normal(double mean, double stddev) {
  return mean + stddev * normal();
}

std::uint64_t SeededRng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("SeededRng::below: n must be positive");
  // Rejection sampling to avoid modulo bias.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return x % n;
}

Vector SeededRng::normal_vector(Eigen::Index n) {
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = normal();
  return out;
}

Matrix SeededRng::normal_matrix(Eigen::Index rows, Eigen::Index cols) {
  // Filled row by row so the stream order matches how the data reads.
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = normal();
  }
  return out;
}

Matrix SeededRng::orthogonal_matrix(Eigen::Index n) {
  const Matrix g = normal_matrix(n, n);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

}  // namespace aadmm
