#pragma once

// Dense linear-algebra substrate shared by every solver component.
//
// Matrices and vectors are Eigen's dynamic double types, column-major.
// Nothing here admits NaN/Inf into solver state: entry points that take
// user data call require_finite() and throw NonFiniteError.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

namespace aadmm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NonFiniteError : std::domain_error {
  using std::domain_error::domain_error;
};

struct SingularError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_finite(const Matrix& m, const char* what);
void require_finite(const Vector& v, const char* what);
void require_same_size(Eigen::Index a, Eigen::Index b, const char* what);

// Solves (M + tau * N) x = rhs for a fixed pair (M, N), keeping the
// factorization until tau changes. N defaults to the identity.
//
// Factorization order: Cholesky (LLT); if that fails, a pivoted LDLT;
// if that reports a non-invertible system, column-pivoted QR with a rank
// check. A rank-deficient shifted system throws SingularError.
class ShiftedSolver {
 public:
  ShiftedSolver() = default;
  explicit ShiftedSolver(Matrix base);
  ShiftedSolver(Matrix base, Matrix shift);

  Vector solve(double tau, const Vector& rhs);
  Matrix solve(double tau, const Matrix& rhs);

  Eigen::Index dim() const { return base_.rows(); }
  std::optional<double> cached_tau() const { return tau_; }
  // Number of factorizations performed so far.
  int factorizations() const { return factorizations_; }

  enum class Method { kNone, kCholesky, kLdlt, kQr };
  Method method() const { return method_; }

  // Identity key of the matrix this solver was built from (its storage
  // address at construction time).
  const double* key() const { return key_; }
  void set_key(const double* key) { key_ = key; }

 private:
  void refactor(double tau);

  const double* key_ = nullptr;
  Matrix base_;
  std::optional<Matrix> shift_;
  std::optional<double> tau_;
  Method method_ = Method::kNone;
  Eigen::LLT<Matrix> llt_;
  Eigen::LDLT<Matrix> ldlt_;
  Eigen::ColPivHouseholderQR<Matrix> qr_;
  int factorizations_ = 0;
};

// One-shot form of ShiftedSolver with N = I. The cache is refreshed if it
// is empty, was built for a different dimension, or for another tau.
Vector solve_shifted(const Matrix& m, double tau, const Vector& rhs,
                     ShiftedSolver& cache);

struct Svd {
  Matrix u;
  Vector singular_values;  // non-negative, descending
  Matrix v;
};

// Thin SVD, m = u * diag(s) * v^T.
Svd svd(const Matrix& m);

// Componentwise min(v, upper).
Vector box_project(const Vector& v, const Vector& upper);

// Nearest symmetric PSD matrix in Frobenius norm (clip negative eigenvalues
// of the symmetric part).
Matrix spd_project(const Matrix& m);

// Euclidean projection onto {z : D z = c}. Factorizes D D^T once.
class AffineProjector {
 public:
  AffineProjector(Matrix d, Vector c);

  Vector operator()(const Vector& z) const;
  const Matrix& matrix() const { return d_; }
  const Vector& rhs() const { return c_; }

 private:
  Matrix d_;
  Vector c_;
  Eigen::LLT<Matrix> gram_;
};

inline Vector affine_project(const Matrix& d, const Vector& c,
                             const Vector& z) {
  return AffineProjector(d, c)(z);
}

// sign(x) * max(|x| - kappa, 0), componentwise.
Vector soft_threshold(const Vector& x, double kappa);
double soft_threshold(double x, double kappa);

// 2-norm condition number via SVD; +inf for singular input.
double condition_number(const Matrix& m);

// Deterministic random source: std::mt19937_64 for the raw stream, uniform
// doubles from the top 53 bits, normals by Box-Muller. None of the standard
// library distributions are used so streams are identical across toolchains.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  double normal();
  double normal(double mean, double stddev);
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  Vector normal_vector(Eigen::Index n);
  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols);
  // Haar-distributed orthogonal matrix (QR of a Gaussian matrix with sign fix).
  Matrix orthogonal_matrix(Eigen::Index n);

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

}  // namespace aadmm
