#pragma once

// Application suite expressed as ADMM splittings. Every builder uses
// B = -I and b = 0; A is the identity except for the canonical QP (A = D).
//
// Sign convention: subproblems follow the engine's augmented term
// tau/2 || b - A u - B v + lambda/tau ||^2, so for A = I, B = -I the
// u-update targets v + lambda/tau and the v-update targets u - lambda/tau.

#include "aadmm/engine.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace aadmm {

// ---------------------------------------------------------------------------
// Specs

// min 1/2 ||D x - c||^2 + rho1 ||x||_1 + rho2/2 ||x||^2
struct ElasticNetSpec {
  Matrix D;
  Vector c;
  double rho1 = 1.0;
  double rho2 = 1.0;
  void validate() const;
};

// min 1/2 x^T Q x + q^T x  subject to  D x <= c
struct QPSpec {
  Matrix Q;
  Vector q;
  Matrix D;
  Vector c;
  void validate() const;
};

// min ||x||_1  subject to  D x = c
struct BasisPursuitSpec {
  Matrix D;
  Vector c;
  void validate() const;
};

// min sum_i sum_j log(1 + exp(-c_j D_j^T x_i)) + rho ||z||_1
//   subject to x_i = z, i = 1..N
struct ConsensusLogRegSpec {
  std::vector<Matrix> blocks;  // samples x features, one per node
  std::vector<Vector> labels;  // entries in {-1, +1}
  double rho = 1.0;
  double inner_tol = 1e-10;
  int inner_max_iters = 100;

  Eigen::Index features() const { return blocks.empty() ? 0 : blocks.front().cols(); }
  std::size_t block_count() const { return blocks.size(); }
  void validate() const;
};

// min 1/2 ||D X - C||_F^2 + rho1 ||X||_* + rho2/2 ||X||_F^2
struct LRLSSpec {
  Matrix D;  // n x m
  Matrix C;  // n x d
  double rho1 = 1.0;
  double rho2 = 1.0;
  void validate() const;
};

// ---------------------------------------------------------------------------
// Objectives of the original (unsplit) problems

double elastic_net_objective(const ElasticNetSpec& spec, const Vector& x);
double qp_objective(const QPSpec& spec, const Vector& x);
// Optimal fixed penalty for a strictly convex QP with linear constraints:
// 1 / sqrt(lmin * lmax) of D Q^-1 D^T. Rows with an infinite bound are
// ignored. Throws std::invalid_argument if Q is not positive definite or
// the remaining D is rank deficient.
double qp_optimal_penalty(const QPSpec& spec);
double basis_pursuit_objective(const Vector& x);
double logistic_loss(const Matrix& D, const Vector& labels, const Vector& x);
Vector logistic_gradient(const Matrix& D, const Vector& labels, const Vector& x);
double consensus_logreg_objective(const ConsensusLogRegSpec& spec, const Vector& z);
double nuclear_norm(const Matrix& x);
double lrls_objective(const LRLSSpec& spec, const Matrix& x);

// ---------------------------------------------------------------------------
// Proximal maps

// argmin_v rho1 ||v||_1 + rho2/2 ||v||^2 + tau/2 ||v - w||^2
//   = soft_threshold(w, rho1 / tau) * tau / (rho2 + tau)
Vector elastic_net_prox(const Vector& w, double rho1, double rho2, double tau);

// argmin_V rho1 ||V||_* + rho2/2 ||V||_F^2 + tau/2 ||V - W||_F^2:
// the elastic-net scalar map applied to the singular values of W.
Matrix singular_value_prox(const Matrix& w, double rho1, double rho2, double tau);

struct NewtonReport {
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
};

// argmin_x logistic_loss(D, labels, x) + tau/2 ||x - y||^2 by damped Newton,
// starting from `x` (updated in place).
NewtonReport logistic_prox(const Matrix& D, const Vector& labels, const Vector& y,
                           double tau, Vector& x, double tol, int max_iters);

// ---------------------------------------------------------------------------
// Builders. `scale` multiplies the measurement vector (c or C) first.

ProblemInstance build_elastic_net(const ElasticNetSpec& spec, double scale = 1.0);
ProblemInstance build_qp(const QPSpec& spec, double scale = 1.0);
ProblemInstance build_basis_pursuit(const BasisPursuitSpec& spec, double scale = 1.0);
ProblemInstance build_consensus_logreg(const ConsensusLogRegSpec& spec, double scale = 1.0);
ProblemInstance build_lrls(const LRLSSpec& spec, double scale = 1.0);

// Column-major vec / unvec for the matrix-variable problem.
Vector vec(const Matrix& x);
Matrix unvec(const Vector& x, Eigen::Index rows, Eigen::Index cols);

// ---------------------------------------------------------------------------
// Synthetic data

enum class ProblemKind { kElasticNet, kQP, kBasisPursuit, kConsensusLogReg, kLRLS };

const char* to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& name);

// Grouped-correlation regression data in the style of Zou & Hastie's
// grouping example: three groups of `group_size` near-identical features
// (a shared N(0,1) factor plus N(0, 0.01) noise) carry coefficient 3,
// the remaining features are independent N(0,1) with coefficient 0, and
// c = D beta + 15 * N(0,1). At 50 x 40 this is 3 groups of 5 plus 25
// noise features.
ElasticNetSpec generate_elastic_net(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

// Q = U diag(s) U^T with U Haar-orthogonal and s log-spaced in
// [1/condition, 1] (unit spectral norm); q, D Gaussian; c uniform in
// [0.1, 1.1] so x = 0 is
// strictly feasible while many constraints bind at the optimum.
QPSpec generate_qp(Eigen::Index constraints, Eigen::Index unknowns, std::uint64_t seed,
                   double condition = 4.5e5);

// Gaussian D (m x n), c = D x0 for an x0 with `sparsity` N(0,1) nonzeros.
BasisPursuitSpec generate_basis_pursuit(Eigen::Index m, Eigen::Index n, std::uint64_t seed,
                                        Eigen::Index sparsity = 3);

// Gaussian samples, labels sign(D x0 + 0.1 N(0,1)) for a sparse x0, split
// into `blocks` equal contiguous blocks.
ConsensusLogRegSpec generate_consensus_logreg(Eigen::Index samples, Eigen::Index features,
                                              std::uint64_t seed, std::size_t blocks = 2,
                                              Eigen::Index sparsity = 5, double rho = 1.0);

// D Gaussian (n x m), W = L R^T of the given rank, C = D W + noise.
LRLSSpec generate_lrls(Eigen::Index n, Eigen::Index m, Eigen::Index d, std::uint64_t seed,
                       Eigen::Index rank = 3, double noise = 0.1);

// Serializable description of a generated instance.
struct SyntheticRequest {
  ProblemKind kind = ProblemKind::kElasticNet;
  Eigen::Index rows = 50;  // samples / constraints
  Eigen::Index cols = 40;  // features / unknowns
  Eigen::Index extra = 0;  // LRLS: d; BP: sparsity; logreg: sparsity (0 = default)
  std::size_t blocks = 2;  // logreg only
  double condition = 4.5e5;  // QP only
  double rho1 = 1.0;  // EN/LRLS rho1, logreg rho
  double rho2 = 1.0;
  std::uint64_t seed = 42;

  static SyntheticRequest defaults(ProblemKind kind);
};

nlohmann::json to_json(const SyntheticRequest& request);
SyntheticRequest synthetic_request_from_json(const nlohmann::json& j);

// Builds the instance described by the request at the given scale.
ProblemInstance build_synthetic(const SyntheticRequest& request, double scale = 1.0);

// ---------------------------------------------------------------------------
// LIBSVM text format: "label idx:val idx:val ...", 1-based indices.

enum class FeatureScaling { kNone, kStandardize, kUnitRange };

struct LibsvmData {
  Matrix features;
  Vector labels;
};

struct LibsvmOptions {
  FeatureScaling scaling = FeatureScaling::kNone;
  std::size_t max_entries = 10'000'000;
  // Minimum column count; wider files widen the matrix.
  Eigen::Index min_features = 0;
};

LibsvmData parse_libsvm(std::istream& in, const LibsvmOptions& options = {});
LibsvmData read_libsvm(const std::filesystem::path& path, const LibsvmOptions& options = {});
void write_libsvm(std::ostream& out, const LibsvmData& data);

void scale_features(Matrix& x, FeatureScaling scaling);

}  // namespace aadmm
