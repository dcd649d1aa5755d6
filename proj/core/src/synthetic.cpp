#include "aadmm/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace aadmm {

const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::kElasticNet: return "elastic_net";
    case ProblemKind::kQP: return "qp";
    case ProblemKind::kBasisPursuit: return "basis_pursuit";
    case ProblemKind::kConsensusLogReg: return "consensus_logreg";
    case ProblemKind::kLRLS: return "lrls";
  }
  return "unknown";
}

ProblemKind problem_kind_from_string(const std::string& name) {
  if (name == "elastic_net" || name == "en") return ProblemKind::kElasticNet;
  if (name == "qp") return ProblemKind::kQP;
  if (name == "basis_pursuit" || name == "bp") return ProblemKind::kBasisPursuit;
  if (name == "consensus_logreg" || name == "logreg") return ProblemKind::kConsensusLogReg;
  if (name == "lrls" || name == "low_rank_least_squares") return ProblemKind::kLRLS;
  throw std::invalid_argument("unknown problem kind: " + name);
}

ElasticNetSpec generate_elastic_net(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("generate_elastic_net: empty dims");
  SeededRng rng(seed);
  const Eigen::Index group_size = std::max<Eigen::Index>(1, cols / 8);
  const Eigen::Index grouped = std::min<Eigen::Index>(cols, 3 * group_size);

  Vector beta = Vector::Zero(cols);
  beta.head(grouped).setConstant(3.0);

  ElasticNetSpec spec;
  spec.D.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double factors[3] = {rng.normal(), rng.normal(), rng.normal()};
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (j < grouped) {
        spec.D(i, j) = factors[j / group_size] + 0.1 * rng.normal();
      } else {
        spec.D(i, j) = rng.normal();
      }
    }
  }
  spec.c = spec.D * beta;
  for (Eigen::Index i = 0; i < rows; ++i) spec.c(i) += 15.0 * rng.normal();
  return spec;
}

QPSpec generate_qp(Eigen::Index constraints, Eigen::Index unknowns, std::uint64_t seed,
                   double condition) {
  if (constraints < 1 || unknowns < 1) throw std::invalid_argument("generate_qp: empty dims");
  if (!(condition >= 1.0)) throw std::invalid_argument("generate_qp: condition must be >= 1");
  SeededRng rng(seed);
  const Matrix u = rng.orthogonal_matrix(unknowns);
  Vector spectrum(unknowns);
  for (Eigen::Index i = 0; i < unknowns; ++i) {
    const double t = unknowns > 1 ? static_cast<double>(i) / static_cast<double>(unknowns - 1) : 0.0;
    spectrum(i) = std::pow(condition, t - 1.0);
  }
  QPSpec spec;
  spec.Q = u * spectrum.asDiagonal() * u.transpose();
  spec.Q = 0.5 * (spec.Q + spec.Q.transpose());
  spec.q = rng.normal_vector(unknowns);
  spec.D = rng.normal_matrix(constraints, unknowns);
  spec.c.resize(constraints);
  for (Eigen::Index i = 0; i < constraints; ++i) spec.c(i) = rng.uniform(0.1, 1.1);
  return spec;
}

BasisPursuitSpec generate_basis_pursuit(Eigen::Index m, Eigen::Index n, std::uint64_t seed,
                                        Eigen::Index sparsity) {
  if (m < 1 || n <= m) throw std::invalid_argument("generate_basis_pursuit: need 0 < m < n");
  sparsity = std::clamp<Eigen::Index>(sparsity, 1, n);
  SeededRng rng(seed);
  BasisPursuitSpec spec;
  spec.D = rng.normal_matrix(m, n);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates for the support.
  Vector x0 = Vector::Zero(n);
  for (Eigen::Index s = 0; s < sparsity; ++s) {
    const auto j = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n - s))) + s;
    std::swap(idx[static_cast<std::size_t>(s)], idx[static_cast<std::size_t>(j)]);
    x0(idx[static_cast<std::size_t>(s)]) = rng.normal();
  }
  spec.c = spec.D * x0;
  return spec;
}

ConsensusLogRegSpec generate_consensus_logreg(Eigen::Index samples, Eigen::Index features,
                                              std::uint64_t seed, std::size_t blocks,
                                              Eigen::Index sparsity, double rho) {
  if (samples < 1 || features < 1 || blocks < 1) {
    throw std::invalid_argument("generate_consensus_logreg: empty dims");
  }
  if (static_cast<std::size_t>(samples) < blocks) {
    throw std::invalid_argument("generate_consensus_logreg: fewer samples than blocks");
  }
  sparsity = std::clamp<Eigen::Index>(sparsity, 1, features);
  SeededRng rng(seed);
  Vector truth = Vector::Zero(features);
  for (Eigen::Index j = 0; j < sparsity; ++j) truth(j) = rng.normal();
  const Matrix data = rng.normal_matrix(samples, features);
  Vector labels(samples);
  for (Eigen::Index i = 0; i < samples; ++i) {
    labels(i) = (data.row(i).dot(truth) + 0.1 * rng.normal()) >= 0.0 ? 1.0 : -1.0;
  }

  ConsensusLogRegSpec spec;
  spec.rho = rho;
  const auto nb = static_cast<Eigen::Index>(blocks);
  Eigen::Index start = 0;
  for (Eigen::Index b = 0; b < nb; ++b) {
    const Eigen::Index len = samples / nb + (b < samples % nb ? 1 : 0);
    spec.blocks.push_back(data.middleRows(start, len));
    spec.labels.push_back(labels.segment(start, len));
    start += len;
  }
  return spec;
}

LRLSSpec generate_lrls(Eigen::Index n, Eigen::Index m, Eigen::Index d, std::uint64_t seed,
                       Eigen::Index rank, double noise) {
  if (n < 1 || m < 1 || d < 1) throw std::invalid_argument("generate_lrls: empty dims");
  rank = std::clamp<Eigen::Index>(rank, 1, std::min(m, d));
  SeededRng rng(seed);
  LRLSSpec spec;
  spec.D = rng.normal_matrix(n, m);
  const Matrix left = rng.normal_matrix(m, rank);
  const Matrix right = rng.normal_matrix(d, rank);
  const Matrix w = left * right.transpose();
  spec.C = spec.D * w + noise * rng.normal_matrix(n, d);
  return spec;
}

SyntheticRequest SyntheticRequest::defaults(ProblemKind kind) {
  SyntheticRequest r;
  r.kind = kind;
  switch (kind) {
    case ProblemKind::kElasticNet: r.rows = 50; r.cols = 40; break;
    case ProblemKind::kQP: r.rows = 25; r.cols = 50; break;
    case ProblemKind::kBasisPursuit: r.rows = 10; r.cols = 30; r.extra = 3; break;
    case ProblemKind::kConsensusLogReg: r.rows = 200; r.cols = 25; r.extra = 5; break;
    case ProblemKind::kLRLS: r.rows = 100; r.cols = 20; r.extra = 10; break;
  }
  return r;
}

nlohmann::json to_json(const SyntheticRequest& r) {
  return {{"kind", to_string(r.kind)}, {"rows", r.rows},         {"cols", r.cols},
          {"extra", r.extra},          {"blocks", r.blocks},     {"condition", r.condition},
          {"rho1", r.rho1},            {"rho2", r.rho2},         {"seed", r.seed}};
}

SyntheticRequest synthetic_request_from_json(const nlohmann::json& j) {
  SyntheticRequest r = SyntheticRequest::defaults(problem_kind_from_string(j.at("kind").get<std::string>()));
  r.rows = j.value("rows", r.rows);
  r.cols = j.value("cols", r.cols);
  r.extra = j.value("extra", r.extra);
  r.blocks = j.value("blocks", r.blocks);
  r.condition = j.value("condition", r.condition);
  r.rho1 = j.value("rho1", r.rho1);
  r.rho2 = j.value("rho2", r.rho2);
  r.seed = j.value("seed", r.seed);
  return r;
}

ProblemInstance build_synthetic(const SyntheticRequest& r, double scale) {
  switch (r.kind) {
    case ProblemKind::kElasticNet: {
      ElasticNetSpec spec = generate_elastic_net(r.rows, r.cols, r.seed);
      spec.rho1 = r.rho1;
      spec.rho2 = r.rho2;
      return build_elastic_net(spec, scale);
    }
    case ProblemKind::kQP:
      return build_qp(generate_qp(r.rows, r.cols, r.seed, r.condition), scale);
    case ProblemKind::kBasisPursuit:
      return build_basis_pursuit(
          generate_basis_pursuit(r.rows, r.cols, r.seed, r.extra > 0 ? r.extra : 3), scale);
    case ProblemKind::kConsensusLogReg:
      return build_consensus_logreg(
          generate_consensus_logreg(r.rows, r.cols, r.seed, r.blocks, r.extra > 0 ? r.extra : 5,
                                    r.rho1),
          scale);
    case ProblemKind::kLRLS: {
      LRLSSpec spec = generate_lrls(r.rows, r.cols, r.extra > 0 ? r.extra : 10, r.seed);
      spec.rho1 = r.rho1;
      spec.rho2 = r.rho2;
      return build_lrls(spec, scale);
    }
  }
  throw std::invalid_argument("build_synthetic: unknown kind");
}

}  // namespace aadmm
