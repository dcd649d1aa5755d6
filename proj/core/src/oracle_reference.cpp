#include "aadmm/oracle.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace aadmm::oracle {

namespace {

// Accelerated proximal gradient with backtracking on the Lipschitz
// constant and gradient-based adaptive restart.
//   smooth(x) -> value, smooth_grad(x) -> gradient,
//   prox(x, step) -> argmin_z step * g(z) + 1/2 ||z - x||^2.
template <class Smooth, class SmoothGrad, class Prox, class Nonsmooth>
ReferenceSolution accelerated_prox_grad(Vector x, Smooth smooth, SmoothGrad smooth_grad,
                                        Prox prox, Nonsmooth nonsmooth,
                                        const ProxGradOptions& opts, const char* name) {
  double lipschitz = 1.0;
  Vector y = x;
  Vector x_prev = x;
  double t = 1.0;
  for (long it = 0; it < opts.max_iters; ++it) {
    const double fy = smooth(y);
    const Vector gy = smooth_grad(y);
    Vector x_new;
    while (true) {
      x_new = prox(Vector(y - gy / lipschitz), 1.0 / lipschitz);
      const Vector diff = x_new - y;
      const double model = fy + gy.dot(diff) + 0.5 * lipschitz * diff.squaredNorm();
      if (smooth(x_new) <= model + 1e-12 * std::abs(fy)) break;
      lipschitz *= 2.0;
      if (!std::isfinite(lipschitz)) throw OracleError(std::string(name) + ": step search diverged");
    }
    const double mapping = lipschitz * (y - x_new).norm();
    if (mapping <= opts.tol * std::max(1.0, gy.norm())) {
      ReferenceSolution sol;
      sol.objective = smooth(x_new) + nonsmooth(x_new);
      sol.x = std::move(x_new);
      sol.iterations = it + 1;
      return sol;
    }
    // Restart momentum when it points against the last step.
    if ((y - x_new).dot(x_new - x_prev) > 0.0) {
      t = 1.0;
      y = x_new;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = x_new + ((t - 1.0) / t_next) * (x_new - x_prev);
      t = t_next;
    }
    x_prev = std::move(x_new);
  }
  std::ostringstream os;
  os << name << ": proximal gradient did not converge in " << opts.max_iters << " iterations";
  throw OracleError(os.str());
}

Vector shrink(const Vector& x, double kappa) {
  return x.unaryExpr([kappa](double v) {
    return v > kappa ? v - kappa : (v < -kappa ? v + kappa : 0.0);
  });
}

}  // namespace

ReferenceSolution reference_elastic_net(const ElasticNetSpec& spec, const ProxGradOptions& opts) {
  spec.validate();
  const Matrix& D = spec.D;
  const Vector& c = spec.c;
  const double rho2 = spec.rho2;
  auto smooth = [&](const Vector& x) {
    return 0.5 * (D * x - c).squaredNorm() + 0.5 * rho2 * x.squaredNorm();
  };
  auto grad = [&](const Vector& x) { return Vector(D.transpose() * (D * x - c) + rho2 * x); };
  auto prox = [&](const Vector& x, double step) { return shrink(x, spec.rho1 * step); };
  auto g = [&](const Vector& x) { return spec.rho1 * x.lpNorm<1>(); };
  return accelerated_prox_grad(Vector::Zero(D.cols()), smooth, grad, prox, g, opts,
                               "reference_elastic_net");
}

ReferenceSolution reference_lrls(const LRLSSpec& spec, const ProxGradOptions& opts) {
  spec.validate();
  const Eigen::Index rows = spec.D.cols();
  const Eigen::Index cols = spec.C.cols();
  auto as_matrix = [&](const Vector& x) { return Eigen::Map<const Matrix>(x.data(), rows, cols); };
  auto smooth = [&](const Vector& x) {
    return 0.5 * (spec.D * as_matrix(x) - spec.C).squaredNorm() + 0.5 * spec.rho2 * x.squaredNorm();
  };
  auto grad = [&](const Vector& x) {
    const Matrix g = spec.D.transpose() * (spec.D * as_matrix(x) - spec.C) + spec.rho2 * as_matrix(x);
    return Vector(Eigen::Map<const Vector>(g.data(), g.size()));
  };
  auto prox = [&](const Vector& x, double step) {
    Eigen::JacobiSVD<Matrix> dec(as_matrix(x), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector s = (dec.singularValues().array() - spec.rho1 * step).cwiseMax(0.0);
    const Matrix out = dec.matrixU() * s.asDiagonal() * dec.matrixV().transpose();
    return Vector(Eigen::Map<const Vector>(out.data(), out.size()));
  };
  auto g = [&](const Vector& x) {
    Eigen::JacobiSVD<Matrix> dec(as_matrix(x));
    return spec.rho1 * dec.singularValues().sum();
  };
  return accelerated_prox_grad(Vector::Zero(rows * cols), smooth, grad, prox, g, opts,
                               "reference_lrls");
}

ReferenceSolution reference_logreg(const ConsensusLogRegSpec& spec, const ProxGradOptions& opts) {
  spec.validate();
  // Stack the blocks: the consensus problem is plain l1-logistic regression.
  Eigen::Index total = 0;
  for (const auto& b : spec.blocks) total += b.rows();
  Matrix D(total, spec.features());
  Vector labels(total);
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
    D.middleRows(row, spec.blocks[i].rows()) = spec.blocks[i];
    labels.segment(row, spec.blocks[i].rows()) = spec.labels[i];
    row += spec.blocks[i].rows();
  }
  auto smooth = [&](const Vector& x) {
    const Vector m = labels.cwiseProduct(D * x);
    double total_loss = 0.0;
    for (Eigen::Index j = 0; j < m.size(); ++j) {
      total_loss += m(j) > 0 ? std::log1p(std::exp(-m(j))) : -m(j) + std::log1p(std::exp(m(j)));
    }
    return total_loss;
  };
  auto grad = [&](const Vector& x) {
    const Vector m = labels.cwiseProduct(D * x);
    Vector w(m.size());
    for (Eigen::Index j = 0; j < m.size(); ++j) {
      // -c_j / (1 + exp(m_j))
      w(j) = -labels(j) * (m(j) >= 0 ? std::exp(-m(j)) / (1.0 + std::exp(-m(j)))
                                     : 1.0 / (1.0 + std::exp(m(j))));
    }
    return Vector(D.transpose() * w);
  };
  auto prox = [&](const Vector& x, double step) { return shrink(x, spec.rho * step); };
  auto g = [&](const Vector& x) { return spec.rho * x.lpNorm<1>(); };
  return accelerated_prox_grad(Vector::Zero(spec.features()), smooth, grad, prox, g, opts,
                               "reference_logreg");
}

// ---------------------------------------------------------------------------
// Interior point

QpSolution solve_qp_interior_point(const QpProblem& P, int max_iters, double tol) {
  const Eigen::Index n = P.Q.rows();
  const Eigen::Index me = P.E.rows();
  const Eigen::Index mi = P.G.rows();
  require_same_size(P.q.size(), n, "ipm q");
  if (me > 0) require_same_size(P.E.cols(), n, "ipm E");
  if (mi > 0) require_same_size(P.G.cols(), n, "ipm G");
  require_same_size(P.e.size(), me, "ipm e");
  require_same_size(P.h.size(), mi, "ipm h");

  Vector x = Vector::Zero(n);
  Vector y = Vector::Zero(me);
  Vector s = mi > 0 ? Vector((P.h - P.G * x).cwiseMax(1.0)) : Vector(0);
  Vector z = Vector::Ones(mi);

  const double q_scale = 1.0 + (n ? P.q.cwiseAbs().maxCoeff() : 0.0);
  const double e_scale = 1.0 + (me ? P.e.cwiseAbs().maxCoeff() : 0.0);
  const double h_scale = 1.0 + (mi ? P.h.cwiseAbs().maxCoeff() : 0.0);

  auto max_step = [](const Vector& v, const Vector& dv) {
    double a = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (dv(i) < 0.0) a = std::min(a, -v(i) / dv(i));
    }
    return a;
  };

  for (int it = 0; it < max_iters; ++it) {
    Vector rd = P.Q * x + P.q;
    if (me) rd += P.E.transpose() * y;
    if (mi) rd += P.G.transpose() * z;
    const Vector re = me ? Vector(P.E * x - P.e) : Vector(0);
    const Vector ri = mi ? Vector(P.G * x + s - P.h) : Vector(0);
    const double mu = mi ? s.dot(z) / static_cast<double>(mi) : 0.0;
    const double obj = 0.5 * x.dot(P.Q * x) + P.q.dot(x);

    const bool done = rd.lpNorm<Eigen::Infinity>() <= tol * q_scale &&
                      (me == 0 || re.lpNorm<Eigen::Infinity>() <= tol * e_scale) &&
                      (mi == 0 || ri.lpNorm<Eigen::Infinity>() <= tol * h_scale) &&
                      mu * static_cast<double>(mi) <= tol * std::max(1.0, std::abs(obj));
    if (done) return {x, y, z, obj, it};

    const Vector w = mi ? Vector(z.cwiseQuotient(s)) : Vector(0);
    Matrix K = Matrix::Zero(n + me, n + me);
    K.topLeftCorner(n, n) = P.Q;
    if (mi) K.topLeftCorner(n, n) += P.G.transpose() * w.asDiagonal() * P.G;
    if (me) {
      K.topRightCorner(n, me) = P.E.transpose();
      K.bottomLeftCorner(me, n) = P.E;
    }
    const Eigen::PartialPivLU<Matrix> lu(K);

    struct Direction { Vector dx, dy, dz, ds; };
    auto solve = [&](const Vector& rc) {
      Vector rhs(n + me);
      rhs.head(n) = -rd;
      if (mi) rhs.head(n) -= P.G.transpose() * (w.cwiseProduct(ri) - rc.cwiseQuotient(s));
      if (me) rhs.tail(me) = -re;
      const Vector sol = lu.solve(rhs);
      Direction d;
      d.dx = sol.head(n);
      d.dy = sol.tail(me);
      if (mi) {
        d.dz = w.cwiseProduct(P.G * d.dx + ri) - rc.cwiseQuotient(s);
        d.ds = -(rc + s.cwiseProduct(d.dz)).cwiseQuotient(z);
      } else {
        d.dz = Vector(0);
        d.ds = Vector(0);
      }
      return d;
    };

    Direction d;
    if (mi) {
      const Direction aff = solve(s.cwiseProduct(z));
      const double a_aff = std::min(max_step(s, aff.ds), max_step(z, aff.dz));
      const double mu_aff =
          (s + a_aff * aff.ds).dot(z + a_aff * aff.dz) / static_cast<double>(mi);
      const double sigma = std::pow(mu_aff / mu, 3.0);
      const Vector rc = s.cwiseProduct(z) + aff.ds.cwiseProduct(aff.dz) -
                        Vector::Constant(mi, sigma * mu);
      d = solve(rc);
    } else {
      d = solve(Vector(0));
    }
    const double a = mi ? std::min(1.0, 0.99 * std::min(max_step(s, d.ds), max_step(z, d.dz)))
                        : 1.0;
    x += a * d.dx;
    if (me) y += a * d.dy;
    if (mi) {
      s += a * d.ds;
      z += a * d.dz;
    }
    if (!x.allFinite()) throw OracleError("interior point: non-finite iterate");
  }
  throw OracleError("interior point: no convergence within iteration cap");
}

ReferenceSolution reference_qp(const QPSpec& spec) {
  spec.validate();
  std::vector<Eigen::Index> finite_rows;
  for (Eigen::Index i = 0; i < spec.c.size(); ++i) {
    if (std::isfinite(spec.c(i))) finite_rows.push_back(i);
  }
  QpProblem p;
  p.Q = spec.Q;
  p.q = spec.q;
  p.E = Matrix(0, spec.Q.rows());
  p.e = Vector(0);
  p.G.resize(static_cast<Eigen::Index>(finite_rows.size()), spec.Q.rows());
  p.h.resize(static_cast<Eigen::Index>(finite_rows.size()));
  for (std::size_t k = 0; k < finite_rows.size(); ++k) {
    p.G.row(static_cast<Eigen::Index>(k)) = spec.D.row(finite_rows[k]);
    p.h(static_cast<Eigen::Index>(k)) = spec.c(finite_rows[k]);
  }
  const QpSolution sol = solve_qp_interior_point(p);
  return {sol.x, qp_objective(spec, sol.x), sol.iterations};
}

ReferenceSolution reference_basis_pursuit(const BasisPursuitSpec& spec) {
  spec.validate();
  const Eigen::Index n = spec.D.cols();
  QpProblem p;
  p.Q = Matrix::Zero(2 * n, 2 * n);
  p.q = Vector::Ones(2 * n);
  p.E.resize(spec.D.rows(), 2 * n);
  p.E << spec.D, -spec.D;
  p.e = spec.c;
  p.G = -Matrix::Identity(2 * n, 2 * n);
  p.h = Vector::Zero(2 * n);
  const QpSolution sol = solve_qp_interior_point(p);
  const Vector x = sol.x.head(n) - sol.x.tail(n);
  return {x, x.lpNorm<1>(), sol.iterations};
}

ReferenceSolution reference_solve(const AnySpec& spec) {
  return std::visit(
      [](const auto& s) -> ReferenceSolution {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ElasticNetSpec>) return reference_elastic_net(s);
        else if constexpr (std::is_same_v<T, QPSpec>) return reference_qp(s);
        else if constexpr (std::is_same_v<T, BasisPursuitSpec>) return reference_basis_pursuit(s);
        else if constexpr (std::is_same_v<T, ConsensusLogRegSpec>) return reference_logreg(s);
        else return reference_lrls(s);
      },
      spec);
}

AnySpec synthetic_spec(const SyntheticRequest& r, double scale) {
  switch (r.kind) {
    case ProblemKind::kElasticNet: {
      ElasticNetSpec s = generate_elastic_net(r.rows, r.cols, r.seed);
      s.rho1 = r.rho1;
      s.rho2 = r.rho2;
      s.c *= scale;
      return s;
    }
    case ProblemKind::kQP: {
      QPSpec s = generate_qp(r.rows, r.cols, r.seed, r.condition);
      s.c *= scale;
      return s;
    }
    case ProblemKind::kBasisPursuit: {
      BasisPursuitSpec s = generate_basis_pursuit(r.rows, r.cols, r.seed, r.extra > 0 ? r.extra : 3);
      s.c *= scale;
      return s;
    }
    case ProblemKind::kConsensusLogReg: {
      ConsensusLogRegSpec s = generate_consensus_logreg(r.rows, r.cols, r.seed, r.blocks,
                                                        r.extra > 0 ? r.extra : 5, r.rho1);
      for (Matrix& b : s.blocks) b *= scale;
      return s;
    }
    case ProblemKind::kLRLS: {
      LRLSSpec s = generate_lrls(r.rows, r.cols, r.extra > 0 ? r.extra : 10, r.seed);
      s.rho1 = r.rho1;
      s.rho2 = r.rho2;
      s.C *= scale;
      return s;
    }
  }
  throw std::invalid_argument("synthetic_spec: unknown kind");
}

}  // namespace aadmm::oracle
