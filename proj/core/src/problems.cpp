#include "aadmm/problems.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace aadmm {

namespace {

void require_non_negative(double x, const char* what) {
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw std::invalid_argument(std::string(what) + " must be finite and non-negative");
  }
}

void require_scale(double s) {
  if (!std::isfinite(s) || s == 0.0) {
    throw std::invalid_argument("problem scale must be finite and non-zero");
  }
}

// log(1 + exp(-t)) without overflow.
double log1p_exp_neg(double t) {
  return t > 0.0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
}

// 1 / (1 + exp(t))
double sigmoid_neg(double t) {
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

}  // namespace

// ---------------------------------------------------------------------------
// Validation

void ElasticNetSpec::validate() const {
  require_same_size(D.rows(), c.size(), "ElasticNetSpec D/c");
  require_finite(D, "ElasticNetSpec D");
  require_finite(c, "ElasticNetSpec c");
  require_non_negative(rho1, "ElasticNetSpec rho1");
  require_non_negative(rho2, "ElasticNetSpec rho2");
}

void QPSpec::validate() const {
  require_same_size(Q.rows(), Q.cols(), "QPSpec Q");
  require_same_size(Q.rows(), q.size(), "QPSpec q");
  require_same_size(D.cols(), Q.rows(), "QPSpec D columns");
  require_same_size(D.rows(), c.size(), "QPSpec c");
  require_finite(Q, "QPSpec Q");
  require_finite(q, "QPSpec q");
  require_finite(D, "QPSpec D");
  // +inf bounds are allowed (inactive constraints); NaN and -inf are not.
  if (c.array().isNaN().any()) throw NonFiniteError("QPSpec c: NaN entry");
  if ((c.array() == -std::numeric_limits<double>::infinity()).any()) {
    throw std::invalid_argument("QPSpec c: -inf bound makes the problem infeasible");
  }
  const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("QPSpec Q is not symmetric");
  }
  if (Q.rows() > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(Q, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10 * scale) {
      throw std::invalid_argument("QPSpec Q is not positive semidefinite");
    }
  }
}

void BasisPursuitSpec::validate() const {
  require_same_size(D.rows(), c.size(), "BasisPursuitSpec D/c");
  require_finite(D, "BasisPursuitSpec D");
  require_finite(c, "BasisPursuitSpec c");
  if (D.rows() >= D.cols()) {
    throw std::invalid_argument("BasisPursuitSpec: need fewer rows than columns");
  }
}

void ConsensusLogRegSpec::validate() const {
  if (blocks.empty() || blocks.size() != labels.size()) {
    throw std::invalid_argument("ConsensusLogRegSpec: need one label vector per block");
  }
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    require_same_size(blocks[i].cols(), features(), "ConsensusLogRegSpec block features");
    require_same_size(blocks[i].rows(), labels[i].size(), "ConsensusLogRegSpec labels");
    require_finite(blocks[i], "ConsensusLogRegSpec block");
    for (Eigen::Index j = 0; j < labels[i].size(); ++j) {
      if (labels[i](j) != 1.0 && labels[i](j) != -1.0) {
        throw std::invalid_argument("ConsensusLogRegSpec: labels must be -1 or +1");
      }
    }
  }
  require_non_negative(rho, "ConsensusLogRegSpec rho");
  if (!(inner_tol > 0.0) || inner_max_iters < 1) {
    throw std::invalid_argument("ConsensusLogRegSpec: bad inner solver settings");
  }
}

void LRLSSpec::validate() const {
  require_same_size(D.rows(), C.rows(), "LRLSSpec D/C rows");
  require_finite(D, "LRLSSpec D");
  require_finite(C, "LRLSSpec C");
  require_non_negative(rho1, "LRLSSpec rho1");
  require_non_negative(rho2, "LRLSSpec rho2");
}

// ---------------------------------------------------------------------------
// Objectives

double elastic_net_objective(const ElasticNetSpec& spec, const Vector& x) {
  return 0.5 * (spec.D * x - spec.c).squaredNorm() + spec.rho1 * x.lpNorm<1>() +
         0.5 * spec.rho2 * x.squaredNorm();
}

double qp_objective(const QPSpec& spec, const Vector& x) {
  return 0.5 * x.dot(spec.Q * x) + spec.q.dot(x);
}

double qp_optimal_penalty(const QPSpec& spec) {
  spec.validate();
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < spec.c.size(); ++i) {
    if (std::isfinite(spec.c(i))) rows.push_back(i);
  }
  if (rows.empty()) throw std::invalid_argument("qp_optimal_penalty: no finite constraints");
  const Matrix D = spec.D(rows, Eigen::all);
  const Eigen::LLT<Matrix> llt(spec.Q);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("qp_optimal_penalty: Q is not positive definite");
  }
  const Matrix M = D * llt.solve(D.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  if (!(lmin > 1e-14 * lmax)) {
    throw std::invalid_argument("qp_optimal_penalty: constraint matrix is rank deficient");
  }
  return 1.0 / std::sqrt(lmin * lmax);
}

double basis_pursuit_objective(const Vector& x) { return x.lpNorm<1>(); }

double logistic_loss(const Matrix& D, const Vector& labels, const Vector& x) {
  const Vector margins = labels.cwiseProduct(D * x);
  double total = 0.0;
  for (Eigen::Index j = 0; j < margins.size(); ++j) total += log1p_exp_neg(margins(j));
  return total;
}

Vector logistic_gradient(const Matrix& D, const Vector& labels, const Vector& x) {
  const Vector margins = labels.cwiseProduct(D * x);
  Vector weights(margins.size());
  for (Eigen::Index j = 0; j < margins.size(); ++j) {
    weights(j) = -labels(j) * sigmoid_neg(margins(j));
  }
  return D.transpose() * weights;
}

double consensus_logreg_objective(const ConsensusLogRegSpec& spec, const Vector& z) {
  double total = spec.rho * z.lpNorm<1>();
  for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
    total += logistic_loss(spec.blocks[i], spec.labels[i], z);
  }
  return total;
}

double nuclear_norm(const Matrix& x) { return svd(x).singular_values.sum(); }

double lrls_objective(const LRLSSpec& spec, const Matrix& x) {
  return 0.5 * (spec.D * x - spec.C).squaredNorm() + spec.rho1 * nuclear_norm(x) +
         0.5 * spec.rho2 * x.squaredNorm();
}

// ---------------------------------------------------------------------------
// Proximal maps

Vector elastic_net_prox(const Vector& w, double rho1, double rho2, double tau) {
  return soft_threshold(w, rho1 / tau) * (tau / (rho2 + tau));
}

Matrix singular_value_prox(const Matrix& w, double rho1, double rho2, double tau) {
  const Svd dec = svd(w);
  const Vector shrunk = elastic_net_prox(dec.singular_values, rho1, rho2, tau);
  return dec.u * shrunk.asDiagonal() * dec.v.transpose();
}

NewtonReport logistic_prox(const Matrix& D, const Vector& labels, const Vector& y,
                           double tau, Vector& x, double tol, int max_iters) {
  const Eigen::Index m = D.cols();
  if (x.size() != m) x = y;
  auto objective = [&](const Vector& z) {
    return logistic_loss(D, labels, z) + 0.5 * tau * (z - y).squaredNorm();
  };

  NewtonReport report;
  double value = objective(x);
  // A stale warm start can sit far out on the flat part of the loss.
  if (const double at_y = objective(y); at_y < value) {
    x = y;
    value = at_y;
  }
  for (int it = 0; it <= max_iters; ++it) {
    const Vector margins = labels.cwiseProduct(D * x);
    Vector weights(margins.size());
    Vector curv(margins.size());
    for (Eigen::Index j = 0; j < margins.size(); ++j) {
      const double s = sigmoid_neg(margins(j));
      weights(j) = -labels(j) * s;
      curv(j) = s * (1.0 - s);
    }
    const Vector loss_grad = D.transpose() * weights;
    const Vector grad = loss_grad + tau * (x - y);
    report.grad_norm = grad.norm();
    report.iterations = it;
    const double gscale = std::max({1.0, loss_grad.norm(), tau * y.norm()});
    if (report.grad_norm <= tol * gscale) {
      report.converged = true;
      return report;
    }
    if (it == max_iters) break;

    Matrix hess = D.transpose() * curv.asDiagonal() * D;
    hess.diagonal().array() += tau;
    const Vector step = -hess.llt().solve(grad);
    const double slope = grad.dot(step);

    // Inside the quadratic-convergence region the objective change drowns
    // in round-off, so take the full step without a line search.
    if (-slope < 1e-12 * std::max(1.0, std::abs(value))) {
      x += step;
      value = objective(x);
      continue;
    }
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Vector trial = x + t * step;
      const double tv = objective(trial);
      if (tv <= value + 1e-4 * t * slope) {
        x = trial;
        value = tv;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Builders

Vector vec(const Matrix& x) { return Eigen::Map<const Vector>(x.data(), x.size()); }

Matrix unvec(const Vector& x, Eigen::Index rows, Eigen::Index cols) {
  require_same_size(x.size(), rows * cols, "unvec");
  return Eigen::Map<const Matrix>(x.data(), rows, cols);
}

ProblemInstance build_elastic_net(const ElasticNetSpec& in, double scale) {
  require_scale(scale);
  auto spec = std::make_shared<ElasticNetSpec>(in);
  spec->c *= scale;
  spec->validate();
  const Eigen::Index n = spec->D.cols();

  ProblemInstance p;
  p.name = "elastic_net";
  p.A = Matrix::Identity(n, n);
  p.B = -Matrix::Identity(n, n);
  p.b = Vector::Zero(n);

  auto dtc = std::make_shared<const Vector>(spec->D.transpose() * spec->c);
  p.u_solver = [dtc, cache = ShiftedSolver(spec->D.transpose() * spec->D)](
                   const Vector& v, const Vector& lambda, double tau) mutable {
    return cache.solve(tau, Vector(*dtc + tau * v + lambda));
  };
  p.v_solver = [spec](const Vector& u, const Vector& lambda, double tau) {
    return elastic_net_prox(u - lambda / tau, spec->rho1, spec->rho2, tau);
  };
  p.solution = [](const Vector&, const Vector& v) { return v; };
  p.objective = [spec](const Vector&, const Vector& v) {
    return elastic_net_objective(*spec, v);
  };
  return p;
}

ProblemInstance build_qp(const QPSpec& in, double scale) {
  require_scale(scale);
  auto spec = std::make_shared<QPSpec>(in);
  spec->c *= scale;
  spec->validate();
  const Eigen::Index p_dim = spec->D.rows();

  ProblemInstance p;
  p.name = "qp";
  p.A = spec->D;
  p.B = -Matrix::Identity(p_dim, p_dim);
  p.b = Vector::Zero(p_dim);

  p.u_solver = [spec, cache = ShiftedSolver(spec->Q, spec->D.transpose() * spec->D)](
                   const Vector& v, const Vector& lambda, double tau) mutable {
    return cache.solve(tau, Vector(-spec->q + spec->D.transpose() * (tau * v + lambda)));
  };
  p.v_solver = [spec](const Vector& u, const Vector& lambda, double tau) {
    return box_project(Vector(spec->D * u - lambda / tau), spec->c);
  };
  p.solution = [](const Vector& u, const Vector&) { return u; };
  p.objective = [spec](const Vector& u, const Vector&) { return qp_objective(*spec, u); };
  return p;
}

ProblemInstance build_basis_pursuit(const BasisPursuitSpec& in, double scale) {
  require_scale(scale);
  BasisPursuitSpec spec = in;
  spec.c *= scale;
  spec.validate();
  const Eigen::Index n = spec.D.cols();
  auto projector = std::make_shared<const AffineProjector>(spec.D, spec.c);

  ProblemInstance p;
  p.name = "basis_pursuit";
  p.A = Matrix::Identity(n, n);
  p.B = -Matrix::Identity(n, n);
  p.b = Vector::Zero(n);
  p.u_solver = [projector](const Vector& v, const Vector& lambda, double tau) {
    return (*projector)(v + lambda / tau);
  };
  p.v_solver = [](const Vector& u, const Vector& lambda, double tau) {
    return soft_threshold(Vector(u - lambda / tau), 1.0 / tau);
  };
  p.solution = [](const Vector& u, const Vector&) { return u; };
  p.objective = [](const Vector& u, const Vector&) { return basis_pursuit_objective(u); };
  return p;
}

ProblemInstance build_consensus_logreg(const ConsensusLogRegSpec& in, double scale) {
  require_scale(scale);
  in.validate();
  // c_j D_j^T x is bilinear in (c, D): scaling the features is the same as
  // scaling the labels and keeps them in {-1, +1}.
  auto spec = std::make_shared<ConsensusLogRegSpec>(in);
  for (Matrix& block : spec->blocks) block *= scale;

  const Eigen::Index m = spec->features();
  const auto nblocks = static_cast<Eigen::Index>(spec->block_count());
  const Eigen::Index n = nblocks * m;

  ProblemInstance p;
  p.name = "consensus_logreg";
  p.A = Matrix::Identity(n, n);
  p.B = Matrix::Zero(n, m);
  for (Eigen::Index i = 0; i < nblocks; ++i) {
    p.B.block(i * m, 0, m, m) = -Matrix::Identity(m, m);
  }
  p.b = Vector::Zero(n);

  p.u_solver = [spec, m, nblocks, warm = Vector(Vector::Zero(n))](
                   const Vector& z, const Vector& lambda, double tau) mutable {
    Vector u(nblocks * m);
    for (Eigen::Index i = 0; i < nblocks; ++i) {
      const Vector y = z + lambda.segment(i * m, m) / tau;
      Vector x = warm.segment(i * m, m);
      const NewtonReport rep =
          logistic_prox(spec->blocks[i], spec->labels[i], y, tau, x, spec->inner_tol,
                        spec->inner_max_iters);
      if (!rep.converged) {
        std::ostringstream os;
        os << "consensus_logreg: Newton did not converge on block " << i << " after "
           << rep.iterations << " iterations (gradient norm " << rep.grad_norm << ")";
        throw std::runtime_error(os.str());
      }
      u.segment(i * m, m) = x;
    }
    warm = u;
    return u;
  };
  p.v_solver = [spec, m, nblocks](const Vector& u, const Vector& lambda, double tau) {
    Vector mean = Vector::Zero(m);
    for (Eigen::Index i = 0; i < nblocks; ++i) {
      mean += u.segment(i * m, m) - lambda.segment(i * m, m) / tau;
    }
    mean /= static_cast<double>(nblocks);
    return soft_threshold(mean, spec->rho / (static_cast<double>(nblocks) * tau));
  };
  p.solution = [](const Vector&, const Vector& v) { return v; };
  p.objective = [spec](const Vector&, const Vector& v) {
    return consensus_logreg_objective(*spec, v);
  };
  return p;
}

ProblemInstance build_lrls(const LRLSSpec& in, double scale) {
  require_scale(scale);
  auto spec = std::make_shared<LRLSSpec>(in);
  spec->C *= scale;
  spec->validate();
  const Eigen::Index rows = spec->D.cols();
  const Eigen::Index cols = spec->C.cols();
  const Eigen::Index n = rows * cols;

  ProblemInstance p;
  p.name = "lrls";
  p.A = Matrix::Identity(n, n);
  p.B = -Matrix::Identity(n, n);
  p.b = Vector::Zero(n);

  auto dtc = std::make_shared<const Matrix>(spec->D.transpose() * spec->C);
  p.u_solver = [dtc, rows, cols, cache = ShiftedSolver(spec->D.transpose() * spec->D)](
                   const Vector& v, const Vector& lambda, double tau) mutable {
    const Matrix rhs = *dtc + tau * unvec(v, rows, cols) + unvec(lambda, rows, cols);
    return vec(cache.solve(tau, rhs));
  };
  p.v_solver = [spec, rows, cols](const Vector& u, const Vector& lambda, double tau) {
    const Matrix w = unvec(Vector(u - lambda / tau), rows, cols);
    return vec(singular_value_prox(w, spec->rho1, spec->rho2, tau));
  };
  p.solution = [](const Vector&, const Vector& v) { return v; };
  p.objective = [spec, rows, cols](const Vector&, const Vector& v) {
    return lrls_objective(*spec, unvec(v, rows, cols));
  };
  return p;
}

}  // namespace aadmm
