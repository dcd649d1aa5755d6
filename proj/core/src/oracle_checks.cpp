#include "aadmm/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace aadmm::oracle {

// Every checker states the first-order condition of the subproblem
// directly. With B = -I and b = 0 the engine's subproblems satisfy
//   u:  grad H(u) = A^T lambda_hat,  lambda_hat = lambda + tau (v - A u)
//   v:  -lambda_new in dG(v),        lambda_new = lambda + tau (v - A u)
// Residuals are divided by the size of the terms they balance, so the
// result is a backward-error style relative violation.

namespace {

double inf_norm(const Vector& x) { return x.size() ? x.lpNorm<Eigen::Infinity>() : 0.0; }

double inf_norm(const Matrix& x) {
  return x.size() ? x.rowwise().lpNorm<1>().maxCoeff() : 0.0;
}

double scale_of(std::initializer_list<double> terms) {
  double s = 1.0;
  for (double t : terms) s = std::max(s, std::abs(t));
  return s;
}

// Distance of s from kappa * d||x||_1, coordinatewise max.
double l1_subgradient_gap(const Vector& s, double kappa, const Vector& x) {
  double gap = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) > 0.0) {
      gap = std::max(gap, std::abs(s(i) - kappa));
    } else if (x(i) < 0.0) {
      gap = std::max(gap, std::abs(s(i) + kappa));
    } else {
      gap = std::max(gap, std::abs(s(i)) - kappa);
    }
  }
  return std::max(gap, 0.0);
}

// Distance of s from kappa * d||X||_* at X.
double nuclear_subgradient_gap(const Matrix& s, double kappa, const Matrix& x) {
  if (kappa == 0.0) return s.cwiseAbs().maxCoeff();
  const Matrix m = s / kappa;
  Eigen::JacobiSVD<Matrix> dec(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& sv = dec.singularValues();
  const double cut = 1e-12 * std::max(1.0, sv.size() ? sv(0) : 0.0);
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) > cut) ++r;
  const Matrix& U = dec.matrixU();
  const Matrix& V = dec.matrixV();
  const Matrix rotated = U.transpose() * m * V;
  // rotated = [[I, 0], [0, W]] with ||W||_2 <= 1.
  double gap = 0.0;
  const Eigen::Index p = rotated.rows();
  const Eigen::Index q = rotated.cols();
  if (r > 0) {
    gap = std::max(gap, (rotated.topLeftCorner(r, r) - Matrix::Identity(r, r))
                            .cwiseAbs()
                            .maxCoeff());
    if (q > r) gap = std::max(gap, rotated.topRightCorner(r, q - r).cwiseAbs().maxCoeff());
    if (p > r) gap = std::max(gap, rotated.bottomLeftCorner(p - r, r).cwiseAbs().maxCoeff());
  }
  if (p > r && q > r) {
    Eigen::JacobiSVD<Matrix> rest(rotated.bottomRightCorner(p - r, q - r));
    gap = std::max(gap, rest.singularValues()(0) - 1.0);
  }
  return kappa * std::max(gap, 0.0);
}

}  // namespace

double KktReport::max() const {
  return std::max({primal, dual, stationarity, complementarity});
}

KktReport kkt_check(const QPSpec& spec, const Vector& x, const Vector& lambda) {
  require_same_size(lambda.size(), spec.D.rows(), "kkt_check lambda");
  const Vector mu = -lambda;
  const Vector slack = spec.D * x - spec.c;
  KktReport r;
  for (Eigen::Index i = 0; i < slack.size(); ++i) {
    r.dual = std::max(r.dual, -mu(i));
    if (!std::isfinite(spec.c(i))) {
      r.complementarity = std::max(r.complementarity, std::abs(mu(i)));
      continue;
    }
    r.primal = std::max(r.primal, slack(i));
    r.complementarity = std::max(r.complementarity, std::abs(mu(i) * slack(i)));
  }
  r.stationarity = inf_norm(Vector(spec.Q * x + spec.q + spec.D.transpose() * mu));
  return r;
}

KktReport kkt_check(const QPSpec& spec, const Vector& x) {
  const Vector slack = spec.D * x - spec.c;
  const double tol = 1e-7 * std::max(1.0, inf_norm(Vector(spec.D * x)));
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < slack.size(); ++i) {
    if (std::isfinite(spec.c(i)) && slack(i) >= -tol) active.push_back(i);
  }
  Vector mu = Vector::Zero(spec.D.rows());
  const Vector grad = spec.Q * x + spec.q;
  if (!active.empty()) {
    Matrix Da(static_cast<Eigen::Index>(active.size()), spec.D.cols());
    for (std::size_t k = 0; k < active.size(); ++k) {
      Da.row(static_cast<Eigen::Index>(k)) = spec.D.row(active[k]);
    }
    // Least-squares multipliers on the active set.
    const Vector mu_a = Da.transpose().colPivHouseholderQr().solve(Vector(-grad));
    for (std::size_t k = 0; k < active.size(); ++k) {
      mu(active[k]) = mu_a(static_cast<Eigen::Index>(k));
    }
  }
  return kkt_check(spec, x, Vector(-mu));
}

double l1_prox_violation(const Vector& w, double kappa, const Vector& x) {
  require_same_size(w.size(), x.size(), "l1_prox_violation");
  return l1_subgradient_gap(w - x, kappa, x) / scale_of({inf_norm(w), kappa});
}

double elastic_net_u_violation(const ElasticNetSpec& spec, const Vector& v, const Vector& lambda,
                               double tau, const Vector& u) {
  const Vector lambda_hat = lambda + tau * (v - u);
  const Vector dtdu = spec.D.transpose() * (spec.D * u);
  const Vector dtc = spec.D.transpose() * spec.c;
  const Vector res = dtdu - dtc - lambda_hat;
  return inf_norm(res) / scale_of({inf_norm(dtdu), inf_norm(dtc), inf_norm(lambda),
                                   tau * inf_norm(v), tau * inf_norm(u),
                                   inf_norm(Matrix(spec.D.transpose() * spec.D)) * inf_norm(u)});
}

double elastic_net_v_violation(const ElasticNetSpec& spec, const Vector& u, const Vector& lambda,
                               double tau, const Vector& v) {
  const Vector lambda_new = lambda + tau * (v - u);
  const Vector s = -lambda_new - spec.rho2 * v;
  return l1_subgradient_gap(s, spec.rho1, v) /
         scale_of({inf_norm(lambda), tau * inf_norm(u), tau * inf_norm(v), spec.rho1,
                   spec.rho2 * inf_norm(v)});
}

double qp_u_violation(const QPSpec& spec, const Vector& v, const Vector& lambda, double tau,
                      const Vector& u) {
  const Vector du = spec.D * u;
  const Vector lambda_hat = lambda + tau * (v - du);
  const Vector qu = spec.Q * u;
  const Vector res = qu + spec.q - spec.D.transpose() * lambda_hat;
  const double k_norm = inf_norm(spec.Q) + tau * inf_norm(Matrix(spec.D.transpose() * spec.D));
  return inf_norm(res) /
         scale_of({inf_norm(qu), inf_norm(spec.q), inf_norm(Vector(spec.D.transpose() * lambda)),
                   tau * inf_norm(Vector(spec.D.transpose() * v)), k_norm * inf_norm(u)});
}

double qp_v_violation(const QPSpec& spec, const Vector& u, const Vector& lambda, double tau,
                      const Vector& v) {
  const Vector du = spec.D * u;
  const Vector mu = -(lambda + tau * (v - du));  // normal-cone element
  double gap = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double room = spec.c(i) - v(i);  // +inf for absent bounds
    gap = std::max(gap, -room);
    gap = std::max(gap, -mu(i));
    gap = std::max(gap, std::abs(std::min(mu(i), room)));
  }
  return gap / scale_of({inf_norm(lambda), tau * inf_norm(du), tau * inf_norm(v)});
}

double basis_pursuit_u_violation(const BasisPursuitSpec& spec, const Vector& v,
                                 const Vector& lambda, double tau, const Vector& u) {
  const Vector lambda_hat = lambda + tau * (v - u);
  const double feas = inf_norm(Vector(spec.D * u - spec.c)) /
                      scale_of({inf_norm(spec.c), inf_norm(spec.D) * inf_norm(u)});
  // lambda_hat must lie in the row space of D.
  const Vector coeff = spec.D.transpose().colPivHouseholderQr().solve(lambda_hat);
  const Vector off_range = lambda_hat - spec.D.transpose() * coeff;
  const double range = inf_norm(off_range) /
                       scale_of({inf_norm(lambda), tau * inf_norm(v), tau * inf_norm(u)});
  return std::max(feas, range);
}

double basis_pursuit_v_violation(const Vector& u, const Vector& lambda, double tau,
                                 const Vector& v) {
  const Vector lambda_new = lambda + tau * (v - u);
  return l1_subgradient_gap(Vector(-lambda_new), 1.0, v) /
         scale_of({inf_norm(lambda), tau * inf_norm(u), tau * inf_norm(v)});
}

double logreg_u_violation(const ConsensusLogRegSpec& spec, const Vector& z, const Vector& lambda,
                          double tau, const Vector& u) {
  const Eigen::Index m = spec.features();
  double worst = 0.0;
  for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
    const auto off = static_cast<Eigen::Index>(i) * m;
    const Vector x = u.segment(off, m);
    const Vector lam = lambda.segment(off, m);
    const Vector lambda_hat = lam + tau * (z - x);
    const Vector grad = logistic_gradient(spec.blocks[i], spec.labels[i], x);
    worst = std::max(worst, inf_norm(Vector(grad - lambda_hat)) /
                                scale_of({inf_norm(grad), inf_norm(lam), tau * inf_norm(z),
                                          tau * inf_norm(x)}));
  }
  return worst;
}

double logreg_v_violation(const ConsensusLogRegSpec& spec, const Vector& u, const Vector& lambda,
                          double tau, const Vector& z) {
  const Eigen::Index m = spec.features();
  Vector s = Vector::Zero(m);  // B^T lambda_new
  double mag = std::max(inf_norm(lambda), tau * inf_norm(z));
  for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
    const auto off = static_cast<Eigen::Index>(i) * m;
    s -= lambda.segment(off, m) + tau * (z - u.segment(off, m));
    mag = std::max(mag, tau * inf_norm(Vector(u.segment(off, m))));
  }
  mag *= static_cast<double>(spec.blocks.size());
  return l1_subgradient_gap(s, spec.rho, z) / scale_of({mag, spec.rho});
}

double lrls_u_violation(const LRLSSpec& spec, const Vector& v, const Vector& lambda, double tau,
                        const Vector& u) {
  const Eigen::Index rows = spec.D.cols();
  const Eigen::Index cols = spec.C.cols();
  const Matrix U = unvec(u, rows, cols);
  const Matrix lambda_hat = unvec(Vector(lambda + tau * (v - u)), rows, cols);
  const Matrix dtdu = spec.D.transpose() * (spec.D * U);
  const Matrix dtc = spec.D.transpose() * spec.C;
  const Matrix res = dtdu - dtc - lambda_hat;
  return res.cwiseAbs().maxCoeff() /
         scale_of({dtdu.cwiseAbs().maxCoeff(), dtc.cwiseAbs().maxCoeff(), inf_norm(lambda),
                   tau * inf_norm(v), tau * inf_norm(u),
                   inf_norm(Matrix(spec.D.transpose() * spec.D)) * inf_norm(u)});
}

double lrls_v_violation(const LRLSSpec& spec, const Vector& u, const Vector& lambda, double tau,
                        const Vector& v) {
  const Eigen::Index rows = spec.D.cols();
  const Eigen::Index cols = spec.C.cols();
  const Matrix V = unvec(v, rows, cols);
  const Matrix s = unvec(Vector(-(lambda + tau * (v - u))), rows, cols) - spec.rho2 * V;
  return nuclear_subgradient_gap(s, spec.rho1, V) /
         scale_of({inf_norm(lambda), tau * inf_norm(u), tau * inf_norm(v), spec.rho1,
                   spec.rho2 * inf_norm(v)});
}

OptimalityReport subproblem_optimality(ProblemKind kind, int samples, std::uint64_t seed) {
  const SyntheticRequest request = SyntheticRequest::defaults(kind);
  const AnySpec spec = synthetic_spec(request);
  ProblemInstance inst = build_synthetic(request);
  SeededRng rng(seed);
  OptimalityReport rep;
  const Eigen::Index n = inst.n();
  const Eigen::Index m = inst.m();
  const Eigen::Index p = inst.p();

  for (int s = 0; s < samples; ++s) {
    const double tau = std::pow(10.0, rng.uniform(-2.0, 2.0));
    const double mag = std::pow(10.0, rng.uniform(-1.0, 1.0));
    const Vector v_in = mag * rng.normal_vector(m);
    const Vector u_in = mag * rng.normal_vector(n);
    const Vector lambda = mag * rng.normal_vector(p);
    const Vector u = inst.u_solver(v_in, lambda, tau);
    const Vector v = inst.v_solver(u_in, lambda, tau);
    double du = 0.0;
    double dv = 0.0;
    std::visit(
        [&](const auto& sp) {
          using T = std::decay_t<decltype(sp)>;
          if constexpr (std::is_same_v<T, ElasticNetSpec>) {
            du = elastic_net_u_violation(sp, v_in, lambda, tau, u);
            dv = elastic_net_v_violation(sp, u_in, lambda, tau, v);
          } else if constexpr (std::is_same_v<T, QPSpec>) {
            du = qp_u_violation(sp, v_in, lambda, tau, u);
            dv = qp_v_violation(sp, u_in, lambda, tau, v);
          } else if constexpr (std::is_same_v<T, BasisPursuitSpec>) {
            du = basis_pursuit_u_violation(sp, v_in, lambda, tau, u);
            dv = basis_pursuit_v_violation(u_in, lambda, tau, v);
          } else if constexpr (std::is_same_v<T, ConsensusLogRegSpec>) {
            du = logreg_u_violation(sp, v_in, lambda, tau, u);
            dv = logreg_v_violation(sp, u_in, lambda, tau, v);
          } else {
            du = lrls_u_violation(sp, v_in, lambda, tau, u);
            dv = lrls_v_violation(sp, u_in, lambda, tau, v);
          }
        },
        spec);
    rep.max_u_violation = std::max(rep.max_u_violation, du);
    rep.max_v_violation = std::max(rep.max_v_violation, dv);
    ++rep.samples;
  }
  return rep;
}

}  // namespace aadmm::oracle
