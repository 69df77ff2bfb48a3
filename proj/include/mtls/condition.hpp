#pragma once

// Normwise, mixed and componentwise condition numbers of the MTLS solution.
//
// The absolute normwise condition number is ||K||_2 for the first-order map
// K. Four compact equivalent forms avoid materializing K (n x m(n+1)):
// two work on n x n symmetrized products, two on short-and-fat stacks
// [.., ..] of width 2m+n and m+n. kappa2/kappa_zy variants follow Zheng and
// Yang (2019); the stacked forms trade a Gram product A^T A for extra
// columns, which is the numerically preferred route (Higham, Accuracy and
// Stability, ch. 20 flavor of argument).
//
// Throughout: P = A^T A - sigma2 W, gamma = 1 + ||x||^2,
// gamma_bar = 1 + x^T W x, r = A x - b, and sigma2 * gamma_bar = ||r||^2 at
// the solution.

#include <map>
#include <optional>
#include <string>

#include "mtls/jacobian.hpp"

namespace mtls {

namespace detail {

struct CondWork {
  ShiftedGramSolver solver;
  Matrix pinv;      // dense P^{-1}
  Vector wx;        // W x
  double gamma;     // 1 + ||x||^2
  double gamma_bar; // 1 + x^T W x
  double rnorm;

  explicit CondWork(const MtlsSolution& sol)
      : solver(sol.fact, sol.sigma2),
        pinv(solver.dense()),
        wx(sol.weight().apply(sol.x)),
        gamma(1.0 + sol.x.squaredNorm()),
        gamma_bar(sol.weight().gamma_bar(sol.x)),
        rnorm(sol.r.norm()) {
    if (rnorm == 0.0) throw ConsistentSystem("condition: zero residual");
  }
};

}  // namespace detail

// ||P^{-1}(gamma A^T A - A^T r x^T - x r^T A + ||r||^2 I) P^{-1}||^{1/2}.
inline double kappa1(const MtlsSolution& sol) {
  const detail::CondWork w(sol);
  const Matrix& a = sol.problem.a;
  const Vector ar = a.transpose() * sol.r;
  Matrix core = w.gamma * (a.transpose() * a);
  core.noalias() -= ar * sol.x.transpose();
  core.noalias() -= sol.x * ar.transpose();
  core.diagonal().array() += sol.r.squaredNorm();
  return std::sqrt(spectral_norm(w.pinv * core * w.pinv));
}

// gamma^{1/2} ||P^{-1}(A^T A + sigma2 gamma_bar / gamma *
//   (I - (W x x^T + x x^T W) / gamma_bar)) P^{-1}||^{1/2}.
inline double kappa2(const MtlsSolution& sol) {
  const detail::CondWork w(sol);
  const Matrix& a = sol.problem.a;
  const double s = sol.sigma2 * w.gamma_bar / w.gamma;
  Matrix core = a.transpose() * a;
  core.noalias() -= (s / w.gamma_bar) * (w.wx * sol.x.transpose());
  core.noalias() -= (s / w.gamma_bar) * (sol.x * w.wx.transpose());
  core.diagonal().array() += s;
  return std::sqrt(w.gamma * spectral_norm(w.pinv * core * w.pinv));
}

// ||P^{-1}[A^T, ||x||(A^T - sigma2 W x r^T / ||r||^2),
//          ||r|| I - (sigma2/||r||) W x x^T]||.
inline double kappa3(const MtlsSolution& sol) {
  const detail::CondWork w(sol);
  const Index m = sol.m(), n = sol.n();
  const Matrix piat = w.solver.solve(Matrix(sol.problem.a.transpose()));
  const Vector piwx = w.solver.solve(w.wx);
  Matrix z(n, 2 * m + n);
  z.leftCols(m) = piat;
  z.middleCols(m, m) =
      sol.x.norm() *
      (piat - (sol.sigma2 / sol.r.squaredNorm()) * piwx * sol.r.transpose());
  z.rightCols(n) = w.rnorm * w.pinv -
                   (sol.sigma2 / w.rnorm) * piwx * sol.x.transpose();
  return spectral_norm(z);
}

// ||P^{-1}[(1+beta) A^T - beta sigma2 W x r^T / ||r||^2,
//          ||r|| I - (sigma2/||r||) W x x^T]||,  beta = -1 +/- sqrt(gamma).
inline double kappa4(const MtlsSolution& sol, bool positive_branch = true) {
  const detail::CondWork w(sol);
  const Index m = sol.m(), n = sol.n();
  const double beta = -1.0 + (positive_branch ? 1.0 : -1.0) * std::sqrt(w.gamma);
  const Matrix piat = w.solver.solve(Matrix(sol.problem.a.transpose()));
  const Vector piwx = w.solver.solve(w.wx);
  Matrix z(n, m + n);
  z.leftCols(m) = (1.0 + beta) * piat -
                  (beta * sol.sigma2 / sol.r.squaredNorm()) * piwx *
                      sol.r.transpose();
  z.rightCols(n) = w.rnorm * w.pinv -
                   (sol.sigma2 / w.rnorm) * piwx * sol.x.transpose();
  return spectral_norm(z);
}

// Zheng-Yang published estimate for ||K_zy||: same shell as kappa2 but with
// the rank-2 term 2 W x x^T W / gamma_bar. Reported for comparison; it is
// not an equality with ||K|| in general.
inline double kappa_zy28(const MtlsSolution& sol) {
  const detail::CondWork w(sol);
  const Matrix& a = sol.problem.a;
  const double s = sol.sigma2 * w.gamma_bar / w.gamma;
  Matrix core = a.transpose() * a;
  core.noalias() -= (2.0 * s / w.gamma_bar) * (w.wx * w.wx.transpose());
  core.diagonal().array() += s;
  return std::sqrt(w.gamma * spectral_norm(w.pinv * core * w.pinv));
}

// Direct maximization of ||K_zy^T y||: equals kappa2 exactly.
inline double kappa_zy_new(const MtlsSolution& sol) {
  const detail::CondWork w(sol);
  const Matrix& a = sol.problem.a;
  Matrix core = w.gamma * (a.transpose() * a);
  core.noalias() -= sol.sigma2 * (w.wx * sol.x.transpose());
  core.noalias() -= sol.sigma2 * (sol.x * w.wx.transpose());
  core.diagonal().array() += sol.r.squaredNorm();
  return std::sqrt(spectral_norm(w.pinv * core * w.pinv));
}

// Relative normwise condition number via the explicit K (reference route;
// subject to the dense entry cap).
inline double kappa_full(const MtlsSolution& sol,
                         const Config& cfg = default_config()) {
  const JacobianMatrix jac = jacobian(sol, cfg);
  Matrix ab(sol.m(), sol.n() + 1);
  ab << sol.problem.a, sol.problem.b;
  return spectral_norm(jac.k) * ab.norm() / sol.x.norm();
}

struct PerturbationBound {
  double kappa_a = 0.0;  // coefficient on ||dA|| / ||A||
  double kappa_b = 0.0;  // coefficient on ||db|| / ||b||
  double value = 0.0;    // predicted bound on ||dx|| / ||x||
};

// First-order bound ||dx||/||x|| <~ kappa_b ||db||/||b|| + kappa_A ||dA||/||A||
// with kappa_b = (||b||/||x||) ||P^{-1}A^T||,
//      kappa_A = (||A||/||x||)(||r|| ||P^{-1}|| + ||x|| ||P^{-1}A^T||).
inline PerturbationBound perturbation_bound(const MtlsSolution& sol,
                                            double da_norm2, double db_norm2) {
  const detail::CondWork w(sol);
  const Matrix piat = w.solver.solve(Matrix(sol.problem.a.transpose()));
  const double norm_piat = spectral_norm(piat);
  const double norm_pi = spectral_norm(w.pinv);
  const double xnorm = sol.x.norm();
  const double anorm = spectral_norm(sol.problem.a);
  const double bnorm = sol.problem.b.norm();

  PerturbationBound out;
  out.kappa_b = bnorm / xnorm * norm_piat;
  out.kappa_a = anorm / xnorm * (w.rnorm * norm_pi + xnorm * norm_piat);
  out.value = (bnorm > 0 ? out.kappa_b * db_norm2 / bnorm : 0.0) +
              (anorm > 0 ? out.kappa_a * da_norm2 / anorm : 0.0);
  return out;
}

struct MixedCompw {
  double mixed = 0.0;
  double compw = 0.0;      // max over components with nonzero x_i
  bool compw_infinite = false;  // some u_i > 0 sits on x_i = 0
};

namespace detail {

// xi/0 := 0 when xi == 0 and infinity otherwise; infinity is reported as a
// flag plus the max over the finite components.
inline MixedCompw ratios_from(const Vector& u, const Vector& x) {
  MixedCompw out;
  out.mixed = u.lpNorm<Eigen::Infinity>() / x.lpNorm<Eigen::Infinity>();
  for (Index i = 0; i < x.size(); ++i) {
    if (x(i) != 0.0)
      out.compw = std::max(out.compw, std::abs(u(i) / x(i)));
    else if (u(i) != 0.0)
      out.compw_infinite = true;
  }
  return out;
}

}  // namespace detail

// Exact mixed/componentwise condition numbers through the explicit K:
// u = |K| vec([|A|, |b|]).
inline MixedCompw mixed_compw_exact(const MtlsSolution& sol,
                                    const Config& cfg = default_config()) {
  const JacobianMatrix jac = jacobian(sol, cfg);
  Vector v(sol.m() * (sol.n() + 1));
  v << vec(sol.problem.a.cwiseAbs()), sol.problem.b.cwiseAbs();
  const Vector u = jac.k.cwiseAbs() * v;
  return detail::ratios_from(u, sol.x);
}

// Kronecker-free upper bounds:
// u = |P^{-1} A^T H0| (|A||x| + |b|) + |P^{-1}| |A^T| |r|.
inline MixedCompw mixed_compw_upper(const MtlsSolution& sol) {
  const detail::CondWork w(sol);
  const Matrix dh = w.solver.solve(detail::at_h0(sol));
  const Matrix& a = sol.problem.a;
  const Vector u =
      dh.cwiseAbs() * (a.cwiseAbs() * sol.x.cwiseAbs() + sol.problem.b.cwiseAbs()) +
      w.pinv.cwiseAbs() * (a.cwiseAbs().transpose() * sol.r.cwiseAbs());
  return detail::ratios_from(u, sol.x);
}

struct ConditionReport {
  double kappa_rel = 0.0;  // ||K|| ||[A b]||_F / ||x||, via kappa4
  double kappa_abs = 0.0;  // ||K||, via kappa4
  std::map<std::string, double> variants;  // k1..k4, k_zy28, k_zy_new, k_full
  double kappa_a = 0.0, kappa_b = 0.0;
  double mixed_upper = 0.0, compw_upper = 0.0;
  std::optional<double> mixed, compw;  // exact values, when K fits the cap
  bool compw_infinite = false;
  bool used_explicit_k = false;
};

inline ConditionReport condition_report(const MtlsSolution& sol,
                                        bool want_explicit_k = false,
                                        const Config& cfg = default_config()) {
  ConditionReport rep;
  Matrix ab(sol.m(), sol.n() + 1);
  ab << sol.problem.a, sol.problem.b;

  rep.kappa_abs = kappa4(sol);
  rep.kappa_rel = rep.kappa_abs * ab.norm() / sol.x.norm();
  rep.variants["k1"] = kappa1(sol);
  rep.variants["k2"] = kappa2(sol);
  rep.variants["k3"] = kappa3(sol);
  rep.variants["k4"] = rep.kappa_abs;
  rep.variants["k_zy28"] = kappa_zy28(sol);
  rep.variants["k_zy_new"] = kappa_zy_new(sol);

  const PerturbationBound pb = perturbation_bound(sol, 0.0, 0.0);
  rep.kappa_a = pb.kappa_a;
  rep.kappa_b = pb.kappa_b;

  const MixedCompw upper = mixed_compw_upper(sol);
  rep.mixed_upper = upper.mixed;
  rep.compw_upper = upper.compw;
  rep.compw_infinite = upper.compw_infinite;

  if (want_explicit_k) {
    const JacobianMatrix jac = jacobian(sol, cfg);
    rep.variants["k_full"] = spectral_norm(jac.k);
    Vector v(sol.m() * (sol.n() + 1));
    v << vec(sol.problem.a.cwiseAbs()), sol.problem.b.cwiseAbs();
    const MixedCompw exact = detail::ratios_from(jac.k.cwiseAbs() * v, sol.x);
    rep.mixed = exact.mixed;
    rep.compw = exact.compw;
    rep.compw_infinite = rep.compw_infinite || exact.compw_infinite;
    rep.used_explicit_k = true;
  }
  return rep;
}

}  // namespace mtls
