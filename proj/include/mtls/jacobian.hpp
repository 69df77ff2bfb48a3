#pragma once

// First-order perturbation map of the MTLS solution: the n x m(n+1) matrix K
// with dx = K [vec(dA); db] + O(||[dA db]||^2). Two independent assembly
// routes are provided on purpose:
//
//   jacobian()       reflector route: K = -P^{-1}(A^T H0 ([x^T -1] kron I_m)
//                    + [I_n kron r^T, 0]) with H0 = I - 2 r r^T / ||r||^2,
//                    assembled blockwise without Kronecker products;
//   jacobian_kron()  literal Kronecker route, the form derived by
//                    Zheng and Yang (2019): [-(x^T kron D) -
//                    (r^T kron P^{-1}) Pi_{m,n}, D] with
//                    D = P^{-1}(A^T - (2/gamma_bar) W x r^T).
//
// The two agree to rounding; tests and the acceptance suite compare them.

#include "mtls/shifted_gram.hpp"

namespace mtls {

struct JacobianMatrix {
  Matrix k;  // n x m(n+1), columns ordered as vec(A) then b
  Index m = 0, n = 0;

  auto a_part() const { return k.leftCols(m * n); }
  auto b_part() const { return k.rightCols(m); }
};

namespace detail {

inline void check_jacobian_ok(const MtlsSolution& sol, const Config& cfg,
                              const char* who) {
  const double entries = double(sol.n()) * double(sol.m()) * double(sol.n() + 1);
  check_dense_cap(entries, cfg, who);
  if (sol.r.norm() == 0.0)
    throw ConsistentSystem(std::string(who) + ": zero residual");
}

// A^T H0 = A^T - (2 / ||r||^2) (A^T r) r^T without forming H0.
inline Matrix at_h0(const MtlsSolution& sol) {
  const Matrix& a = sol.problem.a;
  const Vector ar = a.transpose() * sol.r;
  return a.transpose() - (2.0 / sol.r.squaredNorm()) * ar * sol.r.transpose();
}

}  // namespace detail

inline JacobianMatrix jacobian(const MtlsSolution& sol,
                               const Config& cfg = default_config()) {
  detail::check_jacobian_ok(sol, cfg, "jacobian");
  const Index m = sol.m(), n = sol.n();
  const ShiftedGramSolver p(sol.fact, sol.sigma2);
  const Matrix dh = p.solve(detail::at_h0(sol));  // P^{-1} A^T H0, n x m
  const Matrix pinv = p.dense();

  JacobianMatrix out;
  out.m = m;
  out.n = n;
  out.k.resize(n, m * (n + 1));
  for (Index j = 0; j < n; ++j)
    out.k.middleCols(j * m, m) =
        -sol.x(j) * dh - pinv.col(j) * sol.r.transpose();
  out.k.rightCols(m) = dh;
  return out;
}

inline JacobianMatrix jacobian_kron(const MtlsSolution& sol,
                                    const Config& cfg = default_config()) {
  detail::check_jacobian_ok(sol, cfg, "jacobian_kron");
  const Index m = sol.m(), n = sol.n();
  const ShiftedGramSolver p(sol.fact, sol.sigma2);
  const Vector wx = sol.weight().apply(sol.x);
  const double gamma_bar = sol.weight().gamma_bar(sol.x);
  const Matrix d = p.solve(Matrix(sol.problem.a.transpose() -
                                  (2.0 / gamma_bar) * wx * sol.r.transpose()));
  const Matrix pinv = p.dense();

  const Matrix xt_kron_d = kron(sol.x.transpose(), d, cfg);
  const Matrix rt_kron_pinv = kron(sol.r.transpose(), pinv, cfg);

  JacobianMatrix out;
  out.m = m;
  out.n = n;
  out.k.resize(n, m * (n + 1));
  // Right-multiplying by Pi_{m,n} permutes columns: col k of the product is
  // col vec_perm_index(m, n, k) of the left factor.
  for (Index k = 0; k < m * n; ++k)
    out.k.col(k) = -xt_kron_d.col(k) - rt_kron_pinv.col(vec_perm_index(m, n, k));
  out.k.rightCols(m) = d;
  return out;
}

inline Vector predict_delta_x(const JacobianMatrix& jac, const Matrix& da,
                              const Vector& db) {
  require(da.rows() == jac.m && da.cols() == jac.n && db.size() == jac.m,
          "predict_delta_x: perturbation shape mismatch");
  Vector v(jac.m * (jac.n + 1));
  v << vec(da), db;
  return jac.k * v;
}

// Same prediction without materializing K:
//   dx = -P^{-1}( A^T H0 (dA x - db) + dA^T r ).
inline Vector predict_delta_x(const MtlsSolution& sol, const Matrix& da,
                              const Vector& db) {
  require(da.rows() == sol.m() && da.cols() == sol.n() && db.size() == sol.m(),
          "predict_delta_x: perturbation shape mismatch");
  if (sol.r.norm() == 0.0) throw ConsistentSystem("predict_delta_x: zero residual");
  const ShiftedGramSolver p(sol.fact, sol.sigma2);
  const Matrix& a = sol.problem.a;
  const Vector ar = a.transpose() * sol.r;
  const Vector w = da * sol.x - db;
  const Vector ath0w =
      a.transpose() * w - (2.0 * sol.r.dot(w) / sol.r.squaredNorm()) * ar;
  return -p.solve(Vector(ath0w + da.transpose() * sol.r));
}

// max |K - K_zy| / max |K| over entries; zero for exact agreement.
inline double equivalence_residual(const MtlsSolution& sol,
                                   const Config& cfg = default_config()) {
  const JacobianMatrix a = jacobian(sol, cfg);
  const JacobianMatrix b = jacobian_kron(sol, cfg);
  const double denom = a.k.cwiseAbs().maxCoeff();
  if (denom == 0.0) return 0.0;
  return (a.k - b.k).cwiseAbs().maxCoeff() / denom;
}

}  // namespace mtls
