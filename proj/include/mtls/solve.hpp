#pragma once

// Mixed LS-TLS solver. The first n1 columns of A are error-free; the
// remaining n2 = n - n1 columns and the right-hand side b carry errors.
// n1 = 0 reduces to total least squares, n1 = n to ordinary least squares.
//
// The solve runs through one QR of [A b]: with
//   Q^T [A b] = [ R11 R12 r1b ]
//               [  0  R22 r2b ]
// the corrected subproblem min ||[E f]||_F s.t. (R22 + E) x2 = r2b + f is a
// plain TLS problem whose solution comes from the smallest right singular
// vector of [R22 r2b]; x1 then solves R11 x1 = r1b - R12 x2 by back
// substitution.

#include <cmath>

#include "mtls/kernels.hpp"

namespace mtls {

struct MtlsProblem {
  Matrix a;
  Vector b;
  Index n1 = 0;

  Index m() const { return a.rows(); }
  Index n() const { return a.cols(); }
  Index n2() const { return a.cols() - n1; }

  void validate() const {
    require(a.rows() >= 1 && a.cols() >= 1, "problem: empty A");
    require(a.rows() >= a.cols(), "problem: need m >= n");
    require(b.size() == a.rows(), "problem: b has wrong length");
    require(n1 >= 0 && n1 <= a.cols(), "problem: n1 out of range");
    detail::check_finite(a, "problem");
    detail::check_finite(b, "problem");
  }
};

// Diagonal weight W = diag(0_{n1}, I_{n2}) that marks the noisy columns,
// applied without ever forming the matrix.
struct WeightPattern {
  Index n1 = 0, n2 = 0;

  Vector apply(const Vector& x) const {
    Vector wx = Vector::Zero(x.size());
    wx.tail(n2) = x.tail(n2);
    return wx;
  }

  // gamma_bar = 1 + x^T W x
  double gamma_bar(const Vector& x) const { return 1.0 + x.tail(n2).squaredNorm(); }
};

struct MtlsSolution {
  MtlsProblem problem;
  Vector x;
  Vector r;        // r = A x - b
  double sigma2 = 0.0;  // squared smallest singular value of [R22 r2b];
                        // ||r||^2 when n2 = 0
  double gap = 0.0;     // sigma_{n2}(R22) - sigma_{n2+1}([R22 r2b]); +inf when n2 = 0
  PartitionedFactorization fact;

  Index m() const { return problem.m(); }
  Index n() const { return problem.n(); }
  Index n1() const { return problem.n1; }
  Index n2() const { return problem.n2(); }
  WeightPattern weight() const { return WeightPattern{n1(), n2()}; }
};

// sigma_{n2}(R22) - sigma_{n2+1}([R22 r2b]) for an already-factored problem.
// When [R22 r2b] has fewer than n2+1 rows its (n2+1)-th singular value is
// zero by convention. n2 = 0 returns +inf (nothing to separate).
inline double genericity_gap(const PartitionedFactorization& f) {
  const Index n2 = f.n2();
  if (n2 == 0) return kInf;
  const Index p = f.m - f.n1;
  Matrix block(p, n2 + 1);
  block << f.r22, f.r2b;
  const Index rows = std::min(p, n2 + 1);
  const Vector s = singular_values(block.topRows(rows));
  const double tail = (s.size() >= n2 + 1) ? s(n2) : 0.0;
  return f.r22_sigma(n2 - 1) - tail;
}

inline MtlsSolution solve(const MtlsProblem& prob,
                          const Config& cfg = default_config()) {
  prob.validate();
  const Index m = prob.m(), n = prob.n(), n1 = prob.n1, n2 = prob.n2();

  MtlsSolution sol;
  sol.problem = prob;
  sol.fact = qr_partition(prob.a, prob.b, n1, cfg);
  const PartitionedFactorization& f = sol.fact;

  Vector x2(n2);
  if (n2 > 0) {
    const Index p = m - n1;
    Matrix block(p, n2 + 1);
    block << f.r22, f.r2b;
    // Only the top min(p, n2+1) rows are nonzero; the compact SVD with a
    // full right factor exposes the trailing right singular vector even
    // when the block is wide (p = n2, square data).
    const Index rows = std::min(p, n2 + 1);
    const SvdResult dec = svd(block.topRows(rows), /*full_v=*/true);
    const double sigma_tail = (dec.sigma.size() >= n2 + 1) ? dec.sigma(n2) : 0.0;

    sol.gap = f.r22_sigma(n2 - 1) - sigma_tail;
    const double tol_gap = cfg.gap_tol_factor * kEps * dec.sigma(0);
    if (!(sol.gap > tol_gap))
      throw NonGeneric("solve: singular value gap " + std::to_string(sol.gap) +
                       " below tolerance; smallest singular value of [R22 r2b] "
                       "not separated from R22 spectrum");

    Vector v = dec.v.col(n2);
    const double pivot = v(n2);
    if (std::abs(pivot) < cfg.pivot_tol_factor * kEps)
      throw NonGeneric("solve: trailing right singular vector has (numerically) "
                       "zero last component");
    x2 = -v.head(n2) / pivot;
    sol.sigma2 = sigma_tail * sigma_tail;
  } else {
    sol.gap = kInf;
  }

  Vector x(n);
  if (n1 > 0) {
    const Vector rhs = f.r1b - f.r12 * x2;
    x.head(n1) = f.r11.triangularView<Eigen::Upper>().solve(rhs);
  }
  x.tail(n2) = x2;

  sol.x = x;
  sol.r = prob.a * x - prob.b;

  if (n2 == 0) sol.sigma2 = sol.r.squaredNorm();

  const double bnorm = prob.b.norm();
  if (sol.r.norm() <= cfg.consistent_tol_factor * kEps * bnorm || bnorm == 0.0)
    throw ConsistentSystem("solve: residual negligible, b is (numerically) in "
                           "the range of A; downstream sensitivity quantities "
                           "are undefined");
  return sol;
}

// ||b - A x||^2 / (1 + x^T W x). At the solution this equals sigma2.
inline double rayleigh_quotient(const MtlsProblem& prob, const Vector& x) {
  require(x.size() == prob.n(), "rayleigh_quotient: x has wrong length");
  const WeightPattern w{prob.n1, prob.n2()};
  return (prob.b - prob.a * x).squaredNorm() / w.gamma_bar(x);
}

// || A^T r - sigma2 W x ||_2, the first-order optimality defect.
inline double stationarity_residual(const MtlsSolution& sol) {
  const Vector wx = sol.weight().apply(sol.x);
  return (sol.problem.a.transpose() * sol.r - sol.sigma2 * wx).norm();
}

// Relative residual of the bordered eigenvalue system
//   [A b]^T [A b] z = sigma2 * diag(W, 1) z,  z = [x; -1].
inline double eigen_system_residual(const MtlsSolution& sol) {
  const Index n = sol.n();
  Matrix ab(sol.m(), n + 1);
  ab << sol.problem.a, sol.problem.b;
  Vector z(n + 1);
  z << sol.x, -1.0;
  Vector wz(n + 1);
  wz << sol.weight().apply(sol.x), -1.0;
  const Vector res = ab.transpose() * (ab * z) - sol.sigma2 * wz;
  const double scale = ab.squaredNorm() * z.norm() + std::abs(sol.sigma2) * z.norm();
  return res.norm() / scale;
}

namespace detail {

// F(x, s) = [ A^T (A x - b) - s W x ; ||A x - b||^2 - s (1 + x^T W x) ]
// accumulated in extended precision. The solution is a root of F.
inline Vector stationarity_defect_ext(const MtlsProblem& prob, const Vector& x,
                                      double s) {
  using Ld = long double;
  using MatrixLd = Eigen::Matrix<Ld, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorLd = Eigen::Matrix<Ld, Eigen::Dynamic, 1>;
  const MatrixLd a = prob.a.cast<Ld>();
  const VectorLd bx = prob.b.cast<Ld>();
  const VectorLd xl = x.cast<Ld>();
  const VectorLd r = a * xl - bx;
  VectorLd wx = VectorLd::Zero(x.size());
  wx.tail(prob.n2()) = xl.tail(prob.n2());
  const Ld sl = Ld(s);
  Vector f(x.size() + 1);
  f.head(x.size()) = (a.transpose() * r - sl * wx).cast<double>();
  f(x.size()) =
      double(r.squaredNorm() - sl * (Ld(1) + xl.dot(wx)));
  return f;
}

}  // namespace detail

// Newton refinement of (x, sigma2) on the stationarity system with
// residuals accumulated in extended precision. The factored solution is a
// good starting point, so one or two steps push the forward error of x well
// below sqrt(machine epsilon) times the problem's condition number. Used by
// the experiment drivers so that measured solution changes reflect the data
// perturbation rather than solver roundoff (Higham, "Accuracy and Stability
// of Numerical Algorithms", ch. 12, on extended-precision refinement).
inline MtlsSolution refine(MtlsSolution sol, int steps = 2) {
  const MtlsProblem& prob = sol.problem;
  const Index n = prob.n(), n2 = prob.n2();
  const Matrix gram = prob.a.transpose() * prob.a;
  for (int it = 0; it < steps; ++it) {
    // Jacobian of the stationarity system at the current iterate.
    Matrix j(n + 1, n + 1);
    j.topLeftCorner(n, n) = gram;
    j.topLeftCorner(n, n).bottomRightCorner(n2, n2) -=
        sol.sigma2 * Matrix::Identity(n2, n2);
    Vector wx = Vector::Zero(n);
    wx.tail(n2) = sol.x.tail(n2);
    j.topRightCorner(n, 1) = -wx;
    const Vector r = prob.a * sol.x - prob.b;
    j.bottomLeftCorner(1, n) =
        2.0 * (prob.a.transpose() * r - sol.sigma2 * wx).transpose();
    j(n, n) = -(1.0 + sol.x.dot(wx));

    const Vector f = detail::stationarity_defect_ext(prob, sol.x, sol.sigma2);
    const Vector step = j.partialPivLu().solve(f);
    // Near-degenerate systems can produce useless corrections; keep the
    // factored solution in that case.
    if (!step.allFinite() ||
        step.head(n).norm() > 0.5 * (1.0 + sol.x.norm()))
      break;
    sol.x -= step.head(n);
    sol.sigma2 -= step(n);
  }
  sol.r = prob.a * sol.x - prob.b;
  return sol;
}

}  // namespace mtls
