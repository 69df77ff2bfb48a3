#include <gtest/gtest.h>

#include "mtls/rng.hpp"
#include "mtls/shifted_gram.hpp"
#include "mtls/solve.hpp"

namespace {

using mtls::Index;
using mtls::Matrix;
using mtls::Vector;

mtls::MtlsProblem decoupled() {
  // First column exact and orthogonal to the noisy part: the TLS block and
  // the LS block separate, so every quantity is known in closed form.
  mtls::MtlsProblem p;
  p.a.resize(3, 2);
  p.a << 1, 0, 0, 1, 0, 0;
  p.b.resize(3);
  p.b << 1, 0, 0.5;
  p.n1 = 1;
  return p;
}

TEST(Solve, DecoupledGolden) {
  const mtls::MtlsSolution sol = mtls::solve(decoupled());
  EXPECT_NEAR(sol.x(0), 1.0, 1e-14);
  EXPECT_NEAR(sol.x(1), 0.0, 1e-14);
  EXPECT_NEAR(sol.sigma2, 0.25, 1e-14);
  EXPECT_NEAR(sol.gap, 0.5, 1e-14);
  Vector r_want(3);
  r_want << 0, 0, -0.5;
  EXPECT_LT((sol.r - r_want).norm(), 1e-14);
  EXPECT_LT(mtls::stationarity_residual(sol), 1e-14);
  EXPECT_LT(mtls::eigen_system_residual(sol), 1e-14);
}

TEST(Solve, PureTlsGolden) {
  // A = [2;0], b = [1;1]: smallest eigenvalue of the 2x2 Gram of [A b] is
  // 3 - sqrt(5), and x = (sqrt(5)-1)/2.
  mtls::MtlsProblem p;
  p.a.resize(2, 1);
  p.a << 2, 0;
  p.b.resize(2);
  p.b << 1, 1;
  p.n1 = 0;
  const mtls::MtlsSolution sol = mtls::solve(p);
  EXPECT_NEAR(sol.x(0), (std::sqrt(5.0) - 1.0) / 2.0, 1e-14);
  EXPECT_NEAR(sol.sigma2, 3.0 - std::sqrt(5.0), 1e-14);
  // sigma2 * gamma_bar = ||r||^2 at the solution
  EXPECT_NEAR(sol.sigma2 * (1.0 + sol.x.squaredNorm()), sol.r.squaredNorm(),
              1e-13);
}

TEST(Solve, PureLsGolden) {
  // All columns exact: ordinary least squares. A = [1;1], b = [1;3]: x = 2.
  mtls::MtlsProblem p;
  p.a.resize(2, 1);
  p.a << 1, 1;
  p.b.resize(2);
  p.b << 1, 3;
  p.n1 = 1;
  const mtls::MtlsSolution sol = mtls::solve(p);
  EXPECT_NEAR(sol.x(0), 2.0, 1e-14);
  EXPECT_EQ(sol.n2(), 0);
  EXPECT_NEAR(sol.sigma2, sol.r.squaredNorm(), 1e-14);
  EXPECT_EQ(sol.gap, mtls::kInf);
}

TEST(Solve, ConsistentSystemThrows) {
  mtls::MtlsProblem p;
  p.a.resize(2, 1);
  p.a << 1, 0;
  p.b.resize(2);
  p.b << 2, 0;
  p.n1 = 1;
  EXPECT_THROW(mtls::solve(p), mtls::ConsistentSystem);
}

TEST(Solve, NonGenericTieThrows) {
  // sigma_{n2}(R22) equals sigma_{n2+1}([R22 r2b]): no unique solution.
  mtls::MtlsProblem p;
  p.a.resize(3, 2);
  p.a << 1, 0, 0, 1, 0, 0;
  p.b.resize(3);
  p.b << 0, 0, 1;
  p.n1 = 0;
  EXPECT_THROW(mtls::solve(p), mtls::NonGeneric);
}

TEST(Solve, ValidateRejectsBadProblems) {
  mtls::MtlsProblem p;
  p.a = Matrix::Identity(2, 3);
  p.b = Vector::Ones(2);
  p.n1 = 0;
  EXPECT_THROW(p.validate(), mtls::DimensionError);
  p.a = Matrix::Identity(3, 3);
  EXPECT_THROW(p.validate(), mtls::DimensionError);  // b length mismatch
  p.b = Vector::Ones(3);
  p.n1 = 4;
  EXPECT_THROW(p.validate(), mtls::DimensionError);
}

TEST(Solve, RefineKeepsGoldensAndReducesDefect) {
  {
    mtls::MtlsProblem p;  // decoupled golden: refine must not move the root
    p.a.resize(3, 2);
    p.a << 1, 0, 0, 1, 0, 0;
    p.b.resize(3);
    p.b << 1, 0, 0.5;
    p.n1 = 1;
    const mtls::MtlsSolution ref = mtls::refine(mtls::solve(p));
    EXPECT_NEAR(ref.x(0), 1.0, 1e-14);
    EXPECT_NEAR(ref.x(1), 0.0, 1e-14);
    EXPECT_NEAR(ref.sigma2, 0.25, 1e-14);
  }
  {
    mtls::Rng rng(77);
    mtls::MtlsProblem p;
    p.a = rng.gauss_mat(20, 6);
    p.b = rng.gauss_vec(20);
    p.n1 = 2;
    const mtls::MtlsSolution sol = mtls::solve(p);
    const mtls::MtlsSolution ref = mtls::refine(sol);
    const double before =
        mtls::detail::stationarity_defect_ext(p, sol.x, sol.sigma2).norm();
    const double after =
        mtls::detail::stationarity_defect_ext(p, ref.x, ref.sigma2).norm();
    EXPECT_LT(after, 0.1 * before + 1e-18);
    EXPECT_LT((ref.x - sol.x).norm(), 1e-8 * sol.x.norm());
  }
}

TEST(Solve, WeightPattern) {
  const mtls::WeightPattern w{2, 3};
  Vector x(5);
  x << 1, 2, 3, 4, 5;
  const Vector wx = w.apply(x);
  EXPECT_EQ(wx(0), 0.0);
  EXPECT_EQ(wx(1), 0.0);
  EXPECT_EQ(wx(2), 3.0);
  EXPECT_NEAR(w.gamma_bar(x), 1.0 + 9 + 16 + 25, 1e-14);
}

// The solution is characterized by x = (A^T A - sigma2 W)^{-1} A^T b (the
// shifted-normal-equations form) and by the stationarity condition
// A^T r = sigma2 W x. Both are independent of the QR/SVD route that
// produced x, so they make a good cross-check over random draws.
TEST(Solve, RandomSweepSatisfiesCharacterizations) {
  int solved = 0, skipped = 0;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    mtls::Rng rng(seed);
    const Index n = 2 + Index(rng.raw() % 5);
    const Index m = n + 2 + Index(rng.raw() % 12);
    const Index n1 = Index(rng.raw() % std::uint64_t(n + 1));
    mtls::MtlsProblem p;
    p.a = rng.gauss_mat(m, n);
    p.b = rng.gauss_vec(m);
    p.n1 = n1;
    try {
      const mtls::MtlsSolution sol = mtls::solve(p);
      ++solved;
      const double scale = p.a.norm() * std::max(1.0, sol.x.norm());
      EXPECT_LT(mtls::stationarity_residual(sol), 1e-10 * scale) << "seed " << seed;

      if (sol.n2() > 0) {
        EXPECT_NEAR(mtls::rayleigh_quotient(p, sol.x), sol.sigma2,
                    1e-9 * std::max(1.0, sol.sigma2))
            << "seed " << seed;
      }

      const mtls::ShiftedGramSolver solver(sol.fact, sol.sigma2);
      const Vector x_alt = solver.solve(Vector(p.a.transpose() * p.b));
      EXPECT_LT((x_alt - sol.x).norm(), 1e-8 * std::max(1.0, sol.x.norm()))
          << "seed " << seed;

      EXPECT_GT(sol.gap, 0.0);
      EXPECT_GE(sol.sigma2, 0.0);
    } catch (const mtls::NonGeneric&) {
      ++skipped;
    } catch (const mtls::ConsistentSystem&) {
      ++skipped;
    }
  }
  EXPECT_GE(solved, 48) << "too many degenerate draws";
}

// n1 = 0 must agree with the classical TLS formula: x from the smallest
// right singular vector of [A b].
TEST(Solve, TlsReductionMatchesSvdFormula) {
  for (std::uint64_t seed : {2, 9, 14}) {
    mtls::Rng rng(seed);
    const Matrix a = rng.gauss_mat(12, 4);
    const Vector b = rng.gauss_vec(12);
    mtls::MtlsProblem p;
    p.a = a;
    p.b = b;
    p.n1 = 0;
    const mtls::MtlsSolution sol = mtls::solve(p);

    Matrix ab(12, 5);
    ab << a, b;
    const mtls::SvdResult dec = mtls::svd(ab, true);
    const Vector v = dec.v.col(4);
    const Vector x_tls = -v.head(4) / v(4);
    EXPECT_LT((sol.x - x_tls).norm(), 1e-10 * x_tls.norm()) << "seed " << seed;
    EXPECT_NEAR(sol.sigma2, dec.sigma(4) * dec.sigma(4),
                1e-10 * std::max(1.0, sol.sigma2))
        << "seed " << seed;
  }
}

// n1 = n must agree with ordinary least squares.
TEST(Solve, LsReductionMatchesNormalEquations) {
  for (std::uint64_t seed : {4, 21}) {
    mtls::Rng rng(seed);
    const Matrix a = rng.gauss_mat(10, 3);
    const Vector b = rng.gauss_vec(10);
    mtls::MtlsProblem p;
    p.a = a;
    p.b = b;
    p.n1 = 3;
    const mtls::MtlsSolution sol = mtls::solve(p);
    const Vector x_ls = (a.transpose() * a).ldlt().solve(a.transpose() * b);
    EXPECT_LT((sol.x - x_ls).norm(), 1e-10 * x_ls.norm()) << "seed " << seed;
  }
}

TEST(ShiftedGram, DenseMatchesDirectInverse) {
  for (std::uint64_t seed : {1, 6, 13}) {
    mtls::Rng rng(seed);
    const Index n = 4, m = 11, n1 = 2;
    mtls::MtlsProblem p;
    p.a = rng.gauss_mat(m, n);
    p.b = rng.gauss_vec(m);
    p.n1 = n1;
    const mtls::MtlsSolution sol = mtls::solve(p);

    Matrix pm = p.a.transpose() * p.a;
    pm.bottomRightCorner(n - n1, n - n1) -=
        sol.sigma2 * Matrix::Identity(n - n1, n - n1);
    const Matrix pinv_direct = pm.inverse();

    const mtls::ShiftedGramSolver solver(sol.fact, sol.sigma2);
    EXPECT_LT((solver.dense() - pinv_direct).norm(), 1e-9 * pinv_direct.norm())
        << "seed " << seed;
    EXPECT_LT((mtls::p_inverse_block(sol) - pinv_direct).norm(),
              1e-9 * pinv_direct.norm())
        << "seed " << seed;

    // block solve agrees with the dense apply on matrices and vectors
    const Matrix rhs = rng.gauss_mat(n, 3);
    EXPECT_LT((solver.solve(rhs) - pinv_direct * rhs).norm(),
              1e-9 * (pinv_direct * rhs).norm());
  }
}

TEST(ShiftedGram, RequiresGenericity) {
  // sigma2 above sigma_min(R22)^2 makes S indefinite; the solver must refuse.
  mtls::Rng rng(8);
  mtls::MtlsProblem p;
  p.a = rng.gauss_mat(9, 3);
  p.b = rng.gauss_vec(9);
  p.n1 = 1;
  const mtls::MtlsSolution sol = mtls::solve(p);
  const double sigma_min = sol.fact.r22_sigma(sol.fact.r22_sigma.size() - 1);
  EXPECT_THROW(mtls::ShiftedGramSolver(sol.fact, 1.1 * sigma_min * sigma_min),
               mtls::NonGeneric);
}

}  // namespace
