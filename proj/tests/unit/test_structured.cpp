#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "mtls/experiments.hpp"
#include "mtls/rng.hpp"
#include "mtls/structured.hpp"

namespace {

using mtls::Index;
using mtls::Matrix;
using mtls::Vector;

mtls::StructureBasis toy_basis() {
  // A = alpha_1 * [e_11 + e_22] + alpha_2 * [e_31] on a 3 x 2 shape.
  mtls::StructureBasis basis;
  basis.m = 3;
  basis.n = 2;
  basis.s = {{{0, 0, 1.0}, {1, 1, 1.0}}, {{2, 0, 1.0}}};
  basis.alpha.resize(2);
  basis.alpha << 2.0, -1.0;
  return basis;
}

TEST(Basis, ReconstructAndProject) {
  const mtls::StructureBasis basis = toy_basis();
  basis.validate();
  const Matrix a = mtls::reconstruct(basis);
  Matrix want(3, 2);
  want << 2, 0, 0, 2, -1, 0;
  EXPECT_EQ(a, want);
  const Vector alpha = mtls::project_alpha(basis, a);
  EXPECT_LT((alpha - basis.alpha).norm(), 1e-14);
}

TEST(Basis, ProjectRejectsOffSpan) {
  const mtls::StructureBasis basis = toy_basis();
  Matrix off(3, 2);
  off << 2, 7, 0, 2, -1, 0;  // (0,1) entry owned by no basis matrix
  EXPECT_THROW(mtls::project_alpha(basis, off), mtls::DimensionError);
}

TEST(Basis, ValidateRejectsOverlapAndZero) {
  mtls::StructureBasis overlap = toy_basis();
  overlap.s[1].push_back({0, 0, 0.5});  // (0,0) already owned by S_1
  EXPECT_THROW(overlap.validate(), mtls::DimensionError);

  mtls::StructureBasis zero = toy_basis();
  zero.s[1] = {{2, 0, 0.0}};
  EXPECT_THROW(zero.validate(), mtls::DimensionError);

  mtls::StructureBasis oob = toy_basis();
  oob.s[1].push_back({5, 0, 1.0});
  EXPECT_THROW(oob.validate(), mtls::DimensionError);
}

TEST(Basis, ApplyMatchesDense) {
  const mtls::StructureBasis basis = toy_basis();
  mtls::Rng rng(4);
  const Vector x = rng.gauss_vec(2);
  const Vector y = rng.gauss_vec(3);
  for (Index i = 0; i < basis.q(); ++i) {
    EXPECT_LT((basis.apply(i, x) - basis.dense(i) * x).norm(), 1e-15);
    EXPECT_LT((basis.apply_t(i, y) - basis.dense(i).transpose() * y).norm(),
              1e-15);
  }
}

TEST(Toeplitz, BasisMatchesClosedForms) {
  const Index m = 17, omega = 3;
  Vector t_col(2 * omega + 1);
  for (Index i = 0; i < t_col.size(); ++i) t_col(i) = double(i + 1);
  const mtls::StructureBasis basis = mtls::toeplitz_intercept_basis(m, omega, t_col);
  EXPECT_EQ(basis.q(), 2 * omega + 2);
  EXPECT_EQ(basis.n, m - 2 * omega + 1);

  const Matrix a = mtls::reconstruct(basis);
  EXPECT_TRUE(a.col(0).isOnes());
  // banded lower Toeplitz: first column of the band is t_col
  for (Index i = 0; i < 2 * omega + 1; ++i) EXPECT_EQ(a(i, 1), t_col(i));
  EXPECT_EQ(a(2 * omega + 1, 1), 0.0);
  // diagonal constancy: a(i+1, j+1) = a(i, j) in the banded part
  for (Index j = 1; j + 1 < basis.n; ++j)
    for (Index i = 0; i + 1 < m; ++i)
      EXPECT_EQ(a(i + 1, j + 1), a(i, j)) << i << "," << j;

  mtls::Rng rng(6);
  const Vector x = rng.gauss_vec(basis.n);
  const Vector r = rng.gauss_vec(m);
  Matrix sx(m, basis.q()), str(basis.n, basis.q());
  for (Index i = 0; i < basis.q(); ++i) {
    sx.col(i) = basis.apply(i, x);
    str.col(i) = basis.apply_t(i, r);
  }
  EXPECT_LT((sx - mtls::toeplitz_sx_closed(m, omega, x)).norm(), 1e-14);
  EXPECT_LT((str - mtls::toeplitz_str_closed(m, omega, r)).norm(), 1e-14);
}

// K Phi assembled from sparse products must equal the explicit product of
// the dense Jacobian with the dense structure map Phi.
TEST(Structured, KPhiMatchesExplicitProduct) {
  const Index m = 15, omega = 2;
  Vector t_col(2 * omega + 1);
  t_col << 1, 2, 3, 4, 5;
  mtls::StructureBasis basis = mtls::toeplitz_intercept_basis(m, omega, t_col);

  mtls::Rng rng(12);
  mtls::MtlsProblem p;
  p.a = mtls::reconstruct(basis);
  p.b = rng.uniform_vec(m);
  p.n1 = 1;
  const mtls::MtlsSolution sol = mtls::solve(p);

  const mtls::Matrix kphi = mtls::k_phi_structured(sol, basis);
  ASSERT_EQ(kphi.rows(), p.n());
  ASSERT_EQ(kphi.cols(), basis.q() + m);

  const mtls::JacobianMatrix jac = mtls::jacobian(sol);
  Matrix phi = Matrix::Zero(m * (p.n() + 1), basis.q() + m);
  for (Index i = 0; i < basis.q(); ++i)
    phi.col(i).head(m * p.n()) = mtls::vec(basis.dense(i));
  phi.bottomRightCorner(m, m) = Matrix::Identity(m, m);

  const Matrix want = jac.k * phi;
  EXPECT_LT((kphi - want).norm() / want.norm(), 1e-12);
}

TEST(Structured, ConditionNumbersAndDomination) {
  const Index m = 15, omega = 2;
  Vector t_col(2 * omega + 1);
  t_col << 1, 1, 2, 3, 5;
  mtls::StructureBasis basis = mtls::toeplitz_intercept_basis(m, omega, t_col);

  mtls::Rng rng(13);
  mtls::MtlsProblem p;
  p.a = mtls::reconstruct(basis);
  p.b = rng.uniform_vec(m);
  p.n1 = 1;
  const mtls::MtlsSolution sol = mtls::solve(p);

  const mtls::StructuredReport rep = mtls::structured_condition_numbers(sol, basis);
  EXPECT_GT(rep.kappa_s, 0.0);
  EXPECT_GT(rep.mixed_s, 0.0);

  // with nonnegative disjoint-support basis entries, |K Phi| |alpha| <=
  // |K| vec(|A|), so the structured mixed number is dominated by the
  // unstructured one
  const mtls::MixedCompw exact = mtls::mixed_compw_exact(sol);
  EXPECT_LE(rep.mixed_s, exact.mixed * (1 + 1e-12));
  if (!exact.compw_infinite && !rep.compw_infinite)
    EXPECT_LE(rep.compw_s, exact.compw * (1 + 1e-12));
}

TEST(Structured, BasisFileRoundTrip) {
  const mtls::StructureBasis basis = toy_basis();
  const auto path = std::filesystem::temp_directory_path() / "mtls_basis_rt.txt";
  mtls::write_basis_file(path.string(), basis);
  const mtls::StructureBasis back = mtls::read_basis_file(path.string());
  std::filesystem::remove(path);

  EXPECT_EQ(back.m, basis.m);
  EXPECT_EQ(back.n, basis.n);
  EXPECT_EQ(back.q(), basis.q());
  for (Index i = 0; i < basis.q(); ++i) {
    ASSERT_EQ(back.s[size_t(i)].size(), basis.s[size_t(i)].size());
    EXPECT_EQ((back.dense(i) - basis.dense(i)).norm(), 0.0);
  }
  // alpha is not stored in the file; recover it by projection
  const Vector alpha = mtls::project_alpha(back, mtls::reconstruct(basis));
  EXPECT_LT((alpha - basis.alpha).norm(), 1e-14);
}

TEST(Structured, ReadBasisRejectsGarbage) {
  const auto path = std::filesystem::temp_directory_path() / "mtls_basis_bad.txt";
  {
    std::ofstream os(path);
    os << "3 2 2\n1\n9 9 1.0\n1\n1 1 1.0\n";  // entry out of bounds
  }
  EXPECT_THROW(mtls::read_basis_file(path.string()), mtls::DimensionError);
  std::filesystem::remove(path);
}

}  // namespace
