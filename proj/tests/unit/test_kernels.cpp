#include <gtest/gtest.h>

#include "mtls/kernels.hpp"
#include "mtls/rng.hpp"

namespace {

using mtls::Index;
using mtls::Matrix;
using mtls::Vector;

Matrix golden_2x2() {
  Matrix a(2, 2);
  a << 2, 1, 0, 1;
  return a;
}

// Singular values of [[2,1],[0,1]] are sqrt(3 +/- sqrt(5)).
TEST(Svd, GoldenSingularValues) {
  const Vector s = mtls::singular_values(golden_2x2());
  EXPECT_NEAR(s(0), std::sqrt(3.0 + std::sqrt(5.0)), 1e-14);
  EXPECT_NEAR(s(1), std::sqrt(3.0 - std::sqrt(5.0)), 1e-14);
  EXPECT_NEAR(mtls::spectral_norm(golden_2x2()), std::sqrt(3.0 + std::sqrt(5.0)),
              1e-14);
}

TEST(Svd, ReconstructionAndOrthogonality) {
  mtls::Rng rng(42);
  const Matrix a = rng.gauss_mat(7, 4);
  const mtls::SvdResult dec = mtls::svd(a);
  const Matrix rebuilt = dec.u * dec.sigma.asDiagonal() * dec.v.transpose();
  EXPECT_LT((rebuilt - a).norm(), 1e-12 * a.norm());
  EXPECT_LT((dec.u.transpose() * dec.u - Matrix::Identity(4, 4)).norm(), 1e-13);
  EXPECT_LT((dec.v.transpose() * dec.v - Matrix::Identity(4, 4)).norm(), 1e-13);
  for (Index i = 1; i < dec.sigma.size(); ++i)
    EXPECT_GE(dec.sigma(i - 1), dec.sigma(i));
}

TEST(Svd, FullVHasSquareV) {
  mtls::Rng rng(3);
  const Matrix a = rng.gauss_mat(6, 4);
  const mtls::SvdResult dec = mtls::svd(a, true);
  EXPECT_EQ(dec.v.rows(), 4);
  EXPECT_EQ(dec.v.cols(), 4);
  EXPECT_LT((dec.v * dec.v.transpose() - Matrix::Identity(4, 4)).norm(), 1e-13);
}

TEST(Svd, RejectsNonFinite) {
  Matrix a = golden_2x2();
  a(0, 0) = std::nan("");
  EXPECT_THROW(mtls::svd(a), mtls::DimensionError);
}

TEST(VecOps, ColumnMajorOrder) {
  Matrix a(2, 2);
  a << 1, 3, 2, 4;  // columns (1,2) and (3,4)
  const Vector v = mtls::vec(a);
  Vector want(4);
  want << 1, 2, 3, 4;
  EXPECT_EQ(v, want);
  EXPECT_EQ(mtls::unvec(v, 2, 2), a);
  EXPECT_THROW(mtls::unvec(v, 3, 2), mtls::DimensionError);
}

TEST(VecOps, KroneckerGolden) {
  Matrix a(2, 2), b(2, 2);
  a << 1, 2, 3, 4;
  b << 0, 5, 6, 7;
  const Matrix k = mtls::kron(a, b);
  ASSERT_EQ(k.rows(), 4);
  ASSERT_EQ(k.cols(), 4);
  // top-left block is a(0,0) * b, bottom-right is a(1,1) * b
  EXPECT_EQ(k.block(0, 0, 2, 2), b);
  EXPECT_EQ(k.block(2, 2, 2, 2), 4.0 * b);
  // vec identity: (I kron a) vec(x) = vec(a x)
  Matrix x(2, 3);
  x << 1, -1, 2, 0, 3, 1;
  const Matrix lhs =
      mtls::unvec(mtls::kron(Matrix::Identity(3, 3), a) * mtls::vec(x), 2, 3);
  EXPECT_LT((lhs - a * x).norm(), 1e-14);
}

TEST(VecOps, KroneckerRespectsCap) {
  mtls::Config cfg;
  cfg.dense_cap = 10;
  EXPECT_THROW(mtls::kron(Matrix::Identity(4, 4), Matrix::Identity(4, 4), cfg),
               mtls::SizeOverflow);
}

TEST(VecOps, PermutationTransposesVec) {
  mtls::Rng rng(11);
  const Matrix a = rng.gauss_mat(3, 5);
  const Matrix pi = mtls::vec_permutation(3, 5);
  EXPECT_LT((pi * mtls::vec(a) - mtls::vec(Matrix(a.transpose()))).norm(), 1e-15);
  // the index map agrees with the dense permutation
  for (Index k = 0; k < 15; ++k) {
    const Index row = mtls::vec_perm_index(3, 5, k);
    EXPECT_EQ(pi(row, k), 1.0);
  }
}

TEST(QrPartition, ReproducesInput) {
  mtls::Rng rng(5);
  const Matrix a = rng.gauss_mat(8, 4);
  const Vector b = rng.gauss_vec(8);
  const mtls::PartitionedFactorization f = mtls::qr_partition(a, b, 2);
  EXPECT_EQ(f.m, 8);
  EXPECT_EQ(f.n, 4);
  EXPECT_EQ(f.n2(), 2);
  ASSERT_TRUE(f.has_q());
  Matrix ab(8, 5);
  ab << a, b;
  EXPECT_LT((f.q * f.assemble() - ab).norm(), 1e-13 * ab.norm());
  EXPECT_LT((f.q.transpose() * f.q - Matrix::Identity(8, 8)).norm(), 1e-13);
  // sign normalization: nonnegative diagonal
  for (Index i = 0; i < 4; ++i) EXPECT_GE(f.assemble()(i, i), 0.0);
  // R11 upper triangular
  EXPECT_EQ(f.r11(1, 0), 0.0);
  // cached singular values match a direct SVD of the R22 block
  Matrix r22_top = f.r22.topRows(2);
  const Vector s = mtls::singular_values(r22_top);
  EXPECT_LT((f.r22_sigma - s).norm(), 1e-12 * s(0));
}

TEST(QrPartition, SkipsQAboveCap) {
  mtls::Config cfg;
  cfg.q_cap = 7;  // Q is m x m; skip materializing above this m
  mtls::Rng rng(5);
  const Matrix a = rng.gauss_mat(8, 4);
  const Vector b = rng.gauss_vec(8);
  const mtls::PartitionedFactorization f = mtls::qr_partition(a, b, 2, cfg);
  EXPECT_FALSE(f.has_q());
}

TEST(QrPartition, DetectsRankDeficiency) {
  Matrix a(4, 3);
  a.col(0) = Vector::Ones(4);
  a.col(1) = Vector::Ones(4);  // duplicate column
  a.col(2) = Vector::LinSpaced(4, 1, 4);
  const Vector b = Vector::LinSpaced(4, 0, 3);
  EXPECT_THROW(mtls::qr_partition(a, b, 1), mtls::RankDeficient);
}

TEST(QrPartition, RejectsBadShapes) {
  const Matrix a = Matrix::Identity(3, 2);
  const Vector b = Vector::Ones(3);
  EXPECT_THROW(mtls::qr_partition(a, b, 5), mtls::DimensionError);
  EXPECT_THROW(mtls::qr_partition(a, Vector::Ones(2), 1), mtls::DimensionError);
  EXPECT_THROW(mtls::qr_partition(Matrix::Identity(2, 3), Vector::Ones(2), 0),
               mtls::DimensionError);
}

TEST(Rng, DeterministicStreams) {
  mtls::Rng a(123), b(123), c(124);
  const Vector va = a.gauss_vec(32);
  const Vector vb = b.gauss_vec(32);
  EXPECT_EQ(va, vb);
  EXPECT_NE(va, c.gauss_vec(32));
}

TEST(Rng, Ranges) {
  mtls::Rng rng(9);
  for (int i = 0; i < 2000; ++i) {
    const double u = rng.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    const double s = rng.sym_uniform();
    EXPECT_GE(s, -1.0);
    EXPECT_LT(s, 1.0);
  }
}

TEST(Rng, GaussMomentsRoughly) {
  mtls::Rng rng(77);
  const Vector v = rng.gauss_vec(20000);
  EXPECT_LT(std::abs(v.mean()), 0.03);
  EXPECT_NEAR(v.squaredNorm() / double(v.size()), 1.0, 0.05);
}

TEST(Rng, UnitVectorIsNormalized) {
  mtls::Rng rng(15);
  const Vector v = rng.unit_vec(10);
  EXPECT_NEAR(v.norm(), 1.0, 1e-14);
}

TEST(Rng, MatricesFillColumnMajor) {
  mtls::Rng a(31), b(31);
  const Matrix ma = a.gauss_mat(3, 2);
  const Vector vb = b.gauss_vec(6);
  EXPECT_EQ(mtls::vec(ma), vb);
}

}  // namespace
