#pragma once

// Dense kernels used by everything above: partitioned QR of [A b], SVD
// wrappers, vec/kron utilities. Thin layer over Eigen so the rest of the
// library never touches decomposition classes directly.

#include <algorithm>
#include <cmath>

#include "mtls/common.hpp"

namespace mtls {

struct SvdResult {
  Matrix u;      // p x k, orthonormal columns (k = min(p, q))
  Vector sigma;  // k, descending, nonnegative
  Matrix v;      // q x k (or q x q when full_v requested)
};

namespace detail {

inline void check_finite(const Matrix& a, const char* who) {
  if (!a.allFinite()) throw DimensionError(std::string(who) + ": non-finite entries");
}

}  // namespace detail

// Thin SVD. full_v asks for the complete right factor, needed when the
// smallest right singular vector of a wide matrix spans the null space.
inline SvdResult svd(const Matrix& a, bool full_v = false) {
  require(a.rows() >= 1 && a.cols() >= 1, "svd: empty matrix");
  detail::check_finite(a, "svd");
  const unsigned options =
      Eigen::ComputeThinU | (full_v ? Eigen::ComputeFullV : Eigen::ComputeThinV);
  Eigen::BDCSVD<Matrix> dec(a, options);
  if (dec.info() != Eigen::Success) throw NoConvergence("svd: BDCSVD did not converge");
  return SvdResult{dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

inline Vector singular_values(const Matrix& a) {
  require(a.rows() >= 1 && a.cols() >= 1, "singular_values: empty matrix");
  detail::check_finite(a, "singular_values");
  Eigen::BDCSVD<Matrix> dec(a);
  if (dec.info() != Eigen::Success)
    throw NoConvergence("singular_values: BDCSVD did not converge");
  return dec.singularValues();
}

inline double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return singular_values(a)(0);
}

// Column-stacking vec and its inverse.
inline Vector vec(const Matrix& a) {
  return Eigen::Map<const Vector>(a.data(), a.size());
}

inline Matrix unvec(const Vector& v, Index rows, Index cols) {
  require(rows * cols == v.size(), "unvec: size mismatch");
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

namespace detail {

inline void check_dense_cap(double entries, const Config& cfg, const char* who) {
  if (entries > cfg.dense_cap)
    throw SizeOverflow(std::string(who) + ": would materialize " +
                       std::to_string(entries) + " entries (cap " +
                       std::to_string(cfg.dense_cap) + ", see MTLS_DENSE_CAP)");
}

}  // namespace detail

inline Matrix kron(const Matrix& a, const Matrix& b,
                   const Config& cfg = default_config()) {
  const double entries = double(a.rows()) * double(b.rows()) * double(a.cols()) *
                         double(b.cols());
  detail::check_dense_cap(entries, cfg, "kron");
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Row index of the single 1 in column k of the vec-permutation matrix
// Pi_{m,n}, defined by Pi_{m,n} vec(C) = vec(C^T) for C of size m x n.
inline Index vec_perm_index(Index m, Index n, Index k) {
  require(m >= 1 && n >= 1 && k >= 0 && k < m * n, "vec_perm_index: bad index");
  const Index i = k % m;  // row of C
  const Index j = k / m;  // col of C
  return j + i * n;
}

inline Matrix vec_permutation(Index m, Index n, const Config& cfg = default_config()) {
  require(m >= 1 && n >= 1, "vec_permutation: bad sizes");
  const double side = double(m) * double(n);
  detail::check_dense_cap(side * side, cfg, "vec_permutation");
  Matrix pi = Matrix::Zero(m * n, m * n);
  for (Index k = 0; k < m * n; ++k) pi(vec_perm_index(m, n, k), k) = 1.0;
  return pi;
}

// QR of the bordered matrix [A b] with A's first n1 columns treated as exact.
// Block layout of the m x (n+1) triangular factor:
//
//   [ R11  R12 | r1b ]   n1 rows
//   [  0   R22 | r2b ]   m - n1 rows
//
// R11 is n1 x n1 upper triangular with positive diagonal (sign-normalized),
// R22 is stored with its full m - n1 rows but only the top n2 are nonzero.
struct PartitionedFactorization {
  Index m = 0, n = 0, n1 = 0;
  Matrix r11, r12, r22;
  Vector r1b, r2b;
  Matrix q;            // m x m when retained, 0 x 0 otherwise
  Vector r22_sigma;    // singular values of R22 (n2 of them, descending)

  Index n2() const { return n - n1; }
  bool has_q() const { return q.size() > 0; }

  // Rebuild the full triangular factor; test helper.
  Matrix assemble() const {
    Matrix r = Matrix::Zero(m, n + 1);
    r.block(0, 0, n1, n1) = r11;
    r.block(0, n1, n1, n2()) = r12;
    r.block(n1, n1, m - n1, n2()) = r22;
    r.block(0, n, n1, 1) = r1b;
    r.block(n1, n, m - n1, 1) = r2b;
    return r;
  }
};

inline PartitionedFactorization qr_partition(const Matrix& a, const Vector& b,
                                             Index n1,
                                             const Config& cfg = default_config()) {
  const Index m = a.rows(), n = a.cols();
  require(m >= 1 && n >= 1 && m >= n, "qr_partition: need m >= n >= 1");
  require(b.size() == m, "qr_partition: b has wrong length");
  require(n1 >= 0 && n1 <= n, "qr_partition: n1 out of range");
  detail::check_finite(a, "qr_partition");
  detail::check_finite(b, "qr_partition");

  Matrix ab(m, n + 1);
  ab << a, b;

  Eigen::HouseholderQR<Matrix> qr(ab);
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();

  // Normalize the diagonal of R to be nonnegative so the factorization is
  // unique and reproducible across runs.
  Eigen::ArrayXd sign = Eigen::ArrayXd::Ones(m);
  const Index diag_len = std::min(m, n + 1);
  for (Index i = 0; i < diag_len; ++i)
    if (r(i, i) < 0) {
      sign(i) = -1.0;
      r.row(i) = -r.row(i);
    }

  PartitionedFactorization f;
  f.m = m;
  f.n = n;
  f.n1 = n1;
  const Index n2 = n - n1;
  f.r11 = r.block(0, 0, n1, n1);
  f.r12 = r.block(0, n1, n1, n2);
  f.r22 = r.block(n1, n1, m - n1, n2);
  f.r1b = r.block(0, n, n1, 1);
  f.r2b = r.block(n1, n, m - n1, 1);

  if (m <= cfg.q_cap) {
    Matrix q = qr.householderQ() * Matrix::Identity(m, m);
    f.q = q.array().rowwise() * sign.transpose();
  }

  // Rank checks against sigma_max([A b]), computed from the compact triangle.
  const Index tri_rows = std::min(m, n + 1);
  const double sigma_max = spectral_norm(r.topRows(tri_rows));
  const double tol_rank =
      cfg.rank_tol_factor * double(std::max(m, n)) * kEps * sigma_max;

  for (Index i = 0; i < n1; ++i)
    if (std::abs(f.r11(i, i)) < tol_rank)
      throw RankDeficient("qr_partition: exact column block numerically rank deficient");

  if (n2 > 0) {
    f.r22_sigma = singular_values(f.r22.topRows(std::min(m - n1, n2)));
    if (f.r22_sigma(n2 - 1) < tol_rank)
      throw RankDeficient("qr_partition: R22 numerically rank deficient");
  } else {
    f.r22_sigma = Vector();
  }
  return f;
}

}  // namespace mtls
