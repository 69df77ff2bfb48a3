#pragma once

// Structured condition numbers. A structured matrix class is a span of
// sparse basis matrices S_1..S_q with A = sum alpha_i S_i; perturbations are
// restricted to the same span for A and left unrestricted for b, i.e.
// vec([dA, db]) = Phi [dalpha; db] with Phi = blkdiag([vec(S_1)..vec(S_q)], I_m).
// The map K Phi is assembled column by column:
//
//   K Phi = -P^{-1}( A^T H0 [S_1 x, .., S_q x, -I_m]
//                    + [S_1^T r, .., S_q^T r, O_{n x m}] )
//
// so neither Phi nor K is ever formed.

#include <fstream>
#include <sstream>
#include <vector>

#include "mtls/condition.hpp"

namespace mtls {

struct CooEntry {
  Index row = 0, col = 0;
  double value = 0.0;
};

using SparseMat = std::vector<CooEntry>;

struct StructureBasis {
  Index m = 0, n = 0;
  std::vector<SparseMat> s;  // q basis matrices, sparse coordinate lists
  Vector alpha;              // coefficients with A = sum alpha_i S_i

  Index q() const { return Index(s.size()); }

  Matrix dense(Index i) const {
    Matrix out = Matrix::Zero(m, n);
    for (const CooEntry& e : s[size_t(i)]) out(e.row, e.col) += e.value;
    return out;
  }

  // S_i x and S_i^T y without densifying.
  Vector apply(Index i, const Vector& x) const {
    Vector out = Vector::Zero(m);
    for (const CooEntry& e : s[size_t(i)]) out(e.row) += e.value * x(e.col);
    return out;
  }

  Vector apply_t(Index i, const Vector& y) const {
    Vector out = Vector::Zero(n);
    for (const CooEntry& e : s[size_t(i)]) out(e.col) += e.value * y(e.row);
    return out;
  }

  // vec(S_i) columns of Phi_A must be mutually orthogonal with full column
  // rank; each row of Phi_A may hold at most one nonzero (each matrix entry
  // of A belongs to at most one basis matrix).
  void validate() const {
    require(m >= 1 && n >= 1 && q() >= 1, "basis: empty");
    require(alpha.size() == q(), "basis: alpha length mismatch");
    Matrix owner = Matrix::Constant(m, n, -1.0);
    for (Index i = 0; i < q(); ++i) {
      double norm2 = 0.0;
      for (const CooEntry& e : s[size_t(i)]) {
        require(e.row >= 0 && e.row < m && e.col >= 0 && e.col < n,
                "basis: entry out of bounds");
        if (e.value == 0.0) continue;
        norm2 += e.value * e.value;
        double& o = owner(e.row, e.col);
        if (o >= 0 && o != double(i))
          throw DimensionError("basis: overlapping support between S_" +
                               std::to_string(Index(o) + 1) + " and S_" +
                               std::to_string(i + 1) +
                               "; vec columns not orthogonal");
        o = double(i);
      }
      require(norm2 > 0.0, "basis: S_" + std::to_string(i + 1) + " is zero");
    }
  }
};

inline Matrix reconstruct(const StructureBasis& basis) {
  Matrix a = Matrix::Zero(basis.m, basis.n);
  for (Index i = 0; i < basis.q(); ++i)
    for (const CooEntry& e : basis.s[size_t(i)])
      a(e.row, e.col) += basis.alpha(i) * e.value;
  return a;
}

// Recover alpha for a matrix known to lie in the span: with orthogonal
// columns vec(S_i), alpha_i = <vec(S_i), vec(A)> / ||vec(S_i)||^2. Throws if
// A is not in the span (relative defect above tol).
inline Vector project_alpha(const StructureBasis& basis, const Matrix& a,
                            double tol = 1e-10) {
  require(a.rows() == basis.m && a.cols() == basis.n,
          "project_alpha: shape mismatch");
  Vector alpha(basis.q());
  for (Index i = 0; i < basis.q(); ++i) {
    double dot = 0.0, norm2 = 0.0;
    for (const CooEntry& e : basis.s[size_t(i)]) {
      dot += e.value * a(e.row, e.col);
      norm2 += e.value * e.value;
    }
    alpha(i) = dot / norm2;
  }
  StructureBasis probe = basis;
  probe.alpha = alpha;
  const double defect = (reconstruct(probe) - a).norm();
  if (defect > tol * std::max(1.0, a.norm()))
    throw DimensionError("project_alpha: matrix not in the structure span");
  return alpha;
}

// K Phi as an n x (q+m) matrix, assembled from sparse products only.
inline Matrix k_phi_structured(const MtlsSolution& sol,
                               const StructureBasis& basis) {
  require(basis.m == sol.m() && basis.n == sol.n(),
          "k_phi_structured: basis shape mismatch");
  if (sol.r.norm() == 0.0)
    throw ConsistentSystem("k_phi_structured: zero residual");
  const Index q = basis.q(), m = sol.m(), n = sol.n();
  const Matrix& a = sol.problem.a;
  const Vector ar = a.transpose() * sol.r;
  const double rr = sol.r.squaredNorm();

  Matrix rhs(n, q + m);
  for (Index i = 0; i < q; ++i) {
    const Vector sx = basis.apply(i, sol.x);
    // A^T H0 (S_i x) + S_i^T r
    rhs.col(i) = a.transpose() * sx - (2.0 * sol.r.dot(sx) / rr) * ar +
                 basis.apply_t(i, sol.r);
  }
  // b block: A^T H0 (-I_m)
  rhs.rightCols(m) =
      -(a.transpose() - (2.0 / rr) * ar * sol.r.transpose());
  const ShiftedGramSolver p(sol.fact, sol.sigma2);
  return -p.solve(rhs);
}

struct StructuredReport {
  double kappa_s = 0.0;  // relative
  double mixed_s = 0.0;
  double compw_s = 0.0;
  bool compw_infinite = false;
};

// b_pattern defaults to |b|: the componentwise weights for the unstructured
// b block of Phi.
inline StructuredReport structured_condition_numbers(
    const MtlsSolution& sol, const StructureBasis& basis,
    const Vector& b_pattern = Vector()) {
  const Matrix kphi = k_phi_structured(sol, basis);
  const Index q = basis.q(), m = sol.m();

  require(b_pattern.size() == 0 || b_pattern.size() == m,
          "structured_condition_numbers: bad b pattern length");
  Vector weights(q + m);
  weights.head(q) = basis.alpha.cwiseAbs();
  weights.tail(m) = b_pattern.size() > 0 ? b_pattern.cwiseAbs().eval()
                                         : sol.problem.b.cwiseAbs().eval();

  Vector ab(q + m);
  ab << basis.alpha, sol.problem.b;

  StructuredReport rep;
  rep.kappa_s = spectral_norm(kphi) * ab.norm() / sol.x.norm();
  const Vector u = kphi.cwiseAbs() * weights;
  const MixedCompw mc = detail::ratios_from(u, sol.x);
  rep.mixed_s = mc.mixed;
  rep.compw_s = mc.compw;
  rep.compw_infinite = mc.compw_infinite;
  return rep;
}

// Example 3(b) basis: A = [1_m, T] with T banded lower Toeplitz, first
// column t. S_1 carries the intercept column; S_{k+1} carries the k-th
// Toeplitz diagonal, k = 1..2w+1.
inline StructureBasis toeplitz_intercept_basis(Index m, Index omega,
                                               const Vector& t_col) {
  if (m <= 2 * omega) throw DimensionError("toeplitz basis: need m > 2*omega");
  require(omega >= 0 && t_col.size() == 2 * omega + 1,
          "toeplitz basis: t_col must have 2*omega+1 entries");
  const Index n = m - 2 * omega + 1;  // intercept + m-2w Toeplitz columns
  const Index band = 2 * omega + 1;

  StructureBasis basis;
  basis.m = m;
  basis.n = n;
  basis.s.resize(size_t(band) + 1);
  for (Index i = 0; i < m; ++i) basis.s[0].push_back({i, 0, 1.0});
  // S_{k+1}(c + k, c + 1) = 1 for c = 0..m-2w-1 (k-th subdiagonal of T,
  // shifted one column right for the intercept).
  for (Index k = 0; k < band; ++k)
    for (Index c = 0; c < m - 2 * omega; ++c)
      basis.s[size_t(k) + 1].push_back({c + k, c + 1, 1.0});

  basis.alpha.resize(band + 1);
  basis.alpha(0) = 1.0;
  basis.alpha.tail(band) = t_col;
  basis.validate();
  return basis;
}

// Closed forms for the Toeplitz-intercept structure, used as an independent
// route in tests.
//
// [S_1 x, .., S_q x] = [x_1 1_m, T_x]: T_x is m x (2w+1), column k the
// (k-1)-fold down-shift of [x_2, .., x_{m-2w+1}, 0, .., 0].
inline Matrix toeplitz_sx_closed(Index m, Index omega, const Vector& x) {
  const Index band = 2 * omega + 1;
  require(x.size() == m - 2 * omega + 1, "toeplitz_sx_closed: bad x length");
  Matrix out = Matrix::Zero(m, band + 1);
  out.col(0).setConstant(x(0));
  for (Index k = 0; k < band; ++k)
    out.col(k + 1).segment(k, m - 2 * omega) = x.tail(m - 2 * omega);
  return out;
}

// [S_1^T r, .., S_q^T r] = blkdiag(1_m^T r, H_r): H_r is the
// (m-2w) x (2w+1) Hankel slice H_r(c, k) = r(c + k).
inline Matrix toeplitz_str_closed(Index m, Index omega, const Vector& r) {
  const Index band = 2 * omega + 1;
  require(r.size() == m, "toeplitz_str_closed: bad r length");
  const Index rows = m - 2 * omega + 1;
  Matrix out = Matrix::Zero(rows, band + 1);
  out(0, 0) = r.sum();
  for (Index k = 0; k < band; ++k)
    out.col(k + 1).tail(rows - 1) = r.segment(k, m - 2 * omega);
  return out;
}

// Text serialization: header "m n q", then per matrix a line "nnz" followed
// by nnz lines "row col value" (1-based). '%' starts a comment.
inline void write_basis(std::ostream& os, const StructureBasis& basis) {
  os << basis.m << " " << basis.n << " " << basis.q() << "\n";
  os.precision(17);
  for (Index i = 0; i < basis.q(); ++i) {
    os << basis.s[size_t(i)].size() << "\n";
    for (const CooEntry& e : basis.s[size_t(i)])
      os << e.row + 1 << " " << e.col + 1 << " " << e.value << "\n";
  }
}

namespace detail {

inline std::string next_data_line(std::istream& is, const char* who) {
  std::string line;
  while (std::getline(is, line)) {
    const size_t pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '%') continue;
    return line;
  }
  throw IoError(std::string(who) + ": unexpected end of file");
}

}  // namespace detail

inline StructureBasis read_basis(std::istream& is) {
  StructureBasis basis;
  Index q = 0;
  {
    std::istringstream hdr(detail::next_data_line(is, "read_basis"));
    if (!(hdr >> basis.m >> basis.n >> q) || basis.m < 1 || basis.n < 1 || q < 1)
      throw IoError("read_basis: malformed header, expected 'm n q'");
  }
  basis.s.resize(size_t(q));
  for (Index i = 0; i < q; ++i) {
    std::istringstream cnt(detail::next_data_line(is, "read_basis"));
    long long nnz = -1;
    if (!(cnt >> nnz) || nnz < 1)
      throw IoError("read_basis: malformed entry count for S_" +
                    std::to_string(i + 1));
    for (long long k = 0; k < nnz; ++k) {
      std::istringstream ent(detail::next_data_line(is, "read_basis"));
      CooEntry e;
      if (!(ent >> e.row >> e.col >> e.value))
        throw IoError("read_basis: malformed coordinate triplet");
      e.row -= 1;
      e.col -= 1;
      basis.s[size_t(i)].push_back(e);
    }
  }
  basis.alpha = Vector::Zero(q);  // recovered later via project_alpha
  return basis;
}

inline void write_basis_file(const std::string& path, const StructureBasis& b) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  write_basis(os, b);
}

inline StructureBasis read_basis_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path);
  StructureBasis b = read_basis(is);
  b.validate();
  return b;
}

}  // namespace mtls
