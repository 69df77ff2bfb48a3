#pragma once

// Solver for P = A^T A - sigma2 * W, the shifted Gram matrix that appears in
// every first-order quantity. In the QR coordinates P has the block form
//
//   P = [ R11^T R11        R11^T R12      ]
//       [ R12^T R11   R12^T R12 + S       ],   S = R22^T R22 - sigma2 I,
//
// so applications of P^{-1} reduce to triangular solves with R11 and a
// Cholesky solve with S. Under the genericity condition S is positive
// definite. P itself is never inverted densely; the dense P^{-1} returned by
// p_inverse_block() is assembled from the same pieces.

#include "mtls/solve.hpp"

namespace mtls {

class ShiftedGramSolver {
 public:
  ShiftedGramSolver(const PartitionedFactorization& f, double sigma2)
      : n1_(f.n1), n2_(f.n2()), r11_(f.r11), r12_(f.r12) {
    if (n2_ > 0) {
      const Matrix t22 = f.r22.topRows(n2_);  // rows below are zero
      Matrix s = t22.transpose() * t22;
      s.diagonal().array() -= sigma2;
      llt_.compute(s);
      if (llt_.info() != Eigen::Success)
        throw NonGeneric("shifted gram: R22^T R22 - sigma2 I not positive "
                         "definite; genericity condition violated");
    }
  }

  // Solve P Z = B for a block of right-hand sides.
  Matrix solve(const Matrix& b) const {
    require(b.rows() == n1_ + n2_, "shifted gram solve: bad row count");
    Matrix z(b.rows(), b.cols());
    if (n1_ == 0) {
      z = llt_.solve(b);
      return z;
    }
    const auto upper = r11_.triangularView<Eigen::Upper>();
    const Matrix u1 = upper.transpose().solve(b.topRows(n1_));
    if (n2_ > 0) {
      const Matrix z2 = llt_.solve(b.bottomRows(n2_) - r12_.transpose() * u1);
      z.bottomRows(n2_) = z2;
      z.topRows(n1_) = upper.solve(u1 - r12_ * z2);
    } else {
      z.topRows(n1_) = upper.solve(u1);
    }
    return z;
  }

  Vector solve(const Vector& b) const { return Vector(solve(Matrix(b))); }

  // Dense P^{-1}:
  //   [ (R11^T R11)^{-1} + X S^{-1} X^T   -X S^{-1} ]
  //   [          -S^{-1} X^T                 S^{-1} ],   X = R11^{-1} R12.
  Matrix dense() const {
    const Index n = n1_ + n2_;
    Matrix out(n, n);
    if (n1_ > 0) {
      const auto upper = r11_.triangularView<Eigen::Upper>();
      const Matrix r11_inv = upper.solve(Matrix::Identity(n1_, n1_));
      out.topLeftCorner(n1_, n1_) = r11_inv * r11_inv.transpose();
      if (n2_ > 0) {
        const Matrix x = upper.solve(r12_);
        const Matrix s_inv = llt_.solve(Matrix::Identity(n2_, n2_));
        const Matrix xs = x * s_inv;
        out.topLeftCorner(n1_, n1_) += xs * x.transpose();
        out.topRightCorner(n1_, n2_) = -xs;
        out.bottomLeftCorner(n2_, n1_) = -xs.transpose();
        out.bottomRightCorner(n2_, n2_) = s_inv;
      }
    } else {
      out = llt_.solve(Matrix::Identity(n2_, n2_));
    }
    // Symmetrize away the last rounding asymmetry.
    return 0.5 * (out + out.transpose());
  }

 private:
  Index n1_, n2_;
  Matrix r11_, r12_;
  Eigen::LLT<Matrix> llt_;
};

// Spec'd convenience: dense P^{-1} via the block formula.
inline Matrix p_inverse_block(const PartitionedFactorization& f, double sigma2) {
  return ShiftedGramSolver(f, sigma2).dense();
}

inline Matrix p_inverse_block(const MtlsSolution& sol) {
  return p_inverse_block(sol.fact, sol.sigma2);
}

}  // namespace mtls
