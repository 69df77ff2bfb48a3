#pragma once

#include <Eigen/Dense>

#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

namespace mtls {

using Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kEps = std::numeric_limits<double>::epsilon();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A exactly rank deficient (or numerically so) in its exact column block,
// or [A b] degenerate enough that the QR partition is meaningless.
struct RankDeficient : Error {
  using Error::Error;
};

// Genericity condition sigma_min(R22) > sigma_{n2+1}([R22 R2b]) violated,
// or a shifted Gram matrix that should be positive definite is not.
struct NonGeneric : Error {
  using Error::Error;
};

// b lies in the range of A up to tolerance; the residual-based quantities
// (reflector H0, condition numbers with 1/||r|| terms) are undefined.
struct ConsistentSystem : Error {
  using Error::Error;
};

// A requested dense object (Kronecker product, explicit Jacobian, permutation
// matrix) would exceed the configured entry cap.
struct SizeOverflow : Error {
  using Error::Error;
};

// Iterative kernel (SVD) failed to converge. Rare with dense inputs.
struct NoConvergence : Error {
  using Error::Error;
};

// Shape/precondition violations and malformed numeric input.
struct DimensionError : Error {
  using Error::Error;
};

// Unreadable or syntactically malformed input file.
struct IoError : Error {
  using Error::Error;
};

struct Config {
  // Relative factorization / decomposition checks (tests assert these).
  double tol_fact = 1e-12;
  double tol_svd = 1e-12;
  // Multipliers on machine epsilon; the absolute tolerances are formed
  // against the relevant largest singular value at the point of use.
  double rank_tol_factor = 1.0;      // tol_rank = factor * max(m,n) * eps * sigma_max
  double gap_tol_factor = 1e2;       // tol_gap = factor * eps * sigma_1([R22 R2b])
  double pivot_tol_factor = 1e2;     // |v_{n2+1}| >= factor * eps
  double consistent_tol_factor = 1e3;  // ||r|| <= factor * eps * ||b||
  double stationarity_tol_factor = 1e2;
  // Largest m for which qr_partition materializes the full Q factor.
  Index q_cap = 2000;
  // Entry-count cap for explicit dense Kronecker/Jacobian/permutation objects.
  double dense_cap = 1e7;
};

// Process-wide defaults. MTLS_DENSE_CAP overrides the dense entry cap.
inline const Config& default_config() {
  static const Config cfg = [] {
    Config c;
    if (const char* env = std::getenv("MTLS_DENSE_CAP")) {
      char* end = nullptr;
      const double v = std::strtod(env, &end);
      if (end != env && v > 0) c.dense_cap = v;
    }
    return c;
  }();
  return cfg;
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

}  // namespace mtls
