#pragma once

// Experiment harness: seeded problem generators for the three test families
// (transfer-function identification, gap-controlled random problems, and the
// intercept model in its delta-block and Toeplitz variants), perturbation
// draws, the epsilon backward-error measures, trial runners, and the
// finite-difference oracle.
//
// Everything here is a pure function of (parameters, seed): same seed, same
// bits. Draw order inside each generator is part of its contract and is
// noted next to the draws.

#include <cstdint>
#include <optional>
#include <vector>

#include "mtls/jacobian.hpp"
#include "mtls/condition.hpp"
#include "mtls/rng.hpp"
#include "mtls/structured.hpp"

namespace mtls {

// Transfer-function model: C(q^-1) y0(t) = B(q^-1) u0(t) with
// B = b_1 q^-1 + .. + b_{n1} q^-{n1}, C = 1 + c_1 q^-1 + .. + c_{n2} q^-{n2}.
// Inputs are exact, outputs carry white noise of the given variance; the
// regressor rows are phi(t) = [u(t-1)..u(t-n1), -y(t-1)..-y(t-n2)] and the
// right-hand side is y(t), so the output noise enters both the trailing n2
// columns of A and b.
//
// Draws, in order: B coefficients (uniform on [-1,1)), C coefficients
// (uniform on [-1,1), then rescaled so sum|c_i| <= 0.9 to keep the
// recursion stable), the input samples (standard normal), the output noise
// (standard normal).
inline MtlsProblem gen_transfer_function(Index m, Index n1, Index n2,
                                         double noise_var, std::uint64_t seed) {
  require(m >= n1 + n2 && n1 >= 1 && n2 >= 1,
          "gen_transfer_function: need m >= n1+n2, n1,n2 >= 1");
  require(noise_var >= 0.0, "gen_transfer_function: negative variance");
  Rng rng(seed);

  const Vector bc = rng.sym_uniform_vec(n1);
  Vector cc = rng.sym_uniform_vec(n2);
  const double csum = cc.cwiseAbs().sum();
  if (csum > 0.9) cc *= 0.9 / csum;

  const Index k0 = std::max(n1, n2);
  const Index total = k0 + m;
  const Vector u = rng.gauss_vec(total);
  const Vector noise = rng.gauss_vec(total);

  Vector y0 = Vector::Zero(total);
  for (Index t = 0; t < total; ++t) {
    double acc = 0.0;
    for (Index j = 0; j < n1; ++j)
      if (t - 1 - j >= 0) acc += bc(j) * u(t - 1 - j);
    for (Index i = 0; i < n2; ++i)
      if (t - 1 - i >= 0) acc -= cc(i) * y0(t - 1 - i);
    y0(t) = acc;
  }
  const Vector y = y0 + std::sqrt(noise_var) * noise;

  MtlsProblem prob;
  prob.n1 = n1;
  prob.a.resize(m, n1 + n2);
  prob.b.resize(m);
  for (Index row = 0; row < m; ++row) {
    const Index t = k0 + row;  // 0-based sample index of y(t) = b entry
    for (Index j = 0; j < n1; ++j) prob.a(row, j) = u(t - 1 - j);
    for (Index i = 0; i < n2; ++i) prob.a(row, n1 + i) = -y(t - 1 - i);
    prob.b(row) = y(t);
  }
  return prob;
}

// Gap-controlled random problems built in QR coordinates: the top block
// [R11 R12 R1b] is the R factor of a uniform n1 x (n+1) matrix, the bottom
// block [R22 R2b] the R factor of Y [D; O] Z^T with Householder reflectors
// Y = I - 2yy^T, Z = I - 2zz^T and D = diag(n2, n2-1, .., 1, 1-e_p). The
// singular values of [R22 R2b] are exactly D's diagonal, so
// sigma_{n2} - sigma_{n2+1} of that block is e_p and the genericity gap of
// the assembled problem lies in [0, e_p] by interlacing. The final [A b] is
// Q times the stacked triangle for a random orthogonal Q.
//
// Draws, in order: top block (uniform), y (normal, normalized), z (normal,
// normalized), the m x m Gaussian matrix behind Q.
inline MtlsProblem gen_gap_controlled(Index m, Index n, Index n1, double e_p,
                                      std::uint64_t seed) {
  require(m > n && n >= 1 && n1 >= 0 && n1 < n,
          "gen_gap_controlled: need m > n > n1 >= 0 and n2 >= 1");
  require(e_p > 0.0 && e_p < 1.0, "gen_gap_controlled: need 0 < e_p < 1");
  Rng rng(seed);
  const Index n2 = n - n1;

  Matrix rtilde = Matrix::Zero(m, n + 1);
  if (n1 > 0) {
    const Matrix top = rng.uniform_mat(n1, n + 1);
    Eigen::HouseholderQR<Matrix> qr(top);
    rtilde.topRows(n1) =
        Matrix(qr.matrixQR().triangularView<Eigen::Upper>()).topRows(n1);
  }

  const Vector y = rng.unit_vec(m - n1);
  const Vector z = rng.unit_vec(n2 + 1);
  Matrix d = Matrix::Zero(m - n1, n2 + 1);
  for (Index i = 0; i <= n2; ++i) d(i, i) = i < n2 ? double(n2 - i) : 1.0 - e_p;
  const Matrix dz = d - 2.0 * (d * z) * z.transpose();      // [D; O] Z^T
  const Matrix body = dz - 2.0 * y * (y.transpose() * dz);  // Y [D; O] Z^T
  Eigen::HouseholderQR<Matrix> qr2(body);
  rtilde.block(n1, n1, m - n1, n2 + 1) =
      Matrix(qr2.matrixQR().triangularView<Eigen::Upper>()).topRows(m - n1);

  const Matrix g = rng.gauss_mat(m, m);
  Eigen::HouseholderQR<Matrix> qrq(g);
  const Matrix ab = qrq.householderQ() * rtilde;

  MtlsProblem prob;
  prob.a = ab.leftCols(n);
  prob.b = ab.col(n);
  prob.n1 = n1;
  return prob;
}

// Intercept model A = [1_m, C].
enum class InterceptMode { kDeltaBlock, kToeplitz };

struct InterceptParams {
  double delta = 1e-2;   // delta-block: the tiny diagonal parameter
  Index n1 = 1;          // delta-block: 1 or 3 exact columns
  Index omega = 8;       // Toeplitz: half-bandwidth
  double lambda = 1.0;   // Toeplitz: scale of b
};

struct InterceptProblem {
  MtlsProblem problem;
  std::optional<StructureBasis> basis;  // Toeplitz mode only
};

// Delta-block variant: the fixed 6 x 4 pattern
//   [ d 0 0 0; 0 d 0 0; 0 0 0 1; 0 0 1 0; 0 0 1 0; 0 0 0 d ]
// bordered by the intercept column. Toeplitz variant: banded lower Toeplitz
// C with first column 1..2w+1 then zeros, b = lambda * uniform vector.
// Draws, in order: the b vector (uniform).
inline InterceptProblem gen_intercept(Index m, InterceptMode mode,
                                      const InterceptParams& params,
                                      std::uint64_t seed) {
  Rng rng(seed);
  InterceptProblem out;
  if (mode == InterceptMode::kDeltaBlock) {
    require(m == 6, "gen_intercept: delta-block variant is the fixed 6 x 5 problem");
    require(params.n1 == 1 || params.n1 == 3, "gen_intercept: n1 must be 1 or 3");
    const double d = params.delta;
    Matrix c(6, 4);
    c << d, 0, 0, 0,
         0, d, 0, 0,
         0, 0, 0, 1,
         0, 0, 1, 0,
         0, 0, 1, 0,
         0, 0, 0, d;
    out.problem.a.resize(6, 5);
    out.problem.a.col(0).setOnes();
    out.problem.a.rightCols(4) = c;
    out.problem.b = rng.uniform_vec(6);
    out.problem.n1 = params.n1;
    return out;
  }
  Vector t_col(2 * params.omega + 1);
  for (Index i = 0; i < t_col.size(); ++i) t_col(i) = double(i + 1);
  StructureBasis basis = toeplitz_intercept_basis(m, params.omega, t_col);
  out.problem.a = reconstruct(basis);
  out.problem.b = params.lambda * rng.uniform_vec(m);
  out.problem.n1 = 1;
  out.basis = basis;
  return out;
}

struct Perturbation {
  Matrix da;
  Vector db;
  Vector dalpha;  // structured draws only; empty otherwise
};

// Entrywise-proportional draw dA = eps * U ⊙ A, db = eps * u ⊙ b with one
// uniform m x (n+1) matrix U | u drawn column-major over [A, b]. Columns
// listed in exact_cols are zeroed afterwards, so zero entries of A always
// stay zero and |dA| <= eps |A|, |db| <= eps |b| hold by construction.
inline Perturbation perturb_entrywise(const MtlsProblem& prob, double eps,
                                      std::uint64_t seed,
                                      const std::vector<Index>& exact_cols = {}) {
  require(eps >= 0.0, "perturb_entrywise: negative epsilon");
  Rng rng(seed);
  const Matrix u = rng.uniform_mat(prob.m(), prob.n() + 1);
  Perturbation p;
  p.da = eps * u.leftCols(prob.n()).cwiseProduct(prob.a);
  p.db = eps * u.col(prob.n()).cwiseProduct(prob.b);
  for (Index c : exact_cols) {
    require(c >= 0 && c < prob.n(), "perturb_entrywise: exact column out of range");
    p.da.col(c).setZero();
  }
  return p;
}

// Structure-respecting draw: dalpha = eps * g ⊙ alpha (Gaussian), optionally
// with the first coefficient pinned to zero (the intercept column is exact),
// db = eps * g' ⊙ b. dA is the basis combination of dalpha.
// Draws, in order: one normal per alpha coefficient, then one per b entry.
inline Perturbation perturb_structured(const StructureBasis& basis,
                                       const Vector& b, double eps,
                                       std::uint64_t seed,
                                       bool pin_first_alpha = true) {
  require(eps >= 0.0, "perturb_structured: negative epsilon");
  Rng rng(seed);
  Perturbation p;
  p.dalpha = eps * rng.gauss_vec(basis.q()).cwiseProduct(basis.alpha);
  if (pin_first_alpha && basis.q() > 0) p.dalpha(0) = 0.0;
  p.db = eps * rng.gauss_vec(b.size()).cwiseProduct(b);
  StructureBasis d = basis;
  d.alpha = p.dalpha;
  p.da = reconstruct(d);
  return p;
}

struct EpsMeasures {
  double eps1 = 0.0;
  double eps2 = 0.0;           // max over finite entry ratios
  bool eps2_infinite = false;  // perturbation hits a zero data entry
  std::optional<double> eps1_s, eps2_s;
  bool eps2_s_infinite = false;
};

namespace detail {

inline void ratio_scan(const double* data, const double* delta, Index count,
                       double& acc, bool& inf_flag) {
  for (Index i = 0; i < count; ++i) {
    if (delta[i] == 0.0) continue;
    if (data[i] == 0.0)
      inf_flag = true;
    else
      acc = std::max(acc, std::abs(delta[i] / data[i]));
  }
}

}  // namespace detail

// eps1 = ||[dA db]||_F / ||[A b]||_F;
// eps2 = min{ eps : |dA| <= eps|A|, |db| <= eps|b| }, infinite when some
// nonzero perturbation sits on a zero data entry. Structured variants over
// (alpha, b) when alpha/dalpha are given.
inline EpsMeasures eps_measures(const Matrix& a, const Vector& b,
                                const Matrix& da, const Vector& db,
                                const Vector& alpha = Vector(),
                                const Vector& dalpha = Vector()) {
  require(a.rows() == da.rows() && a.cols() == da.cols() && b.size() == db.size(),
          "eps_measures: shape mismatch");
  EpsMeasures out;
  const double base = std::sqrt(a.squaredNorm() + b.squaredNorm());
  out.eps1 = std::sqrt(da.squaredNorm() + db.squaredNorm()) / base;
  detail::ratio_scan(a.data(), da.data(), a.size(), out.eps2, out.eps2_infinite);
  detail::ratio_scan(b.data(), db.data(), b.size(), out.eps2, out.eps2_infinite);

  if (alpha.size() > 0) {
    require(dalpha.size() == alpha.size(), "eps_measures: dalpha mismatch");
    const double sbase = std::sqrt(alpha.squaredNorm() + b.squaredNorm());
    out.eps1_s = std::sqrt(dalpha.squaredNorm() + db.squaredNorm()) / sbase;
    double acc = 0.0;
    bool inf_flag = false;
    detail::ratio_scan(alpha.data(), dalpha.data(), alpha.size(), acc, inf_flag);
    detail::ratio_scan(b.data(), db.data(), b.size(), acc, inf_flag);
    out.eps2_s = acc;
    out.eps2_s_infinite = inf_flag;
  }
  return out;
}

enum class SkipKind { kNone, kNonGeneric, kConsistent };

struct TrialRecord {
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  double eps1 = 0.0, eps2 = 0.0;
  std::optional<double> eps1_s, eps2_s;
  double dx_abs_2 = 0.0;
  double dx_rel_2 = 0.0, dx_rel_inf = 0.0, dx_compw = 0.0;
  bool dx_compw_infinite = false;
  double eta_new = 0.0, eta_zy = 0.0;
  std::map<std::string, double> bounds;
  bool bounds_ok = true;
  bool skipped = false;
  SkipKind skip_kind = SkipKind::kNone;
  std::string skip_reason;
};

namespace detail {

inline void record_errors(TrialRecord& rec, const Vector& x, const Vector& xp) {
  const Vector dx = xp - x;
  rec.dx_abs_2 = dx.norm();
  rec.dx_rel_2 = dx.norm() / x.norm();
  rec.dx_rel_inf = dx.lpNorm<Eigen::Infinity>() / x.lpNorm<Eigen::Infinity>();
  rec.dx_compw = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    if (x(i) != 0.0)
      rec.dx_compw = std::max(rec.dx_compw, std::abs(dx(i) / x(i)));
    else if (dx(i) != 0.0)
      rec.dx_compw_infinite = true;
  }
}

}  // namespace detail

// One Table-1-style trial: perturb, re-solve, compare the observed solution
// change against both first-order maps, and record the five condition-number
// columns. NonGeneric/ConsistentSystem mark the record skipped.
inline TrialRecord run_first_order_trial(const MtlsProblem& prob, double eps,
                                         std::uint64_t seed,
                                         const Config& cfg = default_config()) {
  TrialRecord rec;
  rec.seed = seed;
  rec.epsilon = eps;
  try {
    // Refined solutions keep the measured solution change above the plain
    // solver's roundoff floor, so eta reflects the truncation error of the
    // linearization rather than rounding noise.
    const MtlsSolution sol = refine(solve(prob, cfg));
    const Perturbation p = perturb_entrywise(prob, eps, seed);
    MtlsProblem pert = prob;
    pert.a += p.da;
    pert.b += p.db;
    const MtlsSolution psol = refine(solve(pert, cfg));

    const EpsMeasures em = eps_measures(prob.a, prob.b, p.da, p.db);
    rec.eps1 = em.eps1;
    rec.eps2 = em.eps2;
    detail::record_errors(rec, sol.x, psol.x);

    const Vector dx = psol.x - sol.x;
    const JacobianMatrix k = jacobian(sol, cfg);
    const JacobianMatrix kzy = jacobian_kron(sol, cfg);
    Vector v(prob.m() * (prob.n() + 1));
    v << vec(p.da), p.db;
    rec.eta_new = (dx - k.k * v).norm();
    rec.eta_zy = (dx - kzy.k * v).norm();

    rec.bounds["k0"] = spectral_norm(k.k);
    rec.bounds["k0_zy"] = spectral_norm(kzy.k);
    rec.bounds["k_zy28"] = kappa_zy28(sol);
    rec.bounds["k2"] = kappa2(sol);
    rec.bounds["k4"] = kappa4(sol);
  } catch (const NonGeneric& e) {
    rec.skipped = true;
    rec.skip_kind = SkipKind::kNonGeneric;
    rec.skip_reason = e.what();
  } catch (const ConsistentSystem& e) {
    rec.skipped = true;
    rec.skip_kind = SkipKind::kConsistent;
    rec.skip_reason = e.what();
  }
  return rec;
}

// One Tables-2/3/4-style trial: perturb (entrywise with optional exact
// columns, or structure-respecting when a basis is given), re-solve, and
// record every bound next to its observed error. bounds_ok reports the
// per-trial domination check.
inline TrialRecord run_bound_trial(const MtlsProblem& prob, double eps,
                                   std::uint64_t seed,
                                   const std::vector<Index>& exact_cols = {},
                                   const StructureBasis* basis = nullptr,
                                   const Config& cfg = default_config()) {
  TrialRecord rec;
  rec.seed = seed;
  rec.epsilon = eps;
  try {
    // As in run_first_order_trial: refined solutions so that tight
    // componentwise bounds are compared against the actual perturbation
    // response, not against solver roundoff on badly scaled data.
    const MtlsSolution sol = refine(solve(prob, cfg));
    const Perturbation p =
        basis ? perturb_structured(*basis, prob.b, eps, seed)
              : perturb_entrywise(prob, eps, seed, exact_cols);
    MtlsProblem pert = prob;
    pert.a += p.da;
    pert.b += p.db;
    const MtlsSolution psol = refine(solve(pert, cfg));

    const EpsMeasures em =
        basis ? eps_measures(prob.a, prob.b, p.da, p.db, basis->alpha, p.dalpha)
              : eps_measures(prob.a, prob.b, p.da, p.db);
    rec.eps1 = em.eps1;
    rec.eps2 = em.eps2;
    rec.eps1_s = em.eps1_s;
    rec.eps2_s = em.eps2_s;
    detail::record_errors(rec, sol.x, psol.x);

    Matrix ab(prob.m(), prob.n() + 1);
    ab << prob.a, prob.b;
    const double scale = ab.norm() / sol.x.norm();

    const double k4 = kappa4(sol);
    rec.bounds["k4_rel"] = k4 * scale;
    rec.bounds["norm_bound_k4"] = rec.eps1 * k4 * scale;

    const PerturbationBound pb =
        perturbation_bound(sol, spectral_norm(p.da), p.db.norm());
    rec.bounds["kappa_a"] = pb.kappa_a;
    rec.bounds["kappa_b"] = pb.kappa_b;
    rec.bounds["norm_bound_split"] = pb.value;

    const MixedCompw upper = mixed_compw_upper(sol);
    rec.bounds["m_upper"] = upper.mixed;
    rec.bounds["c_upper"] = upper.compw;
    rec.bounds["mixed_bound_upper"] = rec.eps2 * upper.mixed;
    rec.bounds["compw_bound_upper"] = rec.eps2 * upper.compw;

    const double k_entries =
        double(prob.n()) * double(prob.m()) * double(prob.n() + 1);
    if (k_entries <= cfg.dense_cap) {
      const JacobianMatrix k = jacobian(sol, cfg);
      rec.bounds["k0_rel"] = spectral_norm(k.k) * scale;
      rec.bounds["norm_bound_k0"] = rec.eps1 * rec.bounds["k0_rel"];
      const MixedCompw exact = mixed_compw_exact(sol, cfg);
      rec.bounds["m_exact"] = exact.mixed;
      rec.bounds["c_exact"] = exact.compw;
      rec.bounds["mixed_bound_exact"] = rec.eps2 * exact.mixed;
      rec.bounds["compw_bound_exact"] = rec.eps2 * exact.compw;
    }

    if (basis) {
      const StructuredReport srep = structured_condition_numbers(sol, *basis);
      rec.bounds["kappa_s_rel"] = srep.kappa_s;
      rec.bounds["m_struct"] = srep.mixed_s;
      rec.bounds["c_struct"] = srep.compw_s;
      rec.bounds["norm_bound_struct"] = *em.eps1_s * srep.kappa_s;
      rec.bounds["mixed_bound_struct"] = *em.eps2_s * srep.mixed_s;
      rec.bounds["compw_bound_struct"] = *em.eps2_s * srep.compw_s;
    }

    auto dominated = [&](const char* key, double err) {
      auto it = rec.bounds.find(key);
      if (it != rec.bounds.end() && it->second < err) rec.bounds_ok = false;
    };
    dominated("norm_bound_k4", rec.dx_rel_2);
    dominated("norm_bound_k0", rec.dx_rel_2);
    dominated("norm_bound_split", rec.dx_rel_2);
    dominated("mixed_bound_upper", rec.dx_rel_inf);
    dominated("mixed_bound_exact", rec.dx_rel_inf);
    dominated("mixed_bound_struct", rec.dx_rel_inf);
    if (!rec.dx_compw_infinite) {
      dominated("compw_bound_upper", rec.dx_compw);
      dominated("compw_bound_exact", rec.dx_compw);
      dominated("compw_bound_struct", rec.dx_compw);
    }
  } catch (const NonGeneric& e) {
    rec.skipped = true;
    rec.skip_kind = SkipKind::kNonGeneric;
    rec.skip_reason = e.what();
  } catch (const ConsistentSystem& e) {
    rec.skipped = true;
    rec.skip_kind = SkipKind::kConsistent;
    rec.skip_reason = e.what();
  }
  return rec;
}

// Central-difference Jacobian of the solve map, entry-relative step
// h * max(1, |entry|). Verification oracle only: 2 m (n+1) full solves.
inline Matrix finite_difference_jacobian(const MtlsProblem& prob, double h,
                                         const Config& cfg = default_config()) {
  require(h > 0.0, "finite_difference_jacobian: need h > 0");
  const Index m = prob.m(), n = prob.n();
  detail::check_dense_cap(double(n) * double(m) * double(n + 1), cfg,
                          "finite_difference_jacobian");
  Matrix k(n, m * (n + 1));
  for (Index col = 0; col < m * (n + 1); ++col) {
    const Index j = col / m;  // data column (n = b)
    const Index i = col % m;
    const double base = j < n ? prob.a(i, j) : prob.b(i);
    const double step = h * std::max(1.0, std::abs(base));
    MtlsProblem plus = prob, minus = prob;
    if (j < n) {
      plus.a(i, j) += step;
      minus.a(i, j) -= step;
    } else {
      plus.b(i) += step;
      minus.b(i) -= step;
    }
    k.col(col) = (solve(plus, cfg).x - solve(minus, cfg).x) / (2.0 * step);
  }
  return k;
}

}  // namespace mtls
