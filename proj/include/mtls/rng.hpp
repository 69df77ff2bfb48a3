#pragma once

// Seeded random streams for the experiment harness. The mapping from raw
// mt19937_64 output to doubles is spelled out here (not delegated to
// std::uniform_real_distribution, whose output is implementation-defined)
// so that a seed identifies one bit-exact stream on every platform.

#include <cmath>
#include <cstdint>
#include <random>

#include "mtls/common.hpp"

namespace mtls {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform on [0, 1): top 53 bits of the engine output.
  double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }

  // Uniform on [-1, 1).
  double sym_uniform() { return 2.0 * uniform() - 1.0; }

  // Standard normal via Box-Muller. The second value of each pair is
  // discarded on purpose: one call, one draw, no hidden state.
  double gauss() {
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  // Vectors and matrices fill in column-major order.
  Vector uniform_vec(Index k) {
    Vector v(k);
    for (Index i = 0; i < k; ++i) v(i) = uniform();
    return v;
  }

  Vector sym_uniform_vec(Index k) {
    Vector v(k);
    for (Index i = 0; i < k; ++i) v(i) = sym_uniform();
    return v;
  }

  Vector gauss_vec(Index k) {
    Vector v(k);
    for (Index i = 0; i < k; ++i) v(i) = gauss();
    return v;
  }

  Matrix uniform_mat(Index r, Index c) {
    Matrix a(r, c);
    for (Index j = 0; j < c; ++j)
      for (Index i = 0; i < r; ++i) a(i, j) = uniform();
    return a;
  }

  Matrix sym_uniform_mat(Index r, Index c) {
    Matrix a(r, c);
    for (Index j = 0; j < c; ++j)
      for (Index i = 0; i < r; ++i) a(i, j) = sym_uniform();
    return a;
  }

  Matrix gauss_mat(Index r, Index c) {
    Matrix a(r, c);
    for (Index j = 0; j < c; ++j)
      for (Index i = 0; i < r; ++i) a(i, j) = gauss();
    return a;
  }

  // Unit-norm Gaussian direction.
  Vector unit_vec(Index k) {
    Vector v = gauss_vec(k);
    const double nrm = v.norm();
    return nrm > 0 ? Vector(v / nrm) : unit_vec(k);
  }

  std::uint64_t raw() { return eng_(); }

 private:
  static constexpr double kPi = 3.14159265358979323846;
  std::mt19937_64 eng_;
};

}  // namespace mtls
