#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "diamond/types.hpp"

namespace diamond {

/// State as a function of x (initial data and similar profiles).
using StateFn = std::function<Vec(double)>;

/// A first-order system K z_t + L z_x = grad_S(z) with constant real
/// skew-symmetric K, L. Immutable after construction; safe to share
/// across concurrent diamond solves.
struct MultiHamiltonianSystem {
  int n = 0;
  Mat K, L;
  std::function<Vec(const Vec&)> grad_S;
  /// Jacobian of grad_S (symmetric); empty when not available.
  std::function<Mat(const Vec&)> hess_S;
  /// S itself; optional, only used for reporting.
  std::function<double(const Vec&)> S_value;
  /// Upper bound for the Lipschitz constant of grad_S, user-supplied.
  std::optional<double> lipschitz_const;

  bool has_hess() const { return static_cast<bool>(hess_S); }
};

/// The wave equation u_tt - u_xx = f(u) written in first-order form with
/// z = (u, v, w) = (u, u_t, u_x). The potential satisfies V' = -f and
/// S(z) = V(u) + v^2/2 - w^2/2, so grad_S(z) = (-f(u), v, -w).
struct WaveSystem {
  MultiHamiltonianSystem base;
  std::function<double(double)> f;
  std::function<double(double)> f_prime;  // empty when not supplied
};

/// Builds the wave-family system. hess_S is populated iff f_prime is given.
WaveSystem make_wave_system(std::function<double(double)> f,
                            std::function<double(double)> f_prime = {});

/// Linear system grad_S(z) = S_matrix * z with a constant Hessian.
/// Rejects non-skew K/L and non-symmetric S_matrix (exact storage, no
/// tolerance). lipschitz_const is set to the operator infinity norm of
/// S_matrix.
MultiHamiltonianSystem make_linear_system(const Mat& K, const Mat& L,
                                          const Mat& S_matrix);

/// Structural diagnostics: exact skewness of K and L, dimension
/// consistency, and (when hess_S is present) symmetry plus agreement with
/// central finite differences of grad_S at 10 pseudo-random points,
/// relative tolerance 1e-5. Empty result means all invariants hold.
std::vector<std::string> validate_system(const MultiHamiltonianSystem& sys);

/// Central-difference Jacobian of a gradient map.
Mat fd_hessian(const std::function<Vec(const Vec&)>& grad, const Vec& z,
               double step = 1e-6);

}  // namespace diamond
