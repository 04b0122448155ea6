#pragma once

#include "diamond/types.hpp"

namespace diamond {

/// Gauss-Legendre Runge-Kutta coefficients for r stages: abscissae c are
/// the roots of the shifted Legendre polynomial P_r(2x-1), A comes from
/// the collocation conditions and b from the quadrature conditions.
/// Immutable after construction.
struct GaussTableau {
  int r = 0;
  Mat A;
  Vec b;
  Vec c;
  Mat A_inv;
};

/// Builds the r-stage tableau, 1 <= r <= 8. Legendre roots are found by
/// Newton iteration from Chebyshev initial guesses to 1e-14.
GaussTableau gauss_tableau(int r);

/// The r^2 x r^2 matrix
///   B = (1-l^2)(I (x) Ainv^2) + 2(1+l^2)(Ainv (x) Ainv) + (1-l^2)(Ainv^2 (x) I)
/// whose invertibility controls per-diamond solvability for the wave
/// family. The flattened unknown vector is ordered with the x-stage index
/// major and the t-stage index minor, so I (x) Ainv^2 acts on the t-stage
/// index and Ainv^2 (x) I on the x-stage index.
struct SolvabilityMatrix {
  int r = 0;
  double lambda = 0.0;  ///< Courant number dt/dx
  Mat B;
};

SolvabilityMatrix build_B(const GaussTableau& tab, double lambda);

/// The time step below which the contraction argument guarantees a
/// per-diamond solution: sqrt(1 / (lipschitz * ||B^-1||_inf)).
/// Throws SingularMatrixError when B is numerically singular
/// (min singular value < 1e-12 * ||B||_inf).
double max_stable_dt(const SolvabilityMatrix& B, double lipschitz_const);

/// Kronecker product, (X (x) Y)[(i-1)q+j, (p-1)q+s] = X(i,p) Y(j,s).
Mat kron(const Mat& X, const Mat& Y);

}  // namespace diamond
