#pragma once

#include <functional>
#include <utility>

#include "diamond/types.hpp"

namespace diamond {

/// Shared configuration for the small dense nonlinear solvers.
struct SolverConfig {
  enum class Method { newton, fixed_point, automatic };
  Method method = Method::automatic;
  double tol = 1e-12;  ///< residual tolerance in the max norm
  int max_iter = 50;
  double damping = 1.0;  ///< step fraction in (0, 1]
};

struct SolveReport {
  int iterations = 0;
  double final_residual = 0.0;
  bool converged = false;
};

using VecFn = std::function<Vec(const Vec&)>;
using MatFn = std::function<Mat(const Vec&)>;

/// Dense LU solve with partial pivoting. Throws SingularMatrixError when a
/// pivot falls below 1e-300.
Vec lu_solve(const Mat& M, const Vec& rhs);

/// Explicit inverse via LU; same pivot check as lu_solve.
Mat lu_inverse(const Mat& M);

/// Determinant of a complex matrix via complex LU with partial pivoting.
/// A singular input simply yields (near) zero.
Complex det_complex(const CMat& M);

/// Operator infinity norm (max absolute row sum).
double inf_norm(const Mat& M);

/// ||M^-1||_inf via the explicit inverse; intended for small matrices.
double inf_norm_inverse(const Mat& M);

/// Smallest singular value, computed with Jacobi rotations.
double min_singular_value(const Mat& M);

/// Newton iteration with residual-monotone line search (step halved up to
/// 8 times). Returns the last iterate and a report; converged means
/// ||F(x)||_inf <= cfg.tol.
std::pair<Vec, SolveReport> newton(const VecFn& F, const MatFn& J, Vec x0,
                                   const SolverConfig& cfg);

/// Damped fixed-point iteration x <- (1-d)x + d G(x). Converged means
/// ||x - G(x)||_inf <= cfg.tol. Stops early (not converged) when the
/// successive-difference ratio exceeds 1 for five iterations in a row.
std::pair<Vec, SolveReport> fixed_point(const VecFn& G, Vec x0,
                                        const SolverConfig& cfg);

}  // namespace diamond
