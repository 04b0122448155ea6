#pragma once

#include <vector>

#include "diamond/rk_scheme.hpp"
#include "diamond/simple_scheme.hpp"

namespace diamond {

/// Evaluates the wedge 2-forms on a tangent pair: omega(xi, eta) = xi^T K eta
/// and kappa(xi, eta) = xi^T L eta. Antisymmetric in (xi, eta) because K and
/// L are skew.
struct FormEvaluator {
  Mat K, L;
  double omega(const Vec& xi, const Vec& eta) const { return xi.dot(K * eta); }
  double kappa(const Vec& xi, const Vec& eta) const { return xi.dot(L * eta); }
};

struct NodeTangents {
  Vec xi, eta;
};

/// Discrete conservation-law residual of the simple scheme on one diamond,
/// with each two-node wedge dz_a ^ K dz_b evaluated as the antisymmetrized
/// bilinear xi_a^T K eta_b - eta_a^T K xi_b:
///   1/(4 dt) [ (d z_l + d z_t + d z_r) ^ K d z_t
///            - (d z_l + d z_b + d z_r) ^ K d z_b ]
/// + 1/(4 dx) [ (d z_t + d z_r + d z_b) ^ L d z_r
///            - (d z_t + d z_l + d z_b) ^ L d z_l ].
/// Returns the absolute value; zero (to linear-solve precision) on tangents
/// of converged solutions.
double simple_conservation_residual(const NodeTangents& left,
                                    const NodeTangents& bottom,
                                    const NodeTangents& right,
                                    const NodeTangents& top, double dx,
                                    double dt, const FormEvaluator& forms);

/// Tangent values on the four edges of one diamond, r nodes each.
struct RkEdgeTangents {
  std::vector<Vec> xi_left, xi_bottom, xi_right, xi_top;
  std::vector<Vec> eta_left, eta_bottom, eta_right, eta_top;
};

/// Residual of the r-stage discrete symplectic conservation law
///   1/dt sum_i b_i (omega_i^t + omega_r^i - omega_l^i - omega_i^b)
/// + 1/dx sum_i b_i (kappa_r^i + kappa_i^b - kappa_i^t - kappa_l^i),
/// with omega/kappa at a node evaluated on that node's tangent pair.
double rk_conservation_residual(const RkEdgeTangents& edges,
                                const GaussTableau& tab, double dx, double dt,
                                const FormEvaluator& forms);

/// Primal trajectory plus two tangent trajectories propagated through the
/// exactly linearized simple scheme. Requires hess_S.
struct SimpleTangentTrajectory {
  std::vector<CornerGrid> primal, xi, eta;
};

SimpleTangentTrajectory propagate_tangents_simple(
    const MultiHamiltonianSystem& sys, const MeshParams& params,
    CornerGrid primal0, CornerGrid primal1, CornerGrid xi0, CornerGrid xi1,
    CornerGrid eta0, CornerGrid eta1, long steps, const SolverConfig& cfg);

/// Same for the r-stage scheme; per_level_diamonds[k][d] holds diamond d's
/// input and output edge tangents for the half-step from level k to k+1.
struct RkTangentTrajectory {
  std::vector<ZigzagState> primal, xi, eta;
  std::vector<std::vector<RkEdgeTangents>> per_level_diamonds;
};

RkTangentTrajectory propagate_tangents_rk(const MultiHamiltonianSystem& sys,
                                          const GaussTableau& tab,
                                          const MeshParams& params,
                                          ZigzagState primal0, ZigzagState xi0,
                                          ZigzagState eta0, long half_steps,
                                          const SolverConfig& cfg);

}  // namespace diamond
