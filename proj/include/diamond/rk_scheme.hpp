#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "diamond/mesh.hpp"
#include "diamond/nonlinear.hpp"
#include "diamond/system.hpp"
#include "diamond/tableau.hpp"

namespace diamond {

/// Known data of one diamond in square coordinates: the bottom corner
/// (z_l^0 = z_b^0) and the left and bottom edge nodes, r each.
struct EdgeData {
  Vec corner;
  std::vector<Vec> left, bottom;
};

/// Internal stage tensors of one diamond. Z approximates z at the r x r
/// collocation points, X its x-derivative and T its t-derivative in
/// square coordinates. Index (i, j): i is the x-stage, j the t-stage,
/// both 0-based; the flat layout is i-major.
struct StageBlock {
  int r = 0, n = 0;
  std::vector<Vec> Z, X, T;
  int idx(int i, int j) const { return i * r + j; }
};

/// Solves the stage equations
///   Z_ij = zl_j + sum_k a_ik X_kj,
///   Z_ij = zb_i + sum_k a_jk T_ik,
///   grad_S(Z_ij) = Kt T_ij + Lt X_ij.
/// X and T are eliminated through A^-1, leaving r^2 n unknowns in Z,
/// solved by Newton on the block system (or by the fixed-point iteration
/// with the exact constant linear part when method == fixed_point).
StageBlock solve_stages(const MultiHamiltonianSystem& sys,
                        const GaussTableau& tab, const TransformedCoeffs& coeffs,
                        const EdgeData& edges, const SolverConfig& cfg,
                        SolveReport* report = nullptr);

/// Edge updates: right_i = left_i + sum_k b_k X_ki,
///                top_i  = bottom_i + sum_k b_k T_ik.
std::pair<std::vector<Vec>, std::vector<Vec>> update_edges(
    const StageBlock& stages, const EdgeData& edges, const GaussTableau& tab);

/// Corner extension: the stage equations extended to the bottom (j = 0)
/// and left (i = 0) boundaries give X^0 = A^-1 (zb - corner) and
/// T^0 = A^-1 (zl - corner), from which the extended updates produce the
/// two corner candidates. Returns (corner_right, corner_top) where
/// corner_right = z_r^0 sits at the diamond's right corner and
/// corner_top = z_t_0 at its left corner.
std::pair<Vec, Vec> solve_corner_extension(const GaussTableau& tab,
                                           const EdgeData& edges);

/// Wave-family solve through the reduced system B u = b + dt^2 f(u)
/// (fixed-point iteration u <- B^-1 (b + dt^2 f(u))), with v and w stages
/// reconstructed afterwards. Agrees with solve_stages. When the system
/// carries a Lipschitz constant and dt exceeds the contraction bound,
/// *contraction_warning is set (the iteration may still converge).
StageBlock reduced_wave_solve(const WaveSystem& wave, const GaussTableau& tab,
                              const MeshParams& params, const EdgeData& edges,
                              const SolverConfig& cfg,
                              SolveReport* report = nullptr,
                              bool* contraction_warning = nullptr);

/// Exact linearization of solve_stages around converged primal stages:
/// propagates one tangent through the diamond with a single linear solve.
/// Requires hess_S.
StageBlock solve_tangent_stages(const MultiHamiltonianSystem& sys,
                                const GaussTableau& tab,
                                const TransformedCoeffs& coeffs,
                                const StageBlock& primal,
                                const EdgeData& tangent_edges);

enum class InitMode { euler, exact };

using SpaceTimeFn = std::function<Vec(double, double)>;

/// Fills a level-0 zig-zag. exact mode samples z_exact at each node's own
/// (x, t); euler mode uses z0(x) + t z0_t(x).
ZigzagState rk_init(const StateFn& z0, const StateFn& z0_t,
                    const GaussTableau& tab, const MeshParams& params,
                    InitMode mode, const SpaceTimeFn& z_exact = {});

/// One half-step: per diamond bind edges from the state (periodic wrap),
/// solve stages, update edges, optionally extend to the corners, then
/// reindex into the next zig-zag. Without the corner extension the new
/// corner slots are NaN (not computed). Diamonds are solved in parallel;
/// the result is identical for any thread count.
ZigzagState rk_half_step(const MultiHamiltonianSystem& sys,
                         const GaussTableau& tab, const MeshParams& params,
                         const ZigzagState& state, const SolverConfig& cfg,
                         bool corner_extension = false, int threads = 1);

/// Edge midpoint values of one simple-scheme diamond window, the map that
/// sends corner solutions onto r=1 diamond-scheme data.
struct R1Edges {
  Vec bottom, top, left, right;
};

R1Edges map_simple_to_r1(const Vec& z_left, const Vec& z_bottom,
                         const Vec& z_right, const Vec& z_top);

/// Unpacks one diamond's input edges from a zig-zag state.
EdgeData edges_from_state(const ZigzagState& state, int diamond);

}  // namespace diamond
