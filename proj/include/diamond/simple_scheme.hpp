#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "diamond/mesh.hpp"
#include "diamond/nonlinear.hpp"
#include "diamond/system.hpp"

namespace diamond {

/// Corner values of one zig-zag level: entry i approximates
/// z(a + i dx/2, level dt/2), populated for parity(i) == parity(level).
struct CornerGrid {
  long level = 0;
  std::vector<Vec> values;  // length 2N
};

/// Level 0 sampled from z0 at even indices; level 1 is the forward Euler
/// half-step z0 + (dt/2) z0_t at odd indices.
std::pair<CornerGrid, CornerGrid> simple_init(const StateFn& z0,
                                              const StateFn& z0_t,
                                              const MeshParams& params);

/// Solves one diamond: finds z_top with
///   K (z_top - z_bottom)/dt + L (z_right - z_left)/dx = grad_S(center)
/// where center is the four-corner average.
Vec simple_diamond_update(const MultiHamiltonianSystem& sys, const Vec& z_left,
                          const Vec& z_bottom, const Vec& z_right,
                          const MeshParams& params, const SolverConfig& cfg,
                          SolveReport* report = nullptr);

/// Wave-family fast path: the w update is linear, v is eliminated, and one
/// scalar equation u = C + (dt^2/4) f(u_center) remains. Agrees with
/// simple_diamond_update on wave systems.
Vec simple_wave_update(const WaveSystem& wave, const Vec& z_left,
                       const Vec& z_bottom, const Vec& z_right,
                       const MeshParams& params, const SolverConfig& cfg,
                       SolveReport* report = nullptr);

/// Propagates a tangent (directional derivative of the update with respect
/// to the three known corners) through one diamond, linearizing around the
/// converged primal corners. Requires hess_S.
Vec simple_tangent_update(const MultiHamiltonianSystem& sys, const Vec& z_left,
                          const Vec& z_bottom, const Vec& z_right,
                          const Vec& z_top, const Vec& d_left,
                          const Vec& d_bottom, const Vec& d_right,
                          const MeshParams& params);

using LevelObserver = std::function<void(const CornerGrid&)>;

/// Advances an initialized pair of levels by half_levels further levels.
/// Each level is a parallel map over its N diamonds. Solver failures are
/// rethrown as DiamondSolveError with the (level, diamond) location.
/// When wave_fastpath is non-null, simple_wave_update is used per diamond.
std::pair<CornerGrid, CornerGrid> simple_advance(
    const MultiHamiltonianSystem& sys, const MeshParams& params,
    CornerGrid prev, CornerGrid cur, long half_levels, const SolverConfig& cfg,
    int threads = 1, const LevelObserver& observer = {},
    const WaveSystem* wave_fastpath = nullptr);

/// Initialization plus 2*steps half-levels; returns the final grid (its
/// level is 2*steps). The observer, when given, sees every level including
/// the two initial ones.
CornerGrid simple_run(const MultiHamiltonianSystem& sys,
                      const MeshParams& params, const StateFn& z0,
                      const StateFn& z0_t, long steps, const SolverConfig& cfg,
                      int threads = 1, const LevelObserver& observer = {},
                      const WaveSystem* wave_fastpath = nullptr);

}  // namespace diamond
