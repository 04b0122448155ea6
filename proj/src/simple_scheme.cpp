#include "diamond/simple_scheme.hpp"

#include <cmath>

#include "diamond/parallel.hpp"

namespace diamond {

std::pair<CornerGrid, CornerGrid> simple_init(const StateFn& z0,
                                              const StateFn& z0_t,
                                              const MeshParams& params) {
  const int twoN = 2 * params.N;
  Vec probe = z0(params.a);
  const int n = static_cast<int>(probe.size());

  CornerGrid level0, level1;
  level0.level = 0;
  level1.level = 1;
  level0.values.assign(twoN, Vec::Zero(n));
  level1.values.assign(twoN, Vec::Zero(n));
  for (int i = 0; i < twoN; ++i) {
    double x = params.a + i * params.dx / 2.0;
    if (i % 2 == 0)
      level0.values[i] = z0(x);
    else
      level1.values[i] = z0(x) + 0.5 * params.dt * z0_t(x);
  }
  return {std::move(level0), std::move(level1)};
}

Vec simple_diamond_update(const MultiHamiltonianSystem& sys, const Vec& z_left,
                          const Vec& z_bottom, const Vec& z_right,
                          const MeshParams& params, const SolverConfig& cfg,
                          SolveReport* report) {
  const Mat K_dt = sys.K / params.dt;
  const Vec known = z_left + z_bottom + z_right;
  const Vec fixed_part =
      Vec(sys.L * (z_right - z_left) / params.dx - K_dt * z_bottom);

  auto residual = [&](const Vec& z) -> Vec {
    Vec center = 0.25 * (known + z);
    return K_dt * z + fixed_part - sys.grad_S(center);
  };

  SolverConfig local = cfg;
  std::pair<Vec, SolveReport> result;
  if (cfg.method == SolverConfig::Method::fixed_point) {
    // damped residual iteration; diverges when K dominates, detected by
    // the solver
    auto G = [&](const Vec& z) -> Vec { return z - residual(z); };
    result = fixed_point(G, z_bottom, local);
  } else {
    auto jac = [&](const Vec& z) -> Mat {
      Vec center = 0.25 * (known + z);
      Mat H = sys.has_hess() ? sys.hess_S(center) : fd_hessian(sys.grad_S, center);
      return Mat(K_dt - 0.25 * H);
    };
    result = newton(residual, jac, z_bottom, local);
  }
  if (report) *report = result.second;
  if (!result.second.converged)
    throw std::runtime_error("simple_diamond_update: solver did not converge");
  return result.first;
}

Vec simple_wave_update(const WaveSystem& wave, const Vec& z_left,
                       const Vec& z_bottom, const Vec& z_right,
                       const MeshParams& params, const SolverConfig& cfg,
                       SolveReport* report) {
  const double dt = params.dt, dx = params.dx;
  const double u_l = z_left[0], v_l = z_left[1], w_l = z_left[2];
  const double u_b = z_bottom[0], v_b = z_bottom[1], w_b = z_bottom[2];
  const double u_r = z_right[0], v_r = z_right[1], w_r = z_right[2];

  // w update is linear in the single unknown w_top
  const double w_top = 4.0 * (u_r - u_l) / dx - w_b - w_r - w_l;

  // eliminate v_top, leaving u_top = C + (dt^2/4) f(u_center)
  const double C = u_b + 0.25 * dt * (2.0 * v_b + v_r + v_l) +
                   0.25 * dt * dt * (w_r - w_l) / dx;
  const double coeff = 0.25 * dt * dt;
  const double u_known = u_r + u_b + u_l;

  auto scalar_res = [&](const Vec& u) -> Vec {
    Vec out(1);
    out[0] = u[0] - C - coeff * wave.f(0.25 * (u_known + u[0]));
    return out;
  };

  Vec u0(1);
  u0[0] = C;
  std::pair<Vec, SolveReport> result;
  if (wave.f_prime && cfg.method != SolverConfig::Method::fixed_point) {
    auto scalar_jac = [&](const Vec& u) -> Mat {
      Mat out(1, 1);
      out(0, 0) = 1.0 - 0.25 * coeff * wave.f_prime(0.25 * (u_known + u[0]));
      return out;
    };
    result = newton(scalar_res, scalar_jac, u0, cfg);
  } else {
    auto G = [&](const Vec& u) -> Vec {
      Vec out(1);
      out[0] = C + coeff * wave.f(0.25 * (u_known + u[0]));
      return out;
    };
    result = fixed_point(G, u0, cfg);
  }
  if (report) *report = result.second;
  if (!result.second.converged)
    throw std::runtime_error("simple_wave_update: scalar solver did not converge");

  const double u_top = result.first[0];
  const double v_top = 4.0 * (u_top - u_b) / dt - v_b - v_r - v_l;
  Vec z_top(3);
  z_top << u_top, v_top, w_top;
  return z_top;
}

Vec simple_tangent_update(const MultiHamiltonianSystem& sys, const Vec& z_left,
                          const Vec& z_bottom, const Vec& z_right,
                          const Vec& z_top, const Vec& d_left,
                          const Vec& d_bottom, const Vec& d_right,
                          const MeshParams& params) {
  if (!sys.has_hess())
    throw std::invalid_argument("simple_tangent_update: hess_S required");
  const Mat K_dt = sys.K / params.dt;
  const Vec center = 0.25 * (z_left + z_bottom + z_right + z_top);
  const Mat H = sys.hess_S(center);
  const Mat lhs = K_dt - 0.25 * H;
  const Vec rhs = K_dt * d_bottom - sys.L * (d_right - d_left) / params.dx +
                  0.25 * (H * (d_bottom + d_left + d_right));
  return lu_solve(lhs, rhs);
}

std::pair<CornerGrid, CornerGrid> simple_advance(
    const MultiHamiltonianSystem& sys, const MeshParams& params,
    CornerGrid prev, CornerGrid cur, long half_levels, const SolverConfig& cfg,
    int threads, const LevelObserver& observer,
    const WaveSystem* wave_fastpath) {
  const int twoN = 2 * params.N;
  const int n = sys.n;

  for (long step = 0; step < half_levels; ++step) {
    const long level = cur.level + 1;
    CornerGrid next;
    next.level = level;
    next.values.assign(twoN, Vec::Zero(n));
    const int parity = static_cast<int>(level % 2);

    parallel_for(params.N, threads, [&](int d) {
      const int i = parity + 2 * d;
      const Vec& left = cur.values[(i - 1 + twoN) % twoN];
      const Vec& right = cur.values[(i + 1) % twoN];
      const Vec& bottom = prev.values[i];
      try {
        next.values[i] =
            wave_fastpath
                ? simple_wave_update(*wave_fastpath, left, bottom, right, params, cfg)
                : simple_diamond_update(sys, left, bottom, right, params, cfg);
      } catch (const std::exception& e) {
        throw DiamondSolveError(e.what(), level, d);
      }
    });

    prev = std::move(cur);
    cur = std::move(next);
    if (observer) observer(cur);
  }
  return {std::move(prev), std::move(cur)};
}

CornerGrid simple_run(const MultiHamiltonianSystem& sys,
                      const MeshParams& params, const StateFn& z0,
                      const StateFn& z0_t, long steps, const SolverConfig& cfg,
                      int threads, const LevelObserver& observer,
                      const WaveSystem* wave_fastpath) {
  auto [level0, level1] = simple_init(z0, z0_t, params);
  if (observer) {
    observer(level0);
    observer(level1);
  }
  if (steps == 0) return std::move(level0);
  auto [prev, cur] =
      simple_advance(sys, params, std::move(level0), std::move(level1),
                     2 * steps - 1, cfg, threads, observer, wave_fastpath);
  (void)prev;
  return std::move(cur);
}

}  // namespace diamond
