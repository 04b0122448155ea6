#include "diamond/conservation.hpp"

#include <cmath>

namespace diamond {

namespace {

// (dz_a ^ M dz_b)(xi, eta) with a a sum of nodes
double wedge(const Mat& M, const Vec& xi_a, const Vec& eta_a, const Vec& xi_b,
             const Vec& eta_b) {
  return xi_a.dot(M * eta_b) - eta_a.dot(M * xi_b);
}

}  // namespace

double simple_conservation_residual(const NodeTangents& left,
                                    const NodeTangents& bottom,
                                    const NodeTangents& right,
                                    const NodeTangents& top, double dx,
                                    double dt, const FormEvaluator& forms) {
  const Vec xi_lrt = left.xi + right.xi + top.xi;
  const Vec eta_lrt = left.eta + right.eta + top.eta;
  const Vec xi_lrb = left.xi + right.xi + bottom.xi;
  const Vec eta_lrb = left.eta + right.eta + bottom.eta;
  const Vec xi_trb = top.xi + right.xi + bottom.xi;
  const Vec eta_trb = top.eta + right.eta + bottom.eta;
  const Vec xi_tlb = top.xi + left.xi + bottom.xi;
  const Vec eta_tlb = top.eta + left.eta + bottom.eta;

  double time_part = wedge(forms.K, xi_lrt, eta_lrt, top.xi, top.eta) -
                     wedge(forms.K, xi_lrb, eta_lrb, bottom.xi, bottom.eta);
  double space_part = wedge(forms.L, xi_trb, eta_trb, right.xi, right.eta) -
                      wedge(forms.L, xi_tlb, eta_tlb, left.xi, left.eta);
  return std::abs(time_part / (4.0 * dt) + space_part / (4.0 * dx));
}

double rk_conservation_residual(const RkEdgeTangents& e,
                                const GaussTableau& tab, double dx, double dt,
                                const FormEvaluator& forms) {
  double time_part = 0.0, space_part = 0.0;
  for (int i = 0; i < tab.r; ++i) {
    double omega_t = forms.omega(e.xi_top[i], e.eta_top[i]);
    double omega_r = forms.omega(e.xi_right[i], e.eta_right[i]);
    double omega_l = forms.omega(e.xi_left[i], e.eta_left[i]);
    double omega_b = forms.omega(e.xi_bottom[i], e.eta_bottom[i]);
    double kappa_t = forms.kappa(e.xi_top[i], e.eta_top[i]);
    double kappa_r = forms.kappa(e.xi_right[i], e.eta_right[i]);
    double kappa_l = forms.kappa(e.xi_left[i], e.eta_left[i]);
    double kappa_b = forms.kappa(e.xi_bottom[i], e.eta_bottom[i]);
    time_part += tab.b[i] * (omega_t + omega_r - omega_l - omega_b);
    space_part += tab.b[i] * (kappa_r + kappa_b - kappa_t - kappa_l);
  }
  return std::abs(time_part / dt + space_part / dx);
}

SimpleTangentTrajectory propagate_tangents_simple(
    const MultiHamiltonianSystem& sys, const MeshParams& params,
    CornerGrid primal0, CornerGrid primal1, CornerGrid xi0, CornerGrid xi1,
    CornerGrid eta0, CornerGrid eta1, long steps, const SolverConfig& cfg) {
  if (!sys.has_hess())
    throw std::invalid_argument("propagate_tangents_simple: hess_S required");
  const int twoN = 2 * params.N;

  SimpleTangentTrajectory traj;
  traj.primal = {std::move(primal0), std::move(primal1)};
  traj.xi = {std::move(xi0), std::move(xi1)};
  traj.eta = {std::move(eta0), std::move(eta1)};

  for (long level = 2; level <= 2 * steps; ++level) {
    const CornerGrid& p_prev = traj.primal[level - 2];
    const CornerGrid& p_cur = traj.primal[level - 1];
    CornerGrid p_next{level, std::vector<Vec>(twoN, Vec::Zero(sys.n))};
    CornerGrid xi_next = p_next, eta_next = p_next;
    const int parity = static_cast<int>(level % 2);

    for (int d = 0; d < params.N; ++d) {
      const int i = parity + 2 * d;
      const int il = (i - 1 + twoN) % twoN, ir = (i + 1) % twoN;
      const Vec& zl = p_cur.values[il];
      const Vec& zr = p_cur.values[ir];
      const Vec& zb = p_prev.values[i];
      Vec zt;
      try {
        zt = simple_diamond_update(sys, zl, zb, zr, params, cfg);
      } catch (const std::exception& ex) {
        throw DiamondSolveError(ex.what(), level, d);
      }
      p_next.values[i] = zt;
      xi_next.values[i] = simple_tangent_update(
          sys, zl, zb, zr, zt, traj.xi[level - 1].values[il],
          traj.xi[level - 2].values[i], traj.xi[level - 1].values[ir], params);
      eta_next.values[i] = simple_tangent_update(
          sys, zl, zb, zr, zt, traj.eta[level - 1].values[il],
          traj.eta[level - 2].values[i], traj.eta[level - 1].values[ir], params);
    }
    traj.primal.push_back(std::move(p_next));
    traj.xi.push_back(std::move(xi_next));
    traj.eta.push_back(std::move(eta_next));
  }
  return traj;
}

RkTangentTrajectory propagate_tangents_rk(const MultiHamiltonianSystem& sys,
                                          const GaussTableau& tab,
                                          const MeshParams& params,
                                          ZigzagState primal0, ZigzagState xi0,
                                          ZigzagState eta0, long half_steps,
                                          const SolverConfig& cfg) {
  if (!sys.has_hess())
    throw std::invalid_argument("propagate_tangents_rk: hess_S required");
  const TransformedCoeffs coeffs = transform_coeffs(sys, params);

  RkTangentTrajectory traj;
  traj.primal = {std::move(primal0)};
  traj.xi = {std::move(xi0)};
  traj.eta = {std::move(eta0)};

  for (long k = 0; k < half_steps; ++k) {
    const ZigzagState& p = traj.primal.back();
    const ZigzagState& xs = traj.xi.back();
    const ZigzagState& es = traj.eta.back();
    const long level = p.level;  // p dangles once traj.primal grows

    std::vector<DiamondOutput> p_out(params.N), xi_out(params.N),
        eta_out(params.N);
    std::vector<RkEdgeTangents> records(params.N);

    for (int d = 0; d < params.N; ++d) {
      EdgeData pe = edges_from_state(p, d);
      EdgeData xe = edges_from_state(xs, d);
      EdgeData ee = edges_from_state(es, d);

      StageBlock stages;
      try {
        stages = solve_stages(sys, tab, coeffs, pe, cfg);
      } catch (const std::exception& ex) {
        throw DiamondSolveError(ex.what(), level, d);
      }
      auto [pr, pt] = update_edges(stages, pe, tab);
      auto [pcr, pct] = solve_corner_extension(tab, pe);
      p_out[d] = {std::move(pr), std::move(pt), std::move(pcr), std::move(pct)};

      StageBlock xi_stages = solve_tangent_stages(sys, tab, coeffs, stages, xe);
      auto [xr, xt] = update_edges(xi_stages, xe, tab);
      auto [xcr, xct] = solve_corner_extension(tab, xe);
      StageBlock eta_stages = solve_tangent_stages(sys, tab, coeffs, stages, ee);
      auto [er, et] = update_edges(eta_stages, ee, tab);
      auto [ecr, ect] = solve_corner_extension(tab, ee);

      records[d] = RkEdgeTangents{xe.left,  xe.bottom, xr, xt,
                                  ee.left,  ee.bottom, er, et};
      xi_out[d] = {std::move(xr), std::move(xt), std::move(xcr), std::move(xct)};
      eta_out[d] = {std::move(er), std::move(et), std::move(ecr), std::move(ect)};
    }

    traj.per_level_diamonds.push_back(std::move(records));
    traj.primal.push_back(advance_reindex(p_out, params, level));
    traj.xi.push_back(advance_reindex(xi_out, params, level));
    traj.eta.push_back(advance_reindex(eta_out, params, level));
  }
  return traj;
}

}  // namespace diamond
