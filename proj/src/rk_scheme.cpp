#include "diamond/rk_scheme.hpp"

#include <cmath>
#include <limits>

#include "diamond/parallel.hpp"

namespace diamond {

namespace {

// Per-solve scratch space. Stage tensors are kept as n x r^2 column
// matrices (column i*r + j holds stage (i, j)), so the flat unknown
// vector maps onto them without copying and the hot residual path does
// not allocate.
struct StageWorkspace {
  int r, n, m;  // m = r^2 n unknowns
  const MultiHamiltonianSystem* sys;
  const GaussTableau* tab;
  const TransformedCoeffs* coeffs;
  const EdgeData* edges;

  Mat Xc, Tc;      // derivative stages, n x r^2
  Vec sigma;       // row sums of A^-1
  Vec F, z_stage;  // residual and one-stage scratch

  StageWorkspace(int r, int n, const MultiHamiltonianSystem& sys,
                 const GaussTableau& tab, const TransformedCoeffs& coeffs,
                 const EdgeData& edges)
      : r(r), n(n), m(r * r * n), sys(&sys), tab(&tab), coeffs(&coeffs),
        edges(&edges), Xc(n, r * r), Tc(n, r * r),
        sigma(tab.A_inv.rowwise().sum()), F(m), z_stage(n) {}

  // T_ij = sum_k m_jk Z_ik - sigma_j zb_i,
  // X_ij = sum_k m_ik Z_kj - sigma_i zl_j
  void eliminate(const Eigen::Map<const Mat>& Z) {
    const Mat& M = tab->A_inv;
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) {
        auto t = Tc.col(i * r + j);
        auto x = Xc.col(i * r + j);
        t.noalias() = -sigma[j] * edges->bottom[i];
        x.noalias() = -sigma[i] * edges->left[j];
        for (int k = 0; k < r; ++k) {
          t.noalias() += M(j, k) * Z.col(i * r + k);
          x.noalias() += M(i, k) * Z.col(k * r + j);
        }
      }
  }

  const Vec& residual(const Vec& zflat) {
    Eigen::Map<const Mat> Z(zflat.data(), n, r * r);
    eliminate(Z);
    for (int s = 0; s < r * r; ++s) {
      z_stage = Z.col(s);
      auto row = F.segment(static_cast<Eigen::Index>(s) * n, n);
      row.noalias() = coeffs->K_tilde * Tc.col(s);
      row.noalias() += coeffs->L_tilde * Xc.col(s);
      row -= sys->grad_S(z_stage);
    }
    return F;
  }

  // d F_ij / d Z_pq = Kt m_jq [p=i] + Lt m_ip [q=j] - [p=i][q=j] H(Z_ij)
  Mat jacobian(const Vec& zflat, bool with_hess) const {
    const Mat& M = tab->A_inv;
    Mat J = Mat::Zero(m, m);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) {
        const int row = (i * r + j) * n;
        for (int q = 0; q < r; ++q)
          J.block(row, (i * r + q) * n, n, n) += M(j, q) * coeffs->K_tilde;
        for (int p = 0; p < r; ++p)
          J.block(row, (p * r + j) * n, n, n) += M(i, p) * coeffs->L_tilde;
        if (with_hess) {
          Vec Zij = zflat.segment((i * r + j) * n, n);
          Mat H = sys->has_hess() ? sys->hess_S(Zij)
                                  : fd_hessian(sys->grad_S, Zij);
          J.block(row, row, n, n) -= H;
        }
      }
    return J;
  }

  Vec initial_guess() const {
    Vec z(m);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j)
        z.segment((i * r + j) * n, n) = 0.5 * (edges->left[j] + edges->bottom[i]);
    return z;
  }

  // copies the converged stages out in the public layout
  StageBlock export_block(const Vec& zflat) {
    Eigen::Map<const Mat> Z(zflat.data(), n, r * r);
    eliminate(Z);
    StageBlock out;
    out.r = r;
    out.n = n;
    out.Z.resize(r * r);
    out.X.resize(r * r);
    out.T.resize(r * r);
    for (int s = 0; s < r * r; ++s) {
      out.Z[s] = Z.col(s);
      out.X[s] = Xc.col(s);
      out.T[s] = Tc.col(s);
    }
    return out;
  }
};

}  // namespace

StageBlock solve_stages(const MultiHamiltonianSystem& sys,
                        const GaussTableau& tab, const TransformedCoeffs& coeffs,
                        const EdgeData& edges, const SolverConfig& cfg,
                        SolveReport* report) {
  const int r = tab.r, n = sys.n;
  StageWorkspace ws(r, n, sys, tab, coeffs, edges);

  std::pair<Vec, SolveReport> result;
  if (cfg.method == SolverConfig::Method::fixed_point ||
      (cfg.method == SolverConfig::Method::automatic && !sys.has_hess())) {
    // the contraction iteration of the solvability argument: the linear
    // model frozen at the initial guess is inverted exactly once and only
    // the nonlinearity is re-evaluated, so the contraction factor scales
    // with dt^2 times the Lipschitz constant of grad_S
    Vec z = ws.initial_guess();
    Eigen::PartialPivLU<Mat> lin(ws.jacobian(z, true));
    SolveReport rep;
    double res = std::numeric_limits<double>::infinity();
    double prev_res = res;
    int growing = 0;
    while (rep.iterations < cfg.max_iter) {
      const Vec& F = ws.residual(z);
      res = F.cwiseAbs().maxCoeff();
      if (!std::isfinite(res) || res <= cfg.tol) break;
      z -= cfg.damping * lin.solve(F);
      ++rep.iterations;
      growing = res > prev_res ? growing + 1 : 0;
      if (growing >= 5) break;
      prev_res = res;
    }
    rep.final_residual = res;
    rep.converged = std::isfinite(res) && res <= cfg.tol;
    result = {std::move(z), rep};
  } else {
    auto F = [&ws](const Vec& z) -> Vec { return ws.residual(z); };
    auto J = [&ws](const Vec& z) { return ws.jacobian(z, true); };
    result = newton(F, J, ws.initial_guess(), cfg);
  }
  if (report) *report = result.second;
  if (!result.second.converged)
    throw std::runtime_error("solve_stages: stage solver did not converge");
  return ws.export_block(result.first);
}

std::pair<std::vector<Vec>, std::vector<Vec>> update_edges(
    const StageBlock& stages, const EdgeData& edges, const GaussTableau& tab) {
  const int r = stages.r, n = stages.n;
  std::vector<Vec> right(r), top(r);
  for (int i = 0; i < r; ++i) {
    Vec xsum = Vec::Zero(n), tsum = Vec::Zero(n);
    for (int k = 0; k < r; ++k) {
      xsum += tab.b[k] * stages.X[stages.idx(k, i)];
      tsum += tab.b[k] * stages.T[stages.idx(i, k)];
    }
    right[i] = edges.left[i] + xsum;
    top[i] = edges.bottom[i] + tsum;
  }
  return {std::move(right), std::move(top)};
}

std::pair<Vec, Vec> solve_corner_extension(const GaussTableau& tab,
                                           const EdgeData& edges) {
  const int r = tab.r;
  // weights b^T A^-1 applied to the edge offsets give the b-weighted sums
  // of X^0 and T^0 directly
  Eigen::RowVectorXd w = tab.b.transpose() * tab.A_inv;
  Vec corner_right = edges.corner;
  Vec corner_top = edges.corner;
  for (int i = 0; i < r; ++i) {
    corner_right += w[i] * (edges.bottom[i] - edges.corner);
    corner_top += w[i] * (edges.left[i] - edges.corner);
  }
  return {std::move(corner_right), std::move(corner_top)};
}

StageBlock reduced_wave_solve(const WaveSystem& wave, const GaussTableau& tab,
                              const MeshParams& params, const EdgeData& edges,
                              const SolverConfig& cfg, SolveReport* report,
                              bool* contraction_warning) {
  const int r = tab.r;
  const double dt = params.dt, dx = params.dx;
  const Mat& M = tab.A_inv;

  auto comp = [&](const std::vector<Vec>& nodes, int c) {
    Vec out(r);
    for (int i = 0; i < r; ++i) out[i] = nodes[i][c];
    return out;
  };
  const Vec ub = comp(edges.bottom, 0), vb = comp(edges.bottom, 1),
            wb = comp(edges.bottom, 2);
  const Vec ul = comp(edges.left, 0), vl = comp(edges.left, 1),
            wl = comp(edges.left, 2);

  // t-derivative stages sum_k m_jk (g_ik - gb_i) and x-derivative stages
  // sum_k m_ik (g_kj - gl_j) of an r x r grid g, as matrices
  auto d_t = [&](const Mat& g, const Vec& gb) -> Mat {
    Mat out(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) {
        double s = 0.0;
        for (int k = 0; k < r; ++k) s += M(j, k) * (g(i, k) - gb[i]);
        out(i, j) = s;
      }
    return out;
  };
  auto d_x = [&](const Mat& g, const Vec& gl) -> Mat {
    Mat out(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) {
        double s = 0.0;
        for (int k = 0; k < r; ++k) s += M(i, k) * (g(k, j) - gl[j]);
        out(i, j) = s;
      }
    return out;
  };

  // affine part of the reduced residual: the first stage equation after v
  // and w are expressed through u
  auto reduced_affine = [&](const Mat& U) -> Mat {
    Mat tu = d_t(U, ub), xu = d_x(U, ul);
    Mat v = (tu + xu) / dt;
    Mat w = (xu - tu) / dx;
    Mat tv = d_t(v, vb), xv = d_x(v, vl);
    Mat tw = d_t(w, wb), xw = d_x(w, wl);
    return Mat(-tv / dt - tw / dx - xv / dt + xw / dx);
  };

  auto flatten = [&](const Mat& U) -> Vec {
    Vec u(r * r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) u[i * r + j] = U(i, j);
    return u;
  };
  auto unflatten = [&](const Vec& u) -> Mat {
    Mat U(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) U(i, j) = u[i * r + j];
    return U;
  };

  SolvabilityMatrix sol = build_B(tab, params.lambda);
  const Vec b_vec = dt * dt * flatten(reduced_affine(Mat::Zero(r, r)));

  if (contraction_warning) {
    *contraction_warning = false;
    if (wave.base.lipschitz_const) {
      double bound = max_stable_dt(sol, *wave.base.lipschitz_const);
      if (dt >= bound) *contraction_warning = true;
    }
  }

  Eigen::PartialPivLU<Mat> blu(sol.B);
  auto f_of = [&](const Vec& u) -> Vec {
    Vec out(r * r);
    for (int s = 0; s < r * r; ++s) out[s] = wave.f(u[s]);
    return out;
  };

  Vec u(r * r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) u[i * r + j] = 0.5 * (ul[j] + ub[i]);
  SolveReport rep;
  double res = std::numeric_limits<double>::infinity();
  while (rep.iterations < cfg.max_iter) {
    Vec rhs = b_vec + dt * dt * f_of(u);
    res = (sol.B * u - rhs).cwiseAbs().maxCoeff();
    if (!std::isfinite(res) || res <= cfg.tol) break;
    u = blu.solve(rhs);
    ++rep.iterations;
  }
  rep.final_residual = res;
  rep.converged = std::isfinite(res) && res <= cfg.tol;
  if (report) *report = rep;
  if (!rep.converged)
    throw std::runtime_error("reduced_wave_solve: iteration did not converge");

  // reconstruct v, w and the full stage tensors
  Mat U = unflatten(u);
  Mat tu = d_t(U, ub), xu = d_x(U, ul);
  Mat Vst = (tu + xu) / dt;
  Mat Wst = (xu - tu) / dx;

  Vec zflat(3 * r * r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      zflat.segment(3 * (i * r + j), 3) << U(i, j), Vst(i, j), Wst(i, j);
  TransformedCoeffs coeffs = transform_coeffs(wave.base, params);
  StageWorkspace ws(r, 3, wave.base, tab, coeffs, edges);
  return ws.export_block(zflat);
}

StageBlock solve_tangent_stages(const MultiHamiltonianSystem& sys,
                                const GaussTableau& tab,
                                const TransformedCoeffs& coeffs,
                                const StageBlock& primal,
                                const EdgeData& tangent_edges) {
  if (!sys.has_hess())
    throw std::invalid_argument("solve_tangent_stages: hess_S required");
  const int r = tab.r, n = sys.n, m = r * r * n;
  const Mat& M = tab.A_inv;
  const Vec sigma = M.rowwise().sum();

  Mat J = Mat::Zero(m, m);
  Vec rhs(m);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      const int row = (i * r + j) * n;
      for (int q = 0; q < r; ++q)
        J.block(row, (i * r + q) * n, n, n) += M(j, q) * coeffs.K_tilde;
      for (int p = 0; p < r; ++p)
        J.block(row, (p * r + j) * n, n, n) += M(i, p) * coeffs.L_tilde;
      J.block(row, row, n, n) -= sys.hess_S(primal.Z[primal.idx(i, j)]);
      rhs.segment(row, n) =
          coeffs.K_tilde * (sigma[j] * tangent_edges.bottom[i]) +
          coeffs.L_tilde * (sigma[i] * tangent_edges.left[j]);
    }

  Vec dz = lu_solve(J, rhs);
  StageWorkspace ws(r, n, sys, tab, coeffs, tangent_edges);
  return ws.export_block(dz);
}

ZigzagState rk_init(const StateFn& z0, const StateFn& z0_t,
                    const GaussTableau& tab, const MeshParams& params,
                    InitMode mode, const SpaceTimeFn& z_exact) {
  if (mode == InitMode::exact && !z_exact)
    throw std::invalid_argument("rk_init: exact mode needs z_exact");
  Vec probe = mode == InitMode::exact ? z_exact(params.a, 0.0) : z0(params.a);
  const int n = static_cast<int>(probe.size());
  ZigzagState state = make_zigzag(0, params.N, tab.r, n);
  for (int d = 0; d < params.N; ++d)
    for (int slot = 0; slot < state.stride(); ++slot) {
      NodeXT node = node_coords(params, tab.c, 0, d, slot);
      state.at(d, slot) = mode == InitMode::exact
                              ? z_exact(node.x, node.t)
                              : Vec(z0(node.x) + node.t * z0_t(node.x));
    }
  return state;
}

EdgeData edges_from_state(const ZigzagState& state, int diamond) {
  EdgeData edges;
  edges.corner = state.at(diamond, 0);
  edges.left.resize(state.r);
  edges.bottom.resize(state.r);
  for (int k = 1; k <= state.r; ++k) {
    edges.left[k - 1] = state.at(diamond, k);
    edges.bottom[k - 1] = state.at(diamond, state.r + k);
  }
  return edges;
}

ZigzagState rk_half_step(const MultiHamiltonianSystem& sys,
                         const GaussTableau& tab, const MeshParams& params,
                         const ZigzagState& state, const SolverConfig& cfg,
                         bool corner_extension, int threads) {
  const TransformedCoeffs coeffs = transform_coeffs(sys, params);
  std::vector<DiamondOutput> outputs(params.N);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  parallel_for(params.N, threads, [&](int d) {
    EdgeData edges = edges_from_state(state, d);
    try {
      StageBlock stages = solve_stages(sys, tab, coeffs, edges, cfg);
      auto [right, top] = update_edges(stages, edges, tab);
      DiamondOutput out;
      out.right = std::move(right);
      out.top = std::move(top);
      if (corner_extension) {
        auto [cr, ct] = solve_corner_extension(tab, edges);
        out.corner_right = std::move(cr);
        out.corner_top = std::move(ct);
      } else {
        out.corner_right = Vec::Constant(sys.n, nan);
        out.corner_top = Vec::Constant(sys.n, nan);
      }
      outputs[d] = std::move(out);
    } catch (const DiamondSolveError&) {
      throw;
    } catch (const std::exception& e) {
      throw DiamondSolveError(e.what(), state.level, d);
    }
  });

  return advance_reindex(outputs, params, state.level);
}

R1Edges map_simple_to_r1(const Vec& z_left, const Vec& z_bottom,
                         const Vec& z_right, const Vec& z_top) {
  R1Edges e;
  e.bottom = 0.5 * (z_bottom + z_right);
  e.top = 0.5 * (z_left + z_top);
  e.left = 0.5 * (z_bottom + z_left);
  e.right = 0.5 * (z_right + z_top);
  return e;
}

}  // namespace diamond
