#include <doctest.h>

#include <cmath>
#include <random>

#include "diamond/harness.hpp"
#include "diamond/rk_scheme.hpp"

using namespace diamond;

namespace {

Vec random_state(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> uni(-scale, scale);
  Vec z(3);
  z << uni(rng), uni(rng), uni(rng);
  return z;
}

EdgeData random_edges(int r, std::mt19937_64& rng, double scale = 1.0) {
  EdgeData e;
  e.corner = random_state(rng, scale);
  for (int k = 0; k < r; ++k) {
    e.left.push_back(random_state(rng, scale));
    e.bottom.push_back(random_state(rng, scale));
  }
  return e;
}

EdgeData breather_edges(const GaussTableau& tab, const MeshParams& p, int d) {
  EdgeData e;
  NodeXT corner = node_coords(p, tab.c, 0, d, 0);
  e.corner = breather_state(corner.x, corner.t);
  for (int k = 1; k <= tab.r; ++k) {
    NodeXT left = node_coords(p, tab.c, 0, d, k);
    NodeXT bottom = node_coords(p, tab.c, 0, d, tab.r + k);
    e.left.push_back(breather_state(left.x, left.t));
    e.bottom.push_back(breather_state(bottom.x, bottom.t));
  }
  return e;
}

// the stage equations as written, assembled independently of the solver's
// elimination
double stage_equation_residual(const MultiHamiltonianSystem& sys,
                               const GaussTableau& tab,
                               const TransformedCoeffs& coeffs,
                               const EdgeData& edges, const StageBlock& s) {
  const int r = tab.r;
  double worst = 0.0;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      Vec eq1 = s.Z[s.idx(i, j)] - edges.left[j];
      Vec eq2 = s.Z[s.idx(i, j)] - edges.bottom[i];
      for (int k = 0; k < r; ++k) {
        eq1 -= tab.A(i, k) * s.X[s.idx(k, j)];
        eq2 -= tab.A(j, k) * s.T[s.idx(i, k)];
      }
      Vec eq3 = sys.grad_S(s.Z[s.idx(i, j)]) -
                coeffs.K_tilde * s.T[s.idx(i, j)] -
                coeffs.L_tilde * s.X[s.idx(i, j)];
      worst = std::max({worst, eq1.cwiseAbs().maxCoeff(),
                        eq2.cwiseAbs().maxCoeff(), eq3.cwiseAbs().maxCoeff()});
    }
  return worst;
}

}  // namespace

TEST_CASE("solve_stages at an equilibrium") {
  WaveSystem sg = sine_gordon();
  MeshParams p = make_mesh(16, -8.0, 8.0, 0.5, 2);
  GaussTableau tab = gauss_tableau(2);
  TransformedCoeffs coeffs = transform_coeffs(sg.base, p);
  SolverConfig cfg;

  EdgeData eq;
  eq.corner = Vec::Zero(3);
  eq.left.assign(2, Vec::Zero(3));
  eq.bottom.assign(2, Vec::Zero(3));
  StageBlock s = solve_stages(sg.base, tab, coeffs, eq, cfg);
  for (int idx = 0; idx < 4; ++idx) {
    CHECK(s.Z[idx].cwiseAbs().maxCoeff() < 1e-12);
    CHECK(s.X[idx].cwiseAbs().maxCoeff() < 1e-11);
    CHECK(s.T[idx].cwiseAbs().maxCoeff() < 1e-11);
  }
}

TEST_CASE("solve_stages satisfies the stage equations as written") {
  WaveSystem sg = sine_gordon();
  MeshParams p = make_mesh(16, -8.0, 8.0, 0.5, 3);
  GaussTableau tab = gauss_tableau(3);
  TransformedCoeffs coeffs = transform_coeffs(sg.base, p);
  SolverConfig cfg;

  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    EdgeData edges = random_edges(3, rng);
    StageBlock s = solve_stages(sg.base, tab, coeffs, edges, cfg);
    CHECK(stage_equation_residual(sg.base, tab, coeffs, edges, s) <
          10.0 * cfg.tol);
  }
}

TEST_CASE("solve_stages matches a dense assembly of the full linear system") {
  // unknowns ordered [Z; X; T], each r^2 n long, i-major stages
  WaveSystem wave = linear_wave();
  Mat S = Mat::Zero(3, 3);
  S(1, 1) = 1.0;
  S(2, 2) = -1.0;
  MultiHamiltonianSystem lin = make_linear_system(wave.base.K, wave.base.L, S);
  SolverConfig cfg;
  std::mt19937_64 rng(23);

  for (int r : {1, 2, 3}) {
    GaussTableau tab = gauss_tableau(r);
    MeshParams p = make_mesh(16, -8.0, 8.0, 0.75, r);
    TransformedCoeffs coeffs = transform_coeffs(lin, p);
    EdgeData edges = random_edges(r, rng);

    const int n = 3, blocks = r * r;
    const int m = 3 * blocks * n;
    Mat big = Mat::Zero(m, m);
    Vec rhs = Vec::Zero(m);
    auto zi = [&](int i, int j) { return (i * r + j) * n; };
    auto xi = [&](int i, int j) { return (blocks + i * r + j) * n; };
    auto ti = [&](int i, int j) { return (2 * blocks + i * r + j) * n; };
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) {
        int row1 = zi(i, j);  // Z_ij - sum_k a_ik X_kj = zl_j
        big.block(row1, zi(i, j), n, n) = Mat::Identity(n, n);
        for (int k = 0; k < r; ++k)
          big.block(row1, xi(k, j), n, n) -= tab.A(i, k) * Mat::Identity(n, n);
        rhs.segment(row1, n) = edges.left[j];

        int row2 = xi(i, j);  // Z_ij - sum_k a_jk T_ik = zb_i
        big.block(row2, zi(i, j), n, n) = Mat::Identity(n, n);
        for (int k = 0; k < r; ++k)
          big.block(row2, ti(i, k), n, n) -= tab.A(j, k) * Mat::Identity(n, n);
        rhs.segment(row2, n) = edges.bottom[i];

        int row3 = ti(i, j);  // -S Z_ij + Kt T_ij + Lt X_ij = 0
        big.block(row3, zi(i, j), n, n) = -S;
        big.block(row3, ti(i, j), n, n) = coeffs.K_tilde;
        big.block(row3, xi(i, j), n, n) = coeffs.L_tilde;
      }
    Vec dense = lu_solve(big, rhs);

    StageBlock s = solve_stages(lin, tab, coeffs, edges, cfg);
    double worst = 0.0;
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) {
        worst = std::max(worst, (s.Z[s.idx(i, j)] -
                                 dense.segment(zi(i, j), n)).cwiseAbs().maxCoeff());
        worst = std::max(worst, (s.X[s.idx(i, j)] -
                                 dense.segment(xi(i, j), n)).cwiseAbs().maxCoeff());
        worst = std::max(worst, (s.T[s.idx(i, j)] -
                                 dense.segment(ti(i, j), n)).cwiseAbs().maxCoeff());
      }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("update_edges") {
  GaussTableau tab = gauss_tableau(2);
  std::mt19937_64 rng(29);
  EdgeData edges = random_edges(2, rng);

  StageBlock s;
  s.r = 2;
  s.n = 3;
  s.Z.assign(4, Vec::Zero(3));
  s.X.assign(4, Vec::Zero(3));
  s.T.assign(4, Vec::Zero(3));
  auto [right0, top0] = update_edges(s, edges, tab);
  for (int i = 0; i < 2; ++i) {
    CHECK((right0[i] - edges.left[i]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((top0[i] - edges.bottom[i]).cwiseAbs().maxCoeff() == 0.0);
  }

  // sum b_k = 1, so tensors of ones advance every edge value by one
  s.X.assign(4, Vec::Ones(3));
  s.T.assign(4, Vec::Ones(3));
  auto [right1, top1] = update_edges(s, edges, tab);
  for (int i = 0; i < 2; ++i) {
    CHECK((right1[i] - edges.left[i] - Vec::Ones(3)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((top1[i] - edges.bottom[i] - Vec::Ones(3)).cwiseAbs().maxCoeff() < 1e-14);
  }

  // r = 1 reduces to right = left + X, top = bottom + T
  GaussTableau g1 = gauss_tableau(1);
  EdgeData e1 = random_edges(1, rng);
  StageBlock s1;
  s1.r = 1;
  s1.n = 3;
  s1.Z.assign(1, Vec::Zero(3));
  s1.X.assign(1, random_state(rng));
  s1.T.assign(1, random_state(rng));
  auto [right, top] = update_edges(s1, e1, g1);
  CHECK((right[0] - e1.left[0] - s1.X[0]).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((top[0] - e1.bottom[0] - s1.T[0]).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("solve_corner_extension") {
  std::mt19937_64 rng(37);

  SUBCASE("equilibrium edges keep the corner value") {
    GaussTableau tab = gauss_tableau(3);
    Vec z = random_state(rng);
    EdgeData eq;
    eq.corner = z;
    eq.left.assign(3, z);
    eq.bottom.assign(3, z);
    auto [cr, ct] = solve_corner_extension(tab, eq);
    CHECK((cr - z).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((ct - z).cwiseAbs().maxCoeff() < 1e-13);
  }

  SUBCASE("r = 1 extension inverts the midpoint map on wave data") {
    // edges built from a corner window by midpoint averaging: the extended
    // updates recover the right and left corners, so top + bottom equals
    // left + right on the reconstructed square
    GaussTableau g1 = gauss_tableau(1);
    for (int trial = 0; trial < 10; ++trial) {
      Vec zl = random_state(rng), zb = random_state(rng),
          zr = random_state(rng), zt = random_state(rng);
      R1Edges mid = map_simple_to_r1(zl, zb, zr, zt);
      EdgeData edges;
      edges.corner = zb;
      edges.left = {mid.left};
      edges.bottom = {mid.bottom};
      auto [cr, ct] = solve_corner_extension(g1, edges);
      CHECK((cr - zr).cwiseAbs().maxCoeff() < 1e-14);
      CHECK((ct - zl).cwiseAbs().maxCoeff() < 1e-14);
      CHECK((mid.top + mid.bottom - mid.left - mid.right).cwiseAbs().maxCoeff() <
            1e-14);
    }
  }

  SUBCASE("matches the dense solve of the extended equations") {
    for (int r : {1, 2, 3}) {
      GaussTableau tab = gauss_tableau(r);
      EdgeData edges = random_edges(r, rng);
      // A X^0 = zb - corner and A T^0 = zl - corner, solved per component
      Vec cr_oracle = edges.corner, ct_oracle = edges.corner;
      for (int comp = 0; comp < 3; ++comp) {
        Vec rhs_b(r), rhs_l(r);
        for (int i = 0; i < r; ++i) {
          rhs_b[i] = edges.bottom[i][comp] - edges.corner[comp];
          rhs_l[i] = edges.left[i][comp] - edges.corner[comp];
        }
        cr_oracle[comp] += tab.b.dot(lu_solve(tab.A, rhs_b));
        ct_oracle[comp] += tab.b.dot(lu_solve(tab.A, rhs_l));
      }
      auto [cr, ct] = solve_corner_extension(tab, edges);
      CHECK((cr - cr_oracle).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((ct - ct_oracle).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("map_simple_to_r1") {
  Vec c = Vec::Constant(3, 4.2);
  R1Edges constant = map_simple_to_r1(c, c, c, c);
  CHECK((constant.bottom - c).cwiseAbs().maxCoeff() == 0.0);
  CHECK((constant.top - c).cwiseAbs().maxCoeff() == 0.0);

  Vec e1 = Vec::Zero(3);
  e1[0] = 1.0;
  R1Edges mapped = map_simple_to_r1(0.0 * e1, 2.0 * e1, 4.0 * e1, 6.0 * e1);
  CHECK(mapped.bottom[0] == doctest::Approx(3.0));
  CHECK(mapped.top[0] == doctest::Approx(3.0));
  CHECK(mapped.left[0] == doctest::Approx(1.0));
  CHECK(mapped.right[0] == doctest::Approx(5.0));

  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    R1Edges e = map_simple_to_r1(random_state(rng), random_state(rng),
                                 random_state(rng), random_state(rng));
    CHECK((e.top - e.right + e.bottom - e.left).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("r = 1 scheme reproduces mapped simple-scheme solutions") {
  WaveSystem sg = sine_gordon();
  MeshParams p = make_mesh(16, -8.0, 8.0, 0.5, 1);
  GaussTableau tab = gauss_tableau(1);
  TransformedCoeffs coeffs = transform_coeffs(sg.base, p);
  SolverConfig cfg;

  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    Vec zl = random_state(rng), zb = random_state(rng), zr = random_state(rng);
    Vec zt = simple_diamond_update(sg.base, zl, zb, zr, p, cfg);
    R1Edges e = map_simple_to_r1(zl, zb, zr, zt);

    // the mapped data satisfies the r=1 diamond equations
    Vec center = 0.25 * (e.top + e.bottom + e.left + e.right);
    Vec eq1 = coeffs.K_tilde * (e.top - e.bottom) +
              coeffs.L_tilde * (e.right - e.left) - sg.base.grad_S(center);
    CHECK(eq1.cwiseAbs().maxCoeff() < 1e-10);
    CHECK((e.top - e.right + e.bottom - e.left).cwiseAbs().maxCoeff() < 1e-12);

    // and the r=1 stage solve reproduces the center point and the outputs
    EdgeData edges;
    edges.corner = zb;
    edges.left = {e.left};
    edges.bottom = {e.bottom};
    StageBlock s = solve_stages(sg.base, tab, coeffs, edges, cfg);
    CHECK((s.Z[0] - center).cwiseAbs().maxCoeff() < 1e-10);
    auto [right, top] = update_edges(s, edges, tab);
    CHECK((right[0] - e.right).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((top[0] - e.top).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("corner reconstruction from mapped edges recovers the corners") {
  // the local inverse of the midpoint map: edges plus one corner determine
  // the rest of the corner chain
  WaveSystem sg = sine_gordon();
  MeshParams p = make_mesh(8, -4.0, 4.0, 0.5, 1);
  SolverConfig cfg;
  auto z0 = [](double x) { return breather_state(x, 0.0); };
  auto z0_t = [](double x) { return breather_state_t(x, 0.0); };
  auto [l0, l1] = simple_init(z0, z0_t, p);

  // edges of the level-0 diamonds: zl = (zb + zlcorner)/2, zb_edge = ...
  const int twoN = 2 * p.N;
  Vec corner = l0.values[0];
  for (int d = 0; d < p.N; ++d) {
    int i = 2 * d;
    Vec left_mid = 0.5 * (l0.values[i] + l1.values[(i - 1 + twoN) % twoN]);
    Vec bottom_mid = 0.5 * (l0.values[i] + l1.values[(i + 1) % twoN]);
    // reconstruct: given the running corner value at index i
    CHECK((corner - l0.values[i]).cwiseAbs().maxCoeff() < 1e-12);
    Vec upper_right = 2.0 * bottom_mid - corner;  // l1 value at i+1
    CHECK((upper_right - l1.values[(i + 1) % twoN]).cwiseAbs().maxCoeff() < 1e-12);
    (void)left_mid;
    // next bottom corner via the next diamond's left edge midpoint
    Vec next_left_mid =
        0.5 * (l0.values[(i + 2) % twoN] + l1.values[(i + 1) % twoN]);
    corner = 2.0 * next_left_mid - upper_right;
  }
  (void)cfg;
  (void)sg;
}

TEST_CASE("reduced_wave_solve") {
  SolverConfig cfg;
  std::mt19937_64 rng(47);

  SUBCASE("f = 0 solves in one application of B^-1") {
    WaveSystem free_wave = linear_wave();
    GaussTableau tab = gauss_tableau(2);
    MeshParams p = make_mesh(16, -8.0, 8.0, 0.5, 2);
    EdgeData edges = random_edges(2, rng);
    SolveReport report;
    StageBlock s = reduced_wave_solve(free_wave, tab, p, edges, cfg, &report);
    CHECK(report.converged);
    CHECK(report.iterations <= 2);
    TransformedCoeffs coeffs = transform_coeffs(free_wave.base, p);
    CHECK(stage_equation_residual(free_wave.base, tab, coeffs, edges, s) < 1e-10);
  }

  SUBCASE("matches solve_stages on sine-Gordon, r in {1, 2}") {
    WaveSystem sg = sine_gordon();
    for (int r : {1, 2}) {
      GaussTableau tab = gauss_tableau(r);
      MeshParams p = make_mesh(16, -8.0, 8.0, 0.5, r);
      TransformedCoeffs coeffs = transform_coeffs(sg.base, p);
      for (int trial = 0; trial < 10; ++trial) {
        EdgeData edges = random_edges(r, rng);
        StageBlock direct = solve_stages(sg.base, tab, coeffs, edges, cfg);
        StageBlock reduced = reduced_wave_solve(sg, tab, p, edges, cfg);
        double worst = 0.0;
        for (int idx = 0; idx < r * r; ++idx) {
          worst = std::max(worst,
                           (direct.Z[idx] - reduced.Z[idx]).cwiseAbs().maxCoeff());
          worst = std::max(worst,
                           (direct.X[idx] - reduced.X[idx]).cwiseAbs().maxCoeff());
          worst = std::max(worst,
                           (direct.T[idx] - reduced.T[idx]).cwiseAbs().maxCoeff());
        }
        CHECK(worst < 1e-9);
      }
    }
  }

  SUBCASE("warns when dt exceeds the contraction bound") {
    WaveSystem sg = sine_gordon();
    GaussTableau tab = gauss_tableau(1);
    // r = 1 has B = [16] for every lambda, so the bound is dt < 4
    CHECK(max_stable_dt(build_B(tab, 0.5), 1.0) == doctest::Approx(4.0));
    MeshParams fine = make_mesh(64, -8.0, 8.0, 0.5, 1);
    MeshParams coarse = make_mesh(2, -8.0, 8.0, 0.55, 1);  // dt = 4.4
    EdgeData edges = random_edges(1, rng, 0.1);
    bool warn_fine = true, warn_coarse = false;
    reduced_wave_solve(sg, tab, fine, edges, cfg, nullptr, &warn_fine);
    CHECK(!warn_fine);
    // past the bound the warning fires; the iteration may then fail too
    try {
      reduced_wave_solve(sg, tab, coarse, edges, cfg, nullptr, &warn_coarse);
    } catch (const std::runtime_error&) {
    }
    CHECK(warn_coarse);
  }

  SUBCASE("the stage fixed-point mode follows the same contraction") {
    WaveSystem sg = sine_gordon();
    GaussTableau tab = gauss_tableau(2);
    MeshParams p = make_mesh(16, -8.0, 8.0, 0.5, 2);
    TransformedCoeffs coeffs = transform_coeffs(sg.base, p);
    EdgeData edges = random_edges(2, rng);
    SolverConfig fp = cfg;
    fp.method = SolverConfig::Method::fixed_point;
    fp.max_iter = 200;
    StageBlock iterated = solve_stages(sg.base, tab, coeffs, edges, fp);
    StageBlock direct = solve_stages(sg.base, tab, coeffs, edges, cfg);
    double worst = 0.0;
    for (int idx = 0; idx < 4; ++idx)
      worst = std::max(worst,
                       (iterated.Z[idx] - direct.Z[idx]).cwiseAbs().maxCoeff());
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("a generic n = 2 linear system runs through the whole pipeline") {
  Mat K(2, 2), L(2, 2), S(2, 2);
  K << 0.0, -1.0, 1.0, 0.0;
  L << 0.0, 0.5, -0.5, 0.0;
  S << 1.0, 0.25, 0.25, -2.0;
  MultiHamiltonianSystem sys = make_linear_system(K, L, S);
  CHECK(validate_system(sys).empty());

  GaussTableau tab = gauss_tableau(2);
  MeshParams p = make_mesh(6, 0.0, 3.0, 0.5, 2);
  TransformedCoeffs coeffs = transform_coeffs(sys, p);
  SolverConfig cfg;

  ZigzagState state = rk_init({}, {}, tab, p, InitMode::exact,
                              [](double x, double t) {
                                Vec z(2);
                                z << std::sin(2.0 * M_PI * x / 3.0 + t),
                                    std::cos(2.0 * M_PI * x / 3.0 - t);
                                return z;
                              });
  for (int h = 0; h < 4; ++h) {
    // every diamond's stages satisfy the equations as written
    for (int d = 0; d < p.N; ++d) {
      EdgeData edges = edges_from_state(state, d);
      StageBlock s = solve_stages(sys, tab, coeffs, edges, cfg);
      CHECK(stage_equation_residual(sys, tab, coeffs, edges, s) < 10.0 * cfg.tol);
    }
    state = rk_half_step(sys, tab, p, state, cfg, true);
  }
  CHECK(state.level == 4);
  for (int d = 0; d < p.N; ++d)
    for (int slot = 0; slot < state.stride(); ++slot)
      CHECK(state.at(d, slot).allFinite());

  // conservation residuals vanish for the generic system too
  std::mt19937_64 rng(83);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  ZigzagState p0 = rk_init({}, {}, tab, p, InitMode::exact,
                           [](double, double) { return Vec(Vec::Ones(2)); });
  ZigzagState xi0 = p0, eta0 = p0;
  for (int d = 0; d < p.N; ++d)
    for (int slot = 0; slot < p0.stride(); ++slot) {
      for (int c = 0; c < 2; ++c) xi0.at(d, slot)[c] = uni(rng);
      for (int c = 0; c < 2; ++c) eta0.at(d, slot)[c] = uni(rng);
    }
  RkTangentTrajectory traj =
      propagate_tangents_rk(sys, tab, p, p0, xi0, eta0, 4, cfg);
  FormEvaluator forms{K, L};
  for (const auto& level : traj.per_level_diamonds)
    for (const auto& diamond : level)
      CHECK(rk_conservation_residual(diamond, tab, p.dx, p.dt, forms) < 1e-9);
}

TEST_CASE("rk_init") {
  GaussTableau tab = gauss_tableau(2);
  MeshParams p = make_mesh(10, -5.0, 5.0, 0.5, 2);

  SUBCASE("exact mode samples the exact solution at each node") {
    ZigzagState state = rk_init({}, {}, tab, p, InitMode::exact,
                                [](double x, double t) { return breather_state(x, t); });
    CHECK(state.level == 0);
    for (int d = 0; d < p.N; ++d)
      for (int slot = 0; slot < state.stride(); ++slot) {
        NodeXT node = node_coords(p, tab.c, 0, d, slot);
        CHECK((state.at(d, slot) - breather_state(node.x, node.t))
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
      }
  }

  SUBCASE("corner nodes at t = 0 agree between the two modes") {
    ZigzagState exact = rk_init({}, {}, tab, p, InitMode::exact,
                                [](double x, double t) { return breather_state(x, t); });
    ZigzagState euler = rk_init([](double x) { return breather_state(x, 0.0); },
                                [](double x) { return breather_state_t(x, 0.0); },
                                tab, p, InitMode::euler);
    for (int d = 0; d < p.N; ++d)
      CHECK((exact.at(d, 0) - euler.at(d, 0)).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("constant data stays constant in either mode") {
    Vec c = Vec::Constant(3, 1.1);
    ZigzagState euler = rk_init([c](double) { return c; },
                                [](double) { return Vec(Vec::Zero(3)); }, tab, p,
                                InitMode::euler);
    ZigzagState exact =
        rk_init({}, {}, tab, p, InitMode::exact, [c](double, double) { return c; });
    for (int d = 0; d < p.N; ++d)
      for (int slot = 0; slot < euler.stride(); ++slot) {
        CHECK((euler.at(d, slot) - c).cwiseAbs().maxCoeff() == 0.0);
        CHECK((exact.at(d, slot) - c).cwiseAbs().maxCoeff() == 0.0);
      }
  }
}

TEST_CASE("rk_half_step") {
  WaveSystem sg = sine_gordon();
  SolverConfig cfg;

  SUBCASE("equilibrium state is unchanged") {
    GaussTableau tab = gauss_tableau(2);
    MeshParams p = make_mesh(6, -3.0, 3.0, 0.5, 2);
    Vec zero = Vec::Zero(3);
    ZigzagState state =
        rk_init({}, {}, tab, p, InitMode::exact, [&](double, double) { return zero; });
    ZigzagState next = rk_half_step(sg.base, tab, p, state, cfg, true);
    CHECK(next.level == 1);
    for (int d = 0; d < p.N; ++d)
      for (int slot = 0; slot < next.stride(); ++slot)
        CHECK(next.at(d, slot).cwiseAbs().maxCoeff() < 1e-11);
  }

  SUBCASE("forward then time-reversed half-step returns the state") {
    GaussTableau tab = gauss_tableau(2);
    MeshParams p = make_mesh(4, -2.0, 2.0, 0.5, 2);
    ZigzagState state = rk_init({}, {}, tab, p, InitMode::exact,
                                [](double x, double t) { return breather_state(x, t); });
    ZigzagState next = rk_half_step(sg.base, tab, p, state, cfg, false);

    // reversing time flips the sign of both coefficient matrices and runs
    // each diamond from its upper edges, stage order reversed
    MultiHamiltonianSystem reversed = sg.base;
    reversed.K = (-sg.base.K).eval();
    reversed.L = (-sg.base.L).eval();
    TransformedCoeffs rev_coeffs = transform_coeffs(reversed, p);

    const int r = tab.r, N = p.N;
    const bool even = (state.level % 2) == 0;
    for (int d = 0; d < N; ++d) {
      // inverse reindex: where did diamond d's outputs land in `next`?
      int right_home = even ? d : (d + 1) % N;
      int top_home = even ? (d - 1 + N) % N : d;
      EdgeData rev;
      rev.corner = Vec::Zero(3);  // unused by the stage solve
      rev.left.resize(r);
      rev.bottom.resize(r);
      for (int k = 0; k < r; ++k) {
        rev.left[k] = next.at(right_home, r - k);          // reversed right edge
        rev.bottom[k] = next.at(top_home, 2 * r - k);      // reversed top edge
      }
      StageBlock s = solve_stages(reversed, tab, rev_coeffs, rev, cfg);
      auto [rev_right, rev_top] = update_edges(s, rev, tab);
      EdgeData original = edges_from_state(state, d);
      for (int k = 0; k < r; ++k) {
        CHECK((rev_right[k] - original.left[r - 1 - k]).cwiseAbs().maxCoeff() <
              1e-8);
        CHECK((rev_top[k] - original.bottom[r - 1 - k]).cwiseAbs().maxCoeff() <
              1e-8);
      }
    }
  }

  SUBCASE("solver failure carries the location") {
    GaussTableau tab = gauss_tableau(2);
    MeshParams p = make_mesh(4, -2.0, 2.0, 0.5, 2);
    ZigzagState state = rk_init({}, {}, tab, p, InitMode::exact,
                                [](double x, double t) { return breather_state(x, t); });
    SolverConfig hopeless = cfg;
    hopeless.max_iter = 0;
    CHECK_THROWS_AS(rk_half_step(sg.base, tab, p, state, hopeless, false),
                    DiamondSolveError);
    // the failure also crosses worker threads intact
    CHECK_THROWS_AS(rk_half_step(sg.base, tab, p, state, hopeless, false, 4),
                    DiamondSolveError);
  }
}
