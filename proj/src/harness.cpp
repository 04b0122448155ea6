#include "diamond/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "diamond/tableau.hpp"

namespace diamond {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

BreatherPoint breather(double x, double t) {
  const double tau = t / kSqrt2, chi = x / kSqrt2;
  const double s = std::sin(tau), c = std::cosh(chi);
  const double g = s / c;
  const double D = 1.0 + g * g;
  const double g_t = std::cos(tau) / (kSqrt2 * c);
  const double g_x = -s * std::sinh(chi) / (kSqrt2 * c * c);
  BreatherPoint p;
  p.u = 4.0 * std::atan(g);
  p.u_t = 4.0 * g_t / D;
  p.u_x = 4.0 * g_x / D;
  return p;
}

Vec breather_state(double x, double t) {
  BreatherPoint p = breather(x, t);
  Vec z(3);
  z << p.u, p.u_t, p.u_x;
  return z;
}

Vec breather_state_t(double x, double t) {
  const double tau = t / kSqrt2, chi = x / kSqrt2;
  const double s = std::sin(tau), c = std::cosh(chi);
  const double g = s / c;
  const double D = 1.0 + g * g;
  const double g_t = std::cos(tau) / (kSqrt2 * c);
  const double g_x = -s * std::sinh(chi) / (kSqrt2 * c * c);
  const double g_tt = -s / (2.0 * c);
  const double g_tx = -std::cos(tau) * std::sinh(chi) / (2.0 * c * c);
  Vec zt(3);
  zt[0] = 4.0 * g_t / D;
  zt[1] = 4.0 * (g_tt * D - 2.0 * g * g_t * g_t) / (D * D);
  zt[2] = 4.0 * (g_tx * D - 2.0 * g * g_t * g_x) / (D * D);
  return zt;
}

WaveSystem sine_gordon() {
  WaveSystem wave = make_wave_system([](double u) { return -std::sin(u); },
                                     [](double u) { return -std::cos(u); });
  wave.base.lipschitz_const = 1.0;
  return wave;
}

WaveSystem linear_wave() {
  WaveSystem wave = make_wave_system([](double) { return 0.0; },
                                     [](double) { return 0.0; });
  wave.base.lipschitz_const = 1.0;  // |grad_S| growth is set by the v, w rows
  return wave;
}

double error_norm(const std::vector<Sample>& samples,
                  const std::function<double(double, double)>& exact_u,
                  double a, double b) {
  if (samples.empty()) return 0.0;
  double sum = 0.0;
  for (const Sample& s : samples) {
    double diff = s.u - exact_u(s.x, s.t);
    sum += diff * diff;
  }
  return std::sqrt((b - a) / samples.size() * sum);
}

std::vector<Sample> sample_simple(const CornerGrid& grid,
                                  const MeshParams& params) {
  std::vector<Sample> samples;
  samples.reserve(params.N);
  const int parity = static_cast<int>(grid.level % 2);
  const double t = grid.level * params.dt / 2.0;
  for (int d = 0; d < params.N; ++d) {
    const int i = parity + 2 * d;
    samples.push_back({params.a + i * params.dx / 2.0, t, grid.values[i][0]});
  }
  return samples;
}

std::vector<Sample> sample_rk(const ZigzagState& state, const GaussTableau& tab,
                              const MeshParams& params) {
  std::vector<Sample> samples;
  samples.reserve(static_cast<size_t>(2) * tab.r * state.N);
  for (int d = 0; d < state.N; ++d)
    for (int slot = 1; slot <= 2 * tab.r; ++slot) {
      NodeXT node = node_coords(params, tab.c, state.level, d, slot);
      samples.push_back({node.x, node.t, state.at(d, slot)[0]});
    }
  return samples;
}

double fit_slope(const std::vector<ConvergenceRow>& rows) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const auto& row : rows) {
    if (row.error < 1e-12) continue;
    double lx = std::log(row.dt), ly = std::log(row.error);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  if (m < 2) return 0.0;
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

namespace {

double exact_breather_u(double x, double t) { return breather(x, t).u; }

}  // namespace

ConvergenceTable converge_simple(const RunConfig& config) {
  const WaveSystem wave = sine_gordon();
  ConvergenceTable table;
  const MeshParams coarse =
      make_mesh(config.N0, config.a, config.b, config.lambda, 1);
  const double T = 2.0 * coarse.dt;  // the coarsest run takes two steps

  for (int k = 0; k < config.levels; ++k) {
    const int N = config.N0 << k;
    const MeshParams params = make_mesh(N, config.a, config.b, config.lambda, 1);
    const long steps = std::lround(T / params.dt);
    CornerGrid final_grid = simple_run(
        wave.base, params, [](double x) { return breather_state(x, 0.0); },
        [](double x) { return breather_state_t(x, 0.0); }, steps, config.solver,
        config.threads);
    double err = error_norm(sample_simple(final_grid, params), exact_breather_u,
                            config.a, config.b);
    table.rows.push_back({N, params.dt, err});
  }
  table.fitted_slope = fit_slope(table.rows);
  return table;
}

ConvergenceTable converge_rk(const RunConfig& config) {
  const WaveSystem wave = sine_gordon();
  const GaussTableau tab = gauss_tableau(config.r);
  ConvergenceTable table;
  const MeshParams coarse =
      make_mesh(config.N0, config.a, config.b, config.lambda, config.r);
  const double T = 2.0 * coarse.dt;  // twice the largest time step
  const bool at_corners = config.error_nodes == ErrorNodes::corners;

  for (int k = 0; k < config.levels; ++k) {
    const int N = config.N0 << k;
    const MeshParams params =
        make_mesh(N, config.a, config.b, config.lambda, config.r);
    const long half_steps = 2 * std::lround(T / params.dt);
    ZigzagState state = rk_init({}, {}, tab, params, InitMode::exact,
                                [](double x, double t) { return breather_state(x, t); });

    // corner values restricted to the classical grid, carried as the
    // forward chain of z_r^0 candidates (one consistent member of the
    // corner reconstruction family); the edge solve never reads them
    std::vector<Vec> chain(N);
    for (int d = 0; d < N; ++d) chain[d] = state.at(d, 0);

    for (long h = 0; h < half_steps; ++h) {
      if (at_corners) {
        std::vector<Vec> candidate(N);
        for (int d = 0; d < N; ++d) {
          EdgeData edges = edges_from_state(state, d);
          edges.corner = chain[d];
          candidate[d] = solve_corner_extension(tab, edges).first;
        }
        const bool even = (state.level % 2) == 0;
        for (int d = 0; d < N; ++d)
          chain[d] = candidate[even ? d : (d - 1 + N) % N];
      }
      state = rk_half_step(wave.base, tab, params, state, config.solver, false,
                           config.threads);
    }

    double err;
    if (at_corners) {
      std::vector<Sample> samples;
      samples.reserve(N);
      for (int d = 0; d < N; ++d) {
        NodeXT node = node_coords(params, tab.c, state.level, d, 0);
        samples.push_back({node.x, node.t, chain[d][0]});
      }
      err = error_norm(samples, exact_breather_u, config.a, config.b);
    } else {
      err = error_norm(sample_rk(state, tab, params), exact_breather_u,
                       config.a, config.b);
    }
    table.rows.push_back({N, params.dt, err});
  }
  table.fitted_slope = fit_slope(table.rows);
  return table;
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

WaveSystem builtin_system(BuiltinSystem which) {
  return which == BuiltinSystem::sine_gordon ? sine_gordon() : linear_wave();
}

// periodic traveling wave, the linear-wave counterpart of the breather
Vec linear_wave_state(double x, double t, double a, double b) {
  const double kappa = 2.0 * M_PI / (b - a);
  Vec z(3);
  z << std::sin(kappa * (x - t)), -kappa * std::cos(kappa * (x - t)),
      kappa * std::cos(kappa * (x - t));
  return z;
}

Vec linear_wave_state_t(double x, double t, double a, double b) {
  const double kappa = 2.0 * M_PI / (b - a);
  Vec zt(3);
  zt << -kappa * std::cos(kappa * (x - t)),
      -kappa * kappa * std::sin(kappa * (x - t)),
      kappa * kappa * std::sin(kappa * (x - t));
  return zt;
}

SpaceTimeFn exact_state_fn(const RunConfig& config) {
  if (config.system == BuiltinSystem::sine_gordon)
    return [](double x, double t) { return breather_state(x, t); };
  double a = config.a, b = config.b;
  return [a, b](double x, double t) { return linear_wave_state(x, t, a, b); };
}

}  // namespace

std::string run_snapshot_csv(const RunConfig& config) {
  const WaveSystem wave = builtin_system(config.system);
  std::ostringstream out;
  out << "level,diamond,slot,x,t,z_0,z_1,z_2\n";

  auto emit = [&](long level, int diamond, int slot, double x, double t,
                  const Vec& z) {
    out << level << ',' << diamond << ',' << slot << ',' << format_g17(x) << ','
        << format_g17(t);
    for (int c = 0; c < z.size(); ++c) out << ',' << format_g17(z[c]);
    out << '\n';
  };

  const SpaceTimeFn exact = exact_state_fn(config);
  if (config.scheme == Scheme::simple) {
    const MeshParams params =
        make_mesh(config.N, config.a, config.b, config.lambda, 1);
    StateFn z0 = [&](double x) { return exact(x, 0.0); };
    StateFn z0_t = config.system == BuiltinSystem::sine_gordon
                       ? StateFn([](double x) { return breather_state_t(x, 0.0); })
                       : StateFn([&](double x) {
                           return linear_wave_state_t(x, 0.0, config.a, config.b);
                         });
    CornerGrid grid = simple_run(wave.base, params, z0, z0_t, config.steps,
                                 config.solver, config.threads);
    const int parity = static_cast<int>(grid.level % 2);
    const double t = grid.level * params.dt / 2.0;
    for (int d = 0; d < params.N; ++d) {
      const int i = parity + 2 * d;
      emit(grid.level, i, 0, params.a + i * params.dx / 2.0, t, grid.values[i]);
    }
  } else {
    const MeshParams params =
        make_mesh(config.N, config.a, config.b, config.lambda, config.r);
    const GaussTableau tab = gauss_tableau(config.r);
    ZigzagState state;
    if (config.init == InitMode::exact) {
      state = rk_init({}, {}, tab, params, InitMode::exact, exact);
    } else {
      StateFn z0 = [&](double x) { return exact(x, 0.0); };
      StateFn z0_t = config.system == BuiltinSystem::sine_gordon
                         ? StateFn([](double x) { return breather_state_t(x, 0.0); })
                         : StateFn([&](double x) {
                             return linear_wave_state_t(x, 0.0, config.a, config.b);
                           });
      state = rk_init(z0, z0_t, tab, params, InitMode::euler);
    }
    for (long h = 0; h < 2 * config.steps; ++h)
      state = rk_half_step(wave.base, tab, params, state, config.solver,
                           config.corners, config.threads);
    for (int d = 0; d < state.N; ++d)
      for (int slot = 0; slot < state.stride(); ++slot) {
        NodeXT node = node_coords(params, tab.c, state.level, d, slot);
        emit(state.level, d, slot, node.x, node.t, state.at(d, slot));
      }
  }
  return out.str();
}

std::vector<SolvabilityRow> solvability_table(int rmax, int lambda_points) {
  std::vector<SolvabilityRow> rows;
  for (int r = 1; r <= rmax; ++r) {
    const GaussTableau tab = gauss_tableau(r);
    for (int k = 0; k < lambda_points; ++k) {
      double lambda =
          lambda_points == 1 ? 0.0 : static_cast<double>(k) / (lambda_points - 1);
      SolvabilityMatrix B = build_B(tab, lambda);
      rows.push_back({r, lambda, min_singular_value(B.B)});
    }
  }
  return rows;
}

std::vector<ConservationRow> conservation_table(const RunConfig& config) {
  const WaveSystem wave = sine_gordon();
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  auto random_vec = [&](int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = uni(rng);
    return v;
  };

  std::vector<ConservationRow> rows;
  if (config.scheme == Scheme::simple) {
    const MeshParams params =
        make_mesh(config.N, config.a, config.b, config.lambda, 1);
    auto [p0, p1] =
        simple_init([](double x) { return breather_state(x, 0.0); },
                    [](double x) { return breather_state_t(x, 0.0); }, params);
    CornerGrid xi0 = p0, xi1 = p1, eta0 = p0, eta1 = p1;
    for (int i = 0; i < 2 * params.N; ++i) {
      xi0.values[i] = i % 2 == 0 ? random_vec(3) : Vec::Zero(3);
      eta0.values[i] = i % 2 == 0 ? random_vec(3) : Vec::Zero(3);
      xi1.values[i] = i % 2 == 1 ? random_vec(3) : Vec::Zero(3);
      eta1.values[i] = i % 2 == 1 ? random_vec(3) : Vec::Zero(3);
    }
    SimpleTangentTrajectory traj = propagate_tangents_simple(
        wave.base, params, p0, p1, xi0, xi1, eta0, eta1, config.steps,
        config.solver);
    const FormEvaluator forms{wave.base.K, wave.base.L};
    const int twoN = 2 * params.N;
    for (size_t level = 2; level < traj.primal.size(); ++level) {
      const int parity = static_cast<int>(level % 2);
      for (int d = 0; d < params.N; ++d) {
        const int i = parity + 2 * d;
        const int il = (i - 1 + twoN) % twoN, ir = (i + 1) % twoN;
        NodeTangents left{traj.xi[level - 1].values[il],
                          traj.eta[level - 1].values[il]};
        NodeTangents right{traj.xi[level - 1].values[ir],
                           traj.eta[level - 1].values[ir]};
        NodeTangents bottom{traj.xi[level - 2].values[i],
                            traj.eta[level - 2].values[i]};
        NodeTangents top{traj.xi[level].values[i], traj.eta[level].values[i]};
        rows.push_back({static_cast<long>(level), d,
                        simple_conservation_residual(left, bottom, right, top,
                                                     params.dx, params.dt,
                                                     forms)});
      }
    }
  } else {
    const MeshParams params =
        make_mesh(config.N, config.a, config.b, config.lambda, config.r);
    const GaussTableau tab = gauss_tableau(config.r);
    ZigzagState p0 = rk_init({}, {}, tab, params, InitMode::exact,
                             [](double x, double t) { return breather_state(x, t); });
    ZigzagState xi0 = p0, eta0 = p0;
    for (int d = 0; d < params.N; ++d)
      for (int slot = 0; slot < p0.stride(); ++slot) {
        xi0.at(d, slot) = random_vec(3);
        eta0.at(d, slot) = random_vec(3);
      }
    RkTangentTrajectory traj = propagate_tangents_rk(
        wave.base, tab, params, p0, xi0, eta0, 2 * config.steps, config.solver);
    const FormEvaluator forms{wave.base.K, wave.base.L};
    for (size_t level = 0; level < traj.per_level_diamonds.size(); ++level)
      for (int d = 0; d < params.N; ++d)
        rows.push_back(
            {static_cast<long>(level), d,
             rk_conservation_residual(traj.per_level_diamonds[level][d], tab,
                                      params.dx, params.dt, forms)});
  }
  return rows;
}

void write_convergence_csv(const ConvergenceTable& table, std::ostream& out) {
  out << "N,dt,error\n";
  for (const auto& row : table.rows)
    out << row.N << ',' << format_g17(row.dt) << ',' << format_g17(row.error)
        << '\n';
}

void write_solvability_csv(const std::vector<SolvabilityRow>& rows,
                           std::ostream& out) {
  out << "r,lambda,min_singular_value\n";
  for (const auto& row : rows)
    out << row.r << ',' << format_g17(row.lambda) << ','
        << format_g17(row.min_sv) << '\n';
}

void write_conservation_csv(const std::vector<ConservationRow>& rows,
                            Scheme scheme, std::ostream& out) {
  out << "level,diamond,"
      << (scheme == Scheme::simple ? "residual_simple" : "residual_rk") << '\n';
  for (const auto& row : rows)
    out << row.level << ',' << row.diamond << ',' << format_g17(row.residual)
        << '\n';
}

std::string convergence_summary_json(const RunConfig& config,
                                     const ConvergenceTable& table) {
  nlohmann::json j;
  j["config"] = {
      {"system",
       config.system == BuiltinSystem::sine_gordon ? "sine_gordon" : "linear_wave"},
      {"scheme", config.scheme == Scheme::simple ? "simple" : "rk"},
      {"r", config.r},
      {"N0", config.N0},
      {"levels", config.levels},
      {"lambda", config.lambda},
      {"a", config.a},
      {"b", config.b},
      {"init", config.init == InitMode::exact ? "exact" : "euler"},
      {"error_nodes",
       config.error_nodes == ErrorNodes::corners ? "corners" : "edges"},
      {"threads", config.threads},
  };
  j["rows"] = nlohmann::json::array();
  for (const auto& row : table.rows)
    j["rows"].push_back({{"N", row.N}, {"dt", row.dt}, {"error", row.error}});
  j["fitted_slope"] = table.fitted_slope;
  return j.dump(2);
}

}  // namespace diamond
