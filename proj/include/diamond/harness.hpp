#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "diamond/conservation.hpp"
#include "diamond/rk_scheme.hpp"
#include "diamond/simple_scheme.hpp"

namespace diamond {

/// The sine-Gordon breather u(x,t) = 4 atan(sin(t/sqrt2)/cosh(x/sqrt2))
/// and its first derivatives.
struct BreatherPoint {
  double u, u_t, u_x;
};

BreatherPoint breather(double x, double t);

/// Breather as a wave-family state (u, u_t, u_x).
Vec breather_state(double x, double t);

/// Time derivative of the state, (u_t, u_tt, u_xt), differentiated
/// analytically.
Vec breather_state_t(double x, double t);

/// Sine-Gordon: u_tt - u_xx = -sin u, Lipschitz constant 1.
WaveSystem sine_gordon();

/// Zero-potential wave equation u_tt - u_xx = 0.
WaveSystem linear_wave();

/// One numerical u sample with the space-time point it lives at.
struct Sample {
  double x, t, u;
};

/// Discrete 2-norm error E = sqrt((b-a)/Ns * sum (u_i - u(x_i, t_i))^2),
/// the exact solution evaluated at each sample's own coordinates.
double error_norm(const std::vector<Sample>& samples,
                  const std::function<double(double, double)>& exact_u,
                  double a, double b);

/// Corner u values of a simple-scheme level (N samples at one time).
std::vector<Sample> sample_simple(const CornerGrid& grid,
                                  const MeshParams& params);

/// Edge-node u values of a zig-zag (2rN samples, nodes carry distinct t).
std::vector<Sample> sample_rk(const ZigzagState& state, const GaussTableau& tab,
                              const MeshParams& params);

struct ConvergenceRow {
  int N;
  double dt, error;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;  // sorted by decreasing dt
  double fitted_slope = 0.0;
};

/// Least-squares slope of log E against log dt; rows with E < 1e-12 are
/// dropped from the fit.
double fit_slope(const std::vector<ConvergenceRow>& rows);

enum class Scheme { simple, rk };
enum class BuiltinSystem { sine_gordon, linear_wave };

/// Where the rk convergence error is measured: at the diamond corners
/// (x = a + i dx at the final time, the classical grid restriction, values
/// from the corner extension) or at the zig-zag edge nodes (each with its
/// own (x, t); these superconverge at order r+1 for every r tested).
enum class ErrorNodes { corners, edges };

struct RunConfig {
  BuiltinSystem system = BuiltinSystem::sine_gordon;
  Scheme scheme = Scheme::simple;
  int r = 1;
  int N = 40;
  double a = -30.0, b = 30.0;
  double lambda = 0.5;
  long steps = 2;
  InitMode init = InitMode::exact;
  SolverConfig solver;
  int threads = 1;
  std::uint64_t seed = 0;
  bool corners = true;  ///< corner extension during rk runs
  int N0 = 40, levels = 6;  ///< convergence ladder N0, 2 N0, ...
  ErrorNodes error_nodes = ErrorNodes::corners;
  std::string output;
};

/// Breather convergence study for the simple scheme: N doubling from N0,
/// lambda fixed, T chosen so the coarsest run takes two steps.
ConvergenceTable converge_simple(const RunConfig& config);

/// Same ladder for the r-stage scheme with exact initialization; expected
/// slope r for odd r and r+1 for even r.
ConvergenceTable converge_rk(const RunConfig& config);

/// Simulates per config and renders the final state as snapshot CSV
/// (columns level,diamond,slot,x,t,z_0..z_{n-1}). Deterministic and
/// byte-identical for any thread count.
std::string run_snapshot_csv(const RunConfig& config);

struct SolvabilityRow {
  int r;
  double lambda, min_sv;
};

/// min singular value of B over r = 1..rmax and lambda_points values of
/// lambda equally spaced on [0, 1].
std::vector<SolvabilityRow> solvability_table(int rmax, int lambda_points);

struct ConservationRow {
  long level;
  int diamond;
  double residual;
};

/// Conservation-law residuals on a sine-Gordon run with seeded random
/// tangent pairs, one row per (level, diamond).
std::vector<ConservationRow> conservation_table(const RunConfig& config);

void write_convergence_csv(const ConvergenceTable& table, std::ostream& out);
void write_solvability_csv(const std::vector<SolvabilityRow>& rows,
                           std::ostream& out);
void write_conservation_csv(const std::vector<ConservationRow>& rows,
                            Scheme scheme, std::ostream& out);

/// JSON summary of a convergence run: config echo plus rows and slope.
std::string convergence_summary_json(const RunConfig& config,
                                     const ConvergenceTable& table);

/// Shortest-round-trip decimal formatting used in all CSV output.
std::string format_g17(double v);

}  // namespace diamond
