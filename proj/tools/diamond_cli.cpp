#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "diamond/dispersion.hpp"
#include "diamond/harness.hpp"
#include "diamond/tableau.hpp"

namespace {

using namespace diamond;

int default_threads() {
  if (const char* env = std::getenv("DIAMOND_THREADS")) {
    int t = std::atoi(env);
    if (t >= 1) return t;
  }
  return 1;
}

void apply_config_file(const std::string& path, RunConfig& config) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  nlohmann::json j;
  in >> j;

  auto get = [&](const char* key, auto& slot) {
    if (j.contains(key)) slot = j.at(key).template get<std::decay_t<decltype(slot)>>();
  };
  std::string system, scheme, init;
  get("system", system);
  get("scheme", scheme);
  get("init", init);
  if (system == "sine_gordon") config.system = BuiltinSystem::sine_gordon;
  else if (system == "linear_wave") config.system = BuiltinSystem::linear_wave;
  else if (!system.empty()) throw std::invalid_argument("config: unknown system " + system);
  if (scheme == "simple") config.scheme = Scheme::simple;
  else if (scheme == "rk") config.scheme = Scheme::rk;
  else if (!scheme.empty()) throw std::invalid_argument("config: unknown scheme " + scheme);
  if (init == "exact") config.init = InitMode::exact;
  else if (init == "euler") config.init = InitMode::euler;
  else if (!init.empty()) throw std::invalid_argument("config: unknown init " + init);

  get("r", config.r);
  get("N", config.N);
  get("a", config.a);
  get("b", config.b);
  get("lambda", config.lambda);
  long steps = config.steps;
  get("steps", steps);
  config.steps = steps;
  get("threads", config.threads);
  get("seed", config.seed);
  get("corners", config.corners);
  get("N0", config.N0);
  get("levels", config.levels);
  get("output", config.output);
  std::string error_nodes;
  get("error_nodes", error_nodes);
  if (error_nodes == "corners") config.error_nodes = ErrorNodes::corners;
  else if (error_nodes == "edges") config.error_nodes = ErrorNodes::edges;
  else if (!error_nodes.empty())
    throw std::invalid_argument("config: unknown error_nodes " + error_nodes);
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    if (s.contains("method")) {
      std::string m = s.at("method").get<std::string>();
      if (m == "newton") config.solver.method = SolverConfig::Method::newton;
      else if (m == "fixed_point") config.solver.method = SolverConfig::Method::fixed_point;
      else if (m == "auto") config.solver.method = SolverConfig::Method::automatic;
      else throw std::invalid_argument("config: unknown solver method " + m);
    }
    if (s.contains("tol")) config.solver.tol = s.at("tol").get<double>();
    if (s.contains("max_iter")) config.solver.max_iter = s.at("max_iter").get<int>();
    if (s.contains("damping")) config.solver.damping = s.at("damping").get<double>();
  }
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open output file: " + path);
  out << text;
}

DispersionProblem dispersion_problem(const std::string& system) {
  if (system == "wave") {
    WaveSystem wave = linear_wave();
    Mat S = Mat::Zero(3, 3);
    S(1, 1) = 1.0;
    S(2, 2) = -1.0;
    return DispersionProblem::matrices(wave.base.K, wave.base.L, S);
  }
  if (system == "cubic")
    return DispersionProblem::custom([](double xi, double omega) {
      return Complex(omega - xi + xi * xi * xi, 0.0);
    });
  // otherwise a JSON file with K, L, S as row-major arrays of rows
  std::ifstream in(system);
  if (!in) throw std::invalid_argument("dispersion: unknown system or missing file: " + system);
  nlohmann::json j;
  in >> j;
  auto load = [&](const char* key) {
    const auto& rows = j.at(key);
    Mat M(rows.size(), rows.at(0).size());
    for (size_t i = 0; i < rows.size(); ++i)
      for (size_t k = 0; k < rows.at(i).size(); ++k)
        M(i, k) = rows.at(i).at(k).get<double>();
    return M;
  };
  return DispersionProblem::matrices(load("K"), load("L"), load("S"));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multisymplectic diamond-scheme integrator"};
  app.require_subcommand(1);

  RunConfig config;
  config.threads = default_threads();
  std::string config_path;
  std::string system_name = "sine_gordon", scheme_name = "simple",
              init_name = "exact";
  double tol = config.solver.tol;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file; flags override");
    cmd->add_option("--system", system_name, "sine_gordon | linear_wave");
    cmd->add_option("--scheme", scheme_name, "simple | rk");
    cmd->add_option("--r", config.r, "stage count for the rk scheme");
    cmd->add_option("--N", config.N, "diamonds per level");
    cmd->add_option("--a", config.a, "left domain endpoint");
    cmd->add_option("--b", config.b, "right domain endpoint");
    cmd->add_option("--lambda", config.lambda, "Courant number dt/dx");
    cmd->add_option("--steps", config.steps, "number of full steps");
    cmd->add_option("--init", init_name, "exact | euler");
    cmd->add_option("--threads", config.threads,
                    "worker count (default from DIAMOND_THREADS)");
    cmd->add_option("--seed", config.seed, "seed for randomized diagnostics");
    cmd->add_option("--corners", config.corners,
                    "compute corner values during rk runs");
    cmd->add_option("--tol", tol, "solver residual tolerance");
    cmd->add_option("--output,-o", config.output, "output path (default stdout)");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "simulate and write a snapshot CSV");
  add_common(run_cmd);
  double duration = -1.0;
  bool timing = false;
  run_cmd->add_option("--T", duration,
                      "duration; rounded to whole steps, overrides --steps");
  run_cmd->add_flag("--time", timing, "report wall-clock stepping time on stderr");

  CLI::App* conv_cmd =
      app.add_subcommand("converge", "breather convergence study (CSV + JSON)");
  add_common(conv_cmd);
  std::string json_path, error_nodes_name = "corners";
  conv_cmd->add_option("--N0", config.N0, "coarsest ladder resolution");
  conv_cmd->add_option("--levels", config.levels, "ladder length (N doubling)");
  conv_cmd->add_option("--error-nodes", error_nodes_name,
                       "rk error samples: corners | edges");
  conv_cmd->add_option("--json", json_path, "also write a JSON summary here");

  CLI::App* disp_cmd = app.add_subcommand("dispersion", "dispersion curves CSV");
  std::string disp_system = "wave";
  std::vector<double> disp_lambdas;
  double disp_dx = 1.0;
  int resolution = 512;
  std::string disp_output;
  disp_cmd->add_option("--system", disp_system,
                       "wave | cubic | path to a JSON matrix file");
  disp_cmd->add_option("--lambda", disp_lambdas,
                       "Courant numbers, one discrete curve each "
                       "(default 2 1 0.5; cubic defaults to 2 1 0.025)");
  disp_cmd->add_option("--dx", disp_dx, "grid spacing");
  disp_cmd->add_option("--resolution", resolution, "scan grid resolution");
  disp_cmd->add_option("--output,-o", disp_output, "output path");

  CLI::App* solv_cmd =
      app.add_subcommand("solvability", "min singular value of B over (r, lambda)");
  int rmax = 5, lambda_grid = 21;
  std::string solv_output;
  solv_cmd->add_option("--rmax", rmax, "largest stage count");
  solv_cmd->add_option("--lambda-grid", lambda_grid, "lambda samples on [0,1]");
  solv_cmd->add_option("--output,-o", solv_output, "output path");

  CLI::App* cons_cmd = app.add_subcommand(
      "conservation", "discrete conservation-law residuals on random tangents");
  add_common(cons_cmd);

  CLI::App* check_cmd =
      app.add_subcommand("check", "validate built-in systems and tableaus");
  int check_rmax = 8;
  check_cmd->add_option("--rmax", check_rmax, "largest stage count to check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    const bool has_common =
        run_cmd->parsed() || conv_cmd->parsed() || cons_cmd->parsed();

    // config file first, explicit flags override it
    if (has_common && !config_path.empty()) {
      RunConfig from_file;
      from_file.threads = config.threads;
      apply_config_file(config_path, from_file);
      auto keep = [&](const char* flag, auto& slot, const auto& file_value) {
        if (active->count(flag) == 0) slot = file_value;
      };
      keep("--system", config.system, from_file.system);
      keep("--scheme", config.scheme, from_file.scheme);
      keep("--r", config.r, from_file.r);
      keep("--N", config.N, from_file.N);
      keep("--a", config.a, from_file.a);
      keep("--b", config.b, from_file.b);
      keep("--lambda", config.lambda, from_file.lambda);
      keep("--steps", config.steps, from_file.steps);
      keep("--init", config.init, from_file.init);
      keep("--threads", config.threads, from_file.threads);
      keep("--seed", config.seed, from_file.seed);
      keep("--corners", config.corners, from_file.corners);
      keep("--output", config.output, from_file.output);
      if (active->count("--tol") == 0) config.solver = from_file.solver;
      if (conv_cmd->parsed()) {
        keep("--N0", config.N0, from_file.N0);
        keep("--levels", config.levels, from_file.levels);
      }
    }
    if (has_common && active->count("--system"))
      config.system = system_name == "linear_wave" ? BuiltinSystem::linear_wave
                                                   : BuiltinSystem::sine_gordon;
    if (has_common && active->count("--scheme"))
      config.scheme = scheme_name == "rk" ? Scheme::rk : Scheme::simple;
    if (has_common && active->count("--init"))
      config.init = init_name == "euler" ? InitMode::euler : InitMode::exact;
    if (has_common && active->count("--tol")) config.solver.tol = tol;
    if (conv_cmd->parsed() && conv_cmd->count("--error-nodes"))
      config.error_nodes = error_nodes_name == "edges" ? ErrorNodes::edges
                                                       : ErrorNodes::corners;

    if (run_cmd->parsed()) {
      if (duration >= 0.0) {
        double dx = (config.b - config.a) / config.N;
        config.steps = std::lround(duration / (config.lambda * dx));
      }
      auto start = std::chrono::steady_clock::now();
      std::string csv = run_snapshot_csv(config);
      if (timing) {
        std::chrono::duration<double> elapsed =
            std::chrono::steady_clock::now() - start;
        std::cerr << "run: " << elapsed.count() << " s with " << config.threads
                  << " thread(s)\n";
      }
      write_output(config.output, csv);
    } else if (conv_cmd->parsed()) {
      ConvergenceTable table = config.scheme == Scheme::simple
                                   ? converge_simple(config)
                                   : converge_rk(config);
      std::ostringstream csv;
      write_convergence_csv(table, csv);
      write_output(config.output, csv.str());
      if (!json_path.empty())
        write_output(json_path, convergence_summary_json(config, table) + "\n");
      std::cerr << "fitted slope: " << table.fitted_slope << "\n";
    } else if (disp_cmd->parsed()) {
      if (disp_lambdas.empty())
        disp_lambdas = disp_system == "cubic"
                           ? std::vector<double>{2.0, 1.0, 0.025}
                           : std::vector<double>{2.0, 1.0, 0.5};
      std::ostringstream csv;
      emit_dispersion_curves(dispersion_problem(disp_system), disp_dx,
                             disp_lambdas, resolution, csv);
      write_output(disp_output, csv.str());
    } else if (solv_cmd->parsed()) {
      std::ostringstream csv;
      write_solvability_csv(solvability_table(rmax, lambda_grid), csv);
      write_output(solv_output, csv.str());
    } else if (cons_cmd->parsed()) {
      std::ostringstream csv;
      write_conservation_csv(conservation_table(config), config.scheme, csv);
      write_output(config.output, csv.str());
    } else if (check_cmd->parsed()) {
      bool clean = true;
      const std::vector<std::pair<std::string, WaveSystem>> builtins = {
          {"sine_gordon", sine_gordon()}, {"linear_wave", linear_wave()}};
      for (const auto& [name, wave] : builtins) {
        for (const std::string& d : validate_system(wave.base)) {
          std::cerr << name << ": " << d << "\n";
          clean = false;
        }
      }
      for (int r = 1; r <= check_rmax; ++r) {
        const GaussTableau tab = gauss_tableau(r);
        double id_err = inf_norm(Mat(tab.A_inv * tab.A - Mat::Identity(r, r)));
        if (id_err > 1e-13) {
          std::cerr << "tableau r=" << r << ": A_inv accuracy " << id_err << "\n";
          clean = false;
        }
        for (int q = 1; q <= 2 * r; ++q) {
          double sum = 0.0;
          for (int k = 0; k < r; ++k) sum += tab.b[k] * std::pow(tab.c[k], q - 1);
          if (std::abs(sum - 1.0 / q) > 1e-12) {
            std::cerr << "tableau r=" << r << ": order condition q=" << q
                      << " residual " << std::abs(sum - 1.0 / q) << "\n";
            clean = false;
          }
        }
      }
      std::cout << (clean ? "all checks passed\n" : "checks failed\n");
      return clean ? 0 : 1;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
