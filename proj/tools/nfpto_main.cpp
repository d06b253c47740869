#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "nfpto/diagnostics.hpp"
#include "nfpto/io.hpp"
#include "nfpto/optimizer.hpp"

namespace {

namespace fs = std::filesystem;
using namespace nfpto;

// Raw option strings funnel through RunConfig::set so file and flag values
// share one validation path; flags win over the config file.
struct CliOverrides {
  std::vector<std::pair<std::string, std::string>> pairs;
  void apply(RunConfig& cfg) const {
    for (const auto& [key, value] : pairs) cfg.set(key, value, "--" + key);
  }
};

void add_run_options(CLI::App* cmd, std::string& config_path,
                     CliOverrides& over) {
  cmd->add_option("--config", config_path, "key=value configuration file");
  static const std::vector<std::pair<std::string, std::string>> flags = {
      {"preset", "problem preset (cantilever|mbb|inverter)"},
      {"nelx", "design cells along x"},
      {"nely", "design cells along y"},
      {"vf", "volume fraction limit"},
      {"ls", "neighborhood half-width in cells"},
      {"lambda", "objective scale factor"},
      {"max-iters", "iteration cap"},
      {"seed", "rng seed for sampled diagnostics"},
      {"out", "output directory"},
  };
  for (const auto& [name, help] : flags) {
    std::string key = name == "out" ? "out_dir"
                      : name == "max-iters" ? "max_iters"
                                            : name;
    auto* opt = cmd->add_option_function<std::string>(
        "--" + name,
        [&over, key](const std::string& v) { over.pairs.emplace_back(key, v); },
        help);
    opt->type_name("VALUE");
  }
}

RunConfig load_config(const std::string& config_path,
                      const CliOverrides& over) {
  RunConfig cfg;
  if (!config_path.empty()) cfg = parse_config_file(config_path);
  over.apply(cfg);
  return cfg;
}

// Echo with preset defaults resolved to the values actually used.
RunConfig resolve_for_echo(RunConfig cfg, const Problem& problem) {
  cfg.preset.nelx = problem.grid.nelx;
  cfg.preset.nely = problem.grid.nely;
  cfg.preset.vf = problem.vf;
  cfg.preset.lambda = problem.lambda;
  if (cfg.opt.design_change_tol < 0.0)
    cfg.opt.design_change_tol = 1e-4 * std::abs(problem.beta_lb);
  return cfg;
}

int cmd_run(const std::string& config_path, const CliOverrides& over) {
  RunConfig cfg = load_config(config_path, over);
  Problem problem = make_problem(cfg.preset);
  if (problem.topo.window_covers_domain)
    std::cerr << "warning: a neighborhood window spans the whole domain\n";

  fs::create_directories(cfg.out_dir);
  {
    std::ofstream echo(fs::path(cfg.out_dir) / "config_resolved.cfg");
    echo << resolve_for_echo(cfg, problem).resolved();
  }

  OptSettings settings = cfg.opt;
  settings.on_record = [](const OptRecord& r) {
    std::printf("it: %4d  obj: %.6e  vol: %.4f  gray: %.4f  ch: %.3e\n",
                r.iter, r.objective, r.volume_fraction, r.grayness,
                r.max_design_change);
  };
  OptResult result = solve(problem, settings);

  const FieldFile density = density_to_file(problem.grid, result.rho);
  write_field_csv((fs::path(cfg.out_dir) / "density.csv").string(), density);
  write_pgm((fs::path(cfg.out_dir) / "density.pgm").string(), density);
  write_history_csv((fs::path(cfg.out_dir) / "history.csv").string(),
                    result.history);

  const OptRecord& last = result.history.records.back();
  std::ostringstream summary;
  summary << "preset=" << problem.preset << "\n";
  summary << "iterations=" << result.history.iterations << "\n";
  summary << "termination=" << result.history.termination << "\n";
  summary << "final_objective=" << format_full(last.objective) << "\n";
  summary << "final_volume_fraction=" << format_full(last.volume_fraction)
          << "\n";
  summary << "final_grayness=" << format_full(last.grayness) << "\n";
  summary << "final_constraint_violation="
          << format_full(last.constraint_violation) << "\n";
  if (problem.kind == ObjectiveKind::mechanism)
    summary << "output_displacement="
            << format_full(result.report.output_displacement) << "\n";
  std::ofstream(fs::path(cfg.out_dir) / "summary.txt") << summary.str();
  std::cout << summary.str();
  std::cout << "outputs written to " << cfg.out_dir << "\n";
  return 0;
}

int cmd_gradcheck(const std::string& config_path, const CliOverrides& over,
                  const std::string& samples) {
  RunConfig cfg = load_config(config_path, over);
  if (!samples.empty()) cfg.set("gradcheck_samples", samples, "--samples");
  Problem problem = make_problem(cfg.preset);

  GradCheckResult res =
      gradcheck(problem, cfg.gradcheck_samples, cfg.seed);
  std::printf("%8s  %22s  %22s  %12s\n", "index", "analytic", "fd",
              "rel_err");
  for (const auto& row : res.rows)
    std::printf("%8d  %22.15e  %22.15e  %12.3e\n", row.design, row.analytic,
                row.fd, row.rel_err);
  std::printf("max relative error: %.3e over %zu components\n",
              res.max_rel_err, res.rows.size());
  if (res.max_rel_err > 1e-4) {
    std::fprintf(stderr, "gradcheck FAILED (max rel err %.3e > 1e-4)\n",
                 res.max_rel_err);
    return 3;
  }
  std::printf("gradcheck passed\n");
  return 0;
}

int cmd_invert(const std::string& density_path, int ls,
               const std::string& out_dir) {
  const FieldFile field = read_field_csv(density_path);
  CellGrid grid;
  grid.nelx = field.nelx;
  grid.nely = field.nely;
  const NeighborhoodTopology topo = build_neighborhoods(grid, ls);
  const std::vector<double> rho = file_to_cells(grid, field);

  const InversionResult inv = beta_from_density(rho, topo);

  fs::create_directories(out_dir);
  FieldFile beta;
  beta.nelx = grid.nelx;
  beta.nely = grid.nely;
  beta.values.resize(inv.beta.size());
  for (int cx = 0; cx < grid.nelx; ++cx)
    for (int cy = 0; cy < grid.nely; ++cy)
      beta.values[static_cast<size_t>(grid.nely - 1 - cy) * grid.nelx + cx] =
          inv.beta[grid.cell_index(cx, cy)];
  const std::string beta_path = (fs::path(out_dir) / "beta.csv").string();
  write_field_csv(beta_path, beta);

  std::cout << "beta written to " << beta_path << "\n";
  const int n = grid.cell_count();
  if (inv.rank < n)
    std::cout << "membership matrix is rank-deficient (rank " << inv.rank
              << " of " << n << "); sign-constrained least-squares fit, "
              << "max log-survival misfit " << inv.residual << "\n";
  if (inv.feasible) {
    std::cout << "field is nFP-feasible (all beta <= 0)\n";
  } else if (!inv.positive_cells.empty()) {
    std::cout << "field is NOT nFP-feasible: " << inv.positive_cells.size()
              << " cells demand beta > 0:";
    for (int cell : inv.positive_cells) {
      const int cx = grid.cell_x(cell), cy = grid.cell_y(cell);
      std::cout << " (" << cx << "," << cy << ")";
    }
    std::cout << "\n";
  } else {
    std::cout << "field is NOT nFP-feasible: no beta reproduces it "
              << "(max log-survival misfit " << inv.residual << ")\n";
  }
  return 0;
}

int cmd_render(const std::string& density_path, std::string out_path) {
  const FieldFile field = read_field_csv(density_path);
  if (out_path.empty())
    out_path = fs::path(density_path).replace_extension(".pgm").string();
  write_pgm(out_path, field);
  std::cout << "image written to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2-D topology optimization with field-product densities"};
  app.require_subcommand(1);

  std::string run_config, grad_config;
  CliOverrides run_over, grad_over;
  auto* run = app.add_subcommand("run", "optimize a preset problem");
  add_run_options(run, run_config, run_over);

  auto* grad = app.add_subcommand(
      "gradcheck", "finite-difference audit of the objective gradient");
  add_run_options(grad, grad_config, grad_over);
  std::string grad_samples;
  grad->add_option("--samples", grad_samples, "components to sample")
      ->type_name("N");

  auto* invert = app.add_subcommand(
      "invert", "recover beta from a density field");
  std::string invert_density, invert_out = "out";
  int invert_ls = 1;
  invert->add_option("density", invert_density, "density csv file")
      ->required();
  invert->add_option("--ls", invert_ls, "neighborhood half-width");
  invert->add_option("--out", invert_out, "output directory");

  auto* render = app.add_subcommand("render", "density field to PGM image");
  std::string render_density, render_out;
  render->add_option("density", render_density, "density csv file")
      ->required();
  render->add_option("--out", render_out, "output image path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(run_config, run_over);
    if (grad->parsed()) return cmd_gradcheck(grad_config, grad_over,
                                             grad_samples);
    if (invert->parsed())
      return cmd_invert(invert_density, invert_ls, invert_out);
    if (render->parsed()) return cmd_render(render_density, render_out);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
