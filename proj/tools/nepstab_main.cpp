// Command-line front end: solve, analyze and perturb subcommands.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nepstab/report.hpp"

using namespace nepstab;

namespace {

struct RunConfig {
  std::string command;
  std::string game_path;
  std::string direction_path;
  std::string t_grid;
  std::string format = "text";
  std::string alpha = "uniform";
  int point_index = 0;
  double tol_active = kTolActive;
  double grid_res = 1e-2;
  int starts = 64;
  std::uint64_t seed = 0;
  double window = 0;  // 0 selects the default
};

void emit(const nlohmann::json& doc, const std::string& format,
          std::string (*text)(const nlohmann::json&)) {
  if (format == "json")
    std::cout << doc.dump(2) << "\n";
  else
    std::cout << text(doc);
}

PositivityOptions positivity(const RunConfig& c) {
  PositivityOptions o;
  o.grid_res = c.grid_res;
  o.starts = c.starts;
  o.seed = c.seed;
  return o;
}

KktPoint select_point(const QpNepGame& game, int index, const char* op) {
  const auto pts = enumerate_kkt(game, zero_perturbation(game));
  if (pts.empty())
    throw InputError(std::string(op) + ": the game has no KKT points");
  if (index < 0 || index >= static_cast<int>(pts.size()))
    throw InputError(std::string(op) + ": point index " + std::to_string(index) +
                     " out of range (" + std::to_string(pts.size()) + " points)");
  return pts[index];
}

int run_solve(const RunConfig& c) {
  const QpNepGame game = load_game(c.game_path);
  const auto pts = enumerate_kkt(game, zero_perturbation(game));
  emit(solve_document(game, pts, c.tol_active, positivity(c)), c.format,
       render_solve_text);
  return 0;
}

int run_analyze(const RunConfig& c) {
  const QpNepGame game = load_game(c.game_path);
  const KktPoint pt = select_point(game, c.point_index, "analyze");
  AnalyzeOptions opt;
  opt.positivity = positivity(c);
  opt.alpha_mode = c.alpha == "search" ? AlphaMode::kSearch : AlphaMode::kUniform;
  opt.tol_active = c.tol_active;
  const StabilityReport rep = analyze(game, zero_perturbation(game), pt, opt);
  emit(stability_document(rep), c.format, render_stability_text);
  return 0;
}

int run_perturb(const RunConfig& c) {
  const QpNepGame game = load_game(c.game_path);
  const PerturbationDirection dir = load_direction(c.direction_path, game);
  const std::vector<double> grid = parse_t_grid(c.t_grid);
  if (grid.size() < 2) throw InputError("perturb: the t grid needs at least 2 points");
  const KktPoint ref = select_point(game, c.point_index, "perturb");
  const bool use_default = c.window <= 0;
  const double window = use_default ? default_window(game, ref) : c.window;
  SweepResult sw = sweep(game, dir, ref, grid, window, positivity(c));
  const CalmnessEstimate est = estimate_calmness_constant(sw, dir, ref);
  const BranchSummary br = detect_branches(sw);
  emit(sweep_document(sw, est, br, use_default), c.format, render_sweep_text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stability certification for quadratic Nash equilibrium problems"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", cfg.format, "Output format")
        ->check(CLI::IsMember({"text", "json"}));
  };

  CLI::App* solve = app.add_subcommand("solve", "Enumerate all KKT points");
  solve->add_option("game", cfg.game_path, "Game file")->required();
  solve->add_option("--tol-active", cfg.tol_active, "Activity tolerance")
      ->check(CLI::PositiveNumber);
  add_format(solve);

  CLI::App* an = app.add_subcommand("analyze", "Stability verdicts at a KKT point");
  an->add_option("game", cfg.game_path, "Game file")->required();
  an->add_option("--point-index", cfg.point_index, "Index into the sorted KKT points")
      ->check(CLI::NonNegativeNumber);
  an->add_option("--grid-res", cfg.grid_res, "Grid resolution for certification")
      ->check(CLI::PositiveNumber);
  an->add_option("--starts", cfg.starts, "Multistart count")->check(CLI::PositiveNumber);
  an->add_option("--seed", cfg.seed, "Random seed");
  an->add_option("--alpha", cfg.alpha, "Pair parameters")
      ->check(CLI::IsMember({"uniform", "search"}));
  an->add_option("--tol-active", cfg.tol_active, "Activity tolerance")
      ->check(CLI::PositiveNumber);
  add_format(an);

  CLI::App* pe = app.add_subcommand("perturb", "Sweep tilt perturbations");
  pe->add_option("game", cfg.game_path, "Game file")->required();
  pe->add_option("--direction", cfg.direction_path, "Direction file")->required();
  pe->add_option("--t", cfg.t_grid, "START:STOP:COUNT")->required();
  pe->add_option("--window", cfg.window, "Window radius around the reference")
      ->check(CLI::PositiveNumber);
  pe->add_option("--point-index", cfg.point_index, "Reference point index")
      ->check(CLI::NonNegativeNumber);
  add_format(pe);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  const char* cmd = solve->parsed() ? "solve" : an->parsed() ? "analyze" : "perturb";
  try {
    if (solve->parsed()) return run_solve(cfg);
    if (an->parsed()) return run_analyze(cfg);
    return run_perturb(cfg);
  } catch (const InputError& e) {
    std::cerr << "nepstab " << cmd << ": invalid input: " << e.what() << "\n";
    return 1;
  } catch (const GuardError& e) {
    std::cerr << "nepstab " << cmd << ": guard exceeded: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "nepstab " << cmd << ": numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "nepstab " << cmd << ": " << e.what() << "\n";
    return 2;
  }
}
