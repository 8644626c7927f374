#include "jflow/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

namespace {

using jflow::cli::RunConfig;

/// Flags override config-file values; the config file overrides defaults;
/// JFLOW_OUT overrides everything for the output directory.
struct Collected {
  std::string config_file;
  std::string output_dir;
  int grid = -1;
  double tol = -1.0;
  std::map<std::string, std::string> params;
};

RunConfig assemble(const std::string& subcommand, const Collected& col) {
  RunConfig cfg;
  if (!col.config_file.empty())
    cfg = RunConfig::fromJson(jflow::readJsonFile(col.config_file));
  cfg.subcommand = subcommand;
  for (const auto& [k, v] : col.params) cfg.parameters[k] = v;
  if (!col.output_dir.empty()) cfg.output_dir = col.output_dir;
  if (col.grid > 0) cfg.grid = col.grid;
  if (col.tol > 0.0) cfg.tol = col.tol;
  if (const char* env = std::getenv("JFLOW_OUT"); env && *env) cfg.output_dir = env;
  return cfg;
}

void addCommon(CLI::App* app, Collected& col) {
  app->add_option("--config", col.config_file, "JSON config file; flags override it");
  app->add_option("--out", col.output_dir, "output directory");
  app->add_option("--grid", col.grid, "number of radial cells");
  app->add_option("--tol", col.tol, "solver tolerance");
}

void addParam(CLI::App* app, Collected& col, const std::string& key, const std::string& help,
              bool required = false) {
  auto* opt = app->add_option_function<std::string>(
      "--" + key, [&col, key](const std::string& v) { col.params[key] = v; }, help);
  if (required) opt->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"J-equation toolkit: stability calculus, vortex continuation solver, "
               "projective verifier, small-volume dHYM analyzer"};
  app.require_subcommand(1);

  Collected col;

  auto* stability = app.add_subcommand("stability", "exact slope/stability tests from JSON");
  addCommon(stability, col);
  addParam(stability, col, "input", "lattice/sheaf document (JSON)", true);
  addParam(stability, col, "k_samples", "comma-separated twist degrees for see-saw checks");

  auto* vortex = app.add_subcommand("vortex", "vortex bundle analysis");
  vortex->require_subcommand(1);
  auto* window = vortex->add_subcommand("window", "admissible s-interval for (r1, r2)");
  addCommon(window, col);
  addParam(window, col, "r1", "first twisting degree", true);
  addParam(window, col, "r2", "second twisting degree", true);
  auto* check = vortex->add_subcommand("check", "all parameter predicates as JSON");
  addCommon(check, col);
  addParam(check, col, "r1", "first twisting degree", true);
  addParam(check, col, "r2", "second twisting degree", true);
  addParam(check, col, "s", "Kaehler parameter, rational p/q", true);
  auto* solve = vortex->add_subcommand("solve", "continuation solve of the reduced equation");
  addCommon(solve, col);
  addParam(solve, col, "r1", "first twisting degree", true);
  addParam(solve, col, "r2", "second twisting degree", true);
  addParam(solve, col, "s", "Kaehler parameter, rational p/q", true);
  addParam(solve, col, "lambda2", "section scaling |phi|^2 coefficient, in (0, 1/2)", true);

  auto* projective = app.add_subcommand("projective", "exact J-equation check on T'CP^n");
  addCommon(projective, col);
  addParam(projective, col, "n", "projective space dimension (1..4)", true);

  auto* dhym = app.add_subcommand("dhym", "small-volume dHYM residual analysis");
  addCommon(dhym, col);
  addParam(dhym, col, "from", "directory holding a completed solve", true);
  addParam(dhym, col, "eps", "comma-separated eps list (1e-1.5 style accepted)");
  addParam(dhym, col, "newton", "run one Newton correction per eps (default 1)");

  auto* sweep = app.add_subcommand("sweep", "batch solves over a parameter grid");
  addCommon(sweep, col);
  addParam(sweep, col, "r1_list", "comma-separated r1 values", true);
  addParam(sweep, col, "r2_list", "comma-separated r2 values", true);
  addParam(sweep, col, "s_list", "comma-separated rational s values", true);
  addParam(sweep, col, "lambda2", "section scaling (default 0.4)");
  addParam(sweep, col, "threads", "worker pool size (default 2)");
  addParam(sweep, col, "with_dhym", "also fit the dHYM scaling slope per row");

  CLI11_PARSE(app, argc, argv);

  std::string sub;
  if (stability->parsed()) sub = "stability";
  else if (window->parsed()) sub = "vortex-window";
  else if (check->parsed()) sub = "vortex-check";
  else if (solve->parsed()) sub = "vortex-solve";
  else if (projective->parsed()) sub = "projective";
  else if (dhym->parsed()) sub = "dhym";
  else if (sweep->parsed()) sub = "sweep";

  try {
    return jflow::cli::run(assemble(sub, col));
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return jflow::cli::kConfigError;
  }
}
