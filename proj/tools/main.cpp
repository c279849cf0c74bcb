// bevar: weak solutions of weakly coercive nonlinear diffusion equations
//   dy/dt - div beta(t,x,y) grad ... = f  with Robin boundary conditions,
// computed as null minimizers of the convex duality functional and certified
// by the pointwise Fenchel gap.
//
//   bevar solve           --config heat.json [--out dir]
//   bevar compare         --config heat.json [--out dir]
//   bevar sweep           --config log.json --axis lambda --values 1e-1,1e-2,1e-3
//   bevar check-potential --config log.json

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bevar/cli_io.hpp"

namespace {

int load_config(const std::string& path, bevar::RunConfig& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "cannot open config file: " << path << "\n";
    return 2;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  const bevar::ParseResult parsed = bevar::parse_config(ss.str());
  if (!parsed.ok()) {
    for (const std::string& e : parsed.errors)
      std::cerr << "config error: " << e << "\n";
    return 2;
  }
  out = *parsed.config;
  return 0;
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"convex-duality solver for nonlinear diffusion equations"};
  app.require_subcommand(1);

  std::string config_path, out_dir, axis_name, values_csv;
  int jobs = 1;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "configuration file (JSON)")
        ->required();
    cmd->add_option("--out", out_dir, "output directory (overrides config)");
    cmd->add_option("--jobs", jobs, "parallel runs (sweep only)");
  };

  CLI::App* solve = app.add_subcommand("solve", "minimize and certify");
  add_common(solve);
  CLI::App* compare =
      app.add_subcommand("compare", "cross-validate against implicit Euler");
  add_common(compare);
  CLI::App* sweep = app.add_subcommand("sweep", "parameter sweep");
  add_common(sweep);
  sweep->add_option("--axis", axis_name, "lambda | sigma | steps | cells")
      ->required();
  sweep->add_option("--values", values_csv, "comma-separated positive values")
      ->required();
  CLI::App* check =
      app.add_subcommand("check-potential", "potential assumption checks");
  add_common(check);

  CLI11_PARSE(app, argc, argv);

  bevar::RunConfig cfg;
  if (int rc = load_config(config_path, cfg); rc != 0) return rc;

  try {
    if (solve->parsed()) return bevar::run_solve(cfg, out_dir);
    if (compare->parsed()) return bevar::run_compare(cfg, out_dir);
    if (sweep->parsed()) {
      const auto axis = bevar::sweep_axis_from_name(axis_name);
      if (!axis) {
        std::cerr << "unknown sweep axis: " << axis_name << "\n";
        return 2;
      }
      return bevar::run_sweep(cfg, *axis, parse_values(values_csv), out_dir,
                              jobs);
    }
    if (check->parsed()) return bevar::run_check_potential(cfg, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
