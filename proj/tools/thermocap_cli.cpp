// thermocap: capacity, Delta, dim_rho and Monte Carlo experiments from JSON configs.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "thermocap/capacity.hpp"
#include "thermocap/experiments.hpp"
#include "thermocap/parabolic_geometry.hpp"

using namespace thermocap;

namespace {

void write_json(const std::string& dir, const std::string& name, const json& j) {
  std::filesystem::create_directories(dir);
  std::ofstream out(std::filesystem::path(dir) / name);
  if (!out) throw ConfigError("cannot write into " + dir);
  out << j.dump(2) << "\n";
}

std::vector<double> default_rho_scales(const ProductSetSpec& s) {
  double f = 0.5;
  for (const auto& a : s.space)
    if (!a.degenerate() && !a.full_interval()) f = a.spec.ratio;
  return geometric_scales(0.25, f, 10);
}

int cmd_capacity(const std::string& file, double gamma, int level, const std::string& out) {
  auto c = load_config(file);
  int L = level >= 0 ? level : c.levels.max;
  int tl = matched_time_level(c.set, L, c.time_level);
  auto cells = natural_cells(c.set, tl, L);
  if (cells.size() > 10000) throw ConfigError("level needs more than 10000 atoms");
  auto r = min_energy(cells, gamma);
  json j{{"gamma", gamma},
         {"level", L},
         {"time_level", tl},
         {"atoms", cells.size()},
         {"min_energy", std::isinf(r.min_energy) ? json("inf") : json(r.min_energy)},
         {"capacity", r.capacity},
         {"iterations", r.iterations},
         {"gap", r.gap},
         {"converged", r.converged},
         {"degenerate_kernel", r.degenerate_kernel},
         {"excluded_atoms", r.excluded_atoms}};
  std::cout << j.dump(2) << "\n";
  write_json(out.empty() ? c.out_dir : out, "capacity.json", j);
  return 0;
}

int cmd_delta(const std::string& file, const std::string& out) {
  auto c = load_config(file);
  auto est = estimate_delta(c.set, c.gamma_grid, c.levels);
  json j = delta_to_json(est);
  j["config_hash"] = config_hash(c.raw);
  std::cout << "delta = " << est.delta << "\n";
  write_json(out.empty() ? c.out_dir : out, "delta.json", j);
  return 0;
}

int cmd_dimrho(const std::string& file, const std::string& out) {
  auto c = load_config(file);
  auto scales = c.scales.empty() ? default_rho_scales(c.set) : c.scales;
  auto rep = estimate_dim_rho(c.set, scales);
  json j = box_report_json(rep);
  j["exact"] = c.set.rho_dimension();
  std::cout << "dim_rho slope = " << rep.slope << " (exact " << c.set.rho_dimension() << ")\n";
  std::string dir = out.empty() ? c.out_dir : out;
  write_json(dir, "dimrho.json", j);
  write_svg_loglog(box_plot(rep, "dimrho.svg", "parabolic box counts"),
                   (std::filesystem::path(dir) / "dimrho.svg").string());
  return 0;
}

int cmd_simulate(const std::string& file, long trial, const std::string& out) {
  auto c = load_config(file);
  RngStream rng(c.seed, stream_id(static_cast<uint64_t>(trial), 0));
  BrownianPath p;
  p.d = c.d;
  p.seed = c.seed;
  p.stream = rng.stream();
  int lvl = sampling_cover_level(c.set.time, c.h, c.time_level);
  walk_path_on_cover(c.set.time, lvl, c.h, c.d, rng, [&](double t, const Vec& x) {
    p.times.push_back(t);
    p.values.push_back(x);
  });
  std::string dir = out.empty() ? c.out_dir : out;
  std::filesystem::create_directories(dir);
  write_path_csv((std::filesystem::path(dir) / "path.csv").string(), p);
  std::cout << "wrote " << p.size() << " samples\n";
  return 0;
}

int cmd_experiment(const std::string& file, const std::string& out) {
  auto c = load_config(file);
  auto rep = run_experiment(c);
  std::string dir = out.empty() ? c.out_dir : out;
  write_report(rep, dir);
  std::cout << summarize_report_dir(dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thermal capacity and Brownian image dimension tools"};
  app.require_subcommand(1);
  std::string config, out, dir;
  double gamma = 0.0;
  int level = -1;
  long trial = 0;

  auto* cap = app.add_subcommand("capacity", "minimal E_gamma energy of the natural cell measure");
  cap->add_option("--config", config, "config file")->required();
  cap->add_option("--gamma", gamma, "energy exponent");
  cap->add_option("--level", level, "space level (default levels.max)");
  cap->add_option("--out", out, "output directory");

  auto* del = app.add_subcommand("delta", "estimate Delta = sup{gamma : E_gamma finite}");
  del->add_option("--config", config, "config file")->required();
  del->add_option("--out", out, "output directory");

  auto* dr = app.add_subcommand("dimrho", "parabolic box dimension from exact covers");
  dr->add_option("--config", config, "config file")->required();
  dr->add_option("--out", out, "output directory");

  auto* sim = app.add_subcommand("simulate", "dump one Brownian path on the E cover");
  sim->add_option("--config", config, "config file")->required();
  sim->add_option("--trial", trial, "trial index");
  sim->add_option("--out", out, "output directory");

  auto* exp = app.add_subcommand("experiment", "Monte Carlo experiments");
  exp->require_subcommand(1);
  auto* run = exp->add_subcommand("run", "run the experiment in a config file");
  run->add_option("config", config, "config file")->required();
  run->add_option("--out", out, "output directory");

  auto* rep = app.add_subcommand("report", "summarize a report directory");
  rep->add_option("dir", dir, "report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*cap) return cmd_capacity(config, gamma, level, out);
    if (*del) return cmd_delta(config, out);
    if (*dr) return cmd_dimrho(config, out);
    if (*sim) return cmd_simulate(config, trial, out);
    if (*run) return cmd_experiment(config, out);
    if (*rep) {
      std::cout << summarize_report_dir(dir);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << " (residual " << e.residual() << ")\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
