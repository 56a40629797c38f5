// Batch front door: capacities, shell series reports, weighted Dirichlet
// solves and path sampling from JSON configs, emitting JSON/CSV artifacts.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "logcap/runner.hpp"

namespace {

namespace fs = std::filesystem;
using logcap::json;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  json j;
  in >> j;
  return j;
}

bool parse_range(const std::string& text, int& lo, int& hi) {
  auto dots = text.find("..");
  if (dots == std::string::npos) return false;
  lo = std::stoi(text.substr(0, dots));
  hi = std::stoi(text.substr(dots + 2));
  return true;
}

json parse_probes(const std::string& text) {
  // "t,theta;t,theta;..."
  json probes = json::array();
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto semi = text.find(';', pos);
    std::string item = text.substr(pos, semi == std::string::npos ? std::string::npos : semi - pos);
    auto comma = item.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("probe format is t,theta;...");
    probes.push_back(json{{"t", std::stod(item.substr(0, comma))},
                          {"theta", std::stod(item.substr(comma + 1))}});
    if (semi == std::string::npos) break;
    pos = semi + 1;
  }
  return probes;
}

int finish(const logcap::RunResult& result, const fs::path& outdir, bool quiet) {
  if (result.exit_code != 0) {
    if (!quiet) std::cerr << "error: " << result.message << "\n";
    return result.exit_code;
  }
  if (!quiet) std::cout << "outputs written to " << outdir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"potential-theory engine for the punctured unit disk"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string outdir = "out";
  bool quiet = false;
  app.add_option("--out", outdir, "output directory")->capture_default_str();
  app.add_flag("--quiet", quiet, "suppress status messages");

  // ---- capacity --------------------------------------------------------
  auto* cap = app.add_subcommand("capacity", "capacity of a compact set");
  std::string cap_geometry, cap_field, cap_route = "equilibrium";
  double cap_resolution = 512.0 / logcap::kTwoPi;
  std::size_t cap_max_nodes = 4096;
  cap->add_option("--geometry", cap_geometry, "geometry JSON file")->required();
  cap->add_option("--field", cap_field, "coefficient field JSON file");
  cap->add_option("--route", cap_route, "equilibrium | obstacle | both")->capture_default_str();
  cap->add_option("--resolution", cap_resolution, "panel nodes per unit size");
  cap->add_option("--max-nodes", cap_max_nodes, "node budget");

  // ---- wiener ----------------------------------------------------------
  auto* wie = app.add_subcommand("wiener", "shell series report and verdict");
  std::string wie_family, wie_geometry, wie_field, wie_range = "1..6", wie_rhos;
  double wie_a = 2.0, wie_eps = 0.0, wie_resolution = 48.0, wie_tmin = 1.0;
  int wie_k = 1, wie_first = 2;
  wie->add_option("--family", wie_family, "deleted_radius | sparse_intervals");
  wie->add_option("--geometry", wie_geometry, "geometry JSON file");
  wie->add_option("--field", wie_field, "coefficient field JSON file");
  wie->add_option("--a", wie_a, "shell ratio")->capture_default_str();
  wie->add_option("--n", wie_range, "shell range lo..hi")->capture_default_str();
  wie->add_option("--eps", wie_eps, "sparse family exponent offset");
  wie->add_option("--k", wie_k, "sparse family iterated-log depth");
  wie->add_option("--N", wie_first, "sparse family first interval index");
  wie->add_option("--t-min", wie_tmin, "deleted radius inner cut");
  wie->add_option("--resolution", wie_resolution, "panel nodes per unit size");
  wie->add_option("--rho", wie_rhos, "integral grid, comma separated");

  // ---- solve -----------------------------------------------------------
  auto* sol = app.add_subcommand("solve", "weighted Dirichlet solve and gap table");
  std::string sol_geometry, sol_data, sol_field, sol_truncs = "16,32,64", sol_probes;
  sol->add_option("--geometry", sol_geometry, "geometry JSON file")->required();
  sol->add_option("--data", sol_data, "boundary data JSON file");
  sol->add_option("--field", sol_field, "coefficient field JSON file");
  sol->add_option("--truncations", sol_truncs, "comma separated t ceilings")
      ->capture_default_str();
  sol->add_option("--probes", sol_probes, "probes t,theta;t,theta;...");

  // ---- simulate --------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "conditioned path sampling statistics");
  std::string sim_geometry, sim_start = "1.0,3.14159265358979", sim_law;
  std::size_t sim_paths = 1000;
  std::uint64_t sim_seed = 1;
  double sim_step = 0.01, sim_tmax = 50.0, sim_a = 2.0;
  int sim_dump = 0;
  sim->add_option("--geometry", sim_geometry, "geometry JSON file")->required();
  sim->add_option("--start", sim_start, "start point t,theta")->capture_default_str();
  sim->add_option("--paths", sim_paths, "number of paths")->capture_default_str();
  sim->add_option("--seed", sim_seed, "random seed")->capture_default_str();
  sim->add_option("--step", sim_step, "nominal time step");
  sim->add_option("--tmax", sim_tmax, "termination level");
  sim->add_option("--a", sim_a, "shell ratio for hit bucketing");
  sim->add_option("--law", sim_law, "asymptotic-law shell range lo..hi");
  sim->add_option("--dump-paths", sim_dump, "store this many decimated paths");

  // ---- family ----------------------------------------------------------
  auto* fam = app.add_subcommand("family", "emit a built-in geometry JSON");
  std::string fam_name, fam_range = "1..6";
  double fam_a = 2.0, fam_eps = 0.0, fam_tmin = 1.0;
  int fam_k = 1, fam_first = 2;
  fam->add_option("--name", fam_name, "deleted_radius | sparse_intervals")->required();
  fam->add_option("--a", fam_a, "shell ratio")->capture_default_str();
  fam->add_option("--n", fam_range, "shell range lo..hi")->capture_default_str();
  fam->add_option("--eps", fam_eps, "sparse family exponent offset");
  fam->add_option("--k", fam_k, "sparse family iterated-log depth");
  fam->add_option("--N", fam_first, "sparse family first interval index");
  fam->add_option("--t-min", fam_tmin, "deleted radius inner cut");

  // ---- rerun -----------------------------------------------------------
  auto* rer = app.add_subcommand("rerun", "re-run a persisted config");
  std::string rer_config;
  rer->add_option("--config", rer_config, "config JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    json config;
    if (cap->parsed()) {
      config["command"] = "capacity";
      config["geometry"] = read_json_file(cap_geometry);
      if (!cap_field.empty()) config["field"] = read_json_file(cap_field);
      config["route"] = cap_route;
      config["resolution"] = cap_resolution;
      config["max_nodes"] = cap_max_nodes;
    } else if (wie->parsed()) {
      config["command"] = "wiener";
      int lo = 1, hi = 6;
      if (!parse_range(wie_range, lo, hi)) throw std::invalid_argument("--n expects lo..hi");
      if (!wie_family.empty()) {
        config["family"] = json{{"name", wie_family}, {"a", wie_a},    {"n_min", lo},
                                {"n_max", hi},        {"eps", wie_eps}, {"k", wie_k},
                                {"first", wie_first}, {"t_min", wie_tmin}};
      } else if (!wie_geometry.empty()) {
        config["geometry"] = read_json_file(wie_geometry);
      } else {
        throw std::invalid_argument("wiener needs --family or --geometry");
      }
      if (!wie_field.empty()) config["field"] = read_json_file(wie_field);
      config["a"] = wie_a;
      config["n_min"] = lo;
      config["n_max"] = hi;
      config["resolution"] = wie_resolution;
      if (!wie_rhos.empty()) {
        json grid = json::array();
        std::size_t pos = 0;
        while (pos < wie_rhos.size()) {
          auto comma = wie_rhos.find(',', pos);
          grid.push_back(std::stod(wie_rhos.substr(pos, comma - pos)));
          if (comma == std::string::npos) break;
          pos = comma + 1;
        }
        config["rho_grid"] = grid;
      }
    } else if (sol->parsed()) {
      config["command"] = "solve";
      config["geometry"] = read_json_file(sol_geometry);
      if (!sol_data.empty()) config["data"] = read_json_file(sol_data);
      if (!sol_field.empty()) config["field"] = read_json_file(sol_field);
      json truncs = json::array();
      std::size_t pos = 0;
      while (pos < sol_truncs.size()) {
        auto comma = sol_truncs.find(',', pos);
        truncs.push_back(std::stod(sol_truncs.substr(pos, comma - pos)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
      config["truncations"] = truncs;
      if (!sol_probes.empty()) config["probes"] = parse_probes(sol_probes);
    } else if (sim->parsed()) {
      config["command"] = "simulate";
      config["geometry"] = read_json_file(sim_geometry);
      auto comma = sim_start.find(',');
      if (comma == std::string::npos) throw std::invalid_argument("--start expects t,theta");
      config["start"] = json{{"t", std::stod(sim_start.substr(0, comma))},
                             {"theta", std::stod(sim_start.substr(comma + 1))}};
      config["n_paths"] = sim_paths;
      config["seed"] = sim_seed;
      config["step"] = sim_step;
      config["t_max"] = sim_tmax;
      config["a"] = sim_a;
      if (!sim_law.empty()) {
        int lo = 0, hi = 0;
        if (!parse_range(sim_law, lo, hi)) throw std::invalid_argument("--law expects lo..hi");
        config["law"] = json{{"n_lo", lo}, {"n_hi", hi}};
      }
      if (sim_dump > 0) config["dump_paths"] = sim_dump;
    } else if (fam->parsed()) {
      config["command"] = "family";
      int lo = 1, hi = 6;
      if (!parse_range(fam_range, lo, hi)) throw std::invalid_argument("--n expects lo..hi");
      config["name"] = fam_name;
      config["a"] = fam_a;
      config["n_min"] = lo;
      config["n_max"] = hi;
      config["eps"] = fam_eps;
      config["k"] = fam_k;
      config["first"] = fam_first;
      config["t_min"] = fam_tmin;
    } else if (rer->parsed()) {
      config = read_json_file(rer_config);
    }
    return finish(logcap::run_config(config, outdir), outdir, quiet);
  } catch (const std::invalid_argument& e) {
    if (!quiet) std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    if (!quiet) std::cerr << "error: parse: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    if (!quiet) std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
