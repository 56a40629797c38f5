#include "logcap/runner.hpp"

#include <cmath>
#include <stdexcept>

#include "logcap/util.hpp"

namespace logcap {

namespace {

namespace fs = std::filesystem;

void write_json(const fs::path& path, const json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

FamilyParams family_from_config(const json& c) {
  FamilyParams p;
  std::string name = c.at("name").get<std::string>();
  if (name == "deleted_radius") {
    p.name = FamilyName::DeletedRadius;
  } else if (name == "sparse_intervals") {
    p.name = FamilyName::SparseIntervals;
  } else {
    throw std::invalid_argument("family: unknown name " + name);
  }
  p.a = c.value("a", 2.0);
  p.n_min = c.value("n_min", p.name == FamilyName::DeletedRadius ? 1 : 2);
  p.n_max = c.value("n_max", p.name == FamilyName::DeletedRadius ? 6 : 8);
  p.first = c.value("first", 2);
  p.k = c.value("k", 1);
  p.eps = c.value("eps", 0.0);
  p.t_min = c.value("t_min", 1.0);
  return p;
}

json family_defaults(json c) {
  FamilyParams p = family_from_config(c);
  c["name"] = p.name == FamilyName::DeletedRadius ? "deleted_radius" : "sparse_intervals";
  c["a"] = p.a;
  c["n_min"] = p.n_min;
  c["n_max"] = p.n_max;
  c["first"] = p.first;
  c["k"] = p.k;
  c["eps"] = p.eps;
  c["t_min"] = p.t_min;
  return c;
}

void run_capacity(const json& c, const fs::path& outdir) {
  CompactSetSpec geometry = geometry_from_json(c.at("geometry"));
  CoefficientField field = field_from_json(c.value("field", json{{"kind", "identity"}}));
  std::string route = c.at("route").get<std::string>();
  double resolution = c.at("resolution").get<double>();
  std::size_t max_nodes = c.at("max_nodes").get<std::size_t>();

  json out;
  CapacityResult eq, obs;
  bool have_eq = false, have_obs = false;
  if (route == "equilibrium" || route == "both") {
    auto d = discretize(geometry, resolution, max_nodes);
    eq = equilibrium_capacity(d, KernelKind::laplace());
    have_eq = true;
  }
  if (route == "obstacle" || route == "both") {
    ObstacleOptions opt;
    obs = obstacle_capacity(geometry, field, opt).result;
    have_obs = true;
  }
  if (!have_eq && !have_obs) throw std::invalid_argument("capacity: unknown route " + route);
  if (have_eq && have_obs) {
    double gap = std::fabs(eq.capacity - obs.capacity) /
                 std::max({eq.capacity, obs.capacity, 1e-300});
    out = json{{"equilibrium", capacity_result_to_json(eq)},
               {"obstacle", capacity_result_to_json(obs)},
               {"agreement_gap", gap}};
  } else {
    out = capacity_result_to_json(have_eq ? eq : obs);
  }
  write_json(outdir / "result.json", out);
}

void run_wiener(const json& c, const fs::path& outdir) {
  double a = c.value("a", 2.0);
  int n_min = c.value("n_min", 1);
  int n_max = c.value("n_max", 6);
  WienerOptions opt;
  opt.resolution = c.value("resolution", 48.0);
  opt.max_nodes = c.value("max_nodes", std::size_t{1024});
  opt.classical = c.value("classical", true);

  // general-operator mode: a discrete Green table over the shell range
  std::unique_ptr<DiscreteGreenKernel> table;
  KernelKind kind = KernelKind::laplace();
  if (c.contains("field") && c["field"].value("kind", "identity") != "identity") {
    MeshOptions mo;
    mo.t_ceiling = 1.3 * std::pow(a, n_max + 1);
    mo.dt_fine = 0.05;
    mo.refine_lo = std::pow(a, n_min) * 0.5;
    mo.refine_hi = std::pow(a, n_max + 1);
    table = std::make_unique<DiscreteGreenKernel>(field_from_json(c["field"]), mo);
    kind = KernelKind::discrete(*table);
  }

  WienerReport rep;
  CompactSetSpec omega_c;
  if (c.contains("family")) {
    FamilyParams fam = family_from_config(c["family"]);
    fam.a = a;
    fam.n_min = n_min;
    fam.n_max = n_max;
    omega_c = builtin_family(fam);
    rep = series_terms(shell_decompose(omega_c, a, n_min, n_max), kind, opt);
    rep.family = fam;
  } else {
    omega_c = geometry_from_json(c.at("geometry"));
    rep = series_terms(shell_decompose(omega_c, a, n_min, n_max), kind, opt);
  }
  if (c.contains("rho_grid")) {
    rep.integral = integral_test(omega_c, c["rho_grid"].get<std::vector<double>>(), kind, opt);
  }
  classify(rep);
  write_json(outdir / "report.json", wiener_report_to_json(rep));
  write_text_atomic(outdir / "terms.csv", wiener_terms_csv(rep));
  if (!rep.integral.empty()) {
    write_text_atomic(outdir / "integral.csv", integral_samples_csv(rep.integral));
  }
}

void run_solve(const json& c, const fs::path& outdir) {
  CompactSetSpec geometry = geometry_from_json(c.at("geometry"));
  CoefficientField field = field_from_json(c.value("field", json{{"kind", "identity"}}));
  BoundaryData data = boundary_from_json(c.value("data", json::object()), geometry);
  std::vector<double> truncations = c.at("truncations").get<std::vector<double>>();
  std::vector<LogPolarPoint> probes;
  for (const auto& p : c.at("probes")) {
    probes.push_back(LogPolarPoint(p.at("t").get<double>(), p.at("theta").get<double>()));
  }
  HdpOptions opt;
  opt.dt_fine = c.value("dt_fine", 0.04);
  opt.n_theta = c.value("n_theta", 96);

  json gaps = json::array();
  for (double T : truncations) {
    if (fem_resolvable(geometry, opt)) {
      HdpSolution sol = solve_hdp(geometry, data, field, T, opt);
      write_text_atomic(outdir / ("solution_T" + format_double(T) + ".csv"),
                        hdp_solution_csv(sol));
    }
    auto gap = uniqueness_gap(geometry, data, field, probes, T, opt);
    json row{{"t_ceiling", T}, {"sup", gap.sup}, {"route", gap.route}};
    json per = json::array();
    for (double g : gap.gap) per.push_back(g);
    row["gap"] = per;
    gaps.push_back(row);
  }
  write_json(outdir / "gaps.json", json{{"rows", gaps}});

  auto est = harmonic_measure_of_zeta(geometry, field, probes, truncations, opt);
  write_json(outdir / "measure.json", measure_estimate_to_json(est, probes));
}

void run_simulate(const json& c, const fs::path& outdir) {
  CompactSetSpec geometry = geometry_from_json(c.at("geometry"));
  LogPolarPoint start(c.at("start").at("t").get<double>(),
                      c.at("start").at("theta").get<double>());
  PathOptions opt;
  opt.step = c.value("step", 0.01);
  opt.t_max = c.value("t_max", 50.0);
  opt.shell_ratio = c.value("a", 2.0);
  std::size_t n_paths = c.at("n_paths").get<std::size_t>();
  std::uint64_t seed = c.at("seed").get<std::uint64_t>();

  HitStats stats = estimate_hit_probability(start, geometry, n_paths, opt, seed);
  write_text_atomic(outdir / "stats.csv", hit_stats_csv(stats));

  if (c.contains("law")) {
    auto rows = asymptotic_law_experiment(geometry, opt.shell_ratio,
                                          c["law"].at("n_lo").get<int>(),
                                          c["law"].at("n_hi").get<int>(),
                                          c["law"].value("n_paths", n_paths), opt, seed);
    write_text_atomic(outdir / "law.csv", law_rows_csv(rows));
  }
  int dump = c.value("dump_paths", 0);
  if (dump > 0) {
    PathOptions dopt = opt;
    dopt.store_every = 25;
    std::vector<PathSample> paths;
    for (int i = 0; i < dump; ++i) {
      paths.push_back(sample_hpath(start, geometry, dopt, mix_seed(seed, 900000 + i)));
    }
    write_text_atomic(outdir / "paths.csv", path_dump_csv(paths));
  }
}

void run_family(const json& c, const fs::path& outdir) {
  FamilyParams p = family_from_config(c);
  CompactSetSpec spec = builtin_family(p);
  write_json(outdir / "geometry.json", geometry_to_json(spec, p.a));
}

}  // namespace

json capacity_config_defaults(json c) {
  c["command"] = "capacity";
  if (!c.contains("geometry")) throw std::invalid_argument("capacity: geometry required");
  if (!c.contains("field")) c["field"] = json{{"kind", "identity"}};
  if (!c.contains("route")) c["route"] = "equilibrium";
  if (!c.contains("resolution")) c["resolution"] = 512.0 / kTwoPi;
  if (!c.contains("max_nodes")) c["max_nodes"] = 4096;
  return c;
}

json wiener_config_defaults(json c) {
  c["command"] = "wiener";
  if (!c.contains("family") && !c.contains("geometry")) {
    throw std::invalid_argument("wiener: family or geometry required");
  }
  if (c.contains("family")) c["family"] = family_defaults(c["family"]);
  if (!c.contains("a")) c["a"] = c.contains("family") ? c["family"]["a"].get<double>() : 2.0;
  if (!c.contains("n_min")) {
    c["n_min"] = c.contains("family") ? c["family"]["n_min"].get<int>() : 1;
  }
  if (!c.contains("n_max")) {
    c["n_max"] = c.contains("family") ? c["family"]["n_max"].get<int>() : 6;
  }
  if (!c.contains("resolution")) c["resolution"] = 48.0;
  if (!c.contains("max_nodes")) c["max_nodes"] = 1024;
  if (!c.contains("classical")) c["classical"] = true;
  return c;
}

json solve_config_defaults(json c) {
  c["command"] = "solve";
  if (!c.contains("geometry")) throw std::invalid_argument("solve: geometry required");
  if (!c.contains("data")) c["data"] = json{{"f_bar", 0.0}, {"default", 0.0}};
  if (!c.contains("field")) c["field"] = json{{"kind", "identity"}};
  if (!c.contains("truncations")) c["truncations"] = json::array({16.0, 32.0, 64.0});
  if (!c.contains("probes")) {
    c["probes"] = json::array({json{{"t", 1.0}, {"theta", 0.9}}, json{{"t", 2.0}, {"theta", 2.2}},
                               json{{"t", 3.0}, {"theta", 4.0}}, json{{"t", 4.0}, {"theta", 5.5}}});
  }
  return c;
}

json simulate_config_defaults(json c) {
  c["command"] = "simulate";
  if (!c.contains("geometry")) throw std::invalid_argument("simulate: geometry required");
  if (!c.contains("start")) c["start"] = json{{"t", 1.0}, {"theta", 3.14159265358979}};
  if (!c.contains("n_paths")) c["n_paths"] = 1000;
  if (!c.contains("seed")) c["seed"] = 1;
  if (!c.contains("step")) c["step"] = 0.01;
  if (!c.contains("t_max")) c["t_max"] = 50.0;
  if (!c.contains("a")) c["a"] = 2.0;
  return c;
}

json family_config_defaults(json c) {
  c["command"] = "family";
  return family_defaults(std::move(c));
}

RunResult run_config(const json& config, const std::filesystem::path& outdir) {
  RunResult result;
  json effective;
  try {
    std::string command = config.at("command").get<std::string>();
    if (command == "capacity") {
      effective = capacity_config_defaults(config);
    } else if (command == "wiener") {
      effective = wiener_config_defaults(config);
    } else if (command == "solve") {
      effective = solve_config_defaults(config);
    } else if (command == "simulate") {
      effective = simulate_config_defaults(config);
    } else if (command == "family") {
      effective = family_config_defaults(config);
    } else {
      throw std::invalid_argument("unknown command " + command);
    }
  } catch (const std::exception& e) {
    result.exit_code = 2;
    result.message = e.what();
    return result;
  }

  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  try {
    write_json(outdir / "config.json", effective);
    std::string command = effective["command"].get<std::string>();
    if (command == "capacity") {
      run_capacity(effective, outdir);
    } else if (command == "wiener") {
      run_wiener(effective, outdir);
    } else if (command == "solve") {
      run_solve(effective, outdir);
    } else if (command == "simulate") {
      run_simulate(effective, outdir);
    } else {
      run_family(effective, outdir);
    }
  } catch (const std::invalid_argument& e) {
    result.exit_code = 2;
    result.message = e.what();
  } catch (const json::exception& e) {
    result.exit_code = 2;
    result.message = e.what();
  } catch (const std::exception& e) {
    result.exit_code = 1;
    result.message = e.what();
  }
  if (result.exit_code != 0) {
    json err{{"error", result.message}, {"type", result.exit_code == 2 ? "input" : "numerical"}};
    write_json(outdir / "error.json", err);
  }
  return result;
}

}  // namespace logcap
