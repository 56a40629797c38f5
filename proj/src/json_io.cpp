#include "logcap/json_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace logcap {

std::string format_double(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_text_atomic: cannot open " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------

json geometry_to_json(const CompactSetSpec& spec, double a) {
  json prims = json::array();
  for (const auto& p : spec.primitives) {
    std::visit(
        [&](const auto& g) {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, RadialSegment>) {
            prims.push_back({{"kind", "radial_segment"},
                             {"t_lo", g.t_lo},
                             {"t_hi", g.t_hi},
                             {"theta", g.theta},
                             {"log_len", g.log_len}});
          } else if constexpr (std::is_same_v<T, Arc>) {
            prims.push_back({{"kind", "arc"},
                             {"t", g.t},
                             {"theta_lo", g.theta_lo},
                             {"theta_hi", g.theta_hi}});
          } else if constexpr (std::is_same_v<T, DiskPatch>) {
            prims.push_back({{"kind", "disk"},
                             {"center_t", g.center.t},
                             {"center_theta", g.center.theta},
                             {"radius", g.radius}});
          } else if constexpr (std::is_same_v<T, AnnulusBand>) {
            prims.push_back({{"kind", "annulus_band"},
                             {"t_lo", g.t_lo},
                             {"t_hi", g.t_hi},
                             {"theta_lo", g.theta_lo},
                             {"theta_hi", g.theta_hi}});
          }
        },
        p);
  }
  return json{{"a", a}, {"label", spec.label}, {"primitives", prims}};
}

CompactSetSpec geometry_from_json(const json& j) {
  CompactSetSpec spec;
  spec.label = j.value("label", "");
  if (!j.contains("primitives") || !j["primitives"].is_array()) {
    throw std::invalid_argument("geometry: missing primitives array");
  }
  for (const auto& p : j["primitives"]) {
    std::string kind = p.at("kind").get<std::string>();
    if (kind == "radial_segment") {
      double hi = p.at("t_hi").get<double>();
      double theta = p.at("theta").get<double>();
      if (p.contains("log_len")) {
        spec.primitives.push_back(
            RadialSegment::from_log_length(hi, p["log_len"].get<double>(), theta));
      } else {
        spec.primitives.push_back(RadialSegment(p.at("t_lo").get<double>(), hi, theta));
      }
    } else if (kind == "arc") {
      spec.primitives.push_back(Arc(p.at("t").get<double>(), p.at("theta_lo").get<double>(),
                                    p.at("theta_hi").get<double>()));
    } else if (kind == "disk") {
      spec.primitives.push_back(
          DiskPatch(LogPolarPoint(p.at("center_t").get<double>(),
                                  p.at("center_theta").get<double>()),
                    p.at("radius").get<double>()));
    } else if (kind == "annulus_band") {
      spec.primitives.push_back(AnnulusBand(p.at("t_lo").get<double>(), p.at("t_hi").get<double>(),
                                            p.at("theta_lo").get<double>(),
                                            p.at("theta_hi").get<double>()));
    } else {
      throw std::invalid_argument("geometry: unknown primitive kind " + kind);
    }
  }
  return spec;
}

double geometry_ratio(const json& j) { return j.value("a", 2.0); }

// ---------------------------------------------------------------------------

namespace {

std::map<std::string, std::function<CoefficientField(const json&)>>& field_registry() {
  static std::map<std::string, std::function<CoefficientField(const json&)>> reg;
  return reg;
}

}  // namespace

void register_field(const std::string& kind,
                    std::function<CoefficientField(const json&)> factory) {
  field_registry()[kind] = std::move(factory);
}

CoefficientField field_from_json(const json& j) {
  std::string kind = j.value("kind", "identity");
  if (kind == "identity") return identity_field();
  if (kind == "diag") {
    return diag_field(j.value("d1", 1.0), j.value("d2", 1.0));
  }
  if (kind == "rotated_diag") {
    return rotated_diag_field(j.value("d1", 1.0), j.value("d2", 1.0), j.value("alpha", 0.0));
  }
  if (kind == "checkerboard") {
    return checkerboard_field(j.value("low", 0.5), j.value("high", 2.0), j.value("cell", 0.5));
  }
  auto it = field_registry().find(kind);
  if (it != field_registry().end()) return it->second(j);
  throw std::invalid_argument("field: unknown kind " + kind);
}

BoundaryData boundary_from_json(const json& j, const CompactSetSpec& geometry) {
  BoundaryData data;
  data.f_bar = j.value("f_bar", 0.0);
  double fallback = j.value("default", 0.0);
  std::vector<double> per;
  if (j.contains("per_primitive")) {
    per = j["per_primitive"].get<std::vector<double>>();
    if (per.size() != geometry.size()) {
      throw std::invalid_argument("boundary data: per_primitive size mismatch");
    }
  }
  CompactSetSpec geo = geometry;  // captured by value for the closure
  data.f = [geo, per, fallback](const LogPolarPoint& p) {
    for (std::size_t i = 0; i < geo.primitives.size(); ++i) {
      if (primitive_contains(geo.primitives[i], p, 1e-7)) {
        return i < per.size() ? per[i] : fallback;
      }
    }
    return fallback;
  };
  return data;
}

// ---------------------------------------------------------------------------

json capacity_result_to_json(const CapacityResult& r) {
  json masses = json::array();
  json nodes = json::array();
  for (std::size_t i = 0; i < r.equilibrium.size(); ++i) {
    masses.push_back(r.equilibrium.masses[i]);
    nodes.push_back({{"t", r.equilibrium.nodes[i].t}, {"theta", r.equilibrium.nodes[i].theta}});
  }
  json diag{{"qp_iterations", r.diagnostics.qp_iterations},
            {"nodes", r.diagnostics.nodes}};
  if (std::isfinite(r.diagnostics.max_potential_over_h)) {
    diag["max_potential_over_h"] = r.diagnostics.max_potential_over_h;
  }
  if (std::isfinite(r.diagnostics.residual)) diag["residual"] = r.diagnostics.residual;
  json out{{"capacity", r.capacity},
           {"route", r.route == CapacityRoute::EquilibriumQP ? "equilibrium" : "obstacle"},
           {"numerically_polar", r.numerically_polar},
           {"nodes", nodes},
           {"masses", masses},
           {"diagnostics", diag}};
  if (std::isfinite(r.robin)) {
    out["robin"] = r.robin;
  } else {
    out["robin"] = "inf";
  }
  return out;
}

json wiener_report_to_json(const WienerReport& r) {
  json shells = json::array();
  for (const auto& t : r.shells) {
    shells.push_back({{"n", t.n},
                      {"term_h", t.term_h},
                      {"term_reduction", t.term_reduction},
                      {"term_classical", t.term_classical},
                      {"term_r1", t.term_r1},
                      {"status", t.status}});
  }
  json integral = json::array();
  for (const auto& s : r.integral) {
    integral.push_back({{"rho", s.rho}, {"c", s.c}, {"integrand", s.integrand},
                        {"partial", s.partial}});
  }
  json fit{{"p", std::isfinite(r.fit.p) ? json(r.fit.p) : json()},
           {"r2", r.fit.r2},
           {"family_override", r.fit.family_override}};
  if (std::isfinite(r.fit.eps_hat)) fit["eps_hat"] = r.fit.eps_hat;
  return json{{"a", r.a},
              {"n_min", r.n_min},
              {"n_max", r.n_max},
              {"shells", shells},
              {"integral", integral},
              {"verdict", to_string(r.verdict)},
              {"confidence", r.confidence},
              {"rationale", r.rationale},
              {"fit", fit},
              {"partial_sums", r.partial_sums}};
}

json measure_estimate_to_json(const MeasureEstimate& est,
                              const std::vector<LogPolarPoint>& probes) {
  json rows = json::array();
  for (std::size_t i = 0; i < probes.size(); ++i) {
    json vals = json::array();
    for (double v : est.values[i]) vals.push_back(v);
    rows.push_back({{"t", probes[i].t},
                    {"theta", probes[i].theta},
                    {"values", vals},
                    {"extrapolated", est.extrapolated[i]}});
  }
  json ts = json::array();
  for (double t : est.t_ceilings) ts.push_back(t);
  return json{{"t_ceilings", ts}, {"probes", rows}, {"route", est.route}};
}

// ---------------------------------------------------------------------------

std::string wiener_terms_csv(const WienerReport& r) {
  std::ostringstream out;
  out << "n,term_h,term_reduction,term_classical,term_r1,capacity_h,capacity_g,partial_sum,status\n";
  for (std::size_t i = 0; i < r.shells.size(); ++i) {
    const auto& t = r.shells[i];
    out << t.n << ',' << format_double(t.term_h) << ',' << format_double(t.term_reduction)
        << ',' << format_double(t.term_classical) << ',' << format_double(t.term_r1) << ','
        << format_double(t.capacity_h) << ',' << format_double(t.capacity_g) << ','
        << format_double(i < r.partial_sums.size() ? r.partial_sums[i] : 0.0) << ',' << t.status
        << '\n';
  }
  return out.str();
}

std::string integral_samples_csv(const std::vector<IntegralSample>& samples) {
  std::ostringstream out;
  out << "rho,c,integrand,partial\n";
  for (const auto& s : samples) {
    out << format_double(s.rho) << ',' << format_double(s.c) << ',' << format_double(s.integrand)
        << ',' << format_double(s.partial) << '\n';
  }
  return out.str();
}

std::string hit_stats_csv(const HitStats& stats) {
  std::ostringstream out;
  out << "p_hat,standard_error,n_paths,n_hits,n_boundary_deaths,n_reached_t_max,tube_halfwidth,"
         "revisit_below_fraction\n";
  out << format_double(stats.p_hat) << ',' << format_double(stats.standard_error) << ','
      << stats.n_paths << ',' << stats.n_hits << ',' << stats.n_boundary_deaths << ','
      << stats.n_reached_t_max << ',' << format_double(stats.tube_halfwidth) << ','
      << format_double(stats.revisit_below_fraction) << '\n';
  out << "\nshell,first_hits,frequency\n";
  for (std::size_t i = 0; i < stats.shell_index.size(); ++i) {
    out << stats.shell_index[i] << ',' << stats.shell_first_hits[i] << ','
        << format_double(static_cast<double>(stats.shell_first_hits[i]) /
                         static_cast<double>(stats.n_paths))
        << '\n';
  }
  return out.str();
}

std::string law_rows_csv(const std::vector<LawRow>& rows) {
  std::ostringstream out;
  out << "n,start_t,p_hat,standard_error\n";
  for (const auto& r : rows) {
    out << r.n << ',' << format_double(r.start_t) << ',' << format_double(r.p_hat) << ','
        << format_double(r.standard_error) << '\n';
  }
  return out.str();
}

std::string hdp_solution_csv(const HdpSolution& sol) {
  std::ostringstream out;
  out << "t,theta,u,v\n";
  const Mesh& mesh = *sol.mesh;
  for (std::size_t row = 0; row < mesh.n_rows(); ++row) {
    for (std::size_t col = 0; col < mesh.n_cols(); ++col) {
      std::size_t v = mesh.vertex_id(row, col);
      double t = mesh.vertex_t(v);
      double hv = sol.h[static_cast<Eigen::Index>(v)];
      double vv = sol.v[static_cast<Eigen::Index>(v)];
      out << format_double(t) << ',' << format_double(mesh.vertex_theta(v)) << ','
          << format_double(hv > 0.0 ? vv / hv : 0.0) << ',' << format_double(vv) << '\n';
    }
  }
  return out.str();
}

std::string path_dump_csv(const std::vector<PathSample>& paths) {
  std::ostringstream out;
  out << "path,point,t,theta\n";
  for (std::size_t p = 0; p < paths.size(); ++p) {
    for (std::size_t k = 0; k < paths[p].trajectory.size(); ++k) {
      out << p << ',' << k << ',' << format_double(paths[p].trajectory[k].t) << ','
          << format_double(paths[p].trajectory[k].theta) << '\n';
    }
  }
  return out.str();
}

}  // namespace logcap
