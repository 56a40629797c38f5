#include "logcap/hdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace logcap {

namespace {

MeshOptions hdp_mesh_options(const CompactSetSpec& set, double t_ceiling, const HdpOptions& opt) {
  MeshOptions mo = mesh_options_for(set, t_ceiling);
  mo.t_floor = opt.t_floor;
  mo.dt_fine = opt.dt_fine;
  mo.dt_coarse = opt.dt_coarse;
  mo.n_theta = opt.n_theta;
  // keep the refinement band local: far parts of tall obstacles sit on
  // coarse rows, which pins them well enough away from the probes
  if (!set.empty()) {
    mo.refine_lo = std::max(mo.t_floor, set.t_min() - 0.3);
    mo.refine_hi = std::min({t_ceiling, set.t_min() + 8.0, set.t_max() + 0.3});
  }
  return mo;
}

Eigen::VectorXd strip_weight(const Mesh& mesh, const DirichletForm& form) {
  std::vector<std::size_t> fixed = mesh.floor_vertices();
  auto top = mesh.ceiling_vertices();
  fixed.insert(fixed.end(), top.begin(), top.end());
  ConstrainedSolver solver(form, fixed);
  Eigen::VectorXd vals(static_cast<Eigen::Index>(fixed.size()));
  for (std::size_t k = 0; k < fixed.size(); ++k) {
    vals[static_cast<Eigen::Index>(k)] = (k < mesh.n_cols()) ? 0.0 : mesh.t_ceiling();
  }
  return solver.solve_zero_rhs(vals);
}

}  // namespace

double HdpSolution::u(const LogPolarPoint& p) const {
  double hv = mesh->interpolate(h, p);
  if (!(hv > 0.0)) throw std::domain_error("HdpSolution::u: weight vanishes at the probe");
  return mesh->interpolate(v, p) / hv;
}

double HdpSolution::v_at(const LogPolarPoint& p) const { return mesh->interpolate(v, p); }

bool fem_resolvable(const CompactSetSpec& omega_complement, const HdpOptions& opt) {
  for (const auto& prim : omega_complement.primitives) {
    if (const auto* seg = std::get_if<RadialSegment>(&prim)) {
      if (seg->is_deep() || seg->t_hi - seg->t_lo < 0.5 * opt.dt_fine) return false;
    } else if (const auto* disk = std::get_if<DiskPatch>(&prim)) {
      if (disk->radius < opt.dt_fine) return false;
    }
  }
  return true;
}

HdpSolution solve_hdp(const CompactSetSpec& omega_complement, const BoundaryData& data,
                      const CoefficientField& field, double t_ceiling, const HdpOptions& opt) {
  // obstacles may extend past the truncation circle (tall slits do); the
  // strip solve simply uses their visible part
  if (!(t_ceiling > opt.t_floor + 0.5) ||
      (!omega_complement.empty() && !(t_ceiling > omega_complement.t_min()))) {
    throw std::invalid_argument("solve_hdp: truncation circle too low");
  }
  if (!fem_resolvable(omega_complement, opt)) {
    throw std::runtime_error("solve_hdp: obstacle below mesh resolution");
  }
  HdpSolution sol;
  sol.t_ceiling = t_ceiling;
  sol.mesh = std::make_shared<Mesh>(
      build_strip_mesh(hdp_mesh_options(omega_complement, t_ceiling, opt)));
  const Mesh& mesh = *sol.mesh;
  DirichletForm form = assemble(field, mesh);
  sol.h = strip_weight(mesh, form);

  std::vector<std::size_t> fixed = mesh.floor_vertices();
  std::vector<double> vals(fixed.size(), 0.0);
  std::vector<char> taken(mesh.n_vertices(), 0);
  for (std::size_t v : fixed) taken[v] = 1;
  if (!omega_complement.empty()) {
    for (std::size_t v : mesh.vertices_in(omega_complement)) {
      if (taken[v]) continue;
      double f_here = data.f(mesh.vertex(v));
      if (!std::isfinite(f_here)) throw std::invalid_argument("solve_hdp: unbounded datum");
      taken[v] = 1;
      fixed.push_back(v);
      vals.push_back(sol.h[static_cast<Eigen::Index>(v)] * f_here);
    }
    if (fixed.size() == mesh.n_cols()) {
      throw std::runtime_error("solve_hdp: obstacle below mesh resolution");
    }
  }
  for (std::size_t v : mesh.ceiling_vertices()) {
    if (taken[v]) continue;
    taken[v] = 1;
    fixed.push_back(v);
    vals.push_back(mesh.t_ceiling() * data.f_bar);
  }

  ConstrainedSolver solver(form, fixed);
  Eigen::VectorXd fixed_vals =
      Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  sol.v = solver.solve_zero_rhs(fixed_vals);

  Eigen::VectorXd res = form.matrix * sol.v;
  double worst = 0.0;
  double scale = std::max(1.0, sol.v.cwiseAbs().maxCoeff());
  for (std::size_t v = 0; v < mesh.n_vertices(); ++v) {
    if (!taken[v]) worst = std::max(worst, std::fabs(res[static_cast<Eigen::Index>(v)]));
  }
  sol.residual = worst / scale;
  return sol;
}

namespace {

// Reduction representation of the measure estimate: the datum-1 solution on
// the obstacle equals the normalized reduction, so the truncation-circle
// mass is its complement. Works for obstacles the mesh cannot see.
std::vector<double> reduction_gap(const CompactSetSpec& omega_complement,
                                  const std::vector<LogPolarPoint>& probes, double t_ceiling) {
  CompactSetSpec clipped = omega_complement.t_max() > t_ceiling
                               ? omega_complement.clip_t(omega_complement.t_min(), t_ceiling)
                               : omega_complement;
  std::vector<double> out(probes.size(), 1.0);
  if (clipped.empty()) return out;
  auto d = discretize(clipped, 48.0, 1536);
  auto eq = equilibrium_capacity(d, KernelKind::laplace());
  for (std::size_t i = 0; i < probes.size(); ++i) {
    double r = smoothed_reduction(eq, probes[i], KernelKind::laplace());
    out[i] = std::max(0.0, 1.0 - r / probes[i].t);
  }
  return out;
}

}  // namespace

MeasureEstimate harmonic_measure_of_zeta(const CompactSetSpec& omega_complement,
                                         const CoefficientField& field,
                                         const std::vector<LogPolarPoint>& probes,
                                         std::vector<double> t_ceilings, const HdpOptions& opt) {
  if (t_ceilings.empty()) throw std::invalid_argument("harmonic_measure_of_zeta: no truncations");
  for (const auto& p : probes) {
    if (omega_complement.contains(p, 1e-9)) {
      throw std::invalid_argument("harmonic_measure_of_zeta: probe inside the obstacle");
    }
  }
  std::sort(t_ceilings.begin(), t_ceilings.end());
  MeasureEstimate est;
  est.t_ceilings = t_ceilings;
  est.values.assign(probes.size(), {});
  bool fem = fem_resolvable(omega_complement, opt);
  est.route = fem ? "fem" : "reduction";

  for (double T : t_ceilings) {
    if (fem) {
      BoundaryData data;  // zero on the obstacle
      data.f_bar = 1.0;
      HdpSolution sol = solve_hdp(omega_complement, data, field, T, opt);
      for (std::size_t i = 0; i < probes.size(); ++i) {
        est.values[i].push_back(sol.u(probes[i]));
      }
    } else {
      auto gap = reduction_gap(omega_complement, probes, T);
      for (std::size_t i = 0; i < probes.size(); ++i) est.values[i].push_back(gap[i]);
    }
  }

  // fit alpha + beta / T; the intercept estimates the limit
  est.extrapolated.resize(probes.size());
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const auto& y = est.values[i];
    if (y.size() == 1) {
      est.extrapolated[i] = y[0];
      continue;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      double x = 1.0 / t_ceilings[k];
      sx += x;
      sy += y[k];
      sxx += x * x;
      sxy += x * y[k];
    }
    double n = static_cast<double>(y.size());
    double denom = n * sxx - sx * sx;
    double slope = (std::fabs(denom) > 1e-300) ? (n * sxy - sx * sy) / denom : 0.0;
    double alpha = (sy - slope * sx) / n;
    est.extrapolated[i] = std::clamp(alpha, 0.0, 1.0);
  }
  return est;
}

GapResult uniqueness_gap(const CompactSetSpec& omega_complement, const BoundaryData& data,
                         const CoefficientField& field, const std::vector<LogPolarPoint>& probes,
                         double t_ceiling, const HdpOptions& opt) {
  GapResult out;
  out.gap.resize(probes.size());
  if (fem_resolvable(omega_complement, opt)) {
    out.route = "fem";
    BoundaryData lo = data;
    lo.f_bar = 0.0;
    BoundaryData hi = data;
    hi.f_bar = 1.0;
    HdpSolution u0 = solve_hdp(omega_complement, lo, field, t_ceiling, opt);
    HdpSolution u1 = solve_hdp(omega_complement, hi, field, t_ceiling, opt);
    for (std::size_t i = 0; i < probes.size(); ++i) {
      out.gap[i] = std::fabs(u1.u(probes[i]) - u0.u(probes[i]));
    }
  } else {
    out.route = "reduction";
    out.gap = reduction_gap(omega_complement, probes, t_ceiling);
  }
  for (double g : out.gap) out.sup = std::max(out.sup, g);
  return out;
}

OscillationReport boundary_oscillation_check(const CompactSetSpec& omega_complement,
                                             const BoundaryData& data,
                                             const CoefficientField& field, double t_ceiling,
                                             const HdpOptions& opt) {
  if (omega_complement.empty()) {
    throw std::invalid_argument("boundary_oscillation_check: needs an obstacle");
  }
  OscillationReport rep;

  // data band along the visible part of the obstacle approaching the
  // puncture (tail = upper half of the t range inside the strip)
  CompactSetSpec visible = omega_complement.t_max() > t_ceiling
                               ? omega_complement.clip_t(omega_complement.t_min(), t_ceiling)
                               : omega_complement;
  auto d = discretize(visible, 32.0, 2048);
  double t_hi = visible.t_max();
  // span at least two octaves so oscillating data shows its full band
  double t_tail = std::max(visible.t_min(), t_hi / 4.0);
  double dlo = 1e300, dhi = -1e300;
  for (const auto& node : d.nodes) {
    if (node.t >= t_tail) {
      double f_here = data.f(node);
      dlo = std::min(dlo, f_here);
      dhi = std::max(dhi, f_here);
    }
  }
  rep.data_liminf = dlo;
  rep.data_limsup = dhi;

  HdpSolution sol = solve_hdp(omega_complement, data, field, t_ceiling, opt);
  double slo = 1e300, shi = -1e300;
  for (double angle : {0.9, 2.7, 4.9}) {
    for (double t = 2.0; t <= 0.85 * t_ceiling; t *= 2.0) {
      if (t < 0.2 * t_ceiling) continue;  // only the tail of the sequence
      LogPolarPoint probe(t, angle);
      if (omega_complement.contains(probe, 1e-6)) continue;
      double val = sol.u(probe);
      slo = std::min(slo, val);
      shi = std::max(shi, val);
    }
  }
  rep.sol_liminf = slo;
  rep.sol_limsup = shi;

  const double tol = 0.05 * std::max(1.0, std::fabs(dhi) + std::fabs(dlo));
  rep.holds[0] = rep.data_liminf <= rep.sol_liminf + tol;
  rep.holds[1] = rep.sol_liminf <= rep.sol_limsup + 1e-12;
  rep.holds[2] = rep.sol_limsup <= rep.data_limsup + tol;
  rep.holds[3] = rep.data_liminf <= rep.data_limsup + 1e-12;
  return rep;
}

}  // namespace logcap
