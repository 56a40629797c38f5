#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "logcap/capacity.hpp"
#include "logcap/elliptic.hpp"
#include "logcap/geometry.hpp"

namespace logcap {

// Boundary datum of the weighted Dirichlet problem: a bounded function on
// the obstacle part of the boundary plus the prescribed value at the
// puncture.
struct BoundaryData {
  std::function<double(const LogPolarPoint&)> f = [](const LogPolarPoint&) { return 0.0; };
  double f_bar = 0.0;

  static BoundaryData constant(double c) {
    BoundaryData d;
    d.f = [c](const LogPolarPoint&) { return c; };
    d.f_bar = c;
    return d;
  }
};

struct HdpOptions {
  double dt_fine = 0.04;
  double dt_coarse = 0.2;
  int n_theta = 96;
  double t_floor = 0.001;
};

// Solution of the weighted problem on the truncated cylinder. The solve
// works on v = h * u (plain divergence-form equation), with v = 0 on the
// outer circle, v = h f on the obstacle and v = h(T) f_bar on the
// truncation circle; u is recovered as v / h. For the identity field h is
// the exact linear ramp of the strip.
struct HdpSolution {
  std::shared_ptr<Mesh> mesh;
  Eigen::VectorXd v;
  Eigen::VectorXd h;  // weight realized on the same mesh
  double t_ceiling = 0.0;
  double residual = 0.0;

  double u(const LogPolarPoint& p) const;
  double v_at(const LogPolarPoint& p) const;
};

// Throws std::runtime_error when the obstacle has primitives the mesh
// cannot resolve, and std::invalid_argument for unbounded data.
HdpSolution solve_hdp(const CompactSetSpec& omega_complement, const BoundaryData& data,
                      const CoefficientField& field, double t_ceiling,
                      const HdpOptions& opt = {});

bool fem_resolvable(const CompactSetSpec& omega_complement, const HdpOptions& opt = {});

// Estimate of the puncture's harmonic-measure mass at each probe: solve
// with datum 1 on the truncation circle and 0 on the obstacle for a ladder
// of truncations, then extrapolate alpha + beta / T.
struct MeasureEstimate {
  std::vector<double> t_ceilings;
  std::vector<std::vector<double>> values;  // [probe][truncation]
  std::vector<double> extrapolated;         // per probe
  std::string route;                        // "fem" or "reduction"
};

MeasureEstimate harmonic_measure_of_zeta(const CompactSetSpec& omega_complement,
                                         const CoefficientField& field,
                                         const std::vector<LogPolarPoint>& probes,
                                         std::vector<double> t_ceilings,
                                         const HdpOptions& opt = {});

// Sup over probes of the difference between the solutions with f_bar = 1
// and f_bar = 0 (same obstacle data). Obstacles finer than the mesh are
// routed through the equivalent reduction representation.
struct GapResult {
  std::vector<double> gap;  // per probe
  double sup = 0.0;
  std::string route;  // "fem" or "reduction"
};

GapResult uniqueness_gap(const CompactSetSpec& omega_complement, const BoundaryData& data,
                         const CoefficientField& field, const std::vector<LogPolarPoint>& probes,
                         double t_ceiling, const HdpOptions& opt = {});

// Oscillation bracket: data band near the puncture versus the solution band
// along geometric probe sequences on three fixed angles.
struct OscillationReport {
  double data_liminf = 0.0;
  double data_limsup = 0.0;
  double sol_liminf = 0.0;
  double sol_limsup = 0.0;
  bool holds[4] = {false, false, false, false};
  bool all_hold() const { return holds[0] && holds[1] && holds[2] && holds[3]; }
};

OscillationReport boundary_oscillation_check(const CompactSetSpec& omega_complement,
                                             const BoundaryData& data,
                                             const CoefficientField& field, double t_ceiling,
                                             const HdpOptions& opt = {});

}  // namespace logcap
