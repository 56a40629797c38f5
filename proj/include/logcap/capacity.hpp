#pragma once

#include <Eigen/Dense>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "logcap/elliptic.hpp"
#include "logcap/geometry.hpp"
#include "logcap/kernels.hpp"

namespace logcap {

// Nonnegative weighted node measure; houses equilibrium measures.
struct DiscreteMeasure {
  std::vector<LogPolarPoint> nodes;
  std::vector<double> masses;
  // Panel metadata carried over from the discretization so potentials can
  // regularize evaluations that land inside a panel.
  std::vector<double> panel_log_extent;
  std::vector<int> panel_dim;

  double total() const;
  std::size_t size() const { return nodes.size(); }
};

enum class CapacityRoute { EquilibriumQP, ObstacleFEM };

// Potential gauge: h-weighted kernels reproduce the capacity tied to the
// logarithmic growth class; the classical gauge (weight 1) gives Greenian
// capacity and the reduction of 1.
enum class PotentialGauge { HWeighted, Classical };

struct CapacityDiagnostics {
  double max_potential_over_h = std::numeric_limits<double>::quiet_NaN();
  int qp_iterations = 0;
  double residual = std::numeric_limits<double>::quiet_NaN();
  std::size_t nodes = 0;
};

struct CapacityResult {
  double capacity = 0.0;
  double robin = std::numeric_limits<double>::infinity();
  DiscreteMeasure equilibrium;
  CapacityRoute route = CapacityRoute::EquilibriumQP;
  CapacityDiagnostics diagnostics;
  bool numerically_polar = false;
};

struct QpOptions {
  double tol = 1e-9;
  int max_iterations = 20000;
  double polar_threshold = 1e6;  // robin above this reports capacity zero
  PotentialGauge gauge = PotentialGauge::HWeighted;
};

// Kernel matrix over the panel nodes with the log singularity integrated
// analytically on the diagonal (and carried in the exponent for deep
// segments whose length underflows).
Eigen::MatrixXd kernel_matrix(const Discretization& k, const KernelKind& kind,
                              PotentialGauge gauge = PotentialGauge::HWeighted);

// Energy minimization over probability measures on the nodes: returns the
// minimal energy (robin constant), its reciprocal (capacity) and the
// rescaled minimizer (equilibrium measure with total mass = capacity).
CapacityResult equilibrium_capacity(const Discretization& k, const KernelKind& kind,
                                    const QpOptions& opt = {});

// Potential of a node measure: sum of G(x, y_j) m_j / h(y_j) in the
// h-weighted gauge, without the h weight in the classical gauge. Evaluations
// inside a panel use the panel-averaged kernel.
double potential_eval(const DiscreteMeasure& mu, const LogPolarPoint& x, const KernelKind& kind,
                      PotentialGauge gauge = PotentialGauge::HWeighted);

// Equilibrium potential = smoothed reduction of h on the set.
double smoothed_reduction(const CapacityResult& equilibrium, const LogPolarPoint& x,
                          const KernelKind& kind);

struct ZetaValue {
  double value = 0.0;          // reduction extrapolated to the puncture
  double agreement_gap = 0.0;  // |value - capacity| / max(capacity, eps)
};

// Evaluates the equilibrium potential on probe rings far above the set and
// extrapolates t -> infinity through the exact G -> h(y) limit.
ZetaValue capacity_at_zeta(const CapacityResult& equilibrium, const KernelKind& kind,
                           double t_set_max);

// Convenience wrapper: discretize, minimize, extrapolate.
ZetaValue capacity_at_zeta(const Discretization& k, const KernelKind& kind,
                           const QpOptions& opt = {});

// ---------------------------------------------------------------------------
// Obstacle route: minimize the Dirichlet energy over mesh functions that
// dominate h on the set and vanish on the outer circle; natural condition on
// the truncation circle, which the plateau of the minimizer makes exact up
// to an exponentially small tail. Capacity = energy / (2*pi) in the scaling
// of the unit-disk kernel.
struct ObstacleOptions {
  MeshOptions mesh;            // t_ceiling <= 0 means auto (set max + margin)
  double tolerance = 1e-10;    // complementarity tolerance
  int max_active_set_iters = 64;

  ObstacleOptions() { mesh.t_ceiling = 0.0; }
};

struct ObstacleResult {
  CapacityResult result;
  std::shared_ptr<Mesh> mesh;
  Eigen::VectorXd potential;  // vertex values of the capacitary potential
};

ObstacleResult obstacle_capacity(const CompactSetSpec& k, const CoefficientField& field,
                                 ObstacleOptions opt = {});

}  // namespace logcap
