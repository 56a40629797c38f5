#pragma once

#include <cstdint>

#include "logcap/geometry.hpp"

namespace logcap {

class DiscreteGreenKernel;  // elliptic.hpp

// h(x) = -log|x|, which is exactly t in log-polar coordinates.
inline double h_value(const LogPolarPoint& p) { return p.t; }

// Green function of the Laplacian on the unit disk,
//   G(xi, eta) = log(|xi' - eta| |xi| / |xi - eta|),
// evaluated through the log-polar expansion
//   G = t_min + (1/2) log((1 - e^(-T))^2 + 4 e^(-T) sin^2(dth/2))
//           - (1/2) log((1 - e^(-dt))^2 + 4 e^(-dt) sin^2(dth/2))
// with T = t1 + t2, dt = |t1 - t2|, t_min = min(t1, t2). Every exponential
// has a nonpositive argument, so nothing underflows harmfully for any t;
// large-T terms just fade to the exact limits G -> t_min.
// Throws std::domain_error on coincident points.
double green_disk(const LogPolarPoint& xi, const LogPolarPoint& eta);

// Smooth part of green_disk: the kernel with the -log(flat distance)
// singularity removed. At the diagonal it equals log(2 sinh t).
double green_disk_regular(const LogPolarPoint& xi, const LogPolarPoint& eta);
double green_disk_diag_regular(double t);

// Direct cartesian evaluation of the same kernel; usable only at moderate t.
// Kept as the second route of the mandatory dual-formula agreement check.
double green_disk_cartesian(const LogPolarPoint& xi, const LogPolarPoint& eta);

// Kernel selector: exact disk Laplacian, or a discrete Green table built by
// the elliptic module for a general coefficient field.
struct KernelKind {
  const DiscreteGreenKernel* table = nullptr;

  bool is_laplace() const { return table == nullptr; }
  static KernelKind laplace() { return KernelKind{}; }
  static KernelKind discrete(const DiscreteGreenKernel& k) { return KernelKind{&k}; }

  double green(const LogPolarPoint& xi, const LogPolarPoint& eta) const;
  double h(const LogPolarPoint& p) const;
};

// h-normalized kernel G(xi, eta) / (h(xi) h(eta)).
double h_kernel(const LogPolarPoint& xi, const LogPolarPoint& eta, const KernelKind& kind);

struct RatioInterval {
  double lo;
  double hi;
};

// Min/max of G_A / G_B over randomly sampled distinct node pairs of the
// sample set. Both kernels must be strictly positive on the sampled pairs.
RatioInterval comparability_check(const KernelKind& kind_a, const KernelKind& kind_b,
                                  const Discretization& samples, std::size_t max_pairs,
                                  std::uint64_t seed);

}  // namespace logcap
