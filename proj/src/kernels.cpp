#include "logcap/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "logcap/elliptic.hpp"
#include "logcap/util.hpp"

namespace logcap {

namespace {

// (1 - e^(-s))^2 + 4 e^(-s) sin^2(dth/2), the squared chordal factor
// |1 - e^(-s) e^(i dth)|^2 written in a cancellation-free form.
inline double chord_sq(double s, double dtheta) {
  double em = std::expm1(-s);  // in (-1, 0]
  double sn = std::sin(0.5 * dtheta);
  return em * em + 4.0 * std::exp(-s) * sn * sn;
}

}  // namespace

double green_disk(const LogPolarPoint& xi, const LogPolarPoint& eta) {
  double dt = std::fabs(xi.t - eta.t);
  double dth = angle_distance(xi.theta, eta.theta);
  if (dt == 0.0 && dth == 0.0) {
    throw std::domain_error("green_disk: coincident points");
  }
  double t_min = std::min(xi.t, eta.t);
  double T = xi.t + eta.t;
  return t_min + 0.5 * std::log(chord_sq(T, dth)) - 0.5 * std::log(chord_sq(dt, dth));
}

double green_disk_regular(const LogPolarPoint& xi, const LogPolarPoint& eta) {
  double dth = angle_distance(xi.theta, eta.theta);
  double T = xi.t + eta.t;
  return std::min(xi.t, eta.t) + 0.5 * std::log(chord_sq(T, dth));
}

double green_disk_diag_regular(double t) {
  // log(2 sinh t), stable for both small and large t
  return t + std::log1p(-std::exp(-2.0 * t));
}

double green_disk_cartesian(const LogPolarPoint& xi, const LogPolarPoint& eta) {
  auto a = to_cartesian(xi);
  auto b = to_cartesian(eta);
  double r = std::hypot(a[0], a[1]);
  double inv = 1.0 / (r * r);
  double d = std::hypot(a[0] - b[0], a[1] - b[1]);
  double dref = std::hypot(a[0] * inv - b[0], a[1] * inv - b[1]);
  if (d == 0.0) throw std::domain_error("green_disk_cartesian: coincident points");
  return std::log(dref * r / d);
}

double KernelKind::green(const LogPolarPoint& xi, const LogPolarPoint& eta) const {
  if (table == nullptr) return green_disk(xi, eta);
  return table->green(xi, eta);
}

double KernelKind::h(const LogPolarPoint& p) const {
  if (table == nullptr) return p.t;
  return table->h(p);
}

double h_kernel(const LogPolarPoint& xi, const LogPolarPoint& eta, const KernelKind& kind) {
  return kind.green(xi, eta) / (kind.h(xi) * kind.h(eta));
}

RatioInterval comparability_check(const KernelKind& kind_a, const KernelKind& kind_b,
                                  const Discretization& samples, std::size_t max_pairs,
                                  std::uint64_t seed) {
  if (samples.size() < 2) {
    throw std::invalid_argument("comparability_check: need at least two sample nodes");
  }
  Rng rng(mix_seed(seed, 0x636f6d70));
  RatioInterval out{std::numeric_limits<double>::infinity(), 0.0};
  std::size_t n = samples.size();
  std::size_t done = 0;
  std::size_t attempts = 0;
  while (done < max_pairs && attempts < 50 * max_pairs) {
    ++attempts;
    std::size_t i = static_cast<std::size_t>(rng.next_u64() % n);
    std::size_t j = static_cast<std::size_t>(rng.next_u64() % n);
    if (i == j) continue;
    const auto& p = samples.nodes[i];
    const auto& q = samples.nodes[j];
    // skip nearly coincident pairs; the ratio there is dominated by the
    // shared log singularity and carries no information
    if (std::fabs(p.t - q.t) + angle_distance(p.theta, q.theta) < 1e-3) continue;
    double ga = kind_a.green(p, q);
    double gb = kind_b.green(p, q);
    if (!(gb > 0.0) || !(ga > 0.0)) continue;
    double r = ga / gb;
    out.lo = std::min(out.lo, r);
    out.hi = std::max(out.hi, r);
    ++done;
  }
  if (done == 0) throw std::runtime_error("comparability_check: degenerate sample set");
  return out;
}

}  // namespace logcap
