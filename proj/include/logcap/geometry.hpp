#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace logcap {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Wrap an angle into [0, 2*pi).
double wrap_angle(double theta);

// Shortest circular distance between two angles.
double angle_distance(double a, double b);

// Point of the punctured unit disk in log-polar coordinates:
//   t = -log|x|  (0 < |x| < 1  =>  t > 0),  theta in [0, 2*pi).
// The puncture is the ideal limit t -> +infinity; the outer circle is t = 0.
// Working in (t, theta) keeps the doubly exponential scales of the deep
// shells representable: t = 8192 is an ordinary double even though the
// corresponding radius underflows by thousands of orders of magnitude.
struct LogPolarPoint {
  double t;
  double theta;
  LogPolarPoint(double t_in, double theta_in);  // validates t > 0, wraps theta
};

// Conversions. to_cartesian is for I/O only and refuses t > 30, where the
// radius is no longer meaningful in double precision relative terms.
LogPolarPoint to_logpolar(double x, double y);
std::array<double, 2> to_cartesian(const LogPolarPoint& p);

// ---------------------------------------------------------------------------
// Primitives. All live strictly inside the punctured disk (t > 0) and are
// expressed in (t, theta). Distances and sizes below use the flat metric of
// the (t, theta) cylinder.

// True when a segment of the given log-length anchored at t_anchor is too
// short for its endpoints to be distinguishable in double arithmetic; such
// segments are handled entirely through the exponent.
inline bool deep_segment(double log_len, double t_anchor) {
  return log_len - std::log(std::max(1.0, t_anchor)) < -25.0;
}

// Segment of a ray theta = const, t in [t_lo, t_hi].
// log_len carries log(t_hi - t_lo) exactly even when the difference
// underflows double subtraction; the sparse built-in family produces
// segments with lengths far below DBL_MIN, and the kernel quadrature works
// off the exponent in that regime.
struct RadialSegment {
  double t_lo;
  double t_hi;
  double theta;
  double log_len;

  RadialSegment(double lo, double hi, double th);
  // Segment pinned at its upper endpoint with an exact log length.
  static RadialSegment from_log_length(double hi, double log_length, double th);
  bool is_deep() const { return deep_segment(log_len, t_hi); }
};

// Arc of the circle t = const, theta in [theta_lo, theta_hi] (theta_hi may
// exceed theta_lo by at most 2*pi; a full span encodes the whole circle).
struct Arc {
  double t;
  double theta_lo;
  double theta_hi;
  Arc(double t_in, double lo, double hi);
  double span() const { return theta_hi - theta_lo; }
  bool full_circle() const { return span() >= kTwoPi - 1e-12; }
};

// Metric ball in the (t, theta) plane. Discretizes to its boundary circle.
struct DiskPatch {
  LogPolarPoint center;
  double radius;
  DiskPatch(LogPolarPoint c, double r);
};

// Closed rectangle [t_lo, t_hi] x [theta_lo, theta_hi] in (t, theta).
struct AnnulusBand {
  double t_lo;
  double t_hi;
  double theta_lo;
  double theta_hi;
  AnnulusBand(double tlo, double thi, double alo, double ahi);
  bool full_circle() const { return theta_hi - theta_lo >= kTwoPi - 1e-12; }
};

using Primitive = std::variant<RadialSegment, Arc, DiskPatch, AnnulusBand>;

double primitive_t_min(const Primitive& p);
double primitive_t_max(const Primitive& p);
// t-length for segments, theta-length for arcs, perimeter for disk patches,
// area for bands (the measure the default discretization weights sum to).
double primitive_size(const Primitive& p);
bool primitive_contains(const Primitive& p, const LogPolarPoint& q, double tol);

// ---------------------------------------------------------------------------
// A compact subset of the punctured disk as a finite union of primitives.
struct CompactSetSpec {
  std::vector<Primitive> primitives;
  std::string label;

  bool empty() const { return primitives.empty(); }
  std::size_t size() const { return primitives.size(); }
  bool contains(const LogPolarPoint& q, double tol = 1e-9) const;
  double t_min() const;  // +inf when empty
  double t_max() const;  // 0 when empty
  double total_size() const;

  // Exact intersection with the band {lo <= t <= hi}. Arcs are kept or
  // dropped whole; segments and bands are cut at the levels; a disk patch
  // that straddles a level cannot be represented and raises
  // std::invalid_argument.
  CompactSetSpec clip_t(double lo, double hi) const;
};

// Union with 1D-overlap merging for primitives sharing a carrier (same-ray
// segments, same-circle arcs), so unions used in set-function tests are not
// double-counted by the discretizer.
CompactSetSpec merged_union(const CompactSetSpec& a, const CompactSetSpec& b);

// Intersection restricted to pairs of same-carrier 1D primitives plus
// identical 2D primitives; enough for nested/overlapping test corpora.
CompactSetSpec carrier_intersection(const CompactSetSpec& a, const CompactSetSpec& b);

// ---------------------------------------------------------------------------
// Panel discretization: midpoint nodes, uniform panels per primitive.
struct Discretization {
  std::vector<LogPolarPoint> nodes;
  std::vector<double> weights;          // panel sizes in the (t, theta) metric
  std::vector<int> source_primitive;
  // Singular-quadrature data: log of the panel extent (length for 1D panels,
  // equal-area disk radius for 2D panels) and the panel dimension.
  std::vector<double> panel_log_extent;
  std::vector<int> panel_dim;
  // For radial segments: node position along the segment, u in (0,1),
  // measured from t_hi downward, plus the owning segment exponent data.
  std::vector<double> seg_param;       // NaN for non-segment nodes
  std::vector<double> seg_log_len;     // NaN for non-segment nodes
  std::vector<double> seg_anchor_t;    // t_hi of the owning segment

  std::size_t size() const { return nodes.size(); }
  bool empty() const { return nodes.empty(); }
};

// resolution = nodes per unit size (per unit t or theta for 1D primitives,
// per unit length in each direction for bands). Node totals above max_nodes
// are scaled back proportionally.
Discretization discretize(const CompactSetSpec& spec, double resolution,
                          std::size_t max_nodes = 4096);

// ---------------------------------------------------------------------------
// Dyadic-in-t shells of a set: shell n is the exact clip to [a^n, a^(n+1)].
struct ShellDecomposition {
  double a = 2.0;
  int n_min = 0;
  int n_max = 0;
  std::vector<CompactSetSpec> shells;  // index 0 corresponds to n_min

  const CompactSetSpec& shell(int n) const { return shells.at(static_cast<std::size_t>(n - n_min)); }
};

ShellDecomposition shell_decompose(const CompactSetSpec& omega_complement,
                                   double a, int n_min, int n_max);

}  // namespace logcap
