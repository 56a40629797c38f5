#include "logcap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace logcap {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

double wrap_angle(double theta) {
  double m = std::fmod(theta, kTwoPi);
  if (m < 0.0) m += kTwoPi;
  if (m >= kTwoPi) m = 0.0;
  return m;
}

double angle_distance(double a, double b) {
  double d = std::fabs(wrap_angle(a) - wrap_angle(b));
  return std::min(d, kTwoPi - d);
}

LogPolarPoint::LogPolarPoint(double t_in, double theta_in) : t(t_in), theta(wrap_angle(theta_in)) {
  if (!(t_in > 0.0) || !std::isfinite(t_in)) {
    throw std::domain_error("LogPolarPoint: t must be finite and positive");
  }
}

LogPolarPoint to_logpolar(double x, double y) {
  double r = std::hypot(x, y);
  if (!(r > 0.0) || !(r < 1.0)) {
    throw std::domain_error("to_logpolar: point must satisfy 0 < |p| < 1");
  }
  return LogPolarPoint(-std::log(r), std::atan2(y, x));
}

std::array<double, 2> to_cartesian(const LogPolarPoint& p) {
  if (p.t > 30.0) {
    throw std::domain_error("to_cartesian: t > 30 has no usable cartesian representation");
  }
  double r = std::exp(-p.t);
  return {r * std::cos(p.theta), r * std::sin(p.theta)};
}

// ---------------------------------------------------------------------------

RadialSegment::RadialSegment(double lo, double hi, double th)
    : t_lo(lo), t_hi(hi), theta(wrap_angle(th)), log_len(std::log(hi - lo)) {
  if (!(lo > 0.0) || !(hi > lo)) {
    throw std::invalid_argument("RadialSegment: need 0 < t_lo < t_hi");
  }
}

RadialSegment RadialSegment::from_log_length(double hi, double log_length, double th) {
  if (!(hi > 0.0) || !std::isfinite(log_length) || !(std::exp(log_length) < hi)) {
    throw std::invalid_argument("RadialSegment: bad anchored segment");
  }
  double len = std::exp(log_length);  // may flush to 0; log_len keeps the value
  RadialSegment s(std::min(hi - len, hi * (1.0 - 1e-15)), hi, th);
  s.t_lo = hi - len;  // collapses to hi when len underflows
  s.log_len = log_length;
  return s;
}

Arc::Arc(double t_in, double lo, double hi) : t(t_in), theta_lo(lo), theta_hi(hi) {
  if (!(t_in > 0.0)) throw std::invalid_argument("Arc: need t > 0");
  if (!(hi > lo) || hi - lo > kTwoPi + 1e-12) {
    throw std::invalid_argument("Arc: need theta_lo < theta_hi <= theta_lo + 2*pi");
  }
}

DiskPatch::DiskPatch(LogPolarPoint c, double r) : center(c), radius(r) {
  if (!(r > 0.0) || !(c.t - r > 0.0)) {
    throw std::invalid_argument("DiskPatch: ball must stay inside t > 0");
  }
}

AnnulusBand::AnnulusBand(double tlo, double thi, double alo, double ahi)
    : t_lo(tlo), t_hi(thi), theta_lo(alo), theta_hi(ahi) {
  if (!(tlo > 0.0) || !(thi > tlo)) throw std::invalid_argument("AnnulusBand: need 0 < t_lo < t_hi");
  if (!(ahi > alo) || ahi - alo > kTwoPi + 1e-12) {
    throw std::invalid_argument("AnnulusBand: need theta_lo < theta_hi <= theta_lo + 2*pi");
  }
}

double primitive_t_min(const Primitive& p) {
  return std::visit(
      [](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, RadialSegment>) return g.t_lo;
        if constexpr (std::is_same_v<T, Arc>) return g.t;
        if constexpr (std::is_same_v<T, DiskPatch>) return g.center.t - g.radius;
        if constexpr (std::is_same_v<T, AnnulusBand>) return g.t_lo;
      },
      p);
}

double primitive_t_max(const Primitive& p) {
  return std::visit(
      [](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, RadialSegment>) return g.t_hi;
        if constexpr (std::is_same_v<T, Arc>) return g.t;
        if constexpr (std::is_same_v<T, DiskPatch>) return g.center.t + g.radius;
        if constexpr (std::is_same_v<T, AnnulusBand>) return g.t_hi;
      },
      p);
}

double primitive_size(const Primitive& p) {
  return std::visit(
      [](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, RadialSegment>) return std::exp(g.log_len);
        if constexpr (std::is_same_v<T, Arc>) return g.span();
        if constexpr (std::is_same_v<T, DiskPatch>) return kTwoPi * g.radius;
        if constexpr (std::is_same_v<T, AnnulusBand>)
          return (g.t_hi - g.t_lo) * (g.theta_hi - g.theta_lo);
      },
      p);
}

namespace {

bool angle_in_span(double theta, double lo, double hi, double tol) {
  double rel = wrap_angle(theta - lo);
  double span = hi - lo;
  if (span >= kTwoPi - 1e-12) return true;
  return rel <= span + tol || rel >= kTwoPi - tol;
}

}  // namespace

bool primitive_contains(const Primitive& p, const LogPolarPoint& q, double tol) {
  return std::visit(
      [&](const auto& g) -> bool {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, RadialSegment>) {
          return q.t >= g.t_lo - tol && q.t <= g.t_hi + tol &&
                 angle_distance(q.theta, g.theta) <= tol;
        }
        if constexpr (std::is_same_v<T, Arc>) {
          return std::fabs(q.t - g.t) <= tol && angle_in_span(q.theta, g.theta_lo, g.theta_hi, tol);
        }
        if constexpr (std::is_same_v<T, DiskPatch>) {
          double dth = angle_distance(q.theta, g.center.theta);
          double dt = q.t - g.center.t;
          return std::hypot(dt, dth) <= g.radius + tol;
        }
        if constexpr (std::is_same_v<T, AnnulusBand>) {
          return q.t >= g.t_lo - tol && q.t <= g.t_hi + tol &&
                 angle_in_span(q.theta, g.theta_lo, g.theta_hi, tol);
        }
      },
      p);
}

bool CompactSetSpec::contains(const LogPolarPoint& q, double tol) const {
  for (const auto& p : primitives) {
    if (primitive_contains(p, q, tol)) return true;
  }
  return false;
}

double CompactSetSpec::t_min() const {
  double m = kInf;
  for (const auto& p : primitives) m = std::min(m, primitive_t_min(p));
  return m;
}

double CompactSetSpec::t_max() const {
  double m = 0.0;
  for (const auto& p : primitives) m = std::max(m, primitive_t_max(p));
  return m;
}

double CompactSetSpec::total_size() const {
  double s = 0.0;
  for (const auto& p : primitives) s += primitive_size(p);
  return s;
}

CompactSetSpec CompactSetSpec::clip_t(double lo, double hi) const {
  if (!(hi > lo)) throw std::invalid_argument("clip_t: need lo < hi");
  CompactSetSpec out;
  out.label = label;
  for (const auto& p : primitives) {
    std::visit(
        [&](const auto& g) {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, RadialSegment>) {
            if (g.is_deep()) {
              // The whole segment sits within double-epsilon of its anchor;
              // it belongs to the band containing the anchor from below.
              if (g.t_hi > lo && g.t_hi <= hi + 1e-12 * std::max(1.0, hi)) {
                out.primitives.push_back(g);
              }
              return;
            }
            double a = std::max(lo, g.t_lo);
            double b = std::min(hi, g.t_hi);
            if (b > a) out.primitives.push_back(RadialSegment(a, b, g.theta));
          } else if constexpr (std::is_same_v<T, Arc>) {
            if (g.t >= lo && g.t <= hi) out.primitives.push_back(g);
          } else if constexpr (std::is_same_v<T, DiskPatch>) {
            double a = g.center.t - g.radius;
            double b = g.center.t + g.radius;
            if (b <= lo || a >= hi) return;
            if (a >= lo && b <= hi) {
              out.primitives.push_back(g);
              return;
            }
            throw std::invalid_argument(
                "clip_t: disk patch straddles a clip level; split not representable");
          } else if constexpr (std::is_same_v<T, AnnulusBand>) {
            double a = std::max(lo, g.t_lo);
            double b = std::min(hi, g.t_hi);
            if (b > a) out.primitives.push_back(AnnulusBand(a, b, g.theta_lo, g.theta_hi));
          }
        },
        p);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct Interval {
  double lo, hi;
};

std::vector<Interval> merge_intervals(std::vector<Interval> iv) {
  std::sort(iv.begin(), iv.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> out;
  for (const auto& i : iv) {
    if (!out.empty() && i.lo <= out.back().hi + 1e-14) {
      out.back().hi = std::max(out.back().hi, i.hi);
    } else {
      out.push_back(i);
    }
  }
  return out;
}

double carrier_key(double x) { return std::round(x * 1e10) / 1e10; }

}  // namespace

CompactSetSpec merged_union(const CompactSetSpec& a, const CompactSetSpec& b) {
  CompactSetSpec out;
  out.label = a.label.empty() ? b.label : (b.label.empty() ? a.label : a.label + "+" + b.label);
  std::map<double, std::vector<Interval>> segs;   // theta -> t intervals
  std::map<double, std::vector<Interval>> arcs;   // t -> theta intervals
  auto feed = [&](const CompactSetSpec& s) {
    for (const auto& p : s.primitives) {
      if (const auto* g = std::get_if<RadialSegment>(&p); g && !g->is_deep()) {
        segs[carrier_key(g->theta)].push_back({g->t_lo, g->t_hi});
      } else if (const auto* c = std::get_if<Arc>(&p)) {
        arcs[carrier_key(c->t)].push_back({c->theta_lo, c->theta_hi});
      } else {
        out.primitives.push_back(p);
      }
    }
  };
  feed(a);
  feed(b);
  for (auto& [theta, iv] : segs) {
    for (const auto& m : merge_intervals(std::move(iv))) {
      out.primitives.push_back(RadialSegment(m.lo, m.hi, theta));
    }
  }
  for (auto& [t, iv] : arcs) {
    for (const auto& m : merge_intervals(std::move(iv))) {
      out.primitives.push_back(Arc(t, m.lo, std::min(m.hi, m.lo + kTwoPi)));
    }
  }
  return out;
}

CompactSetSpec carrier_intersection(const CompactSetSpec& a, const CompactSetSpec& b) {
  CompactSetSpec out;
  out.label = "(" + a.label + ")&(" + b.label + ")";
  for (const auto& pa : a.primitives) {
    for (const auto& pb : b.primitives) {
      if (const auto* sa = std::get_if<RadialSegment>(&pa)) {
        const auto* sb = std::get_if<RadialSegment>(&pb);
        if (sb && carrier_key(sa->theta) == carrier_key(sb->theta)) {
          double lo = std::max(sa->t_lo, sb->t_lo);
          double hi = std::min(sa->t_hi, sb->t_hi);
          if (hi > lo) out.primitives.push_back(RadialSegment(lo, hi, sa->theta));
        }
      } else if (const auto* ca = std::get_if<Arc>(&pa)) {
        const auto* cb = std::get_if<Arc>(&pb);
        if (cb && carrier_key(ca->t) == carrier_key(cb->t)) {
          // compare on the line after shifting b's interval by 0 or +-2*pi
          for (double shift : {0.0, kTwoPi, -kTwoPi}) {
            double lo = std::max(ca->theta_lo, cb->theta_lo + shift);
            double hi = std::min(ca->theta_hi, cb->theta_hi + shift);
            if (hi > lo + 1e-14) out.primitives.push_back(Arc(ca->t, lo, hi));
          }
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::size_t count_1d(double res, double size) {
  return static_cast<std::size_t>(std::max(1.0, std::ceil(res * size)));
}

struct Counts {
  std::vector<std::size_t> n1;  // per primitive (1D count or band n_t)
  std::vector<std::size_t> n2;  // band n_theta (1 for 1D primitives)
  std::size_t total = 0;
};

Counts plan_counts(const CompactSetSpec& spec, double res) {
  Counts c;
  for (const auto& p : spec.primitives) {
    std::size_t m1 = 1, m2 = 1;
    std::visit(
        [&](const auto& g) {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, RadialSegment>) {
            m1 = g.is_deep() ? 32 : count_1d(res, g.t_hi - g.t_lo);
          } else if constexpr (std::is_same_v<T, Arc>) {
            m1 = count_1d(res, g.span());
          } else if constexpr (std::is_same_v<T, DiskPatch>) {
            m1 = std::max<std::size_t>(8, count_1d(res, kTwoPi * g.radius));
          } else if constexpr (std::is_same_v<T, AnnulusBand>) {
            m1 = count_1d(res, g.t_hi - g.t_lo);
            m2 = count_1d(res, g.theta_hi - g.theta_lo);
          }
        },
        p);
    c.n1.push_back(m1);
    c.n2.push_back(m2);
    c.total += m1 * m2;
  }
  return c;
}

}  // namespace

Discretization discretize(const CompactSetSpec& spec, double resolution, std::size_t max_nodes) {
  if (!(resolution > 0.0)) throw std::invalid_argument("discretize: resolution must be positive");
  Discretization d;
  if (spec.empty()) return d;

  double res = resolution;
  Counts counts = plan_counts(spec, res);
  // band primitives scale quadratically with the resolution, so step the
  // correction by the square root and iterate
  for (int pass = 0; pass < 48 && counts.total > max_nodes; ++pass) {
    res *= std::sqrt(0.95 * static_cast<double>(max_nodes) / static_cast<double>(counts.total));
    counts = plan_counts(spec, res);
  }

  for (std::size_t ip = 0; ip < spec.primitives.size(); ++ip) {
    const Primitive& p = spec.primitives[ip];
    std::size_t n1 = counts.n1[ip];
    std::size_t n2 = counts.n2[ip];
    std::visit(
        [&](const auto& g) {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, RadialSegment>) {
            double log_panel = g.log_len - std::log(static_cast<double>(n1));
            double len = std::exp(g.log_len);
            double w = std::exp(log_panel);  // flushes to 0 for deep segments
            for (std::size_t k = 0; k < n1; ++k) {
              double u = (static_cast<double>(k) + 0.5) / static_cast<double>(n1);
              double t = g.is_deep() ? g.t_hi : (g.t_hi - u * len);
              d.nodes.push_back(LogPolarPoint(t, g.theta));
              d.weights.push_back(w);
              d.source_primitive.push_back(static_cast<int>(ip));
              d.panel_log_extent.push_back(log_panel);
              d.panel_dim.push_back(1);
              d.seg_param.push_back(u);
              d.seg_log_len.push_back(g.log_len);
              d.seg_anchor_t.push_back(g.t_hi);
            }
          } else if constexpr (std::is_same_v<T, Arc>) {
            double panel = g.span() / static_cast<double>(n1);
            for (std::size_t k = 0; k < n1; ++k) {
              double th = g.theta_lo + (static_cast<double>(k) + 0.5) * panel;
              d.nodes.push_back(LogPolarPoint(g.t, th));
              d.weights.push_back(panel);
              d.source_primitive.push_back(static_cast<int>(ip));
              d.panel_log_extent.push_back(std::log(panel));
              d.panel_dim.push_back(1);
              d.seg_param.push_back(kNaN);
              d.seg_log_len.push_back(kNaN);
              d.seg_anchor_t.push_back(kNaN);
            }
          } else if constexpr (std::is_same_v<T, DiskPatch>) {
            double panel = kTwoPi * g.radius / static_cast<double>(n1);
            for (std::size_t k = 0; k < n1; ++k) {
              double phi = (static_cast<double>(k) + 0.5) * kTwoPi / static_cast<double>(n1);
              double t = g.center.t + g.radius * std::cos(phi);
              double th = g.center.theta + g.radius * std::sin(phi);
              d.nodes.push_back(LogPolarPoint(t, th));
              d.weights.push_back(panel);
              d.source_primitive.push_back(static_cast<int>(ip));
              d.panel_log_extent.push_back(std::log(panel));
              d.panel_dim.push_back(1);
              d.seg_param.push_back(kNaN);
              d.seg_log_len.push_back(kNaN);
              d.seg_anchor_t.push_back(kNaN);
            }
          } else if constexpr (std::is_same_v<T, AnnulusBand>) {
            double dt = (g.t_hi - g.t_lo) / static_cast<double>(n1);
            double dth = (g.theta_hi - g.theta_lo) / static_cast<double>(n2);
            double area = dt * dth;
            double r_eq = std::sqrt(area / 3.14159265358979323846);
            for (std::size_t i = 0; i < n1; ++i) {
              double t = g.t_lo + (static_cast<double>(i) + 0.5) * dt;
              for (std::size_t j = 0; j < n2; ++j) {
                double th = g.theta_lo + (static_cast<double>(j) + 0.5) * dth;
                d.nodes.push_back(LogPolarPoint(t, th));
                d.weights.push_back(area);
                d.source_primitive.push_back(static_cast<int>(ip));
                d.panel_log_extent.push_back(std::log(r_eq));
                d.panel_dim.push_back(2);
                d.seg_param.push_back(kNaN);
                d.seg_log_len.push_back(kNaN);
                d.seg_anchor_t.push_back(kNaN);
              }
            }
          }
        },
        p);
  }
  return d;
}

ShellDecomposition shell_decompose(const CompactSetSpec& omega_complement, double a, int n_min,
                                   int n_max) {
  if (!(a > 1.0)) throw std::invalid_argument("shell_decompose: need a > 1");
  if (n_min > n_max) throw std::invalid_argument("shell_decompose: need n_min <= n_max");
  ShellDecomposition sd;
  sd.a = a;
  sd.n_min = n_min;
  sd.n_max = n_max;
  sd.shells.reserve(static_cast<std::size_t>(n_max - n_min + 1));
  for (int n = n_min; n <= n_max; ++n) {
    double lo = std::pow(a, n);
    double hi = std::pow(a, n + 1);
    CompactSetSpec shell = omega_complement.clip_t(lo, hi);
    shell.label = omega_complement.label + " shell n=" + std::to_string(n);
    sd.shells.push_back(std::move(shell));
  }
  return sd;
}

}  // namespace logcap
