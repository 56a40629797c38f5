#include "logcap/hpath.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "logcap/util.hpp"

namespace logcap {

namespace {

// flat-metric distance to a primitive, used only to shrink steps near thin
// obstacles; a cheap lower bound is enough
double primitive_distance(const Primitive& prim, double t, double theta) {
  return std::visit(
      [&](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, RadialSegment>) {
          double dth = angle_distance(theta, g.theta);
          double dt = (t < g.t_lo) ? g.t_lo - t : (t > g.t_hi ? t - g.t_hi : 0.0);
          return std::hypot(dt, dth);
        } else if constexpr (std::is_same_v<T, Arc>) {
          double dt = std::fabs(t - g.t);
          double rel = wrap_angle(theta - g.theta_lo);
          double span = g.span();
          if (rel <= span || g.full_circle()) return dt;
          double dth = std::min(rel - span, kTwoPi - rel);
          return std::hypot(dt, dth);
        } else if constexpr (std::is_same_v<T, DiskPatch>) {
          double dth = angle_distance(theta, g.center.theta);
          double dt = t - g.center.t;
          return std::max(0.0, std::hypot(dt, dth) - g.radius);
        } else {
          double dth = 0.0;
          double rel = wrap_angle(theta - g.theta_lo);
          double span = g.theta_hi - g.theta_lo;
          if (!(rel <= span) && span < kTwoPi - 1e-12) {
            dth = std::min(rel - span, kTwoPi - rel);
          }
          double dt = (t < g.t_lo) ? g.t_lo - t : (t > g.t_hi ? t - g.t_hi : 0.0);
          return std::hypot(dt, dth);
        }
      },
      prim);
}

double set_distance(const CompactSetSpec& set, double t, double theta) {
  double d = 1e300;
  for (const auto& p : set.primitives) d = std::min(d, primitive_distance(p, t, theta));
  return d;
}

int shell_of(double t, double a) {
  return static_cast<int>(std::floor(std::log(t) / std::log(a)));
}

// Did the straight step from (t0, th0) to (t1, th1) cross a thin primitive?
// Piecewise-linear interpolation of the move; catches transverse crossings
// that would otherwise step over the set.
bool step_crossed(const Primitive& prim, double t0, double th0, double t1, double th1,
                  double tube) {
  if (const auto* seg = std::get_if<RadialSegment>(&prim)) {
    double a0 = wrap_angle(th0 - seg->theta);
    double a1 = wrap_angle(th1 - seg->theta);
    if (a0 > kTwoPi / 2.0) a0 -= kTwoPi;  // signed offset in (-pi, pi]
    if (a1 > kTwoPi / 2.0) a1 -= kTwoPi;
    if (std::fabs(a0) > 1.0 || std::fabs(a1) > 1.0) return false;
    if ((a0 > 0.0) == (a1 > 0.0)) return false;
    double frac = a0 / (a0 - a1);
    double t_c = t0 + frac * (t1 - t0);
    return t_c >= seg->t_lo - tube && t_c <= seg->t_hi + tube;
  }
  if (const auto* arc = std::get_if<Arc>(&prim)) {
    double d0 = t0 - arc->t;
    double d1 = t1 - arc->t;
    if ((d0 > 0.0) == (d1 > 0.0)) return false;
    double frac = d0 / (d0 - d1);
    double th_c = th0 + frac * (th1 - th0);
    if (arc->full_circle()) return true;
    double rel = wrap_angle(th_c - arc->theta_lo);
    return rel <= arc->span() + tube || rel >= kTwoPi - tube;
  }
  return false;  // fat primitives are caught by the tube itself
}

bool step_crossed_set(const CompactSetSpec& set, double t0, double th0, double t1, double th1,
                      double tube) {
  for (const auto& p : set.primitives) {
    if (step_crossed(p, t0, th0, t1, th1, tube)) return true;
  }
  return false;
}

}  // namespace

PathSample sample_hpath(const LogPolarPoint& start, const CompactSetSpec& omega_complement,
                        const PathOptions& opt, std::uint64_t seed) {
  if (!(opt.step > 0.0) || opt.step > 0.5) {
    throw std::invalid_argument("sample_hpath: step must lie in (0, 0.5]");
  }
  if (!(start.t >= opt.step)) {
    throw std::invalid_argument("sample_hpath: start too close to the outer boundary");
  }
  PathSample out;
  Rng rng(mix_seed(seed, 0x68706174));
  double tube = opt.capture_halfwidth > 0.0 ? opt.capture_halfwidth : opt.step;

  double t = start.t;
  double theta = start.theta;
  out.min_t = t;
  std::vector<int> shells_hit;
  if (opt.store_every > 0) out.trajectory.push_back(start);

  const bool has_set = !omega_complement.empty();
  // the spatial increment sqrt(dt) shrinks toward the capture width near
  // obstacles (crossings of thin pieces are detected on the step segment,
  // so sub-tube increments are never needed) and stays below t/3 near the
  // absorbing boundary
  const double dt_near = tube * tube;
  for (std::size_t k = 0; k < opt.max_steps; ++k) {
    double dt_step = opt.step;
    if (has_set) {
      double dist = set_distance(omega_complement, t, theta);
      double sigma = std::max((dist - tube) / 3.0, tube);
      dt_step = std::min(dt_step, std::max(dt_near, sigma * sigma));
    }
    if (t < 1.0) {
      double sigma = t / 3.0;
      dt_step = std::min(dt_step, std::max(1e-10, sigma * sigma));
    }
    double sq = std::sqrt(dt_step);
    double t_prev = t;
    double theta_prev = theta;
    t += dt_step / t + sq * rng.normal();
    theta = wrap_angle(theta + sq * rng.normal());
    ++out.steps;
    if (t <= 0.0) {
      out.died_at_boundary = true;
      out.exit_t = 0.0;
      out.exit_theta = theta;
      return out;
    }
    out.min_t = std::min(out.min_t, t);
    if (opt.store_every > 0 && out.steps % static_cast<std::size_t>(opt.store_every) == 0) {
      out.trajectory.push_back(LogPolarPoint(t, theta));
    }
    if (has_set && (omega_complement.contains(LogPolarPoint(t, theta), tube) ||
                    step_crossed_set(omega_complement, t_prev, theta_prev, t, theta, tube))) {
      if (!out.first_hit_step) out.first_hit_step = out.steps;
      int n = shell_of(t, opt.shell_ratio);
      if (std::find(shells_hit.begin(), shells_hit.end(), n) == shells_hit.end()) {
        shells_hit.push_back(n);
        out.hit_events.push_back(HitEvent{n, t, out.steps});
      }
    }
    if (t >= opt.t_max) {
      out.reached_t_max = true;
      out.exit_t = t;
      out.exit_theta = theta;
      return out;
    }
  }
  out.exit_t = t;
  out.exit_theta = theta;
  return out;
}

HitStats estimate_hit_probability(const LogPolarPoint& start,
                                  const CompactSetSpec& omega_complement, std::size_t n_paths,
                                  const PathOptions& opt, std::uint64_t seed) {
  if (n_paths < 100) {
    throw std::invalid_argument("estimate_hit_probability: need at least 100 paths");
  }
  HitStats stats;
  stats.n_paths = n_paths;
  stats.tube_halfwidth = opt.capture_halfwidth > 0.0 ? opt.capture_halfwidth : opt.step;

  struct Slot {
    bool hit = false;
    bool death = false;
    bool reached = false;
    bool revisit = false;
    double exit_theta = 0.0;
    std::vector<int> shells;
  };
  std::vector<Slot> slots(n_paths);
  parallel_for(n_paths, [&](std::size_t i) {
    PathSample s = sample_hpath(start, omega_complement, opt, mix_seed(seed, i));
    Slot& slot = slots[i];
    slot.hit = s.first_hit_step.has_value();
    slot.death = s.died_at_boundary;
    slot.reached = s.reached_t_max;
    slot.revisit = s.min_t < 0.1;
    slot.exit_theta = s.exit_theta;
    for (const auto& h : s.hit_events) slot.shells.push_back(h.shell_n);
  });

  std::size_t revisits = 0;
  std::vector<std::pair<int, std::size_t>> shell_counts;
  for (const auto& s : slots) {
    if (s.hit) ++stats.n_hits;
    if (s.death) ++stats.n_boundary_deaths;
    if (s.reached) {
      ++stats.n_reached_t_max;
      if (!s.hit) stats.survivor_exit_theta.push_back(s.exit_theta);
    }
    if (s.revisit) ++revisits;
    for (int n : s.shells) {
      auto it = std::find_if(shell_counts.begin(), shell_counts.end(),
                             [n](const auto& p) { return p.first == n; });
      if (it == shell_counts.end()) {
        shell_counts.emplace_back(n, 1);
      } else {
        ++it->second;
      }
    }
  }
  std::sort(shell_counts.begin(), shell_counts.end());
  for (const auto& [n, c] : shell_counts) {
    stats.shell_index.push_back(n);
    stats.shell_first_hits.push_back(c);
  }
  double p = static_cast<double>(stats.n_hits) / static_cast<double>(n_paths);
  stats.p_hat = p;
  stats.standard_error = std::sqrt(std::max(p * (1.0 - p), 1e-12) / static_cast<double>(n_paths));
  stats.revisit_below_fraction = static_cast<double>(revisits) / static_cast<double>(n_paths);
  return stats;
}

std::vector<LawRow> asymptotic_law_experiment(const CompactSetSpec& omega_complement, double a,
                                              int n_lo, int n_hi, std::size_t n_paths,
                                              const PathOptions& opt, std::uint64_t seed) {
  if (!(a > 1.0) || n_lo > n_hi) {
    throw std::invalid_argument("asymptotic_law_experiment: bad shell range");
  }
  std::vector<LawRow> rows;
  double top = std::pow(a, n_hi + 1);
  for (int n = n_lo; n <= n_hi; ++n) {
    double start_t = std::pow(a, n);
    // target: the part of the set at or above this shell
    CompactSetSpec target = omega_complement.clip_t(start_t, top);
    PathOptions local = opt;
    local.shell_ratio = a;
    local.t_max = std::max(1.25 * top, std::min(opt.t_max, 2.0 * top));
    LawRow row;
    row.n = n;
    row.start_t = start_t;
    if (target.empty()) {
      rows.push_back(row);
      continue;
    }
    HitStats stats = estimate_hit_probability(LogPolarPoint(start_t, kTwoPi / 2.0), target,
                                              n_paths, local, mix_seed(seed, 1000 + n));
    row.p_hat = stats.p_hat;
    row.standard_error = stats.standard_error;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace logcap
