#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "logcap/geometry.hpp"

namespace logcap {

// Conditioned diffusion in the cylinder coordinates: unit diffusion in both
// coordinates plus the 1/t drift toward the puncture, which is the weight
// transform of planar Brownian motion written in (t, theta). Paths end on
// reaching t_max (the proxy for the lifetime limit) or t <= 0 (boundary
// death, which must be rare).
struct PathOptions {
  double step = 0.01;
  double t_max = 50.0;
  // thin sets are caught by a capture tube of this half-width in the flat
  // metric; negative means "use the step"
  double capture_halfwidth = -1.0;
  double shell_ratio = 2.0;  // shell bucketing for hit events
  int store_every = 0;       // decimation for trajectory storage; 0 = none
  std::size_t max_steps = 100000000;
};

struct HitEvent {
  int shell_n = 0;
  double t_hit = 0.0;
  std::size_t step_index = 0;
};

struct PathSample {
  std::vector<LogPolarPoint> trajectory;  // decimated when store_every > 0
  std::vector<HitEvent> hit_events;       // first hit per shell
  bool died_at_boundary = false;
  bool reached_t_max = false;
  std::size_t steps = 0;
  // step index of the first hit of the set; empty when the set was missed
  std::optional<std::size_t> first_hit_step;
  double min_t = 0.0;
  double exit_t = 0.0;
  double exit_theta = 0.0;
};

PathSample sample_hpath(const LogPolarPoint& start, const CompactSetSpec& omega_complement,
                        const PathOptions& opt, std::uint64_t seed);

struct HitStats {
  double p_hat = 0.0;
  double standard_error = 0.0;
  std::size_t n_paths = 0;
  std::size_t n_hits = 0;
  std::size_t n_boundary_deaths = 0;
  std::size_t n_reached_t_max = 0;
  double tube_halfwidth = 0.0;
  // first-hit counts per shell index (parallel arrays)
  std::vector<int> shell_index;
  std::vector<std::size_t> shell_first_hits;
  // exit angles of paths that reached t_max without hitting; lets a caller
  // close the truncated tail with the potential representation
  std::vector<double> survivor_exit_theta;
  double revisit_below_fraction = 0.0;  // paths whose min t dipped below 0.1
};

// Independent paths with seeds derived from (seed, path index); the
// reduction is slot-based and therefore identical for any worker count.
HitStats estimate_hit_probability(const LogPolarPoint& start,
                                  const CompactSetSpec& omega_complement, std::size_t n_paths,
                                  const PathOptions& opt, std::uint64_t seed);

struct LawRow {
  int n = 0;
  double start_t = 0.0;
  double p_hat = 0.0;
  double standard_error = 0.0;
};

// Hitting of the union of shells >= n from the circle t = a^n, for each n in
// the range: the finite surrogate of the near-puncture asymptotic law. The
// sequence tending to 1 is divergence-side evidence, staying away from 1 is
// convergence-side evidence.
std::vector<LawRow> asymptotic_law_experiment(const CompactSetSpec& omega_complement, double a,
                                              int n_lo, int n_hi, std::size_t n_paths,
                                              const PathOptions& opt, std::uint64_t seed);

}  // namespace logcap
