#include "doctest.h"

#include <cmath>

#include "logcap/capacity.hpp"
#include "logcap/hpath.hpp"
#include "logcap/util.hpp"
#include "logcap/wiener.hpp"

using namespace logcap;

TEST_CASE("paths replay identically for a fixed seed") {
  CompactSetSpec slit;
  slit.primitives.push_back(RadialSegment(2.0, 8.0, 0.0));
  PathOptions opt;
  opt.t_max = 12.0;
  opt.store_every = 50;
  auto a = sample_hpath(LogPolarPoint(1.0, 3.0), slit, opt, 99);
  auto b = sample_hpath(LogPolarPoint(1.0, 3.0), slit, opt, 99);
  CHECK(a.steps == b.steps);
  CHECK(a.reached_t_max == b.reached_t_max);
  REQUIRE(a.trajectory.size() == b.trajectory.size());
  for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
    CHECK(a.trajectory[i].t == b.trajectory[i].t);
    CHECK(a.trajectory[i].theta == b.trajectory[i].theta);
  }
  CHECK(a.hit_events.size() == b.hit_events.size());
}

TEST_CASE("step bounds are enforced") {
  CompactSetSpec empty;
  PathOptions opt;
  opt.step = 0.7;
  CHECK_THROWS(sample_hpath(LogPolarPoint(1.0, 0.0), empty, opt, 1));
}

TEST_CASE("free paths drift to the puncture, deaths are rare") {
  CompactSetSpec empty;
  PathOptions opt;
  opt.t_max = 50.0;
  std::size_t deaths = 0;
  std::size_t reached = 0;
  const std::size_t n = 2000;
  for (std::size_t i = 0; i < n; ++i) {
    auto s = sample_hpath(LogPolarPoint(1.0, 0.0), empty, opt, mix_seed(4242, i));
    if (s.died_at_boundary) ++deaths;
    if (s.reached_t_max) ++reached;
  }
  CHECK(static_cast<double>(deaths) / n < 0.01);
  CHECK(reached + deaths == n);
}

TEST_CASE("the drift at t = 2 is one half") {
  Rng rng(7531);
  const double t0 = 2.0;
  const double dt = 0.01;
  const std::size_t n = 100000;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double incr = dt / t0 + std::sqrt(dt) * rng.normal();
    sum += incr;
  }
  double mean_rate = sum / (static_cast<double>(n) * dt);
  double se = 1.0 / std::sqrt(static_cast<double>(n) * dt);
  CHECK(std::fabs(mean_rate - 0.5) <= 3.0 * se);
}

TEST_CASE("an enclosing circle is unavoidable") {
  CompactSetSpec ring;
  ring.primitives.push_back(Arc(10.0, 0.0, kTwoPi));
  PathOptions opt;
  opt.t_max = 14.0;
  auto stats = estimate_hit_probability(LogPolarPoint(5.0, 1.0), ring, 400, opt, 17);
  CHECK(stats.p_hat >= 1.0 - 3.0 * std::max(stats.standard_error, 1e-3));
}

TEST_CASE("downward excursions follow the hitting law; the slit is heavy") {
  FamilyParams fam;
  fam.name = FamilyName::DeletedRadius;
  fam.n_max = 4;
  CompactSetSpec slit = builtin_family(fam);
  PathOptions opt;
  opt.t_max = 24.0;
  auto stats = estimate_hit_probability(LogPolarPoint(1.0, 3.14), slit, 2000, opt, 23);
  // the chance of ever dipping from t = 1 below the 0.1 circle is exactly
  // one in ten for the conditioned process
  CHECK(stats.revisit_below_fraction == doctest::Approx(0.1).epsilon(0.3));
  CHECK(stats.p_hat > 0.5);  // the slit is heavy
  CHECK(stats.survivor_exit_theta.size() <= stats.n_paths - stats.n_hits);
  // shells up the ray keep getting hit
  CHECK(stats.shell_index.size() >= 3);
}

TEST_CASE("monte carlo first-hit probability matches the potential route") {
  // shell segment [4, 8] of the slit; start on its inner circle away from it
  CompactSetSpec shell;
  shell.primitives.push_back(RadialSegment(4.0, 8.0, 0.0));
  PathOptions opt;
  opt.t_max = 16.0;
  opt.step = 0.01;
  const std::size_t n_paths = 4000;
  LogPolarPoint start(4.0, kTwoPi / 2.0);
  auto stats = estimate_hit_probability(start, shell, n_paths, opt, 31);

  // reference: reduction of the tube-fattened segment, with the truncated
  // tail closed by the same potential at the recorded exit angles
  CompactSetSpec tube;
  tube.primitives.push_back(
      AnnulusBand(4.0, 8.0, -stats.tube_halfwidth, stats.tube_halfwidth));
  auto eq = equilibrium_capacity(discretize(tube, 220.0, 2048), KernelKind::laplace());
  double p_ref = smoothed_reduction(eq, start, KernelKind::laplace()) / start.t;
  double closure = 0.0;
  for (double th : stats.survivor_exit_theta) {
    closure += smoothed_reduction(eq, LogPolarPoint(opt.t_max, th), KernelKind::laplace()) /
               opt.t_max;
  }
  double p_mc = (static_cast<double>(stats.n_hits) + closure) / static_cast<double>(n_paths);
  CHECK(std::fabs(p_mc - p_ref) <= 2.5 * stats.standard_error + 0.01);
}

TEST_CASE("asymptotic law: slit hitting stays near one, sparse hitting decays") {
  PathOptions opt;
  opt.t_max = 40.0;
  FamilyParams slit_fam;
  slit_fam.name = FamilyName::DeletedRadius;
  slit_fam.n_max = 4;
  auto slit_rows =
      asymptotic_law_experiment(builtin_family(slit_fam), 2.0, 1, 3, 600, opt, 77);
  for (const auto& r : slit_rows) {
    CHECK(r.p_hat > 0.95);
  }

  FamilyParams sp;
  sp.name = FamilyName::SparseIntervals;
  sp.n_min = 2;
  sp.n_max = 4;
  sp.eps = 1.0;
  auto sparse_rows =
      asymptotic_law_experiment(builtin_family(sp), 2.0, 2, 4, 600, opt, 78);
  // interval lengths collapse doubly exponentially: hits fall away from one
  // (the capture tube keeps the tail positive; its width is reported)
  REQUIRE(sparse_rows.size() == 3);
  CHECK(sparse_rows[1].p_hat < sparse_rows[0].p_hat);
  CHECK(sparse_rows[2].p_hat < sparse_rows[1].p_hat);
  CHECK(sparse_rows[2].p_hat < 0.65);
  CHECK(sparse_rows[2].p_hat < slit_rows[2].p_hat - 0.25);

  CompactSetSpec empty;
  auto empty_rows = asymptotic_law_experiment(empty, 2.0, 1, 3, 600, opt, 79);
  for (const auto& r : empty_rows) CHECK(r.p_hat == 0.0);
}
