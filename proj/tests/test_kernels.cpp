#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "logcap/geometry.hpp"
#include "logcap/kernels.hpp"
#include "logcap/util.hpp"

using namespace logcap;

TEST_CASE("green value tends to t_min toward the puncture") {
  LogPolarPoint xi(3.2, 1.1);
  LogPolarPoint deep(1e6, 4.0);
  CHECK(green_disk(xi, deep) == doctest::Approx(3.2).epsilon(1e-12));
  CHECK(green_disk(deep, xi) == doctest::Approx(3.2).epsilon(1e-12));
}

TEST_CASE("green is symmetric and positive on random interior pairs") {
  Rng rng(7);
  for (int k = 0; k < 10000; ++k) {
    LogPolarPoint p(rng.uniform(1e-3, 50.0), rng.uniform(0.0, kTwoPi));
    LogPolarPoint q(rng.uniform(1e-3, 50.0), rng.uniform(0.0, kTwoPi));
    if (std::fabs(p.t - q.t) + angle_distance(p.theta, q.theta) < 1e-9) continue;
    double g1 = green_disk(p, q);
    double g2 = green_disk(q, p);
    CHECK(g1 >= 0.0);
    CHECK(g1 == doctest::Approx(g2).epsilon(1e-13));
  }
}

TEST_CASE("log-polar and cartesian formulas agree at moderate depth") {
  Rng rng(11);
  for (int k = 0; k < 5000; ++k) {
    LogPolarPoint p(rng.uniform(0.05, 20.0), rng.uniform(0.0, kTwoPi));
    LogPolarPoint q(rng.uniform(0.05, 20.0), rng.uniform(0.0, kTwoPi));
    if (std::fabs(p.t - q.t) + angle_distance(p.theta, q.theta) < 1e-6) continue;
    double a = green_disk(p, q);
    double b = green_disk_cartesian(p, q);
    CHECK(std::fabs(a - b) <= 1e-10 * std::max(1.0, std::fabs(b)));
  }
}

TEST_CASE("green vanishes toward the outer boundary") {
  LogPolarPoint near_boundary(1e-6, 0.7);
  LogPolarPoint inner(2.0, 3.0);
  double v = green_disk(near_boundary, inner);
  CHECK(v >= 0.0);
  CHECK(v < 1e-4);
  CHECK(v == doctest::Approx(green_disk_cartesian(near_boundary, inner)).epsilon(1e-9));
}

TEST_CASE("coincident points raise a singularity error") {
  LogPolarPoint p(1.0, 1.0);
  CHECK_THROWS_AS(green_disk(p, p), std::domain_error);
}

TEST_CASE("deep pairs stay finite with no cartesian quantities formed") {
  // scales from the dyadic shells with a = 2 up to n = 12: t <= 2^13
  for (int n = 1; n <= 12; ++n) {
    double t = std::pow(2.0, n + 1);
    LogPolarPoint p(t, 0.0);
    LogPolarPoint q(t / 2.0, 0.3);
    double g = green_disk(p, q);
    CHECK(std::isfinite(g));
    CHECK(g > 0.0);
    CHECK(g <= t / 2.0 + 1.0);
  }
}

TEST_CASE("five-point laplacian of the green function vanishes at second order") {
  LogPolarPoint pole(1.2, 2.0);
  auto g_cart = [&](double x, double y) { return green_disk_cartesian(to_logpolar(x, y), pole); };
  auto five_point = [&](double x, double y, double eps) {
    return (g_cart(x + eps, y) + g_cart(x - eps, y) + g_cart(x, y + eps) + g_cart(x, y - eps) -
            4.0 * g_cart(x, y)) /
           (eps * eps);
  };
  for (auto [x, y] : {std::pair{0.45, 0.1}, std::pair{-0.2, 0.4}, std::pair{0.1, -0.55}}) {
    double coarse = five_point(x, y, 4e-3);
    double fine = five_point(x, y, 2e-3);
    CHECK(std::fabs(coarse) < 5e-2);
    // harmonic: the residual is pure truncation error and decays like eps^2
    CHECK(std::fabs(fine) <= 0.33 * std::fabs(coarse) + 1e-8);
  }
}

TEST_CASE("h-kernel matches its definition") {
  KernelKind lap = KernelKind::laplace();
  LogPolarPoint p(1.0, 0.0);
  LogPolarPoint q(1.0, kTwoPi / 2.0);
  CHECK(h_kernel(p, q, lap) == doctest::Approx(green_disk(p, q)).epsilon(1e-14));

  LogPolarPoint a(2.0, 0.3);
  LogPolarPoint b(2.0, 1.9);
  CHECK(h_kernel(a, b, lap) == doctest::Approx(green_disk(a, b) / 4.0).epsilon(1e-14));
}

TEST_CASE("h-kernel admits a positive lower bound on a small compact") {
  KernelKind lap = KernelKind::laplace();
  CompactSetSpec patch;
  patch.primitives.push_back(DiskPatch(LogPolarPoint(1.0, 2.0), 0.05));
  auto d = discretize(patch, 400.0);
  double h_max = 0.0;
  for (const auto& p : d.nodes) h_max = std::max(h_max, p.t);
  // euclidean diameter of the patch
  double diam = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = i + 1; j < d.size(); ++j) {
      auto a = to_cartesian(d.nodes[i]);
      auto b = to_cartesian(d.nodes[j]);
      diam = std::max(diam, std::hypot(a[0] - b[0], a[1] - b[1]));
    }
  }
  double min_kernel = 1e300;
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = i + 1; j < d.size(); ++j) {
      min_kernel = std::min(min_kernel, h_kernel(d.nodes[i], d.nodes[j], lap));
    }
  }
  CHECK(min_kernel > 0.0);
  double c1 = min_kernel * h_max * h_max / std::log(2.0 / diam);
  CHECK(c1 > 0.05);
}

TEST_CASE("green stays comparable to log(2/distance) on a fixed compact") {
  Rng rng(23);
  double lo = 1e300, hi = 0.0;
  for (int k = 0; k < 4000; ++k) {
    LogPolarPoint p(rng.uniform(0.5, 3.0), rng.uniform(0.0, kTwoPi));
    LogPolarPoint q(rng.uniform(0.5, 3.0), rng.uniform(0.0, kTwoPi));
    auto a = to_cartesian(p);
    auto b = to_cartesian(q);
    double dist = std::hypot(a[0] - b[0], a[1] - b[1]);
    if (dist < 1e-8) continue;
    double ratio = green_disk(p, q) / std::log(2.0 / dist);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  CHECK(lo > 0.05);
  CHECK(hi < 20.0);
}

TEST_CASE("comparability of a kernel with itself is the unit interval") {
  CompactSetSpec circle;
  circle.primitives.push_back(Arc(1.5, 0.0, kTwoPi));
  auto d = discretize(circle, 20.0);
  auto iv = comparability_check(KernelKind::laplace(), KernelKind::laplace(), d, 500, 3);
  CHECK(iv.lo == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(iv.hi == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("comparability rejects degenerate samples") {
  CompactSetSpec tiny;
  tiny.primitives.push_back(Arc(1.0, 0.0, 1e-9));
  auto d = discretize(tiny, 1.0);
  CHECK_THROWS(comparability_check(KernelKind::laplace(), KernelKind::laplace(), d, 100, 3));
}
