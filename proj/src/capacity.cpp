#include "logcap/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "logcap/util.hpp"

namespace logcap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Flat (t, theta) distance; the chordal factor of the kernel reduces to it
// at small separations.
double flat_distance(const LogPolarPoint& a, const LogPolarPoint& b) {
  return std::hypot(a.t - b.t, angle_distance(a.theta, b.theta));
}

// Pairwise Green value between nodes i and j of a discretization, with the
// deep-segment branch: inside a segment whose length only exists as an
// exponent, the kernel is t_anchor - log(len * |du|), evaluated as
// t_anchor - log_len - log|du| so nothing underflows.
double node_green(const Discretization& k, std::size_t i, std::size_t j, const KernelKind& kind) {
  const LogPolarPoint& a = k.nodes[i];
  const LogPolarPoint& b = k.nodes[j];
  if (kind.is_laplace() && k.source_primitive[i] == k.source_primitive[j] &&
      !std::isnan(k.seg_log_len[i]) && deep_segment(k.seg_log_len[i], k.seg_anchor_t[i])) {
    // Both nodes sit on a segment whose length exists only as an exponent.
    // The separation is len * |du|, so -log separation = -log_len - log|du|
    // and the smooth part collapses to its diagonal value at the anchor.
    double du = std::fabs(k.seg_param[i] - k.seg_param[j]);
    if (du == 0.0) throw std::domain_error("node_green: coincident deep-segment nodes");
    return green_disk_diag_regular(k.seg_anchor_t[i]) - k.seg_log_len[i] - std::log(du);
  }
  return kind.green(a, b);
}

// Panel-averaged self interaction: smooth part at the node plus the exact
// mean of -log distance over the panel against itself.
//   1D panel of length l:  mean = 3/2 - log l
//   2D panel, equal-area disk radius r:  mean = 1/4 - log r
double node_diag(const Discretization& k, std::size_t i, const KernelKind& kind,
                 double near_ratio = 1.0) {
  double log_extent = k.panel_log_extent[i];
  double sing = (k.panel_dim[i] == 1) ? (1.5 - log_extent) : (0.25 - log_extent);
  double diag = green_disk_diag_regular(k.nodes[i].t) + sing;
  return kind.is_laplace() ? diag : near_ratio * diag;
}

// Near-field ratio G_A / G_Laplace measured per node at a mesh-resolvable
// offset; used to transplant the analytic singular quadrature to discrete
// Green tables, whose raw values flatten out below the mesh scale.
std::vector<double> near_field_ratios(const Discretization& k, const DiscreteGreenKernel& tab) {
  std::vector<double> r(k.size(), 1.0);
  double off = std::max(3.0 * tab.mesh_dt_near(), 0.05);
  for (std::size_t i = 0; i < k.size(); ++i) {
    LogPolarPoint probe(k.nodes[i].t + off, k.nodes[i].theta);
    double ga = tab.green(k.nodes[i], probe);
    double gl = green_disk(k.nodes[i], probe);
    if (ga > 0.0 && gl > 0.0) r[i] = ga / gl;
  }
  return r;
}

}  // namespace

double DiscreteMeasure::total() const {
  return std::accumulate(masses.begin(), masses.end(), 0.0);
}

Eigen::MatrixXd kernel_matrix(const Discretization& k, const KernelKind& kind,
                              PotentialGauge gauge) {
  const std::size_t n = k.size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  if (kind.is_laplace()) {
    parallel_for(n, [&](std::size_t i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double g = (i == j) ? node_diag(k, i, kind) : node_green(k, i, j, kind);
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = g;
        m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = g;
      }
    });
  } else {
    m = kind.table->green_matrix(k);
    std::vector<double> ratio = near_field_ratios(k, *kind.table);
    // below the mesh scale the table flattens; splice in the analytic
    // kernel scaled by the measured near-field ratio
    double near = 2.5 * kind.table->mesh_dt_near();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (flat_distance(k.nodes[i], k.nodes[j]) < near) {
          double g = std::sqrt(ratio[i] * ratio[j]) * node_green(k, i, j, KernelKind::laplace());
          m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = g;
          m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = g;
        }
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = node_diag(k, i, kind, ratio[i]);
    }
  }
  if (gauge == PotentialGauge::HWeighted) {
    Eigen::VectorXd inv_h(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      inv_h[static_cast<Eigen::Index>(i)] = 1.0 / kind.h(k.nodes[i]);
    }
    m = inv_h.asDiagonal() * m * inv_h.asDiagonal();
  }
  return m;
}

namespace {

// Euclidean projection onto the probability simplex (Condat-style sort rule).
void project_simplex(Eigen::VectorXd& w) {
  const Eigen::Index n = w.size();
  std::vector<double> u(w.data(), w.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0;
  double tau = 0.0;
  int rho = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    cum += u[static_cast<std::size_t>(i)];
    double cand = (cum - 1.0) / static_cast<double>(i + 1);
    if (u[static_cast<std::size_t>(i)] > cand) {
      tau = cand;
      rho = static_cast<int>(i) + 1;
    }
  }
  (void)rho;
  for (Eigen::Index i = 0; i < n; ++i) w[i] = std::max(0.0, w[i] - tau);
}

struct QpOutcome {
  Eigen::VectorXd w;
  double energy = kInf;
  int iterations = 0;
  double kkt_residual = kInf;
};

// Projected gradient with Barzilai-Borwein steps, then an active-set polish
// that solves the equality system on the support and re-checks the
// complementarity conditions globally.
QpOutcome minimize_simplex_energy(const Eigen::MatrixXd& m, const QpOptions& opt) {
  const Eigen::Index n = m.rows();
  QpOutcome out;
  double scale = std::max(1.0, m.diagonal().cwiseAbs().maxCoeff());

  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  Eigen::VectorXd g = 2.0 * (m * w);
  double step = 1.0 / scale;
  Eigen::VectorXd w_prev = w, g_prev = g;

  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    Eigen::VectorXd cand = w - step * g;
    project_simplex(cand);
    Eigen::VectorXd g_cand = 2.0 * (m * cand);

    Eigen::VectorXd s = cand - w;
    Eigen::VectorXd y = g_cand - g;
    w_prev = w;
    g_prev = g;
    w = cand;
    g = g_cand;

    double ss = s.dot(s);
    double sy = s.dot(y);
    step = (sy > 1e-300) ? ss / sy : 1.0 / scale;
    step = std::clamp(step, 1e-12 / scale, 1e6 / scale);

    if (std::sqrt(ss) < 1e-13 && it > 8) break;
    // KKT check every few sweeps
    if (it % 16 == 15) {
      double energy = w.dot(m * w);
      double lam = 2.0 * energy;
      double viol = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (w[i] > 1e-14) {
          viol = std::max(viol, std::fabs(g[i] - lam));
        } else {
          viol = std::max(viol, std::max(0.0, lam - g[i]));
        }
      }
      if (viol <= opt.tol * std::max(lam, 1e-30)) break;
    }
  }
  out.iterations = it;

  auto record = [&](const Eigen::VectorXd& w_try) {
    Eigen::VectorXd g_try = 2.0 * (m * w_try);
    double energy = 0.5 * w_try.dot(g_try);
    double lam = 2.0 * energy;
    double viol = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      viol = std::max(viol, w_try[i] > 1e-14 ? std::fabs(g_try[i] - lam)
                                             : std::max(0.0, lam - g_try[i]));
    }
    double res = viol / std::max(lam, 1e-30);
    if (energy < out.energy || (energy <= out.energy * (1.0 + 1e-12) && res < out.kkt_residual)) {
      out.w = w_try;
      out.energy = energy;
      out.kkt_residual = res;
    }
  };
  record(w);

  // Active-set polish. On the support S the optimum solves M_SS x = 1 with
  // w_S = x / sum(x); nodes with negative x leave, violated outside nodes
  // enter. Batch moves keep the round count low; late rounds fall back to
  // single moves to rule out cycling.
  std::vector<Eigen::Index> support;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (w[i] > 1e-12) support.push_back(i);
  }
  if (support.empty()) support.push_back(0);
  if (support.size() > 3000) {
    // keep the heaviest candidates; the entering logic recovers the rest
    std::sort(support.begin(), support.end(),
              [&](Eigen::Index a, Eigen::Index b) { return w[a] > w[b]; });
    support.resize(3000);
    std::sort(support.begin(), support.end());
  }
  for (int round = 0; round < 120 && !support.empty(); ++round) {
    const Eigen::Index ns = static_cast<Eigen::Index>(support.size());
    Eigen::MatrixXd ms(ns, ns);
    for (Eigen::Index a = 0; a < ns; ++a) {
      for (Eigen::Index b = 0; b < ns; ++b) ms(a, b) = m(support[a], support[b]);
    }
    Eigen::VectorXd x = ms.ldlt().solve(Eigen::VectorXd::Ones(ns));
    std::vector<Eigen::Index> kept;
    kept.reserve(static_cast<std::size_t>(ns));
    for (Eigen::Index a = 0; a < ns; ++a) {
      if (x[a] > -1e-14) kept.push_back(support[a]);
    }
    if (kept.size() != support.size()) {
      if (round > 80 && kept.size() + 1 < support.size()) {
        // drop only the most negative one
        Eigen::Index worst_a = 0;
        for (Eigen::Index a = 0; a < ns; ++a) {
          if (x[a] < x[worst_a]) worst_a = a;
        }
        kept.clear();
        for (Eigen::Index a = 0; a < ns; ++a) {
          if (a != worst_a) kept.push_back(support[a]);
        }
      }
      support = std::move(kept);
      continue;
    }
    double sum = x.sum();
    if (!(sum > 0.0)) break;
    Eigen::VectorXd w_try = Eigen::VectorXd::Zero(n);
    for (Eigen::Index a = 0; a < ns; ++a) w_try[support[a]] = std::max(0.0, x[a]) / sum;
    Eigen::VectorXd g_try = 2.0 * (m * w_try);
    double energy = 0.5 * w_try.dot(g_try);
    double lam = 2.0 * energy;
    record(w_try);
    // entering nodes: most violated complementarity outside the support
    std::vector<std::pair<double, Eigen::Index>> enter;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (w_try[i] <= 0.0) {
        double v = lam - g_try[i];
        if (v > opt.tol * std::max(lam, 1e-30)) enter.emplace_back(v, i);
      }
    }
    if (enter.empty()) break;
    std::sort(enter.begin(), enter.end(), std::greater<>());
    std::size_t batch = (round > 80) ? 1 : std::min<std::size_t>(enter.size(), 64);
    for (std::size_t b = 0; b < batch; ++b) support.push_back(enter[b].second);
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
  }
  return out;
}

}  // namespace

CapacityResult equilibrium_capacity(const Discretization& k, const KernelKind& kind,
                                    const QpOptions& opt) {
  CapacityResult res;
  res.route = CapacityRoute::EquilibriumQP;
  if (k.empty()) {
    res.capacity = 0.0;
    res.robin = kInf;
    return res;
  }
  Eigen::MatrixXd m = kernel_matrix(k, kind, opt.gauge);
  QpOutcome qp = minimize_simplex_energy(m, opt);
  if (!(qp.energy > 0.0) || !std::isfinite(qp.energy)) {
    throw std::runtime_error("equilibrium_capacity: minimization failed, residual " +
                             std::to_string(qp.kkt_residual));
  }
  if (qp.kkt_residual > 1e-4) {
    throw std::runtime_error("equilibrium_capacity: QP did not converge, residual " +
                             std::to_string(qp.kkt_residual));
  }
  res.robin = qp.energy;
  res.diagnostics.qp_iterations = qp.iterations;
  res.diagnostics.residual = qp.kkt_residual;
  res.diagnostics.nodes = k.size();
  if (qp.energy > opt.polar_threshold) {
    res.capacity = 0.0;
    res.numerically_polar = true;
    return res;
  }
  res.capacity = 1.0 / qp.energy;
  res.equilibrium.nodes = k.nodes;
  res.equilibrium.panel_log_extent = k.panel_log_extent;
  res.equilibrium.panel_dim = k.panel_dim;
  res.equilibrium.masses.resize(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) {
    res.equilibrium.masses[i] = res.capacity * qp.w[static_cast<Eigen::Index>(i)];
  }

  // domination sweep: the equilibrium potential must stay below h on a
  // probe grid spanning well below and above the set
  double t_lo = kInf, t_hi = 0.0;
  for (const auto& p : k.nodes) {
    t_lo = std::min(t_lo, p.t);
    t_hi = std::max(t_hi, p.t);
  }
  double probe_lo = std::max(1e-3, 0.2 * t_lo);
  double probe_hi = 4.0 * t_hi;
  double worst = 0.0;
  const int n_levels = 24, n_angles = 12;
  for (int i = 0; i < n_levels; ++i) {
    double t = probe_lo * std::pow(probe_hi / probe_lo, (i + 0.5) / n_levels);
    for (int a = 0; a < n_angles; ++a) {
      LogPolarPoint x(t, kTwoPi * (a + 0.31) / n_angles);
      double u = potential_eval(res.equilibrium, x, kind, PotentialGauge::HWeighted);
      worst = std::max(worst, u / kind.h(x));
    }
  }
  res.diagnostics.max_potential_over_h = worst;
  return res;
}

double potential_eval(const DiscreteMeasure& mu, const LogPolarPoint& x, const KernelKind& kind,
                      PotentialGauge gauge) {
  double acc = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    double mass = mu.masses[j];
    if (mass == 0.0) continue;
    const LogPolarPoint& y = mu.nodes[j];
    double g;
    double half_panel =
        (!mu.panel_log_extent.empty() && mu.panel_log_extent[j] > -700.0)
            ? 0.5 * std::exp(mu.panel_log_extent[j])
            : 0.0;
    double dist = flat_distance(x, y);
    if (half_panel > 0.0 && dist < half_panel) {
      // evaluation lands inside the panel: use the panel-averaged kernel
      // instead of the divergent point value
      if (kind.is_laplace()) {
        double log_extent = mu.panel_log_extent[j];
        double sing = (mu.panel_dim[j] == 1) ? (1.5 - log_extent) : (0.25 - log_extent);
        g = green_disk_diag_regular(y.t) + sing;
      } else {
        g = kind.green(x, LogPolarPoint(y.t + 2.0 * half_panel, y.theta));
      }
    } else {
      g = kind.green(x, y);
    }
    double weight = (gauge == PotentialGauge::HWeighted) ? 1.0 / kind.h(y) : 1.0;
    acc += g * mass * weight;
  }
  return acc;
}

double smoothed_reduction(const CapacityResult& equilibrium, const LogPolarPoint& x,
                          const KernelKind& kind) {
  return potential_eval(equilibrium.equilibrium, x, kind, PotentialGauge::HWeighted);
}

ZetaValue capacity_at_zeta(const CapacityResult& equilibrium, const KernelKind& kind,
                           double t_set_max) {
  if (!(t_set_max > 0.0) || !std::isfinite(t_set_max)) {
    throw std::invalid_argument("capacity_at_zeta: set must be bounded away from the puncture");
  }
  const int n_angles = 8;
  auto ring_average = [&](double t_probe) {
    double acc = 0.0;
    for (int a = 0; a < n_angles; ++a) {
      LogPolarPoint probe(t_probe, kTwoPi * (a + 0.37) / n_angles);
      acc += potential_eval(equilibrium.equilibrium, probe, kind, PotentialGauge::HWeighted);
    }
    return acc / n_angles;
  };
  double t1 = 4.0 * t_set_max;
  double t2 = 6.0 * t_set_max;
  double r1 = ring_average(t1);
  double r2 = ring_average(t2);
  // angular averaging kills the leading e^{-dt} term; the residual decays
  // like e^{-2(t - t_set_max)}, so r2 is already essentially converged.
  // Richardson step with that rate:
  double q = std::exp(-2.0 * (t2 - t1));
  double extrap = (std::fabs(1.0 - q) > 1e-12) ? (r2 - q * r1) / (1.0 - q) : r2;
  ZetaValue out;
  out.value = extrap;
  double cap = equilibrium.capacity;
  out.agreement_gap = std::fabs(extrap - cap) / std::max(cap, 1e-300);
  return out;
}

ZetaValue capacity_at_zeta(const Discretization& k, const KernelKind& kind, const QpOptions& opt) {
  CapacityResult res = equilibrium_capacity(k, kind, opt);
  if (k.empty()) return ZetaValue{0.0, 0.0};
  double t_max = 0.0;
  for (const auto& p : k.nodes) t_max = std::max(t_max, p.t);
  return capacity_at_zeta(res, kind, t_max);
}

// ---------------------------------------------------------------------------

ObstacleResult obstacle_capacity(const CompactSetSpec& k, const CoefficientField& field,
                                 ObstacleOptions opt) {
  ObstacleResult out;
  out.result.route = CapacityRoute::ObstacleFEM;
  if (k.empty()) {
    out.result.capacity = 0.0;
    out.result.robin = kInf;
    return out;
  }
  double t_ceiling = opt.mesh.t_ceiling;
  if (!(t_ceiling > 0.0)) t_ceiling = std::max(1.5 * k.t_max(), k.t_max() + 3.0);
  MeshOptions mo = mesh_options_for(k, t_ceiling);
  mo.t_floor = opt.mesh.t_floor;
  mo.dt_fine = opt.mesh.dt_fine;
  mo.dt_coarse = opt.mesh.dt_coarse;
  mo.n_theta = opt.mesh.n_theta;
  out.mesh = std::make_shared<Mesh>(build_strip_mesh(mo));
  const Mesh& mesh = *out.mesh;

  std::vector<std::size_t> obstacle = mesh.vertices_in(k);
  if (obstacle.empty()) {
    throw std::runtime_error("obstacle_capacity: mesh does not resolve the set");
  }
  DirichletForm form = assemble(field, mesh);

  // obstacle heights: h = t for the exact kernel scaling
  auto height = [&](std::size_t v) { return mesh.vertex_t(v); };

  std::vector<std::size_t> floor = mesh.floor_vertices();
  std::vector<char> is_floor(mesh.n_vertices(), 0);
  for (std::size_t v : floor) is_floor[v] = 1;

  // Active set loop: start with the whole obstacle clamped; release nodes
  // whose multiplier turns negative, re-clamp nodes that dip below h.
  std::vector<char> active(mesh.n_vertices(), 0);
  for (std::size_t v : obstacle) {
    if (!is_floor[v]) active[v] = 1;
  }
  Eigen::VectorXd u;
  int rounds = 0;
  for (; rounds < opt.max_active_set_iters; ++rounds) {
    std::vector<std::size_t> fixed = floor;
    std::vector<double> fixed_vals(floor.size(), 0.0);
    for (std::size_t v = 0; v < mesh.n_vertices(); ++v) {
      if (active[v]) {
        fixed.push_back(v);
        fixed_vals.push_back(height(v));
      }
    }
    ConstrainedSolver solver(form, fixed);
    Eigen::VectorXd vals =
        Eigen::Map<const Eigen::VectorXd>(fixed_vals.data(), static_cast<Eigen::Index>(fixed_vals.size()));
    u = solver.solve_zero_rhs(vals);

    // multipliers on the active set = residual of the unconstrained equation
    Eigen::VectorXd residual = form.matrix * u;
    bool changed = false;
    double scale = std::max(1.0, residual.cwiseAbs().maxCoeff());
    for (std::size_t v : obstacle) {
      if (is_floor[v]) continue;
      if (active[v] && residual[static_cast<Eigen::Index>(v)] < -opt.tolerance * scale) {
        active[v] = 0;
        changed = true;
      } else if (!active[v] &&
                 u[static_cast<Eigen::Index>(v)] < height(v) * (1.0 - 1e-12) - opt.tolerance) {
        active[v] = 1;
        changed = true;
      }
    }
    if (!changed) break;
  }

  double energy = form.energy(u);
  out.result.capacity = energy / kTwoPi;
  out.result.robin = (out.result.capacity > 0.0) ? 1.0 / out.result.capacity : kInf;
  out.result.diagnostics.qp_iterations = rounds;
  out.result.diagnostics.nodes = obstacle.size();
  out.potential = u;

  // equilibrium masses read off the residual: A u acts on the active nodes
  // only, and the h weight converts the balayage density to the h gauge
  Eigen::VectorXd residual = form.matrix * u;
  double total = 0.0;
  for (std::size_t v = 0; v < mesh.n_vertices(); ++v) {
    if (active[v] && residual[static_cast<Eigen::Index>(v)] > 0.0) {
      double mass = residual[static_cast<Eigen::Index>(v)] * height(v) / kTwoPi;
      out.result.equilibrium.nodes.push_back(mesh.vertex(v));
      out.result.equilibrium.masses.push_back(mass);
      total += mass;
    }
  }
  out.result.diagnostics.residual = std::fabs(total - out.result.capacity) /
                                    std::max(out.result.capacity, 1e-300);
  return out;
}

}  // namespace logcap
