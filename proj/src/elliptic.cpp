#include "logcap/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "logcap/util.hpp"

namespace logcap {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

CoefficientField identity_field() {
  CoefficientField f;
  f.eval = [](const LogPolarPoint&) { return Eigen::Matrix2d::Identity().eval(); };
  f.lambda = 1.0;
  f.description = "identity";
  return f;
}

CoefficientField diag_field(double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw std::invalid_argument("diag_field: entries must be positive");
  CoefficientField f;
  Eigen::Matrix2d m = Eigen::Vector2d(d1, d2).asDiagonal();
  f.eval = [m](const LogPolarPoint&) { return m; };
  f.lambda = std::max({d1, 1.0 / d1, d2, 1.0 / d2});
  f.description = "diag(" + std::to_string(d1) + "," + std::to_string(d2) + ")";
  return f;
}

CoefficientField rotated_diag_field(double d1, double d2, double alpha) {
  CoefficientField f = diag_field(d1, d2);
  Eigen::Matrix2d rot;
  rot << std::cos(alpha), -std::sin(alpha), std::sin(alpha), std::cos(alpha);
  Eigen::Matrix2d m = rot * Eigen::Vector2d(d1, d2).asDiagonal() * rot.transpose();
  f.eval = [m](const LogPolarPoint&) { return m; };
  f.description = "rotated_diag(" + std::to_string(d1) + "," + std::to_string(d2) + ";" +
                  std::to_string(alpha) + ")";
  return f;
}

CoefficientField checkerboard_field(double low, double high, double cell) {
  if (!(low > 0.0) || !(high > 0.0) || !(cell > 0.0)) {
    throw std::invalid_argument("checkerboard_field: parameters must be positive");
  }
  CoefficientField f;
  f.eval = [low, high, cell](const LogPolarPoint& p) {
    long i = static_cast<long>(std::floor(p.t / cell));
    long j = static_cast<long>(std::floor(p.theta / cell));
    double v = ((i + j) % 2 == 0) ? low : high;
    return (v * Eigen::Matrix2d::Identity()).eval();
  };
  f.lambda = std::max({low, 1.0 / low, high, 1.0 / high});
  f.description = "checkerboard";
  return f;
}

EllipticityReport validate_ellipticity(const CoefficientField& field, int n_samples,
                                       std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("validate_ellipticity: need n_samples >= 1");
  Rng rng(mix_seed(seed, 0x656c6c69));
  double worst = 1.0;
  for (int k = 0; k < n_samples; ++k) {
    LogPolarPoint p(rng.uniform(0.05, 40.0), rng.uniform(0.0, kTwoPi));
    Eigen::Matrix2d a = field.eval(p);
    double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if (std::fabs(a(0, 1) - a(1, 0)) > 1e-12 * scale) {
      throw std::runtime_error("validate_ellipticity: non-symmetric coefficient matrix at sample");
    }
    // eigenvalues of a symmetric 2x2
    double tr = a(0, 0) + a(1, 1);
    double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    double emax = tr / 2.0 + disc;
    double emin = tr / 2.0 - disc;
    if (!(emin > 0.0)) {
      EllipticityReport r;
      r.pass = false;
      r.measured_lambda = std::numeric_limits<double>::infinity();
      r.detail = "non-positive eigenvalue sampled";
      return r;
    }
    worst = std::max({worst, emax, 1.0 / emin});
  }
  EllipticityReport r;
  r.measured_lambda = worst;
  r.pass = worst <= field.lambda + 1e-9;
  if (!r.pass) r.detail = "measured lambda exceeds declared bound";
  return r;
}

// ---------------------------------------------------------------------------

Mesh::Mesh(std::vector<double> t_lines, std::vector<double> theta_lines)
    : t_lines_(std::move(t_lines)), theta_lines_(std::move(theta_lines)) {
  if (t_lines_.size() < 2 || theta_lines_.size() < 3) {
    throw std::invalid_argument("Mesh: need at least 2 t-lines and 3 theta-lines");
  }
  if (!std::is_sorted(t_lines_.begin(), t_lines_.end()) ||
      !std::is_sorted(theta_lines_.begin(), theta_lines_.end())) {
    throw std::invalid_argument("Mesh: grid lines must be sorted");
  }
  if (!(t_lines_.front() > 0.0)) throw std::invalid_argument("Mesh: t_floor must be positive");
}

LogPolarPoint Mesh::vertex(std::size_t v) const {
  return LogPolarPoint(vertex_t(v), vertex_theta(v));
}

Mesh::Tri Mesh::triangle(std::size_t k) const {
  std::size_t cell = k / 2;
  bool upper = (k % 2) != 0;
  std::size_t cols = n_cols();
  std::size_t i = cell / cols;
  std::size_t j = cell % cols;
  std::size_t jn = (j + 1) % cols;
  double th0 = theta_lines_[j];
  double th1 = (jn == 0) ? theta_lines_[0] + kTwoPi : theta_lines_[jn];
  double t0 = t_lines_[i];
  double t1 = t_lines_[i + 1];
  std::size_t v00 = vertex_id(i, j), v10 = vertex_id(i + 1, j);
  std::size_t v11 = vertex_id(i + 1, jn), v01 = vertex_id(i, jn);
  Tri tri{};
  if (!upper) {
    tri.v[0] = v00; tri.v[1] = v10; tri.v[2] = v11;
    tri.t[0] = t0; tri.t[1] = t1; tri.t[2] = t1;
    tri.theta[0] = th0; tri.theta[1] = th0; tri.theta[2] = th1;
  } else {
    tri.v[0] = v00; tri.v[1] = v11; tri.v[2] = v01;
    tri.t[0] = t0; tri.t[1] = t1; tri.t[2] = t0;
    tri.theta[0] = th0; tri.theta[1] = th1; tri.theta[2] = th1;
  }
  return tri;
}

bool Mesh::locate(const LogPolarPoint& p, std::size_t& row, std::size_t& col) const {
  double tol = 1e-12 * std::max(1.0, t_ceiling());
  if (p.t < t_floor() - tol || p.t > t_ceiling() + tol) return false;
  double t = std::clamp(p.t, t_floor(), t_ceiling());
  auto it = std::upper_bound(t_lines_.begin(), t_lines_.end(), t);
  row = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - t_lines_.begin()) - 1));
  if (row >= n_rows() - 1) row = n_rows() - 2;
  double th = wrap_angle(p.theta);
  auto jt = std::upper_bound(theta_lines_.begin(), theta_lines_.end(), th);
  col = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (jt - theta_lines_.begin()) - 1));
  if (col >= n_cols()) col = n_cols() - 1;
  return true;
}

double Mesh::interpolate(const Eigen::VectorXd& values, const LogPolarPoint& p) const {
  std::size_t row = 0, col = 0;
  if (!locate(p, row, col)) {
    throw std::domain_error("Mesh::interpolate: point outside mesh strip");
  }
  std::size_t cell = row * n_cols() + col;
  double th = wrap_angle(p.theta);
  if (th < theta_lines_[col]) th += kTwoPi;  // seam cell
  for (int half = 0; half < 2; ++half) {
    Tri tri = triangle(2 * cell + static_cast<std::size_t>(half));
    double x1 = tri.t[0], y1 = tri.theta[0];
    double x2 = tri.t[1], y2 = tri.theta[1];
    double x3 = tri.t[2], y3 = tri.theta[2];
    double det = (x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1);
    double l2 = ((p.t - x1) * (y3 - y1) - (x3 - x1) * (th - y1)) / det;
    double l3 = ((x2 - x1) * (th - y1) - (p.t - x1) * (y2 - y1)) / det;
    double l1 = 1.0 - l2 - l3;
    double tol = half == 0 ? -1e-10 : -1e30;  // second half is the fallback
    if (l1 >= tol && l2 >= tol && l3 >= tol) {
      return l1 * values[static_cast<Eigen::Index>(tri.v[0])] +
             l2 * values[static_cast<Eigen::Index>(tri.v[1])] +
             l3 * values[static_cast<Eigen::Index>(tri.v[2])];
    }
  }
  return 0.0;  // unreachable
}

std::vector<std::size_t> Mesh::floor_vertices() const {
  std::vector<std::size_t> v(n_cols());
  for (std::size_t j = 0; j < n_cols(); ++j) v[j] = vertex_id(0, j);
  return v;
}

std::vector<std::size_t> Mesh::ceiling_vertices() const {
  std::vector<std::size_t> v(n_cols());
  for (std::size_t j = 0; j < n_cols(); ++j) v[j] = vertex_id(n_rows() - 1, j);
  return v;
}

std::vector<std::size_t> Mesh::vertices_in(const CompactSetSpec& set, double tol) const {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < n_vertices(); ++v) {
    if (set.contains(vertex(v), tol)) out.push_back(v);
  }
  return out;
}

double Mesh::min_angle_degrees() const {
  double worst = 90.0;
  for (std::size_t i = 0; i + 1 < n_rows(); ++i) {
    double dt = t_lines_[i + 1] - t_lines_[i];
    for (std::size_t j = 0; j < n_cols(); ++j) {
      std::size_t jn = (j + 1) % n_cols();
      double dth = (jn == 0 ? theta_lines_[0] + kTwoPi : theta_lines_[jn]) - theta_lines_[j];
      double a = std::atan2(std::min(dt, dth), std::max(dt, dth)) * 180.0 / kPi;
      worst = std::min(worst, a);
    }
  }
  return worst;
}

namespace {

std::vector<double> dedup_sorted(std::vector<double> v, double tol) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v) {
    if (out.empty() || x - out.back() > tol) out.push_back(x);
  }
  return out;
}

}  // namespace

Mesh build_strip_mesh(const MeshOptions& opt) {
  if (!(opt.t_floor > 0.0) || !(opt.t_ceiling > opt.t_floor)) {
    throw std::invalid_argument("build_strip_mesh: need 0 < t_floor < t_ceiling");
  }
  double dtheta = kTwoPi / static_cast<double>(std::max(8, opt.n_theta));
  // Keep t-spacing within a bounded aspect ratio of the theta spacing so the
  // triangle quality floor holds.
  double h_min = dtheta / 3.4;
  double h_max = 3.4 * dtheta;

  std::vector<double> anchors{opt.t_floor, opt.t_ceiling};
  for (double b : opt.t_breaks) {
    if (b > opt.t_floor + 1e-12 && b < opt.t_ceiling - 1e-12) anchors.push_back(b);
  }
  anchors = dedup_sorted(std::move(anchors), 1e-9);

  auto local_h = [&](double t) {
    double h = opt.dt_coarse;
    if (opt.refine_hi > opt.refine_lo && t >= opt.refine_lo - 0.25 && t <= opt.refine_hi + 0.25) {
      h = opt.dt_fine;
    }
    return std::clamp(h, h_min, h_max);
  };

  std::vector<double> t_lines;
  for (std::size_t k = 0; k + 1 < anchors.size(); ++k) {
    double lo = anchors[k], hi = anchors[k + 1];
    t_lines.push_back(lo);
    double h = local_h(0.5 * (lo + hi));
    int n = static_cast<int>(std::ceil((hi - lo) / h));
    for (int i = 1; i < n; ++i) {
      t_lines.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n));
    }
  }
  t_lines.push_back(anchors.back());
  t_lines = dedup_sorted(std::move(t_lines), 1e-12);

  std::vector<double> theta_lines;
  int n_theta = std::max(8, opt.n_theta);
  for (int j = 0; j < n_theta; ++j) {
    theta_lines.push_back(kTwoPi * static_cast<double>(j) / static_cast<double>(n_theta));
  }
  for (double b : opt.theta_breaks) theta_lines.push_back(wrap_angle(b));
  theta_lines = dedup_sorted(std::move(theta_lines), 1e-9);

  return Mesh(std::move(t_lines), std::move(theta_lines));
}

MeshOptions mesh_options_for(const CompactSetSpec& set, double t_ceiling) {
  MeshOptions opt;
  opt.t_ceiling = t_ceiling;
  if (set.empty()) return opt;
  opt.refine_lo = std::max(opt.t_floor, set.t_min() - 0.3);
  opt.refine_hi = std::min(t_ceiling, set.t_max() + 0.3);
  double dtheta = kTwoPi / static_cast<double>(opt.n_theta);
  for (const auto& p : set.primitives) {
    std::visit(
        [&](const auto& g) {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, RadialSegment>) {
            opt.t_breaks.push_back(g.t_lo);
            opt.t_breaks.push_back(g.t_hi);
            opt.theta_breaks.push_back(g.theta);
          } else if constexpr (std::is_same_v<T, Arc>) {
            opt.t_breaks.push_back(g.t);
            if (!g.full_circle()) {
              for (double e : {g.theta_lo, g.theta_hi}) {
                opt.theta_breaks.push_back(e);
                opt.theta_breaks.push_back(e - dtheta / 3.0);
                opt.theta_breaks.push_back(e + dtheta / 3.0);
              }
            }
          } else if constexpr (std::is_same_v<T, DiskPatch>) {
            opt.t_breaks.push_back(g.center.t - g.radius);
            opt.t_breaks.push_back(g.center.t);
            opt.t_breaks.push_back(g.center.t + g.radius);
            opt.theta_breaks.push_back(g.center.theta);
            opt.theta_breaks.push_back(g.center.theta - g.radius);
            opt.theta_breaks.push_back(g.center.theta + g.radius);
          } else if constexpr (std::is_same_v<T, AnnulusBand>) {
            opt.t_breaks.push_back(g.t_lo);
            opt.t_breaks.push_back(g.t_hi);
            if (!g.full_circle()) {
              opt.theta_breaks.push_back(g.theta_lo);
              opt.theta_breaks.push_back(g.theta_hi);
            }
          }
        },
        p);
  }
  return opt;
}

// ---------------------------------------------------------------------------

DirichletForm assemble(const CoefficientField& field, const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.n_triangles() * 9);
  bool identity = field.is_identity();
  for (std::size_t k = 0; k < mesh.n_triangles(); ++k) {
    Mesh::Tri tri = mesh.triangle(k);
    double x1 = tri.t[0], y1 = tri.theta[0];
    double x2 = tri.t[1], y2 = tri.theta[1];
    double x3 = tri.t[2], y3 = tri.theta[2];
    double det = (x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1);
    double area = 0.5 * std::fabs(det);
    if (!(area > 0.0)) throw std::runtime_error("assemble: degenerate triangle");
    // gradients of the barycentric hat functions
    Eigen::Matrix<double, 2, 3> grad;
    grad << (y2 - y3), (y3 - y1), (y1 - y2), (x3 - x2), (x1 - x3), (x2 - x1);
    grad /= det;
    Eigen::Matrix2d a_tilde = Eigen::Matrix2d::Identity();
    if (!identity) {
      double tc = (x1 + x2 + x3) / 3.0;
      double thc = (y1 + y2 + y3) / 3.0;
      Eigen::Matrix2d a_cart = field.eval(LogPolarPoint(tc, wrap_angle(thc)));
      // conformal pull-back: rotation only, the area factors cancel
      double c = std::cos(thc), s = std::sin(thc);
      Eigen::Matrix2d rot;
      rot << -c, -s, -s, c;
      a_tilde = rot * a_cart * rot;
    }
    Eigen::Matrix3d local = area * grad.transpose() * a_tilde * grad;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        trips.emplace_back(static_cast<int>(tri.v[i]), static_cast<int>(tri.v[j]), local(i, j));
      }
    }
  }
  DirichletForm form;
  form.mesh = &mesh;
  form.matrix.resize(static_cast<Eigen::Index>(mesh.n_vertices()),
                     static_cast<Eigen::Index>(mesh.n_vertices()));
  form.matrix.setFromTriplets(trips.begin(), trips.end());
  return form;
}

ConstrainedSolver::ConstrainedSolver(const DirichletForm& form,
                                     const std::vector<std::size_t>& fixed)
    : form_(&form), fixed_(fixed) {
  std::size_t n = static_cast<std::size_t>(form.matrix.rows());
  to_free_.assign(n, 0);
  for (std::size_t v : fixed_) to_free_[v] = -1;
  free_.reserve(n - fixed_.size());
  for (std::size_t v = 0; v < n; ++v) {
    if (to_free_[v] == 0) {
      to_free_[v] = static_cast<std::ptrdiff_t>(free_.size());
      free_.push_back(v);
    }
  }
  std::vector<std::ptrdiff_t> to_fixed(n, -1);
  for (std::size_t k = 0; k < fixed_.size(); ++k) to_fixed[fixed_[k]] = static_cast<std::ptrdiff_t>(k);

  std::vector<Eigen::Triplet<double>> ff, fk;
  for (int col = 0; col < form.matrix.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(form.matrix, col); it; ++it) {
      std::size_t r = static_cast<std::size_t>(it.row());
      std::size_t c = static_cast<std::size_t>(it.col());
      bool rf = to_fixed[r] < 0, cf = to_fixed[c] < 0;
      if (rf && cf) {
        ff.emplace_back(static_cast<int>(to_free_[r]), static_cast<int>(to_free_[c]), it.value());
      } else if (rf && !cf) {
        fk.emplace_back(static_cast<int>(to_free_[r]), static_cast<int>(to_fixed[c]), it.value());
      }
    }
  }
  a_ff_.resize(static_cast<Eigen::Index>(free_.size()), static_cast<Eigen::Index>(free_.size()));
  a_ff_.setFromTriplets(ff.begin(), ff.end());
  a_fk_.resize(static_cast<Eigen::Index>(free_.size()), static_cast<Eigen::Index>(fixed_.size()));
  a_fk_.setFromTriplets(fk.begin(), fk.end());
  ldlt_.compute(a_ff_);
  if (ldlt_.info() != Eigen::Success) {
    throw std::runtime_error("ConstrainedSolver: factorization failed");
  }
}

Eigen::VectorXd ConstrainedSolver::solve(const Eigen::VectorXd& fixed_values,
                                         const Eigen::VectorXd& rhs_full) const {
  Eigen::VectorXd rhs_f(static_cast<Eigen::Index>(free_.size()));
  for (std::size_t k = 0; k < free_.size(); ++k) {
    rhs_f[static_cast<Eigen::Index>(k)] = rhs_full[static_cast<Eigen::Index>(free_[k])];
  }
  rhs_f -= a_fk_ * fixed_values;
  Eigen::VectorXd u_f = ldlt_.solve(rhs_f);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(form_->matrix.rows());
  for (std::size_t k = 0; k < free_.size(); ++k) {
    out[static_cast<Eigen::Index>(free_[k])] = u_f[static_cast<Eigen::Index>(k)];
  }
  for (std::size_t k = 0; k < fixed_.size(); ++k) {
    out[static_cast<Eigen::Index>(fixed_[k])] = fixed_values[static_cast<Eigen::Index>(k)];
  }
  return out;
}

Eigen::VectorXd ConstrainedSolver::solve_zero_rhs(const Eigen::VectorXd& fixed_values) const {
  return solve(fixed_values, Eigen::VectorXd::Zero(form_->matrix.rows()));
}

Eigen::MatrixXd ConstrainedSolver::solve_many(const Eigen::MatrixXd& rhs_full) const {
  Eigen::MatrixXd rhs_f(static_cast<Eigen::Index>(free_.size()), rhs_full.cols());
  for (std::size_t k = 0; k < free_.size(); ++k) {
    rhs_f.row(static_cast<Eigen::Index>(k)) = rhs_full.row(static_cast<Eigen::Index>(free_[k]));
  }
  Eigen::MatrixXd u_f = ldlt_.solve(rhs_f);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(form_->matrix.rows(), rhs_full.cols());
  for (std::size_t k = 0; k < free_.size(); ++k) {
    out.row(static_cast<Eigen::Index>(free_[k])) = u_f.row(static_cast<Eigen::Index>(k));
  }
  return out;
}

namespace {

Eigen::VectorXd point_load(const Mesh& mesh, const LogPolarPoint& pole) {
  std::size_t row = 0, col = 0;
  if (!mesh.locate(pole, row, col)) {
    throw std::invalid_argument("point_load: pole outside mesh");
  }
  if (row == 0 || row + 2 >= mesh.n_rows()) {
    throw std::invalid_argument("point_load: pole too close to a mesh boundary");
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.n_vertices()));
  std::size_t cell = row * mesh.n_cols() + col;
  double th = wrap_angle(pole.theta);
  if (th < mesh.theta_lines()[col]) th += kTwoPi;
  for (int half = 0; half < 2; ++half) {
    Mesh::Tri tri = mesh.triangle(2 * cell + static_cast<std::size_t>(half));
    double x1 = tri.t[0], y1 = tri.theta[0];
    double x2 = tri.t[1], y2 = tri.theta[1];
    double x3 = tri.t[2], y3 = tri.theta[2];
    double det = (x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1);
    double l2 = ((pole.t - x1) * (y3 - y1) - (x3 - x1) * (th - y1)) / det;
    double l3 = ((x2 - x1) * (th - y1) - (pole.t - x1) * (y2 - y1)) / det;
    double l1 = 1.0 - l2 - l3;
    bool inside = l1 >= -1e-10 && l2 >= -1e-10 && l3 >= -1e-10;
    if (inside || half == 1) {
      rhs[static_cast<Eigen::Index>(tri.v[0])] = std::max(0.0, l1);
      rhs[static_cast<Eigen::Index>(tri.v[1])] = std::max(0.0, l2);
      rhs[static_cast<Eigen::Index>(tri.v[2])] = std::max(0.0, l3);
      rhs /= rhs.sum();
      break;
    }
  }
  return rhs;
}

}  // namespace

Eigen::VectorXd discrete_green(const CoefficientField& field, const Mesh& mesh,
                               const LogPolarPoint& pole) {
  DirichletForm form = assemble(field, mesh);
  ConstrainedSolver solver(form, mesh.floor_vertices());
  Eigen::VectorXd rhs = point_load(mesh, pole);
  Eigen::VectorXd zeros = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.n_cols()));
  return kTwoPi * solver.solve(zeros, rhs);
}

// ---------------------------------------------------------------------------

DiscreteGreenKernel::DiscreteGreenKernel(CoefficientField field, MeshOptions opt)
    : field_(std::move(field)), opt_(opt), mesh_(build_strip_mesh(opt)), form_(assemble(field_, mesh_)) {
  form_.mesh = &mesh_;
  solver_ = std::make_unique<ConstrainedSolver>(form_, mesh_.floor_vertices());
  // h with exhaustion data t_ceiling on the truncation circle
  std::vector<std::size_t> fixed = mesh_.floor_vertices();
  auto top = mesh_.ceiling_vertices();
  fixed.insert(fixed.end(), top.begin(), top.end());
  ConstrainedSolver h_solver(form_, fixed);
  Eigen::VectorXd vals(static_cast<Eigen::Index>(fixed.size()));
  for (std::size_t k = 0; k < fixed.size(); ++k) {
    vals[static_cast<Eigen::Index>(k)] = (k < mesh_.n_cols()) ? 0.0 : mesh_.t_ceiling();
  }
  h_values_ = h_solver.solve_zero_rhs(vals);
}

double DiscreteGreenKernel::h(const LogPolarPoint& p) const {
  return mesh_.interpolate(h_values_, p);
}

Eigen::VectorXd DiscreteGreenKernel::pole_solution(const LogPolarPoint& pole) const {
  std::uint64_t key = (static_cast<std::uint64_t>(pole.t * 1048576.0) << 22) ^
                      static_cast<std::uint64_t>(pole.theta * 1048576.0);
  for (const auto& [k, sol] : cache_) {
    if (k == key) return sol;
  }
  Eigen::VectorXd rhs = point_load(mesh_, pole);
  Eigen::VectorXd zeros = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh_.n_cols()));
  Eigen::VectorXd sol = kTwoPi * solver_->solve(zeros, rhs);
  if (cache_.size() >= 64) cache_.erase(cache_.begin());
  cache_.emplace_back(key, sol);
  return sol;
}

double DiscreteGreenKernel::green(const LogPolarPoint& xi, const LogPolarPoint& eta) const {
  return mesh_.interpolate(pole_solution(eta), xi);
}

Eigen::MatrixXd DiscreteGreenKernel::green_matrix(const Discretization& nodes) const {
  const std::size_t n = nodes.size();
  Eigen::MatrixXd g(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const std::size_t chunk = 64;
  for (std::size_t j0 = 0; j0 < n; j0 += chunk) {
    std::size_t jn = std::min(n, j0 + chunk);
    Eigen::MatrixXd rhs(static_cast<Eigen::Index>(mesh_.n_vertices()),
                        static_cast<Eigen::Index>(jn - j0));
    for (std::size_t j = j0; j < jn; ++j) {
      rhs.col(static_cast<Eigen::Index>(j - j0)) = point_load(mesh_, nodes.nodes[j]);
    }
    Eigen::MatrixXd sols = kTwoPi * solver_->solve_many(rhs);
    for (std::size_t j = j0; j < jn; ++j) {
      Eigen::VectorXd col = sols.col(static_cast<Eigen::Index>(j - j0));
      for (std::size_t i = 0; i < n; ++i) {
        g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            mesh_.interpolate(col, nodes.nodes[i]);
      }
    }
  }
  // the raw table is symmetric only up to discretization error; symmetrize
  g = 0.5 * (g + g.transpose()).eval();
  return g;
}

}  // namespace logcap
