#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "logcap/geometry.hpp"
#include "logcap/kernels.hpp"

namespace logcap {

// Measurable symmetric coefficient field a_ij, given in the cartesian frame
// as a function of position. Uniform ellipticity: the eigenvalues of every
// sampled matrix must lie in [1/lambda, lambda].
struct CoefficientField {
  std::function<Eigen::Matrix2d(const LogPolarPoint&)> eval;
  double lambda = 1.0;
  std::string description = "identity";

  bool is_identity() const { return description == "identity"; }
};

CoefficientField identity_field();
CoefficientField diag_field(double d1, double d2);
CoefficientField rotated_diag_field(double d1, double d2, double alpha);
// Cell-wise alternation between two isotropic conductivities on a (t, theta)
// checkerboard with the given cell size.
CoefficientField checkerboard_field(double low, double high, double cell);

struct EllipticityReport {
  bool pass = false;
  double measured_lambda = 0.0;
  std::string detail;
};

// Random point/direction sweep; throws std::runtime_error if a sampled
// matrix is not symmetric. Fails when the sweep exceeds the declared lambda
// beyond 1e-9.
EllipticityReport validate_ellipticity(const CoefficientField& field, int n_samples,
                                       std::uint64_t seed = 1u);

// ---------------------------------------------------------------------------
// Structured conforming triangulation of the cylinder strip
// [t_floor, t_ceiling] x [0, 2*pi), theta-periodic. Each grid quad is split
// into two triangles.
struct MeshOptions {
  double t_floor = 0.001;
  double t_ceiling = 8.0;
  double dt_coarse = 0.2;
  double dt_fine = 0.04;
  int n_theta = 96;
  // spacing dt_fine is used inside [refine_lo, refine_hi]
  double refine_lo = 0.0;
  double refine_hi = 0.0;
  std::vector<double> t_breaks;      // grid lines that must be present
  std::vector<double> theta_breaks;  // ditto, wrapped into [0, 2*pi)
};

class Mesh {
 public:
  Mesh(std::vector<double> t_lines, std::vector<double> theta_lines);

  std::size_t n_rows() const { return t_lines_.size(); }
  std::size_t n_cols() const { return theta_lines_.size(); }
  std::size_t n_vertices() const { return n_rows() * n_cols(); }
  std::size_t n_triangles() const { return 2 * (n_rows() - 1) * n_cols(); }

  std::size_t vertex_id(std::size_t row, std::size_t col) const { return row * n_cols() + col; }
  LogPolarPoint vertex(std::size_t v) const;
  double vertex_t(std::size_t v) const { return t_lines_[v / n_cols()]; }
  double vertex_theta(std::size_t v) const { return theta_lines_[v % n_cols()]; }

  double t_floor() const { return t_lines_.front(); }
  double t_ceiling() const { return t_lines_.back(); }

  // Triangle vertex ids plus local flat coordinates (theta unwrapped across
  // the periodic seam).
  struct Tri {
    std::size_t v[3];
    double t[3];
    double theta[3];
  };
  Tri triangle(std::size_t k) const;

  // Row/col cell containing the point; theta handled periodically.
  bool locate(const LogPolarPoint& p, std::size_t& row, std::size_t& col) const;
  // P1 interpolation of a vertex field.
  double interpolate(const Eigen::VectorXd& values, const LogPolarPoint& p) const;

  std::vector<std::size_t> floor_vertices() const;
  std::vector<std::size_t> ceiling_vertices() const;
  // Vertices lying in the set (tolerance in the flat metric).
  std::vector<std::size_t> vertices_in(const CompactSetSpec& set, double tol = 1e-7) const;

  double min_angle_degrees() const;

  const std::vector<double>& t_lines() const { return t_lines_; }
  const std::vector<double>& theta_lines() const { return theta_lines_; }

 private:
  std::vector<double> t_lines_;
  std::vector<double> theta_lines_;
};

Mesh build_strip_mesh(const MeshOptions& opt);
// Mesh options preconfigured to resolve the primitives of a set.
MeshOptions mesh_options_for(const CompactSetSpec& set, double t_ceiling);

// ---------------------------------------------------------------------------
// Energy form: sparse SPD matrix of the Dirichlet energy in (t, theta)
// coordinates. The conformal change of variables turns the cartesian
// coefficient matrix A into R(theta) A R(theta) with no area factor, so the
// assembly stays uniformly scaled even at extreme depths.
struct DirichletForm {
  Eigen::SparseMatrix<double> matrix;
  const Mesh* mesh = nullptr;

  double energy(const Eigen::VectorXd& u) const { return u.dot(matrix * u); }
};

DirichletForm assemble(const CoefficientField& field, const Mesh& mesh);

// Direct solver for the form with a fixed Dirichlet vertex set. The
// factorization of the free block is reused across right-hand sides.
class ConstrainedSolver {
 public:
  ConstrainedSolver(const DirichletForm& form, const std::vector<std::size_t>& fixed);

  // rhs is over all vertices; fixed_values only over the fixed list order.
  Eigen::VectorXd solve(const Eigen::VectorXd& fixed_values,
                        const Eigen::VectorXd& rhs_full) const;
  Eigen::VectorXd solve_zero_rhs(const Eigen::VectorXd& fixed_values) const;
  // Block backsolve for many zero-boundary right-hand sides (full layout).
  Eigen::MatrixXd solve_many(const Eigen::MatrixXd& rhs_full) const;

  const std::vector<std::size_t>& fixed() const { return fixed_; }
  std::size_t n_free() const { return static_cast<std::size_t>(free_.size()); }

 private:
  const DirichletForm* form_;
  std::vector<std::size_t> fixed_;
  std::vector<std::ptrdiff_t> to_free_;  // -1 for fixed vertices
  std::vector<std::size_t> free_;
  Eigen::SparseMatrix<double> a_ff_;
  Eigen::SparseMatrix<double> a_fk_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

// Green function of the operator on the strip with a regularized point load
// spread over the triangle containing the pole. Zero Dirichlet data on the
// outer circle t = t_floor, natural condition at the truncation circle.
// Scaled so that the identity field reproduces green_disk.
Eigen::VectorXd discrete_green(const CoefficientField& field, const Mesh& mesh,
                               const LogPolarPoint& pole);

// Reusable discrete Green table: kernel-kind backend for general operators.
// h is realized as the solution with data t_ceiling on the truncation circle
// and 0 on the outer circle, which is exact for the identity field.
class DiscreteGreenKernel {
 public:
  DiscreteGreenKernel(CoefficientField field, MeshOptions opt);

  double green(const LogPolarPoint& xi, const LogPolarPoint& eta) const;
  double h(const LogPolarPoint& p) const;

  // One column per node: pole at node j, sampled at all nodes i.
  Eigen::MatrixXd green_matrix(const Discretization& nodes) const;

  const Mesh& mesh() const { return mesh_; }
  const CoefficientField& field() const { return field_; }
  double mesh_dt_near() const { return opt_.dt_fine; }

 private:
  Eigen::VectorXd pole_solution(const LogPolarPoint& pole) const;

  CoefficientField field_;
  MeshOptions opt_;
  Mesh mesh_;
  DirichletForm form_;
  std::unique_ptr<ConstrainedSolver> solver_;
  Eigen::VectorXd h_values_;
  mutable std::vector<std::pair<std::uint64_t, Eigen::VectorXd>> cache_;
};

}  // namespace logcap
