#pragma once

#include "kochfem/fem.hpp"

#include <functional>
#include <span>
#include <string>

namespace kochfem {

using GradientField = Eigen::Matrix<double, Eigen::Dynamic, 2>;

/// Constant gradient of the P1 interpolant of `u` on triangle t.
Point2 element_gradient(const TriMesh& mesh, const VectorX& u, std::size_t t);
Point2 element_gradient(const FemSolution& sol, std::size_t t);

/// Rows are per-triangle gradients.
GradientField element_gradients(const TriMesh& mesh, const VectorX& u);

/// Per-triangle in-plane induction (B1, B2) = (du/dx2, -du/dx1); B3 is zero.
GradientField b_field(const FemSolution& sol);

struct LinfB {
  double value = 0.0;
  int triangle = -1;
};
LinfB linf_b(const FemSolution& sol);

double l2_norm(const TriMesh& mesh, const VectorX& u);
double h1_seminorm(const TriMesh& mesh, const VectorX& u);

/// Interpolates nodal data from chain.front() to chain.back(); each mesh in
/// the chain must carry parent links into its predecessor.
VectorX prolong(const VectorX& coarse, std::span<const MeshPtr> chain);
VectorX prolong_one(const TriMesh& coarse, const VectorX& u, const TriMesh& fine);

struct ErrorNorms {
  double h1_semi = 0.0;
  double l2 = 0.0;
};

/// Norms of prolong(coarse) - reference on the reference mesh. `chain` runs
/// from coarse.mesh to reference.mesh.
ErrorNorms h1_l2_error(const FemSolution& coarse, const FemSolution& reference, std::span<const MeshPtr> chain);

/// Errors against a closed-form solution, by degree-5 quadrature per triangle.
ErrorNorms error_vs_exact(const TriMesh& mesh, const VectorX& u, const std::function<double(const Point2&)>& exact,
                          const std::function<Point2(const Point2&)>& exact_gradient);

struct ConvergencePoint {
  double h = 0.0;
  double err_h1 = 0.0;
  double err_l2 = 0.0;
};

struct ConvergenceRecord {
  std::vector<ConvergencePoint> points;
};

struct ObservedOrders {
  double h1 = 0.0;
  double l2 = 0.0;
};

/// Least-squares slope of log(y) against log(x).
double log_log_slope(std::span<const double> x, std::span<const double> y);
ObservedOrders observed_order(const ConvergenceRecord& rec);

/// Triangle lookup on a mesh through a uniform bucket grid.
class PointLocator {
 public:
  explicit PointLocator(MeshPtr mesh);
  /// Containing triangle and barycentric coordinates; triangle -1 if none.
  std::pair<int, Eigen::Vector3d> locate(const Point2& x) const;
  double evaluate(const VectorX& u, const Point2& x) const;

 private:
  bool barycentric(std::size_t t, const Point2& x, Eigen::Vector3d& lambda) const;

  MeshPtr mesh_;
  Point2 origin_ = Point2::Zero();
  double cell_ = 1.0;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<std::vector<int>> buckets_;
};

/// || u_a - u_b ||_{L2(domain of a)} sampled at the quadrature points of a's
/// mesh. Throws if a point of a's mesh is not covered by b's mesh.
double l2_difference(const FemSolution& a, const FemSolution& b);

/// Consecutive-level differences || u_n - u_{n+1} ||_{L2(Omega_n)} for the
/// snowflake levels given, all solved with the same grading parameters.
std::vector<double> mosco_proxy(std::span<const int> levels, const GradingParams& grading,
                                const CgOptions& options = {});

struct FieldReport {
  std::string domain;
  int level = 0;
  double h = 0.0;
  std::size_t num_vertices = 0;
  std::size_t num_triangles = 0;
  GradientField b;
  double linf_b = 0.0;
  int linf_triangle = -1;
  double l2_u = 0.0;
  double h1_semi_u = 0.0;
  double boundary_length = 0.0;
  long cg_iterations = 0;
  double cg_residual = 0.0;
  MeshStats stats;
};

FieldReport make_report(const ProblemResult& result, const std::string& domain, int level, double h);

}  // namespace kochfem
