#pragma once

#include "kochfem/mesh.hpp"

#include <Eigen/SparseCore>

#include <functional>
#include <span>
#include <string>

namespace kochfem {

using CsrMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

/// P1 stiffness on one triangle from the cotangent formula:
/// K_ij = -cot(theta_k) / 2 for i != j, where theta_k is the angle opposite edge ij.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 3, 3> local_stiffness(const Eigen::MatrixBase<Derived>& corners) {
  using Scalar = typename Derived::Scalar;
  const Scalar twice_area = orient2(corners.col(0), corners.col(1), corners.col(2));
  if (!(twice_area > Scalar(2e-16))) throw SolverError("local_stiffness: degenerate triangle");
  Eigen::Matrix<Scalar, 3, 3> k = Eigen::Matrix<Scalar, 3, 3>::Zero();
  for (int v = 0; v < 3; ++v) {
    const int i = (v + 1) % 3;
    const int j = (v + 2) % 3;
    const auto u = (corners.col(i) - corners.col(v)).eval();
    const auto w = (corners.col(j) - corners.col(v)).eval();
    const Scalar cot = u.dot(w) / twice_area;
    k(i, j) = k(j, i) = -cot / Scalar(2);
  }
  for (int i = 0; i < 3; ++i) k(i, i) = -(k.row(i).sum());
  return k;
}

/// Right-hand side J(x).
struct SourceField {
  std::function<double(const Point2&)> evaluate;
  double amplitude = 0.0;
  double width = 0.0;  // exponent coefficient: J = A exp(-width |x - c|^2)
  Point2 center = Point2::Zero();
  std::string description;

  double operator()(const Point2& x) const { return evaluate(x); }

  static SourceField gaussian(double amplitude, double width, const Point2& center);
  /// Default source of the magnetostatic experiments: 1e5 exp(-5 |x - c|^2).
  static SourceField magnet(const Point2& center);
  static SourceField constant(double value);
  static SourceField custom(std::function<double(const Point2&)> f, std::string description);
};

/// Symmetric 7-point rule exact for degree 5 (barycentric points, weights summing to 1).
struct TriangleRule {
  std::array<Eigen::Vector3d, 7> barycentric;
  std::array<double, 7> weights;
};
const TriangleRule& degree5_rule();

/// (J, phi_i)_T for the three hat functions of the triangle.
Eigen::Vector3d local_load(const Eigen::Matrix<double, 2, 3>& corners, const SourceField& source);

/// Dirichlet-eliminated system on the interior vertices.
struct SparseSystem {
  CsrMatrix matrix;
  VectorX rhs;
  std::vector<int> dof_to_vertex;
  std::vector<int> vertex_to_dof;  // -1 on boundary vertices

  Eigen::Index dim() const { return matrix.rows(); }
  std::span<const int> row_offsets() const { return {matrix.outerIndexPtr(), static_cast<std::size_t>(dim() + 1)}; }
  std::span<const int> column_indices() const { return {matrix.innerIndexPtr(), static_cast<std::size_t>(matrix.nonZeros())}; }
  std::span<const double> values() const { return {matrix.valuePtr(), static_cast<std::size_t>(matrix.nonZeros())}; }
};

SparseSystem assemble(const TriMesh& mesh, const SourceField& source, double mu = 1.0);

/// y = A x, rows split across the configured worker threads.
void csr_multiply(const CsrMatrix& a, const VectorX& x, VectorX& y);

struct CgOptions {
  double tolerance = 1e-10;
  long max_iterations = 0;  // 0: max(50 sqrt(dim), 10000)
};

struct CgResult {
  VectorX x;
  long iterations = 0;
  double relative_residual = 0.0;
  std::vector<double> residual_history;
};

/// Raised when CG stops without meeting the tolerance.
struct CgFailure : SolverError {
  CgFailure(const std::string& what, std::vector<double> history)
      : SolverError(what), residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

/// Jacobi-preconditioned conjugate gradients.
CgResult cg_solve(const CsrMatrix& a, const VectorX& b, const CgOptions& options = {});

struct FemSolution {
  MeshPtr mesh;
  VectorX u;  // nodal values, zero on the boundary
  long iterations = 0;
  double relative_residual = 0.0;
  double mu = 1.0;
  double energy = 0.0;  // a(u_h, u_h) = (J, u_h)
};

FemSolution solve_on_mesh(MeshPtr mesh, const SourceField& source, double mu = 1.0,
                          const CgOptions& options = {});

struct ProblemResult {
  PrefractalBoundary boundary;
  MeshHierarchy hierarchy;  // base mesh, then the graded mesh
  FemSolution solution;
};

/// geometry -> base mesh -> graded refinement -> assembly -> CG.
ProblemResult solve_problem(const DomainSpec& spec, const SourceField& source, const GradingParams& grading,
                            double mu = 1.0, const CgOptions& options = {});

}  // namespace kochfem
