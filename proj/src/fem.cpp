#include "kochfem/fem.hpp"

#include <cmath>
#include <sstream>

namespace kochfem {

SourceField SourceField::gaussian(double amplitude, double width, const Point2& center) {
  SourceField s;
  s.amplitude = amplitude;
  s.width = width;
  s.center = center;
  s.evaluate = [amplitude, width, center](const Point2& x) {
    return amplitude * std::exp(-width * (x - center).squaredNorm());
  };
  std::ostringstream os;
  os << amplitude << "*exp(-" << width << "|x-c|^2)";
  s.description = os.str();
  return s;
}

SourceField SourceField::magnet(const Point2& center) { return gaussian(1e5, 5.0, center); }

SourceField SourceField::constant(double value) {
  SourceField s;
  s.amplitude = value;
  s.evaluate = [value](const Point2&) { return value; };
  s.description = "constant";
  return s;
}

SourceField SourceField::custom(std::function<double(const Point2&)> f, std::string description) {
  SourceField s;
  s.evaluate = std::move(f);
  s.description = std::move(description);
  return s;
}

const TriangleRule& degree5_rule() {
  static const TriangleRule rule = [] {
    const double s15 = std::sqrt(15.0);
    const double a1 = (6.0 - s15) / 21.0;
    const double b1 = (9.0 + 2.0 * s15) / 21.0;
    const double a2 = (6.0 + s15) / 21.0;
    const double b2 = (9.0 - 2.0 * s15) / 21.0;
    const double w1 = (155.0 - s15) / 1200.0;
    const double w2 = (155.0 + s15) / 1200.0;
    TriangleRule r;
    r.barycentric = {Eigen::Vector3d(1.0 / 3, 1.0 / 3, 1.0 / 3), Eigen::Vector3d(b1, a1, a1),
                     Eigen::Vector3d(a1, b1, a1),                Eigen::Vector3d(a1, a1, b1),
                     Eigen::Vector3d(b2, a2, a2),                Eigen::Vector3d(a2, b2, a2),
                     Eigen::Vector3d(a2, a2, b2)};
    r.weights = {9.0 / 40.0, w1, w1, w1, w2, w2, w2};
    return r;
  }();
  return rule;
}

Eigen::Vector3d local_load(const Eigen::Matrix<double, 2, 3>& corners, const SourceField& source) {
  const double area = triangle_area(corners);
  const auto& rule = degree5_rule();
  Eigen::Vector3d f = Eigen::Vector3d::Zero();
  for (std::size_t q = 0; q < rule.weights.size(); ++q) {
    const Point2 x = corners * rule.barycentric[q];
    f += (rule.weights[q] * source(x)) * rule.barycentric[q];
  }
  return area * f;
}

SparseSystem assemble(const TriMesh& mesh, const SourceField& source, double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw SolverError("assemble: mu must be positive");
  SparseSystem sys;
  sys.vertex_to_dof.assign(mesh.num_vertices(), -1);
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    if (mesh.boundary_vertex[v]) continue;
    sys.vertex_to_dof[v] = static_cast<int>(sys.dof_to_vertex.size());
    sys.dof_to_vertex.push_back(static_cast<int>(v));
  }
  const auto n = static_cast<Eigen::Index>(sys.dof_to_vertex.size());
  if (n == 0) throw SolverError("assemble: mesh has no interior vertices");

  const double inv_mu = 1.0 / mu;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(mesh.num_triangles() * 9);
  sys.rhs = VectorX::Zero(n);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto c = mesh.corners(t);
    const Eigen::Matrix3d k = local_stiffness(c) * inv_mu;
    const Eigen::Vector3d f = local_load(c, source);
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) {
      const int row = sys.vertex_to_dof[tri[i]];
      if (row < 0) continue;
      sys.rhs[row] += f[i];
      for (int j = 0; j < 3; ++j) {
        const int col = sys.vertex_to_dof[tri[j]];
        if (col >= 0) triplets.emplace_back(row, col, k(i, j));
      }
    }
  }
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  sys.matrix.prune([](Eigen::Index, Eigen::Index, double v) { return v != 0.0; });
  sys.matrix.makeCompressed();
  return sys;
}

void csr_multiply(const CsrMatrix& a, const VectorX& x, VectorX& y) {
  y.resize(a.rows());
  const int* outer = a.outerIndexPtr();
  const int* inner = a.innerIndexPtr();
  const double* values = a.valuePtr();
  parallel_for(static_cast<std::size_t>(a.rows()), [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      double sum = 0.0;
      for (int p = outer[r]; p < outer[r + 1]; ++p) sum += values[p] * x[inner[p]];
      y[static_cast<Eigen::Index>(r)] = sum;
    }
  });
}

CgResult cg_solve(const CsrMatrix& a, const VectorX& b, const CgOptions& options) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.size() != n) throw SolverError("cg_solve: dimension mismatch");
  long max_iter = options.max_iterations;
  if (max_iter <= 0) max_iter = std::max(10000L, static_cast<long>(50.0 * std::sqrt(static_cast<double>(n))));

  const VectorX diag = a.diagonal();
  if ((diag.array() <= 0.0).any()) throw CgFailure("cg_solve: nonpositive diagonal entry", {});
  const VectorX inv_diag = diag.cwiseInverse();

  CgResult out;
  out.x = VectorX::Zero(n);
  const double b_norm = b.norm();
  if (b_norm == 0.0) return out;

  VectorX r = b;
  VectorX z = inv_diag.cwiseProduct(r);
  VectorX p = z;
  VectorX ap(n);
  double rz = r.dot(z);
  out.residual_history.push_back(1.0);

  for (long it = 1; it <= max_iter; ++it) {
    csr_multiply(a, p, ap);
    const double curvature = p.dot(ap);
    if (!(curvature > 0.0)) {
      throw CgFailure("cg_solve: nonpositive curvature at iteration " + std::to_string(it) +
                          "; matrix is not positive definite",
                      out.residual_history);
    }
    const double alpha = rz / curvature;
    out.x += alpha * p;
    r -= alpha * ap;
    const double rel = r.norm() / b_norm;
    out.residual_history.push_back(rel);
    out.iterations = it;
    out.relative_residual = rel;
    if (rel <= options.tolerance) return out;
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }

  std::ostringstream msg;
  msg << "cg_solve: no convergence after " << max_iter << " iterations (relative residual "
      << out.relative_residual << ", tolerance " << options.tolerance << ")";
  throw CgFailure(msg.str(), std::move(out.residual_history));
}

FemSolution solve_on_mesh(MeshPtr mesh, const SourceField& source, double mu, const CgOptions& options) {
  const SparseSystem sys = assemble(*mesh, source, mu);
  const CgResult cg = cg_solve(sys.matrix, sys.rhs, options);
  FemSolution sol;
  sol.u = VectorX::Zero(static_cast<Eigen::Index>(mesh->num_vertices()));
  for (Eigen::Index d = 0; d < sys.dim(); ++d) sol.u[sys.dof_to_vertex[d]] = cg.x[d];
  sol.mesh = std::move(mesh);
  sol.iterations = cg.iterations;
  sol.relative_residual = cg.relative_residual;
  sol.mu = mu;
  sol.energy = sys.rhs.dot(cg.x);
  return sol;
}

ProblemResult solve_problem(const DomainSpec& spec, const SourceField& source, const GradingParams& grading,
                            double mu, const CgOptions& options) {
  grading.validate();
  ProblemResult result;
  result.boundary = build_boundary(spec);
  auto base = std::make_shared<const TriMesh>(base_mesh(spec, result.boundary));
  auto graded = std::make_shared<const TriMesh>(refine_to_size(*base, result.boundary, grading));
  result.hierarchy = {base, graded};
  result.solution = solve_on_mesh(graded, source, mu, options);
  return result;
}

}  // namespace kochfem
