#include "kochfem/field.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace kochfem {

namespace {

// Exact integral of the square of a linear function with nodal values w.
double p1_square_integral(double area, const Eigen::Vector3d& w) {
  return area / 12.0 * (w.squaredNorm() + w.sum() * w.sum());
}

}  // namespace

Point2 element_gradient(const TriMesh& mesh, const VectorX& u, std::size_t t) {
  const auto c = mesh.corners(t);
  const auto& tri = mesh.triangles[t];
  Eigen::Matrix2d jac;
  jac.col(0) = c.col(1) - c.col(0);
  jac.col(1) = c.col(2) - c.col(0);
  const Eigen::Vector2d du(u[tri[1]] - u[tri[0]], u[tri[2]] - u[tri[0]]);
  return jac.transpose().inverse() * du;
}

Point2 element_gradient(const FemSolution& sol, std::size_t t) { return element_gradient(*sol.mesh, sol.u, t); }

GradientField element_gradients(const TriMesh& mesh, const VectorX& u) {
  GradientField g(static_cast<Eigen::Index>(mesh.num_triangles()), 2);
  parallel_for(mesh.num_triangles(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) g.row(static_cast<Eigen::Index>(t)) = element_gradient(mesh, u, t);
  });
  return g;
}

GradientField b_field(const FemSolution& sol) {
  const GradientField grad = element_gradients(*sol.mesh, sol.u);
  GradientField b(grad.rows(), 2);
  b.col(0) = grad.col(1);
  b.col(1) = -grad.col(0);
  return b;
}

LinfB linf_b(const FemSolution& sol) {
  const GradientField b = b_field(sol);
  LinfB out;
  if (b.rows() == 0) return out;
  Eigen::Index arg = 0;
  out.value = b.rowwise().norm().maxCoeff(&arg);
  out.triangle = static_cast<int>(arg);
  return out;
}

double l2_norm(const TriMesh& mesh, const VectorX& u) {
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    sum += p1_square_integral(triangle_area(mesh.corners(t)), Eigen::Vector3d(u[tri[0]], u[tri[1]], u[tri[2]]));
  }
  return std::sqrt(sum);
}

double h1_seminorm(const TriMesh& mesh, const VectorX& u) {
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    sum += triangle_area(mesh.corners(t)) * element_gradient(mesh, u, t).squaredNorm();
  return std::sqrt(sum);
}

VectorX prolong_one(const TriMesh& coarse, const VectorX& u, const TriMesh& fine) {
  if (u.size() != static_cast<Eigen::Index>(coarse.num_vertices()))
    throw MeshError("prolong: nodal vector does not match the coarse mesh");
  if (fine.parent_triangle.size() != fine.num_triangles())
    throw MeshError("prolong: fine mesh carries no parent links");
  VectorX out(static_cast<Eigen::Index>(fine.num_vertices()));
  std::vector<std::uint8_t> done(fine.num_vertices(), 0);
  for (std::size_t t = 0; t < fine.num_triangles(); ++t) {
    const int parent = fine.parent_triangle[t];
    if (parent < 0 || static_cast<std::size_t>(parent) >= coarse.num_triangles())
      throw MeshError("prolong: broken parent chain");
    const auto& ptri = coarse.triangles[static_cast<std::size_t>(parent)];
    const Point2& a = coarse.vertices[ptri[0]];
    const Point2& b = coarse.vertices[ptri[1]];
    const Point2& c = coarse.vertices[ptri[2]];
    const double twice_area = orient2(a, b, c);
    const Eigen::Vector3d values(u[ptri[0]], u[ptri[1]], u[ptri[2]]);
    for (int v : fine.triangles[t]) {
      if (done[v]) continue;
      if (v < static_cast<int>(coarse.num_vertices())) {
        out[v] = u[v];  // coarse vertices keep their index and value
      } else {
        const Point2& x = fine.vertices[v];
        const Eigen::Vector3d lambda =
            Eigen::Vector3d(orient2(x, b, c), orient2(a, x, c), orient2(a, b, x)) / twice_area;
        if (lambda.minCoeff() < -1e-8) throw MeshError("prolong: fine vertex outside its parent triangle");
        out[v] = lambda.dot(values);
      }
      done[v] = 1;
    }
  }
  return out;
}

VectorX prolong(const VectorX& coarse, std::span<const MeshPtr> chain) {
  if (chain.empty()) throw MeshError("prolong: empty mesh chain");
  VectorX u = coarse;
  for (std::size_t k = 1; k < chain.size(); ++k) u = prolong_one(*chain[k - 1], u, *chain[k]);
  return u;
}

ErrorNorms h1_l2_error(const FemSolution& coarse, const FemSolution& reference, std::span<const MeshPtr> chain) {
  if (chain.empty() || chain.front() != coarse.mesh || chain.back() != reference.mesh)
    throw MeshError("h1_l2_error: mesh chain does not connect the two solutions");
  const VectorX diff = prolong(coarse.u, chain) - reference.u;
  return {h1_seminorm(*reference.mesh, diff), l2_norm(*reference.mesh, diff)};
}

ErrorNorms error_vs_exact(const TriMesh& mesh, const VectorX& u, const std::function<double(const Point2&)>& exact,
                          const std::function<Point2(const Point2&)>& exact_gradient) {
  const auto& rule = degree5_rule();
  double l2 = 0.0;
  double h1 = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto c = mesh.corners(t);
    const double area = triangle_area(c);
    const auto& tri = mesh.triangles[t];
    const Eigen::Vector3d values(u[tri[0]], u[tri[1]], u[tri[2]]);
    const Point2 grad = element_gradient(mesh, u, t);
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const Point2 x = c * rule.barycentric[q];
      const double e = rule.barycentric[q].dot(values) - exact(x);
      l2 += area * rule.weights[q] * e * e;
      h1 += area * rule.weights[q] * (grad - exact_gradient(x)).squaredNorm();
    }
  }
  return {std::sqrt(h1), std::sqrt(l2)};
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3) throw Error("observed order needs at least 3 data points");
  const std::size_t n = x.size();
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error("observed order needs positive data");
    design(i, 0) = std::log(x[i]);
    design(i, 1) = 1.0;
    rhs[i] = std::log(y[i]);
  }
  return design.colPivHouseholderQr().solve(rhs)[0];
}

ObservedOrders observed_order(const ConvergenceRecord& rec) {
  std::vector<double> h;
  std::vector<double> e1;
  std::vector<double> e0;
  for (const auto& p : rec.points) {
    h.push_back(p.h);
    e1.push_back(p.err_h1);
    e0.push_back(p.err_l2);
  }
  return {log_log_slope(h, e1), log_log_slope(h, e0)};
}

PointLocator::PointLocator(MeshPtr mesh) : mesh_(std::move(mesh)) {
  const TriMesh& m = *mesh_;
  if (m.num_triangles() == 0) throw MeshError("PointLocator: empty mesh");
  Point2 lo = m.vertices.front();
  Point2 hi = m.vertices.front();
  for (const auto& v : m.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  std::vector<double> diam(m.num_triangles());
  for (std::size_t t = 0; t < m.num_triangles(); ++t) diam[t] = triangle_diameter(m.corners(t));
  auto mid = diam.begin() + static_cast<std::ptrdiff_t>(diam.size() / 2);
  std::nth_element(diam.begin(), mid, diam.end());
  const double extent = std::max(hi.x() - lo.x(), hi.y() - lo.y());
  // Median diameter, but never more than ~4096^2 cells.
  cell_ = std::max(*mid, extent / 4096.0);
  origin_ = lo;
  nx_ = static_cast<int>((hi.x() - lo.x()) / cell_) + 1;
  ny_ = static_cast<int>((hi.y() - lo.y()) / cell_) + 1;
  buckets_.resize(static_cast<std::size_t>(nx_) * ny_);
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto c = m.corners(t);
    const Point2 cmin = c.rowwise().minCoeff();
    const Point2 cmax = c.rowwise().maxCoeff();
    const int x0 = std::clamp(static_cast<int>((cmin.x() - lo.x()) / cell_), 0, nx_ - 1);
    const int x1 = std::clamp(static_cast<int>((cmax.x() - lo.x()) / cell_), 0, nx_ - 1);
    const int y0 = std::clamp(static_cast<int>((cmin.y() - lo.y()) / cell_), 0, ny_ - 1);
    const int y1 = std::clamp(static_cast<int>((cmax.y() - lo.y()) / cell_), 0, ny_ - 1);
    for (int cy = y0; cy <= y1; ++cy)
      for (int cx = x0; cx <= x1; ++cx) buckets_[cy * nx_ + cx].push_back(static_cast<int>(t));
  }
}

bool PointLocator::barycentric(std::size_t t, const Point2& x, Eigen::Vector3d& lambda) const {
  const auto c = mesh_->corners(t);
  const double twice = orient2(c.col(0), c.col(1), c.col(2));
  lambda[0] = orient2(x, c.col(1), c.col(2)) / twice;
  lambda[1] = orient2(c.col(0), x, c.col(2)) / twice;
  lambda[2] = 1.0 - lambda[0] - lambda[1];
  return lambda.minCoeff() >= -1e-12;
}

std::pair<int, Eigen::Vector3d> PointLocator::locate(const Point2& x) const {
  Eigen::Vector3d lambda;
  const int cx = static_cast<int>(std::floor((x.x() - origin_.x()) / cell_));
  const int cy = static_cast<int>(std::floor((x.y() - origin_.y()) / cell_));
  if (cx >= 0 && cx < nx_ && cy >= 0 && cy < ny_) {
    for (int t : buckets_[cy * nx_ + cx])
      if (barycentric(static_cast<std::size_t>(t), x, lambda)) return {t, lambda};
  }
  // Fallback: exhaustive scan.
  for (std::size_t t = 0; t < mesh_->num_triangles(); ++t)
    if (barycentric(t, x, lambda)) return {static_cast<int>(t), lambda};
  return {-1, Eigen::Vector3d::Zero()};
}

double PointLocator::evaluate(const VectorX& u, const Point2& x) const {
  const auto [t, lambda] = locate(x);
  if (t < 0) throw MeshError("PointLocator: point lies outside the mesh");
  const auto& tri = mesh_->triangles[static_cast<std::size_t>(t)];
  return lambda[0] * u[tri[0]] + lambda[1] * u[tri[1]] + lambda[2] * u[tri[2]];
}

double l2_difference(const FemSolution& a, const FemSolution& b) {
  // same mesh: the difference is itself P1, no point location needed
  if (a.mesh == b.mesh || (a.mesh->vertices == b.mesh->vertices && a.mesh->triangles == b.mesh->triangles))
    return l2_norm(*a.mesh, a.u - b.u);
  const PointLocator locator(b.mesh);
  const TriMesh& mesh = *a.mesh;
  const auto& rule = degree5_rule();
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto c = mesh.corners(t);
    const auto& tri = mesh.triangles[t];
    const Eigen::Vector3d values(a.u[tri[0]], a.u[tri[1]], a.u[tri[2]]);
    const double area = triangle_area(c);
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const Point2 x = c * rule.barycentric[q];
      const double e = rule.barycentric[q].dot(values) - locator.evaluate(b.u, x);
      sum += area * rule.weights[q] * e * e;
    }
  }
  return std::sqrt(sum);
}

std::vector<double> mosco_proxy(std::span<const int> levels, const GradingParams& grading, const CgOptions& options) {
  if (levels.size() < 3) throw Error("mosco_proxy: needs at least 3 levels");
  for (std::size_t k = 1; k < levels.size(); ++k)
    if (levels[k] <= levels[k - 1]) throw Error("mosco_proxy: levels must increase");
  const SourceField source = SourceField::magnet(DomainSpec::snowflake_center());
  std::vector<double> out;
  FemSolution previous = solve_problem(DomainSpec::snowflake(levels[0]), source, grading, 1.0, options).solution;
  for (std::size_t k = 1; k < levels.size(); ++k) {
    FemSolution current = solve_problem(DomainSpec::snowflake(levels[k]), source, grading, 1.0, options).solution;
    out.push_back(l2_difference(previous, current));
    previous = std::move(current);
  }
  return out;
}

FieldReport make_report(const ProblemResult& result, const std::string& domain, int level, double h) {
  const FemSolution& sol = result.solution;
  FieldReport r;
  r.domain = domain;
  r.level = level;
  r.h = h;
  r.num_vertices = sol.mesh->num_vertices();
  r.num_triangles = sol.mesh->num_triangles();
  r.b = b_field(sol);
  Eigen::Index arg = 0;
  r.linf_b = r.b.rows() ? r.b.rowwise().norm().maxCoeff(&arg) : 0.0;
  r.linf_triangle = static_cast<int>(arg);
  r.l2_u = l2_norm(*sol.mesh, sol.u);
  r.h1_semi_u = h1_seminorm(*sol.mesh, sol.u);
  r.boundary_length = boundary_length(result.boundary);
  r.cg_iterations = sol.iterations;
  r.cg_residual = sol.relative_residual;
  r.stats = mesh_stats(*sol.mesh);
  return r;
}

}  // namespace kochfem
