#include "support.hpp"

#include <doctest.h>

#include <Eigen/Dense>

using namespace kochfem;
using kt::kSqrt3;

namespace {

VectorX nodal(const TriMesh& m, const std::function<double(const Point2&)>& f) {
  VectorX u(static_cast<Eigen::Index>(m.num_vertices()));
  for (std::size_t v = 0; v < m.num_vertices(); ++v) u[static_cast<Eigen::Index>(v)] = f(m.vertices[v]);
  return u;
}

FemSolution as_solution(MeshPtr m, VectorX u) {
  FemSolution s;
  s.mesh = std::move(m);
  s.u = std::move(u);
  return s;
}

double energy(const TriMesh& m, const VectorX& u) { return std::pow(h1_seminorm(m, u), 2); }

}  // namespace

TEST_CASE("element_gradient of linear and constant data") {
  const TriMesh m = uniform_refine(base_lattice_mesh(build_snowflake(1)));
  const VectorX x1 = nodal(m, [](const Point2& x) { return x.x(); });
  const VectorX c = VectorX::Constant(static_cast<Eigen::Index>(m.num_vertices()), 4.2);
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    CHECK((element_gradient(m, x1, t) - Point2(1, 0)).norm() < 1e-12);
    CHECK(element_gradient(m, c, t).norm() < 1e-12);
  }
}

TEST_CASE("element_gradient against central differences of the interpolant") {
  const TriMesh m = uniform_refine(polygon_base_mesh(circle_polygon(0.5, 16, {0, 0})));
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1, 1);
  VectorX data(static_cast<Eigen::Index>(m.num_vertices()));
  for (auto& d : data) d = u(rng);
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto c = m.corners(t);
    Eigen::Matrix3d lift;
    lift.topRows<2>() = c;
    lift.row(2).setOnes();
    const Eigen::Matrix3d inv = lift.inverse();
    const Eigen::Vector3d vals(data[m.triangles[t][0]], data[m.triangles[t][1]], data[m.triangles[t][2]]);
    const auto interp = [&](const Point2& x) { return vals.dot(inv * x.homogeneous()); };
    const Point2 g = c.rowwise().mean();
    const double step = 1e-6 * triangle_diameter(c);
    const Point2 fd((interp(g + Point2(step, 0)) - interp(g - Point2(step, 0))) / (2 * step),
                    (interp(g + Point2(0, step)) - interp(g - Point2(0, step))) / (2 * step));
    const Point2 grad = element_gradient(m, data, t);
    CHECK((grad - fd).norm() <= 1e-5 * std::max(1.0, grad.norm()));
  }
}

TEST_CASE("b_field is the rotated gradient") {
  auto mesh = kt::share(uniform_refine(base_lattice_mesh(build_snowflake(1))));
  const FemSolution sx = as_solution(mesh, nodal(*mesh, [](const Point2& x) { return x.x(); }));
  const FemSolution sy = as_solution(mesh, nodal(*mesh, [](const Point2& x) { return x.y(); }));
  const GradientField bx = b_field(sx);
  const GradientField by = b_field(sy);
  for (Eigen::Index t = 0; t < bx.rows(); ++t) {
    CHECK((bx.row(t) - Eigen::RowVector2d(0, -1)).norm() < 1e-12);
    CHECK((by.row(t) - Eigen::RowVector2d(1, 0)).norm() < 1e-12);
  }
  const auto l = linf_b(sx);
  CHECK(l.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(l.triangle >= 0);
}

TEST_CASE("|B| equals |grad u| on a solved problem") {
  GradingParams g;
  g.h = 1.0 / 12.0;
  const ProblemResult r = solve_problem(DomainSpec::snowflake(1), SourceField::magnet({0.5, kSqrt3 / 6}), g);
  const GradientField b = b_field(r.solution);
  const GradientField grad = element_gradients(*r.solution.mesh, r.solution.u);
  double worst = 0.0;
  for (Eigen::Index t = 0; t < b.rows(); ++t) {
    CHECK(b(t, 0) == grad(t, 1));
    CHECK(b(t, 1) == -grad(t, 0));
    worst = std::max(worst, b.row(t).norm());
  }
  const auto l = linf_b(r.solution);
  CHECK(l.value == worst);
  CHECK(b.row(l.triangle).norm() == l.value);
}

TEST_CASE("linf_b is rotation invariant") {
  // Equilateral triangle meshes rotated by 120 degrees about the centroid map onto themselves.
  GradingParams g;
  g.h = 1.0 / 12.0;
  const Point2 c(0.5, kSqrt3 / 6);
  const ProblemResult r = solve_problem(DomainSpec::snowflake(1), SourceField::magnet(c), g);
  const double theta = 2.0 * std::numbers::pi / 3.0;
  const Eigen::Rotation2Dd rot(theta);
  TriMesh rotated = *r.solution.mesh;
  for (auto& v : rotated.vertices) v = c + rot * (v - c);
  const FemSolution s = solve_on_mesh(kt::share(rotated), SourceField::magnet(c));
  CHECK(linf_b(s).value == doctest::Approx(linf_b(r.solution).value).epsilon(1e-9));
}

TEST_CASE("l2_norm and h1_seminorm of simple fields") {
  const TriMesh m = uniform_refine(polygon_base_mesh(unit_square_boundary()));
  const VectorX one = VectorX::Ones(static_cast<Eigen::Index>(m.num_vertices()));
  CHECK(l2_norm(m, one) == doctest::Approx(1.0).epsilon(1e-14));
  const VectorX x = nodal(m, [](const Point2& p) { return p.x(); });
  CHECK(l2_norm(m, x) == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-14));
  CHECK(h1_seminorm(m, x) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("prolong: exact on the coarse space") {
  const auto b = build_snowflake(2);
  auto m0 = kt::share(base_lattice_mesh(b));
  GradingParams g;
  g.h = 1.0 / 18.0;
  auto m1 = kt::share(refine_to_size(*m0, b, g));
  auto m2 = kt::share(uniform_refine(*m1));
  const std::vector<MeshPtr> chain = {m0, m1, m2};

  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1, 1);
  VectorX coarse(static_cast<Eigen::Index>(m0->num_vertices()));
  for (auto& d : coarse) d = u(rng);
  const VectorX fine = prolong(coarse, chain);
  CHECK(fine.head(coarse.size()) == coarse);
  CHECK(energy(*m2, fine) == doctest::Approx(energy(*m0, coarse)).epsilon(1e-12));
  CHECK(l2_norm(*m2, fine) == doctest::Approx(l2_norm(*m0, coarse)).epsilon(1e-12));

  const auto affine = [](const Point2& x) { return 1.5 - 2.0 * x.x() + 0.25 * x.y(); };
  const VectorX lin = prolong(nodal(*m0, affine), chain);
  CHECK((lin - nodal(*m2, affine)).cwiseAbs().maxCoeff() < 1e-13);

  const std::vector<MeshPtr> broken = {m0, m2};
  CHECK_THROWS(prolong(VectorX::Ones(static_cast<Eigen::Index>(m0->num_vertices())), broken));
}

TEST_CASE("h1_l2_error: zero on itself, monotone toward the reference") {
  const auto b = build_snowflake(1);
  const auto src = SourceField::magnet(b.center);
  std::vector<MeshPtr> chain = {kt::share(base_lattice_mesh(b))};
  for (int k = 0; k < 4; ++k) chain.push_back(kt::share(uniform_refine(*chain.back())));
  const FemSolution ref = solve_on_mesh(chain.back(), src);
  const std::span<const MeshPtr> last(chain.end() - 1, chain.end());
  const ErrorNorms zero = h1_l2_error(ref, ref, last);
  CHECK(zero.h1_semi == 0.0);
  CHECK(zero.l2 == 0.0);
  double prev_h1 = 1e300, prev_l2 = 1e300;
  for (std::size_t k = 1; k + 1 < chain.size(); ++k) {
    const FemSolution s = solve_on_mesh(chain[k], src);
    const ErrorNorms e = h1_l2_error(s, ref, std::span<const MeshPtr>(chain.begin() + k, chain.end()));
    CHECK(e.h1_semi < prev_h1);
    CHECK(e.l2 < prev_l2);
    prev_h1 = e.h1_semi;
    prev_l2 = e.l2;
  }
  const FemSolution s0 = solve_on_mesh(chain[1], src);
  CHECK_THROWS(h1_l2_error(s0, ref, std::span<const MeshPtr>(chain.begin(), chain.end())));
}

TEST_CASE("reference-mesh error matches the analytic error on the square") {
  constexpr double pi = std::numbers::pi;
  const auto exact = [](const Point2& x) { return std::sin(pi * x.x()) * std::sin(pi * x.y()); };
  const auto grad = [](const Point2& x) {
    return Point2(pi * std::cos(pi * x.x()) * std::sin(pi * x.y()), pi * std::sin(pi * x.x()) * std::cos(pi * x.y()));
  };
  const auto src = SourceField::custom([&](const Point2& x) { return 2 * pi * pi * exact(x); }, "mms");
  std::vector<MeshPtr> chain = {kt::share(uniform_refine(uniform_refine(polygon_base_mesh(unit_square_boundary()))))};
  for (int k = 0; k < 4; ++k) chain.push_back(kt::share(uniform_refine(*chain.back())));
  const FemSolution coarse = solve_on_mesh(chain.front(), src);
  const FemSolution ref = solve_on_mesh(chain.back(), src);
  const ErrorNorms via_ref = h1_l2_error(coarse, ref, chain);
  const ErrorNorms analytic = error_vs_exact(*coarse.mesh, coarse.u, exact, grad);
  CHECK(kt::rel_err(via_ref.h1_semi, analytic.h1_semi) < 0.05);
}

TEST_CASE("log_log_slope") {
  const std::vector<double> h = {0.5, 0.25, 0.125, 0.0625};
  std::vector<double> e1, e2;
  for (double x : h) {
    e1.push_back(3.0 * x);
    e2.push_back(0.7 * x * x);
  }
  CHECK(std::abs(log_log_slope(h, e1) - 1.0) < 1e-12);
  CHECK(std::abs(log_log_slope(h, e2) - 2.0) < 1e-12);
  CHECK_THROWS(log_log_slope(std::span<const double>(h).first(2), std::span<const double>(e1).first(2)));
}

TEST_CASE("PointLocator agrees with a scan") {
  auto m = kt::share(uniform_refine(base_lattice_mesh(build_snowflake(2))));
  const PointLocator loc(m);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0, 1);
  const VectorX lin = nodal(*m, [](const Point2& x) { return x.x() + 2 * x.y(); });
  int found = 0;
  for (int k = 0; k < 3000; ++k) {
    const Point2 x(u(rng), u(rng) - 0.3);
    const auto [t, lam] = loc.locate(x);
    const bool inside = point_in_polygon(x, build_snowflake(2));
    if (t < 0) {
      CHECK_FALSE(inside);
      continue;
    }
    ++found;
    CHECK(lam.minCoeff() >= -1e-10);
    CHECK(loc.evaluate(lin, x) == doctest::Approx(x.x() + 2 * x.y()).epsilon(1e-12));
  }
  CHECK(found > 1000);
}

TEST_CASE("mosco building blocks") {
  GradingParams g;
  g.h = 1.0 / 12.0;
  const auto src = SourceField::magnet(DomainSpec::snowflake_center());
  const FemSolution s = solve_problem(DomainSpec::snowflake(1), src, g).solution;
  CHECK(l2_difference(s, s) == 0.0);
  // Omega_1 nodes lie in Omega_2
  const auto b2 = build_snowflake(2);
  for (const auto& v : s.mesh->vertices) CHECK(point_in_polygon(v, b2));
  const FemSolution s2 = solve_problem(DomainSpec::snowflake(2), src, g).solution;
  CHECK(l2_difference(s, s2) > 0.0);
  // outside the other mesh's domain: error
  CHECK_THROWS(l2_difference(s2, s));
}

TEST_CASE("make_report fields") {
  GradingParams g;
  g.h = 1.0 / 12.0;
  const ProblemResult r = solve_problem(DomainSpec::snowflake(1), SourceField::magnet({0.5, kSqrt3 / 6}), g);
  const FieldReport rep = make_report(r, "Omega_1", 1, g.h);
  CHECK(rep.linf_b == linf_b(r.solution).value);
  CHECK(rep.boundary_length == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(rep.num_triangles == r.solution.mesh->num_triangles());
  CHECK(rep.l2_u > 0.0);
  CHECK(rep.h1_semi_u == doctest::Approx(std::sqrt(r.solution.energy)).epsilon(1e-8));
}
