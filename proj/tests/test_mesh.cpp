#include "support.hpp"

#include <doctest.h>

#include <set>

using namespace kochfem;
using kt::kSqrt3;

namespace {

double mesh_area(const TriMesh& m) {
  double a = 0.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) a += triangle_area(m.corners(t));
  return a;
}

// Every fine vertex lies in the closure of the parent triangle.
int non_nested(const TriMesh& coarse, const TriMesh& fine) {
  int bad = 0;
  for (std::size_t t = 0; t < fine.num_triangles(); ++t) {
    const auto& p = coarse.triangles[fine.parent_triangle[t]];
    const Point2 &a = coarse.vertices[p[0]], &b = coarse.vertices[p[1]], &c = coarse.vertices[p[2]];
    const double twice = orient2(a, b, c);
    for (int v : fine.triangles[t]) {
      const Point2& x = fine.vertices[v];
      const double l0 = orient2(x, b, c) / twice, l1 = orient2(a, x, c) / twice, l2 = orient2(a, b, x) / twice;
      if (std::min({l0, l1, l2}) < -1e-9) ++bad;
    }
  }
  return bad;
}

void check_refined(const TriMesh& coarse, const TriMesh& fine, double area) {
  CHECK(is_conforming(fine));
  CHECK(non_nested(coarse, fine) == 0);
  CHECK(kt::rel_err(mesh_area(fine), area) < 1e-10);
  for (std::size_t v = 0; v < coarse.num_vertices(); ++v) CHECK(fine.vertices[v] == coarse.vertices[v]);
  const MeshStats st = mesh_stats(fine);
  CHECK(st.min_angle_deg >= 20.0);
}

}  // namespace

TEST_CASE("base_lattice_mesh tiles the snowflake") {
  CHECK(base_lattice_mesh(build_snowflake(0)).num_triangles() == 1);
  CHECK(base_lattice_mesh(build_snowflake(1)).num_triangles() == 12);
  for (int n = 1; n <= 4; ++n) {
    const auto b = build_snowflake(n);
    const TriMesh m = base_lattice_mesh(b);
    const double cell = kSqrt3 / 4 * std::pow(3.0, -2 * n);
    CHECK(m.num_triangles() == static_cast<std::size_t>(std::llround(polygon_area(b) / cell)));
    CHECK(kt::rel_err(mesh_area(m), polygon_area(b)) < 1e-10);
    CHECK(is_conforming(m));
    CHECK(mesh_stats(m).min_angle_deg == doctest::Approx(60.0));
    // every polygon vertex is a mesh vertex flagged on the boundary
    std::set<std::pair<long long, long long>> keys;
    for (std::size_t v = 0; v < m.num_vertices(); ++v)
      if (m.boundary_vertex[v]) keys.insert({std::llround(m.vertices[v].x() * 1e9), std::llround(m.vertices[v].y() * 1e9)});
    for (const auto& p : b.vertices) CHECK(keys.count({std::llround(p.x() * 1e9), std::llround(p.y() * 1e9)}) == 1);
    CHECK(topological_boundary(m) == m.boundary_vertex);
  }
}

TEST_CASE("ear_clip and polygon_base_mesh") {
  const auto oct = circle_polygon(1.0, 8, {0, 0});
  CHECK(ear_clip(oct.vertices).size() == 6);
  const auto sq = unit_square_boundary();
  CHECK(ear_clip(sq.vertices).size() == 2);
  for (const auto& b : {sq, oct, make_polygon({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}, {0.5, 0.5})}) {
    const TriMesh m = polygon_base_mesh(b);
    CHECK(is_conforming(m));
    CHECK(kt::rel_err(mesh_area(m), polygon_area(b)) < 1e-12);
    CHECK(mesh_stats(m).min_angle_deg >= 20.0);
  }
  CHECK_THROWS(ear_clip({{0, 0}, {1, 1}, {1, 0}, {0, 1}}));
}

TEST_CASE("disc base mesh for the circle domain") {
  const auto spec = DomainSpec::circle(0.5, 256);
  const auto b = build_boundary(spec);
  const TriMesh m = base_mesh(spec, b);
  CHECK(is_conforming(m));
  CHECK(kt::rel_err(mesh_area(m), polygon_area(b)) < 1e-12);
  CHECK(mesh_stats(m).min_angle_deg >= 20.0);
}

TEST_CASE("grisvard_target_size") {
  GradingParams g;
  g.h = 0.1;
  g.eta = 0.3;
  g.sigma = 1.0;
  g.cutoff = 0.5;
  CHECK(grisvard_target_size(0.0, g) == doctest::Approx(std::pow(0.1, 10.0 / 7.0)).epsilon(1e-14));
  CHECK(grisvard_target_size(0.0, g) == doctest::Approx(0.0372).epsilon(1e-3));
  CHECK(grisvard_target_size(std::numeric_limits<double>::infinity(), g) ==
        doctest::Approx(0.1 * std::pow(0.5, 0.3)).epsilon(1e-14));
  CHECK(grisvard_target_size(0.2, g) == doctest::Approx(0.1 * std::pow(0.2, 0.3)).epsilon(1e-14));
  double last = 0.0;
  for (double r = 0.0; r < 1.0; r += 1e-3) {
    const double tau = grisvard_target_size(r, g);
    CHECK(tau >= last);
    last = tau;
  }
  g.graded = false;
  CHECK(grisvard_target_size(0.0, g) == doctest::Approx(0.1));
  g.eta = 1.2;
  CHECK_THROWS(g.validate());
}

TEST_CASE("refine_to_size on the level-2 snowflake") {
  const auto b = build_snowflake(2);
  const TriMesh base = base_lattice_mesh(b);
  GradingParams g;
  g.h = 1.0 / 36.0;
  const TriMesh m = refine_to_size(base, b, g);
  check_refined(base, m, polygon_area(b));
  const GrisvardReport r = check_grisvard(m, b, g);
  CHECK(r.pass);
  CHECK(r.max_ratio <= 1.0 + 1e-9);
  CHECK(r.min_angle_deg >= 20.0);
  for (std::size_t v = 0; v < m.num_vertices(); ++v) {
    if (!m.boundary_vertex[v]) continue;
    CHECK(distance_to_boundary(m.vertices[v], b) < 1e-14);
  }

  GradingParams tiny = g;
  tiny.h = 1e-3;
  CHECK_FALSE(check_grisvard(base, b, tiny).pass);

  GradingParams huge = g;
  huge.h = 10.0;
  const TriMesh same = refine_to_size(base, b, huge);
  CHECK(same.vertices == base.vertices);
  CHECK(same.triangles == base.triangles);
}

TEST_CASE("refine_to_size on the square halves the diameter") {
  const auto b = unit_square_boundary();
  const TriMesh base = polygon_base_mesh(b);
  GradingParams g;
  g.h = 0.1;
  const TriMesh m1 = refine_to_size(base, b, g);
  g.h = 0.05;
  const TriMesh m2 = refine_to_size(m1, b, g);
  check_refined(m1, m2, 1.0);
  const double ratio = mesh_stats(m2).max_diameter / mesh_stats(m1).max_diameter;
  CHECK(ratio >= 0.25);
  CHECK(ratio <= 1.0);
}

TEST_CASE("uniform_refine") {
  const auto b = build_snowflake(2);
  const TriMesh base = base_lattice_mesh(b);
  const TriMesh u1 = uniform_refine(base);
  CHECK(u1.num_triangles() == 4 * base.num_triangles());
  check_refined(base, u1, polygon_area(b));
  // equilateral start: first generation is 30-30-120 with diameter sqrt(3)/2 s
  CHECK(mesh_stats(u1).max_diameter == doctest::Approx(mesh_stats(base).max_diameter * kSqrt3 / 2));
  const TriMesh u2 = uniform_refine(u1);
  CHECK(u2.num_triangles() == 4 * u1.num_triangles());
  check_refined(u1, u2, polygon_area(b));
  CHECK(mesh_stats(u2).max_diameter == doctest::Approx(mesh_stats(u1).max_diameter / 2));
}

TEST_CASE("uniform_refine on the square halves the diameter each time") {
  TriMesh m = polygon_base_mesh(unit_square_boundary());
  for (int k = 0; k < 4; ++k) {
    const TriMesh f = uniform_refine(m);
    CHECK(mesh_stats(f).max_diameter == doctest::Approx(mesh_stats(m).max_diameter / 2));
    m = f;
  }
}

TEST_CASE("bisect_marked closes hanging nodes") {
  const auto b = unit_square_boundary();
  TriMesh m = uniform_refine(uniform_refine(polygon_base_mesh(b)));
  std::vector<std::uint8_t> marked(m.num_triangles(), 0);
  marked[0] = 1;
  const TriMesh r = bisect_marked(m, marked);
  CHECK(r.num_triangles() > m.num_triangles());
  check_refined(m, r, 1.0);
}

TEST_CASE("is_conforming detects a hanging node") {
  TriMesh m;
  m.vertices = {{0, 0}, {1, 0}, {0, 1}, {1, 1}, {0.5, 0.5}};
  m.triangles = {{0, 1, 4}, {0, 4, 2}, {1, 3, 2}};
  m.boundary_vertex = {1, 1, 1, 1, 0};
  CHECK_FALSE(is_conforming(m));
  m.triangles = {{0, 1, 4}, {0, 4, 2}, {1, 3, 4}, {4, 3, 2}};
  CHECK(is_conforming(m));
}
