#include "support.hpp"

#include "kochfem/config.hpp"
#include "kochfem/experiments.hpp"
#include "kochfem/io.hpp"

#include <doctest.h>

#include <clocale>
#include <fstream>
#include <sstream>

using namespace kochfem;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("kochfem_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("parse_config: sections, comments and overrides") {
  const RunConfig cfg = parse_config(R"(
# a comment
[domain]
kind = snowflake
level = 3          # trailing comment
[grading]
h = 0.01
eta = 0.4
graded = false
[source]
amplitude = 2e5
center = "0.5, 0.25"
[physics]
mu = 2
[solver]
tol = 1e-8
max_iter = 500
[output]
dir = "results"
formats = "vtk"
)");
  CHECK(cfg.level() == 3);
  CHECK(cfg.grading.h == 0.01);
  CHECK(cfg.effective_grading().h == 0.01);
  CHECK(cfg.grading.eta == 0.4);
  CHECK_FALSE(cfg.grading.graded);
  CHECK(cfg.source_amplitude == 2e5);
  CHECK(*cfg.source_center == Point2(0.5, 0.25));
  CHECK(cfg.mu == 2.0);
  CHECK(cfg.solver.tolerance == 1e-8);
  CHECK(cfg.solver.max_iterations == 500);
  CHECK(cfg.out_dir == "results");
  CHECK_FALSE(cfg.write_csv);
  CHECK(cfg.write_vtk);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("parse_config: defaults and pinned mesh size") {
  const RunConfig cfg = parse_config("");
  CHECK(cfg.level() == 2);
  CHECK(cfg.effective_grading().h == doctest::Approx(1.0 / 36.0));
  CHECK(default_mesh_size(DomainSpec::snowflake(4)) == doctest::Approx(std::pow(3.0, -4) / 4));
  const RunConfig circle = parse_config("domain.kind = circle\ndomain.radius = 0.5\n");
  CHECK(circle.level() == 0);
  CHECK(std::holds_alternative<CirclePolygon>(circle.domain.shape));
  const RunConfig keep = parse_config("domain.level = 4\ndomain.kind = snowflake\n");
  CHECK(keep.level() == 4);
}

TEST_CASE("parse_config: errors are ConfigError") {
  CHECK_THROWS_AS(parse_config("bogus = 1"), ConfigError);
  CHECK_THROWS_AS(parse_config("[grading]\nh = abc"), ConfigError);
  CHECK_THROWS_AS(parse_config("[domain\nkind = circle"), ConfigError);
  CHECK_THROWS_AS(parse_config("domain.kind = hexagon"), ConfigError);
  CHECK_THROWS_AS(parse_config("domain.kind = circle\ndomain.level = 2"), ConfigError);
  CHECK_THROWS_AS(parse_config("output.formats = png"), ConfigError);
  CHECK_THROWS_AS(parse_config("no equals sign"), ConfigError);
  CHECK_THROWS_AS(parse_config("domain.level = 9").validate(), ConfigError);
  CHECK_THROWS_AS(parse_config("physics.mu = -1").validate(), ConfigError);
  CHECK_THROWS_AS(parse_config("grading.eta = 0.1").validate(), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/kochfem.toml"), ConfigError);
}

TEST_CASE("format_real is locale independent and round-trips") {
  const char* old = std::setlocale(LC_NUMERIC, nullptr);
  const std::string saved = old ? old : "C";
  std::setlocale(LC_NUMERIC, "de_DE.UTF-8");
  CHECK(io::format_real(0.5) == "0.5");
  std::setlocale(LC_NUMERIC, saved.c_str());
  for (double v : {1.0 / 3.0, -2.5e-17, 12345.678901234567, 0.0}) CHECK(std::stod(io::format_real(v)) == v);
}

TEST_CASE("boundary, mesh, solution and report files") {
  const fs::path dir = scratch("io");
  const auto b = build_snowflake(1);
  io::write_boundary_csv(dir / "boundary.csv", b);
  auto lines = lines_of(dir / "boundary.csv");
  CHECK(lines.front() == "index,x1,x2,reentrant");
  CHECK(lines.size() == 13);
  int reentrant = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) reentrant += lines[i].back() == '1';
  CHECK(reentrant == 6);

  GradingParams g;
  g.h = 1.0 / 12.0;
  const ProblemResult r = solve_problem(DomainSpec::snowflake(1), SourceField::magnet(b.center), g);
  const TriMesh& m = *r.solution.mesh;
  io::write_mesh_csv(dir, m);
  CHECK(lines_of(dir / "vertices.csv").front() == "index,x1,x2,boundary");
  CHECK(lines_of(dir / "vertices.csv").size() == m.num_vertices() + 1);
  CHECK(lines_of(dir / "triangles.csv").front() == "v0,v1,v2,parent");
  CHECK(lines_of(dir / "triangles.csv").size() == m.num_triangles() + 1);

  io::write_solution_csv(dir / "solution.csv", r.solution);
  CHECK(lines_of(dir / "solution.csv").front() == "vertex,u");

  const FieldReport rep = make_report(r, "Omega_1", 1, g.h);
  io::write_report_csv(dir / "report.csv", {rep});
  lines = lines_of(dir / "report.csv");
  CHECK(lines.front() == "domain,n,h,num_vertices,num_triangles,linf_B,ell_n,l2_u,h1_semi_u,cg_iters");
  CHECK(lines.size() == 2);
  CHECK(lines[1].rfind("Omega_1,1,", 0) == 0);

  io::write_vtk(dir / "sol.vtk", m, &r.solution.u, &rep.b);
  const auto vtk = lines_of(dir / "sol.vtk");
  CHECK(vtk[0] == "# vtk DataFile Version 3.0");
  CHECK(vtk[3] == "DATASET UNSTRUCTURED_GRID");
  const auto has = [&](const std::string& s) { return std::find(vtk.begin(), vtk.end(), s) != vtk.end(); };
  CHECK(has("POINTS " + std::to_string(m.num_vertices()) + " double"));
  CHECK(has("CELL_TYPES " + std::to_string(m.num_triangles())));
  CHECK(has("SCALARS u double 1"));
  CHECK(has("VECTORS B double"));
  CHECK(has("SCALARS B_magnitude double 1"));

  ConvergenceRecord rec;
  rec.points = {{0.1, 1.0, 0.1}, {0.05, 0.5, 0.025}};
  io::write_convergence_csv(dir / "convergence.csv", rec);
  CHECK(lines_of(dir / "convergence.csv").front() == "level,h,err_h1,err_l2");
  fs::remove_all(dir);
}

TEST_CASE("write_atomic leaves nothing behind on failure") {
  const fs::path dir = scratch("atomic");
  const fs::path target = dir / "out.csv";
  io::write_atomic(target, [](std::ostream& os) { os << "old\n"; });
  CHECK_THROWS(io::write_atomic(target, [](std::ostream& os) {
    os << "partial";
    throw Error("writer failed");
  }));
  CHECK(lines_of(target) == std::vector<std::string>{"old"});
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  CHECK(entries == 1);
  fs::remove_all(dir);
}

TEST_CASE("table helpers") {
  CHECK(experiments::table_domain(0).label() == "Omega_0");
  CHECK(experiments::table_domain(3).label() == "Omega_3");
  CHECK(experiments::exact_boundary_length(0) == std::numbers::pi);
  CHECK(experiments::pinned_grading(2).h == doctest::Approx(1.0 / 36.0));
  CHECK(experiments::pinned_grading(2).eta == 0.30);
}
