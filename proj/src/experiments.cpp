#include "kochfem/experiments.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>

namespace kochfem::experiments {

DomainSpec table_domain(int level) { return level == 0 ? DomainSpec::circle(0.5, 256) : DomainSpec::snowflake(level); }

GradingParams pinned_grading(int level) {
  GradingParams g;
  g.h = std::pow(3.0, -level) / 4.0;
  g.eta = 0.30;
  g.sigma = 1.0;
  g.cutoff = 0.5;
  return g;
}

double exact_boundary_length(int level) { return level == 0 ? std::numbers::pi : snowflake_length(level); }

double domain_boundary_length(const DomainSpec& spec, const PrefractalBoundary& b) {
  if (const auto* c = std::get_if<CirclePolygon>(&spec.shape)) return 2.0 * std::numbers::pi * c->radius;
  return boundary_length(b);
}

Table1Row run_table1_row(int level, const CgOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const DomainSpec spec = table_domain(level);
  const GradingParams g = pinned_grading(level);
  const ProblemResult result = solve_problem(spec, SourceField::magnet(spec.center), g, 1.0, options);

  Table1Row row;
  row.level = level;
  row.domain = spec.label();
  row.report = make_report(result, row.domain, level, g.h);
  row.linf_b = row.report.linf_b;
  row.ell = domain_boundary_length(spec, result.boundary);
  row.report.boundary_length = row.ell;
  row.ell_exact = exact_boundary_length(level);
  row.reference_linf = level < static_cast<int>(kReferenceLinfB.size()) ? kReferenceLinfB[level] : 0.0;
  row.deviation = row.reference_linf > 0.0 ? (row.linf_b - row.reference_linf) / row.reference_linf : 0.0;
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

std::vector<Table1Row> run_table1(int max_n, const std::function<void(const Table1Row&)>& on_row,
                                  const CgOptions& options) {
  if (max_n < 0 || max_n > 5) throw Error("table1: max_n must lie in [0, 5]");
  std::vector<Table1Row> rows;
  for (int n = 0; n <= max_n; ++n) {
    rows.push_back(run_table1_row(n, options));
    if (on_row) on_row(rows.back());
  }
  return rows;
}

namespace {

// Solves on every ladder mesh and on the reference, then measures each ladder
// solution against the reference through the nested chain.
ConvergenceStudy measure_ladder(const MeshHierarchy& ladder, const std::vector<double>& h, const SourceField& source,
                                const CgOptions& options) {
  MeshHierarchy chain = ladder;
  chain.push_back(std::make_shared<const TriMesh>(uniform_refine(*chain.back())));
  chain.push_back(std::make_shared<const TriMesh>(uniform_refine(*chain.back())));
  const FemSolution reference = solve_on_mesh(chain.back(), source, 1.0, options);

  ConvergenceStudy study;
  study.reference_triangles = chain.back()->num_triangles();
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    const FemSolution sol = solve_on_mesh(ladder[k], source, 1.0, options);
    const std::span<const MeshPtr> tail(chain.begin() + static_cast<std::ptrdiff_t>(k), chain.end());
    const ErrorNorms err = h1_l2_error(sol, reference, tail);
    study.record.points.push_back({h[k], err.h1_semi, err.l2});
    study.triangles.push_back(ladder[k]->num_triangles());
  }
  study.orders = observed_order(study.record);
  return study;
}

}  // namespace

ConvergenceStudy run_convergence(int level, int levels, bool graded, const CgOptions& options) {
  if (levels < 4) throw Error("convergence: needs at least 4 levels");
  if (level < 1) throw Error("convergence: snowflake level must be >= 1");
  const PrefractalBoundary b = build_snowflake(level);
  const SourceField source = SourceField::magnet(b.center);

  MeshHierarchy ladder;
  std::vector<double> h;
  std::vector<std::uint8_t> pass;
  MeshPtr current = std::make_shared<const TriMesh>(base_lattice_mesh(b));
  for (int k = 0; k < levels; ++k) {
    if (graded) {
      GradingParams g = pinned_grading(level);
      g.h = std::pow(3.0, -level) / std::pow(2.0, k);
      current = std::make_shared<const TriMesh>(refine_to_size(*current, b, g));
      h.push_back(g.h);
      pass.push_back(check_grisvard(*current, b, g).pass);
    } else {
      current = std::make_shared<const TriMesh>(uniform_refine(*current));
      h.push_back(mesh_stats(*current).max_diameter);
    }
    ladder.push_back(current);
  }
  ConvergenceStudy study = measure_ladder(ladder, h, source, options);
  study.grisvard_pass = std::move(pass);
  return study;
}

ConvergenceStudy run_manufactured(int levels, int first_level, const CgOptions& options) {
  if (levels < 3) throw Error("manufactured: needs at least 3 levels");
  constexpr double pi = std::numbers::pi;
  const auto exact = [](const Point2& x) { return std::sin(pi * x.x()) * std::sin(pi * x.y()); };
  const auto gradient = [](const Point2& x) {
    return Point2(pi * std::cos(pi * x.x()) * std::sin(pi * x.y()), pi * std::sin(pi * x.x()) * std::cos(pi * x.y()));
  };
  const SourceField source = SourceField::custom([exact](const Point2& x) { return 2.0 * pi * pi * exact(x); },
                                                 "2 pi^2 sin(pi x1) sin(pi x2)");

  const PrefractalBoundary b = unit_square_boundary();
  TriMesh mesh = polygon_base_mesh(b);
  for (int k = 0; k < first_level; ++k) mesh = uniform_refine(mesh);

  ConvergenceStudy study;
  for (int k = 0; k < levels; ++k) {
    auto ptr = std::make_shared<const TriMesh>(mesh);
    const FemSolution sol = solve_on_mesh(ptr, source, 1.0, options);
    const ErrorNorms err = error_vs_exact(*ptr, sol.u, exact, gradient);
    study.record.points.push_back({mesh_stats(*ptr).max_diameter, err.h1_semi, err.l2});
    study.triangles.push_back(ptr->num_triangles());
    if (k + 1 < levels) mesh = uniform_refine(mesh);
  }
  study.orders = observed_order(study.record);
  return study;
}

GradingParams mosco_grading() {
  GradingParams g = pinned_grading(3);
  return g;
}

std::vector<double> run_mosco(int max_n, const CgOptions& options) {
  if (max_n < 3) throw Error("mosco: max_n must be >= 3");
  std::vector<int> levels(static_cast<std::size_t>(max_n));
  std::iota(levels.begin(), levels.end(), 1);
  return mosco_proxy(levels, mosco_grading(), options);
}

}  // namespace kochfem::experiments
