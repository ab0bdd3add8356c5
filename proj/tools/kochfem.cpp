#include "kochfem/config.hpp"
#include "kochfem/experiments.hpp"
#include "kochfem/io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace kochfem;

namespace {

// Tags any kochfem error escaping `fn` with the pipeline stage it came from.
struct StageError : std::runtime_error {
  StageError(std::string stage_, const std::string& what, int code_)
      : std::runtime_error(what), stage(std::move(stage_)), code(code_) {}
  std::string stage;
  int code;
};

template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const ConfigError& e) {
    throw StageError(name, e.what(), 2);
  } catch (const std::exception& e) {
    throw StageError(name, e.what(), 1);
  }
}

struct Globals {
  std::string config_path;
  std::string out;
  int threads = 1;
  std::optional<int> max_n;
  std::vector<std::string> overrides;
};

RunConfig load(const Globals& g) {
  return stage("config", [&] {
    RunConfig cfg = g.config_path.empty() ? RunConfig{} : load_config(g.config_path);
    for (const auto& kv : g.overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!g.out.empty()) cfg.out_dir = g.out;
    cfg.validate();
    return cfg;
  });
}

std::string out_dir(const Globals& g) { return g.out.empty() ? std::string("out") : g.out; }

void print_row(const char* fmt, auto... args) { std::printf(fmt, args...); }

int cmd_geometry(const Globals& g, std::optional<int> level) {
  const RunConfig cfg = load(g);
  const int n = level.value_or(cfg.level());
  const auto b = stage("geometry", [&] {
    if (n < 0 || n > 8) throw ConfigError("geometry: level must lie in [0, 8]");
    return build_snowflake(n);
  });
  const fs::path path = fs::path(cfg.out_dir) / ("boundary_n" + std::to_string(n) + ".csv");
  stage("output", [&] { io::write_boundary_csv(path, b); });
  print_row("level %d\nvertices %zu\nreentrant %zu\nell %.17g\narea %.17g\nwrote %s\n", n, b.size(),
            b.reentrant.size(), boundary_length(b), polygon_area(b), path.c_str());
  return 0;
}

int cmd_mesh(const Globals& g) {
  const RunConfig cfg = load(g);
  const GradingParams grading = cfg.effective_grading();
  const auto b = stage("geometry", [&] { return build_boundary(cfg.domain); });
  const TriMesh mesh = stage("mesh", [&] { return refine_to_size(base_mesh(cfg.domain, b), b, grading); });
  const GrisvardReport check = check_grisvard(mesh, b, grading);
  const MeshStats st = mesh_stats(mesh);
  const fs::path dir = fs::path(cfg.out_dir);
  stage("output", [&] {
    if (cfg.write_csv) io::write_mesh_csv(dir, mesh);
    if (cfg.write_vtk) io::write_vtk(dir / "mesh.vtk", mesh, nullptr, nullptr, cfg.domain.label() + " mesh");
  });
  print_row("domain %s\nh %.17g\nvertices %zu\ntriangles %zu\nmin_angle %.6f\nmax_angle %.6f\nmax_diameter %.17g\n"
            "grisvard_max_ratio %.6f\ngrisvard %s\n",
            cfg.domain.label().c_str(), grading.h, st.vertices, st.triangles, st.min_angle_deg, st.max_angle_deg,
            st.max_diameter, check.max_ratio, check.pass ? "pass" : "FAIL");
  return check.pass ? 0 : 1;
}

int cmd_solve(const Globals& g) {
  const RunConfig cfg = load(g);
  const GradingParams grading = cfg.effective_grading();
  const ProblemResult result =
      stage("solve", [&] { return solve_problem(cfg.domain, cfg.source(), grading, cfg.mu, cfg.solver); });
  FieldReport report = stage("field", [&] { return make_report(result, cfg.domain.label(), cfg.level(), grading.h); });
  report.boundary_length = experiments::domain_boundary_length(cfg.domain, result.boundary);
  const fs::path dir = fs::path(cfg.out_dir);
  stage("output", [&] {
    const TriMesh& mesh = *result.solution.mesh;
    if (cfg.write_csv) {
      io::write_mesh_csv(dir, mesh);
      io::write_solution_csv(dir / "solution.csv", result.solution);
    }
    if (cfg.write_vtk) io::write_vtk(dir / "solution.vtk", mesh, &result.solution.u, &report.b, cfg.domain.label());
    io::write_report_csv(dir / "report.csv", {report});
  });
  print_row("domain %s\nh %.17g\nvertices %zu\ntriangles %zu\nlinf_B %.17g\nell %.17g\nl2_u %.17g\nh1_semi_u %.17g\n"
            "cg_iters %ld\ncg_residual %.3e\n",
            report.domain.c_str(), report.h, report.num_vertices, report.num_triangles, report.linf_b,
            report.boundary_length, report.l2_u, report.h1_semi_u, report.cg_iterations, report.cg_residual);
  return 0;
}

int cmd_table1(const Globals& g) {
  const int max_n = g.max_n.value_or(4);
  std::vector<FieldReport> reports;
  std::printf("%-12s %14s %20s %12s %10s %10s %8s\n", "domain", "linf_B", "ell_n", "reference", "deviation",
              "triangles", "seconds");
  stage("table1", [&] {
    if (max_n < 0 || max_n > 5) throw ConfigError("--max-n must lie in [0, 5] for table1");
    experiments::run_table1(max_n, [&](const experiments::Table1Row& r) {
      std::printf("%-12s %14.6f %20.17g %12.3f %+9.2f%% %10zu %8.1f\n", r.domain.c_str(), r.linf_b, r.ell,
                  r.reference_linf, 100.0 * r.deviation, r.report.num_triangles, r.seconds);
      std::fflush(stdout);
      reports.push_back(r.report);
    });
  });
  const fs::path path = fs::path(out_dir(g)) / "report.csv";
  stage("output", [&] { io::write_report_csv(path, reports); });
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

int cmd_convergence(const Globals& g, int level, int levels, bool uniform) {
  const experiments::ConvergenceStudy s = stage("convergence", [&] {
    if (levels < 4) throw ConfigError("--levels must be >= 4");
    if (level < 1 || level > 4) throw ConfigError("--level must lie in [1, 4]");
    return experiments::run_convergence(level, levels, !uniform);
  });
  std::printf("%-6s %14s %14s %14s %10s\n", "level", "h", "err_h1", "err_l2", "triangles");
  for (std::size_t k = 0; k < s.record.points.size(); ++k) {
    const auto& p = s.record.points[k];
    std::printf("%-6zu %14.6e %14.6e %14.6e %10zu\n", k, p.h, p.err_h1, p.err_l2, s.triangles[k]);
  }
  std::printf("reference triangles %zu\norder_h1 %.4f\norder_l2 %.4f\n", s.reference_triangles, s.orders.h1,
              s.orders.l2);
  bool all_pass = true;
  for (auto p : s.grisvard_pass) all_pass = all_pass && p;
  if (!uniform) std::printf("grisvard %s\n", all_pass ? "pass" : "FAIL");
  const fs::path path = fs::path(out_dir(g)) / "convergence.csv";
  stage("output", [&] { io::write_convergence_csv(path, s.record); });
  std::printf("wrote %s\n", path.c_str());
  return all_pass ? 0 : 1;
}

int cmd_mosco(const Globals& g) {
  const int max_n = g.max_n.value_or(5);
  const std::vector<double> d = stage("mosco", [&] {
    if (max_n < 3 || max_n > 5) throw ConfigError("--max-n must lie in [3, 5] for mosco");
    return experiments::run_mosco(max_n);
  });
  std::printf("%-4s %20s\n", "n", "l2_diff");
  bool decreasing = true;
  for (std::size_t k = 0; k < d.size(); ++k) {
    std::printf("%-4zu %20.12e\n", k + 1, d[k]);
    if (k > 0 && !(d[k] < d[k - 1])) decreasing = false;
  }
  std::printf("strictly_decreasing %s\n", decreasing ? "yes" : "no");
  const fs::path path = fs::path(out_dir(g)) / "mosco.csv";
  stage("output", [&] {
    io::write_atomic(path, [&](std::ostream& os) {
      os << "n,l2_diff\n";
      for (std::size_t k = 0; k < d.size(); ++k) os << k + 1 << ',' << io::format_real(d[k]) << '\n';
    });
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Magnetostatics on Koch snowflake prefractals: meshing, P1 FEM, field reports"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "key = value run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "output directory (overrides output.dir)");
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--max-n", g.max_n, "highest snowflake level for table1 / mosco");
  app.add_option("--set", g.overrides, "config override key=value (repeatable)");

  std::optional<int> geo_level;
  auto* geometry = app.add_subcommand("geometry", "write the level-n boundary and print a summary");
  geometry->add_option("-n,--level", geo_level, "snowflake level (default: config domain.level)");

  auto* mesh = app.add_subcommand("mesh", "build the graded mesh of the configured domain");
  auto* solve = app.add_subcommand("solve", "solve the configured problem and export u, B and the report");
  auto* table1 = app.add_subcommand("table1", "||B||_inf and boundary length for Omega_0 .. Omega_max-n");

  int conv_level = 2;
  int conv_levels = 4;
  bool uniform = false;
  auto* convergence = app.add_subcommand("convergence", "error ladder against a nested reference");
  convergence->add_option("-n,--level", conv_level, "snowflake level");
  convergence->add_option("--levels", conv_levels, "ladder length (>= 4)");
  auto* graded_flag = convergence->add_flag("--graded", "graded meshes (default)");
  convergence->add_flag("--uniform", uniform, "uniform refinement, no grading")->excludes(graded_flag);

  auto* mosco = app.add_subcommand("mosco", "L2 differences of consecutive prefractal solutions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    set_thread_count(g.threads);
    if (*geometry) return cmd_geometry(g, geo_level);
    if (*mesh) return cmd_mesh(g);
    if (*solve) return cmd_solve(g);
    if (*table1) return cmd_table1(g);
    if (*convergence) return cmd_convergence(g, conv_level, conv_levels, uniform);
    if (*mosco) return cmd_mosco(g);
  } catch (const StageError& e) {
    std::cerr << "error [" << e.stage << "]: " << e.what() << '\n';
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
