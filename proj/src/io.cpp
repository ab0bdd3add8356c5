#include "kochfem/io.hpp"

#include <charconv>
#include <fstream>
#include <system_error>

#include <unistd.h>

namespace kochfem::io {

namespace fs = std::filesystem;

std::string format_real(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return {buf, res.ptr};
}

void write_atomic(const fs::path& path, const std::function<void(std::ostream&)>& writer) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error("cannot open " + tmp.string() + " for writing");
      writer(out);
      out.flush();
      if (!out) throw Error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
  } catch (...) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw;
  }
}

void write_boundary_csv(const fs::path& path, const PrefractalBoundary& b) {
  std::vector<std::uint8_t> flag(b.size(), 0);
  for (int i : b.reentrant) flag[i] = 1;
  write_atomic(path, [&](std::ostream& os) {
    os << "index,x1,x2,reentrant\n";
    for (std::size_t i = 0; i < b.size(); ++i)
      os << i << ',' << format_real(b.vertex(i).x()) << ',' << format_real(b.vertex(i).y()) << ','
         << int(flag[i]) << '\n';
  });
}

void write_mesh_csv(const fs::path& dir, const TriMesh& mesh) {
  write_atomic(dir / "vertices.csv", [&](std::ostream& os) {
    os << "index,x1,x2,boundary\n";
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
      os << v << ',' << format_real(mesh.vertices[v].x()) << ',' << format_real(mesh.vertices[v].y()) << ','
         << int(mesh.boundary_vertex[v]) << '\n';
  });
  write_atomic(dir / "triangles.csv", [&](std::ostream& os) {
    os << "v0,v1,v2,parent\n";
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
      const auto& tri = mesh.triangles[t];
      const int parent = t < mesh.parent_triangle.size() ? mesh.parent_triangle[t] : -1;
      os << tri[0] << ',' << tri[1] << ',' << tri[2] << ',' << parent << '\n';
    }
  });
}

void write_vtk(const fs::path& path, const TriMesh& mesh, const VectorX* u, const GradientField* b,
               const std::string& title) {
  write_atomic(path, [&](std::ostream& os) {
    const std::size_t nv = mesh.num_vertices();
    const std::size_t nt = mesh.num_triangles();
    os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << nv << " double\n";
    for (const auto& p : mesh.vertices) os << format_real(p.x()) << ' ' << format_real(p.y()) << " 0\n";
    os << "CELLS " << nt << ' ' << 4 * nt << '\n';
    for (const auto& tri : mesh.triangles) os << "3 " << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
    os << "CELL_TYPES " << nt << '\n';
    for (std::size_t t = 0; t < nt; ++t) os << "5\n";
    if (u) {
      os << "POINT_DATA " << nv << "\nSCALARS u double 1\nLOOKUP_TABLE default\n";
      for (Eigen::Index v = 0; v < u->size(); ++v) os << format_real((*u)[v]) << '\n';
    }
    if (b) {
      os << "CELL_DATA " << nt << "\nVECTORS B double\n";
      for (Eigen::Index t = 0; t < b->rows(); ++t)
        os << format_real((*b)(t, 0)) << ' ' << format_real((*b)(t, 1)) << " 0\n";
      os << "SCALARS B_magnitude double 1\nLOOKUP_TABLE default\n";
      for (Eigen::Index t = 0; t < b->rows(); ++t) os << format_real(b->row(t).norm()) << '\n';
    }
  });
}

void write_solution_csv(const fs::path& path, const FemSolution& sol) {
  write_atomic(path, [&](std::ostream& os) {
    os << "vertex,u\n";
    for (Eigen::Index v = 0; v < sol.u.size(); ++v) os << v << ',' << format_real(sol.u[v]) << '\n';
  });
}

void write_report_csv(const fs::path& path, const std::vector<FieldReport>& rows) {
  write_atomic(path, [&](std::ostream& os) {
    os << "domain,n,h,num_vertices,num_triangles,linf_B,ell_n,l2_u,h1_semi_u,cg_iters\n";
    for (const auto& r : rows)
      os << r.domain << ',' << r.level << ',' << format_real(r.h) << ',' << r.num_vertices << ','
         << r.num_triangles << ',' << format_real(r.linf_b) << ',' << format_real(r.boundary_length) << ','
         << format_real(r.l2_u) << ',' << format_real(r.h1_semi_u) << ',' << r.cg_iterations << '\n';
  });
}

void write_convergence_csv(const fs::path& path, const ConvergenceRecord& rec) {
  write_atomic(path, [&](std::ostream& os) {
    os << "level,h,err_h1,err_l2\n";
    for (std::size_t k = 0; k < rec.points.size(); ++k) {
      const auto& p = rec.points[k];
      os << k << ',' << format_real(p.h) << ',' << format_real(p.err_h1) << ',' << format_real(p.err_l2) << '\n';
    }
  });
}

}  // namespace kochfem::io
