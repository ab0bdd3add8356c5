#pragma once

#include "kochfem/field.hpp"

#include <filesystem>
#include <functional>
#include <ostream>
#include <string>

namespace kochfem::io {

/// Shortest-roundtrip-safe text for a double: 17 significant digits, '.' as
/// decimal point regardless of the global locale.
std::string format_real(double value);

/// Writes through a sibling temporary file and renames it into place, so a
/// failed writer never leaves a partial file at `path`.
void write_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer);

/// index,x1,x2,reentrant
void write_boundary_csv(const std::filesystem::path& path, const PrefractalBoundary& b);

/// vertices.csv (index,x1,x2,boundary) and triangles.csv (v0,v1,v2,parent) in `dir`.
void write_mesh_csv(const std::filesystem::path& dir, const TriMesh& mesh);

/// Legacy ASCII VTK unstructured grid. Optional point data `u`, cell data `B`
/// (3-vectors, zero third component) and `B_magnitude`.
void write_vtk(const std::filesystem::path& path, const TriMesh& mesh, const VectorX* u = nullptr,
               const GradientField* b = nullptr, const std::string& title = "kochfem");

/// vertex,u
void write_solution_csv(const std::filesystem::path& path, const FemSolution& sol);

/// domain,n,h,num_vertices,num_triangles,linf_B,ell_n,l2_u,h1_semi_u,cg_iters
void write_report_csv(const std::filesystem::path& path, const std::vector<FieldReport>& rows);

/// level,h,err_h1,err_l2
void write_convergence_csv(const std::filesystem::path& path, const ConvergenceRecord& rec);

}  // namespace kochfem::io
