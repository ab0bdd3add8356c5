#pragma once

#include "kochfem/geometry.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

namespace kochfem {

using Triangle = std::array<int, 3>;

/// Conforming triangulation. Triangles are counterclockwise; the refinement
/// edge of triangle t is the edge opposite local vertex refinement_edge[t].
struct TriMesh {
  std::vector<Point2> vertices;
  std::vector<Triangle> triangles;
  std::vector<std::uint8_t> boundary_vertex;
  std::vector<int> parent_triangle;  // index into the previous mesh, -1 for base meshes
  std::vector<std::uint8_t> refinement_edge;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }

  /// 2x3 matrix whose columns are the corners of triangle t.
  Eigen::Matrix<double, 2, 3> corners(std::size_t t) const {
    Eigen::Matrix<double, 2, 3> c;
    for (int k = 0; k < 3; ++k) c.col(k) = vertices[triangles[t][k]];
    return c;
  }
};

using MeshPtr = std::shared_ptr<const TriMesh>;

/// Coarse-to-fine sequence; level k+1 carries parent links into level k.
using MeshHierarchy = std::vector<MeshPtr>;

struct GradingParams {
  double h = 0.25;       // global size
  double eta = 0.30;     // weight exponent, 1/4 < eta < 1
  double sigma = 1.0;    // grading constant
  double cutoff = 0.5;   // radius R of the graded neighbourhood
  bool graded = true;    // false: plain uniform target sigma * h

  void validate() const;
  /// h^(1/(1-eta)): target size at the corner itself (before sigma).
  double corner_size() const;
};

// Triangle measures --------------------------------------------------------

template <typename Derived>
double triangle_area(const Eigen::MatrixBase<Derived>& c) {
  return 0.5 * orient2(c.col(0), c.col(1), c.col(2));
}

template <typename Derived>
double triangle_diameter(const Eigen::MatrixBase<Derived>& c) {
  return std::max({(c.col(1) - c.col(0)).norm(), (c.col(2) - c.col(1)).norm(),
                   (c.col(0) - c.col(2)).norm()});
}

/// Smallest interior angle in degrees.
double min_angle_deg(const Eigen::Matrix<double, 2, 3>& c);
double max_angle_deg(const Eigen::Matrix<double, 2, 3>& c);

struct MeshStats {
  std::size_t vertices = 0;
  std::size_t triangles = 0;
  double min_angle_deg = 0.0;
  double max_angle_deg = 0.0;
  double max_diameter = 0.0;
  double min_diameter = 0.0;
  double area = 0.0;
};
MeshStats mesh_stats(const TriMesh& m);

/// Edge-to-triangle incidence is 1 or 2 for every edge, all triangles positive.
bool is_conforming(const TriMesh& m);

/// Flags vertices on edges incident to exactly one triangle.
std::vector<std::uint8_t> topological_boundary(const TriMesh& m);

// Base meshes --------------------------------------------------------------

/// Exact equilateral tiling of a snowflake domain on its lattice of pitch 3^-n.
TriMesh base_lattice_mesh(const PrefractalBoundary& b);

/// Ear-clipping triangulation of a simple CCW polygon (vertex indices).
std::vector<Triangle> ear_clip(const std::vector<Point2>& polygon);

/// Ear clipping followed by Delaunay edge flips.
TriMesh polygon_base_mesh(const PrefractalBoundary& b);

/// Ring-structured mesh of an inscribed regular polygon; the outer ring is
/// exactly the polygon.
TriMesh disc_base_mesh(const PrefractalBoundary& b);

/// Picks the base mesher appropriate to the domain kind.
TriMesh base_mesh(const DomainSpec& spec, const PrefractalBoundary& b);

// Grading and refinement ---------------------------------------------------

double grisvard_target_size(double corner_distance, const GradingParams& g);
double grisvard_target_size(const Point2& x, const PrefractalBoundary& b, const GradingParams& g);

/// Bisects the marked triangles (newest-vertex bisection) and closes hanging
/// nodes. Parent links of the result point into `m`.
TriMesh bisect_marked(const TriMesh& m, const std::vector<std::uint8_t>& marked);

/// Bisects until every triangle meets the Grisvard size field.
TriMesh refine_to_size(const TriMesh& m, const PrefractalBoundary& b, const GradingParams& g);

struct GrisvardReport {
  double max_ratio = 0.0;  // max h_T / tau(centroid T)
  int worst_triangle = -1;
  bool pass = false;
  double min_angle_deg = 0.0;
  std::size_t triangles = 0;
};
GrisvardReport check_grisvard(const TriMesh& m, const PrefractalBoundary& b, const GradingParams& g);

/// Two bisection generations on every triangle: 4 children each.
TriMesh uniform_refine(const TriMesh& m);

inline constexpr int kMaxRefineSweeps = 60;

}  // namespace kochfem
