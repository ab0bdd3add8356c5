#pragma once

#include "kochfem/field.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace kt {

using kochfem::Point2;

inline const double kSqrt3 = std::sqrt(3.0);

inline double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Ray casting to +x, half-open edge rule. Independent of the library's
// winding-number test.
inline bool crossing_number_inside(const Point2& x, const std::vector<Point2>& poly) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point2& a = poly[i];
    const Point2& b = poly[j];
    if ((a.y() > x.y()) != (b.y() > x.y())) {
      const double xc = a.x() + (x.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (x.x() < xc) inside = !inside;
    }
  }
  return inside;
}

// k x k structured square mesh on [0,1]^2, diagonals alternating, parent -1.
inline kochfem::TriMesh square_grid(int k) {
  kochfem::TriMesh m;
  for (int j = 0; j <= k; ++j)
    for (int i = 0; i <= k; ++i) {
      m.vertices.emplace_back(double(i) / k, double(j) / k);
      m.boundary_vertex.push_back(i == 0 || j == 0 || i == k || j == k);
    }
  auto id = [k](int i, int j) { return j * (k + 1) + i; };
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      if ((i + j) % 2 == 0) {
        m.triangles.push_back({a, b, c});
        m.triangles.push_back({a, c, d});
        m.refinement_edge.insert(m.refinement_edge.end(), {1, 2});  // opposite the right angle
      } else {
        m.triangles.push_back({a, b, d});
        m.triangles.push_back({b, c, d});
        m.refinement_edge.insert(m.refinement_edge.end(), {0, 1});
      }
    }
  m.parent_triangle.assign(m.triangles.size(), -1);
  return m;
}

inline kochfem::MeshPtr share(kochfem::TriMesh m) { return std::make_shared<const kochfem::TriMesh>(std::move(m)); }

}  // namespace kt
