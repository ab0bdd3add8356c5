#pragma once

#include "kochfem/common.hpp"

#include <array>
#include <limits>
#include <variant>
#include <vector>

namespace kochfem {

/// Closed polygonal boundary, counterclockwise, first vertex not repeated.
struct PrefractalBoundary {
  int level = 0;  // snowflake level; 0 for non-snowflake polygons
  std::vector<Point2> vertices;
  std::vector<int> reentrant;  // sorted vertex indices with interior angle > pi
  Point2 center = Point2::Zero();

  std::size_t size() const { return vertices.size(); }
  const Point2& vertex(std::size_t i) const { return vertices[i]; }
  const Point2& next(std::size_t i) const { return vertices[(i + 1) % vertices.size()]; }
};

// Domain descriptions ------------------------------------------------------

struct Snowflake {
  int level = 0;
};
struct CirclePolygon {
  double radius = 0.5;
  int segments = 256;
};
struct UnitSquare {};

struct DomainSpec {
  std::variant<Snowflake, CirclePolygon, UnitSquare> shape;
  Point2 center = snowflake_center();

  static Point2 snowflake_center();
  static DomainSpec snowflake(int level);
  static DomainSpec circle(double radius = 0.5, int segments = 256);
  static DomainSpec unit_square();

  /// Throws GeometryError when a field is out of range.
  void validate() const;
  std::string label() const;
};

inline constexpr int kMaxSnowflakeLevel = 8;
inline constexpr double kCornerAngleTol = 1e-9;
inline constexpr double kOnBoundaryTol = 1e-12;

enum class Side { Left, Right };

/// Replaces segment pq by the four Koch sub-segments, bump on `outward` side
/// (relative to the direction p -> q). Returns {p, a, apex, b, q}.
std::array<Point2, 5> koch_subdivide(const Point2& p, const Point2& q, Side outward);

/// Level-n Koch snowflake grown outward from the unit triangle
/// C=(0,0), B=(1,0), A=(1/2, sqrt(3)/2).
PrefractalBoundary build_snowflake(int level);

/// Regular m-gon inscribed in the circle, first vertex at angle 0.
PrefractalBoundary circle_polygon(double radius, int segments, const Point2& center);

PrefractalBoundary unit_square_boundary();

/// Builds the boundary for any domain kind.
PrefractalBoundary build_boundary(const DomainSpec& spec);

/// Wraps a raw CCW vertex loop, validating simplicity and classifying corners.
PrefractalBoundary make_polygon(std::vector<Point2> vertices, Point2 center);

/// Interior angle at every vertex of a CCW polygon, in (0, 2pi).
std::vector<double> interior_angles(const std::vector<Point2>& vertices);

/// Vertices whose interior angle exceeds pi + kCornerAngleTol. Throws on a
/// non-simple or clockwise polygon.
std::vector<int> classify_corners(const std::vector<Point2>& vertices);

/// True when no two non-adjacent edges intersect. Grid-bucketed, so cheap
/// enough for level-8 snowflakes.
bool is_simple_polygon(const std::vector<Point2>& vertices);

double signed_area(const std::vector<Point2>& vertices);
double polygon_area(const PrefractalBoundary& b);
double boundary_length(const PrefractalBoundary& b);

/// Closed-form perimeter 3 (4/3)^n of the level-n snowflake.
double snowflake_length(int level);

/// Minimum distance to a reentrant vertex; +inf when there are none.
double distance_to_reentrant(const Point2& x, const PrefractalBoundary& b);

/// Distance from x to the polygon boundary.
double distance_to_boundary(const Point2& x, const PrefractalBoundary& b);

/// Winding-number test; points within kOnBoundaryTol of an edge count as inside.
bool point_in_polygon(const Point2& x, const PrefractalBoundary& b);

/// Nearest-reentrant-vertex queries backed by a uniform bucket grid.
/// Returns exactly the same value as distance_to_reentrant.
class ReentrantLocator {
 public:
  explicit ReentrantLocator(const PrefractalBoundary& b);
  double distance(const Point2& x) const;

 private:
  std::vector<Point2> points_;
  Point2 origin_ = Point2::Zero();
  double cell_ = 1.0;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<std::vector<int>> buckets_;
};

}  // namespace kochfem
