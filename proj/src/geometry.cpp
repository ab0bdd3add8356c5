#include "kochfem/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace kochfem {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt3 = std::numbers::sqrt3;

Point2 rotate_left(const Point2& v) { return {-v.y(), v.x()}; }

bool on_segment(const Point2& a, const Point2& b, const Point2& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

// Closed-segment intersection test.
bool segments_intersect(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
  const int d1 = sign(orient2(c, d, a));
  const int d2 = sign(orient2(c, d, b));
  const int d3 = sign(orient2(a, b, c));
  const int d4 = sign(orient2(a, b, d));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  if (d1 == 0 && on_segment(c, d, a)) return true;
  if (d2 == 0 && on_segment(c, d, b)) return true;
  if (d3 == 0 && on_segment(a, b, c)) return true;
  if (d4 == 0 && on_segment(a, b, d)) return true;
  return false;
}

double point_segment_distance(const Point2& x, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (x - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (x - (a + t * ab)).norm();
}

}  // namespace

Point2 DomainSpec::snowflake_center() { return {0.5, kSqrt3 / 6.0}; }

DomainSpec DomainSpec::snowflake(int level) { return {Snowflake{level}, snowflake_center()}; }

DomainSpec DomainSpec::circle(double radius, int segments) {
  return {CirclePolygon{radius, segments}, snowflake_center()};
}

DomainSpec DomainSpec::unit_square() { return {UnitSquare{}, Point2(0.5, 0.5)}; }

void DomainSpec::validate() const {
  if (!center.allFinite()) throw GeometryError("domain center must be finite");
  if (const auto* s = std::get_if<Snowflake>(&shape)) {
    if (s->level < 0 || s->level > kMaxSnowflakeLevel)
      throw GeometryError("snowflake level must lie in [0, 8], got " + std::to_string(s->level));
  } else if (const auto* c = std::get_if<CirclePolygon>(&shape)) {
    if (!(c->radius > 0.0) || !std::isfinite(c->radius))
      throw GeometryError("circle radius must be positive");
    if (c->segments < 8) throw GeometryError("circle needs at least 8 segments");
  }
}

std::string DomainSpec::label() const {
  if (const auto* s = std::get_if<Snowflake>(&shape)) return "Omega_" + std::to_string(s->level);
  if (std::holds_alternative<CirclePolygon>(shape)) return "Omega_0";
  return "unit_square";
}

std::array<Point2, 5> koch_subdivide(const Point2& p, const Point2& q, Side outward) {
  const Point2 d = q - p;
  if (!(d.norm() >= 1e-14)) throw GeometryError("koch_subdivide: degenerate segment");
  const Point2 a = p + d / 3.0;
  const Point2 b = p + 2.0 * d / 3.0;
  Point2 normal = rotate_left(d) * (kSqrt3 / 6.0);
  if (outward == Side::Right) normal = -normal;
  return {p, a, 0.5 * (p + q) + normal, b, q};
}

PrefractalBoundary build_snowflake(int level) {
  if (level < 0 || level > kMaxSnowflakeLevel)
    throw GeometryError("snowflake level must lie in [0, 8], got " + std::to_string(level));

  std::vector<Point2> loop{Point2(0.0, 0.0), Point2(1.0, 0.0), Point2(0.5, kSqrt3 / 2.0)};
  for (int k = 0; k < level; ++k) {
    std::vector<Point2> next;
    next.reserve(loop.size() * 4);
    for (std::size_t i = 0; i < loop.size(); ++i) {
      // Counterclockwise traversal: the exterior lies to the right.
      const auto pts = koch_subdivide(loop[i], loop[(i + 1) % loop.size()], Side::Right);
      next.insert(next.end(), pts.begin(), pts.end() - 1);
    }
    loop = std::move(next);
  }

  PrefractalBoundary b = make_polygon(std::move(loop), DomainSpec::snowflake_center());
  b.level = level;
  return b;
}

PrefractalBoundary circle_polygon(double radius, int segments, const Point2& center) {
  if (!(radius > 0.0)) throw GeometryError("circle radius must be positive");
  if (segments < 8) throw GeometryError("circle needs at least 8 segments");
  std::vector<Point2> loop;
  loop.reserve(segments);
  for (int i = 0; i < segments; ++i) {
    const double theta = 2.0 * kPi * i / segments;
    loop.emplace_back(center.x() + radius * std::cos(theta), center.y() + radius * std::sin(theta));
  }
  return make_polygon(std::move(loop), center);
}

PrefractalBoundary unit_square_boundary() {
  return make_polygon({Point2(0, 0), Point2(1, 0), Point2(1, 1), Point2(0, 1)}, Point2(0.5, 0.5));
}

PrefractalBoundary build_boundary(const DomainSpec& spec) {
  spec.validate();
  if (const auto* s = std::get_if<Snowflake>(&spec.shape)) {
    PrefractalBoundary b = build_snowflake(s->level);
    b.center = spec.center;
    return b;
  }
  if (const auto* c = std::get_if<CirclePolygon>(&spec.shape))
    return circle_polygon(c->radius, c->segments, spec.center);
  PrefractalBoundary b = unit_square_boundary();
  b.center = spec.center;
  return b;
}

PrefractalBoundary make_polygon(std::vector<Point2> vertices, Point2 center) {
  for (const auto& v : vertices)
    if (!v.allFinite()) throw GeometryError("polygon vertex is not finite");
  PrefractalBoundary b;
  b.reentrant = classify_corners(vertices);
  b.vertices = std::move(vertices);
  b.center = center;
  return b;
}

std::vector<double> interior_angles(const std::vector<Point2>& vertices) {
  const std::size_t n = vertices.size();
  std::vector<double> angles(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 e_in = vertices[i] - vertices[(i + n - 1) % n];
    const Point2 e_out = vertices[(i + 1) % n] - vertices[i];
    const double turn = std::atan2(cross2(e_in, e_out), e_in.dot(e_out));
    angles[i] = kPi - turn;
  }
  return angles;
}

std::vector<int> classify_corners(const std::vector<Point2>& vertices) {
  if (vertices.size() < 3) throw GeometryError("polygon needs at least 3 vertices");
  if (!is_simple_polygon(vertices)) throw GeometryError("polygon is not simple");
  if (!(signed_area(vertices) > 0.0)) throw GeometryError("polygon is not counterclockwise");
  const auto angles = interior_angles(vertices);
  std::vector<int> reentrant;
  for (std::size_t i = 0; i < angles.size(); ++i)
    if (angles[i] > kPi + kCornerAngleTol) reentrant.push_back(static_cast<int>(i));
  return reentrant;
}

bool is_simple_polygon(const std::vector<Point2>& vertices) {
  const std::size_t n = vertices.size();
  if (n < 3) return false;

  Point2 lo = vertices.front();
  Point2 hi = vertices.front();
  for (const auto& v : vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const int cells = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(n))));
  const Point2 extent = (hi - lo).cwiseMax(Point2::Constant(1e-300));
  const double cw = extent.x() / cells;
  const double ch = extent.y() / cells;
  auto cell_of = [&](double v, double origin, double size) {
    return std::clamp(static_cast<int>((v - origin) / size), 0, cells - 1);
  };

  std::vector<std::vector<int>> buckets(static_cast<std::size_t>(cells) * cells);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = vertices[i];
    const Point2& b = vertices[(i + 1) % n];
    if ((b - a).norm() == 0.0) return false;
    const int x0 = cell_of(std::min(a.x(), b.x()), lo.x(), cw);
    const int x1 = cell_of(std::max(a.x(), b.x()), lo.x(), cw);
    const int y0 = cell_of(std::min(a.y(), b.y()), lo.y(), ch);
    const int y1 = cell_of(std::max(a.y(), b.y()), lo.y(), ch);
    for (int cy = y0; cy <= y1; ++cy)
      for (int cx = x0; cx <= x1; ++cx) buckets[cy * cells + cx].push_back(static_cast<int>(i));
  }

  for (const auto& bucket : buckets) {
    for (std::size_t s = 0; s < bucket.size(); ++s) {
      for (std::size_t t = s + 1; t < bucket.size(); ++t) {
        const std::size_t i = bucket[s];
        const std::size_t j = bucket[t];
        const Point2& a = vertices[i];
        const Point2& b = vertices[(i + 1) % n];
        const Point2& c = vertices[j];
        const Point2& d = vertices[(j + 1) % n];
        const bool adjacent = (j == (i + 1) % n) || (i == (j + 1) % n);
        if (adjacent) {
          // Adjacent edges share one vertex; they must not fold back onto each other.
          const Point2 shared = (j == (i + 1) % n) ? c : a;
          const Point2 u = ((j == (i + 1) % n) ? a : b) - shared;
          const Point2 w = ((j == (i + 1) % n) ? d : c) - shared;
          if (cross2(u, w) == 0.0 && u.dot(w) > 0.0) return false;
          continue;
        }
        if (segments_intersect(a, b, c, d)) return false;
      }
    }
  }
  return true;
}

double signed_area(const std::vector<Point2>& vertices) {
  double twice = 0.0;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) twice += cross2(vertices[i], vertices[(i + 1) % n]);
  return 0.5 * twice;
}

double polygon_area(const PrefractalBoundary& b) { return signed_area(b.vertices); }

double boundary_length(const PrefractalBoundary& b) {
  double length = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) length += (b.next(i) - b.vertex(i)).norm();
  return length;
}

double snowflake_length(int level) { return 3.0 * std::pow(4.0 / 3.0, level); }

double distance_to_reentrant(const Point2& x, const PrefractalBoundary& b) {
  double best = std::numeric_limits<double>::infinity();
  for (int i : b.reentrant) best = std::min(best, (x - b.vertices[i]).norm());
  return best;
}

double distance_to_boundary(const Point2& x, const PrefractalBoundary& b) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < b.size(); ++i)
    best = std::min(best, point_segment_distance(x, b.vertex(i), b.next(i)));
  return best;
}

bool point_in_polygon(const Point2& x, const PrefractalBoundary& b) {
  int winding = 0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const Point2& p = b.vertex(i);
    const Point2& q = b.next(i);
    if (point_segment_distance(x, p, q) <= kOnBoundaryTol) return true;
    if (p.y() <= x.y()) {
      if (q.y() > x.y() && orient2(p, q, x) > 0.0) ++winding;
    } else if (q.y() <= x.y() && orient2(p, q, x) < 0.0) {
      --winding;
    }
  }
  return winding != 0;
}

ReentrantLocator::ReentrantLocator(const PrefractalBoundary& b) {
  points_.reserve(b.reentrant.size());
  for (int i : b.reentrant) points_.push_back(b.vertices[i]);
  if (points_.empty()) return;

  Point2 lo = points_.front();
  Point2 hi = points_.front();
  for (const auto& p : points_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double extent = std::max({hi.x() - lo.x(), hi.y() - lo.y(), 1e-12});
  const int per_side = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(points_.size()))));
  cell_ = extent / per_side;
  origin_ = lo;
  nx_ = static_cast<int>((hi.x() - lo.x()) / cell_) + 1;
  ny_ = static_cast<int>((hi.y() - lo.y()) / cell_) + 1;
  buckets_.resize(static_cast<std::size_t>(nx_) * ny_);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const int cx = std::min(nx_ - 1, static_cast<int>((points_[i].x() - lo.x()) / cell_));
    const int cy = std::min(ny_ - 1, static_cast<int>((points_[i].y() - lo.y()) / cell_));
    buckets_[cy * nx_ + cx].push_back(static_cast<int>(i));
  }
}

double ReentrantLocator::distance(const Point2& x) const {
  double best = std::numeric_limits<double>::infinity();
  if (points_.empty()) return best;
  const int hx = std::clamp(static_cast<int>(std::floor((x.x() - origin_.x()) / cell_)), 0, nx_ - 1);
  const int hy = std::clamp(static_cast<int>(std::floor((x.y() - origin_.y()) / cell_)), 0, ny_ - 1);
  const int max_ring = std::max(nx_, ny_);
  for (int ring = 0; ring <= max_ring; ++ring) {
    for (int cy = hy - ring; cy <= hy + ring; ++cy) {
      if (cy < 0 || cy >= ny_) continue;
      const bool edge_row = (cy == hy - ring || cy == hy + ring);
      const int step = edge_row ? 1 : 2 * ring;
      for (int cx = hx - ring; cx <= hx + ring; cx += std::max(step, 1)) {
        if (cx < 0 || cx >= nx_) continue;
        for (int i : buckets_[cy * nx_ + cx]) best = std::min(best, (x - points_[i]).norm());
      }
    }
    // Every unvisited cell lies at least ring * cell_ away from x.
    if (best <= ring * cell_) break;
  }
  return best;
}

}  // namespace kochfem
