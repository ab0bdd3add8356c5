#include "kochfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <unordered_map>

namespace kochfem {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint32_t>(std::min(a, b));
  const auto hi = static_cast<std::uint32_t>(std::max(a, b));
  return (static_cast<std::uint64_t>(lo) << 32) | hi;
}

std::array<double, 3> corner_angles(const Eigen::Matrix<double, 2, 3>& c) {
  std::array<double, 3> out{};
  for (int k = 0; k < 3; ++k) {
    const Point2 u = c.col((k + 1) % 3) - c.col(k);
    const Point2 w = c.col((k + 2) % 3) - c.col(k);
    out[k] = std::atan2(std::abs(cross2(u, w)), u.dot(w));
  }
  return out;
}

// Longest edge; near-ties go to the edge whose opposite vertex has the lowest index.
std::uint8_t longest_edge(const TriMesh& m, std::size_t t) {
  const auto& tri = m.triangles[t];
  std::array<double, 3> len{};
  for (int k = 0; k < 3; ++k)
    len[k] = (m.vertices[tri[(k + 2) % 3]] - m.vertices[tri[(k + 1) % 3]]).norm();
  const double longest = *std::max_element(len.begin(), len.end());
  int best = -1;
  for (int k = 0; k < 3; ++k) {
    if (len[k] < longest * (1.0 - 1e-12)) continue;
    if (best < 0 || tri[k] < tri[best]) best = k;
  }
  return static_cast<std::uint8_t>(best);
}

void finish_base_mesh(TriMesh& m) {
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    if (!(triangle_area(m.corners(t)) > 1e-16))
      throw MeshError("base mesh contains a degenerate or inverted triangle");
  }
  m.parent_triangle.assign(m.num_triangles(), -1);
  m.refinement_edge.resize(m.num_triangles());
  for (std::size_t t = 0; t < m.num_triangles(); ++t) m.refinement_edge[t] = longest_edge(m, t);
  m.boundary_vertex = topological_boundary(m);
}

// Mutable bisection state shared by refine_to_size and uniform_refine.
class Bisector {
 public:
  explicit Bisector(const TriMesh& m)
      : vertices_(m.vertices), triangles_(m.triangles), refinement_(m.refinement_edge) {
    ancestor_.resize(triangles_.size());
    for (std::size_t t = 0; t < ancestor_.size(); ++t) ancestor_[t] = static_cast<int>(t);
  }

  std::size_t size() const { return triangles_.size(); }
  const std::vector<Point2>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }

  Eigen::Matrix<double, 2, 3> corners(std::size_t t) const {
    Eigen::Matrix<double, 2, 3> c;
    for (int k = 0; k < 3; ++k) c.col(k) = vertices_[triangles_[t][k]];
    return c;
  }

  void bisect(std::size_t t) {
    const int k = refinement_[t];
    const int apex = triangles_[t][k];
    const int a = triangles_[t][(k + 1) % 3];
    const int b = triangles_[t][(k + 2) % 3];
    const int mid = midpoint(a, b);
    triangles_[t] = {mid, apex, a};
    refinement_[t] = 0;
    triangles_.push_back({mid, b, apex});
    refinement_.push_back(0);
    ancestor_.push_back(ancestor_[t]);
  }

  /// Bisects triangles carrying a hanging node until the mesh conforms.
  void close() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t t = 0; t < triangles_.size(); ++t) {
        while (hanging(t)) {
          bisect(t);
          changed = true;
        }
      }
    }
  }

  TriMesh release() {
    TriMesh out;
    out.vertices = std::move(vertices_);
    out.triangles = std::move(triangles_);
    out.refinement_edge = std::move(refinement_);
    out.parent_triangle = std::move(ancestor_);
    out.boundary_vertex = topological_boundary(out);
    return out;
  }

 private:
  int midpoint(int a, int b) {
    const auto [it, inserted] = midpoints_.try_emplace(edge_key(a, b), static_cast<int>(vertices_.size()));
    if (inserted) vertices_.push_back(0.5 * (vertices_[a] + vertices_[b]));
    return it->second;
  }

  bool hanging(std::size_t t) const {
    const auto& tri = triangles_[t];
    for (int k = 0; k < 3; ++k)
      if (midpoints_.contains(edge_key(tri[k], tri[(k + 1) % 3]))) return true;
    return false;
  }

  std::vector<Point2> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<std::uint8_t> refinement_;
  std::vector<int> ancestor_;
  std::unordered_map<std::uint64_t, int> midpoints_;
};

}  // namespace

void GradingParams::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw MeshError("grading: h must be positive");
  if (!(eta > 0.25 && eta < 1.0)) throw MeshError("grading: eta must lie in (1/4, 1)");
  if (!(sigma >= 1.0) || !std::isfinite(sigma)) throw MeshError("grading: sigma must be >= 1");
  if (!(cutoff > 0.0) || !std::isfinite(cutoff)) throw MeshError("grading: cutoff R must be positive");
}

double GradingParams::corner_size() const { return std::pow(h, 1.0 / (1.0 - eta)); }

double min_angle_deg(const Eigen::Matrix<double, 2, 3>& c) {
  const auto a = corner_angles(c);
  return *std::min_element(a.begin(), a.end()) * 180.0 / kPi;
}

double max_angle_deg(const Eigen::Matrix<double, 2, 3>& c) {
  const auto a = corner_angles(c);
  return *std::max_element(a.begin(), a.end()) * 180.0 / kPi;
}

MeshStats mesh_stats(const TriMesh& m) {
  MeshStats s;
  s.vertices = m.num_vertices();
  s.triangles = m.num_triangles();
  s.min_angle_deg = 180.0;
  s.min_diameter = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto c = m.corners(t);
    s.min_angle_deg = std::min(s.min_angle_deg, min_angle_deg(c));
    s.max_angle_deg = std::max(s.max_angle_deg, max_angle_deg(c));
    const double d = triangle_diameter(c);
    s.max_diameter = std::max(s.max_diameter, d);
    s.min_diameter = std::min(s.min_diameter, d);
    s.area += triangle_area(c);
  }
  return s;
}

bool is_conforming(const TriMesh& m) {
  std::unordered_map<std::uint64_t, int> incidence;
  incidence.reserve(m.num_triangles() * 2);
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    if (!(triangle_area(m.corners(t)) > 1e-16)) return false;
    const auto& tri = m.triangles[t];
    for (int k = 0; k < 3; ++k) ++incidence[edge_key(tri[k], tri[(k + 1) % 3])];
  }
  // A hanging node leaves its two half-edges and the long edge all used once,
  // which gives the long edge's endpoints boundary degree 4.
  std::vector<int> degree(m.num_vertices(), 0);
  for (const auto& [key, count] : incidence) {
    if (count > 2) return false;
    if (count == 1) {
      ++degree[key >> 32];
      ++degree[key & 0xffffffffu];
    }
  }
  for (int d : degree)
    if (d != 0 && d != 2) return false;
  // Simply connected domains: V - E + T = 1.
  const auto euler = static_cast<long long>(m.num_vertices()) - static_cast<long long>(incidence.size()) +
                     static_cast<long long>(m.num_triangles());
  return euler == 1;
}

std::vector<std::uint8_t> topological_boundary(const TriMesh& m) {
  std::unordered_map<std::uint64_t, int> incidence;
  incidence.reserve(m.num_triangles() * 2);
  for (const auto& tri : m.triangles)
    for (int k = 0; k < 3; ++k) ++incidence[edge_key(tri[k], tri[(k + 1) % 3])];
  std::vector<std::uint8_t> flags(m.num_vertices(), 0);
  for (const auto& [key, count] : incidence) {
    if (count != 1) continue;
    flags[key >> 32] = 1;
    flags[key & 0xffffffffu] = 1;
  }
  return flags;
}

TriMesh base_lattice_mesh(const PrefractalBoundary& b) {
  const double pitch = std::pow(3.0, -b.level);
  const double row = pitch * std::numbers::sqrt3 / 2.0;
  Point2 lo = b.vertices.front();
  Point2 hi = b.vertices.front();
  for (const auto& v : b.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const int j_lo = static_cast<int>(std::floor(lo.y() / row)) - 1;
  const int j_hi = static_cast<int>(std::ceil(hi.y() / row)) + 1;

  auto position = [&](int i, int j) { return Point2(pitch * (i + 0.5 * j), row * j); };

  TriMesh m;
  std::map<std::pair<int, int>, int> index;
  auto vertex = [&](int i, int j) {
    const auto [it, inserted] = index.try_emplace({i, j}, static_cast<int>(m.vertices.size()));
    if (inserted) m.vertices.push_back(position(i, j));
    return it->second;
  };

  for (int j = j_lo; j <= j_hi; ++j) {
    const int i_lo = static_cast<int>(std::floor(lo.x() / pitch - 0.5 * j)) - 1;
    const int i_hi = static_cast<int>(std::ceil(hi.x() / pitch - 0.5 * j)) + 1;
    for (int i = i_lo; i <= i_hi; ++i) {
      const Point2 up = (position(i, j) + position(i + 1, j) + position(i, j + 1)) / 3.0;
      if (point_in_polygon(up, b))
        m.triangles.push_back({vertex(i, j), vertex(i + 1, j), vertex(i, j + 1)});
      const Point2 down = (position(i + 1, j) + position(i + 1, j + 1) + position(i, j + 1)) / 3.0;
      if (point_in_polygon(down, b))
        m.triangles.push_back({vertex(i + 1, j), vertex(i + 1, j + 1), vertex(i, j + 1)});
    }
  }
  finish_base_mesh(m);

  const double area = mesh_stats(m).area;
  const double expected = polygon_area(b);
  if (std::abs(area - expected) > 1e-10 * expected)
    throw MeshError("lattice tiling area does not match the polygon area");
  return m;
}

std::vector<Triangle> ear_clip(const std::vector<Point2>& polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) throw MeshError("ear_clip: polygon needs at least 3 vertices");
  if (!is_simple_polygon(polygon) || !(signed_area(polygon) > 0.0))
    throw MeshError("ear_clip: polygon must be simple and counterclockwise");
  std::vector<int> ring(n);
  for (std::size_t i = 0; i < n; ++i) ring[i] = static_cast<int>(i);

  std::vector<Triangle> out;
  out.reserve(n - 2);
  while (ring.size() > 3) {
    const std::size_t r = ring.size();
    int best = -1;
    double best_quality = -1.0;
    for (std::size_t k = 0; k < r; ++k) {
      const int a = ring[(k + r - 1) % r];
      const int v = ring[k];
      const int c = ring[(k + 1) % r];
      if (!(orient2(polygon[a], polygon[v], polygon[c]) > 0.0)) continue;
      bool blocked = false;
      for (int w : ring) {
        if (w == a || w == v || w == c) continue;
        const Point2& p = polygon[w];
        if (orient2(polygon[a], polygon[v], p) >= 0.0 && orient2(polygon[v], polygon[c], p) >= 0.0 &&
            orient2(polygon[c], polygon[a], p) >= 0.0) {
          blocked = true;
          break;
        }
      }
      if (blocked) continue;
      Eigen::Matrix<double, 2, 3> corners;
      corners << polygon[a], polygon[v], polygon[c];
      const double quality = min_angle_deg(corners);
      if (quality > best_quality) {
        best_quality = quality;
        best = static_cast<int>(k);
      }
    }
    if (best < 0) throw MeshError("ear_clip: no ear found; polygon is not simple");
    const std::size_t k = static_cast<std::size_t>(best);
    out.push_back({ring[(k + r - 1) % r], ring[k], ring[(k + 1) % r]});
    ring.erase(ring.begin() + best);
  }
  out.push_back({ring[0], ring[1], ring[2]});
  return out;
}

TriMesh polygon_base_mesh(const PrefractalBoundary& b) {
  TriMesh m;
  m.vertices = b.vertices;
  m.triangles = ear_clip(b.vertices);

  // Lawson flips towards the constrained Delaunay triangulation.
  bool flipped = true;
  while (flipped) {
    flipped = false;
    std::unordered_map<std::uint64_t, std::pair<int, int>> owner;  // edge -> (triangle, local)
    for (std::size_t t = 0; t < m.triangles.size() && !flipped; ++t) {
      const auto& tri = m.triangles[t];
      for (int k = 0; k < 3 && !flipped; ++k) {
        const std::uint64_t key = edge_key(tri[(k + 1) % 3], tri[(k + 2) % 3]);
        const auto it = owner.find(key);
        if (it == owner.end()) {
          owner.emplace(key, std::make_pair(static_cast<int>(t), k));
          continue;
        }
        const auto [s, l] = it->second;
        const int p = tri[k];
        const int q = m.triangles[s][l];
        const int a = tri[(k + 1) % 3];
        const int c = tri[(k + 2) % 3];
        const double angle_p =
            std::atan2(std::abs(orient2(m.vertices[p], m.vertices[a], m.vertices[c])),
                       (m.vertices[a] - m.vertices[p]).dot(m.vertices[c] - m.vertices[p]));
        const double angle_q =
            std::atan2(std::abs(orient2(m.vertices[q], m.vertices[a], m.vertices[c])),
                       (m.vertices[a] - m.vertices[q]).dot(m.vertices[c] - m.vertices[q]));
        if (angle_p + angle_q <= kPi + 1e-12) continue;
        // Quad p, a, q, c in CCW order; replace diagonal (a,c) by (p,q).
        m.triangles[t] = {p, a, q};
        m.triangles[s] = {q, c, p};
        flipped = true;
      }
    }
  }
  finish_base_mesh(m);
  return m;
}

TriMesh disc_base_mesh(const PrefractalBoundary& b) {
  const std::size_t n = b.size();
  const Point2 center = b.center;
  const double radius = (b.vertex(0) - center).norm();
  const double spacing = (b.vertex(1) - b.vertex(0)).norm();
  const double alpha0 = std::atan2(b.vertex(0).y() - center.y(), b.vertex(0).x() - center.x());

  TriMesh m;
  m.vertices = b.vertices;

  struct Ring {
    int first;
    int count;
    double start;  // angle of the first vertex
  };
  std::vector<Ring> rings{{0, static_cast<int>(n), alpha0}};

  const double step = spacing * std::numbers::sqrt3 / 2.0;
  double rho = radius;
  while (rho - step >= 0.7 * spacing) {
    rho -= step;
    const int count = std::max(3, static_cast<int>(std::lround(2.0 * kPi * rho / spacing)));
    const double start = rings.back().start + kPi / count;
    Ring ring{static_cast<int>(m.vertices.size()), count, start};
    for (int i = 0; i < count; ++i) {
      const double theta = start + 2.0 * kPi * i / count;
      m.vertices.emplace_back(center.x() + rho * std::cos(theta), center.y() + rho * std::sin(theta));
    }
    rings.push_back(ring);
  }

  // Zip consecutive rings: advance along whichever ring has the next smaller angle.
  for (std::size_t r = 0; r + 1 < rings.size(); ++r) {
    const Ring& outer = rings[r];
    const Ring& inner = rings[r + 1];
    auto outer_angle = [&](int i) { return outer.start + 2.0 * kPi * i / outer.count; };
    auto inner_angle = [&](int j) { return inner.start + 2.0 * kPi * j / inner.count; };
    auto outer_id = [&](int i) { return outer.first + ((i % outer.count) + outer.count) % outer.count; };
    auto inner_id = [&](int j) { return inner.first + ((j % inner.count) + inner.count) % inner.count; };
    int j = -1;
    while (inner_angle(j + 1) <= outer_angle(0)) ++j;
    while (inner_angle(j) > outer_angle(0)) --j;
    const int j_end = j + inner.count;
    int i = 0;
    while (i < outer.count || j < j_end) {
      const bool advance_outer =
          j >= j_end || (i < outer.count && outer_angle(i + 1) <= inner_angle(j + 1));
      if (advance_outer) {
        m.triangles.push_back({outer_id(i), outer_id(i + 1), inner_id(j)});
        ++i;
      } else {
        m.triangles.push_back({inner_id(j + 1), inner_id(j), outer_id(i)});
        ++j;
      }
    }
  }

  const int hub = static_cast<int>(m.vertices.size());
  m.vertices.push_back(center);
  const Ring& last = rings.back();
  for (int i = 0; i < last.count; ++i)
    m.triangles.push_back({hub, last.first + i, last.first + (i + 1) % last.count});

  finish_base_mesh(m);
  return m;
}

TriMesh base_mesh(const DomainSpec& spec, const PrefractalBoundary& b) {
  if (std::holds_alternative<Snowflake>(spec.shape)) return base_lattice_mesh(b);
  if (std::holds_alternative<CirclePolygon>(spec.shape)) return disc_base_mesh(b);
  return polygon_base_mesh(b);
}

double grisvard_target_size(double r, const GradingParams& g) {
  if (!g.graded) return g.sigma * g.h;
  const double inner = g.corner_size();
  if (r <= inner) return g.sigma * inner;
  if (r <= g.cutoff) return g.sigma * g.h * std::pow(r, g.eta);
  return g.sigma * g.h * std::pow(g.cutoff, g.eta);
}

double grisvard_target_size(const Point2& x, const PrefractalBoundary& b, const GradingParams& g) {
  return grisvard_target_size(distance_to_reentrant(x, b), g);
}

TriMesh bisect_marked(const TriMesh& m, const std::vector<std::uint8_t>& marked) {
  Bisector work(m);
  const std::size_t n = m.num_triangles();
  for (std::size_t t = 0; t < n; ++t)
    if (marked[t]) work.bisect(t);
  work.close();
  return work.release();
}

TriMesh refine_to_size(const TriMesh& m, const PrefractalBoundary& b, const GradingParams& g) {
  g.validate();
  const ReentrantLocator locator(b);
  Bisector work(m);
  std::vector<std::uint8_t> marked;
  for (int sweep = 0; sweep <= kMaxRefineSweeps; ++sweep) {
    const std::size_t n = work.size();
    marked.assign(n, 0);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
      for (std::size_t t = begin; t < end; ++t) {
        const auto c = work.corners(t);
        const Point2 centroid = c.rowwise().mean();
        marked[t] = triangle_diameter(c) > grisvard_target_size(locator.distance(centroid), g);
      }
    });
    if (std::find(marked.begin(), marked.end(), 1) == marked.end()) return work.release();
    if (sweep == kMaxRefineSweeps) break;
    for (std::size_t t = 0; t < n; ++t)
      if (marked[t]) work.bisect(t);
    work.close();
  }
  throw MeshError("refine_to_size: exceeded " + std::to_string(kMaxRefineSweeps) + " sweeps");
}

GrisvardReport check_grisvard(const TriMesh& m, const PrefractalBoundary& b, const GradingParams& g) {
  const ReentrantLocator locator(b);
  GrisvardReport report;
  report.triangles = m.num_triangles();
  report.min_angle_deg = 180.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto c = m.corners(t);
    const Point2 centroid = c.rowwise().mean();
    const double ratio = triangle_diameter(c) / grisvard_target_size(locator.distance(centroid), g);
    if (ratio > report.max_ratio) {
      report.max_ratio = ratio;
      report.worst_triangle = static_cast<int>(t);
    }
    report.min_angle_deg = std::min(report.min_angle_deg, min_angle_deg(c));
  }
  report.pass = report.max_ratio <= 1.0 + 1e-9;
  return report;
}

TriMesh uniform_refine(const TriMesh& m) {
  Bisector work(m);
  const std::size_t n = work.size();
  for (std::size_t t = 0; t < n; ++t) work.bisect(t);
  // Children of t sit at t and n + t; their refinement edges are the two
  // remaining edges of the parent, so every parent edge ends up split.
  const std::size_t n2 = work.size();
  for (std::size_t t = 0; t < n2; ++t) work.bisect(t);
  return work.release();
}

}  // namespace kochfem
