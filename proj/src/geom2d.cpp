#include "freemesh/geom2d.hpp"

#include <algorithm>
#include <cmath>

namespace freemesh {

namespace {

// Orientation sign of c relative to the directed line a->b, with a tolerance
// scaled by the squared extent of the configuration.
int orient_sign(Point2 a, Point2 b, Point2 c) {
  const Point2 ab = b - a;
  const Point2 ac = c - a;
  const double v = cross(ab, ac);
  const double s = std::max({std::abs(ab.x), std::abs(ab.y), std::abs(ac.x), std::abs(ac.y)});
  const double tol = kGeomEps * s * s;
  if (v > tol) return 1;
  if (v < -tol) return -1;
  return 0;
}

// c is known to be collinear with a-b; true if it lies within the closed box.
bool within_box(Point2 a, Point2 b, Point2 c) {
  const double s = std::max(std::abs(b.x - a.x), std::abs(b.y - a.y));
  const double tol = kGeomEps * std::max(s, 1e-300);
  return c.x >= std::min(a.x, b.x) - tol && c.x <= std::max(a.x, b.x) + tol &&
         c.y >= std::min(a.y, b.y) - tol && c.y <= std::max(a.y, b.y) + tol;
}

double quad_scale(const QuadElement& q) {
  double s = 0.0;
  for (std::size_t k = 0; k < 4; ++k) s = std::max(s, distance(q.corners[k], q.corners[(k + 1) % 4]));
  return s;
}

}  // namespace

double ccw_angle(Point2 from, Point2 to) {
  double a = std::atan2(cross(from, to), dot(from, to));
  if (a < 0.0) a += 2.0 * kPi;
  return a;
}

PolyBoundary::PolyBoundary(std::vector<Point2> vertices, OrientationPolicy policy)
    : vertices_(std::move(vertices)) {
  if (vertices_.size() < 3) throw GeometryError("boundary needs at least 3 vertices");
  for (const auto& p : vertices_) {
    if (!is_finite(p)) throw GeometryError("boundary vertex is not finite");
  }
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (vertices_[i] == vertices_[(i + 1) % vertices_.size()]) {
      throw GeometryError("boundary has repeated consecutive vertices at index " + std::to_string(i));
    }
  }
  const double area = signed_area(vertices_);
  if (area == 0.0) throw GeometryError("boundary has zero area");
  if (area > 0.0) {
    if (policy == OrientationPolicy::require_clockwise) {
      throw GeometryError("boundary is counterclockwise; expected clockwise");
    }
    std::reverse(vertices_.begin(), vertices_.end());
  }
  if (!is_simple(vertices_)) throw GeometryError("boundary is not a simple loop");
  update_perimeter();
}

PolyBoundary PolyBoundary::trusted(std::vector<Point2> vertices) {
  PolyBoundary b;
  b.vertices_ = std::move(vertices);
  b.update_perimeter();
  return b;
}

std::size_t PolyBoundary::wrap(std::size_t i, std::ptrdiff_t offset) const {
  const auto n = static_cast<std::ptrdiff_t>(vertices_.size());
  auto k = (static_cast<std::ptrdiff_t>(i) + offset) % n;
  if (k < 0) k += n;
  return static_cast<std::size_t>(k);
}

void PolyBoundary::update_perimeter() {
  perimeter_ = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    perimeter_ += distance(vertices_[i], vertices_[(i + 1) % vertices_.size()]);
  }
}

double signed_area(std::span<const Point2> loop) {
  if (loop.size() < 3) throw GeometryError("signed_area needs at least 3 vertices");
  double twice = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Point2& a = loop[i];
    const Point2& b = loop[(i + 1) % loop.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

double signed_area(const PolyBoundary& poly) { return signed_area(std::span<const Point2>(poly.vertices())); }

double interior_angle(std::span<const Point2> loop, std::size_t i) {
  const std::size_t n = loop.size();
  if (i >= n) throw GeometryError("interior_angle: index out of range");
  const Point2 v = loop[i];
  const Point2 to_prev = loop[(i + n - 1) % n] - v;
  const Point2 to_next = loop[(i + 1) % n] - v;
  if (norm(to_prev) == 0.0 || norm(to_next) == 0.0) {
    throw GeometryError("interior_angle: coincident neighbour vertex");
  }
  // With clockwise storage the domain lies counterclockwise from the previous
  // vertex's direction to the next vertex's direction.
  return to_degrees(ccw_angle(to_prev, to_next));
}

double interior_angle(const PolyBoundary& poly, std::size_t i) {
  return interior_angle(std::span<const Point2>(poly.vertices()), i);
}

bool segments_intersect(Point2 a1, Point2 a2, Point2 b1, Point2 b2) {
  const int d1 = orient_sign(b1, b2, a1);
  const int d2 = orient_sign(b1, b2, a2);
  const int d3 = orient_sign(a1, a2, b1);
  const int d4 = orient_sign(a1, a2, b2);
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  if (d1 == 0 && within_box(b1, b2, a1)) return true;
  if (d2 == 0 && within_box(b1, b2, a2)) return true;
  if (d3 == 0 && within_box(a1, a2, b1)) return true;
  if (d4 == 0 && within_box(a1, a2, b2)) return true;
  return false;
}

double point_segment_distance(Point2 p, Point2 s1, Point2 s2) {
  const Point2 d = s2 - s1;
  const double len2 = dot(d, d);
  if (len2 == 0.0) return distance(p, s1);
  const double t = std::clamp(dot(p - s1, d) / len2, 0.0, 1.0);
  return distance(p, s1 + t * d);
}

double distance_to_loop(Point2 p, std::span<const Point2> loop) {
  double best = INFINITY;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    best = std::min(best, point_segment_distance(p, loop[i], loop[(i + 1) % loop.size()]));
  }
  return best;
}

bool point_in_polygon(Point2 p, std::span<const Point2> loop) {
  bool inside = false;
  double extent = 0.0;
  const std::size_t n = loop.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2 a = loop[i];
    const Point2 b = loop[j];
    extent = std::max(extent, distance(a, b));
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  if (!inside) return false;
  return distance_to_loop(p, loop) > kGeomEps * extent;
}

bool is_simple(std::span<const Point2> loop) {
  const std::size_t n = loop.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 prev = loop[(i + n - 1) % n];
    const Point2 v = loop[i];
    const Point2 next = loop[(i + 1) % n];
    if (v == next) return false;
    // Adjacent edges folding back onto each other.
    if (orient_sign(prev, v, next) == 0 && dot(prev - v, next - v) > 0.0) return false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a1 = loop[i];
    const Point2 a2 = loop[(i + 1) % n];
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the wrap
      if (segments_intersect(a1, a2, loop[j], loop[(j + 1) % n])) return false;
    }
  }
  return true;
}

std::vector<Polar> polar_normalize(std::span<const Point2> points, Point2 origin, Point2 ref_point,
                                   double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw GeometryError("polar_normalize: scale must be positive");
  const Point2 ref_dir = ref_point - origin;
  if (norm(ref_dir) == 0.0) throw GeometryError("polar_normalize: reference point coincides with origin");
  std::vector<Polar> out;
  out.reserve(points.size());
  for (const Point2& p : points) {
    const Point2 d = p - origin;
    const double r = norm(d);
    out.push_back({r / scale, r == 0.0 ? 0.0 : std::atan2(cross(ref_dir, d), dot(ref_dir, d))});
  }
  return out;
}

bool quad_is_valid(const QuadElement& q, const PolyBoundary& poly, const QuadBoundaryMap& on_boundary) {
  const auto& c = q.corners;
  for (const auto& p : c) {
    if (!is_finite(p)) return false;
  }
  const double scale = quad_scale(q);
  const double len_tol = kGeomEps * scale;
  if (!(scale > 0.0)) return false;
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = a + 1; b < 4; ++b) {
      if (distance(c[a], c[b]) <= len_tol) return false;
    }
  }

  // Simple, clockwise, strictly convex.
  if (segments_intersect(c[0], c[1], c[2], c[3]) || segments_intersect(c[1], c[2], c[3], c[0])) return false;
  const std::span<const Point2> loop(c);
  if (!(signed_area(loop) < -kGeomEps * scale * scale)) return false;
  for (std::size_t k = 0; k < 4; ++k) {
    const double ang = interior_angle(loop, k);
    if (!(ang > 1e-7 && ang < 180.0 - 1e-7)) return false;
  }

  const auto& verts = poly.vertices();
  const std::size_t n = verts.size();
  auto adjacent = [&](std::size_t i, std::size_t j) { return poly.wrap(i, 1) == j || poly.wrap(j, 1) == i; };

  for (std::size_t k = 0; k < 4; ++k) {
    const std::size_t k2 = (k + 1) % 4;
    const auto ia = on_boundary[k];
    const auto ib = on_boundary[k2];
    if (ia && ib && adjacent(*ia, *ib)) continue;  // existing front edge

    const Point2 p = c[k];
    const Point2 r = c[k2];
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t j2 = (j + 1) % n;
      std::optional<Point2> shared;
      Point2 quad_other{};
      Point2 edge_other{};
      int shared_count = 0;
      for (auto [qi, qo] : {std::pair{ia, r}, std::pair{ib, p}}) {
        if (!qi) continue;
        if (*qi == j) {
          ++shared_count;
          shared = verts[j];
          quad_other = qo;
          edge_other = verts[j2];
        } else if (*qi == j2) {
          ++shared_count;
          shared = verts[j2];
          quad_other = qo;
          edge_other = verts[j];
        }
      }
      if (shared_count == 0) {
        if (segments_intersect(p, r, verts[j], verts[j2])) return false;
      } else if (shared_count == 1) {
        // Touching at the shared vertex is fine; running along the edge is not.
        const Point2 u = quad_other - *shared;
        const Point2 v = edge_other - *shared;
        if (std::abs(cross(u, v)) <= kGeomEps * norm(u) * norm(v) && dot(u, v) > 0.0) return false;
      }
    }
    // The new edge must run through the domain interior.
    if (!point_in_polygon(0.5 * (p + r), verts)) return false;
  }

  for (std::size_t k = 0; k < 4; ++k) {
    if (on_boundary[k]) continue;
    if (!point_in_polygon(c[k], verts)) return false;
    if (distance_to_loop(c[k], verts) <= len_tol) return false;
  }

  // No other front vertex may sit inside or on the element.
  for (std::size_t j = 0; j < n; ++j) {
    bool is_corner = false;
    for (const auto& ob : on_boundary) is_corner = is_corner || (ob && *ob == j);
    if (is_corner) continue;
    bool inside_or_on = true;
    for (std::size_t k = 0; k < 4 && inside_or_on; ++k) {
      const Point2 e = c[(k + 1) % 4] - c[k];
      const Point2 w = verts[j] - c[k];
      inside_or_on = cross(e, w) <= kGeomEps * norm(e) * std::max(norm(w), scale);
    }
    if (inside_or_on) return false;
  }
  return true;
}

std::array<double, 4> quad_interior_angles_deg(const QuadElement& q) {
  std::array<Point2, 4> cw = q.corners;
  const bool reversed = signed_area(std::span<const Point2>(cw)) > 0.0;
  if (reversed) std::reverse(cw.begin(), cw.end());
  std::array<double, 4> out{};
  for (std::size_t k = 0; k < 4; ++k) out[k] = interior_angle(std::span<const Point2>(cw), k);
  // Undo the reversal so out[k] belongs to q.corners[k].
  if (reversed) std::reverse(out.begin(), out.end());
  return out;
}

std::array<double, 4> quad_edge_lengths(const QuadElement& q) {
  std::array<double, 4> out{};
  for (std::size_t k = 0; k < 4; ++k) out[k] = distance(q.corners[k], q.corners[(k + 1) % 4]);
  return out;
}

double quad_max_diagonal(const QuadElement& q) {
  return std::max(distance(q.corners[0], q.corners[2]), distance(q.corners[1], q.corners[3]));
}

double quad_area(const QuadElement& q) { return std::abs(signed_area(std::span<const Point2>(q.corners))); }

}  // namespace freemesh
